// Acceptance runner: one PASS/FAIL line per criterion, details indented below.
//   needs_acceptance [--threads N] [criterion ...]     (default: all, 1..11)

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cli_harness.hpp"
#include "needs/verify.hpp"

using namespace needs;
using namespace needs::verify;
namespace fs = std::filesystem;

namespace
{

unsigned threads = 1;

struct Outcome
{
  bool passed = true;
  std::string summary;
  std::vector<std::string> details;

  void take(const Report& r, const std::function<bool(const Check&)>& keep = {})
  {
    details.push_back("[" + r.suite + "] " + fmt(r.seconds, 4) + " s");
    for (const auto& n : r.notes) details.push_back("  " + n);
    for (const auto& c : r.checks) {
      if (keep && !keep(c)) continue;
      passed = passed && c.passed;
      details.push_back(std::string(c.passed ? "  pass  " : "  FAIL  ") + c.name + (c.detail.empty() ? "" : ": ") +
                        c.detail);
      if (!summary.empty()) summary += "; ";
      summary += c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
    }
  }
};

bool is_invariant(const Check& c) { return c.name.rfind("I_min", 0) == 0 || c.name.rfind("sum Q", 0) == 0; }

// Suites 1 and 2 feed criterion 3 too; run each once per process.
const Report& solver_report()
{
  static const Report r = solver_suite(200, 1);
  return r;
}
const Report& speedup_report()
{
  static const Report r = speedup_suite(50, 2);
  return r;
}

/// Discrete concavity along both axes: every second difference is non-positive.
bool grid_concave(const Surface& s)
{
  const auto n1 = s.axis1.values.size(), n2 = s.axis2.values.size();
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 1; j + 1 < n2; ++j)
      if (!(s.loglik(i, j - 1) + s.loglik(i, j + 1) - 2 * s.loglik(i, j) <= 0.0)) return false;
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 1; i + 1 < n1; ++i)
      if (!(s.loglik(i - 1, j) + s.loglik(i + 1, j) - 2 * s.loglik(i, j) <= 0.0)) return false;
  return true;
}

Outcome criterion_8()
{
  Outcome o;
  o.take(surface_suite(300, 200, 0.05, 0.05, threads));
  // Small-sample surface: reported only, non-concavity is permitted.
  const auto data = recovery_data(60);
  LoglikOptions opt;
  opt.draws = 50;
  opt.seed = 11;
  opt.threads = threads;
  const auto s = loglik_surface(data.zones, data.observations, grocery_population(), {"p1", linspace(0.7, 0.9, 5)},
                                {"q2", linspace(0.4, 0.6, 5)}, opt);
  o.details.push_back("  N=60, R=50 surface is " + std::string(grid_concave(s) ? "concave" : "not concave") +
                      " on the 5x5 grid; argmax (" + fmt(s.axis1.values[s.argmax1], 3) + ", " +
                      fmt(s.axis2.values[s.argmax2], 3) + ")");
  return o;
}

Outcome criterion_11()
{
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "needs_acceptance_determinism";
  fs::remove_all(root);
  const fs::path samples = NEEDS_SAMPLES_DIR;
  const std::string base = test::quote((samples / "base.toml").string());
  const fs::path data = root / "data";
  const auto prep = test::run_cli("synth -n 40 --zones 5 --seed 9 -o " + test::quote(data.string()), root);
  if (prep.code != 0) {
    o.passed = false;
    o.summary = "could not synthesize input data: " + prep.err;
    return o;
  }
  const std::string d = " -d " + test::quote(data.string());
  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "solve -c " + base + " --seed 4"},
      {"solve-multiweek", "solve -c " + test::quote((samples / "two_locations.toml").string()) + " --multiweek"},
      {"synth", "synth -n 200 --zones 10 --seed 4"},
      {"synth-ecommerce", "synth --preset ecommerce -n 200 --seed 4"},
      {"loglik", "loglik" + d + " -R 60 --seed 4"},
      {"loglik-surface", "loglik" + d + " -R 5 --choice-set 16 --seed 4 --surface p1=0.7:0.9:3 q2=0.4:0.6:3"},
      {"estimate", "estimate" + d + " -R 60 --choice-set 32 --free p1,q2 --budget 6 --seed 4"},
      {"verify", "verify --suite density,slopes,invariants --seed 4"}};
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> outs;
    std::vector<int> codes;
    for (unsigned t : {1u, 8u}) {
      const fs::path out = root / name / ("threads" + std::to_string(t));
      const auto r = test::run_cli(args + " --threads " + std::to_string(t) + " -o " + test::quote(out.string()),
                                   root / name / ("run" + std::to_string(t)));
      codes.push_back(r.code);
      outs.push_back(out);
    }
    std::string diff;
    const bool ran = codes[0] == 0 && codes[1] == 0;
    // Single-file outputs are compared directly, directories file by file.
    const bool same = ran && (fs::is_directory(outs[0]) ? test::same_tree(outs[0], outs[1], &diff)
                                                         : test::slurp(outs[0]) == test::slurp(outs[1]));
    o.passed = o.passed && same;
    o.details.push_back(std::string(same ? "  pass  " : "  FAIL  ") + name +
                        (ran ? (same ? "" : ": differs in " + (diff.empty() ? outs[0].filename().string() : diff))
                             : ": exit codes " + std::to_string(codes[0]) + "/" + std::to_string(codes[1])));
  }
  o.summary = "CLI outputs byte-identical across --threads 1 and 8";
  return o;
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria()
{
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> table{
      {1, {"solver-oracle equivalence", [] { Outcome o; o.take(solver_report(), [](const Check& c) { return !is_invariant(c); }); return o; }}},
      {2, {"speedup over grid oracle", [] { Outcome o; o.take(speedup_report(), [](const Check& c) { return !is_invariant(c); }); return o; }}},
      {3, {"inventory invariants", [] {
             Outcome o;
             o.take(solver_report(), is_invariant);
             o.take(speedup_report(), is_invariant);
             o.take(invariants_suite(3));
             return o;
           }}},
      {4, {"slope formula", [] { Outcome o; o.take(slope_suite(50, 4, 1e-5)); return o; }}},
      {5, {"piecewise accuracy", [] { Outcome o; o.take(pwl_suite(threads)); return o; }}},
      {6, {"synthesis statistics", [] { Outcome o; o.take(synth_suite(1500, threads)); return o; }}},
      {7, {"duration density normalization", [] { Outcome o; o.take(density_suite(20, 7)); return o; }}},
      {8, {"likelihood surface", criterion_8}},
      {9, {"parameter recovery", [] { Outcome o; o.take(recovery_suite(300, 200, 40, threads)); return o; }}},
      {10, {"e-commerce preset", [] { Outcome o; o.take(ecommerce_suite(1500, threads)); return o; }}},
      {11, {"determinism", criterion_11}}};
  return table;
}

}  // namespace

int main(int argc, char** argv)
{
  std::vector<int> selected;
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--threads" && i + 1 < argc) threads = static_cast<unsigned>(std::stoul(argv[++i]));
      else selected.push_back(std::stoi(a));
    }
  } catch (const std::exception&) {
    std::cerr << "usage: needs_acceptance [--threads N] [criterion ...]\n";
    return 2;
  }
  if (selected.empty())
    for (const auto& [k, v] : criteria()) selected.push_back(k);

  bool all = true;
  for (int k : selected) {
    const auto it = criteria().find(k);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.summary = std::string("error: ") + e.what();
    }
    all = all && o.passed;
    std::cout << "criterion " << k << ": " << (o.passed ? "PASS" : "FAIL") << "  " << it->second.first << " -- "
              << o.summary << '\n';
    for (const auto& line : o.details) std::cout << "    " << line << '\n';
    std::cout.flush();
  }
  return all ? 0 : 1;
}
