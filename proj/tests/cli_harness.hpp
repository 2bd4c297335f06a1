#ifndef NEEDS_TESTS_CLI_HARNESS_HPP_
#define NEEDS_TESTS_CLI_HARNESS_HPP_

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Runs the command-line tool as a child process.

namespace needs::test
{

inline std::string quote(const std::string& s)
{
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

struct Run
{
  int code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// `args` is appended verbatim after the executable.
inline Run run_cli(const std::string& args, const std::filesystem::path& scratch)
{
  std::filesystem::create_directories(scratch);
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = quote(NEEDS_CLI_PATH) + " " + args + " > " + quote(out.string()) + " 2> " + quote(err.string());
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

/// True when every file under `a` exists under `b` with identical bytes.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* diff = nullptr)
{
  namespace fs = std::filesystem;
  std::size_t na = 0, nb = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++nb;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++na;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      if (diff) *diff = fs::relative(e.path(), a).string();
      return false;
    }
  }
  if (na != nb && diff) *diff = "file count";
  return na == nb;
}

}  // namespace needs::test

#endif
