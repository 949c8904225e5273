// Acceptance run: every verification suite in full mode with seed 7, then the
// end-to-end determinism check through the CLI. One line per criterion on
// stdout; the exit status is nonzero if any criterion fails.
//
//   acceptance                 all criteria
//   acceptance 3 12 15         a subset

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "verify.hpp"

namespace fs = std::filesystem;
using fastla::verify::Options;
using fastla::verify::SuiteResult;

namespace {

// Wall-clock ceilings in seconds for the criteria that carry one.
const std::map<int, double> kRuntimeLimit = {{1, 60.0}, {2, 600.0}, {3, 600.0}, {15, 300.0}};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// First failing check of a suite, for the one-line summary.
std::string first_failure(const nlohmann::json& details) {
  if (details.contains("error")) return "error: " + details["error"].get<std::string>();
  if (!details.contains("checks")) return "";
  for (const auto& c : details["checks"]) {
    if (c.value("passed", true)) continue;
    std::ostringstream s;
    s << c.value("name", std::string("?"));
    if (c.contains("failures")) s << " [" << c["failures"] << "/" << c["trials"] << " failed]";
    if (c.contains("worst_value") && c["worst_value"].is_number())
      s << " worst " << c["worst_value"].get<double>() << " vs " << c["worst_limit"].get<double>();
    else if (c.contains("value") && c["value"].is_number())
      s << " value " << c["value"].get<double>() << " vs " << c.value("limit", 0.0);
    return s.str();
  }
  return "";
}

void line(bool ok, int criterion, const std::string& name, double seconds, const std::string& note) {
  std::printf("%s criterion %2d %-11s %8.2f s%s%s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(), seconds,
              note.empty() ? "" : "  ", note.c_str());
  std::fflush(stdout);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + FASTLA_CLI_PATH + "' " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool determinism(std::string& note, double& seconds) {
  const fs::path dir = fs::temp_directory_path() / "fastla_acceptance";
  fs::create_directories(dir);
  const fs::path a = dir / "run1.json", b = dir / "run2.json";
  const auto t0 = std::chrono::steady_clock::now();
  const int s1 = run_cli("verify all --quick --seed 7 --out '" + a.string() + "'");
  const int s2 = run_cli("verify all --quick --seed 7 --out '" + b.string() + "'");
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string ra = slurp(a), rb = slurp(b);
  const bool identical = !ra.empty() && ra == rb;
  const bool both_pass = s1 == 0 && s2 == 0;
  std::ostringstream s;
  s << "exit codes " << s1 << "," << s2 << "; reports " << (identical ? "byte-identical" : "DIFFER");
  if (!both_pass && !ra.empty()) {
    const auto j = nlohmann::json::parse(ra, nullptr, false);
    if (!j.is_discarded() && j.contains("suites")) {
      s << "; failing suites:";
      for (const auto& suite : j["suites"])
        if (!suite.value("passed", false)) s << " " << suite.value("name", std::string("?"));
    }
  }
  note = s.str();
  std::error_code ec;
  fs::remove_all(dir, ec);
  return both_pass && identical;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto want = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

  Options opts;
  opts.seed = 7;
  int failures = 0;
  for (const auto& suite : fastla::verify::suites()) {
    if (!want(suite.criterion)) continue;
    const SuiteResult r = fastla::verify::run_suite(suite, opts);
    bool ok = r.passed;
    std::string note = ok ? "" : first_failure(r.details);
    if (auto it = kRuntimeLimit.find(suite.criterion); it != kRuntimeLimit.end() && r.seconds >= it->second) {
      ok = false;
      note += (note.empty() ? "" : "; ") + std::string("over the runtime limit");
    }
    if (!ok) ++failures;
    line(ok, suite.criterion, suite.name, r.seconds, note);
  }

  if (want(15)) {
    std::string note;
    double seconds = 0.0;
    bool ok = determinism(note, seconds);
    if (seconds > kRuntimeLimit.at(15)) {
      ok = false;
      note += "; over the runtime limit";
    }
    if (!ok) ++failures;
    line(ok, 15, "determinism", seconds, note);
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
