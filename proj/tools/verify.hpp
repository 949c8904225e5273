#pragma once

// Verification suites: each one runs a family of randomized checks against the
// oracles and reports machine-readable pass/fail data. The fastla executable
// and the acceptance program both drive these.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastla/matrix.hpp"
#include "json.hpp"

namespace fastla::verify {

struct Options {
  std::uint64_t seed = 7;
  bool quick = false;
  Index cutoff = 8;  // strassen leaf size for the stability suites
  std::optional<Index> n;
  std::optional<Index> r;
  std::optional<Index> trials;
  unsigned threads = 1;
};

struct SuiteResult {
  std::string name;
  int criterion = 0;
  bool passed = false;
  nlohmann::json details;  // deterministic for a fixed seed and options
  double seconds = 0.0;    // kept out of `details` so reports can be diffed
};

struct SuiteInfo {
  std::string name;
  int criterion;
  std::string summary;
  std::function<SuiteResult(const Options&)> run;
};

/// Every suite in criterion order.
const std::vector<SuiteInfo>& suites();
const SuiteInfo* find_suite(std::string_view name);

/// Runs one suite and fills in name, criterion and timing.
SuiteResult run_suite(const SuiteInfo& s, const Options& opts);

/// Collects named assertions. A gate aggregates one assertion over many
/// trials and remembers the worst value/limit ratio.
class Checks {
 public:
  void add(const std::string& name, bool ok, double value, double limit);
  void add(const std::string& name, bool ok);

  struct Gate {
    std::string name;
    Index trials = 0;
    Index failures = 0;
    double worst_value = 0.0;
    double worst_limit = 0.0;
    double worst_ratio = 0.0;
    void record(double value, double limit);
  };
  Gate& gate(const std::string& name);

  bool passed() const;
  nlohmann::json to_json() const;

 private:
  nlohmann::json items_ = nlohmann::json::array();
  std::deque<Gate> gates_;  // deque: gate() hands out references that must survive later inserts
  bool ok_ = true;
};

}  // namespace fastla::verify
