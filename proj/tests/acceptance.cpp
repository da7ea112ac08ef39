// Runs the full verification suite once and prints one line per acceptance
// criterion. Exit status is non-zero when any line reads FAIL.
#include "besov/verify.hpp"

#include <cstdio>
#include <string>
#include <vector>

using besov::verify::CheckResult;

namespace {

struct Criterion {
  int id;
  const char* title;
  const char* group;
};

const std::vector<Criterion> kCriteria = {
    {1, "Taylor-rate slopes equal k0 within 0.15", "taylor"},
    {2, "cube dichotomy from the eta test", "dichotomy"},
    {3, "mean-zero filter decay below 0.05", "keylem"},
    {4, "one-sided ratio spread <= 1e3, refinement within 10%", "one_sided"},
    {5, "equivalence ratio spread <= 100, refinement within 10%", "equivalence"},
    {6, "Schur bound dominates power-iteration norms", "schur"},
    {7, "moment closed forms", "moments"},
    {8, "FFT, partition-of-unity and power-law oracles", "infrastructure"},
};

}  // namespace

int main() {
  besov::verify::SuiteOptions opt;
  auto result = besov::verify::run_suite(opt);

  bool all = true;
  for (const auto& c : kCriteria) {
    int n = 0, ok = 0;
    double seconds = 0.0;
    std::string first_failure;
    for (const CheckResult& r : result.checks) {
      if (r.group != c.group) continue;
      ++n;
      seconds += r.seconds;
      if (r.passed) ++ok;
      else if (first_failure.empty()) first_failure = r.name + ": " + r.detail;
    }
    bool pass = n > 0 && ok == n;
    std::string extra;
    if (c.id == 1) {
      // the Taylor checks carry their own time budget
      pass = pass && seconds < 30.0;
      extra = ", " + std::to_string(seconds).substr(0, 5) + " s";
    }
    all = all && pass;
    std::printf("%s criterion %d: %s (%d/%d checks%s)\n", pass ? "PASS" : "FAIL", c.id, c.title, ok, n,
                extra.c_str());
    if (!first_failure.empty()) std::printf("     first failure: %s\n", first_failure.c_str());
  }

  const bool fast = result.seconds < 300.0;
  all = all && fast && result.passed();
  std::printf("%s runtime: full verify suite in %.1f s (limit 300 s)\n", fast ? "PASS" : "FAIL", result.seconds);
  if (!result.passed()) std::printf("FAIL overall: %zu checks failed\n", result.failures());
  return all ? 0 : 1;
}
