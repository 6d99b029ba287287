// Acceptance suite: runs every verification criterion and prints one
// pass/fail line each; exit status is nonzero when anything fails.

#include <cstdio>

#include "pencil/verify.hpp"

int main() {
  pencil::VerificationSummary summary = pencil::run_verification();
  for (const pencil::CriterionResult& r : summary.results) {
    std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.pass ? "" : " -- ",
                r.pass ? "" : r.detail.c_str());
  }
  std::printf("%s in %.2f s\n", summary.all_pass ? "acceptance OK" : "acceptance FAILED",
              summary.total_seconds);
  return summary.all_pass ? 0 : 1;
}
