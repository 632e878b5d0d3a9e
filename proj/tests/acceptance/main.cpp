// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "acceptance.hpp"

namespace {

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<void(acceptance::Checks&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"merge-arithmetic", 5, acceptance::merge_arithmetic},
      {"fifth-assignment", 5, acceptance::fifth_assignment},
      {"affinity", 5, acceptance::affinity_rules},
      {"lda", 60, acceptance::lda_sampler},
      {"relevance", 30, acceptance::relevance_and_map},
      {"reports-oracle", 10, acceptance::reports_oracle},
      {"decision-tree", 10, acceptance::decision_tree_and_store},
      {"end-to-end", 120, acceptance::end_to_end},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    acceptance::Checks checks;
    std::string error;
    auto start = std::chrono::steady_clock::now();
    try {
      c.run(checks);
    } catch (const std::exception& e) {
      error = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = secs < c.limit_seconds;
    bool pass = error.empty() && checks.ok() && in_time;
    if (!pass) ++failures;
    std::string detail = error.empty() ? checks.summary() : "exception: " + error;
    if (!in_time) detail += "; over time limit";
    std::printf("%s %-17s %7.2fs / %4.0fs  %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs, c.limit_seconds,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
