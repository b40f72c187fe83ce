#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cycleforge/verify.hpp"

// Runs the acceptance criteria and prints one PASS/FAIL line each; exit 0 only when all pass.
int main(int argc, char** argv) {
  using namespace cycleforge;
  CLI::App app{"Acceptance criteria"};
  std::vector<int> ids;
  std::uint64_t seed = 7;
  bool verbose = false;
  app.add_option("--criterion", ids, "Criterion ids (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--seed", seed, "Random seed");
  app.add_flag("--verbose", verbose, "Print metrics and findings");
  CLI11_PARSE(app, argc, argv);
  if (ids.empty()) ids = default_criteria(std::nullopt);

  VerifyOptions opt;
  opt.seed = seed;
  bool all = true;
  for (int id : ids) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = run_criterion(id, opt);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = r.runtime_limit <= 0.0 || r.seconds <= r.runtime_limit;
    const bool ok = r.passed && in_time;
    all = all && ok;
    std::printf("criterion %d: %s  %s: %s (%.2fs%s)\n", id, ok ? "PASS" : "FAIL", r.name.c_str(), r.summary.c_str(),
                r.seconds, in_time ? "" : ", over the runtime limit");
    if (verbose) {
      for (const auto& [k, v] : r.metrics) std::printf("    %s = %.6g\n", k.c_str(), v);
    }
    for (const auto& f : r.findings) std::printf("    finding: %s\n", f.c_str());
  }
  return all ? 0 : 1;
}
