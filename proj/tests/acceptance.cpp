// Acceptance battery: one pass/fail line per criterion, exit 0 only if all
// pass.  argv[1] must be the path to the spintomo CLI binary (used by the
// determinism criterion).

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "spintomo/selftest.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion-" << index << " " << name
            << ": " << detail << std::endl;
  if (!pass) ++failures;
}

// Runs a check and enforces an optional wall-clock budget (seconds, 0 = none).
void run_timed(int index, spintomo::CheckResult (*check)(std::uint64_t),
               std::uint64_t seed, double budget_seconds) {
  auto start = Clock::now();
  spintomo::CheckResult result;
  try {
    result = check(seed);
  } catch (const std::exception& e) {
    result.pass = false;
    result.name = "exception";
    result.detail = e.what();
  }
  double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  bool in_budget = budget_seconds <= 0 || elapsed <= budget_seconds;
  char timing[64];
  std::snprintf(timing, sizeof(timing), " [%.2f s]", elapsed);
  report(index, result.name, result.pass && in_budget,
         result.detail + timing +
             (in_budget ? "" : " (exceeded runtime budget)"));
}

std::string capture(const std::string& command) {
  std::string output;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0)
    output.append(buf, n);
  pclose(pipe);
  return output;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-spintomo-cli>\n";
    return 1;
  }
  const std::string cli = argv[1];
  const std::uint64_t seed = 42;
  using namespace spintomo::selftest_detail;

  run_timed(1, mixed_round_trip, seed, 10.0);
  run_timed(2, quorum_count_audit, seed, 0.0);
  run_timed(3, pure_round_trip, seed, 60.0);
  run_timed(4, partner_census, seed, 0.0);
  run_timed(5, measured_number_audit, seed, 0.0);
  run_timed(6, indirect_measurement, seed, 0.0);
  run_timed(7, dynamics_closure, seed, 0.0);
  run_timed(8, particle_counterexample, seed, 0.0);

  // Criterion 9: the CLI selftest is byte-identical across runs.
  {
    std::string command = "'" + cli + "' selftest --seed 42 2>&1";
    std::string first = capture(command);
    std::string second = capture(command);
    bool pass = !first.empty() && first == second &&
                first.find("all checks passed") != std::string::npos;
    report(9, "determinism", pass,
           pass ? "two CLI selftest runs are byte-identical"
                : "CLI selftest output differs or failed");
  }

  if (failures == 0) {
    std::cout << "acceptance: all criteria passed" << std::endl;
    return 0;
  }
  std::cout << "acceptance: " << failures << " criterion(s) failed"
            << std::endl;
  return 1;
}
