#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <sct/interp.hpp>

namespace sct {

// Process exit codes. Run exits reflect the answer kind alone; verify exits
// reflect the verdict alone.
enum exit_code : int {
  exit_ok = 0,
  exit_io = 1,
  exit_runtime = 2,
  exit_sc = 3,
  exit_refuted = 4,
  exit_unknown = 5,
  exit_timeout = 6,
};

struct run_config {
  std::string mode = "standard";  // standard | monitor | monitor-whole | trace
  check_policy policy{};
  std::uint64_t max_steps = 0;  // 0: unlimited (trace substitutes its default)
  bool json = false;
  bool counters = false;
};

// Parses "always", "off", or "backoff:<base>". Throws std::invalid_argument
// on anything else.
check_policy parse_policy(const std::string& text);

struct bench_row {
  std::string program;
  std::string input;
  std::string policy;  // "standard" or the monitored policy's name
  run_stats stats;
  double wall_ms = 0.0;
  double ratio = 1.0;  // cost relative to the standard run of the same input
};

struct bench_report {
  std::vector<bench_row> rows;
  std::vector<std::string> warnings;  // one per excluded program, with cause
};

// Runs every manifest entry of <dir>/bench.json under the standard
// interpreter and under whole-program monitoring with each policy, checking
// that all runs agree on the answer. Programs that time out under the
// ceiling or that trip the monitor are excluded with a warning.
bench_report run_bench(const std::string& dir, const std::vector<check_policy>& policies,
                       std::uint64_t ceiling = 50'000'000);

int cmd_run(const std::string& file, const run_config& cfg, std::ostream& out,
            std::ostream& err);
int cmd_verify(const std::string& file, const std::string& entry, int fuel, bool json,
               std::ostream& out, std::ostream& err);
int cmd_trace(const std::string& file, std::uint64_t max_steps, bool json,
              std::ostream& out, std::ostream& err);
int cmd_bench(const std::string& dir, const std::vector<std::string>& policies,
              const std::string& csv_path, const std::string& json_path,
              std::ostream& out, std::ostream& err);

// Full argument-vector entry point (everything after argv[0]).
int sct_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sct
