#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <sct/scgraph.hpp>
#include <sct/value.hpp>

namespace sct {

// When to compare a call against the table entry for its closure key.
//   always       every call extends the entry and is checked
//   backoff      calls are counted; checks happen at exponentially spaced
//                indices (base, 2*base, 4*base, ... — never at index 1), and
//                the graph runs checkpoint-to-checkpoint
//   off          contracts are inert; no table work at all
enum class policy_kind : std::uint8_t { always, backoff, off };

struct check_policy {
  policy_kind kind = policy_kind::always;
  std::uint64_t base = 1;
};

struct run_options {
  check_policy policy{};
  bool monitor_all = false;   // monitor from the first transition, whole program
  bool trace = false;         // record call graphs instead of enforcing them
  std::uint64_t max_steps = 0;  // 0 = no ceiling
  value_order order;          // defaults to the structural order when empty
};

// A size-change violation: the monitored extent blamed `blame` saw, for the
// closure keyed `key`, a non-descending suffix composition.
struct sc_violation {
  std::string blame;
  closure_key key;
  scgraph witness;
  std::uint64_t call_index = 0;  // table-entry call count at the violation
};

enum class outcome_kind : std::uint8_t { done, sc_error, runtime_error, ceiling };

struct run_stats {
  std::uint64_t machine_steps = 0;
  std::uint64_t order_compares = 0;
  std::uint64_t compositions = 0;
  std::uint64_t desc_checks = 0;
  std::uint64_t prog_checks = 0;   // graphs fed to a table entry's monitor
  std::uint64_t table_updates = 0;
  std::uint64_t distinct_keys = 0;
  std::uint64_t frame_high_water = 0;
  std::uint64_t table_high_water = 0;
  std::uint64_t endset_high_water = 0;

  // Deterministic work measure: transitions plus monitoring effort. Pure
  // transition counts would hide the cost of checking entirely.
  std::uint64_t cost() const {
    return machine_steps + order_compares + compositions + desc_checks;
  }
};

// One table extension in trace mode. The first call of a key in a table
// lifetime has no graph (nothing to compare against) and parent -1; later
// calls carry the graph from the compared-against call and point at it.
struct trace_event {
  closure_key key;
  bool has_graph = false;
  scgraph g;
  int parent = -1;
};

struct trace_path {
  closure_key key;
  std::vector<scgraph> graphs;
};

// Maximal root-to-leaf graph sequences of the trace forest. Restores can
// fork a key's call history, so one key may yield several paths; a run was
// violation-free iff every path satisfies prog.
std::vector<trace_path> trace_paths(const std::vector<trace_event>& events);

struct run_result {
  outcome_kind kind = outcome_kind::done;
  std::vector<value> values;              // one per completed top-level expr
  std::string error;                      // runtime_error: message
  std::optional<sc_violation> violation;  // sc_error: what and where
  run_stats stats;
  std::vector<scgraph> accepted_graphs;   // distinct accepted graphs, in
                                          // first-acceptance order
  std::vector<closure_key> keys;          // distinct table keys, first-use order
  std::vector<trace_event> events;        // trace mode only
};

run_result run(const program& prog, const run_options& opts = {});

}  // namespace sct
