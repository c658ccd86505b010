#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <sct/value.hpp>

namespace sct {

// An arc (src, rel, dst) in a size-change graph: the dst-th argument of the
// newer call is strictly below (strict) or no greater than (non_ascend) the
// src-th argument of the older call.
enum class arc_rel : std::uint8_t { strict, non_ascend };

struct arc {
  int src;
  arc_rel rel;
  int dst;
  auto operator<=>(const arc&) const = default;
};

// A size-change graph over calls of a fixed arity. Arcs are kept sorted,
// unique, and normalized: when both a strict and a non-ascending arc would
// connect the same (src, dst), only the strict one is retained. All arc
// endpoints must lie in [0, arity).
class scgraph {
  int arity_ = 0;
  std::vector<arc> arcs_;

 public:
  scgraph() = default;
  scgraph(int arity, std::vector<arc> arcs);

  int arity() const { return arity_; }
  const std::vector<arc>& arcs() const { return arcs_; }
  bool empty() const { return arcs_.empty(); }
  std::size_t size() const { return arcs_.size(); }

  auto operator<=>(const scgraph&) const = default;
};

// Compact display form: "arity 2; 0 < 0, 0 <= 1" ("<" strict, "<=" non-ascend).
std::string to_string(const scgraph& g);

// JSON form: {"arity": k, "arcs": [[i, "<", j], ...]}.
std::string to_json(const scgraph& g);

// Relational composition: (i, r, k) is in compose(g1, g2) iff some j links
// (i, r1, j) in g1 with (j, r2, k) in g2; the result arc is strict iff at
// least one linking path uses a strict arc. Arities must agree.
scgraph compose(const scgraph& g1, const scgraph& g2);

// A graph is descending unless it is idempotent (g = g;g) yet has no strict
// self-arc. Non-idempotent graphs pass vacuously.
bool desc(const scgraph& g);

// A call sequence is progressing iff the composition of every non-empty
// contiguous window is descending. Quadratic reference implementation; the
// monitor below tracks the same property incrementally.
bool prog(const std::vector<scgraph>& seq);

// Incremental monitor over a growing call sequence. After feeding G1..Gn the
// end set holds the compositions Gi;...;Gn for every suffix start i, and n
// counts the graphs fed so far.
struct monitor_state {
  int arity = 0;
  long long n = 0;
  std::set<scgraph> end_set;
};

monitor_state monitor_init(int arity);

// Extends the sequence by one graph. Returns the violation witness — the
// first suffix composition (in set order) that is not descending — or
// nullopt if the extended sequence is still progressing.
std::optional<scgraph> monitor_step(monitor_state& st, const scgraph& g);

// Least superset of `graphs` closed under binary composition.
std::set<scgraph> close_under_composition(const std::set<scgraph>& graphs);

// The size-change property: every member of the composition closure must be
// descending. Returns the first non-descending member of the closure (in set
// order) as a witness, or nullopt when the property holds. Programs whose
// call graphs satisfy this cannot drive an infinite call sequence.
std::optional<scgraph> scp_witness(const std::set<scgraph>& graphs);
bool scp_holds(const std::set<scgraph>& graphs);

// Builds the size-change graph from an older argument list to a newer one
// using the given comparator (see value_order for the contract). Both lists
// must have the same length, which becomes the graph's arity; arcs run
// old-position -> new-position.
template <class V, class Cmp>
scgraph build_graph(const std::vector<V>& old_vals, const std::vector<V>& new_vals,
                    Cmp&& cmp) {
  if (old_vals.size() != new_vals.size())
    throw std::invalid_argument("build_graph: argument lists differ in arity");
  std::vector<arc> arcs;
  for (std::size_t i = 0; i < old_vals.size(); ++i) {
    for (std::size_t j = 0; j < new_vals.size(); ++j) {
      switch (cmp(new_vals[j], old_vals[i])) {
        case size_rel::strict:
          arcs.push_back({static_cast<int>(i), arc_rel::strict, static_cast<int>(j)});
          break;
        case size_rel::non_ascend:
          arcs.push_back({static_cast<int>(i), arc_rel::non_ascend, static_cast<int>(j)});
          break;
        case size_rel::unknown:
          break;
      }
    }
  }
  return scgraph(static_cast<int>(old_vals.size()), std::move(arcs));
}

}  // namespace sct
