#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <sct/scgraph.hpp>
#include <sct/value.hpp>

namespace sct {

// ---------------------------------------------------------------------------
// Symbolic values. Every value mentioned by the static analysis is an atom
// (an unknown input, possibly the stand-in for a summarized call's result),
// a literal (including quoted data), a primitive application term, or a
// closure whose lambda and captured values are known exactly.
// ---------------------------------------------------------------------------

enum class sym_sort : std::uint8_t { s_int, s_list, s_any };

struct sym_value;
using sym_ptr = std::shared_ptr<const sym_value>;

struct sym_atom {
  int id = 0;
  sym_sort sort = sym_sort::s_any;
  std::string origin;  // label of the summarized callee this atom stands for
};
struct sym_lit {
  value v;
};
struct sym_op {
  prim p;
  std::vector<sym_ptr> args;
};
struct sym_clo {
  expr_ptr lam;
  std::vector<std::pair<int, sym_ptr>> captured;  // sorted by variable id
};

struct sym_value {
  std::variant<sym_atom, sym_lit, sym_op, sym_clo> node;
  std::string repr;  // canonical form; equal reprs denote equal terms
};

sym_ptr mk_atom(int id, sym_sort sort, std::string origin = "");
sym_ptr mk_slit(value v);
sym_ptr mk_sop(prim p, std::vector<sym_ptr> args);
sym_ptr mk_sclo(expr_ptr lam, std::vector<std::pair<int, sym_ptr>> captured);

sym_sort sort_of(const sym_value& s);

// ---------------------------------------------------------------------------
// Path conditions: the branch facts accumulated along one explored path.
// Facts are normalized onto base terms — integer bounds for linear terms
// (base ± literal) and pairness/nilness for structural tests. assume* return
// false when the added fact contradicts the condition, so the caller can
// prune the branch as unreachable.
// ---------------------------------------------------------------------------

class path_cond {
 public:
  // Records the outcome of an if0 test: is_zero is true on the taken branch
  // where the test evaluated to integer 0.
  bool assume(const sym_ptr& test, bool is_zero);
  bool assume_pair(const sym_ptr& s);
  bool assume_nil(const sym_ptr& s);
  bool assume_not_nil(const sym_ptr& s);
  bool assume_ge(const sym_ptr& s, long long c);

  bool surely_pair(const sym_ptr& s) const;
  bool surely_nil(const sym_ptr& s) const;

  // Best known lower bound for an integer-valued term, or nullopt.
  std::optional<long long> lower_bound(const sym_ptr& s) const;

 private:
  struct int_facts {
    std::optional<long long> lb, ub, exact;
    std::set<long long> ne;
  };
  std::map<std::string, int_facts> ints_;  // keyed by base-term repr
  std::set<std::string> pair_, not_pair_, nil_, not_nil_;

  bool set_exact(const std::string& base, long long c);
  bool add_ne(const std::string& base, long long c);
  bool raise_lb(const std::string& base, long long c);
  bool lower_ub(const std::string& base, long long c);
  friend class path_cond_access;
};

// Must-descent judgment: from the path facts alone, is `newer` strictly
// below / surely no greater than `older` in the structural order, for every
// concrete instantiation consistent with the facts? Returns unknown whenever
// the facts do not force a relation.
size_rel entails_order(const path_cond& pc, const sym_ptr& older, const sym_ptr& newer);

// ---------------------------------------------------------------------------
// Termination verification.
// ---------------------------------------------------------------------------

enum class verify_verdict : std::uint8_t { verified, refuted, unknown };
enum class unknown_reason : std::uint8_t { none, fuel, unsupported_feature, entailment_gap };

struct call_site {
  std::string label;
  std::vector<std::string> older;  // enclosing activation's arguments
  std::vector<std::string> newer;  // the recursive call's arguments
  scgraph g;
};

struct verify_options {
  int fuel = 8;           // allowed simultaneous unfoldings per closure identity
  int max_depth = 400;    // activation stack ceiling
  long long max_paths = 20000;  // explored branch budget
};

struct verify_result {
  verify_verdict verdict = verify_verdict::unknown;
  unknown_reason reason = unknown_reason::none;
  std::string detail;
  std::set<scgraph> graphs;               // composition closure, all loop targets
  std::optional<scgraph> witness;         // refuted: non-descending closure member
  std::optional<call_site> witness_site;  // refuted: a recursive site of that target
  std::vector<call_site> sites;           // every distinct recursive call site seen
};

// Analyzes the named global function applied to fresh atoms satisfying its
// (assume ...) preconditions; unannotated parameters are unconstrained.
verify_result verify_termination(const program& prog, const std::string& entry,
                                 const verify_options& opts = {});

std::string to_json(const verify_result& r);
const char* to_string(verify_verdict v);
const char* to_string(unknown_reason r);

}  // namespace sct
