#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <sct/bigint.hpp>

namespace sct {

// ---------------------------------------------------------------------------
// Primitives. These are the only operations that never enter the size-change
// table: each is total or raises a runtime error, so none can loop.
// ---------------------------------------------------------------------------

enum class prim : std::uint8_t {
  add, sub, mul, eq, lt, cons, car, cdr, is_empty, is_cons, is_zero
};

const char* prim_name(prim p);
int prim_arity(prim p);
std::optional<prim> prim_by_name(std::string_view name);

// ---------------------------------------------------------------------------
// Values.
// ---------------------------------------------------------------------------

struct nil_t {
  bool operator==(const nil_t&) const = default;
};

struct value_pair;
struct closure;
struct term_closure;
struct expr;
using expr_ptr = std::shared_ptr<const expr>;

struct value {
  std::variant<prim, bigint, nil_t,
               std::shared_ptr<const value_pair>,
               std::shared_ptr<const closure>,
               std::shared_ptr<const term_closure>>
      rep;

  bool is_int() const { return std::holds_alternative<bigint>(rep); }
  bool is_nil() const { return std::holds_alternative<nil_t>(rep); }
  bool is_pair() const { return std::holds_alternative<std::shared_ptr<const value_pair>>(rep); }
  bool is_prim() const { return std::holds_alternative<prim>(rep); }
  bool is_clo() const { return std::holds_alternative<std::shared_ptr<const closure>>(rep); }
  bool is_termclo() const { return std::holds_alternative<std::shared_ptr<const term_closure>>(rep); }

  const bigint& as_int() const { return std::get<bigint>(rep); }
  const value_pair& as_pair() const { return *std::get<std::shared_ptr<const value_pair>>(rep); }
  const closure& as_clo() const { return *std::get<std::shared_ptr<const closure>>(rep); }
  const term_closure& as_termclo() const { return *std::get<std::shared_ptr<const term_closure>>(rep); }
  prim as_prim() const { return std::get<prim>(rep); }
};

struct value_pair {
  value first;
  value second;
};

// Immutable environment: sorted (name id -> value) slots shared by reference.
// Closures capture an environment restricted to their free variables, so these
// stay small; extension copies the slot vector once.
class env {
  using slot_vec = std::vector<std::pair<int, value>>;
  std::shared_ptr<const slot_vec> slots_;

 public:
  env() = default;

  const value* find(int name) const;
  // Returns this environment extended/overridden with the given bindings.
  env bind(const std::vector<int>& names, const std::vector<value>& vals) const;
  // Builds an environment holding exactly the named subset of this one.
  env restrict_to(const std::vector<int>& names) const;

  std::size_t size() const { return slots_ ? slots_->size() : 0; }
  const slot_vec& entries() const;
};

struct closure {
  expr_ptr lam;  // always an e_lam node; owns label, params, body
  env captured;

  const std::string& label() const;
  const std::vector<int>& params() const;
  const expr_ptr& body() const;
};

// A closure wrapped by a termination contract. Applying one turns on
// size-change monitoring for the dynamic extent of the call; violations
// inside that extent blame `blame`.
struct term_closure {
  value inner;  // always a closure
  std::string blame;
};

value mk_int(bigint n);
value mk_int(long n);
value mk_nil();
value mk_pair(value a, value b);
value mk_prim(prim p);
value mk_clo(expr_ptr lam, env captured);
value mk_termclo(value inner_clo, std::string blame);
value mk_list(const std::vector<value>& elems);

// ---------------------------------------------------------------------------
// Expressions (core language, post-desugar).
// ---------------------------------------------------------------------------

struct e_prim { prim p; };
struct e_lit { value v; };
// Variables resolve against the lexical environment first; `global_slot` >= 0
// marks a fallback into the program's global scope (resolved by slot at call
// time so top-level functions can be mutually recursive).
struct e_var { int name; int global_slot; };
struct e_lam {
  std::string label;          // unique within a program, stable across runs
  std::vector<int> params;
  std::vector<int> captured;  // free variables to capture at closure creation
  expr_ptr body;
};
struct e_app { expr_ptr fn; std::vector<expr_ptr> args; };
struct e_if0 { expr_ptr test; expr_ptr then_e; expr_ptr else_e; };
struct e_termc { expr_ptr body; std::string blame; };

struct expr {
  std::variant<e_prim, e_lit, e_var, e_lam, e_app, e_if0, e_termc> node;
};

expr_ptr mk_expr(expr e);

// ---------------------------------------------------------------------------
// Programs.
// ---------------------------------------------------------------------------

struct precond {
  enum class sort { natural, integer, list, any } s = sort::any;
  std::string param;
};

struct program {
  std::string stem;                                // source file stem, used in labels
  std::vector<std::string> names;                  // interned identifiers
  std::map<std::string, int, std::less<>> name_ids;
  std::vector<std::pair<int, expr_ptr>> globals;   // ordered top-level defines
  std::map<int, int> global_slots;                 // name id -> index into globals
  std::vector<expr_ptr> mains;                     // top-level expressions, in order
  std::map<int, std::vector<precond>> assumes;     // entry preconditions, by name id
  std::map<std::string, int, std::less<>> symbol_codes;  // quoted symbols -> negative ints

  int intern(std::string_view s);
  int symbol_code(std::string_view s);
  const std::string& name_of(int id) const { return names.at(static_cast<std::size_t>(id)); }
  std::optional<int> lookup_name(std::string_view s) const;
};

// ---------------------------------------------------------------------------
// The termination order (structural, magnitude-based on integers).
//
//   n1 < n2        iff |n1| < |n2|
//   v  < (a . d)   iff v <= a or v <= d, and () < any pair
//   everything else (closures, primitives, contract wrappers, nil-vs-int)
//   is incomparable.
//
// The order is well-founded; a custom comparator may be supplied anywhere a
// `value_order` is accepted, in which case well-foundedness is the caller's
// obligation.
// ---------------------------------------------------------------------------

bool value_equal(const value& a, const value& b);
bool precedes(const value& a, const value& b);      // a strictly below b
bool precedes_eq(const value& a, const value& b);   // precedes or structurally equal

enum class size_rel : std::uint8_t { strict, non_ascend, unknown };

// Comparator contract: first argument is the newer value, second the older;
// `strict` means newer is certainly below older, `non_ascend` means newer
// certainly does not exceed older (equality, for the concrete order).
using value_order = std::function<size_rel(const value& newer, const value& older)>;

value_order default_order();

// ---------------------------------------------------------------------------
// Closure identity. Two closures get the same key exactly when they are
// structurally identical: same lambda, element-wise equal captured values.
// The global scope is not part of the key.
// ---------------------------------------------------------------------------

struct closure_key {
  std::string label;
  std::string env_repr;
  auto operator<=>(const closure_key&) const = default;
};

std::string canonical_repr(const value& v);  // stable serialization (key material)
closure_key key_of(const closure& c);

// Rendering for output: integers in decimal, lists as "(1 2 3)", closures as
// "#<closure:label>", wrapped closures as "#<term/c:label>".
std::string print_value(const value& v);

}  // namespace sct
