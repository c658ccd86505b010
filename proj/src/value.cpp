#include <sct/value.hpp>

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>

namespace sct {

namespace {

struct prim_info {
  prim p;
  const char* name;
  int arity;
};

constexpr std::array<prim_info, 11> k_prims{{
    {prim::add, "+", 2},
    {prim::sub, "-", 2},
    {prim::mul, "*", 2},
    {prim::eq, "=", 2},
    {prim::lt, "<", 2},
    {prim::cons, "cons", 2},
    {prim::car, "car", 1},
    {prim::cdr, "cdr", 1},
    {prim::is_empty, "empty?", 1},
    {prim::is_cons, "cons?", 1},
    {prim::is_zero, "zero?", 1},
}};

}  // namespace

const char* prim_name(prim p) {
  for (const auto& info : k_prims)
    if (info.p == p) return info.name;
  return "?";
}

int prim_arity(prim p) {
  for (const auto& info : k_prims)
    if (info.p == p) return info.arity;
  return 0;
}

std::optional<prim> prim_by_name(std::string_view name) {
  for (const auto& info : k_prims)
    if (name == info.name) return info.p;
  return std::nullopt;
}

// --------------------------------------------------------------------------
// Environments.
// --------------------------------------------------------------------------

const value* env::find(int name) const {
  if (!slots_) return nullptr;
  auto it = std::lower_bound(
      slots_->begin(), slots_->end(), name,
      [](const std::pair<int, value>& e, int n) { return e.first < n; });
  if (it != slots_->end() && it->first == name) return &it->second;
  return nullptr;
}

env env::bind(const std::vector<int>& names, const std::vector<value>& vals) const {
  slot_vec out = slots_ ? *slots_ : slot_vec{};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = std::lower_bound(
        out.begin(), out.end(), names[i],
        [](const std::pair<int, value>& e, int n) { return e.first < n; });
    if (it != out.end() && it->first == names[i])
      it->second = vals[i];
    else
      out.insert(it, {names[i], vals[i]});
  }
  env r;
  r.slots_ = std::make_shared<const slot_vec>(std::move(out));
  return r;
}

env env::restrict_to(const std::vector<int>& names) const {
  slot_vec out;
  out.reserve(names.size());
  for (int n : names) {
    if (const value* v = find(n)) out.emplace_back(n, *v);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  env r;
  r.slots_ = std::make_shared<const slot_vec>(std::move(out));
  return r;
}

const env::slot_vec& env::entries() const {
  static const slot_vec empty;
  return slots_ ? *slots_ : empty;
}

const std::string& closure::label() const { return std::get<e_lam>(lam->node).label; }
const std::vector<int>& closure::params() const { return std::get<e_lam>(lam->node).params; }
const expr_ptr& closure::body() const { return std::get<e_lam>(lam->node).body; }

// --------------------------------------------------------------------------
// Constructors.
// --------------------------------------------------------------------------

value mk_int(bigint n) { return value{std::move(n)}; }
value mk_int(long n) { return value{bigint(n)}; }
value mk_nil() { return value{nil_t{}}; }

value mk_pair(value a, value b) {
  return value{std::make_shared<const value_pair>(value_pair{std::move(a), std::move(b)})};
}

value mk_prim(prim p) { return value{p}; }

value mk_clo(expr_ptr lam, env captured) {
  return value{std::make_shared<const closure>(closure{std::move(lam), std::move(captured)})};
}

value mk_termclo(value inner_clo, std::string blame) {
  return value{std::make_shared<const term_closure>(
      term_closure{std::move(inner_clo), std::move(blame)})};
}

value mk_list(const std::vector<value>& elems) {
  value acc = mk_nil();
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) acc = mk_pair(*it, acc);
  return acc;
}

expr_ptr mk_expr(expr e) { return std::make_shared<const expr>(std::move(e)); }

int program::intern(std::string_view s) {
  if (auto it = name_ids.find(s); it != name_ids.end()) return it->second;
  int id = static_cast<int>(names.size());
  names.emplace_back(s);
  name_ids.emplace(names.back(), id);
  return id;
}

std::optional<int> program::lookup_name(std::string_view s) const {
  if (auto it = name_ids.find(s); it != name_ids.end()) return it->second;
  return std::nullopt;
}

int program::symbol_code(std::string_view s) {
  if (auto it = symbol_codes.find(s); it != symbol_codes.end()) return it->second;
  int code = -1 - static_cast<int>(symbol_codes.size());
  symbol_codes.emplace(std::string(s), code);
  return code;
}

// --------------------------------------------------------------------------
// Structural equality and the termination order.
// --------------------------------------------------------------------------

static bool lam_equal(const expr_ptr& a, const expr_ptr& b) {
  if (a.get() == b.get()) return true;
  return std::get<e_lam>(a->node).label == std::get<e_lam>(b->node).label;
}

static bool env_equal(const env& a, const env& b) {
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  if (ea.size() != eb.size()) return false;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    if (ea[i].first != eb[i].first) return false;
    if (!value_equal(ea[i].second, eb[i].second)) return false;
  }
  return true;
}

bool value_equal(const value& a, const value& b) {
  if (a.rep.index() != b.rep.index()) return false;
  if (a.is_prim()) return a.as_prim() == b.as_prim();
  if (a.is_int()) return a.as_int() == b.as_int();
  if (a.is_nil()) return true;
  if (a.is_pair()) {
    const auto& pa = a.as_pair();
    const auto& pb = b.as_pair();
    return value_equal(pa.first, pb.first) && value_equal(pa.second, pb.second);
  }
  if (a.is_clo()) {
    const auto& ca = a.as_clo();
    const auto& cb = b.as_clo();
    return lam_equal(ca.lam, cb.lam) && env_equal(ca.captured, cb.captured);
  }
  const auto& ta = a.as_termclo();
  const auto& tb = b.as_termclo();
  return ta.blame == tb.blame && value_equal(ta.inner, tb.inner);
}

bool precedes(const value& a, const value& b) {
  if (b.is_int()) return a.is_int() && big_abs(a.as_int()) < big_abs(b.as_int());
  if (b.is_pair()) {
    if (a.is_nil()) return true;
    const auto& p = b.as_pair();
    return precedes_eq(a, p.first) || precedes_eq(a, p.second);
  }
  return false;
}

bool precedes_eq(const value& a, const value& b) {
  return precedes(a, b) || value_equal(a, b);
}

value_order default_order() {
  return [](const value& newer, const value& older) {
    if (precedes(newer, older)) return size_rel::strict;
    if (value_equal(newer, older)) return size_rel::non_ascend;
    return size_rel::unknown;
  };
}

// --------------------------------------------------------------------------
// Canonical serialization and closure keys.
// --------------------------------------------------------------------------

static void repr_into(const value& v, std::string& out) {
  if (v.is_int()) {
    out += v.as_int().str();
  } else if (v.is_nil()) {
    out += "()";
  } else if (v.is_prim()) {
    out += "#%";
    out += prim_name(v.as_prim());
  } else if (v.is_pair()) {
    const auto& p = v.as_pair();
    out += '(';
    repr_into(p.first, out);
    out += " . ";
    repr_into(p.second, out);
    out += ')';
  } else if (v.is_clo()) {
    const auto& c = v.as_clo();
    out += "#L<";
    out += c.label();
    out += '|';
    for (const auto& [name, val] : c.captured.entries()) {
      out += std::to_string(name);
      out += '=';
      repr_into(val, out);
      out += ';';
    }
    out += '>';
  } else {
    const auto& t = v.as_termclo();
    out += "#T<";
    out += t.blame;
    out += '|';
    repr_into(t.inner, out);
    out += '>';
  }
}

std::string canonical_repr(const value& v) {
  std::string out;
  repr_into(v, out);
  return out;
}

closure_key key_of(const closure& c) {
  std::string env_repr;
  for (const auto& [name, val] : c.captured.entries()) {
    env_repr += std::to_string(name);
    env_repr += '=';
    repr_into(val, env_repr);
    env_repr += ';';
  }
  return closure_key{c.label(), std::move(env_repr)};
}

// --------------------------------------------------------------------------
// Printing.
// --------------------------------------------------------------------------

static void print_into(const value& v, std::string& out) {
  if (v.is_int()) {
    out += v.as_int().str();
  } else if (v.is_nil()) {
    out += "()";
  } else if (v.is_prim()) {
    out += "#<primitive:";
    out += prim_name(v.as_prim());
    out += '>';
  } else if (v.is_pair()) {
    out += '(';
    const value* cur = &v;
    bool first = true;
    while (cur->is_pair()) {
      if (!first) out += ' ';
      first = false;
      const auto& p = cur->as_pair();
      print_into(p.first, out);
      cur = &p.second;
    }
    if (!cur->is_nil()) {
      out += " . ";
      print_into(*cur, out);
    }
    out += ')';
  } else if (v.is_clo()) {
    out += "#<closure:";
    out += v.as_clo().label();
    out += '>';
  } else {
    const auto& t = v.as_termclo();
    out += "#<term/c:";
    out += t.inner.as_clo().label();
    out += '>';
  }
}

std::string print_value(const value& v) {
  std::string out;
  print_into(v, out);
  return out;
}

}  // namespace sct
