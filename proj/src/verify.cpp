#include <sct/verify.hpp>

#include <algorithm>
#include <cstdlib>

#include <json.hpp>

namespace sct {

namespace {

std::string repr_of(const std::variant<sym_atom, sym_lit, sym_op, sym_clo>& node) {
  if (const auto* a = std::get_if<sym_atom>(&node)) return "a" + std::to_string(a->id);
  if (const auto* l = std::get_if<sym_lit>(&node)) return canonical_repr(l->v);
  if (const auto* o = std::get_if<sym_op>(&node)) {
    std::string out = "(";
    out += prim_name(o->p);
    for (const sym_ptr& s : o->args) {
      out += ' ';
      out += s->repr;
    }
    out += ')';
    return out;
  }
  const auto& c = std::get<sym_clo>(node);
  const auto& lam = std::get<e_lam>(c.lam->node);
  std::string out = "#L<" + lam.label + "|";
  for (const auto& [id, s] : c.captured) {
    out += std::to_string(id);
    out += '=';
    out += s->repr;
    out += ';';
  }
  out += '>';
  return out;
}

sym_ptr mk_sym(std::variant<sym_atom, sym_lit, sym_op, sym_clo> node) {
  auto p = std::make_shared<sym_value>();
  p->repr = repr_of(node);
  p->node = std::move(node);
  return p;
}

// Linear view of an integer term: value = base + delta, where base is either
// absent (pure literal) or an opaque term identified by its repr.
struct linear {
  bool pure_lit = false;
  std::string base;
  long long delta = 0;
};

constexpr long long k_lit_cap = 1LL << 40;

std::optional<long long> small_int(const value& v) {
  if (!v.is_int()) return std::nullopt;
  const bigint& b = v.as_int();
  if (b < -k_lit_cap || b > k_lit_cap) return std::nullopt;
  return static_cast<long long>(b);
}

linear linear_of(const sym_ptr& s) {
  if (const auto* l = std::get_if<sym_lit>(&s->node)) {
    if (auto c = small_int(l->v)) return {true, "", *c};
    return {false, s->repr, 0};
  }
  if (const auto* o = std::get_if<sym_op>(&s->node)) {
    if ((o->p == prim::add || o->p == prim::sub) && o->args.size() == 2) {
      const auto* lc = std::get_if<sym_lit>(&o->args[1]->node);
      if (lc) {
        if (auto c = small_int(lc->v)) {
          linear in = linear_of(o->args[0]);
          in.delta += o->p == prim::add ? *c : -*c;
          return in;
        }
      }
      if (o->p == prim::add) {
        const auto* la = std::get_if<sym_lit>(&o->args[0]->node);
        if (la) {
          if (auto c = small_int(la->v)) {
            linear in = linear_of(o->args[1]);
            in.delta += *c;
            return in;
          }
        }
      }
    }
  }
  return {false, s->repr, 0};
}

}  // namespace

sym_ptr mk_atom(int id, sym_sort sort, std::string origin) {
  return mk_sym(sym_atom{id, sort, std::move(origin)});
}
sym_ptr mk_slit(value v) { return mk_sym(sym_lit{std::move(v)}); }
sym_ptr mk_sop(prim p, std::vector<sym_ptr> args) { return mk_sym(sym_op{p, std::move(args)}); }
sym_ptr mk_sclo(expr_ptr lam, std::vector<std::pair<int, sym_ptr>> captured) {
  return mk_sym(sym_clo{std::move(lam), std::move(captured)});
}

sym_sort sort_of(const sym_value& s) {
  if (const auto* a = std::get_if<sym_atom>(&s.node)) return a->sort;
  if (const auto* l = std::get_if<sym_lit>(&s.node)) {
    if (l->v.is_int()) return sym_sort::s_int;
    if (l->v.is_nil() || l->v.is_pair()) return sym_sort::s_list;
    return sym_sort::s_any;
  }
  if (const auto* o = std::get_if<sym_op>(&s.node)) {
    switch (o->p) {
      case prim::add:
      case prim::sub:
      case prim::mul:
      case prim::eq:
      case prim::lt:
      case prim::is_empty:
      case prim::is_cons:
      case prim::is_zero:
        return sym_sort::s_int;
      case prim::cons:
        return sort_of(*o->args[1]) == sym_sort::s_list ? sym_sort::s_list
                                                        : sym_sort::s_any;
      case prim::cdr:
        return sort_of(*o->args[0]) == sym_sort::s_list ? sym_sort::s_list
                                                        : sym_sort::s_any;
      case prim::car:
        return sym_sort::s_any;
    }
  }
  return sym_sort::s_any;
}

// --------------------------------------------------------------------------
// path_cond
// --------------------------------------------------------------------------

bool path_cond::set_exact(const std::string& base, long long c) {
  int_facts& f = ints_[base];
  if (f.exact && *f.exact != c) return false;
  if (f.lb && c < *f.lb) return false;
  if (f.ub && c > *f.ub) return false;
  if (f.ne.count(c)) return false;
  f.exact = c;
  return true;
}

bool path_cond::add_ne(const std::string& base, long long c) {
  int_facts& f = ints_[base];
  if (f.exact && *f.exact == c) return false;
  f.ne.insert(c);
  return true;
}

bool path_cond::raise_lb(const std::string& base, long long c) {
  int_facts& f = ints_[base];
  if (f.exact && *f.exact < c) return false;
  if (f.ub && c > *f.ub) return false;
  if (!f.lb || c > *f.lb) f.lb = c;
  return true;
}

bool path_cond::lower_ub(const std::string& base, long long c) {
  int_facts& f = ints_[base];
  if (f.exact && *f.exact > c) return false;
  if (f.lb && c < *f.lb) return false;
  if (!f.ub || c < *f.ub) f.ub = c;
  return true;
}

bool path_cond::assume_pair(const sym_ptr& s) {
  if (const auto* l = std::get_if<sym_lit>(&s->node)) return l->v.is_pair();
  if (sort_of(*s) == sym_sort::s_int) return false;
  if (nil_.count(s->repr) || not_pair_.count(s->repr)) return false;
  pair_.insert(s->repr);
  not_nil_.insert(s->repr);
  return true;
}

bool path_cond::assume_nil(const sym_ptr& s) {
  if (const auto* l = std::get_if<sym_lit>(&s->node)) return l->v.is_nil();
  if (const auto* o = std::get_if<sym_op>(&s->node); o && o->p == prim::cons) return false;
  if (sort_of(*s) == sym_sort::s_int) return false;
  if (std::holds_alternative<sym_clo>(s->node)) return false;
  if (not_nil_.count(s->repr) || pair_.count(s->repr)) return false;
  nil_.insert(s->repr);
  return true;
}

bool path_cond::assume_not_nil(const sym_ptr& s) {
  if (const auto* l = std::get_if<sym_lit>(&s->node)) return !l->v.is_nil();
  if (nil_.count(s->repr)) return false;
  not_nil_.insert(s->repr);
  return true;
}

bool path_cond::assume_ge(const sym_ptr& s, long long c) {
  linear ln = linear_of(s);
  if (ln.pure_lit) return ln.delta >= c;
  return raise_lb(ln.base, c - ln.delta);
}

bool path_cond::surely_pair(const sym_ptr& s) const {
  if (const auto* l = std::get_if<sym_lit>(&s->node)) return l->v.is_pair();
  if (const auto* o = std::get_if<sym_op>(&s->node); o && o->p == prim::cons) return true;
  if (pair_.count(s->repr)) return true;
  return sort_of(*s) == sym_sort::s_list && not_nil_.count(s->repr) > 0;
}

bool path_cond::surely_nil(const sym_ptr& s) const {
  if (const auto* l = std::get_if<sym_lit>(&s->node)) return l->v.is_nil();
  return nil_.count(s->repr) > 0;
}

std::optional<long long> path_cond::lower_bound(const sym_ptr& s) const {
  linear ln = linear_of(s);
  if (ln.pure_lit) return ln.delta;
  auto it = ints_.find(ln.base);
  if (it == ints_.end()) return std::nullopt;
  const int_facts& f = it->second;
  if (f.exact) return *f.exact + ln.delta;
  if (!f.lb) return std::nullopt;
  long long lb = *f.lb;
  for (int guard = 0; guard < 64 && f.ne.count(lb); ++guard) ++lb;
  return lb + ln.delta;
}

bool path_cond::assume(const sym_ptr& test, bool is_zero) {
  if (const auto* l = std::get_if<sym_lit>(&test->node)) {
    bool zero = l->v.is_int() && l->v.as_int() == 0;
    return is_zero ? zero : !zero;
  }
  if (std::holds_alternative<sym_clo>(test->node)) return !is_zero;

  if (const auto* o = std::get_if<sym_op>(&test->node)) {
    switch (o->p) {
      case prim::is_zero: {
        linear ln = linear_of(o->args[0]);
        if (ln.pure_lit) return is_zero == (ln.delta == 0);
        return is_zero ? set_exact(ln.base, -ln.delta) : add_ne(ln.base, -ln.delta);
      }
      case prim::is_empty:
        return is_zero ? assume_nil(o->args[0]) : assume_not_nil(o->args[0]);
      case prim::is_cons:
        if (is_zero) return assume_pair(o->args[0]);
        if (const auto* l2 = std::get_if<sym_lit>(&o->args[0]->node)) return !l2->v.is_pair();
        if (pair_.count(o->args[0]->repr)) return false;
        if (std::holds_alternative<sym_op>(o->args[0]->node) &&
            std::get<sym_op>(o->args[0]->node).p == prim::cons)
          return false;
        not_pair_.insert(o->args[0]->repr);
        return true;
      case prim::lt: {
        linear a = linear_of(o->args[0]);
        linear b = linear_of(o->args[1]);
        if (a.pure_lit && b.pure_lit) return is_zero == (a.delta < b.delta);
        if (!a.pure_lit && !b.pure_lit && a.base == b.base)
          return is_zero == (a.delta < b.delta);
        if (is_zero) {  // a < b
          if (a.pure_lit) return raise_lb(b.base, a.delta - b.delta + 1);
          if (b.pure_lit) return lower_ub(a.base, b.delta - a.delta - 1);
        } else {  // a >= b
          if (b.pure_lit) return raise_lb(a.base, b.delta - a.delta);
          if (a.pure_lit) return lower_ub(b.base, a.delta - b.delta);
        }
        return true;
      }
      case prim::eq: {
        const sym_ptr& a = o->args[0];
        const sym_ptr& b = o->args[1];
        const auto* la = std::get_if<sym_lit>(&a->node);
        const auto* lb2 = std::get_if<sym_lit>(&b->node);
        if (la && lb2) return is_zero == value_equal(la->v, lb2->v);
        if (a->repr == b->repr) return is_zero;
        if (lb2 && lb2->v.is_nil()) return is_zero ? assume_nil(a) : assume_not_nil(a);
        if (la && la->v.is_nil()) return is_zero ? assume_nil(b) : assume_not_nil(b);
        auto lit_vs = [&](const sym_lit* lit, const sym_ptr& t) -> std::optional<bool> {
          auto c = small_int(lit->v);
          if (!c) return std::nullopt;
          linear ln = linear_of(t);
          if (ln.pure_lit) return is_zero == (ln.delta == *c);
          return is_zero ? set_exact(ln.base, *c - ln.delta) : add_ne(ln.base, *c - ln.delta);
        };
        if (lb2 && lb2->v.is_int()) {
          if (auto r = lit_vs(lb2, a)) return *r;
        }
        if (la && la->v.is_int()) {
          if (auto r = lit_vs(la, b)) return *r;
        }
        return true;
      }
      default:
        break;
    }
  }
  // A bare term in test position: the zero branch pins it to integer 0.
  linear ln = linear_of(test);
  if (ln.pure_lit) return is_zero == (ln.delta == 0);
  return is_zero ? set_exact(ln.base, -ln.delta) : add_ne(ln.base, -ln.delta);
}

// --------------------------------------------------------------------------
// entails_order
// --------------------------------------------------------------------------

size_rel entails_order(const path_cond& pc, const sym_ptr& older, const sym_ptr& newer) {
  if (newer->repr == older->repr) return size_rel::non_ascend;

  // The empty list sits strictly below every pair.
  if (pc.surely_nil(newer) && pc.surely_pair(older)) return size_rel::strict;

  // Peeling car/cdr layers off a pair reaches a strictly smaller component.
  {
    sym_ptr t = newer;
    while (true) {
      const auto* o = std::get_if<sym_op>(&t->node);
      if (!o || (o->p != prim::car && o->p != prim::cdr)) break;
      if (!pc.surely_pair(o->args[0])) break;
      t = o->args[0];
      if (t->repr == older->repr) return size_rel::strict;
    }
  }

  linear ln = linear_of(newer);
  linear lo = linear_of(older);
  if (ln.pure_lit && lo.pure_lit) {
    return std::llabs(ln.delta) < std::llabs(lo.delta) ? size_rel::strict
                                                       : size_rel::unknown;
  }
  if (ln.pure_lit && !lo.pure_lit) {
    if (auto lb = pc.lower_bound(older); lb && std::llabs(ln.delta) < *lb)
      return size_rel::strict;
    return size_rel::unknown;
  }
  if (!ln.pure_lit && !lo.pure_lit && ln.base == lo.base) {
    if (ln.delta == lo.delta) return size_rel::non_ascend;
    if (ln.delta < lo.delta) {
      if (auto lb = pc.lower_bound(newer); lb && *lb >= 0) return size_rel::strict;
    }
  }
  return size_rel::unknown;
}

// --------------------------------------------------------------------------
// Argument shape classes, for summary reuse and result abstraction.
// --------------------------------------------------------------------------

namespace {

enum class cls : std::uint8_t {
  bot,
  nz_nat,
  nat,
  int_c,
  nil_c,
  pair_c,
  list_c,
  clo_c,
  any_c
};

bool subsumes(cls sub, cls sup) {
  if (sub == sup || sup == cls::any_c || sub == cls::bot) return true;
  if (sup == cls::nat) return sub == cls::nz_nat;
  if (sup == cls::int_c) return sub == cls::nz_nat || sub == cls::nat;
  if (sup == cls::list_c) return sub == cls::nil_c || sub == cls::pair_c;
  return false;
}

cls join(cls a, cls b) {
  if (a == b || b == cls::bot) return a;
  if (a == cls::bot) return b;
  if (subsumes(a, b)) return b;
  if (subsumes(b, a)) return a;
  auto numeric = [](cls c) { return c == cls::nz_nat || c == cls::nat || c == cls::int_c; };
  auto listy = [](cls c) { return c == cls::nil_c || c == cls::pair_c || c == cls::list_c; };
  if (numeric(a) && numeric(b)) return cls::int_c;
  if (listy(a) && listy(b)) return cls::list_c;
  return cls::any_c;
}

using shape_map = std::map<std::string, cls>;

cls fact_class(const sym_ptr& s, const path_cond& pc) {
  switch (sort_of(*s)) {
    case sym_sort::s_int: {
      auto lb = pc.lower_bound(s);
      if (lb && *lb >= 1) return cls::nz_nat;
      if (lb && *lb >= 0) return cls::nat;
      return cls::int_c;
    }
    case sym_sort::s_list:
      if (pc.surely_nil(s)) return cls::nil_c;
      if (pc.surely_pair(s)) return cls::pair_c;
      return cls::list_c;
    case sym_sort::s_any:
      if (pc.surely_pair(s)) return cls::pair_c;
      if (pc.surely_nil(s)) return cls::nil_c;
      return cls::any_c;
  }
  return cls::any_c;
}

cls class_of(const sym_ptr& s, const path_cond& pc, const shape_map& shapes) {
  if (std::holds_alternative<sym_clo>(s->node)) return cls::clo_c;
  if (const auto* l = std::get_if<sym_lit>(&s->node)) {
    if (l->v.is_int()) {
      if (l->v.as_int() >= 1) return cls::nz_nat;
      if (l->v.as_int() == 0) return cls::nat;
      return cls::int_c;
    }
    if (l->v.is_nil()) return cls::nil_c;
    if (l->v.is_pair()) return cls::pair_c;
    return cls::any_c;
  }
  if (const auto* a = std::get_if<sym_atom>(&s->node)) {
    if (!a->origin.empty()) {
      auto it = shapes.find(a->origin);
      if (it == shapes.end() || it->second == cls::bot) return cls::bot;
    }
    return fact_class(s, pc);
  }
  const auto& o = std::get<sym_op>(s->node);
  for (const sym_ptr& arg : o.args)
    if (class_of(arg, pc, shapes) == cls::bot) return cls::bot;
  return fact_class(s, pc);
}

// --------------------------------------------------------------------------
// The symbolic evaluator.
// --------------------------------------------------------------------------

using senv = std::map<int, sym_ptr>;

struct branch_val {
  path_cond pc;
  sym_ptr v;  // null: the path ends in a definite runtime error
};
using outcomes = std::vector<branch_val>;

struct activation {
  std::string ident;
  std::string label;
  std::vector<sym_ptr> args;
  std::vector<cls> classes;
};

std::string clo_ident(const sym_clo& c) {
  const auto& lam = std::get<e_lam>(c.lam->node);
  std::string out = lam.label + "|";
  for (const auto& [id, s] : c.captured) {
    out += std::to_string(id);
    out += '=';
    out += s->repr;
    out += ';';
  }
  return out;
}

struct verifier {
  const program& prog;
  const verify_options& opts;
  const shape_map& shapes;
  shape_map next_shapes;

  int next_atom = 1000;  // entry atoms take low ids; summaries start here
  long long budget;
  bool incomplete = false;
  unknown_reason why = unknown_reason::none;
  std::string detail;

  std::map<std::string, std::set<scgraph>> label_graphs;
  std::vector<call_site> sites;
  std::set<std::string> site_keys;

  std::vector<activation> stack;
  std::vector<std::optional<sym_ptr>> global_syms;
  std::vector<bool> global_busy;

  verifier(const program& p, const verify_options& o, const shape_map& sh)
      : prog(p), opts(o), shapes(sh), budget(o.max_paths) {
    global_syms.resize(prog.globals.size());
    global_busy.resize(prog.globals.size(), false);
  }

  void mark_incomplete(unknown_reason r, std::string d) {
    if (incomplete) return;
    incomplete = true;
    why = r;
    detail = std::move(d);
  }

  sym_ptr fresh_any() { return mk_atom(next_atom++, sym_sort::s_any); }

  sym_ptr materialize(cls c, const std::string& origin, path_cond& pc) {
    switch (c) {
      case cls::nil_c:
        return mk_slit(mk_nil());
      case cls::nz_nat: {
        sym_ptr a = mk_atom(next_atom++, sym_sort::s_int, origin);
        pc.assume_ge(a, 1);
        return a;
      }
      case cls::nat: {
        sym_ptr a = mk_atom(next_atom++, sym_sort::s_int, origin);
        pc.assume_ge(a, 0);
        return a;
      }
      case cls::int_c:
        return mk_atom(next_atom++, sym_sort::s_int, origin);
      case cls::pair_c: {
        sym_ptr a = mk_atom(next_atom++, sym_sort::s_list, origin);
        pc.assume_pair(a);
        return a;
      }
      case cls::list_c:
        return mk_atom(next_atom++, sym_sort::s_list, origin);
      default:
        return mk_atom(next_atom++, sym_sort::s_any, origin);
    }
  }

  sym_ptr summary_atom(const std::string& label, path_cond& pc) {
    auto it = shapes.find(label);
    cls c = it == shapes.end() ? cls::bot : it->second;
    return materialize(c, label, pc);
  }

  void note_shape(const std::string& label, const branch_val& out) {
    cls c = class_of(out.v, out.pc, shapes);
    auto [it, inserted] = next_shapes.try_emplace(label, c);
    if (!inserted) it->second = join(it->second, c);
  }

  sym_ptr global_sym(int slot) {
    auto idx = static_cast<std::size_t>(slot);
    if (global_syms[idx]) return *global_syms[idx];
    if (global_busy[idx]) {
      mark_incomplete(unknown_reason::unsupported_feature,
                      "self-referential top-level definition");
      return fresh_any();
    }
    global_busy[idx] = true;
    outcomes outs = eval(prog.globals[idx].second, senv{}, path_cond{});
    global_busy[idx] = false;
    sym_ptr s;
    if (outs.size() == 1 && outs[0].v) {
      s = outs[0].v;
    } else {
      mark_incomplete(unknown_reason::unsupported_feature,
                      "top-level definition with branching effects");
      s = fresh_any();
    }
    global_syms[idx] = s;
    return s;
  }

  branch_val prim_sym(path_cond pc, prim p, const std::vector<sym_ptr>& args) {
    if (static_cast<int>(args.size()) != prim_arity(p)) return {std::move(pc), nullptr};
    auto lit = [](const sym_ptr& s) { return std::get_if<sym_lit>(&s->node); };
    switch (p) {
      case prim::add:
      case prim::sub:
      case prim::mul: {
        for (const sym_ptr& a : args) {
          const auto* l = lit(a);
          if (l && !l->v.is_int()) return {std::move(pc), nullptr};
          if (!l && sort_of(*a) == sym_sort::s_list) return {std::move(pc), nullptr};
        }
        const auto* la = lit(args[0]);
        const auto* lb = lit(args[1]);
        if (la && lb) {
          const bigint& x = la->v.as_int();
          const bigint& y = lb->v.as_int();
          bigint r;
          if (p == prim::add)
            r = x + y;
          else if (p == prim::sub)
            r = x - y;
          else
            r = x * y;
          return {std::move(pc), mk_slit(mk_int(r))};
        }
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::eq: {
        const auto* la = lit(args[0]);
        const auto* lb = lit(args[1]);
        if (la && lb)
          return {std::move(pc), mk_slit(mk_int(value_equal(la->v, lb->v) ? 0 : 1))};
        if (args[0]->repr == args[1]->repr) return {std::move(pc), mk_slit(mk_int(0))};
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::lt: {
        for (const sym_ptr& a : args) {
          const auto* l = lit(a);
          if (l && !l->v.is_int()) return {std::move(pc), nullptr};
          if (!l && sort_of(*a) == sym_sort::s_list) return {std::move(pc), nullptr};
        }
        const auto* la = lit(args[0]);
        const auto* lb = lit(args[1]);
        if (la && lb)
          return {std::move(pc),
                  mk_slit(mk_int(la->v.as_int() < lb->v.as_int() ? 0 : 1))};
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::cons: {
        const auto* la = lit(args[0]);
        const auto* lb = lit(args[1]);
        if (la && lb) return {std::move(pc), mk_slit(mk_pair(la->v, lb->v))};
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::car:
      case prim::cdr: {
        const sym_ptr& a = args[0];
        if (const auto* l = lit(a)) {
          if (!l->v.is_pair()) return {std::move(pc), nullptr};
          return {std::move(pc),
                  mk_slit(p == prim::car ? l->v.as_pair().first : l->v.as_pair().second)};
        }
        if (const auto* o = std::get_if<sym_op>(&a->node); o && o->p == prim::cons)
          return {std::move(pc), o->args[p == prim::car ? 0 : 1]};
        if (pc.surely_nil(a) || sort_of(*a) == sym_sort::s_int)
          return {std::move(pc), nullptr};
        // Only the non-error continuation survives, so the operand is a pair.
        if (!pc.assume_pair(a)) return {std::move(pc), nullptr};
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::is_empty: {
        const sym_ptr& a = args[0];
        if (const auto* l = lit(a)) return {std::move(pc), mk_slit(mk_int(l->v.is_nil() ? 0 : 1))};
        if (pc.surely_nil(a)) return {std::move(pc), mk_slit(mk_int(0))};
        if (pc.surely_pair(a) || sort_of(*a) == sym_sort::s_int ||
            std::holds_alternative<sym_clo>(a->node))
          return {std::move(pc), mk_slit(mk_int(1))};
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::is_cons: {
        const sym_ptr& a = args[0];
        if (const auto* l = lit(a)) return {std::move(pc), mk_slit(mk_int(l->v.is_pair() ? 0 : 1))};
        if (pc.surely_pair(a)) return {std::move(pc), mk_slit(mk_int(0))};
        if (pc.surely_nil(a) || sort_of(*a) == sym_sort::s_int ||
            std::holds_alternative<sym_clo>(a->node))
          return {std::move(pc), mk_slit(mk_int(1))};
        return {std::move(pc), mk_sop(p, args)};
      }
      case prim::is_zero: {
        const sym_ptr& a = args[0];
        if (const auto* l = lit(a)) {
          if (!l->v.is_int()) return {std::move(pc), nullptr};
          return {std::move(pc), mk_slit(mk_int(l->v.as_int() == 0 ? 0 : 1))};
        }
        if (sort_of(*a) == sym_sort::s_list) return {std::move(pc), nullptr};
        return {std::move(pc), mk_sop(p, args)};
      }
    }
    return {std::move(pc), nullptr};
  }

  void record_site(const std::string& label, const std::vector<sym_ptr>& older,
                   const std::vector<sym_ptr>& newer, const scgraph& g) {
    std::string key = label + "\n" + to_string(g);
    if (!site_keys.insert(key).second) return;
    if (sites.size() >= 64) return;
    call_site s;
    s.label = label;
    for (const sym_ptr& a : older) s.older.push_back(a->repr);
    for (const sym_ptr& a : newer) s.newer.push_back(a->repr);
    s.g = g;
    sites.push_back(std::move(s));
  }

  outcomes call_closure(path_cond pc, const sym_clo& c, std::vector<sym_ptr> args) {
    const auto& lam = std::get<e_lam>(c.lam->node);
    if (args.size() != lam.params.size()) return {{std::move(pc), nullptr}};
    std::string ident = clo_ident(c);

    std::vector<cls> classes;
    classes.reserve(args.size());
    for (const sym_ptr& a : args) classes.push_back(class_of(a, pc, shapes));

    int encl = -1;
    int occupancy = 0;
    for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i) {
      if (stack[static_cast<std::size_t>(i)].ident != ident) continue;
      ++occupancy;
      if (encl < 0) encl = i;
    }

    if (encl >= 0) {
      const activation& act = stack[static_cast<std::size_t>(encl)];
      scgraph g = build_graph(act.args, args, [&](const sym_ptr& n, const sym_ptr& o) {
        return entails_order(pc, o, n);
      });
      label_graphs[lam.label].insert(g);
      record_site(lam.label, act.args, args, g);

      for (const activation& a : stack) {
        if (a.ident != ident) continue;
        bool fits = true;
        for (std::size_t i = 0; i < classes.size(); ++i)
          if (!subsumes(classes[i], a.classes[i])) {
            fits = false;
            break;
          }
        if (fits) {
          sym_ptr s = summary_atom(lam.label, pc);
          return {{std::move(pc), std::move(s)}};
        }
      }

      if (occupancy > opts.fuel) {
        // Out of unfoldings: continue from arguments generalized to fresh
        // atoms that keep only their entailed sign/sort facts.
        for (std::size_t i = 0; i < args.size(); ++i)
          args[i] = materialize(classes[i], "", pc);
      }
    }

    if (static_cast<int>(stack.size()) >= opts.max_depth) {
      mark_incomplete(unknown_reason::fuel, "activation depth limit reached");
      sym_ptr s = summary_atom(lam.label, pc);
      return {{std::move(pc), std::move(s)}};
    }

    senv en;
    for (const auto& [id, s] : c.captured) en[id] = s;
    for (std::size_t i = 0; i < args.size(); ++i) en[lam.params[i]] = args[i];
    stack.push_back({std::move(ident), lam.label, args, std::move(classes)});
    outcomes outs = eval(lam.body, en, pc);
    stack.pop_back();
    for (const branch_val& out : outs)
      if (out.v) note_shape(lam.label, out);
    return outs;
  }

  outcomes apply_sym(path_cond pc, const sym_ptr& fn, std::vector<sym_ptr> args) {
    if (const auto* l = std::get_if<sym_lit>(&fn->node)) {
      if (l->v.is_prim()) return {prim_sym(std::move(pc), l->v.as_prim(), args)};
      return {{std::move(pc), nullptr}};
    }
    if (const auto* c = std::get_if<sym_clo>(&fn->node))
      return call_closure(std::move(pc), *c, std::move(args));
    mark_incomplete(unknown_reason::unsupported_feature,
                    "opaque value in call position");
    return {{std::move(pc), fresh_any()}};
  }

  outcomes eval(const expr_ptr& e, const senv& en, const path_cond& pc) {
    if (--budget < 0) {
      mark_incomplete(unknown_reason::fuel, "exploration budget exhausted");
      return {{pc, fresh_any()}};
    }
    const expr& ex = *e;
    if (const auto* l = std::get_if<e_lit>(&ex.node)) return {{pc, mk_slit(l->v)}};
    if (const auto* pr = std::get_if<e_prim>(&ex.node))
      return {{pc, mk_slit(mk_prim(pr->p))}};
    if (const auto* var = std::get_if<e_var>(&ex.node)) {
      if (auto it = en.find(var->name); it != en.end()) return {{pc, it->second}};
      if (var->global_slot >= 0) return {{pc, global_sym(var->global_slot)}};
      return {{pc, nullptr}};
    }
    if (const auto* lam = std::get_if<e_lam>(&ex.node)) {
      std::vector<std::pair<int, sym_ptr>> captured;
      for (int id : lam->captured) {
        auto it = en.find(id);
        if (it != en.end()) captured.emplace_back(id, it->second);
      }
      return {{pc, mk_sclo(e, std::move(captured))}};
    }
    if (const auto* tc = std::get_if<e_termc>(&ex.node)) return eval(tc->body, en, pc);
    if (const auto* br = std::get_if<e_if0>(&ex.node)) {
      outcomes res;
      for (branch_val& t : eval(br->test, en, pc)) {
        if (!t.v) {
          res.push_back(std::move(t));
          continue;
        }
        path_cond p0 = t.pc;
        if (p0.assume(t.v, true))
          for (branch_val& o : eval(br->then_e, en, p0)) res.push_back(std::move(o));
        path_cond p1 = std::move(t.pc);
        if (p1.assume(t.v, false))
          for (branch_val& o : eval(br->else_e, en, p1)) res.push_back(std::move(o));
      }
      return res;
    }
    const auto& app = std::get<e_app>(ex.node);
    struct partial {
      path_cond pc;
      std::vector<sym_ptr> vals;
    };
    std::vector<partial> parts{{pc, {}}};
    outcomes res;
    std::vector<expr_ptr> exprs;
    exprs.push_back(app.fn);
    for (const expr_ptr& a : app.args) exprs.push_back(a);
    for (const expr_ptr& sub : exprs) {
      std::vector<partial> next;
      for (partial& part : parts) {
        for (branch_val& o : eval(sub, en, part.pc)) {
          if (!o.v) {
            res.push_back(std::move(o));
            continue;
          }
          partial np{std::move(o.pc), part.vals};
          np.vals.push_back(std::move(o.v));
          next.push_back(std::move(np));
        }
      }
      parts = std::move(next);
    }
    for (partial& part : parts) {
      sym_ptr fn = part.vals[0];
      std::vector<sym_ptr> args(part.vals.begin() + 1, part.vals.end());
      for (branch_val& o : apply_sym(std::move(part.pc), fn, std::move(args)))
        res.push_back(std::move(o));
    }
    return res;
  }
};

nlohmann::json graph_json(const scgraph& g) {
  nlohmann::json arcs = nlohmann::json::array();
  for (const arc& a : g.arcs())
    arcs.push_back({a.src, a.rel == arc_rel::strict ? "<" : "<=", a.dst});
  return {{"arity", g.arity()}, {"arcs", arcs}};
}

}  // namespace

const char* to_string(verify_verdict v) {
  switch (v) {
    case verify_verdict::verified:
      return "verified";
    case verify_verdict::refuted:
      return "refuted";
    case verify_verdict::unknown:
      return "unknown";
  }
  return "unknown";
}

const char* to_string(unknown_reason r) {
  switch (r) {
    case unknown_reason::none:
      return "none";
    case unknown_reason::fuel:
      return "fuel";
    case unknown_reason::unsupported_feature:
      return "unsupported-feature";
    case unknown_reason::entailment_gap:
      return "entailment-gap";
  }
  return "none";
}

verify_result verify_termination(const program& prog, const std::string& entry,
                                 const verify_options& opts) {
  verify_result res;
  auto nit = prog.name_ids.find(entry);
  if (nit == prog.name_ids.end() || !prog.global_slots.count(nit->second)) {
    res.reason = unknown_reason::unsupported_feature;
    res.detail = "entry " + entry + " is not defined";
    return res;
  }
  int slot = prog.global_slots.at(nit->second);
  expr_ptr target = prog.globals[static_cast<std::size_t>(slot)].second;
  while (const auto* tc = std::get_if<e_termc>(&target->node)) target = tc->body;
  const auto* lam = std::get_if<e_lam>(&target->node);
  if (!lam) {
    res.reason = unknown_reason::unsupported_feature;
    res.detail = "entry " + entry + " is not a function";
    return res;
  }

  std::vector<precond::sort> sorts(lam->params.size(), precond::sort::any);
  if (auto ait = prog.assumes.find(nit->second); ait != prog.assumes.end()) {
    for (std::size_t i = 0; i < ait->second.size() && i < sorts.size(); ++i)
      sorts[i] = ait->second[i].s;
  }

  shape_map shapes;
  std::unique_ptr<verifier> V;
  for (int round = 0; round < 4; ++round) {
    V = std::make_unique<verifier>(prog, opts, shapes);
    path_cond pc;
    std::vector<sym_ptr> args;
    for (std::size_t i = 0; i < sorts.size(); ++i) {
      int id = static_cast<int>(i);
      switch (sorts[i]) {
        case precond::sort::natural: {
          sym_ptr a = mk_atom(id, sym_sort::s_int);
          pc.assume_ge(a, 0);
          args.push_back(a);
          break;
        }
        case precond::sort::integer:
          args.push_back(mk_atom(id, sym_sort::s_int));
          break;
        case precond::sort::list:
          args.push_back(mk_atom(id, sym_sort::s_list));
          break;
        case precond::sort::any:
          args.push_back(mk_atom(id, sym_sort::s_any));
          break;
      }
    }
    sym_clo entry_clo{target, {}};
    V->call_closure(pc, entry_clo, args);
    if (V->next_shapes == shapes) break;
    shapes = V->next_shapes;
  }

  if (V->incomplete) {
    res.verdict = verify_verdict::unknown;
    res.reason = V->why;
    res.detail = V->detail;
    return res;
  }

  res.sites = V->sites;
  for (const auto& [label, gs] : V->label_graphs) {
    std::set<scgraph> closed = close_under_composition(gs);
    res.graphs.insert(closed.begin(), closed.end());
    if (!res.witness) {
      if (auto w = scp_witness(gs)) {
        res.witness = *w;
        for (const call_site& s : V->sites)
          if (s.label == label && s.g == *w) {
            res.witness_site = s;
            break;
          }
        if (!res.witness_site)
          for (const call_site& s : V->sites)
            if (s.label == label) {
              res.witness_site = s;
              break;
            }
      }
    }
  }
  res.verdict = res.witness ? verify_verdict::refuted : verify_verdict::verified;
  return res;
}

std::string to_json(const verify_result& r) {
  nlohmann::json j;
  j["result"] = to_string(r.verdict);
  nlohmann::json gs = nlohmann::json::array();
  for (const scgraph& g : r.graphs) gs.push_back(graph_json(g));
  j["graphs"] = gs;
  if (r.witness) {
    nlohmann::json w;
    w["graph"] = graph_json(*r.witness);
    if (r.witness_site) {
      w["label"] = r.witness_site->label;
      w["older"] = r.witness_site->older;
      w["newer"] = r.witness_site->newer;
    }
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  if (r.verdict == verify_verdict::unknown) {
    j["reason"] = to_string(r.reason);
    j["detail"] = r.detail;
  } else {
    j["reason"] = nullptr;
  }
  return j.dump();
}

}  // namespace sct
