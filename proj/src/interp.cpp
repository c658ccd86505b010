#include <sct/interp.hpp>

#include <algorithm>
#include <variant>

#include <sct/persistent_map.hpp>

namespace sct {

namespace {

struct rt_error {
  std::string msg;
};
struct sc_error_ex {
  sc_violation v;
};
struct ceiling_ex {};

struct table_entry {
  std::vector<value> last_args;        // arguments of the latest call
  std::vector<value> checkpoint_args;  // arguments at the latest checked call
  monitor_state mon;
  std::uint64_t calls = 0;
  std::uint64_t next_check = 0;  // backoff: call index of the next comparison
  int last_event = -1;           // trace mode: id of this entry's latest event
};

using table_t = persistent_map<closure_key, table_entry>;

struct fr_args {
  std::vector<value> done;  // fn first, then evaluated arguments
  const e_app* app;
  env en;
};
struct fr_branch {
  const e_if0* node;
  env en;
};
struct fr_wrap {
  std::string blame;
};
struct fr_restore {
  table_t table;
  bool monitoring;
  std::string blame;
};
using frame = std::variant<fr_args, fr_branch, fr_wrap, fr_restore>;

struct machine {
  const program& prog;
  const run_options& opts;
  value_order order;

  std::vector<std::optional<value>> global_vals;

  table_t table;
  bool monitoring = false;
  std::string blame;

  std::vector<frame> kont;
  run_stats stats;
  std::set<scgraph> accepted_set;
  std::vector<scgraph> accepted_order;
  std::set<closure_key> keys_seen;
  std::vector<closure_key> keys_order;
  std::vector<trace_event> events;

  // Control registers of the small-step loop.
  expr_ptr ce;
  env cenv;
  value rv;
  bool returning = false;

  machine(const program& p, const run_options& o)
      : prog(p), opts(o), order(o.order ? o.order : default_order()) {
    global_vals.resize(prog.globals.size());
  }

  size_rel compare(const value& newer, const value& older) {
    ++stats.order_compares;
    return order(newer, older);
  }

  void bump_frames() {
    stats.frame_high_water = std::max<std::uint64_t>(stats.frame_high_water, kont.size());
  }

  void accept(scgraph g) {
    if (accepted_set.insert(g).second) accepted_order.push_back(std::move(g));
  }

  void feed_graph(table_entry& e, scgraph g, const closure_key& key) {
    ++stats.prog_checks;
    if (opts.trace) {
      int id = static_cast<int>(events.size());
      events.push_back({key, true, std::move(g), e.last_event});
      e.last_event = id;
      accept(events.back().g);
      return;
    }
    stats.compositions += e.mon.end_set.size();
    std::optional<scgraph> viol = monitor_step(e.mon, g);
    stats.desc_checks += e.mon.end_set.size();
    stats.endset_high_water =
        std::max<std::uint64_t>(stats.endset_high_water, e.mon.end_set.size());
    if (viol) throw sc_error_ex{{blame, key, std::move(*viol), e.calls}};
    accept(std::move(g));
  }

  void monitored_call(const closure& c, const std::vector<value>& args) {
    closure_key key = key_of(c);
    if (keys_seen.insert(key).second) keys_order.push_back(key);
    const table_entry* old = table.find(key);
    table_entry e = old ? *old : table_entry{};
    ++e.calls;
    auto cmp = [this](const value& n, const value& o) { return compare(n, o); };
    if (!old) {
      e.mon = monitor_init(static_cast<int>(args.size()));
      e.last_args = args;
      e.checkpoint_args = args;
      if (opts.policy.kind == policy_kind::backoff)
        e.next_check = std::max<std::uint64_t>(2, opts.policy.base);
      if (opts.trace) {
        e.last_event = static_cast<int>(events.size());
        events.push_back({key, false, {}, -1});
      }
    } else if (opts.trace) {
      // Trace mode records the graph of every consecutive call pair; the
      // policy only governs enforcement, which tracing never does.
      scgraph g = build_graph(e.last_args, args, cmp);
      feed_graph(e, std::move(g), key);
      e.last_args = args;
    } else if (opts.policy.kind == policy_kind::always) {
      scgraph g = build_graph(e.last_args, args, cmp);
      feed_graph(e, std::move(g), key);
      e.last_args = args;
      e.checkpoint_args = args;
    } else {
      e.last_args = args;
      if (e.calls == e.next_check) {
        scgraph g = build_graph(e.checkpoint_args, args, cmp);
        feed_graph(e, std::move(g), key);
        e.checkpoint_args = args;
        e.next_check *= 2;
      }
    }
    table = table.set(key, e);
    ++stats.table_updates;
    stats.table_high_water = std::max<std::uint64_t>(stats.table_high_water, table.size());
  }

  value apply_prim(prim p, const std::vector<value>& args) {
    if (static_cast<int>(args.size()) != prim_arity(p))
      throw rt_error{std::string(prim_name(p)) + " expects " +
                     std::to_string(prim_arity(p)) + " argument(s), got " +
                     std::to_string(args.size())};
    switch (p) {
      case prim::add:
      case prim::sub:
      case prim::mul: {
        if (!args[0].is_int() || !args[1].is_int())
          throw rt_error{std::string(prim_name(p)) + " expects integers"};
        const bigint& a = args[0].as_int();
        const bigint& b = args[1].as_int();
        if (p == prim::add) return mk_int(a + b);
        if (p == prim::sub) return mk_int(a - b);
        return mk_int(a * b);
      }
      case prim::eq:
        return mk_int(value_equal(args[0], args[1]) ? 0 : 1);
      case prim::lt:
        if (!args[0].is_int() || !args[1].is_int())
          throw rt_error{"< expects integers"};
        return mk_int(args[0].as_int() < args[1].as_int() ? 0 : 1);
      case prim::cons:
        return mk_pair(args[0], args[1]);
      case prim::car:
        if (!args[0].is_pair()) throw rt_error{"car expects a pair, got " + print_value(args[0])};
        return args[0].as_pair().first;
      case prim::cdr:
        if (!args[0].is_pair()) throw rt_error{"cdr expects a pair, got " + print_value(args[0])};
        return args[0].as_pair().second;
      case prim::is_empty:
        return mk_int(args[0].is_nil() ? 0 : 1);
      case prim::is_cons:
        return mk_int(args[0].is_pair() ? 0 : 1);
      case prim::is_zero:
        if (!args[0].is_int()) throw rt_error{"zero? expects an integer"};
        return mk_int(args[0].as_int() == 0 ? 0 : 1);
    }
    throw rt_error{"unknown primitive"};
  }

  void apply(std::vector<value> done) {
    value fn = std::move(done[0]);
    std::vector<value> args(std::make_move_iterator(done.begin() + 1),
                            std::make_move_iterator(done.end()));
    if (fn.is_prim()) {
      rv = apply_prim(fn.as_prim(), args);
      returning = true;
      return;
    }

    bool wrapped = false;
    std::string contract_blame;
    value f = fn;
    while (f.is_termclo()) {
      const auto& t = f.as_termclo();
      if (!wrapped) {
        wrapped = true;
        contract_blame = t.blame;
      }
      f = t.inner;
    }
    if (!f.is_clo())
      throw rt_error{"application of non-function value " + print_value(fn)};
    // Keep the callee alive: `f` goes out of scope but `clo`'s lambda and env
    // are shared; hold the shared_ptr for the rest of this transition.
    auto clo_ptr = std::get<std::shared_ptr<const closure>>(f.rep);
    const closure& c = *clo_ptr;
    if (args.size() != c.params().size())
      throw rt_error{c.label() + " expects " + std::to_string(c.params().size()) +
                     " argument(s), got " + std::to_string(args.size())};

    bool off = opts.policy.kind == policy_kind::off;
    if (!off && (monitoring || wrapped)) {
      bool tail = kont.empty() || std::holds_alternative<fr_restore>(kont.back());
      if (!tail) {
        kont.push_back(fr_restore{table, monitoring, blame});
        bump_frames();
      }
      if (!monitoring) {
        table = table_t{};
        monitoring = true;
      }
      if (wrapped) blame = contract_blame;
      monitored_call(c, args);
    }

    cenv = c.captured.bind(c.params(), args);
    ce = c.body();
    returning = false;
  }

  void step_eval() {
    const expr& e = *ce;
    if (const auto* lit = std::get_if<e_lit>(&e.node)) {
      rv = lit->v;
      returning = true;
    } else if (const auto* pr = std::get_if<e_prim>(&e.node)) {
      rv = mk_prim(pr->p);
      returning = true;
    } else if (const auto* var = std::get_if<e_var>(&e.node)) {
      if (const value* v = cenv.find(var->name)) {
        rv = *v;
        returning = true;
        return;
      }
      if (var->global_slot >= 0) {
        auto& slot = global_vals[static_cast<std::size_t>(var->global_slot)];
        if (slot) {
          rv = *slot;
          returning = true;
          return;
        }
        throw rt_error{prog.name_of(var->name) + " referenced before its definition"};
      }
      throw rt_error{"unbound variable " + prog.name_of(var->name)};
    } else if (const auto* lam = std::get_if<e_lam>(&e.node)) {
      rv = mk_clo(ce, cenv.restrict_to(lam->captured));
      returning = true;
    } else if (const auto* app = std::get_if<e_app>(&e.node)) {
      kont.push_back(fr_args{{}, app, cenv});
      bump_frames();
      ce = app->fn;
    } else if (const auto* br = std::get_if<e_if0>(&e.node)) {
      kont.push_back(fr_branch{br, cenv});
      bump_frames();
      ce = br->test;
    } else {
      const auto& tc = std::get<e_termc>(e.node);
      kont.push_back(fr_wrap{tc.blame});
      bump_frames();
      ce = tc.body;
    }
  }

  // Processes the returned value against the top frame. Returns true when
  // the whole top-level expression is finished.
  bool step_return() {
    if (kont.empty()) return true;
    frame& top = kont.back();
    if (auto* fa = std::get_if<fr_args>(&top)) {
      fa->done.push_back(std::move(rv));
      if (fa->done.size() == fa->app->args.size() + 1) {
        std::vector<value> done = std::move(fa->done);
        kont.pop_back();
        apply(std::move(done));
      } else {
        ce = fa->app->args[fa->done.size() - 1];
        cenv = fa->en;
        returning = false;
      }
      return false;
    }
    if (auto* fb = std::get_if<fr_branch>(&top)) {
      const e_if0* node = fb->node;
      cenv = fb->en;
      kont.pop_back();
      bool truthy = rv.is_int() && rv.as_int() == 0;
      ce = truthy ? node->then_e : node->else_e;
      returning = false;
      return false;
    }
    if (auto* fw = std::get_if<fr_wrap>(&top)) {
      std::string b = std::move(fw->blame);
      kont.pop_back();
      // Only bare closures gain a wrapper; other values (including values
      // already wrapped) pass through unchanged.
      if (rv.is_clo()) rv = mk_termclo(std::move(rv), std::move(b));
      return false;
    }
    auto& fr = std::get<fr_restore>(top);
    table = std::move(fr.table);
    monitoring = fr.monitoring;
    blame = std::move(fr.blame);
    kont.pop_back();
    return false;
  }

  value eval_top(const expr_ptr& root) {
    table = table_t{};
    monitoring = opts.monitor_all && opts.policy.kind != policy_kind::off;
    blame = monitoring ? "program" : "";
    kont.clear();
    ce = root;
    cenv = env{};
    returning = false;
    while (true) {
      if (opts.max_steps && stats.machine_steps >= opts.max_steps) throw ceiling_ex{};
      ++stats.machine_steps;
      if (returning) {
        if (step_return()) return rv;
      } else {
        step_eval();
      }
    }
  }
};

}  // namespace

std::vector<trace_path> trace_paths(const std::vector<trace_event>& events) {
  std::vector<std::vector<int>> children(events.size());
  std::vector<int> roots;
  for (std::size_t i = 0; i < events.size(); ++i) {
    int p = events[i].parent;
    if (p >= 0)
      children[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
    else
      roots.push_back(static_cast<int>(i));
  }
  std::vector<trace_path> out;
  std::vector<scgraph> path;
  struct item {
    int node;
    bool exiting;
  };
  // Depth-first over the event forest; each leaf yields the graph sequence
  // along its root-to-leaf path.
  for (int r : roots) {
    std::vector<item> stack{{r, false}};
    while (!stack.empty()) {
      item it = stack.back();
      stack.pop_back();
      const auto& ev = events[static_cast<std::size_t>(it.node)];
      if (it.exiting) {
        if (ev.has_graph) path.pop_back();
        continue;
      }
      if (ev.has_graph) path.push_back(ev.g);
      stack.push_back({it.node, true});
      const auto& kids = children[static_cast<std::size_t>(it.node)];
      if (kids.empty())
        out.push_back({events[static_cast<std::size_t>(r)].key, path});
      else
        for (auto k = kids.rbegin(); k != kids.rend(); ++k)
          stack.push_back({*k, false});
    }
  }
  return out;
}

run_result run(const program& prog, const run_options& opts) {
  machine m(prog, opts);
  run_result result;
  try {
    for (std::size_t i = 0; i < prog.globals.size(); ++i)
      m.global_vals[i] = m.eval_top(prog.globals[i].second);
    for (const expr_ptr& main : prog.mains)
      result.values.push_back(m.eval_top(main));
    result.kind = outcome_kind::done;
  } catch (rt_error& e) {
    result.kind = outcome_kind::runtime_error;
    result.error = std::move(e.msg);
  } catch (sc_error_ex& e) {
    result.kind = outcome_kind::sc_error;
    result.violation = std::move(e.v);
  } catch (ceiling_ex&) {
    result.kind = outcome_kind::ceiling;
  }
  m.stats.distinct_keys = m.keys_seen.size();
  result.stats = m.stats;
  result.accepted_graphs = std::move(m.accepted_order);
  result.keys = std::move(m.keys_order);
  result.events = std::move(m.events);
  return result;
}

}  // namespace sct
