#include <sct/reader.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sct {

namespace {

// --------------------------------------------------------------------------
// Datum layer: source text -> s-expression trees.
// --------------------------------------------------------------------------

struct sexp {
  enum class kind { list, sym, num, chr, str } k = kind::list;
  std::vector<sexp> items;  // list: elements; dotted lists keep the tail last
  bool dotted = false;
  std::string text;  // sym, str
  bigint num;        // num, chr (code point)
  int line = 0;
};

struct cursor {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= src.size(); }
  char peek() const { return src[pos]; }
  char get() {
    char c = src[pos++];
    if (c == '\n') ++line;
    return c;
  }
};

bool is_delim(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
         c == '[' || c == ']' || c == ';' || c == '"' || c == '\'';
}

void skip_ws(cursor& cur) {
  while (!cur.eof()) {
    char c = cur.peek();
    if (std::isspace(static_cast<unsigned char>(c))) {
      cur.get();
    } else if (c == ';') {
      while (!cur.eof() && cur.peek() != '\n') cur.get();
    } else {
      return;
    }
  }
}

bool atom_is_integer(const std::string& s) {
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

sexp parse_datum(cursor& cur);

sexp parse_list(cursor& cur, int open_line) {
  sexp out;
  out.k = sexp::kind::list;
  out.line = open_line;
  while (true) {
    skip_ws(cur);
    if (cur.eof()) throw read_error("unterminated list", open_line);
    char c = cur.peek();
    if (c == ')' || c == ']') {
      cur.get();
      return out;
    }
    sexp d = parse_datum(cur);
    if (d.k == sexp::kind::sym && d.text == ".") {
      if (out.items.empty()) throw read_error("misplaced dot", d.line);
      skip_ws(cur);
      if (cur.eof()) throw read_error("unterminated list", open_line);
      out.items.push_back(parse_datum(cur));
      out.dotted = true;
      skip_ws(cur);
      if (cur.eof() || (cur.peek() != ')' && cur.peek() != ']'))
        throw read_error("expected close paren after dotted tail", cur.line);
      cur.get();
      return out;
    }
    out.items.push_back(std::move(d));
  }
}

sexp parse_char(cursor& cur, int line) {
  cur.get();  // backslash
  if (cur.eof()) throw read_error("unterminated character literal", line);
  std::string name(1, cur.get());
  while (!cur.eof() && !is_delim(cur.peek())) name += cur.get();
  sexp out;
  out.k = sexp::kind::chr;
  out.line = line;
  if (name.size() == 1) {
    out.num = static_cast<unsigned char>(name[0]);
  } else if (name == "space") {
    out.num = ' ';
  } else if (name == "newline") {
    out.num = '\n';
  } else if (name == "tab") {
    out.num = '\t';
  } else {
    throw read_error("unknown character literal #\\" + name, line);
  }
  return out;
}

sexp parse_string(cursor& cur, int line) {
  sexp out;
  out.k = sexp::kind::str;
  out.line = line;
  while (true) {
    if (cur.eof()) throw read_error("unterminated string", line);
    char c = cur.get();
    if (c == '"') return out;
    if (c == '\\') {
      if (cur.eof()) throw read_error("unterminated string", line);
      char e = cur.get();
      switch (e) {
        case 'n': out.text += '\n'; break;
        case 't': out.text += '\t'; break;
        case '\\': out.text += '\\'; break;
        case '"': out.text += '"'; break;
        default: throw read_error(std::string("bad string escape \\") + e, cur.line);
      }
    } else {
      out.text += c;
    }
  }
}

sexp parse_datum(cursor& cur) {
  skip_ws(cur);
  if (cur.eof()) throw read_error("unexpected end of input", cur.line);
  int line = cur.line;
  char c = cur.peek();
  if (c == '(' || c == '[') {
    cur.get();
    return parse_list(cur, line);
  }
  if (c == ')' || c == ']') throw read_error("unexpected close paren", line);
  if (c == '\'') {
    cur.get();
    sexp quoted = parse_datum(cur);
    sexp out;
    out.k = sexp::kind::list;
    out.line = line;
    sexp head;
    head.k = sexp::kind::sym;
    head.text = "quote";
    head.line = line;
    out.items.push_back(std::move(head));
    out.items.push_back(std::move(quoted));
    return out;
  }
  if (c == '#') {
    cur.get();
    if (cur.eof() || cur.peek() != '\\')
      throw read_error("expected character literal after #", line);
    return parse_char(cur, line);
  }
  if (c == '"') {
    cur.get();
    return parse_string(cur, line);
  }
  std::string atom;
  while (!cur.eof() && !is_delim(cur.peek())) atom += cur.get();
  if (atom.empty()) throw read_error("stray delimiter", line);
  sexp out;
  out.line = line;
  if (atom_is_integer(atom)) {
    out.k = sexp::kind::num;
    out.num = bigint(atom[0] == '+' ? atom.substr(1) : atom);
  } else {
    out.k = sexp::kind::sym;
    out.text = std::move(atom);
  }
  return out;
}

std::vector<sexp> parse_all(const std::string& src) {
  cursor cur{src};
  std::vector<sexp> out;
  while (true) {
    skip_ws(cur);
    if (cur.eof()) return out;
    out.push_back(parse_datum(cur));
  }
}

bool is_sym(const sexp& s, std::string_view text) {
  return s.k == sexp::kind::sym && s.text == text;
}

// --------------------------------------------------------------------------
// Analysis: s-expressions -> core expressions with resolved variables,
// desugared conditionals, stable lambda labels, and free-variable lists.
// --------------------------------------------------------------------------

const std::set<std::string, std::less<>> k_special = {
    "quote", "lambda",        "λ",      "if0", "if",  "and",   "or",
    "not",   "cond",          "let",    "terminating/c", "define", "assume",
    "else",  "empty"};

struct analyzer {
  program& prog;
  std::vector<std::set<int>> scopes;
  std::map<int, int> anon_on_line;

  bool lexically_bound(int id) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
      if (it->count(id)) return true;
    return false;
  }

  std::string anon_label(int line) {
    int n = ++anon_on_line[line];
    std::string label = prog.stem + ":" + std::to_string(line);
    if (n > 1) label += "#" + std::to_string(n);
    return label;
  }

  void collect_free(const expr_ptr& e, std::set<int>& bound, std::set<int>& out) const {
    if (const auto* v = std::get_if<e_var>(&e->node)) {
      if (v->global_slot < 0 && !bound.count(v->name)) out.insert(v->name);
    } else if (const auto* l = std::get_if<e_lam>(&e->node)) {
      for (int id : l->captured)
        if (!bound.count(id)) out.insert(id);
    } else if (const auto* a = std::get_if<e_app>(&e->node)) {
      collect_free(a->fn, bound, out);
      for (const auto& arg : a->args) collect_free(arg, bound, out);
    } else if (const auto* i = std::get_if<e_if0>(&e->node)) {
      collect_free(i->test, bound, out);
      collect_free(i->then_e, bound, out);
      collect_free(i->else_e, bound, out);
    } else if (const auto* t = std::get_if<e_termc>(&e->node)) {
      collect_free(t->body, bound, out);
    }
  }

  value quote_value(const sexp& s) {
    switch (s.k) {
      case sexp::kind::num:
      case sexp::kind::chr:
        return mk_int(s.num);
      case sexp::kind::sym:
        return mk_int(bigint(prog.symbol_code(s.text)));
      case sexp::kind::str:
        throw read_error("string not allowed in quoted datum", s.line);
      case sexp::kind::list: {
        value tail = mk_nil();
        std::size_t n = s.items.size();
        if (s.dotted) {
          tail = quote_value(s.items.back());
          --n;
        }
        for (std::size_t i = n; i-- > 0;)
          tail = mk_pair(quote_value(s.items[i]), tail);
        return tail;
      }
    }
    throw read_error("bad quoted datum", s.line);
  }

  expr_ptr make_lambda(const std::vector<sexp>& param_syms, const sexp& body_sexp,
                       int line, const std::string& pending) {
    std::vector<int> params;
    std::set<int> seen;
    for (const sexp& p : param_syms) {
      if (p.k != sexp::kind::sym)
        throw read_error("parameter must be an identifier", p.line);
      int id = prog.intern(p.text);
      if (!seen.insert(id).second)
        throw read_error("duplicate parameter " + p.text, p.line);
      params.push_back(id);
    }
    scopes.emplace_back(seen.begin(), seen.end());
    expr_ptr body = analyze(body_sexp, "");
    scopes.pop_back();

    std::set<int> bound(params.begin(), params.end());
    std::set<int> free;
    collect_free(body, bound, free);

    e_lam lam;
    lam.label = pending.empty() ? anon_label(line) : pending;
    lam.params = std::move(params);
    lam.captured.assign(free.begin(), free.end());
    lam.body = std::move(body);
    return mk_expr(expr{std::move(lam)});
  }

  expr_ptr fall_through_error() {
    e_app app;
    app.fn = mk_expr(expr{e_prim{prim::car}});
    app.args.push_back(mk_expr(expr{e_lit{mk_nil()}}));
    return mk_expr(expr{std::move(app)});
  }

  expr_ptr analyze_cond(const std::vector<sexp>& clauses, std::size_t idx) {
    if (idx >= clauses.size()) return fall_through_error();
    const sexp& cl = clauses[idx];
    if (cl.k != sexp::kind::list || cl.items.size() != 2 || cl.dotted)
      throw read_error("cond clause must be [test expr]", cl.line);
    if (is_sym(cl.items[0], "else")) {
      if (idx + 1 != clauses.size())
        throw read_error("else clause must come last", cl.line);
      return analyze(cl.items[1], "");
    }
    e_if0 node;
    node.test = analyze(cl.items[0], "");
    node.then_e = analyze(cl.items[1], "");
    node.else_e = analyze_cond(clauses, idx + 1);
    return mk_expr(expr{std::move(node)});
  }

  expr_ptr analyze_and(const std::vector<sexp>& items, std::size_t idx) {
    if (idx >= items.size()) return mk_expr(expr{e_lit{mk_int(0)}});
    if (idx + 1 == items.size()) return analyze(items[idx], "");
    e_if0 node;
    node.test = analyze(items[idx], "");
    node.then_e = analyze_and(items, idx + 1);
    node.else_e = mk_expr(expr{e_lit{mk_int(1)}});
    return mk_expr(expr{std::move(node)});
  }

  expr_ptr analyze_or(const std::vector<sexp>& items, std::size_t idx) {
    if (idx >= items.size()) return mk_expr(expr{e_lit{mk_int(1)}});
    if (idx + 1 == items.size()) return analyze(items[idx], "");
    e_if0 node;
    node.test = analyze(items[idx], "");
    node.then_e = mk_expr(expr{e_lit{mk_int(0)}});
    node.else_e = analyze_or(items, idx + 1);
    return mk_expr(expr{std::move(node)});
  }

  expr_ptr analyze(const sexp& s, const std::string& pending) {
    switch (s.k) {
      case sexp::kind::num:
      case sexp::kind::chr:
        return mk_expr(expr{e_lit{mk_int(s.num)}});
      case sexp::kind::str:
        throw read_error("string literal only allowed as a contract tag", s.line);
      case sexp::kind::sym: {
        int id = prog.intern(s.text);
        if (lexically_bound(id)) return mk_expr(expr{e_var{id, -1}});
        if (auto it = prog.global_slots.find(id); it != prog.global_slots.end())
          return mk_expr(expr{e_var{id, it->second}});
        if (s.text == "empty") return mk_expr(expr{e_lit{mk_nil()}});
        if (auto p = prim_by_name(s.text)) return mk_expr(expr{e_prim{*p}});
        throw read_error("unbound identifier " + s.text, s.line);
      }
      case sexp::kind::list:
        break;
    }
    if (s.dotted) throw read_error("dotted list is not an expression", s.line);
    if (s.items.empty()) throw read_error("empty application", s.line);

    const sexp& head = s.items[0];
    bool special = false;
    if (head.k == sexp::kind::sym && k_special.count(head.text)) {
      int id = prog.intern(head.text);
      special = !lexically_bound(id) && !prog.global_slots.count(id);
    }
    if (special) {
      const std::string& form = head.text;
      if (form == "quote") {
        if (s.items.size() != 2) throw read_error("quote takes one datum", s.line);
        return mk_expr(expr{e_lit{quote_value(s.items[1])}});
      }
      if (form == "lambda" || form == "λ") {
        if (s.items.size() != 3 || s.items[1].k != sexp::kind::list || s.items[1].dotted)
          throw read_error("lambda needs a parameter list and one body", s.line);
        return make_lambda(s.items[1].items, s.items[2], s.line, pending);
      }
      if (form == "if0" || form == "if") {
        if (s.items.size() != 4)
          throw read_error(form + " takes test, then, else", s.line);
        e_if0 node;
        node.test = analyze(s.items[1], "");
        node.then_e = analyze(s.items[2], "");
        node.else_e = analyze(s.items[3], "");
        return mk_expr(expr{std::move(node)});
      }
      if (form == "and") return analyze_and(s.items, 1);
      if (form == "or") return analyze_or(s.items, 1);
      if (form == "not") {
        if (s.items.size() != 2) throw read_error("not takes one argument", s.line);
        e_if0 node;
        node.test = analyze(s.items[1], "");
        node.then_e = mk_expr(expr{e_lit{mk_int(1)}});
        node.else_e = mk_expr(expr{e_lit{mk_int(0)}});
        return mk_expr(expr{std::move(node)});
      }
      if (form == "cond") return analyze_cond(s.items, 1);
      if (form == "let") {
        if (s.items.size() != 3 || s.items[1].k != sexp::kind::list || s.items[1].dotted)
          throw read_error("let needs a binding list and one body", s.line);
        std::vector<sexp> names;
        std::vector<expr_ptr> inits;
        for (const sexp& b : s.items[1].items) {
          if (b.k != sexp::kind::list || b.items.size() != 2 || b.dotted)
            throw read_error("let binding must be [name expr]", b.line);
          names.push_back(b.items[0]);
          inits.push_back(analyze(b.items[1], ""));
        }
        e_app app;
        app.fn = make_lambda(names, s.items[2], s.line, "");
        app.args = std::move(inits);
        return mk_expr(expr{std::move(app)});
      }
      if (form == "terminating/c") {
        if (s.items.size() != 2 && s.items.size() != 3)
          throw read_error("terminating/c takes an expression and an optional tag", s.line);
        e_termc node;
        if (s.items.size() == 3) {
          if (s.items[2].k != sexp::kind::str)
            throw read_error("contract tag must be a string", s.items[2].line);
          node.blame = s.items[2].text;
        } else {
          node.blame = prog.stem + ":" + std::to_string(s.line);
        }
        node.body = analyze(s.items[1], pending);
        return mk_expr(expr{std::move(node)});
      }
      if (form == "define" || form == "assume")
        throw read_error(form + " only allowed at top level", s.line);
      if (form == "else")
        throw read_error("else only allowed in cond", s.line);
      // "empty" in head position falls through to application below.
    }
    e_app app;
    app.fn = analyze(s.items[0], "");
    for (std::size_t i = 1; i < s.items.size(); ++i)
      app.args.push_back(analyze(s.items[i], ""));
    return mk_expr(expr{std::move(app)});
  }
};

precond::sort parse_sort(const sexp& s) {
  if (s.k == sexp::kind::sym) {
    if (s.text == "natural") return precond::sort::natural;
    if (s.text == "integer") return precond::sort::integer;
    if (s.text == "list") return precond::sort::list;
    if (s.text == "any") return precond::sort::any;
  }
  throw read_error("unknown sort (want natural, integer, list, or any)", s.line);
}

}  // namespace

program read_program(const std::string& source, const std::string& stem) {
  program prog;
  prog.stem = stem;
  std::vector<sexp> forms = parse_all(source);

  // First pass: collect global names so defines can be mutually recursive.
  int next_slot = 0;
  for (const sexp& f : forms) {
    if (f.k != sexp::kind::list || f.items.empty() || !is_sym(f.items[0], "define"))
      continue;
    if (f.items.size() != 3)
      throw read_error("define takes a name (or header) and one expression", f.line);
    const sexp& target = f.items[1];
    const sexp* name_sexp = nullptr;
    if (target.k == sexp::kind::sym) {
      name_sexp = &target;
    } else if (target.k == sexp::kind::list && !target.items.empty() &&
               target.items[0].k == sexp::kind::sym && !target.dotted) {
      name_sexp = &target.items[0];
    } else {
      throw read_error("bad define target", target.line);
    }
    int id = prog.intern(name_sexp->text);
    if (prog.global_slots.count(id))
      throw read_error("duplicate definition of " + name_sexp->text, f.line);
    prog.global_slots[id] = next_slot++;
  }

  analyzer an{prog, {}, {}};
  std::vector<std::pair<int, const sexp*>> assume_forms;
  prog.globals.resize(static_cast<std::size_t>(next_slot));
  for (const sexp& f : forms) {
    if (f.k == sexp::kind::list && !f.items.empty() && is_sym(f.items[0], "define")) {
      const sexp& target = f.items[1];
      expr_ptr body;
      int id;
      if (target.k == sexp::kind::sym) {
        id = prog.intern(target.text);
        body = an.analyze(f.items[2], target.text);
      } else {
        id = prog.intern(target.items[0].text);
        std::vector<sexp> params(target.items.begin() + 1, target.items.end());
        body = an.make_lambda(params, f.items[2], f.line, target.items[0].text);
      }
      prog.globals[static_cast<std::size_t>(prog.global_slots.at(id))] = {id, body};
      continue;
    }
    if (f.k == sexp::kind::list && !f.items.empty() && is_sym(f.items[0], "assume")) {
      if (f.items.size() != 2 || f.items[1].k != sexp::kind::list ||
          f.items[1].items.empty() || f.items[1].items[0].k != sexp::kind::sym)
        throw read_error("assume takes (name (sort param)...)", f.line);
      const sexp& spec = f.items[1];
      int id = prog.intern(spec.items[0].text);
      if (!prog.global_slots.count(id))
        throw read_error("assume names undefined function " + spec.items[0].text, f.line);
      if (prog.assumes.count(id))
        throw read_error("duplicate assume for " + spec.items[0].text, f.line);
      std::vector<precond> pre;
      for (std::size_t i = 1; i < spec.items.size(); ++i) {
        const sexp& ps = spec.items[i];
        if (ps.k != sexp::kind::list || ps.items.size() != 2 ||
            ps.items[1].k != sexp::kind::sym)
          throw read_error("assume parameter must be (sort name)", ps.line);
        pre.push_back({parse_sort(ps.items[0]), ps.items[1].text});
      }
      prog.assumes[id] = std::move(pre);
      assume_forms.push_back({id, &f});
      continue;
    }
    prog.mains.push_back(an.analyze(f, ""));
  }

  // Arity check for assumes whose target is syntactically a lambda.
  for (const auto& [id, form] : assume_forms) {
    const expr_ptr& body = prog.globals[static_cast<std::size_t>(prog.global_slots.at(id))].second;
    const expr* e = body.get();
    if (const auto* t = std::get_if<e_termc>(&e->node)) e = t->body.get();
    if (const auto* l = std::get_if<e_lam>(&e->node)) {
      if (l->params.size() != prog.assumes.at(id).size())
        throw read_error("assume arity does not match definition of " + prog.name_of(id),
                         form->line);
    }
  }
  return prog;
}

program read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw read_error("cannot open " + path, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0)
    stem = stem.substr(0, dot);
  return read_program(ss.str(), stem);
}

}  // namespace sct
