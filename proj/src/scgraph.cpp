#include <sct/scgraph.hpp>

#include <algorithm>
#include <map>

namespace sct {

scgraph::scgraph(int arity, std::vector<arc> arcs)
    : arity_(arity), arcs_(std::move(arcs)) {
  if (arity_ < 0) throw std::invalid_argument("scgraph: negative arity");
  for (const arc& a : arcs_) {
    if (a.src < 0 || a.src >= arity_ || a.dst < 0 || a.dst >= arity_)
      throw std::invalid_argument("scgraph: arc endpoint out of range");
  }
  std::sort(arcs_.begin(), arcs_.end());
  arcs_.erase(std::unique(arcs_.begin(), arcs_.end()), arcs_.end());
  // Normalize: drop a non-ascending arc shadowed by a strict one on the same
  // endpoints. Arcs sort (src, strict, dst) before (src, non_ascend, dst')
  // only when dst <= dst', so match endpoints explicitly.
  std::vector<arc> keep;
  keep.reserve(arcs_.size());
  for (const arc& a : arcs_) {
    if (a.rel == arc_rel::non_ascend) {
      arc shadow{a.src, arc_rel::strict, a.dst};
      if (std::binary_search(arcs_.begin(), arcs_.end(), shadow)) continue;
    }
    keep.push_back(a);
  }
  arcs_ = std::move(keep);
}

std::string to_string(const scgraph& g) {
  std::string out = "arity " + std::to_string(g.arity()) + ";";
  bool first = true;
  for (const arc& a : g.arcs()) {
    out += first ? " " : ", ";
    first = false;
    out += std::to_string(a.src);
    out += a.rel == arc_rel::strict ? " < " : " <= ";
    out += std::to_string(a.dst);
  }
  return out;
}

std::string to_json(const scgraph& g) {
  std::string out = "{\"arity\":" + std::to_string(g.arity()) + ",\"arcs\":[";
  bool first = true;
  for (const arc& a : g.arcs()) {
    if (!first) out += ',';
    first = false;
    out += '[';
    out += std::to_string(a.src);
    out += a.rel == arc_rel::strict ? ",\"<\"," : ",\"<=\",";
    out += std::to_string(a.dst);
    out += ']';
  }
  out += "]}";
  return out;
}

scgraph compose(const scgraph& g1, const scgraph& g2) {
  if (g1.arity() != g2.arity())
    throw std::invalid_argument("compose: arity mismatch");
  // For each mid vertex, join incoming arcs of g1 with outgoing arcs of g2;
  // an (i, k) pair becomes strict as soon as any linking path is strict.
  std::map<std::pair<int, int>, bool> strict_by_edge;
  for (const arc& a : g1.arcs()) {
    for (const arc& b : g2.arcs()) {
      if (a.dst != b.src) continue;
      bool strict = a.rel == arc_rel::strict || b.rel == arc_rel::strict;
      auto [it, inserted] = strict_by_edge.try_emplace({a.src, b.dst}, strict);
      if (!inserted) it->second = it->second || strict;
    }
  }
  std::vector<arc> arcs;
  arcs.reserve(strict_by_edge.size());
  for (const auto& [edge, strict] : strict_by_edge)
    arcs.push_back({edge.first, strict ? arc_rel::strict : arc_rel::non_ascend, edge.second});
  return scgraph(g1.arity(), std::move(arcs));
}

bool desc(const scgraph& g) {
  if (compose(g, g) != g) return true;
  for (const arc& a : g.arcs())
    if (a.src == a.dst && a.rel == arc_rel::strict) return true;
  return false;
}

bool prog(const std::vector<scgraph>& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    scgraph acc = seq[i];
    if (!desc(acc)) return false;
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      acc = compose(acc, seq[j]);
      if (!desc(acc)) return false;
    }
  }
  return true;
}

monitor_state monitor_init(int arity) {
  monitor_state st;
  st.arity = arity;
  return st;
}

std::optional<scgraph> monitor_step(monitor_state& st, const scgraph& g) {
  if (g.arity() != st.arity)
    throw std::invalid_argument("monitor_step: arity mismatch");
  std::set<scgraph> next;
  for (const scgraph& s : st.end_set) next.insert(compose(s, g));
  next.insert(g);
  st.end_set = std::move(next);
  ++st.n;
  for (const scgraph& s : st.end_set)
    if (!desc(s)) return s;
  return std::nullopt;
}

std::set<scgraph> close_under_composition(const std::set<scgraph>& graphs) {
  std::set<scgraph> closed = graphs;
  std::vector<scgraph> work(graphs.begin(), graphs.end());
  while (!work.empty()) {
    scgraph g = std::move(work.back());
    work.pop_back();
    std::vector<scgraph> fresh;
    for (const scgraph& h : closed) {
      scgraph gh = compose(g, h);
      if (!closed.count(gh)) fresh.push_back(std::move(gh));
      scgraph hg = compose(h, g);
      if (!closed.count(hg)) fresh.push_back(std::move(hg));
    }
    for (scgraph& f : fresh) {
      if (closed.insert(f).second) work.push_back(std::move(f));
    }
  }
  return closed;
}

std::optional<scgraph> scp_witness(const std::set<scgraph>& graphs) {
  for (const scgraph& g : close_under_composition(graphs))
    if (!desc(g)) return g;
  return std::nullopt;
}

bool scp_holds(const std::set<scgraph>& graphs) { return !scp_witness(graphs).has_value(); }

}  // namespace sct
