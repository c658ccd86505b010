#include <doctest.h>

#include <json.hpp>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <sct/scgraph.hpp>
#include <sct/value.hpp>

using namespace sct;

namespace {

const arc_rel S = arc_rel::strict;
const arc_rel NA = arc_rel::non_ascend;

scgraph g2(std::vector<arc> arcs) { return scgraph(2, std::move(arcs)); }

// Path-enumeration oracle for composition: an arc (i, r, k) exists iff some
// j links i to k through both graphs, strict iff any such path is strict.
scgraph compose_oracle(const scgraph& a, const scgraph& b) {
  std::map<std::pair<int, int>, bool> best;
  for (const arc& x : a.arcs())
    for (const arc& y : b.arcs())
      if (x.dst == y.src) {
        bool strict = x.rel == S || y.rel == S;
        auto [it, fresh] = best.try_emplace({x.src, y.dst}, strict);
        if (!fresh) it->second = it->second || strict;
      }
  std::vector<arc> arcs;
  for (const auto& [key, strict] : best)
    arcs.push_back({key.first, strict ? S : NA, key.second});
  return scgraph(a.arity(), std::move(arcs));
}

scgraph rand_graph(std::mt19937& rng, int arity) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::vector<arc> arcs;
  for (int i = 0; i < arity; ++i)
    for (int j = 0; j < arity; ++j) {
      int k = kind(rng);
      if (k < 3)
        arcs.push_back({i, S, j});
      else if (k < 6)
        arcs.push_back({i, NA, j});
    }
  return scgraph(arity, std::move(arcs));
}

std::set<scgraph> closure_oracle(std::set<scgraph> gs) {
  for (;;) {
    std::set<scgraph> next = gs;
    for (const scgraph& a : gs)
      for (const scgraph& b : gs) next.insert(compose(a, b));
    if (next == gs) return gs;
    gs = std::move(next);
  }
}

}  // namespace

TEST_SUITE("scgraph") {

TEST_CASE("construction normalizes: sorted, deduplicated, strict shadows non-ascend") {
  scgraph g = g2({{1, NA, 0}, {0, S, 1}, {0, NA, 1}, {0, S, 1}});
  REQUIRE(g.arcs().size() == 2);
  CHECK(g.arcs()[0] == arc{0, S, 1});
  CHECK(g.arcs()[1] == arc{1, NA, 0});
  CHECK(g2({{0, NA, 1}, {0, S, 1}}) == g2({{0, S, 1}}));
}

TEST_CASE("construction rejects out-of-range endpoints") {
  CHECK_THROWS_AS(scgraph(2, {{0, S, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(scgraph(2, {{-1, S, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(scgraph(0, {{0, NA, 0}}), std::invalid_argument);
}

TEST_CASE("display and JSON forms") {
  scgraph g = g2({{0, S, 0}, {0, NA, 1}});
  CHECK(to_string(g) == "arity 2; 0 < 0, 0 <= 1");
  CHECK(to_string(scgraph(1, {})) == "arity 1;");
  auto j = nlohmann::json::parse(to_json(g));
  CHECK(j["arity"] == 2);
  REQUIRE(j["arcs"].size() == 2);
  CHECK(j["arcs"][0] == nlohmann::json::array({0, "<", 0}));
  CHECK(j["arcs"][1] == nlohmann::json::array({0, "<=", 1}));
}

TEST_CASE("compose worked example") {
  // ack's outer call composed with its inner call: m strictly drops through
  // both, so every path stays strict.
  scgraph outer = g2({{0, S, 0}, {0, S, 1}});
  scgraph inner = g2({{0, NA, 0}, {1, NA, 0}});
  CHECK(compose(outer, inner) == g2({{0, S, 0}}));
  CHECK(compose(inner, outer) == g2({{0, S, 0}, {0, S, 1}, {1, S, 0}, {1, S, 1}}));
}

TEST_CASE("compose requires matching arities") {
  CHECK_THROWS_AS(compose(scgraph(1, {}), scgraph(2, {})), std::invalid_argument);
}

TEST_CASE("identity graph is neutral for composition") {
  std::mt19937 rng(11);
  for (int arity = 1; arity <= 4; ++arity) {
    std::vector<arc> id_arcs;
    for (int i = 0; i < arity; ++i) id_arcs.push_back({i, NA, i});
    scgraph id(arity, std::move(id_arcs));
    for (int t = 0; t < 50; ++t) {
      scgraph g = rand_graph(rng, arity);
      CHECK(compose(g, id) == g);
      CHECK(compose(id, g) == g);
    }
  }
}

TEST_CASE("compose agrees with the path oracle and associates") {
  std::mt19937 rng(20240917);
  std::uniform_int_distribution<int> ar(1, 4);
  for (int t = 0; t < 1000; ++t) {
    int arity = ar(rng);
    scgraph a = rand_graph(rng, arity);
    scgraph b = rand_graph(rng, arity);
    scgraph c = rand_graph(rng, arity);
    CHECK(compose(a, b) == compose_oracle(a, b));
    CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
  }
}

TEST_CASE("desc distinguishes idempotent graphs by strict self-arcs") {
  CHECK(desc(scgraph(1, {{0, S, 0}})));
  CHECK_FALSE(desc(scgraph(1, {{0, NA, 0}})));
  CHECK_FALSE(desc(scgraph(1, {})));
  // A swap is not idempotent, so it passes vacuously.
  CHECK(desc(g2({{0, S, 1}, {1, S, 0}})));
  CHECK(desc(g2({{0, NA, 1}, {1, NA, 0}})));
  CHECK_FALSE(desc(g2({{0, NA, 0}, {1, NA, 0}})));
}

TEST_CASE("prog checks every contiguous window") {
  scgraph down = scgraph(1, {{0, S, 0}});
  scgraph flat = scgraph(1, {{0, NA, 0}});
  CHECK(prog({}));
  CHECK(prog({down}));
  CHECK(prog({down, down, down}));
  CHECK_FALSE(prog({flat}));
  CHECK_FALSE(prog({down, flat, down}));
  CHECK_FALSE(prog({down, scgraph(1, {})}));
}

TEST_CASE("monitor matches prog prefix-for-prefix with the oracle witness") {
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> ar(1, 3), len(1, 8);
  for (int t = 0; t < 1000; ++t) {
    int arity = ar(rng);
    int n = len(rng);
    std::vector<scgraph> seq;
    for (int i = 0; i < n; ++i) seq.push_back(rand_graph(rng, arity));

    monitor_state st = monitor_init(arity);
    std::optional<int> mon_reject;
    std::optional<scgraph> mon_witness;
    for (int i = 0; i < n; ++i) {
      if (auto v = monitor_step(st, seq[i])) {
        mon_reject = i;
        mon_witness = v;
        break;
      }
    }

    std::optional<int> ref_reject;
    for (int i = 0; i < n && !ref_reject; ++i) {
      std::vector<scgraph> prefix(seq.begin(), seq.begin() + i + 1);
      if (!prog(prefix)) ref_reject = i;
    }

    REQUIRE(mon_reject == ref_reject);
    if (mon_reject) {
      // The witness is the first non-descending suffix composition in set
      // order at the rejecting step.
      std::set<scgraph> suffixes;
      for (int i = 0; i <= *mon_reject; ++i) {
        scgraph comp = seq[i];
        for (int j = i + 1; j <= *mon_reject; ++j) comp = compose(comp, seq[j]);
        suffixes.insert(comp);
      }
      std::optional<scgraph> expect;
      for (const scgraph& g : suffixes)
        if (!desc(g)) {
          expect = g;
          break;
        }
      REQUIRE(expect.has_value());
      CHECK(*mon_witness == *expect);
    } else {
      // All accepted: the end set is exactly the set of suffix compositions.
      std::set<scgraph> suffixes;
      for (int i = 0; i < n; ++i) {
        scgraph comp = seq[i];
        for (int j = i + 1; j < n; ++j) comp = compose(comp, seq[j]);
        suffixes.insert(comp);
      }
      CHECK(st.end_set == suffixes);
      CHECK(st.n == n);
    }
  }
}

TEST_CASE("close_under_composition reaches the brute-force fixpoint") {
  std::mt19937 rng(777);
  std::uniform_int_distribution<int> ar(1, 3), cnt(1, 3);
  for (int t = 0; t < 200; ++t) {
    int arity = ar(rng);
    std::set<scgraph> gs;
    int n = cnt(rng);
    for (int i = 0; i < n; ++i) gs.insert(rand_graph(rng, arity));
    std::set<scgraph> closed = close_under_composition(gs);
    CHECK(closed == closure_oracle(gs));
    for (const scgraph& a : closed)
      for (const scgraph& b : closed) CHECK(closed.count(compose(a, b)) == 1);
  }
}

TEST_CASE("scp holds for the ack graphs and fails on a flat self-loop") {
  std::set<scgraph> ack = {g2({{0, S, 0}}), g2({{0, NA, 0}, {1, S, 1}})};
  CHECK(scp_holds(ack));
  CHECK_FALSE(scp_witness(ack).has_value());

  std::set<scgraph> flat = {scgraph(1, {{0, NA, 0}})};
  auto w = scp_witness(flat);
  REQUIRE(w.has_value());
  CHECK(*w == scgraph(1, {{0, NA, 0}}));

  // Strict swap: both closure members are descending.
  CHECK(scp_holds({g2({{0, S, 1}, {1, S, 0}})}));
  // Non-strict swap composes to a flat identity.
  CHECK_FALSE(scp_holds({g2({{0, NA, 1}, {1, NA, 0}})}));
}

TEST_CASE("scp witness is the first non-descending closure member in set order") {
  std::mt19937 rng(31337);
  std::uniform_int_distribution<int> ar(1, 3), cnt(1, 3);
  for (int t = 0; t < 200; ++t) {
    int arity = ar(rng);
    std::set<scgraph> gs;
    int n = cnt(rng);
    for (int i = 0; i < n; ++i) gs.insert(rand_graph(rng, arity));
    std::set<scgraph> closed = closure_oracle(gs);
    std::optional<scgraph> expect;
    for (const scgraph& g : closed)
      if (!desc(g)) {
        expect = g;
        break;
      }
    CHECK(scp_witness(gs) == expect);
    CHECK(scp_holds(gs) == !expect.has_value());
  }
}

TEST_CASE("build_graph tabulates the comparator over all argument pairs") {
  std::mt19937 rng(555);
  std::uniform_int_distribution<int> n(-6, 6), len(1, 4);
  value_order ord = default_order();
  for (int t = 0; t < 400; ++t) {
    int k = len(rng);
    std::vector<value> olds, news;
    for (int i = 0; i < k; ++i) {
      olds.push_back(mk_int(static_cast<long>(n(rng))));
      news.push_back(mk_int(static_cast<long>(n(rng))));
    }
    scgraph g = build_graph(olds, news, ord);
    CHECK(g.arity() == k);
    std::vector<arc> expect;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        if (precedes(news[j], olds[i]))
          expect.push_back({i, S, j});
        else if (value_equal(news[j], olds[i]))
          expect.push_back({i, NA, j});
      }
    CHECK(g == scgraph(k, std::move(expect)));
  }
}

TEST_CASE("build_graph rejects arity mismatches") {
  std::vector<value> a = {mk_int(1)}, b = {mk_int(1), mk_int(2)};
  CHECK_THROWS_AS(build_graph(a, b, default_order()), std::invalid_argument);
}

}  // TEST_SUITE
