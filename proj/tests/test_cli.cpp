#include <doctest.h>

#include <json.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sct/cli.hpp>

#include "helpers.hpp"

using namespace sct;
using sct::testing::corpus_path;

namespace {

struct cli_run {
  int rc;
  std::string out;
  std::string err;
};

cli_run sct_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int rc = sct_main(args, out, err);
  return {rc, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("policy parsing") {
  CHECK(parse_policy("always").kind == policy_kind::always);
  CHECK(parse_policy("off").kind == policy_kind::off);
  check_policy b = parse_policy("backoff:4");
  CHECK(b.kind == policy_kind::backoff);
  CHECK(b.base == 4);
  CHECK_THROWS_AS(parse_policy("sometimes"), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("backoff:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("backoff:x"), std::invalid_argument);
}

TEST_CASE("run prints values and exits by outcome") {
  cli_run ok = sct_cli({"run", corpus_path("ack.sct"), "--mode", "monitor-whole"});
  CHECK(ok.rc == exit_ok);
  CHECK(ok.out == "3\n");

  cli_run bad = sct_cli({"run", corpus_path("ack-buggy.sct"), "--mode", "monitor-whole"});
  CHECK(bad.rc == exit_sc);
  CHECK(bad.err.find("size-change violation: blame program") != std::string::npos);
  CHECK(bad.err.find("function: ack") != std::string::npos);
  CHECK(bad.err.find("call:     #3") != std::string::npos);
  CHECK(bad.err.find("arity 2; 0 <= 0, 1 <= 0") != std::string::npos);

  cli_run rt = sct_cli({"run", corpus_path("omega.sct"), "--max-steps", "1000"});
  CHECK(rt.rc == exit_timeout);
  CHECK(rt.err.find("step ceiling") != std::string::npos);

  cli_run missing = sct_cli({"run", corpus_path("no-such-file.sct")});
  CHECK(missing.rc == exit_io);
  CHECK(!missing.err.empty());
}

TEST_CASE("run --json emits a machine-readable result") {
  cli_run r = sct_cli({"run", corpus_path("ack.sct"), "--mode", "monitor-whole", "--json",
                       "--counters"});
  CHECK(r.rc == exit_ok);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"] == "value");
  CHECK(j["values"] == nlohmann::json::array({"3"}));
  CHECK(j["violation"].is_null());
  CHECK(j["stats"]["machine_steps"].get<std::uint64_t>() > 0);
  CHECK(j["stats"]["cost"].get<std::uint64_t>() >=
        j["stats"]["machine_steps"].get<std::uint64_t>());

  cli_run v = sct_cli({"run", corpus_path("omega.sct"), "--mode", "monitor-whole", "--json"});
  CHECK(v.rc == exit_sc);
  auto jv = nlohmann::json::parse(v.out);
  CHECK(jv["result"] == "sc-error");
  CHECK(jv["violation"]["blame"] == "program");
  CHECK(jv["violation"]["call"] == 2);
  CHECK(jv["violation"]["witness"]["arity"] == 1);
}

TEST_CASE("run modes: contracts alone versus whole-program monitoring") {
  cli_run contracts = sct_cli({"run", corpus_path("ev-contract.sct")});
  CHECK(contracts.rc == exit_sc);
  CHECK(contracts.err.find("blame c2") != std::string::npos);

  cli_run off = sct_cli({"run", corpus_path("ev-contract.sct"), "--policy", "off", "--max-steps",
                         "50000"});
  CHECK(off.rc == exit_timeout);

  cli_run whole = sct_cli({"run", corpus_path("ascend-then-stop.sct")});
  CHECK(whole.rc == exit_ok);  // no contract in the source, nothing monitored
  cli_run wholem =
      sct_cli({"run", corpus_path("ascend-then-stop.sct"), "--mode", "monitor-whole"});
  CHECK(wholem.rc == exit_sc);
}

TEST_CASE("verify exits by verdict") {
  cli_run ok = sct_cli({"verify", corpus_path("ack.sct")});
  CHECK(ok.rc == exit_ok);
  CHECK(ok.out.find("ack: verified") != std::string::npos);
  CHECK(ok.out.find("graph: arity 2; 0 < 0") != std::string::npos);

  cli_run ref = sct_cli({"verify", corpus_path("nfa.sct"), "--entry", "state1"});
  CHECK(ref.rc == exit_refuted);
  CHECK(ref.out.find("state1: refuted") != std::string::npos);
  CHECK(ref.out.find("witness:") != std::string::npos);

  cli_run unk = sct_cli({"verify", corpus_path("fold.sct")});
  CHECK(unk.rc == exit_unknown);
  CHECK(unk.out.find("fold: unknown") != std::string::npos);
  CHECK(unk.out.find("unsupported-feature") != std::string::npos);

  cli_run io = sct_cli({"verify", corpus_path("no-such-file.sct")});
  CHECK(io.rc == exit_io);
}

TEST_CASE("verify --json round-trips through the schema") {
  cli_run r = sct_cli({"verify", corpus_path("nfa.sct"), "--entry", "state1", "--json"});
  CHECK(r.rc == exit_refuted);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["entry"] == "state1");
  CHECK(j["result"] == "refuted");
  CHECK(j["witness"]["graph"]["arity"] == 1);
  CHECK(j["witness"]["graph"]["arcs"] == nlohmann::json::array({{0, "<=", 0}}));
}

TEST_CASE("trace lists per-key paths with their prog status") {
  cli_run r = sct_cli({"trace", corpus_path("ascend-then-stop.sct")});
  CHECK(r.rc == exit_ok);
  CHECK(r.out.find("FAIL climb (4 graphs)") != std::string::npos);
  CHECK(r.out.find("1 failing") != std::string::npos);

  cli_run jr = sct_cli({"trace", corpus_path("ascend-then-stop.sct"), "--json"});
  auto j = nlohmann::json::parse(jr.out);
  REQUIRE(j["snapshots"].size() == 1);
  CHECK(j["snapshots"][0]["key"] == "climb");
  CHECK(j["snapshots"][0]["prog"] == false);
  CHECK(j["snapshots"][0]["graphs"].size() == 4);

  cli_run ok = sct_cli({"trace", corpus_path("ack.sct"), "--json"});
  auto jo = nlohmann::json::parse(ok.out);
  for (const auto& snap : jo["snapshots"]) CHECK(snap["prog"] == true);
}

TEST_CASE("bench measures overhead and excludes disagreeing programs") {
  bench_report rep = run_bench(SCT_CORPUS_DIR, {parse_policy("always"), parse_policy("backoff:1")});
  REQUIRE(!rep.rows.empty());

  double fact_always = 0, sum_always = 0;
  std::uint64_t sum_checks_always = 0, sum_checks_backoff = 0;
  for (const bench_row& row : rep.rows) {
    CHECK(row.ratio >= 1.0);
    if (row.program == "fact" && row.policy == "always") fact_always = row.ratio;
    if (row.program == "sum" && row.policy == "always") {
      sum_always = row.ratio;
      sum_checks_always = row.stats.prog_checks;
    }
    if (row.program == "sum" && row.policy == "backoff:1")
      sum_checks_backoff = row.stats.prog_checks;
  }
  CHECK(fact_always >= 1.0);
  CHECK(sum_always > fact_always);
  CHECK(sum_checks_backoff > 0);
  CHECK(sum_checks_backoff < sum_checks_always);

  bool msort_excluded = false;
  for (const std::string& w : rep.warnings)
    msort_excluded |= w.find("msort") != std::string::npos;
  CHECK(msort_excluded);
}

TEST_CASE("the top-level driver wires subcommands and rejects junk") {
  std::ostringstream out, err;
  CHECK(sct_main({"frobnicate"}, out, err) != 0);
  std::ostringstream out2, err2;
  CHECK(sct_main({}, out2, err2) != 0);
}

}  // TEST_SUITE
