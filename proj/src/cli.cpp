#include <sct/cli.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <sct/reader.hpp>
#include <sct/scgraph.hpp>
#include <sct/verify.hpp>

namespace sct {

namespace {

using nlohmann::json;

std::string key_name(const closure_key& k) {
  if (k.env_repr.empty()) return k.label;
  return k.label + "[" + k.env_repr + "]";
}

json graph_to_json(const scgraph& g) { return json::parse(to_json(g)); }

json stats_to_json(const run_stats& s) {
  return {{"machine_steps", s.machine_steps},
          {"order_compares", s.order_compares},
          {"compositions", s.compositions},
          {"desc_checks", s.desc_checks},
          {"prog_checks", s.prog_checks},
          {"table_updates", s.table_updates},
          {"distinct_keys", s.distinct_keys},
          {"frame_high_water", s.frame_high_water},
          {"table_high_water", s.table_high_water},
          {"endset_high_water", s.endset_high_water},
          {"cost", s.cost()}};
}

void print_stats(const run_stats& s, std::ostream& out) {
  out << "machine steps:      " << s.machine_steps << "\n"
      << "order compares:     " << s.order_compares << "\n"
      << "compositions:       " << s.compositions << "\n"
      << "descent checks:     " << s.desc_checks << "\n"
      << "monitor checks:     " << s.prog_checks << "\n"
      << "table updates:      " << s.table_updates << "\n"
      << "distinct keys:      " << s.distinct_keys << "\n"
      << "frame high water:   " << s.frame_high_water << "\n"
      << "table high water:   " << s.table_high_water << "\n"
      << "end-set high water: " << s.endset_high_water << "\n"
      << "cost:               " << s.cost() << "\n";
}

json violation_to_json(const sc_violation& v) {
  return {{"blame", v.blame},
          {"function", key_name(v.key)},
          {"call", v.call_index},
          {"witness", graph_to_json(v.witness)}};
}

const char* result_name(outcome_kind k) {
  switch (k) {
    case outcome_kind::done:
      return "value";
    case outcome_kind::sc_error:
      return "sc-error";
    case outcome_kind::runtime_error:
      return "runtime-error";
    case outcome_kind::ceiling:
      return "timeout";
  }
  return "timeout";
}

int exit_for(outcome_kind k) {
  switch (k) {
    case outcome_kind::done:
      return exit_ok;
    case outcome_kind::sc_error:
      return exit_sc;
    case outcome_kind::runtime_error:
      return exit_runtime;
    case outcome_kind::ceiling:
      return exit_timeout;
  }
  return exit_timeout;
}

run_options options_for(const run_config& cfg) {
  run_options opts;
  opts.policy = cfg.policy;
  opts.max_steps = cfg.max_steps;
  if (cfg.mode == "monitor-whole") {
    opts.monitor_all = true;
  } else if (cfg.mode == "trace") {
    opts.trace = true;
    opts.monitor_all = true;
    if (!opts.max_steps) opts.max_steps = 1'000'000;
  } else if (cfg.mode != "standard" && cfg.mode != "monitor") {
    throw std::invalid_argument("unknown mode " + cfg.mode);
  }
  return opts;
}

std::string file_stem(const std::string& path) {
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0)
    stem = stem.substr(0, dot);
  return stem;
}

}  // namespace

check_policy parse_policy(const std::string& text) {
  if (text == "always") return {policy_kind::always, 1};
  if (text == "off") return {policy_kind::off, 1};
  if (text.rfind("backoff:", 0) == 0) {
    std::size_t used = 0;
    std::string num = text.substr(8);
    unsigned long base = std::stoul(num, &used);
    if (used != num.size() || base == 0)
      throw std::invalid_argument("bad backoff base in " + text);
    return {policy_kind::backoff, static_cast<std::uint64_t>(base)};
  }
  throw std::invalid_argument("unknown policy " + text +
                              " (expected always, off, or backoff:<base>)");
}

int cmd_run(const std::string& file, const run_config& cfg, std::ostream& out,
            std::ostream& err) {
  program prog;
  try {
    prog = read_file(file);
  } catch (const read_error& e) {
    err << file << ": " << e.what() << "\n";
    return exit_io;
  }
  run_result res = run(prog, options_for(cfg));
  if (cfg.json) {
    json j;
    j["result"] = result_name(res.kind);
    json vals = json::array();
    for (const value& v : res.values) vals.push_back(print_value(v));
    j["values"] = vals;
    j["violation"] = res.violation ? violation_to_json(*res.violation) : json(nullptr);
    if (res.kind == outcome_kind::runtime_error) j["error"] = res.error;
    if (cfg.counters) j["stats"] = stats_to_json(res.stats);
    out << j.dump(2) << "\n";
    return exit_for(res.kind);
  }
  for (const value& v : res.values) out << print_value(v) << "\n";
  switch (res.kind) {
    case outcome_kind::done:
      break;
    case outcome_kind::sc_error:
      err << "size-change violation: blame " << res.violation->blame << "\n"
          << "  function: " << key_name(res.violation->key) << "\n"
          << "  call:     #" << res.violation->call_index << "\n"
          << "  witness:  " << to_string(res.violation->witness) << "\n";
      break;
    case outcome_kind::runtime_error:
      err << "runtime error: " << res.error << "\n";
      break;
    case outcome_kind::ceiling:
      err << "step ceiling of " << options_for(cfg).max_steps << " reached\n";
      break;
  }
  if (cfg.counters) print_stats(res.stats, out);
  return exit_for(res.kind);
}

int cmd_verify(const std::string& file, const std::string& entry, int fuel, bool json_out,
               std::ostream& out, std::ostream& err) {
  program prog;
  try {
    prog = read_file(file);
  } catch (const read_error& e) {
    err << file << ": " << e.what() << "\n";
    return exit_io;
  }
  verify_options opts;
  if (fuel > 0) opts.fuel = fuel;
  std::string target = entry.empty() ? prog.stem : entry;
  verify_result res = verify_termination(prog, target, opts);
  if (json_out) {
    json j = json::parse(to_json(res));
    j["entry"] = target;
    out << j.dump(2) << "\n";
  } else {
    out << target << ": " << to_string(res.verdict) << "\n";
    for (const scgraph& g : res.graphs) out << "  graph: " << to_string(g) << "\n";
    if (res.witness) {
      out << "  witness: " << to_string(*res.witness) << "\n";
      if (res.witness_site) {
        out << "  at " << res.witness_site->label << ", arguments";
        for (const std::string& a : res.witness_site->newer) out << " " << a;
        out << " against";
        for (const std::string& a : res.witness_site->older) out << " " << a;
        out << "\n";
      }
    }
    if (res.verdict == verify_verdict::unknown)
      out << "  reason: " << to_string(res.reason) << " (" << res.detail << ")\n";
  }
  switch (res.verdict) {
    case verify_verdict::verified:
      return exit_ok;
    case verify_verdict::refuted:
      return exit_refuted;
    case verify_verdict::unknown:
      return exit_unknown;
  }
  return exit_unknown;
}

int cmd_trace(const std::string& file, std::uint64_t max_steps, bool json_out,
              std::ostream& out, std::ostream& err) {
  run_config cfg;
  cfg.mode = "trace";
  cfg.max_steps = max_steps;
  program prog;
  try {
    prog = read_file(file);
  } catch (const read_error& e) {
    err << file << ": " << e.what() << "\n";
    return exit_io;
  }
  run_result res = run(prog, options_for(cfg));
  std::vector<trace_path> paths = trace_paths(res.events);
  json snaps = json::array();
  if (paths.empty()) {
    snaps.push_back({{"key", "initial"}, {"graphs", json::array()}, {"prog", true}});
  } else {
    for (const trace_path& p : paths) {
      json gs = json::array();
      for (const scgraph& g : p.graphs) gs.push_back(graph_to_json(g));
      snaps.push_back({{"key", key_name(p.key)}, {"graphs", std::move(gs)},
                       {"prog", sct::prog(p.graphs)}});
    }
  }
  if (json_out) {
    json j;
    j["result"] = result_name(res.kind);
    j["snapshots"] = snaps;
    out << j.dump(2) << "\n";
  } else {
    std::size_t failing = 0;
    for (const json& s : snaps)
      if (!s["prog"].get<bool>()) ++failing;
    for (const json& s : snaps) {
      out << (s["prog"].get<bool>() ? "pass " : "FAIL ") << s["key"].get<std::string>()
          << " (" << s["graphs"].size() << " graphs)\n";
    }
    out << snaps.size() << " call paths, " << failing << " failing\n";
    if (res.kind == outcome_kind::ceiling)
      err << "trace stopped at the step ceiling\n";
  }
  return exit_for(res.kind);
}

bench_report run_bench(const std::string& dir, const std::vector<check_policy>& policies,
                       std::uint64_t ceiling) {
  bench_report report;
  std::ifstream in(dir + "/bench.json");
  if (!in) throw std::runtime_error("cannot open " + dir + "/bench.json");
  json manifest = json::parse(in);

  for (const json& entry : manifest) {
    std::string file = entry.at("file").get<std::string>();
    std::string stem = file_stem(file);
    std::ifstream src_in(dir + "/" + file);
    if (!src_in) throw std::runtime_error("cannot open " + dir + "/" + file);
    std::stringstream ss;
    ss << src_in.rdbuf();
    std::string source = ss.str();

    for (const json& input : entry.at("inputs")) {
      std::string call = "(" + stem;
      std::string shown;
      for (const json& a : input) {
        std::string text = a.is_string() ? "'" + a.get<std::string>() : a.dump();
        call += " " + text;
        if (!shown.empty()) shown += " ";
        shown += text;
      }
      call += ")";
      program prog = read_program(source + "\n" + call + "\n", stem);
      if (prog.mains.empty()) continue;
      prog.mains.erase(prog.mains.begin(), prog.mains.end() - 1);

      auto timed = [&](const run_options& opts) {
        auto t0 = std::chrono::steady_clock::now();
        run_result r = run(prog, opts);
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return std::pair<run_result, double>(std::move(r), ms);
      };

      run_options std_opts;
      std_opts.max_steps = ceiling;
      auto [std_res, std_ms] = timed(std_opts);
      if (std_res.kind == outcome_kind::ceiling) {
        report.warnings.push_back(stem + " " + shown +
                                  ": excluded, did not finish under the step ceiling");
        continue;
      }
      if (std_res.kind != outcome_kind::done) {
        report.warnings.push_back(stem + " " + shown + ": excluded, " +
                                  std::string(result_name(std_res.kind)) +
                                  " under the standard interpreter");
        continue;
      }

      std::vector<bench_row> rows;
      bench_row base{stem, shown, "standard", std_res.stats, std_ms, 1.0};
      double std_cost = static_cast<double>(std_res.stats.cost());
      bool excluded = false;
      for (const check_policy& pol : policies) {
        run_options mon_opts;
        mon_opts.monitor_all = true;
        mon_opts.policy = pol;
        mon_opts.max_steps = ceiling;
        auto [mon_res, mon_ms] = timed(mon_opts);
        std::string pol_name = pol.kind == policy_kind::always ? "always"
                               : pol.kind == policy_kind::off
                                   ? "off"
                                   : "backoff:" + std::to_string(pol.base);
        if (mon_res.kind == outcome_kind::sc_error) {
          report.warnings.push_back(stem + " " + shown + ": excluded, monitor (" +
                                    pol_name + ") rejected a terminating run, blame " +
                                    mon_res.violation->blame);
          excluded = true;
          break;
        }
        if (mon_res.kind != outcome_kind::done ||
            mon_res.values.size() != std_res.values.size() ||
            !value_equal(mon_res.values.back(), std_res.values.back())) {
          report.warnings.push_back(stem + " " + shown + ": excluded, monitored run (" +
                                    pol_name + ") disagreed with the standard answer");
          excluded = true;
          break;
        }
        double ratio = std_cost > 0.0
                           ? static_cast<double>(mon_res.stats.cost()) / std_cost
                           : 1.0;
        rows.push_back({stem, shown, pol_name, mon_res.stats, mon_ms, ratio});
      }
      if (excluded) continue;
      report.rows.push_back(std::move(base));
      for (bench_row& r : rows) report.rows.push_back(std::move(r));
    }
  }
  return report;
}

int cmd_bench(const std::string& dir, const std::vector<std::string>& policies,
              const std::string& csv_path, const std::string& json_path,
              std::ostream& out, std::ostream& err) {
  std::vector<check_policy> parsed;
  try {
    for (const std::string& p : policies) parsed.push_back(parse_policy(p));
    if (parsed.empty()) {
      parsed.push_back({policy_kind::always, 1});
      parsed.push_back({policy_kind::backoff, 1});
    }
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return exit_io;
  }

  bench_report report;
  try {
    report = run_bench(dir, parsed);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return exit_io;
  }

  out << "program            input                 policy      steps      checks  cost"
         "        ratio\n";
  for (const bench_row& r : report.rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-18s %-21s %-11s %-10llu %-7llu %-11llu %.2f",
                  r.program.c_str(), r.input.c_str(), r.policy.c_str(),
                  static_cast<unsigned long long>(r.stats.machine_steps),
                  static_cast<unsigned long long>(r.stats.prog_checks),
                  static_cast<unsigned long long>(r.stats.cost()), r.ratio);
    out << line << "\n";
  }
  for (const std::string& w : report.warnings) err << "warning: " << w << "\n";

  json rows = json::array();
  for (const bench_row& r : report.rows) {
    json jr = {{"program", r.program}, {"input", r.input},   {"policy", r.policy},
               {"wall_ms", r.wall_ms}, {"ratio", r.ratio},   {"stats", stats_to_json(r.stats)}};
    rows.push_back(std::move(jr));
  }
  json jreport = {{"rows", rows}, {"warnings", report.warnings}};
  if (!json_path.empty()) {
    std::ofstream jf(json_path);
    if (!jf) {
      err << "cannot write " << json_path << "\n";
      return exit_io;
    }
    jf << jreport.dump(2) << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream cf(csv_path);
    if (!cf) {
      err << "cannot write " << csv_path << "\n";
      return exit_io;
    }
    cf << "program,input,policy,steps,order_compares,compositions,desc_checks,"
          "prog_checks,cost,wall_ms,ratio\n";
    for (const bench_row& r : report.rows) {
      cf << r.program << ",\"" << r.input << "\"," << r.policy << ','
         << r.stats.machine_steps << ',' << r.stats.order_compares << ','
         << r.stats.compositions << ',' << r.stats.desc_checks << ','
         << r.stats.prog_checks << ',' << r.stats.cost() << ',' << r.wall_ms << ','
         << r.ratio << "\n";
    }
  }
  return exit_ok;
}

int sct_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"size-change termination toolkit"};
  app.require_subcommand(1);

  std::string file;
  run_config cfg;
  std::string policy_text = "always";
  auto* run_cmd = app.add_subcommand("run", "evaluate a program");
  run_cmd->add_option("file", file, "source file")->required();
  run_cmd->add_option("--mode", cfg.mode,
                      "standard | monitor | monitor-whole | trace");
  run_cmd->add_option("--policy", policy_text, "always | backoff:<base> | off");
  run_cmd->add_option("--max-steps", cfg.max_steps, "step ceiling (0: none)");
  run_cmd->add_flag("--json", cfg.json, "machine-readable output");
  run_cmd->add_flag("--counters", cfg.counters, "print instrumentation counters");

  std::string entry;
  int fuel = 0;
  bool vjson = false;
  auto* verify_cmd = app.add_subcommand("verify", "decide size-change termination");
  verify_cmd->add_option("file", file, "source file")->required();
  verify_cmd->add_option("--entry", entry, "entry function (default: file stem)");
  verify_cmd->add_option("--fuel", fuel, "unfoldings per closure identity");
  verify_cmd->add_flag("--json", vjson, "machine-readable output");

  std::uint64_t trace_steps = 0;
  bool tjson = false;
  auto* trace_cmd = app.add_subcommand("trace", "record call graphs without enforcing");
  trace_cmd->add_option("file", file, "source file")->required();
  trace_cmd->add_option("--max-steps", trace_steps, "step ceiling (default 1000000)");
  trace_cmd->add_flag("--json", tjson, "machine-readable output");

  std::string dir;
  std::vector<std::string> policies;
  std::string csv_path, json_path;
  auto* bench_cmd = app.add_subcommand("bench", "measure monitoring overhead");
  bench_cmd->add_option("dir", dir, "directory holding bench.json")->required();
  bench_cmd->add_option("--policy", policies, "policies to measure (repeatable)");
  bench_cmd->add_option("--csv", csv_path, "write per-run rows as CSV");
  bench_cmd->add_option("--json-out", json_path, "write the full report as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::stringstream so, se;
    int code = app.exit(e, so, se);
    out << so.str();
    err << se.str();
    return code == 0 ? exit_ok : exit_io;
  }

  try {
    if (*run_cmd) {
      cfg.policy = parse_policy(policy_text);
      return cmd_run(file, cfg, out, err);
    }
    if (*verify_cmd) return cmd_verify(file, entry, fuel, vjson, out, err);
    if (*trace_cmd) return cmd_trace(file, trace_steps, tjson, out, err);
    return cmd_bench(dir, policies, csv_path, json_path, out, err);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return exit_io;
  }
}

}  // namespace sct
