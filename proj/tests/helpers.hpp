#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <sct/interp.hpp>
#include <sct/reader.hpp>

#ifndef SCT_CORPUS_DIR
#define SCT_CORPUS_DIR "corpus"
#endif

namespace sct::testing {

inline std::string corpus_path(const std::string& name) {
  return std::string(SCT_CORPUS_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline program read_corpus(const std::string& name) {
  return read_file(corpus_path(name));
}

inline run_result run_standard(const std::string& name, std::uint64_t max_steps = 0) {
  run_options o;
  o.max_steps = max_steps;
  return run(read_corpus(name), o);
}

inline run_result run_monitored(const std::string& name, std::uint64_t max_steps = 0,
                                check_policy policy = {}) {
  run_options o;
  o.monitor_all = true;
  o.policy = policy;
  o.max_steps = max_steps;
  return run(read_corpus(name), o);
}

inline std::string printed_values(const run_result& r) {
  std::string out;
  for (const value& v : r.values) {
    out += print_value(v);
    out += "\n";
  }
  return out;
}

}  // namespace sct::testing
