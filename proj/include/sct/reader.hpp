#pragma once

#include <stdexcept>
#include <string>

#include <sct/value.hpp>

namespace sct {

struct read_error : std::runtime_error {
  int line;
  read_error(const std::string& msg, int line_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

// Parses a whole source text into a program. `stem` names the source (used
// in lambda labels and default contract tags, e.g. "ack:12"). Surface syntax:
//
//   toplevel := (define name expr) | (define (name param...) expr)
//             | (assume (name (sort param)...))       sort in {natural, integer, list, any}
//             | expr
//   expr     := integer | #\char | 'datum | empty | name
//             | (lambda (param...) expr) | (λ (param...) expr)
//             | (if0 e e e) | (if e e e) | (and e...) | (or e...) | (not e)
//             | (cond [e e]... [else e]?) | (let ([name e]...) expr)
//             | (terminating/c e) | (terminating/c e "tag")
//             | (e e...)
//
// Truth is integer zero: if0/if take the first branch exactly when the test
// is 0, and the comparison primitives return 0 for yes, 1 for no. Characters
// read as their code points; quoted symbols intern to distinct negative
// integers. Strings appear only as contract tags.
program read_program(const std::string& source, const std::string& stem);

program read_file(const std::string& path);

}  // namespace sct
