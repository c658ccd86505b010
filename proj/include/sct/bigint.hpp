#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace sct {

// All language integers are arbitrary precision: the termination order compares
// magnitudes, and a silent wrap-around would corrupt descent checks.
using bigint = boost::multiprecision::cpp_int;

inline bigint big_abs(const bigint& n) { return n < 0 ? bigint(-n) : n; }

}  // namespace sct
