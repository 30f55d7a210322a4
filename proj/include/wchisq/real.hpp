#ifndef WCHISQ_REAL_HPP
#define WCHISQ_REAL_HPP

#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/float128.hpp>

namespace wchisq {

// Partial-fraction coefficients for high pole orders reach 1e20..1e30 while
// summing to 1, so expansions are carried in a wider type than double.
// Inputs and outputs stay double.

/// IEEE binary128 (113-bit significand). The default working type.
using wide_real = boost::multiprecision::float128;

/// 256-bit significand, fixed width. Used when an expansion cancels more
/// than binary128 can resolve.
using extended_real = boost::multiprecision::number<
    boost::multiprecision::backends::cpp_bin_float<256, boost::multiprecision::backends::digit_base_2>,
    boost::multiprecision::et_off>;

template <typename Real>
inline double to_double(const Real& v) {
  return static_cast<double>(v);
}

template <typename Real>
inline double epsilon_of() {
  return static_cast<double>(std::numeric_limits<Real>::epsilon());
}

}  // namespace wchisq

#endif  // WCHISQ_REAL_HPP
