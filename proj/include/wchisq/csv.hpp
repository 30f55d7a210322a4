#ifndef WCHISQ_CSV_HPP
#define WCHISQ_CSV_HPP

#include <cstdio>
#include <string>

namespace wchisq {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace wchisq

#endif  // WCHISQ_CSV_HPP
