#ifndef WCHISQ_ERROR_HPP
#define WCHISQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wchisq {

/// A weighted-sum specification violated its construction invariants.
class invalid_spec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative evaluation hit its iteration or subdivision cap.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wchisq

#endif  // WCHISQ_ERROR_HPP
