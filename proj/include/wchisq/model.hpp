#ifndef WCHISQ_MODEL_HPP
#define WCHISQ_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wchisq/error.hpp"

namespace wchisq {

/// One weighted chi-squared variate: weight * chi2(dof).
struct Term {
  double weight = 1.0;
  int dof = 2;

  friend bool operator==(const Term&, const Term&) = default;
};

/// X = sum_j weight_j * chi2(dof_j) over independent variates.
///
/// Terms are validated on construction and stored as given; coincident
/// weights are not merged here (see merge_weights).
class WeightedSumSpec {
 public:
  explicit WeightedSumSpec(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw invalid_spec("weighted sum needs at least one term");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const Term& t = terms_[i];
      const std::string where = "term " + std::to_string(i) + ": ";
      if (!std::isfinite(t.weight) || t.weight == 0.0) {
        throw invalid_spec(where + "weight must be finite and nonzero");
      }
      if (t.dof < 2 || t.dof % 2 != 0) {
        throw invalid_spec(where + "dof must be an even integer >= 2");
      }
    }
  }

  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  const Term& operator[](std::size_t i) const { return terms_[i]; }

  int total_dof() const {
    int n = 0;
    for (const Term& t : terms_) n += t.dof;
    return n;
  }

  bool has_common_dof() const {
    for (const Term& t : terms_) {
      if (t.dof != terms_.front().dof) return false;
    }
    return true;
  }

  friend bool operator==(const WeightedSumSpec&, const WeightedSumSpec&) = default;

 private:
  std::vector<Term> terms_;
};

/// Open interval of t on which every factor 1 - 2 weight t is positive.
struct MgfDomain {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return t > lower && t < upper; }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const { return std::sqrt(variance); }
};

inline MgfDomain mgf_domain(const WeightedSumSpec& spec) {
  MgfDomain d;
  for (const Term& t : spec.terms()) {
    const double pole = 1.0 / (2.0 * t.weight);
    if (t.weight > 0) {
      d.upper = std::min(d.upper, pole);
    } else {
      d.lower = std::max(d.lower, pole);
    }
  }
  return d;
}

/// prod_j (1 - 2 weight_j t)^(-dof_j / 2), accumulated as a sum of logs.
inline double mgf(const WeightedSumSpec& spec, double t) {
  if (!mgf_domain(spec).contains(t)) {
    throw std::domain_error("mgf: t = " + std::to_string(t) + " lies outside the MGF domain");
  }
  double log_m = 0.0;
  for (const Term& term : spec.terms()) {
    log_m -= 0.5 * term.dof * std::log1p(-2.0 * term.weight * t);
  }
  return std::exp(log_m);
}

/// phi(u) = prod_j (1 - 2i weight_j u)^(-dof_j / 2). Exponents are integers,
/// so summing principal logs before exponentiating gives the principal power.
inline std::complex<double> characteristic_function(const WeightedSumSpec& spec, double u) {
  if (!std::isfinite(u)) throw std::domain_error("characteristic_function: u must be finite");
  std::complex<double> log_phi{0.0, 0.0};
  for (const Term& term : spec.terms()) {
    log_phi -= 0.5 * term.dof * std::log(std::complex<double>(1.0, -2.0 * term.weight * u));
  }
  return std::exp(log_phi);
}

inline Moments mean_variance(const WeightedSumSpec& spec) {
  Moments m;
  for (const Term& t : spec.terms()) {
    m.mean += t.dof * t.weight;
    m.variance += 2.0 * t.dof * t.weight * t.weight;
  }
  return m;
}

}  // namespace wchisq

#endif  // WCHISQ_MODEL_HPP
