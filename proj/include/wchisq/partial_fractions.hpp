#ifndef WCHISQ_PARTIAL_FRACTIONS_HPP
#define WCHISQ_PARTIAL_FRACTIONS_HPP

/*
 * Partial-fraction expansion of the product MGF
 *
 *   M(t) = prod_k (1 - 2 w_k t)^(-m_k),   m_k = (sum of dof merged into k) / 2
 *
 * into sum_k sum_{i=1..m_k} c_{k,i} (1 - 2 w_k t)^(-(m_k - i + 1)).
 *
 * Three independent routes produce the coefficients:
 *   - coefficients_two_term: closed form for two poles of common order,
 *   - coefficients_three_term: binomial-sum closed form for three poles,
 *   - coefficients_general: Taylor expansion of the pole-free cofactor at each
 *     pole, built from its log-derivatives, for any number of poles and
 *     unequal orders.
 *
 * Coefficients alternate in sign and grow like |1 - w_j/w_k|^-(m_k + i - 1),
 * so the closed forms assemble every factor as (sign, log|.|) and the whole
 * expansion is held in Real (binary128 by default). decompose_adaptive moves
 * to 256 bits when sum |c| is too large for binary128 to resolve the
 * cancellation.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wchisq/model.hpp"
#include "wchisq/real.hpp"
#include "wchisq/special_functions.hpp"

namespace wchisq {

inline constexpr double kDefaultMergeTolerance = 1e-9;
inline constexpr double kIllConditionedSeparation = 1e-3;
// sum |c| * eps above which an expansion is flagged, and above which
// decompose_adaptive abandons binary128.
inline constexpr double kCancellationLimit = 1e-12;
inline constexpr double kEscalationLimit = 1e-19;

template <typename Real>
struct PoleGroup {
  double weight = 0.0;
  int order = 0;
  /// coeffs[i - 1] multiplies (1 - 2 weight t)^-(order - i + 1), i = 1..order.
  std::vector<Real> coeffs;

  int exponent(int index) const { return order - index + 1; }
};

template <typename Real = wide_real>
struct PartialFractionExpansion {
  using value_type = Real;

  std::vector<PoleGroup<Real>> groups;
  /// min over ordered pairs of |1 - w_i / w_j|; +inf for a single group.
  double min_separation = std::numeric_limits<double>::infinity();
  /// sum |c| as a double: the factor by which rounding errors are amplified.
  double cancellation = 1.0;
  /// min_separation below 1e-3, or cancellation * eps(Real) above 1e-12.
  bool ill_conditioned = false;

  Real coefficient_sum() const {
    Real s = 0;
    for (const auto& g : groups)
      for (const Real& c : g.coeffs) s += c;
    return s;
  }

  /// sum |c|: the cancellation factor any evaluation of the expansion pays.
  Real absolute_sum() const {
    using std::abs;
    Real s = 0;
    for (const auto& g : groups)
      for (const Real& c : g.coeffs) s += abs(c);
    return s;
  }

  MgfDomain domain() const {
    MgfDomain d;
    for (const auto& g : groups) {
      const double pole = 1.0 / (2.0 * g.weight);
      if (g.weight > 0) {
        d.upper = std::min(d.upper, pole);
      } else {
        d.lower = std::max(d.lower, pole);
      }
    }
    return d;
  }
};

namespace detail {

// sign * exp(log_abs); sign == 0 encodes an exact zero.
template <typename Real>
struct SignedLog {
  int sign = 1;
  Real log_abs = 0;

  static SignedLog of(const Real& v) {
    using std::abs;
    using std::log;
    if (v == 0) return {0, Real(0)};
    return {v < 0 ? -1 : 1, log(abs(v))};
  }

  SignedLog& operator*=(const SignedLog& o) {
    sign *= o.sign;
    log_abs += o.log_abs;
    return *this;
  }

  friend SignedLog operator*(SignedLog a, const SignedLog& b) { return a *= b; }

  SignedLog pow(int k) const {
    if (sign == 0) return k == 0 ? SignedLog{1, Real(0)} : SignedLog{0, Real(0)};
    return {(k % 2 != 0) ? sign : 1, log_abs * Real(k)};
  }

  Real value() const {
    using std::exp;
    return sign == 0 ? Real(0) : Real(sign) * exp(log_abs);
  }
};

// sum of signed-log terms, scaled by the largest magnitude before exponentiating
template <typename Real>
SignedLog<Real> signed_log_sum(const std::vector<SignedLog<Real>>& terms) {
  using std::exp;
  Real peak = -std::numeric_limits<Real>::infinity();
  for (const auto& t : terms)
    if (t.sign != 0) peak = std::max(peak, t.log_abs);
  if (peak == -std::numeric_limits<Real>::infinity()) return {0, Real(0)};
  Real acc = 0;
  for (const auto& t : terms)
    if (t.sign != 0) acc += Real(t.sign) * exp(t.log_abs - peak);
  auto out = SignedLog<Real>::of(acc);
  out.log_abs += peak;
  return out;
}

// prod_{j=1..count} (-m - j + 1) = (-1)^count Gamma(m + count) / Gamma(m)
template <typename Real>
SignedLog<Real> falling_negative_product(int m, int count) {
  if (count == 0) return {1, Real(0)};
  return {(count % 2 != 0) ? -1 : 1, ln_gamma(Real(m + count)) - ln_gamma(Real(m))};
}

template <typename Real>
SignedLog<Real> inverse_factorial(int k) {
  return {1, -ln_gamma(Real(k + 1))};
}

template <typename Real>
SignedLog<Real> binomial(int n, int k) {
  return {1, ln_gamma(Real(n + 1)) - ln_gamma(Real(k + 1)) - ln_gamma(Real(n - k + 1))};
}

template <typename Real>
SignedLog<Real> ratio(double num, double den) {
  return SignedLog<Real>::of(Real(num) / Real(den));
}

// 1 - other / self
template <typename Real>
SignedLog<Real> one_minus_ratio(double other, double self) {
  return SignedLog<Real>::of(Real(1) - Real(other) / Real(self));
}

inline bool weights_coincide(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

inline double min_pair_separation(const std::vector<double>& weights) {
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i)
    for (std::size_t j = 0; j < weights.size(); ++j)
      if (i != j) sep = std::min(sep, std::abs(1.0 - weights[i] / weights[j]));
  return sep;
}

template <typename Real>
void finalize(PartialFractionExpansion<Real>& e) {
  using std::isfinite;
  std::vector<double> weights;
  for (const auto& g : e.groups) {
    weights.push_back(g.weight);
    for (const Real& c : g.coeffs) {
      if (!isfinite(c)) {
        throw std::overflow_error("partial-fraction coefficient at weight " + std::to_string(g.weight) +
                                  " exceeds the representable range");
      }
    }
  }
  e.min_separation = min_pair_separation(weights);
  e.cancellation = to_double(e.absolute_sum());
  e.ill_conditioned = e.min_separation < kIllConditionedSeparation ||
                      e.cancellation * epsilon_of<Real>() > kCancellationLimit;
}

inline void require_distinct(const WeightedSumSpec& spec, const char* who) {
  for (std::size_t i = 0; i < spec.size(); ++i)
    for (std::size_t j = i + 1; j < spec.size(); ++j)
      if (weights_coincide(spec[i].weight, spec[j].weight, kDefaultMergeTolerance)) {
        throw std::invalid_argument(std::string(who) + ": weights " + std::to_string(i) + " and " +
                                    std::to_string(j) + " coincide; merge them first");
      }
}

inline void require_closed_form_shape(const WeightedSumSpec& spec, std::size_t count, const char* who) {
  if (spec.size() != count) {
    throw std::invalid_argument(std::string(who) + ": expected exactly " + std::to_string(count) + " terms");
  }
  if (!spec.has_common_dof()) throw std::invalid_argument(std::string(who) + ": terms must share one dof");
  require_distinct(spec, who);
}

}  // namespace detail

/// Coalesce terms whose weights agree within rel_tol (relative), summing their
/// dof. The first term seen keeps its weight as the group representative.
inline WeightedSumSpec merge_weights(const WeightedSumSpec& spec, double rel_tol = kDefaultMergeTolerance) {
  std::vector<Term> merged;
  for (const Term& t : spec.terms()) {
    auto hit = std::find_if(merged.begin(), merged.end(), [&](const Term& m) {
      return detail::weights_coincide(m.weight, t.weight, rel_tol);
    });
    if (hit != merged.end()) {
      hit->dof += t.dof;
    } else {
      merged.push_back(t);
    }
  }
  return WeightedSumSpec(std::move(merged));
}

/// Closed-form coefficients for two poles of common order m = n/2:
///   A_i = (w1/w2)^(1-i) / (i-1)! * prod_{j=1}^{i-1} (-m-j+1) * (1 - w2/w1)^(-m-i+1)
/// and B_i with the roles of w1 and w2 swapped.
template <typename Real = wide_real>
PartialFractionExpansion<Real> coefficients_two_term(const WeightedSumSpec& spec) {
  using SL = detail::SignedLog<Real>;
  detail::require_closed_form_shape(spec, 2, "coefficients_two_term");
  const int m = spec[0].dof / 2;

  auto coefficient = [&](double self, double other, int i) {
    SL c = detail::ratio<Real>(self, other).pow(1 - i);
    c *= detail::inverse_factorial<Real>(i - 1);
    c *= detail::falling_negative_product<Real>(m, i - 1);
    c *= detail::one_minus_ratio<Real>(other, self).pow(-m - i + 1);
    return c.value();
  };

  PartialFractionExpansion<Real> e;
  for (int k = 0; k < 2; ++k) {
    const double self = spec[k].weight;
    const double other = spec[1 - k].weight;
    PoleGroup<Real> g{self, m, {}};
    for (int i = 1; i <= m; ++i) g.coeffs.push_back(coefficient(self, other, i));
    e.groups.push_back(std::move(g));
  }
  detail::finalize(e);
  return e;
}

/// Closed-form coefficients for three poles of common order m = n/2, from
/// the general Leibniz rule applied to the two remaining factors:
///   A_i = (w1/w2)^(1-i) / (i-1)! * sum_{k=0}^{i-1} C(i-1,k)
///           * prod_{j=1}^{i-1-k} (-m-j+1) * (1 - w2/w1)^(-m-(i-1-k))
///           * prod_{j=1}^{k} (-m-j+1)     * (1 - w3/w1)^(-m-k) * (w3/w2)^k
/// with B_i (pole w2; others w1, w3) and C_i (pole w3; others w1, w2) alike.
template <typename Real = wide_real>
PartialFractionExpansion<Real> coefficients_three_term(const WeightedSumSpec& spec) {
  using SL = detail::SignedLog<Real>;
  detail::require_closed_form_shape(spec, 3, "coefficients_three_term");
  const int m = spec[0].dof / 2;

  auto coefficient = [&](double self, double first, double second, int i) {
    SL prefix = detail::ratio<Real>(self, first).pow(1 - i);
    prefix *= detail::inverse_factorial<Real>(i - 1);
    const SL gap_first = detail::one_minus_ratio<Real>(first, self);
    const SL gap_second = detail::one_minus_ratio<Real>(second, self);
    const SL cross = detail::ratio<Real>(second, first);
    std::vector<SL> terms;
    for (int k = 0; k <= i - 1; ++k) {
      SL t = detail::binomial<Real>(i - 1, k);
      t *= detail::falling_negative_product<Real>(m, i - 1 - k);
      t *= gap_first.pow(-m - (i - 1 - k));
      t *= detail::falling_negative_product<Real>(m, k);
      t *= gap_second.pow(-m - k);
      t *= cross.pow(k);
      terms.push_back(t);
    }
    return (prefix * detail::signed_log_sum(terms)).value();
  };

  const double w1 = spec[0].weight, w2 = spec[1].weight, w3 = spec[2].weight;
  const double others[3][2] = {{w2, w3}, {w1, w3}, {w1, w2}};
  PartialFractionExpansion<Real> e;
  for (int k = 0; k < 3; ++k) {
    PoleGroup<Real> g{spec[k].weight, m, {}};
    for (int i = 1; i <= m; ++i) g.coeffs.push_back(coefficient(spec[k].weight, others[k][0], others[k][1], i));
    e.groups.push_back(std::move(g));
  }
  detail::finalize(e);
  return e;
}

/// Residue coefficients for any merged spec (pairwise distinct weights).
///
/// For pole k the cofactor g(t) = prod_{j != k} (1 - 2 w_j t)^(-m_j) is
/// expanded at t_k = 1/(2 w_k) in the variable s = 1 - 2 w_k t, so that
/// c_{k,i} = (-2 w_k)^(1-i) g^(i-1)(t_k) / (i-1)! is its s^(i-1) Taylor
/// coefficient. With r_j = w_j / w_k and q_j = r_j / (1 - r_j):
///   ln g = sum_j -m_j ln(1 - r_j) + sum_{p>=1} l_p s^p,  l_p = sum_j m_j (-q_j)^p / p
/// which is the log-derivative array (ln g)^(p)(t_k) in the same scaling, and
/// g = exp(ln g) follows from the Leibniz convolution
///   e_0 = 1,  e_p = (1/p) sum_{s=1}^{p} s l_s e_{p-s}.
template <typename Real = wide_real>
PartialFractionExpansion<Real> coefficients_general(const WeightedSumSpec& spec) {
  using SL = detail::SignedLog<Real>;
  detail::require_distinct(spec, "coefficients_general");

  PartialFractionExpansion<Real> e;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double self = spec[k].weight;
    const int order = spec[k].dof / 2;

    SL leading{1, Real(0)};
    std::vector<Real> log_coeffs(order, Real(0));  // l_p, p = 0..order-1 (l_0 unused)
    for (std::size_t j = 0; j < spec.size(); ++j) {
      if (j == k) continue;
      const int mj = spec[j].dof / 2;
      const Real r = Real(spec[j].weight) / Real(self);
      leading *= SL::of(Real(1) - r).pow(-mj);
      const Real neg_q = -r / (Real(1) - r);
      Real power = 1;
      for (int p = 1; p < order; ++p) {
        power *= neg_q;
        log_coeffs[p] += Real(mj) * power / Real(p);
      }
    }

    std::vector<Real> series(order, Real(0));
    series[0] = 1;
    for (int p = 1; p < order; ++p) {
      Real acc = 0;
      for (int s = 1; s <= p; ++s) acc += Real(s) * log_coeffs[s] * series[p - s];
      series[p] = acc / Real(p);
    }

    const Real scale = leading.value();
    PoleGroup<Real> g{self, order, {}};
    g.coeffs.reserve(order);
    for (int p = 0; p < order; ++p) g.coeffs.push_back(scale * series[p]);
    e.groups.push_back(std::move(g));
  }
  detail::finalize(e);
  return e;
}

/// Merge coincident weights, then run the general residue routine.
template <typename Real = wide_real>
PartialFractionExpansion<Real> decompose(const WeightedSumSpec& spec, double rel_tol = kDefaultMergeTolerance) {
  return coefficients_general<Real>(merge_weights(spec, rel_tol));
}

using AnyExpansion = std::variant<PartialFractionExpansion<wide_real>, PartialFractionExpansion<extended_real>>;

/// decompose in binary128, redone in 256 bits if the result cancels too much.
inline AnyExpansion decompose_adaptive(const WeightedSumSpec& spec, double rel_tol = kDefaultMergeTolerance) {
  const WeightedSumSpec merged = merge_weights(spec, rel_tol);
  auto wide = coefficients_general<wide_real>(merged);
  if (wide.cancellation * epsilon_of<wide_real>() <= kEscalationLimit) return wide;
  return coefficients_general<extended_real>(merged);
}

template <typename Real>
constexpr int precision_bits() {
  return std::numeric_limits<Real>::digits;
}

inline int precision_bits(const AnyExpansion& e) {
  return std::visit([](const auto& x) { return precision_bits<typename std::decay_t<decltype(x)>::value_type>(); }, e);
}

inline bool ill_conditioned(const AnyExpansion& e) {
  return std::visit([](const auto& x) { return x.ill_conditioned; }, e);
}

inline double coefficient_sum(const AnyExpansion& e) {
  return std::visit([](const auto& x) { return to_double(x.coefficient_sum()); }, e);
}

/// sum_k sum_i c_{k,i} (1 - 2 w_k t)^-(order_k - i + 1), evaluated in Real.
template <typename Real>
double reconstruct_mgf(const PartialFractionExpansion<Real>& e, double t) {
  if (!e.domain().contains(t)) {
    throw std::domain_error("reconstruct_mgf: t = " + std::to_string(t) + " lies outside the MGF domain");
  }
  Real total = 0;
  for (const auto& g : e.groups) {
    const Real inv_base = Real(1) / (Real(1) - Real(2) * Real(g.weight) * Real(t));
    // Horner over increasing exponent: c_order * b + c_{order-1} * b^2 + ...
    Real acc = 0;
    for (int i = 1; i <= g.order; ++i) acc = (acc + g.coeffs[i - 1]) * inv_base;
    total += acc;
  }
  return to_double(total);
}

inline double reconstruct_mgf(const AnyExpansion& e, double t) {
  return std::visit([t](const auto& x) { return reconstruct_mgf(x, t); }, e);
}

}  // namespace wchisq

#endif  // WCHISQ_PARTIAL_FRACTIONS_HPP
