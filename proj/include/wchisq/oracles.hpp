#ifndef WCHISQ_ORACLES_HPP
#define WCHISQ_ORACLES_HPP

/*
 * Reference estimators for the distribution function that share nothing with
 * the partial-fraction route:
 *
 *   monte_carlo_cdf   simulates the weighted sum term by term,
 *   cf_inversion_cdf  integrates the Gil-Pelaez formula
 *                       F(x) = 1/2 - (1/pi) int_0^inf Im[phi(u) e^{-iux}] / u du.
 *
 * Random numbers come from SplitMix64 (Steele, Lea & Flood 2014): state
 * advances by 0x9e3779b97f4a7c15, output is the stafford-13 mix. Uniforms
 * take the top 53 bits, normals use the Marsaglia polar method (the second
 * variate of each accepted pair is discarded), and gamma variates use
 * Marsaglia-Tsang (2000).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wchisq/error.hpp"
#include "wchisq/model.hpp"

namespace wchisq {

inline constexpr const char* kRngName = "splitmix64";

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline double standard_normal(SplitMix64& rng) {
  for (;;) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// Gamma(shape, scale 1) variate, shape >= 1.
inline double gamma_variate(double shape, SplitMix64& rng) {
  if (!(shape >= 1.0)) throw std::domain_error("gamma_variate: shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = standard_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double chi_squared_variate(int dof, SplitMix64& rng) { return 2.0 * gamma_variate(0.5 * dof, rng); }

/// One draw of sum_j w_j chi2(n_j), terms sampled in spec order.
inline double weighted_sum_variate(const WeightedSumSpec& spec, SplitMix64& rng) {
  double s = 0.0;
  for (const Term& t : spec.terms()) s += t.weight * chi_squared_variate(t.dof, rng);
  return s;
}

enum class OracleMethod { monte_carlo, cf_inversion };

inline const char* to_string(OracleMethod m) {
  return m == OracleMethod::monte_carlo ? "monte_carlo" : "cf_inversion";
}

struct OracleEstimate {
  double value = 0.0;
  /// binomial standard error (Monte Carlo) or truncation + quadrature bound (inversion)
  double error_bound = 0.0;
  OracleMethod method = OracleMethod::monte_carlo;
};

/// Empirical P(X <= x) for every x from one shared stream of `samples` draws.
/// Entry i equals monte_carlo_cdf(spec, xs[i], samples, seed).
inline std::vector<OracleEstimate> monte_carlo_cdf(const WeightedSumSpec& spec, std::span<const double> xs,
                                                   std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("monte_carlo_cdf: samples must be positive");
  SplitMix64 rng(seed);
  std::vector<std::uint64_t> hits(xs.size(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double draw = weighted_sum_variate(spec, rng);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (draw <= xs[i]) ++hits[i];
  }
  std::vector<OracleEstimate> out;
  out.reserve(xs.size());
  const double n = static_cast<double>(samples);
  for (std::uint64_t h : hits) {
    const double p = static_cast<double>(h) / n;
    out.push_back({p, std::sqrt(p * (1.0 - p) / n), OracleMethod::monte_carlo});
  }
  return out;
}

inline OracleEstimate monte_carlo_cdf(const WeightedSumSpec& spec, double x, std::uint64_t samples,
                                      std::uint64_t seed) {
  const double xs[1] = {x};
  return monte_carlo_cdf(spec, xs, samples, seed).front();
}

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr int kMaxBisectionDepth = 40;
inline constexpr std::uint64_t kMaxInversionPanels = 50'000'000;

struct PanelResult {
  double integral = 0.0;
  double error = 0.0;
};

template <typename F>
PanelResult kronrod15(const F& f, double a, double b, double& abs_integral) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double absk = std::abs(fc) * kKronrodWeights[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(mid - dx);
    const double f2 = f(mid + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    absk += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  abs_integral = absk * std::abs(half);
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <typename F>
PanelResult adaptive_kronrod(const F& f, double a, double b, double tol, int depth) {
  double abs_integral = 0.0;
  const PanelResult r = kronrod15(f, a, b, abs_integral);
  // accept at the roundoff floor as well as at tolerance
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * abs_integral;
  if (r.error <= std::max(tol, floor)) return r;
  if (depth >= kMaxBisectionDepth) {
    throw convergence_error("cf_inversion_cdf: panel [" + std::to_string(a) + ", " + std::to_string(b) +
                            "] did not converge");
  }
  const double m = 0.5 * (a + b);
  const PanelResult left = adaptive_kronrod(f, a, m, 0.5 * tol, depth + 1);
  const PanelResult right = adaptive_kronrod(f, m, b, 0.5 * tol, depth + 1);
  return {left.integral + right.integral, left.error + right.error};
}

}  // namespace detail

/// Gil-Pelaez inversion of the characteristic function.
///
/// The range is cut at U where the analytic tail bound
///   int_U^inf |phi(u)| / u du / pi <= prod_j (2|w_j|)^(-n_j/2) U^(-N) / (pi N),  N = sum n_j / 2
/// equals abs_tol / 2. [0, U] is tiled with panels no wider than half a
/// period of the local phase rate |x| + sum n_j |w_j| / (1 + 4 w_j^2 u^2),
/// each refined by Gauss-Kronrod bisection against its share of abs_tol / 2.
inline OracleEstimate cf_inversion_cdf(const WeightedSumSpec& spec, double x, double abs_tol = 1e-8) {
  if (!(abs_tol >= 1e-10)) throw std::invalid_argument("cf_inversion_cdf: abs_tol must be >= 1e-10");
  if (!std::isfinite(x)) throw std::domain_error("cf_inversion_cdf: x must be finite");
  const double pi = std::numbers::pi;
  const double mean = mean_variance(spec).mean;

  double log_c = 0.0;
  double order = 0.0;
  double max_weight = 0.0;
  for (const Term& t : spec.terms()) {
    log_c -= 0.5 * t.dof * std::log(2.0 * std::abs(t.weight));
    order += 0.5 * t.dof;
    max_weight = std::max(max_weight, std::abs(t.weight));
  }
  const double tail_budget = 0.5 * abs_tol;
  const double upper = std::exp((log_c - std::log(pi * order * tail_budget)) / order);
  const double truncation = std::exp(log_c - order * std::log(upper)) / (pi * order);

  auto integrand = [&](double u) {
    if (u < 1e-8) return mean - x;
    const std::complex<double> v = characteristic_function(spec, u) * std::polar(1.0, -u * x);
    return v.imag() / u;
  };
  auto phase_rate = [&](double u) {
    double w = std::abs(x);
    for (const Term& t : spec.terms()) w += t.dof * std::abs(t.weight) / (1.0 + 4.0 * t.weight * t.weight * u * u);
    return w;
  };

  // error in F is the integral's error divided by pi
  const double quad_budget = pi * tail_budget;
  const double min_width = 1.0 / (2.0 * max_weight);
  double integral = 0.0;
  double quad_error = 0.0;
  std::uint64_t panels = 0;
  for (double a = 0.0; a < upper;) {
    if (++panels > detail::kMaxInversionPanels) {
      throw convergence_error("cf_inversion_cdf: integration range needs more than 5e7 panels; loosen abs_tol");
    }
    const double width = std::min(pi / phase_rate(a), std::max(a, min_width));
    const double b = std::min(upper, a + width);
    const auto r = detail::adaptive_kronrod(integrand, a, b, quad_budget * (b - a) / upper, 0);
    integral += r.integral;
    quad_error += r.error;
    a = b;
  }
  return {0.5 - integral / pi, truncation + quad_error / pi, OracleMethod::cf_inversion};
}

}  // namespace wchisq

#endif  // WCHISQ_ORACLES_HPP
