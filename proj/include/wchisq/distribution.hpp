#ifndef WCHISQ_DISTRIBUTION_HPP
#define WCHISQ_DISTRIBUTION_HPP

/*
 * Density and distribution function of X = sum_j w_j chi2(n_j).
 *
 * Each partial-fraction term c (1 - 2 w t)^(-a) is the MGF of c times a
 * Gamma(a, scale 2|w|) law, supported on x >= 0 when w > 0 and reflected
 * onto x < 0 when w < 0. Summing the signed components gives
 *
 *   f(x) = sum_{w>0} c g_a(x / s) / s [x >= 0] + sum_{w<0} c g_a(-x / s) / s [x < 0]
 *   F(x) = sum_{w>0} c P(a, x / s) [x > 0]    + sum_{w<0} c (Q(a, -x / s) if x < 0 else 1)
 *
 * where g_a is the unit-scale gamma density and s = 2|w|.
 *
 * BasicDistribution evaluates at a fixed working precision. Distribution
 * picks binary128 or 256 bits from the cancellation of the expansion.
 */

#include <cmath>
#include <optional>
#include <variant>
#include <span>
#include <stdexcept>
#include <vector>

#include "wchisq/model.hpp"
#include "wchisq/partial_fractions.hpp"
#include "wchisq/real.hpp"
#include "wchisq/special_functions.hpp"

namespace wchisq {

template <typename Real = wide_real>
struct GammaComponent {
  int shape = 1;       // order - index + 1
  double scale = 1.0;  // 2 |weight|
  int sign = 1;        // sign of weight: +1 supported on x >= 0, -1 on x < 0
  Real coefficient = 0;
};

/// One component per nonzero coefficient, in group then index order.
template <typename Real>
std::vector<GammaComponent<Real>> components(const PartialFractionExpansion<Real>& e) {
  std::vector<GammaComponent<Real>> out;
  for (const auto& g : e.groups) {
    for (int i = 1; i <= g.order; ++i) {
      const Real& c = g.coeffs[i - 1];
      if (c == 0) continue;
      out.push_back({g.exponent(i), 2.0 * std::abs(g.weight), g.weight > 0 ? 1 : -1, c});
    }
  }
  return out;
}

struct EvaluationTable {
  std::vector<double> xs;
  std::optional<std::vector<double>> pdf;
  std::optional<std::vector<double>> cdf;
};

/// Analytic law of a weighted chi-squared sum, assembled once from its
/// partial-fraction expansion and evaluated pointwise in Real.
template <typename Real = wide_real>
class BasicDistribution {
 public:
  explicit BasicDistribution(const WeightedSumSpec& spec)
      : BasicDistribution(decompose<Real>(spec), mean_variance(spec)) {}

  BasicDistribution(PartialFractionExpansion<Real> expansion, Moments moments)
      : expansion_(std::move(expansion)), moments_(moments) {
    for (const auto& g : expansion_.groups) {
      Block b;
      b.scale = 2.0 * std::abs(g.weight);
      b.sign = g.weight > 0 ? 1 : -1;
      for (int i = g.order; i >= 1; --i) {  // ascending shape
        const int shape = g.exponent(i);
        b.shapes.push_back(shape);
        b.ln_gammas.push_back(ln_gamma(Real(shape)));
        b.coeffs.push_back(g.coeffs[i - 1]);
      }
      blocks_.push_back(std::move(b));
    }
  }

  const PartialFractionExpansion<Real>& expansion() const { return expansion_; }
  bool ill_conditioned() const { return expansion_.ill_conditioned; }
  const Moments& moments() const { return moments_; }

  /// Raw density; may dip below zero by the conditioning error.
  double pdf(double x) const { return to_double(pdf_wide(x)); }

  /// Raw distribution function; not clamped to [0, 1].
  double cdf(double x) const { return to_double(cdf_wide(x)); }

  Real pdf_wide(double x) const {
    using std::exp;
    Real total = 0;
    for (const Block& b : blocks_) {
      const bool on_support = b.sign > 0 ? x >= 0 : x < 0;
      if (!on_support) continue;
      const Real y = Real(std::abs(x)) / Real(b.scale);
      // shapes run 1, 2, ..., order: g_{a+1}(y) = g_a(y) y / a with g_1(y) = e^{-y}
      Real density = exp(-y);
      Real sum = 0;
      for (std::size_t i = 0; i < b.shapes.size(); ++i) {
        const int a = b.shapes[i];
        sum += b.coeffs[i] * density;
        density *= y / Real(a);
      }
      total += sum / Real(b.scale);
    }
    return total;
  }

  Real cdf_wide(double x) const {
    Real total = 0;
    for (const Block& b : blocks_) {
      const Real y = Real(std::abs(x)) / Real(b.scale);
      for (std::size_t i = 0; i < b.shapes.size(); ++i) {
        const Real a = Real(b.shapes[i]);
        const Real& lg = b.ln_gammas[i];
        if (b.sign > 0) {
          if (x > 0) total += b.coeffs[i] * detail::lower_gamma_with(a, y, lg);
        } else {
          total += b.coeffs[i] * (x < 0 ? detail::upper_gamma_with(a, y, lg) : Real(1));
        }
      }
    }
    return total;
  }

 private:
  struct Block {
    double scale = 1.0;
    int sign = 1;
    std::vector<int> shapes;
    std::vector<Real> ln_gammas;
    std::vector<Real> coeffs;
  };

  PartialFractionExpansion<Real> expansion_;
  Moments moments_;
  std::vector<Block> blocks_;
};

/// BasicDistribution at whichever precision decompose_adaptive settled on.
class Distribution {
 public:
  explicit Distribution(const WeightedSumSpec& spec) : Distribution(decompose_adaptive(spec), mean_variance(spec)) {}

  Distribution(const AnyExpansion& expansion, Moments moments)
      : impl_(std::visit(
            [&](const auto& e) -> Impl { return BasicDistribution<typename std::decay_t<decltype(e)>::value_type>(e, moments); },
            expansion)) {}

  double pdf(double x) const {
    return std::visit([x](const auto& d) { return d.pdf(x); }, impl_);
  }

  double cdf(double x) const {
    return std::visit([x](const auto& d) { return d.cdf(x); }, impl_);
  }

  const Moments& moments() const {
    return std::visit([](const auto& d) -> const Moments& { return d.moments(); }, impl_);
  }

  bool ill_conditioned() const {
    return std::visit([](const auto& d) { return d.ill_conditioned(); }, impl_);
  }

  AnyExpansion expansion() const {
    return std::visit([](const auto& d) -> AnyExpansion { return d.expansion(); }, impl_);
  }

  int precision_bits() const { return wchisq::precision_bits(expansion()); }

  template <typename Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), impl_);
  }

 private:
  using Impl = std::variant<BasicDistribution<wide_real>, BasicDistribution<extended_real>>;
  Impl impl_;
};

inline double pdf(const WeightedSumSpec& spec, double x) { return Distribution(spec).pdf(x); }

inline double cdf(const WeightedSumSpec& spec, double x) { return Distribution(spec).cdf(x); }

/// Tabulate pdf and/or cdf on a strictly increasing grid. Points are
/// evaluated independently of each other.
template <typename Dist>
EvaluationTable evaluate_grid(const Dist& dist, std::span<const double> xs, bool want_pdf,
                              bool want_cdf) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw std::invalid_argument("evaluate_grid: grid values must be finite");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw std::invalid_argument("evaluate_grid: grid must be strictly increasing");
  }
  EvaluationTable table;
  table.xs.assign(xs.begin(), xs.end());
  if (want_pdf) {
    auto& col = table.pdf.emplace();
    col.reserve(xs.size());
    for (double x : xs) col.push_back(dist.pdf(x));
  }
  if (want_cdf) {
    auto& col = table.cdf.emplace();
    col.reserve(xs.size());
    for (double x : xs) col.push_back(dist.cdf(x));
  }
  return table;
}

inline EvaluationTable evaluate_grid(const WeightedSumSpec& spec, std::span<const double> xs, bool want_pdf,
                                     bool want_cdf) {
  return evaluate_grid(Distribution(spec), xs, want_pdf, want_cdf);
}

}  // namespace wchisq

#endif  // WCHISQ_DISTRIBUTION_HPP
