// Density and distribution of 2 chi2(4) - 0.5 chi2(4), with the
// partial-fraction coefficients they are assembled from.

#include <cstdio>

#include "wchisq/wchisq.hpp"

int main() {
  const wchisq::WeightedSumSpec spec({{2.0, 4}, {-0.5, 4}});
  const wchisq::Distribution dist(spec);

  dist.visit([](const auto& d) {
    for (const auto& group : d.expansion().groups) {
      for (int i = 1; i <= group.order; ++i) {
        std::printf("weight %5.2f  exponent %d  coefficient % .17g\n", group.weight, group.exponent(i),
                    wchisq::to_double(group.coeffs[i - 1]));
      }
    }
  });

  const auto m = dist.moments();
  std::printf("mean %.4f  sd %.4f\n", m.mean, m.stddev());
  for (double x : {-4.0, -1.0, 0.0, 2.0, 6.0, 12.0, 24.0}) {
    std::printf("x = %6.2f  pdf = %.10f  cdf = %.10f\n", x, dist.pdf(x), dist.cdf(x));
  }
}
