#ifndef WCHISQ_TESTS_CORPUS_HPP
#define WCHISQ_TESTS_CORPUS_HPP

// Fixed validation corpus: 2-4 terms, even dof in [2, 20], weights with
// magnitude in [0.2, 5] and random sign, every ordered pair at least 5% apart
// in ratio. Half of the specs share one dof across terms.

#include <cmath>
#include <cstdint>
#include <vector>

#include "wchisq/model.hpp"
#include "wchisq/oracles.hpp"

namespace wchisq::testing {

inline constexpr std::uint64_t kCorpusSeed = 42;
inline constexpr std::size_t kCorpusSize = 200;

inline bool well_separated(const std::vector<Term>& terms, double min_gap) {
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t j = 0; j < terms.size(); ++j)
      if (i != j && std::abs(terms[i].weight / terms[j].weight - 1.0) < min_gap) return false;
  return true;
}

inline std::vector<WeightedSumSpec> make_corpus(std::size_t count = kCorpusSize,
                                                std::uint64_t seed = kCorpusSeed) {
  SplitMix64 rng(seed);
  auto even_dof = [&] { return 2 * static_cast<int>(1 + rng.next() % 10); };
  std::vector<WeightedSumSpec> corpus;
  while (corpus.size() < count) {
    const std::size_t n_terms = 2 + rng.next() % 3;
    const bool common = rng.uniform() < 0.5;
    const int shared = even_dof();
    std::vector<Term> terms;
    do {
      terms.clear();
      for (std::size_t j = 0; j < n_terms; ++j) {
        const double magnitude = 0.2 + 4.8 * rng.uniform();
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        terms.push_back({sign * magnitude, common ? shared : even_dof()});
      }
    } while (!well_separated(terms, 0.05));
    corpus.emplace_back(std::move(terms));
  }
  return corpus;
}

inline bool mixed_sign(const WeightedSumSpec& spec) {
  bool pos = false, neg = false;
  for (const Term& t : spec.terms()) (t.weight > 0 ? pos : neg) = true;
  return pos && neg;
}

/// `count` points strictly inside the MGF domain, at least 10% of the window
/// width from either end. A one-sided domain is mirrored about 0 to get a
/// finite window.
inline std::vector<double> interior_points(const MgfDomain& d, std::size_t count, std::uint64_t seed) {
  double lo = d.lower, hi = d.upper;
  if (std::isinf(lo)) lo = -hi;
  if (std::isinf(hi)) hi = -lo;
  SplitMix64 rng(seed);
  std::vector<double> ts;
  for (std::size_t i = 0; i < count; ++i) ts.push_back(lo + (hi - lo) * (0.1 + 0.8 * rng.uniform()));
  return ts;
}

}  // namespace wchisq::testing

#endif  // WCHISQ_TESTS_CORPUS_HPP
