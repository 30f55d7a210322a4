#ifndef WCHISQ_CLI_HPP
#define WCHISQ_CLI_HPP

/*
 * Command-line front end. Each command writes data to `out` and diagnostics
 * to `err`, and returns the process exit code:
 *
 *   0  success / all verification points pass
 *   1  verification failure
 *   2  invalid input
 *   3  ill-conditioned expansion (pass --force to proceed anyway)
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "wchisq/csv.hpp"
#include "wchisq/distribution.hpp"
#include "wchisq/model.hpp"
#include "wchisq/oracles.hpp"
#include "wchisq/partial_fractions.hpp"
#include "wchisq/spec_json.hpp"

namespace wchisq::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kInvalidInput = 2, kIllConditioned = 3 };

class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Grid {
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  std::vector<double> values() const {
    std::vector<double> xs(points);
    for (int i = 0; i < points; ++i) xs[i] = min + (max - min) * i / (points - 1);
    xs.back() = max;
    return xs;
  }
};

struct WeightPair {
  double first = 1.0;
  double second = 0.5;
};

struct RunConfig {
  // exactly one spec source
  std::string weights;
  std::string dof;
  std::string spec_path;

  std::string grid;
  bool want_pdf = false;
  bool want_cdf = false;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  double perturb = 0.0;
  bool force = false;

  int figure_dof = 50;
  std::string pairs;
  int figure_points = 401;

  std::string out_path;
};

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw usage_error("not a number: '" + std::string(text) + "'");
  return v;
}

inline int parse_int(std::string_view text) {
  int v = 0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, v);
  if (ec != std::errc{} || ptr != last) throw usage_error("not an integer: '" + std::string(text) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = text.find(sep, start);
    parts.push_back(text.substr(start, end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

/// "--weights 2,1 --dof 2" or "--dof 2,4" (one per weight).
inline WeightedSumSpec spec_from_flags(const std::string& weights, const std::string& dof) {
  std::vector<double> ws;
  for (auto part : split(weights, ',')) ws.push_back(parse_double(part));
  std::vector<int> ns;
  for (auto part : split(dof, ',')) ns.push_back(parse_int(part));
  if (ns.size() == 1) ns.resize(ws.size(), ns.front());
  if (ns.size() != ws.size()) throw usage_error("--dof needs one value or one per weight");
  std::vector<Term> terms;
  for (std::size_t i = 0; i < ws.size(); ++i) terms.push_back({ws[i], ns[i]});
  return WeightedSumSpec(std::move(terms));
}

inline WeightedSumSpec resolve_spec(const RunConfig& cfg) {
  const bool inline_spec = !cfg.weights.empty();
  const bool file_spec = !cfg.spec_path.empty();
  if (inline_spec == file_spec) throw usage_error("give exactly one of --weights or --spec");
  if (file_spec) {
    if (!cfg.dof.empty()) throw usage_error("--dof only applies with --weights");
    return load_spec_file(cfg.spec_path);
  }
  if (cfg.dof.empty()) throw usage_error("--weights needs --dof");
  return spec_from_flags(cfg.weights, cfg.dof);
}

/// "min:max:points"
inline Grid parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw usage_error("--grid expects min:max:points");
  Grid g{parse_double(parts[0]), parse_double(parts[1]), parse_int(parts[2])};
  if (!std::isfinite(g.min) || !std::isfinite(g.max) || !(g.min < g.max)) {
    throw usage_error("--grid bounds must be finite with min < max");
  }
  if (g.points < 2) throw usage_error("--grid needs at least 2 points");
  return g;
}

/// "1:0.5,2:-1"
inline std::vector<WeightPair> parse_pairs(const std::string& text) {
  std::vector<WeightPair> pairs;
  for (auto item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw usage_error("--pairs expects l1:l2[,l1:l2...]");
    pairs.push_back({parse_double(parts[0]), parse_double(parts[1])});
  }
  return pairs;
}

inline std::vector<WeightPair> default_figure_pairs() { return {{1.0, 0.5}, {2.0, 1.0}, {1.0, -0.5}, {2.0, -1.0}}; }

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

template <typename Real>
bool check_conditioning(const PartialFractionExpansion<Real>& e, bool force, std::ostream& err) {
  if (!e.ill_conditioned) return true;
  if (e.min_separation < kIllConditionedSeparation) {
    err << "warning: weights nearly coincide (min |1 - w_i/w_j| = " << e.min_separation
        << "); partial-fraction coefficients cancel catastrophically\n";
  } else {
    err << "warning: coefficients cancel by a factor of ";
    if (std::isinf(e.cancellation)) {
      err << "more than 1e308";
    } else {
      err << e.cancellation;
    }
    err << ", beyond " << precision_bits<Real>() << "-bit working precision\n";
  }
  if (force) return true;
  err << "refusing to continue without --force\n";
  return false;
}

inline bool check_conditioning(const AnyExpansion& e, bool force, std::ostream& err) {
  return std::visit([&](const auto& x) { return check_conditioning(x, force, err); }, e);
}

inline int cmd_coeffs(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const AnyExpansion expansion = decompose_adaptive(resolve_spec(cfg));
  if (!check_conditioning(expansion, cfg.force, err)) return kIllConditioned;
  out << "group_weight,order,index,exponent,coefficient\n";
  std::visit(
      [&](const auto& e) {
        for (const auto& g : e.groups) {
          for (int i = 1; i <= g.order; ++i) {
            const auto& c = g.coeffs[i - 1];
            if (c == 0) continue;
            out << format_real(g.weight) << ',' << g.order << ',' << i << ',' << g.exponent(i) << ','
                << format_real(to_double(c)) << '\n';
          }
        }
      },
      expansion);
  out << "# coeff_sum=" << format_real(coefficient_sum(expansion)) << '\n';
  return kOk;
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const WeightedSumSpec spec = resolve_spec(cfg);
  if (cfg.grid.empty()) throw usage_error("eval needs --grid min:max:points");
  const auto xs = parse_grid(cfg.grid).values();
  const AnyExpansion expansion = decompose_adaptive(spec);
  if (!check_conditioning(expansion, cfg.force, err)) return kIllConditioned;
  const Distribution dist(expansion, mean_variance(spec));
  const bool want_pdf = cfg.want_pdf || !cfg.want_cdf;
  const bool want_cdf = cfg.want_cdf || !cfg.want_pdf;
  const auto table = evaluate_grid(dist, xs, want_pdf, want_cdf);

  out << 'x';
  if (want_pdf) out << ",pdf";
  if (want_cdf) out << ",cdf";
  out << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << format_real(xs[i]);
    if (want_pdf) out << ',' << format_real((*table.pdf)[i]);
    if (want_cdf) out << ',' << format_real(clamp_unit((*table.cdf)[i]));
    out << '\n';
  }
  return kOk;
}

struct VerifyPoint {
  double x = 0.0;
  double analytic = 0.0;
  OracleEstimate inversion;
  OracleEstimate monte_carlo;
  bool inversion_ok = false;
  bool monte_carlo_ok = false;
};

inline constexpr double kInversionAgreement = 1e-6;
inline constexpr double kMonteCarloSigmas = 4.0;

/// Per-point verdict. The Monte Carlo band uses the larger of the empirical
/// and the analytic binomial standard errors, so a point with p_hat in {0, 1}
/// still gets a nonzero band.
inline VerifyPoint judge_point(double x, double analytic, const OracleEstimate& inversion,
                               const OracleEstimate& monte_carlo, std::uint64_t samples) {
  VerifyPoint v{x, analytic, inversion, monte_carlo};
  v.inversion_ok = std::abs(analytic - inversion.value) <= kInversionAgreement + inversion.error_bound;
  const double p = clamp_unit(analytic);
  const double null_se = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  const double se = std::max(monte_carlo.error_bound, null_se);
  v.monte_carlo_ok = std::abs(analytic - monte_carlo.value) <= kMonteCarloSigmas * se;
  return v;
}

inline std::vector<double> default_verify_points(const Moments& m) {
  std::vector<double> xs;
  for (double z : {-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0}) xs.push_back(m.mean + z * m.stddev());
  return xs;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const WeightedSumSpec spec = resolve_spec(cfg);
  if (cfg.samples == 0) throw usage_error("--samples must be positive");
  if (!(cfg.tol >= 1e-10)) throw usage_error("--tol must be >= 1e-10");
  AnyExpansion expansion = decompose_adaptive(spec);
  if (!check_conditioning(expansion, cfg.force, err)) return kIllConditioned;
  if (cfg.perturb != 0.0) {
    // test hook: corrupt the leading coefficient of the first pole group
    std::visit([&](auto& e) { e.groups.front().coeffs.front() += cfg.perturb; }, expansion);
  }
  const Distribution dist(expansion, mean_variance(spec));
  const auto xs = cfg.grid.empty() ? default_verify_points(dist.moments()) : parse_grid(cfg.grid).values();
  const auto mc = monte_carlo_cdf(spec, xs, cfg.samples, cfg.seed);

  out << "# rng=" << kRngName << " seed=" << cfg.seed << " samples=" << cfg.samples
      << " tol=" << format_real(cfg.tol) << '\n';
  out << "x,analytic,cf_value,cf_bound,mc_value,mc_se,status\n";
  bool all_pass = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto inv = cf_inversion_cdf(spec, xs[i], cfg.tol);
    const auto v = judge_point(xs[i], dist.cdf(xs[i]), inv, mc[i], cfg.samples);
    const bool pass = v.inversion_ok && v.monte_carlo_ok;
    all_pass = all_pass && pass;
    out << format_real(v.x) << ',' << format_real(v.analytic) << ',' << format_real(inv.value) << ','
        << format_real(inv.error_bound) << ',' << format_real(mc[i].value) << ','
        << format_real(mc[i].error_bound) << ',' << (pass ? "PASS" : "FAIL") << '\n';
  }
  out << "# result=" << (all_pass ? "PASS" : "FAIL") << '\n';
  return all_pass ? kOk : kVerifyFailed;
}

inline int cmd_figure(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto pairs = cfg.pairs.empty() ? default_figure_pairs() : parse_pairs(cfg.pairs);
  if (cfg.figure_points < 2) throw usage_error("--points must be at least 2");
  std::vector<std::pair<WeightPair, Distribution>> curves;
  for (const auto& p : pairs) {
    const WeightedSumSpec spec({{p.first, cfg.figure_dof}, {p.second, cfg.figure_dof}});
    const AnyExpansion expansion = decompose_adaptive(spec);
    if (!check_conditioning(expansion, cfg.force, err)) return kIllConditioned;
    curves.emplace_back(p, Distribution(expansion, mean_variance(spec)));
  }
  out << "lambda1,lambda2,n,x,cdf\n";
  for (const auto& [p, dist] : curves) {
    const Moments& m = dist.moments();
    const Grid g{m.mean - 6.0 * m.stddev(), m.mean + 6.0 * m.stddev(), cfg.figure_points};
    const std::string prefix = format_real(p.first) + ',' + format_real(p.second) + ',' +
                               std::to_string(cfg.figure_dof) + ',';
    for (double x : g.values()) out << prefix << format_real(x) << ',' << format_real(clamp_unit(dist.cdf(x))) << '\n';
  }
  return kOk;
}

namespace detail {

inline void add_spec_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--weights", cfg.weights, "comma-separated nonzero weights");
  cmd->add_option("--dof", cfg.dof, "common even dof, or one per weight");
  cmd->add_option("--spec", cfg.spec_path, "JSON spec file {\"terms\":[{\"weight\":w,\"dof\":n},...]}");
  cmd->add_flag("--force", cfg.force, "proceed even if the expansion is ill-conditioned");
}

template <typename Command>
int dispatch(Command command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.out_path.empty()) return command(cfg, out, err);
  std::ofstream file(cfg.out_path);
  if (!file) throw usage_error("cannot open output file " + cfg.out_path);
  return command(cfg, file, err);
}

}  // namespace detail

/// Parse argv and run one command.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact distribution of weighted sums of chi-squared variables"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* coeffs = app.add_subcommand("coeffs", "partial-fraction coefficients as CSV");
  detail::add_spec_options(coeffs, cfg);

  auto* eval = app.add_subcommand("eval", "pdf/cdf table on a grid as CSV");
  detail::add_spec_options(eval, cfg);
  eval->add_option("--grid", cfg.grid, "min:max:points")->required();
  eval->add_flag("--pdf", cfg.want_pdf, "emit the pdf column");
  eval->add_flag("--cdf", cfg.want_cdf, "emit the cdf column");

  auto* verify = app.add_subcommand("verify", "compare against Monte Carlo and Gil-Pelaez inversion");
  detail::add_spec_options(verify, cfg);
  verify->add_option("--grid", cfg.grid, "min:max:points (default: mean + {-2..2 step 0.5} sd)");
  verify->add_option("--samples", cfg.samples, "Monte Carlo sample count")->capture_default_str();
  verify->add_option("--seed", cfg.seed, "Monte Carlo seed")->capture_default_str();
  verify->add_option("--tol", cfg.tol, "inversion absolute tolerance")->capture_default_str();
  verify->add_option("--perturb", cfg.perturb, "add this to the first coefficient (sanity hook)")
      ->group("");

  auto* figure = app.add_subcommand("figure", "cdf curves for weight pairs at common dof");
  figure->add_option("--n", cfg.figure_dof, "common dof of both terms")->capture_default_str();
  figure->add_option("--pairs", cfg.pairs, "l1:l2[,l1:l2...] (default 1:0.5,2:1,1:-0.5,2:-1)");
  figure->add_option("--points", cfg.figure_points, "grid points per curve")->capture_default_str();
  figure->add_flag("--force", cfg.force, "proceed even if an expansion is ill-conditioned");

  for (auto* cmd : {coeffs, eval, verify, figure}) cmd->add_option("--out", cfg.out_path, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  try {
    if (coeffs->parsed()) return detail::dispatch(cmd_coeffs, cfg, out, err);
    if (eval->parsed()) return detail::dispatch(cmd_eval, cfg, out, err);
    if (verify->parsed()) return detail::dispatch(cmd_verify, cfg, out, err);
    return detail::dispatch(cmd_figure, cfg, out, err);
  } catch (const std::invalid_argument& e) {  // usage_error, invalid_spec
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::runtime_error& e) {  // convergence or overflow for this input
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

}  // namespace wchisq::cli

#endif  // WCHISQ_CLI_HPP
