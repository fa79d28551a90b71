#pragma once

#include "spats/fock.hpp"
#include "spats/homodyne.hpp"
#include "spats/parallel.hpp"
#include "spats/phasespace.hpp"
#include "spats/rng.hpp"
#include "spats/states.hpp"
#include "spats/tomography.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// The four nonclassicality tests: Wigner negativity at the origin, the
// first- and second-order characteristic-function criteria, the neighbouring
// photon-number modulation test B(n), and the entanglement potential.

namespace spats {

enum class Criterion { wigner0, rv1, rv2, klyshko, ep };
enum class Verdict { nonclassical, indeterminate, classical };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::wigner0: return "wigner0";
    case Criterion::rv1: return "rv1";
    case Criterion::rv2: return "rv2";
    case Criterion::klyshko: return "klyshko";
    case Criterion::ep: return "ep";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::nonclassical: return "nonclassical";
    case Verdict::indeterminate: return "indeterminate";
    case Verdict::classical: return "classical";
  }
  return "?";
}

inline Criterion parse_criterion(const std::string& name) {
  if (name == "wigner0") return Criterion::wigner0;
  if (name == "rv1") return Criterion::rv1;
  if (name == "rv2") return Criterion::rv2;
  if (name == "klyshko") return Criterion::klyshko;
  if (name == "ep") return Criterion::ep;
  throw std::invalid_argument("unknown criterion '" + name + "'");
}

struct CriterionReport {
  Criterion criterion{};
  double value = 0.0;
  double sigma = 0.0;
  Verdict verdict = Verdict::indeterminate;
  std::map<std::string, double> details;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["criterion"] = to_string(criterion);
    j["value"] = value;
    j["sigma"] = sigma;
    j["verdict"] = to_string(verdict);
    j["details"] = details;
    return j;
  }
};

namespace detail {

/// Verdict for a "value below zero is nonclassical" indicator.
inline Verdict verdict_negative_signals(double value, double sigma, double threshold) {
  if (value < -threshold * sigma) return Verdict::nonclassical;
  if (value > threshold * sigma) return Verdict::classical;
  return Verdict::indeterminate;
}

}  // namespace detail

/// W(0) < 0 is a sufficient nonclassicality condition.
inline CriterionReport wigner0_test(const FockDensityMatrix& rho, double sigma,
                                    double sigma_threshold = 3.0) {
  if (sigma < 0.0) throw std::invalid_argument("wigner0_test: sigma must be >= 0");
  CriterionReport r;
  r.criterion = Criterion::wigner0;
  r.value = wigner_origin(rho);
  r.sigma = sigma;
  r.verdict = detail::verdict_negative_signals(r.value, sigma, sigma_threshold);
  return r;
}

/// B(n) = (n+2) p_n p_{n+2} - (n+1) p_{n+1}^2; negative values signal
/// nonclassical photon-number modulation.
inline double klyshko_indicator(const RVector& p, int n) {
  if (n < 0 || n + 2 >= p.size()) throw std::invalid_argument("klyshko: index out of range");
  return (n + 2) * p[n] * p[n + 2] - (n + 1) * p[n + 1] * p[n + 1];
}

inline CriterionReport klyshko_B(const FockDensityMatrix& rho, int n,
                                 const RVector& population_sigmas,
                                 double sigma_threshold = 3.0) {
  if (!rho.is_diagonal()) throw std::invalid_argument("klyshko_B: non-diagonal input");
  const RVector p = rho.populations();
  if (n < 0 || n + 2 >= rho.dim()) throw std::invalid_argument("klyshko_B: index out of range");
  if (population_sigmas.size() != 0 && population_sigmas.size() < n + 3)
    throw std::invalid_argument("klyshko_B: sigma sequence too short");
  CriterionReport r;
  r.criterion = Criterion::klyshko;
  r.value = klyshko_indicator(p, n);
  r.details["n"] = n;
  if (population_sigmas.size() != 0) {
    const double gn = (n + 2) * p[n + 2];
    const double gn1 = -2.0 * (n + 1) * p[n + 1];
    const double gn2 = (n + 2) * p[n];
    r.sigma = std::sqrt(gn * gn * population_sigmas[n] * population_sigmas[n] +
                        gn1 * gn1 * population_sigmas[n + 1] * population_sigmas[n + 1] +
                        gn2 * gn2 * population_sigmas[n + 2] * population_sigmas[n + 2]);
  }
  r.verdict = detail::verdict_negative_signals(r.value, r.sigma, sigma_threshold);
  return r;
}

/// Covariance-aware variant; correlations between neighbouring populations
/// matter for reconstructed states.
inline CriterionReport klyshko_B(const FockDensityMatrix& rho, int n,
                                 const Eigen::MatrixXd& population_covariance,
                                 double sigma_threshold = 3.0) {
  if (!rho.is_diagonal()) throw std::invalid_argument("klyshko_B: non-diagonal input");
  const RVector p = rho.populations();
  if (n < 0 || n + 2 >= rho.dim()) throw std::invalid_argument("klyshko_B: index out of range");
  RVector grad = RVector::Zero(p.size());
  grad[n] = (n + 2) * p[n + 2];
  grad[n + 1] = -2.0 * (n + 1) * p[n + 1];
  grad[n + 2] = (n + 2) * p[n];
  const long d = std::min<long>(p.size(), population_covariance.rows());
  const double var =
      grad.head(d).dot(population_covariance.topLeftCorner(d, d) * grad.head(d));
  CriterionReport r;
  r.criterion = Criterion::klyshko;
  r.value = klyshko_indicator(p, n);
  r.sigma = std::sqrt(std::max(0.0, var));
  r.details["n"] = n;
  r.verdict = detail::verdict_negative_signals(r.value, r.sigma, sigma_threshold);
  return r;
}

namespace detail {

inline void require_matching_grids(const CharacteristicCurve& a, const CharacteristicCurve& b) {
  if (a.k_values.size() != b.k_values.size())
    throw std::invalid_argument("rv criterion: mismatched k grids");
  for (size_t i = 0; i < a.k_values.size(); ++i)
    if (std::abs(a.k_values[i] - b.k_values[i]) > 1e-12)
      throw std::invalid_argument("rv criterion: mismatched k grids");
}

inline Verdict rv_verdict(double best_margin, bool beats_threshold) {
  if (beats_threshold) return Verdict::nonclassical;
  if (best_margin <= 0.0) return Verdict::classical;
  return Verdict::indeterminate;
}

}  // namespace detail

/// Nonclassical if |G(k)| exceeds the vacuum characteristic at some k > 0.
inline CriterionReport rv_first_order(const CharacteristicCurve& g,
                                      const CharacteristicCurve& g_vac,
                                      double sigma_threshold = 3.0) {
  detail::require_matching_grids(g, g_vac);
  CriterionReport r;
  r.criterion = Criterion::rv1;
  bool beats = false;
  double best = -std::numeric_limits<double>::infinity();
  size_t best_i = 0;
  for (size_t i = 0; i < g.k_values.size(); ++i) {
    if (g.k_values[i] <= 0.0) continue;  // both curves equal 1 at k = 0
    const double margin = std::abs(g.g_values[i]) - g_vac.g_values[i];
    const double sigma = std::hypot(g.std_errors[i], g_vac.std_errors[i]);
    if (margin > sigma_threshold * sigma) beats = true;
    if (margin > best) {
      best = margin;
      best_i = i;
    }
  }
  if (!std::isfinite(best)) throw std::invalid_argument("rv_first_order: no k > 0 on grid");
  r.value = best;
  r.sigma = std::hypot(g.std_errors[best_i], g_vac.std_errors[best_i]);
  r.details["k_at_max"] = g.k_values[best_i];
  r.details["abs_g_at_max"] = std::abs(g.g_values[best_i]);
  r.details["g_vac_at_max"] = g_vac.g_values[best_i];
  r.verdict = detail::rv_verdict(best, beats);
  return r;
}

/// Second-order test: 2 G^2(k/2) G_vac(k/sqrt2) - G(k) > G_vac(k) at some k.
/// G is read at k/2 by interpolation when the grid lacks the halved node.
inline CriterionReport rv_second_order(const CharacteristicCurve& g,
                                       const CharacteristicCurve& g_vac,
                                       double sigma_threshold = 3.0) {
  detail::require_matching_grids(g, g_vac);
  CriterionReport r;
  r.criterion = Criterion::rv2;
  bool beats = false;
  double best = -std::numeric_limits<double>::infinity();
  double best_sigma = 0.0, best_k = 0.0;
  for (size_t i = 0; i < g.k_values.size(); ++i) {
    const double k = g.k_values[i];
    if (k <= 0.0) continue;
    const double gh = g.value_at(k / 2.0);
    const double gvs = g_vac.value_at(k / std::sqrt(2.0));
    const double margin = 2.0 * gh * gh * gvs - g.g_values[i] - g_vac.g_values[i];
    const double d_gh = 4.0 * gh * gvs;     // d margin / d g(k/2)
    const double d_gvs = 2.0 * gh * gh;     // d margin / d g_vac(k/sqrt2)
    const double sigma = std::sqrt(
        d_gh * d_gh * std::pow(g.error_at(k / 2.0), 2) +
        d_gvs * d_gvs * std::pow(g_vac.error_at(k / std::sqrt(2.0)), 2) +
        std::pow(g.std_errors[i], 2) + std::pow(g_vac.std_errors[i], 2));
    if (margin > sigma_threshold * sigma) beats = true;
    if (margin > best) {
      best = margin;
      best_sigma = sigma;
      best_k = k;
    }
  }
  if (!std::isfinite(best)) throw std::invalid_argument("rv_second_order: no k > 0 on grid");
  r.value = best;
  r.sigma = best_sigma;
  r.details["k_at_max"] = best_k;
  r.verdict = detail::rv_verdict(best, beats);
  return r;
}

/// rho mixed with vacuum on a 50-50 beam splitter:
/// rho' = sum_n p_n |chi_n><chi_n|, |chi_n> = 2^(-n/2) sum_k sqrt(C(n,k)) |k>|n-k>.
inline TwoModeDensityMatrix beamsplitter_with_vacuum(const FockDensityMatrix& rho,
                                                     int dim_out) {
  if (!rho.is_diagonal())
    throw std::invalid_argument("beamsplitter_with_vacuum: non-diagonal input");
  const int d = rho.dim();
  if (dim_out < d) throw std::invalid_argument("beamsplitter_with_vacuum: dim_out must cover input");
  if (dim_out > 64) throw std::invalid_argument("beamsplitter_with_vacuum: dim_out too large");
  const long d2 = static_cast<long>(dim_out) * dim_out;
  CMatrix out = CMatrix::Zero(d2, d2);
  std::vector<double> amp(d);
  std::vector<long> idx(d);
  for (int n = 0; n < d; ++n) {
    const double pn = rho.population(n);
    if (pn == 0.0) continue;
    // amp[k] = sqrt(C(n,k) / 2^n), built multiplicatively
    amp[0] = std::pow(0.5, 0.5 * n);
    for (int k = 0; k < n; ++k) amp[k + 1] = amp[k] * std::sqrt((n - k) / (k + 1.0));
    for (int k = 0; k <= n; ++k) idx[k] = static_cast<long>(k) * dim_out + (n - k);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) out(idx[a], idx[b]) += pn * amp[a] * amp[b];
  }
  return TwoModeDensityMatrix(dim_out, std::move(out));
}

/// Log-negativity of the beam-splitter output, log2 of the trace norm of the
/// partial transpose. dim_per_mode 0 defaults to min(rho.dim, 26); smaller
/// values truncate and renormalize the populations first.
inline double ep_value(const FockDensityMatrix& rho, int dim_per_mode = 0) {
  if (!rho.is_diagonal()) throw std::invalid_argument("ep_value: non-diagonal input");
  if (dim_per_mode <= 0) dim_per_mode = std::min(rho.dim(), 26);
  FockDensityMatrix in = rho;
  if (dim_per_mode < rho.dim()) {
    RVector head = rho.populations().head(dim_per_mode);
    const double kept = head.sum();
    if (kept <= 0.0) throw std::invalid_argument("ep_value: truncation removes all mass");
    head /= kept;
    in = FockDensityMatrix::diagonal(head, rho.tail_mass_bound() + std::max(0.0, 1.0 - kept));
  }
  const TwoModeDensityMatrix rho2 = beamsplitter_with_vacuum(in, dim_per_mode);
  const double tn = trace_norm(partial_transpose(rho2));
  double value = std::log2(tn);
  if (value < 0.0) {
    if (value < -1e-9) throw std::runtime_error("ep_value: trace norm fell below the trace");
    value = 0.0;
  }
  return value;
}

inline CriterionReport entanglement_potential(const FockDensityMatrix& rho, double sigma = 0.0,
                                              int dim_per_mode = 0,
                                              double sigma_threshold = 3.0) {
  if (sigma < 0.0) throw std::invalid_argument("entanglement_potential: sigma must be >= 0");
  CriterionReport r;
  r.criterion = Criterion::ep;
  r.value = ep_value(rho, dim_per_mode);
  r.sigma = sigma;
  r.details["dim_per_mode"] = dim_per_mode <= 0 ? std::min(rho.dim(), 26) : dim_per_mode;
  if (r.value > sigma_threshold * sigma && r.value > 1e-9)
    r.verdict = Verdict::nonclassical;
  else if (r.value <= 1e-9)
    r.verdict = Verdict::classical;
  else
    r.verdict = Verdict::indeterminate;
  return r;
}

/// Nonparametric bootstrap spread of the entanglement potential: resample the
/// quadratures, rerun the reconstruction, recompute the EP. Resamples run in
/// parallel on independent derived seeds.
inline double ep_bootstrap_sigma(const QuadratureDataset& ds, const TomographyConfig& cfg,
                                 int resamples, std::uint64_t seed, int dim_per_mode = 0) {
  if (resamples < 2) throw std::invalid_argument("ep_bootstrap_sigma: need >= 2 resamples");
  const long n = ds.count();
  std::vector<double> values(resamples);
  parallel_for(resamples, [&](long r) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    QuadratureDataset boot;
    boot.seed = ds.seed;
    boot.samples.resize(n);
    for (long i = 0; i < n; ++i)
      boot.samples[i] = ds.samples[static_cast<long>(rng.next() % static_cast<std::uint64_t>(n))];
    const DiagonalEstimate est = maxlik_diagonal(boot, cfg);
    values[r] = ep_value(est.as_state(), dim_per_mode);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= resamples;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (resamples - 1));
}

}  // namespace spats
