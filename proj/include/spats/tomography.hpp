#pragma once

#include "spats/fock.hpp"
#include "spats/homodyne.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Maximum-likelihood reconstruction of photon-number populations from
// homodyne samples: an expectation-maximization fixed point over the
// probability simplex, with Fisher-information error bars.

namespace spats {

struct TomographyConfig {
  int dim = 25;
  double tol = 1e-9;    // convergence on max |delta p_n|
  int max_iter = 5000;
  // 0 evaluates the likelihood per sample; > 0 collapses the samples onto a
  // histogram first, which is much faster for resampling loops.
  int bins = 0;
};

struct DiagonalEstimate {
  RVector probabilities;
  RVector std_errors;  // zero until fisher_errors fills them
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  bool density_floor_hit = false;

  FockDensityMatrix as_state() const {
    return FockDensityMatrix::diagonal(probabilities, 0.0);
  }
};

namespace detail {

inline constexpr double density_floor = 1e-300;

// Measurement kernel f_n(x_j) = psi_n(x_j)^2 evaluated at the support points,
// with per-point weights (1 for raw samples, counts for binned data).
struct LikelihoodKernel {
  Eigen::MatrixXd f;   // points x dim
  RVector weights;
  double total_weight = 0.0;

  static LikelihoodKernel from_points(const std::vector<double>& xs,
                                      const std::vector<double>& ws, int dim) {
    LikelihoodKernel k;
    const long n = static_cast<long>(xs.size());
    k.f.resize(n, dim);
    std::vector<double> psi(dim);
    for (long j = 0; j < n; ++j) {
      hermite_psi_all(dim - 1, xs[j], psi);
      for (int m = 0; m < dim; ++m) k.f(j, m) = psi[m] * psi[m];
    }
    k.weights = Eigen::Map<const RVector>(ws.data(), n);
    k.total_weight = k.weights.sum();
    return k;
  }
};

inline LikelihoodKernel build_kernel(const QuadratureDataset& ds, const TomographyConfig& cfg) {
  for (double x : ds.samples)
    if (!std::isfinite(x)) throw std::invalid_argument("maxlik_diagonal: non-finite sample");
  if (cfg.bins <= 0) {
    std::vector<double> ws(ds.samples.size(), 1.0);
    return LikelihoodKernel::from_points(ds.samples, ws, cfg.dim);
  }
  double hw = 6.0;
  for (double x : ds.samples) hw = std::max(hw, std::abs(x) + 1e-9);
  std::vector<double> centers(cfg.bins);
  std::vector<double> counts(cfg.bins, 0.0);
  const double width = 2.0 * hw / cfg.bins;
  for (int b = 0; b < cfg.bins; ++b) centers[b] = -hw + (b + 0.5) * width;
  for (double x : ds.samples) {
    int b = static_cast<int>((x + hw) / width);
    b = std::clamp(b, 0, cfg.bins - 1);
    counts[b] += 1.0;
  }
  // drop empty bins
  std::vector<double> xs, ws;
  xs.reserve(cfg.bins);
  ws.reserve(cfg.bins);
  for (int b = 0; b < cfg.bins; ++b)
    if (counts[b] > 0.0) {
      xs.push_back(centers[b]);
      ws.push_back(counts[b]);
    }
  return LikelihoodKernel::from_points(xs, ws, cfg.dim);
}

}  // namespace detail

/// Log-likelihood sum_j log(sum_n p_n f_n(x_j)); zero-density points are
/// floored at 1e-300 and flagged.
inline double likelihood(const RVector& probabilities, const QuadratureDataset& ds,
                         bool* floor_hit = nullptr) {
  const int dim = static_cast<int>(probabilities.size());
  std::vector<double> psi(dim);
  double acc = 0.0;
  bool hit = false;
  for (double x : ds.samples) {
    hermite_psi_all(dim - 1, x, psi);
    double q = 0.0;
    for (int n = 0; n < dim; ++n) q += probabilities[n] * psi[n] * psi[n];
    if (q < detail::density_floor) {
      q = detail::density_floor;
      hit = true;
    }
    acc += std::log(q);
  }
  if (floor_hit) *floor_hit = hit;
  return acc;
}

/// EM fixed point p_n <- p_n * (1/N) sum_j f_n(x_j) / sum_m p_m f_m(x_j),
/// from a uniform start. The update keeps the simplex exactly and the
/// log-likelihood non-decreasing.
inline DiagonalEstimate maxlik_diagonal(const QuadratureDataset& ds,
                                        const TomographyConfig& cfg = {}) {
  if (cfg.dim < 2) throw std::invalid_argument("maxlik_diagonal: dim must be >= 2");
  if (ds.count() < 10L * cfg.dim)
    throw std::invalid_argument("maxlik_diagonal: need at least 10*dim samples");
  const auto kernel = detail::build_kernel(ds, cfg);
  const long points = kernel.f.rows();

  DiagonalEstimate est;
  est.probabilities = RVector::Constant(cfg.dim, 1.0 / cfg.dim);
  est.std_errors = RVector::Zero(cfg.dim);
  est.loglik_trace.reserve(cfg.max_iter + 1);

  RVector q(points), ratio(points), update(cfg.dim);
  const auto loglik_of_q = [&] {
    double acc = 0.0;
    for (long j = 0; j < points; ++j) {
      double v = q[j];
      if (v < detail::density_floor) {
        v = detail::density_floor;
        est.density_floor_hit = true;
      }
      acc += kernel.weights[j] * std::log(v);
    }
    return acc;
  };

  q.noalias() = kernel.f * est.probabilities;
  est.loglik_trace.push_back(loglik_of_q());
  for (int it = 0; it < cfg.max_iter; ++it) {
    ratio = kernel.weights.cwiseQuotient(q.cwiseMax(detail::density_floor));
    update.noalias() = kernel.f.transpose() * ratio;
    RVector next = est.probabilities.cwiseProduct(update) / kernel.total_weight;
    const double delta = (next - est.probabilities).cwiseAbs().maxCoeff();
    est.probabilities = std::move(next);
    ++est.iterations;
    q.noalias() = kernel.f * est.probabilities;
    est.loglik_trace.push_back(loglik_of_q());
    if (delta < cfg.tol) {
      est.converged = true;
      break;
    }
  }
  return est;
}

struct FisherResult {
  Eigen::MatrixXd covariance;  // dim x dim, simplex-constrained
  bool regularized = false;
};

/// Fisher information of the populations restricted to the simplex (the
/// largest population is eliminated), inverted and mapped back to all
/// coordinates.
inline FisherResult fisher_covariance(const DiagonalEstimate& estimate,
                                      const QuadratureDataset& ds) {
  const int dim = static_cast<int>(estimate.probabilities.size());
  const long n = ds.count();
  int pivot = 0;
  estimate.probabilities.maxCoeff(&pivot);

  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim - 1, dim - 1);
  std::vector<double> psi(dim);
  RVector f(dim), score(dim - 1);
  for (long j = 0; j < n; ++j) {
    hermite_psi_all(dim - 1, ds.samples[j], psi);
    for (int m = 0; m < dim; ++m) f[m] = psi[m] * psi[m];
    double q = f.dot(estimate.probabilities);
    q = std::max(q, detail::density_floor);
    int idx = 0;
    for (int m = 0; m < dim; ++m)
      if (m != pivot) score[idx++] = (f[m] - f[pivot]) / q;
    info.selfadjointView<Eigen::Lower>().rankUpdate(score);
  }
  info = info.selfadjointView<Eigen::Lower>();

  FisherResult result;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    const double ridge = 1e-10 * std::max(1.0, info.trace() / (dim - 1));
    info.diagonal().array() += ridge;
    ldlt.compute(info);
    result.regularized = true;
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("fisher_covariance: Fisher matrix inversion failed");
  }
  const Eigen::MatrixXd free_cov = ldlt.solve(Eigen::MatrixXd::Identity(dim - 1, dim - 1));

  result.covariance = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<int> free_index;
  free_index.reserve(dim - 1);
  for (int m = 0; m < dim; ++m)
    if (m != pivot) free_index.push_back(m);
  for (int a = 0; a < dim - 1; ++a)
    for (int b = 0; b < dim - 1; ++b)
      result.covariance(free_index[a], free_index[b]) = free_cov(a, b);
  // pivot coordinate is 1 - sum of the free ones
  for (int a = 0; a < dim - 1; ++a) {
    double c = 0.0;
    for (int b = 0; b < dim - 1; ++b) c -= free_cov(a, b);
    result.covariance(free_index[a], pivot) = c;
    result.covariance(pivot, free_index[a]) = c;
  }
  result.covariance(pivot, pivot) = free_cov.sum();
  return result;
}

/// Square roots of the diagonal of the inverse restricted Fisher matrix.
inline RVector fisher_errors(const DiagonalEstimate& estimate, const QuadratureDataset& ds) {
  return fisher_covariance(estimate, ds).covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

inline nlohmann::json estimate_to_json(const DiagonalEstimate& est) {
  nlohmann::json j;
  j["probabilities"] = std::vector<double>(est.probabilities.begin(), est.probabilities.end());
  j["std_errors"] = std::vector<double>(est.std_errors.begin(), est.std_errors.end());
  j["iterations"] = est.iterations;
  j["converged"] = est.converged;
  j["loglik_final"] = est.loglik_trace.empty() ? 0.0 : est.loglik_trace.back();
  return j;
}

inline DiagonalEstimate estimate_from_json(const nlohmann::json& j) {
  DiagonalEstimate est;
  const auto probs = j.at("probabilities").get<std::vector<double>>();
  const auto errs = j.at("std_errors").get<std::vector<double>>();
  est.probabilities = Eigen::Map<const RVector>(probs.data(), static_cast<long>(probs.size()));
  est.std_errors = Eigen::Map<const RVector>(errs.data(), static_cast<long>(errs.size()));
  est.iterations = j.at("iterations").get<int>();
  est.converged = j.at("converged").get<bool>();
  est.loglik_trace.push_back(j.value("loglik_final", 0.0));
  return est;
}

}  // namespace spats
