#pragma once

#include "spats/fock.hpp"
#include "spats/phasespace.hpp"
#include "spats/rng.hpp"
#include "spats/states.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Quadrature-domain model: oscillator wavefunctions in the convention where
// the vacuum quadrature variance is 1/4, the exact sampling of homodyne
// outcomes, and empirical characteristic functions with standard errors.

namespace spats {

/// Normalized oscillator wavefunction psi_n(x); psi_0(x) = (2/pi)^(1/4) e^(-x^2).
inline double hermite_psi(int n, double x) {
  if (n < 0 || n > 200) throw std::invalid_argument("hermite_psi: n out of range [0,200]");
  if (!std::isfinite(x)) throw std::invalid_argument("hermite_psi: x must be finite");
  double prev = 0.0;
  double cur = std::pow(2.0 / std::numbers::pi, 0.25) * std::exp(-x * x);
  for (int m = 0; m < n; ++m) {
    const double next =
        2.0 * x / std::sqrt(m + 1.0) * cur - std::sqrt(m / (m + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// psi_0(x) .. psi_nmax(x) in one recurrence pass.
inline void hermite_psi_all(int nmax, double x, std::span<double> out) {
  if (nmax < 0 || nmax > 200) throw std::invalid_argument("hermite_psi_all: nmax out of range");
  if (out.size() < static_cast<size_t>(nmax) + 1)
    throw std::invalid_argument("hermite_psi_all: output span too small");
  double prev = 0.0;
  double cur = std::pow(2.0 / std::numbers::pi, 0.25) * std::exp(-x * x);
  out[0] = cur;
  for (int m = 0; m < nmax; ++m) {
    const double next =
        2.0 * x / std::sqrt(m + 1.0) * cur - std::sqrt(m / (m + 1.0)) * prev;
    prev = cur;
    cur = next;
    out[m + 1] = cur;
  }
}

/// Quadrature density of a diagonal state: p(x) = sum_n p_n psi_n(x)^2.
/// Phase drops out because the state is phase-independent.
inline double quadrature_pdf(const FockDensityMatrix& rho, double x) {
  if (!rho.is_diagonal())
    throw std::invalid_argument("quadrature_pdf: non-diagonal input unsupported");
  const int d = rho.dim();
  std::vector<double> psi(d);
  hermite_psi_all(d - 1, x, psi);
  double acc = 0.0;
  for (int n = 0; n < d; ++n) acc += rho.population(n) * psi[n] * psi[n];
  return acc;
}

struct QuadratureDataset {
  std::vector<double> samples;
  std::uint64_t seed = 0;
  std::optional<StateDescriptor> source;

  long count() const { return static_cast<long>(samples.size()); }
};

namespace detail {

/// Tabulated inverse CDF of the quadrature density on a symmetric grid wide
/// enough that the truncated Fock space carries no mass outside it.
class InverseCdfSampler {
 public:
  InverseCdfSampler(const FockDensityMatrix& rho, int grid_points = 16384)
      : x_(grid_points), cdf_(grid_points) {
    const double half_width = std::max(6.0, std::sqrt((2.0 * rho.dim() + 1.0) / 4.0) + 1.5);
    for (int i = 0; i < grid_points; ++i)
      x_[i] = -half_width + 2.0 * half_width * i / (grid_points - 1);
    std::vector<double> pdf(grid_points);
    for (int i = 0; i < grid_points; ++i) pdf[i] = quadrature_pdf(rho, x_[i]);
    cdf_[0] = 0.0;
    for (int i = 1; i < grid_points; ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (x_[i] - x_[i - 1]);
    const double total = cdf_.back();
    if (!(total > 0.0)) throw std::invalid_argument("InverseCdfSampler: degenerate density");
    for (double& c : cdf_) c /= total;
  }

  double operator()(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x_.front();
    if (it == cdf_.end()) return x_.back();
    const size_t hi = static_cast<size_t>(it - cdf_.begin());
    const double c0 = cdf_[hi - 1], c1 = cdf_[hi];
    const double t = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
    return x_[hi - 1] + t * (x_[hi] - x_[hi - 1]);
  }

  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& cdf() const { return cdf_; }

 private:
  std::vector<double> x_;
  std::vector<double> cdf_;
};

}  // namespace detail

/// I.i.d. homodyne outcomes drawn by inverse-CDF lookup; bit-reproducible for
/// a given (state, count, seed).
inline QuadratureDataset sample_quadratures(const FockDensityMatrix& rho, long count,
                                            std::uint64_t seed,
                                            std::optional<StateDescriptor> source = {}) {
  if (count < 1) throw std::invalid_argument("sample_quadratures: count must be >= 1");
  detail::InverseCdfSampler inv(rho);
  QuadratureDataset ds;
  ds.seed = seed;
  ds.source = std::move(source);
  ds.samples.resize(count);
  SplitMix64 rng(seed);
  for (long i = 0; i < count; ++i) ds.samples[i] = inv(rng.uniform01());
  return ds;
}

struct CharacteristicCurve {
  std::vector<double> k_values;
  std::vector<double> g_values;   // Re G(k)
  std::vector<double> std_errors;

  /// Linear interpolation in k; exact at grid nodes.
  double value_at(double k) const { return interp(g_values, k); }
  double error_at(double k) const { return interp(std_errors, k); }

 private:
  double interp(const std::vector<double>& ys, double k) const {
    if (k_values.empty()) throw std::logic_error("CharacteristicCurve: empty curve");
    if (k <= k_values.front()) return ys.front();
    if (k >= k_values.back()) return ys.back();
    const auto it = std::upper_bound(k_values.begin(), k_values.end(), k);
    const size_t hi = static_cast<size_t>(it - k_values.begin());
    const double t = (k - k_values[hi - 1]) / (k_values[hi] - k_values[hi - 1]);
    return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
  }
};

/// G(k) = <e^(ikx)> estimated as the mean of cos(k x_j); the imaginary part of
/// a phase-independent state is pure noise and is left to the tests to check.
inline CharacteristicCurve empirical_characteristic(const QuadratureDataset& ds,
                                                    std::span<const double> k_values) {
  if (ds.samples.empty()) throw std::invalid_argument("empirical_characteristic: empty dataset");
  const double n = static_cast<double>(ds.samples.size());
  CharacteristicCurve curve;
  curve.k_values.assign(k_values.begin(), k_values.end());
  curve.g_values.resize(k_values.size());
  curve.std_errors.resize(k_values.size());
  for (size_t i = 0; i < k_values.size(); ++i) {
    const double k = k_values[i];
    double sum = 0.0, sum2 = 0.0;
    for (double x : ds.samples) {
      const double c = std::cos(k * x);
      sum += c;
      sum2 += c * c;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    curve.g_values[i] = mean;
    curve.std_errors[i] = std::sqrt(var / n);
  }
  return curve;
}

/// Vacuum characteristic function, e^(-k^2/8).
inline double vacuum_characteristic(double k) { return std::exp(-k * k / 8.0); }

/// Noise-free characteristic curve of a diagonal state,
/// G(k) = e^(-k^2/8) sum_n p_n L_n(k^2/4).
inline CharacteristicCurve analytic_characteristic(const FockDensityMatrix& rho,
                                                   std::span<const double> k_values) {
  if (!rho.is_diagonal())
    throw std::invalid_argument("analytic_characteristic: non-diagonal input unsupported");
  const RVector p = rho.populations();
  CharacteristicCurve curve;
  curve.k_values.assign(k_values.begin(), k_values.end());
  curve.g_values.resize(k_values.size());
  curve.std_errors.assign(k_values.size(), 0.0);
  for (size_t i = 0; i < k_values.size(); ++i) {
    const double k = curve.k_values[i];
    curve.g_values[i] =
        std::exp(-k * k / 8.0) * detail::laguerre_weighted_sum(p, k * k / 4.0);
  }
  return curve;
}

inline std::vector<double> uniform_k_grid(double k_max, double k_step) {
  if (k_max <= 0.0 || k_step <= 0.0 || k_step > k_max)
    throw std::invalid_argument("uniform_k_grid: bad grid parameters");
  std::vector<double> ks;
  const int n = static_cast<int>(std::round(k_max / k_step));
  ks.reserve(n + 1);
  for (int i = 0; i <= n; ++i) ks.push_back(i * k_step);
  return ks;
}

// ---------------------------------------------------------------------------
// Dataset files: CSV with header "x" plus a JSON sidecar {seed, count, state}.

inline std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const std::string stem =
      (dot == std::string::npos) ? csv_path : csv_path.substr(0, dot);
  return stem + ".json";
}

inline void write_dataset(const QuadratureDataset& ds, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + csv_path);
  out << "x\n";
  char line[64];
  for (double x : ds.samples) {
    std::snprintf(line, sizeof(line), "%.17g\n", x);
    out << line;
  }
  nlohmann::json meta;
  meta["seed"] = ds.seed;
  meta["count"] = ds.count();
  meta["state"] = ds.source ? ds.source->to_string() : "";
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("write_dataset: cannot open sidecar for " + csv_path);
  side << meta.dump(2) << "\n";
}

inline QuadratureDataset read_dataset(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + csv_path);
  std::string header;
  if (!std::getline(in, header) || header != "x")
    throw std::runtime_error("read_dataset: missing 'x' header in " + csv_path);
  QuadratureDataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      size_t pos = 0;
      const double v = std::stod(line, &pos);
      if (pos != line.size()) throw std::invalid_argument(line);
      if (!std::isfinite(v)) throw std::invalid_argument(line);
      ds.samples.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error("read_dataset: bad sample line '" + line + "'");
    }
  }
  if (ds.samples.empty()) throw std::runtime_error("read_dataset: no samples in " + csv_path);

  std::ifstream side(sidecar_path(csv_path));
  if (side) {
    nlohmann::json meta = nlohmann::json::parse(side, nullptr, true, true);
    ds.seed = meta.value("seed", 0ULL);
    const std::string state = meta.value("state", "");
    if (!state.empty()) ds.source = StateDescriptor::parse(state);
    const long count = meta.value("count", static_cast<long>(ds.samples.size()));
    if (count != ds.count())
      throw std::runtime_error("read_dataset: sample count disagrees with sidecar");
  }
  return ds;
}

}  // namespace spats
