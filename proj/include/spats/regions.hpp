#pragma once

#include "spats/criteria.hpp"
#include "spats/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Classification maps over (nbar, eta): where each tomographic criterion calls
// the detected state classical, nonclassical-but-noise-masked (grey), or
// measurably nonclassical (black).

namespace spats {

enum class RegionLabel { classical, grey, black };

inline const char* to_string(RegionLabel l) {
  switch (l) {
    case RegionLabel::classical: return "classical";
    case RegionLabel::grey: return "grey";
    case RegionLabel::black: return "black";
  }
  return "?";
}

struct NoiseConfig {
  long samples = 100000;
  int resamples = 50;
  double sigma_threshold = 3.0;
  bool fast = false;  // analytic error propagation instead of the Monte Carlo reference
  std::uint64_t seed = 1;
  int state_dim = 40;
  int ep_dim = 18;
  // Histogram likelihood plus an early-stopped EM: the indicator means settle
  // within a few hundred iterations, after which only the weakly identified
  // parity direction keeps diffusing and inflates the W(0) spread.
  TomographyConfig tomography{.dim = 25, .tol = 1e-9, .max_iter = 400, .bins = 4096};

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["resamples"] = resamples;
    j["sigma_threshold"] = sigma_threshold;
    j["fast"] = fast;
    j["seed"] = seed;
    j["state_dim"] = state_dim;
    j["ep_dim"] = ep_dim;
    j["tomography"] = {{"dim", tomography.dim},
                       {"tol", tomography.tol},
                       {"max_iter", tomography.max_iter},
                       {"bins", tomography.bins}};
    return j;
  }
};

struct GridSpec {
  double nbar_min = 0.0;
  double nbar_max = 4.0;
  int nbar_steps = 21;
  double eta_min = 0.0;
  double eta_max = 1.0;
  int eta_steps = 21;
};

struct RegionMap {
  std::vector<double> nbar_grid;
  std::vector<double> eta_grid;
  std::vector<std::vector<RegionLabel>> labels;  // labels[i][j] at (nbar_i, eta_j)
  Criterion criterion{};
  NoiseConfig noise;
};

namespace detail {

inline void require_map_criterion(Criterion c) {
  if (c == Criterion::rv1 || c == Criterion::rv2)
    throw std::invalid_argument(
        "region maps cover wigner0, klyshko and ep only; the rv criteria "
        "compare whole curves and have no per-cell indicator");
}

inline FockDensityMatrix model_state(double nbar, double eta, int dim) {
  return loss_channel(spats_state(nbar, dim), eta);
}

inline double indicator_of(Criterion c, const RVector& p, int ep_dim) {
  switch (c) {
    case Criterion::wigner0: {
      double parity = 0.0;
      for (long n = 0; n < p.size(); ++n) parity += (n % 2 == 0 ? 1.0 : -1.0) * p[n];
      return two_over_pi * parity;
    }
    case Criterion::klyshko:
      return klyshko_indicator(p, 0);
    case Criterion::ep:
      return ep_value(FockDensityMatrix::diagonal(p, 0.0), ep_dim);
    default:
      throw std::invalid_argument("indicator_of: unsupported criterion");
  }
}

/// Model populations folded into the reconstruction window, as an estimator
/// of what tomography at that dimension would report.
inline RVector truncated_model_populations(double nbar, double eta, const NoiseConfig& cfg) {
  const RVector p = model_state(nbar, eta, cfg.state_dim).populations();
  const int d = std::min<int>(cfg.tomography.dim, static_cast<int>(p.size()));
  RVector head = p.head(d);
  head /= head.sum();
  return head;
}

/// Gradient of the indicator with respect to the populations.
inline RVector indicator_gradient(Criterion c, const RVector& p, int ep_dim) {
  const long d = p.size();
  RVector g = RVector::Zero(d);
  switch (c) {
    case Criterion::wigner0:
      for (long n = 0; n < d; ++n) g[n] = two_over_pi * (n % 2 == 0 ? 1.0 : -1.0);
      return g;
    case Criterion::klyshko:
      g[0] = 2.0 * p[2];
      g[1] = -2.0 * p[1];
      g[2] = 2.0 * p[0];
      return g;
    case Criterion::ep: {
      // d||A||_1 = Tr(sign(A) dA) through the beam splitter and the partial
      // transpose, which is self-adjoint for the Hilbert-Schmidt pairing.
      const int dm = std::min<int>(ep_dim, static_cast<int>(d));
      RVector head = p.head(dm);
      const double kept = head.sum();
      head /= kept;
      const auto rho2 = beamsplitter_with_vacuum(FockDensityMatrix::diagonal(head, 0.0), dm);
      const CMatrix pt = partial_transpose(rho2);
      const EigenSystem sys = eigen_hermitian(pt);
      CMatrix sign = CMatrix::Zero(pt.rows(), pt.cols());
      for (long i = 0; i < sys.values.size(); ++i)
        sign += (sys.values[i] >= 0.0 ? 1.0 : -1.0) * sys.vectors.col(i) *
                sys.vectors.col(i).adjoint();
      const TwoModeDensityMatrix sign2(dm, ((sign + sign.adjoint()) / 2.0).eval());
      const CMatrix pt_sign = partial_transpose(sign2);
      const double tn = sys.values.cwiseAbs().sum();
      std::vector<double> amp(dm);
      for (int n = 0; n < dm; ++n) {
        amp[0] = std::pow(0.5, 0.5 * n);
        for (int k = 0; k < n; ++k) amp[k + 1] = amp[k] * std::sqrt((n - k) / (k + 1.0));
        Complex acc = 0.0;
        for (int a = 0; a <= n; ++a)
          for (int b = 0; b <= n; ++b)
            acc += amp[a] * amp[b] * pt_sign(a * dm + (n - a), b * dm + (n - b));
        g[n] = acc.real() / (tn * std::numbers::ln2);
      }
      return g;
    }
    default:
      throw std::invalid_argument("indicator_gradient: unsupported criterion");
  }
}

}  // namespace detail

/// Statistical spread of the reconstructed indicator. The reference path
/// simulates `resamples` experiments end to end; the fast path propagates the
/// multinomial population covariance through the indicator gradient.
inline double noise_sigma(Criterion criterion, double nbar, double eta,
                          const NoiseConfig& cfg) {
  detail::require_map_criterion(criterion);
  if (cfg.samples < 1000) throw std::invalid_argument("noise_sigma: need N >= 1e3");
  if (nbar < 0.0 || eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("noise_sigma: invalid (nbar, eta)");

  if (cfg.fast) {
    const RVector p = detail::truncated_model_populations(nbar, eta, cfg);
    const RVector g = detail::indicator_gradient(criterion, p, cfg.ep_dim);
    const double gp = g.dot(p.cwiseProduct(g).matrix());  // sum g^2 p
    const double gbar = g.dot(p);
    const double var = (gp - gbar * gbar) / static_cast<double>(cfg.samples);
    return std::sqrt(std::max(0.0, var));
  }

  const FockDensityMatrix rho = detail::model_state(nbar, eta, cfg.state_dim);
  std::vector<double> values(cfg.resamples);
  for (int r = 0; r < cfg.resamples; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const QuadratureDataset ds = sample_quadratures(rho, cfg.samples, s);
    const DiagonalEstimate est = maxlik_diagonal(ds, cfg.tomography);
    values[r] = detail::indicator_of(criterion, est.probabilities, cfg.ep_dim);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= cfg.resamples;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (cfg.resamples - 1));
}

/// One cell of the map: classical when the ideal indicator fails the
/// inequality, grey when it passes but drowns in reconstruction noise.
inline RegionLabel classify_cell(double nbar, double eta, Criterion criterion,
                                 const NoiseConfig& cfg) {
  detail::require_map_criterion(criterion);
  if (nbar < 0.0 || eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("classify_cell: invalid (nbar, eta)");
  const RVector p = detail::model_state(nbar, eta, cfg.state_dim).populations();
  const double indicator = detail::indicator_of(criterion, p, cfg.ep_dim);
  const bool holds = (criterion == Criterion::ep) ? indicator > 1e-9 : indicator < 0.0;
  if (!holds) return RegionLabel::classical;
  const double sigma = noise_sigma(criterion, nbar, eta, cfg);
  if (std::abs(indicator) < cfg.sigma_threshold * sigma) return RegionLabel::grey;
  return RegionLabel::black;
}

/// Cell-wise classification over the grid; cells run in parallel on seeds
/// derived from (map seed, cell index), so the thread count never changes the
/// result.
inline RegionMap region_map(const GridSpec& grid, Criterion criterion, const NoiseConfig& cfg) {
  detail::require_map_criterion(criterion);
  if (grid.nbar_steps < 1 || grid.eta_steps < 1)
    throw std::invalid_argument("region_map: empty grid");
  RegionMap map;
  map.criterion = criterion;
  map.noise = cfg;
  map.nbar_grid.resize(grid.nbar_steps);
  map.eta_grid.resize(grid.eta_steps);
  for (int i = 0; i < grid.nbar_steps; ++i)
    map.nbar_grid[i] = grid.nbar_steps == 1
                           ? grid.nbar_min
                           : grid.nbar_min + (grid.nbar_max - grid.nbar_min) * i /
                                                 (grid.nbar_steps - 1);
  for (int j = 0; j < grid.eta_steps; ++j)
    map.eta_grid[j] = grid.eta_steps == 1
                          ? grid.eta_min
                          : grid.eta_min + (grid.eta_max - grid.eta_min) * j /
                                               (grid.eta_steps - 1);
  map.labels.assign(grid.nbar_steps, std::vector<RegionLabel>(grid.eta_steps));
  const long cells = static_cast<long>(grid.nbar_steps) * grid.eta_steps;
  parallel_for(cells, [&](long c) {
    const int i = static_cast<int>(c / grid.eta_steps);
    const int j = static_cast<int>(c % grid.eta_steps);
    NoiseConfig cell_cfg = cfg;
    cell_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c));
    map.labels[i][j] = classify_cell(map.nbar_grid[i], map.eta_grid[j], criterion, cell_cfg);
  });
  return map;
}

/// CSV export (header "nbar,eta,label") plus a JSON sidecar with the noise
/// configuration.
inline void write_region_map(const RegionMap& map, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("write_region_map: cannot open " + csv_path);
  out << "nbar,eta,label\n";
  char buf[96];
  for (size_t i = 0; i < map.nbar_grid.size(); ++i)
    for (size_t j = 0; j < map.eta_grid.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%s\n", map.nbar_grid[i], map.eta_grid[j],
                    to_string(map.labels[i][j]));
      out << buf;
    }
  nlohmann::json side;
  side["criterion"] = to_string(map.criterion);
  side["noise_config"] = map.noise.to_json();
  std::ofstream sj(sidecar_path(csv_path));
  if (!sj) throw std::runtime_error("write_region_map: cannot open sidecar");
  sj << side.dump(2) << "\n";
}

}  // namespace spats
