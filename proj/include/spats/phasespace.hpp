#pragma once

#include "spats/fock.hpp"
#include "spats/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// P and Wigner functions of photon-added thermal states: the closed forms and
// a Laguerre-series evaluation from any diagonal density matrix, used to
// cross-check the closed forms and to map reconstructed states.

namespace spats {

inline constexpr double two_over_pi = 2.0 / std::numbers::pi;

/// Glauber-Sudarshan P function of the ideal photon-added thermal state,
/// P(alpha) = [(1+nbar)|alpha|^2 - nbar] e^(-|alpha|^2/nbar) / (pi nbar^3).
inline double p_function_spats(double nbar, Complex alpha) {
  if (nbar <= 0.0) throw std::invalid_argument("p_function_spats: nbar must be > 0");
  const double a2 = std::norm(alpha);
  return ((1.0 + nbar) * a2 - nbar) * std::exp(-a2 / nbar) / (std::numbers::pi * nbar * nbar * nbar);
}

/// Wigner function of the ideal photon-added thermal state.
inline double wigner_spats_ideal(double nbar, Complex alpha) {
  if (nbar < 0.0) throw std::invalid_argument("wigner_spats_ideal: nbar must be >= 0");
  const double a2 = std::norm(alpha);
  const double s = 1.0 + 2.0 * nbar;
  return two_over_pi * (4.0 * a2 * (1.0 + nbar) - s) / (s * s * s) * std::exp(-2.0 * a2 / s);
}

/// Wigner function of the photon-added thermal state detected at efficiency eta.
inline double wigner_spats_lossy(double nbar, double eta, Complex alpha) {
  if (nbar < 0.0) throw std::invalid_argument("wigner_spats_lossy: nbar must be >= 0");
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("wigner_spats_lossy: eta outside [0,1]");
  const double a2 = std::norm(alpha);
  const double s = 1.0 + 2.0 * nbar * eta;
  const double num = 1.0 + 2.0 * eta * (nbar + 2.0 * (1.0 + nbar) * a2 - 2.0 * nbar * eta - 1.0);
  return two_over_pi * num / (s * s * s) * std::exp(-2.0 * a2 / s);
}

namespace detail {

/// sum_n c_n L_n(z) by the three-term recurrence
/// (n+1) L_{n+1} = (2n+1-z) L_n - n L_{n-1}.
inline double laguerre_weighted_sum(const RVector& c, double z) {
  const int count = static_cast<int>(c.size());
  double lm1 = 0.0, l = 1.0;  // L_{-1}, L_0
  double acc = c[0] * l;
  for (int n = 1; n < count; ++n) {
    const double lp1 = ((2.0 * (n - 1) + 1.0 - z) * l - (n - 1) * lm1) / n;
    lm1 = l;
    l = lp1;
    acc += c[n] * l;
  }
  return acc;
}

}  // namespace detail

/// Laguerre-series Wigner transform of a diagonal state:
/// W(alpha) = (2/pi) e^(-2|alpha|^2) sum_n p_n (-1)^n L_n(4|alpha|^2).
inline double wigner_from_diagonal(const FockDensityMatrix& rho, Complex alpha) {
  if (!rho.is_diagonal())
    throw std::invalid_argument("wigner_from_diagonal: non-diagonal input unsupported");
  const double a2 = std::norm(alpha);
  RVector c = rho.populations();
  for (int n = 1; n < c.size(); n += 2) c[n] = -c[n];
  return two_over_pi * std::exp(-2.0 * a2) * detail::laguerre_weighted_sum(c, 4.0 * a2);
}

/// W(0) = (2/pi) sum_n (-1)^n p_n, the parity expectation.
inline double wigner_origin(const FockDensityMatrix& rho) {
  if (!rho.is_diagonal())
    throw std::invalid_argument("wigner_origin: non-diagonal input unsupported");
  double parity = 0.0;
  for (int n = 0; n < rho.dim(); ++n) parity += (n % 2 == 0 ? 1.0 : -1.0) * rho.population(n);
  return two_over_pi * parity;
}

struct PhaseSpaceGrid {
  std::vector<double> x_values;
  std::vector<double> y_values;
  RMatrix values;  // values(i,j) at (x_values[i], y_values[j])
};

/// Wigner map of a diagonal state over [x0,x1]x[y0,y1]; rows run over x.
/// Grid points are independent, so rows are evaluated in parallel.
inline PhaseSpaceGrid wigner_grid(const FockDensityMatrix& rho, double x0 = -3.0,
                                  double x1 = 3.0, int nx = 121, double y0 = -3.0,
                                  double y1 = 3.0, int ny = 121) {
  if (nx < 2 || ny < 2 || x1 <= x0 || y1 <= y0)
    throw std::invalid_argument("wigner_grid: bad grid bounds");
  PhaseSpaceGrid g;
  g.x_values.resize(nx);
  g.y_values.resize(ny);
  for (int i = 0; i < nx; ++i) g.x_values[i] = x0 + (x1 - x0) * i / (nx - 1);
  for (int j = 0; j < ny; ++j) g.y_values[j] = y0 + (y1 - y0) * j / (ny - 1);
  g.values.resize(nx, ny);
  parallel_for(nx, [&](long i) {
    for (int j = 0; j < ny; ++j)
      g.values(i, j) = wigner_from_diagonal(rho, Complex(g.x_values[i], g.y_values[j]));
  });
  return g;
}

/// CSV export: header "x,y,w", row-major, 9 significant digits.
inline void write_grid_csv(const PhaseSpaceGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
  out << "x,y,w\n";
  char line[128];
  for (size_t i = 0; i < g.x_values.size(); ++i)
    for (size_t j = 0; j < g.y_values.size(); ++j) {
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", g.x_values[i], g.y_values[j],
                    g.values(static_cast<long>(i), static_cast<long>(j)));
      out << line;
    }
}

}  // namespace spats
