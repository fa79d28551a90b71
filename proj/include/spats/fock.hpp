#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

// Truncated Fock-space linear algebra: ladder operators, density matrices,
// partial transpose, Hermitian spectra and trace norms. Everything here is a
// pure function over immutable value types.

namespace spats {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermiticity = 1e-10;
inline constexpr double diagonality = 1e-12;
inline constexpr double trace_unit = 1e-9;
inline constexpr double positivity = -1e-10;
inline constexpr double cli_tail_mass = 1e-6;
}  // namespace tol

/// Annihilation operator on {|0>,...,|dim-1>}: entry (n-1,n) = sqrt(n).
inline CMatrix annihilation_matrix(int dim) {
  if (dim < 2) throw std::invalid_argument("annihilation_matrix: dim must be >= 2");
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline bool is_hermitian(const CMatrix& m, double eps = tol::hermiticity) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= eps * scale;
}

// Single-mode density operator on the truncated basis {|0>,...,|dim-1>}.
// tail_mass_bound carries an upper bound on the probability lost to truncation.
class FockDensityMatrix {
 public:
  FockDensityMatrix(CMatrix elements, double tail_mass_bound)
      : elements_(std::move(elements)), tail_mass_bound_(tail_mass_bound) {
    if (elements_.rows() != elements_.cols() || elements_.rows() < 1)
      throw std::invalid_argument("FockDensityMatrix: elements must be square");
    if (tail_mass_bound_ < 0.0)
      throw std::invalid_argument("FockDensityMatrix: negative tail mass bound");
    if (!is_hermitian(elements_, 1e-12))
      throw std::invalid_argument("FockDensityMatrix: elements not Hermitian");
    // store the Hermitian part so element(m,n) == conj(element(n,m)) exactly
    elements_ = ((elements_ + elements_.adjoint()) / 2.0).eval();
  }

  static FockDensityMatrix diagonal(const RVector& populations, double tail_mass_bound) {
    CMatrix m = CMatrix::Zero(populations.size(), populations.size());
    m.diagonal() = populations.cast<Complex>();
    return FockDensityMatrix(std::move(m), tail_mass_bound);
  }

  int dim() const { return static_cast<int>(elements_.rows()); }
  const CMatrix& elements() const { return elements_; }
  double tail_mass_bound() const { return tail_mass_bound_; }

  double trace() const { return elements_.trace().real(); }

  double population(int n) const { return elements_(n, n).real(); }

  RVector populations() const { return elements_.diagonal().real(); }

  double mean_photon() const {
    double s = 0.0;
    for (int n = 0; n < dim(); ++n) s += n * population(n);
    return s;
  }

  bool is_diagonal(double eps = tol::diagonality) const {
    CMatrix off = elements_;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() <= eps;
  }

  /// Throws unless Hermitian, unit trace, positive within tolerance and with
  /// an acceptable truncation tail. Used to gate states entering the CLI.
  void validate() const;

 private:
  CMatrix elements_;
  double tail_mass_bound_;
};

// Bipartite density operator; composite index i = m*dim_per_mode + n for |m>_A |n>_B.
class TwoModeDensityMatrix {
 public:
  TwoModeDensityMatrix(int dim_per_mode, CMatrix elements)
      : dim_per_mode_(dim_per_mode), elements_(std::move(elements)) {
    const long d2 = static_cast<long>(dim_per_mode_) * dim_per_mode_;
    if (dim_per_mode_ < 1 || elements_.rows() != d2 || elements_.cols() != d2)
      throw std::invalid_argument("TwoModeDensityMatrix: bad dimensions");
    if (!is_hermitian(elements_, 1e-12))
      throw std::invalid_argument("TwoModeDensityMatrix: elements not Hermitian");
    elements_ = ((elements_ + elements_.adjoint()) / 2.0).eval();
  }

  int dim_per_mode() const { return dim_per_mode_; }
  const CMatrix& elements() const { return elements_; }
  double trace() const { return elements_.trace().real(); }

 private:
  int dim_per_mode_;
  CMatrix elements_;
};

/// Transpose on mode A: output((m,n),(m',n')) = input((m',n),(m,n')).
inline CMatrix partial_transpose(const TwoModeDensityMatrix& rho2) {
  const int d = rho2.dim_per_mode();
  const CMatrix& in = rho2.elements();
  CMatrix out(in.rows(), in.cols());
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      for (int mp = 0; mp < d; ++mp)
        for (int np = 0; np < d; ++np)
          out(m * d + n, mp * d + np) = in(mp * d + n, m * d + np);
  return out;
}

struct EigenSystem {
  RVector values;   // descending
  CMatrix vectors;  // columns ordered to match values
};

/// Full Hermitian eigendecomposition, eigenvalues descending.
inline EigenSystem eigen_hermitian(const CMatrix& m) {
  if (!is_hermitian(m))
    throw std::invalid_argument("eigen_hermitian: input not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigen_hermitian: eigensolver failed to converge");
  EigenSystem sys;
  sys.values = solver.eigenvalues().reverse();
  sys.vectors = solver.eigenvectors().rowwise().reverse();
  return sys;
}

inline RVector eigenvalues_hermitian(const CMatrix& m) {
  if (!is_hermitian(m))
    throw std::invalid_argument("eigenvalues_hermitian: input not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigenvalues_hermitian: eigensolver failed to converge");
  return solver.eigenvalues().reverse();
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const CMatrix& m) {
  if (m.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return eigenvalues_hermitian(m).cwiseAbs().sum();
}

inline void FockDensityMatrix::validate() const {
  if (std::abs(trace() - 1.0) > tol::trace_unit)
    throw std::invalid_argument("FockDensityMatrix: trace deviates from 1 beyond 1e-9");
  if (eigenvalues_hermitian(elements_).minCoeff() < tol::positivity)
    throw std::invalid_argument("FockDensityMatrix: negative eigenvalue beyond tolerance");
  if (tail_mass_bound_ >= tol::cli_tail_mass)
    throw std::invalid_argument("FockDensityMatrix: truncation tail mass too large");
}

}  // namespace spats
