#pragma once

#include "spats/fock.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

// State constructors (thermal, Fock, photon-added thermal), the photon-addition
// map, the binomial loss channel, and the trigger-ratio estimate of the seed
// mean photon number.

namespace spats {

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Thermal state with mean photon number nbar, renormalized on the truncated
/// basis. The exact truncated tail (nbar/(1+nbar))^dim is recorded.
inline FockDensityMatrix thermal_state(double nbar, int dim) {
  if (nbar < 0.0) throw std::invalid_argument("thermal_state: nbar must be >= 0");
  if (dim < 2) throw std::invalid_argument("thermal_state: dim must be >= 2");
  RVector p(dim);
  const double x = nbar / (1.0 + nbar);
  double term = 1.0 - x;
  for (int n = 0; n < dim; ++n) {
    p[n] = term;
    term *= x;
  }
  const double tail = std::pow(x, dim);
  p /= p.sum();
  return FockDensityMatrix::diagonal(p, tail);
}

inline FockDensityMatrix fock_state(int n, int dim) {
  if (dim < 2) throw std::invalid_argument("fock_state: dim must be >= 2");
  if (n < 0 || n >= dim) throw std::invalid_argument("fock_state: n out of range");
  RVector p = RVector::Zero(dim);
  p[n] = 1.0;
  return FockDensityMatrix::diagonal(p, 0.0);
}

/// Conditional photon addition: rho -> adag rho a / Tr(adag rho a).
/// Requires headroom at the top of the basis so the shift loses nothing.
inline FockDensityMatrix add_photon(const FockDensityMatrix& rho) {
  const int d = rho.dim();
  if (d < 2) throw std::invalid_argument("add_photon: dim must be >= 2");
  if (rho.trace() <= 0.0) throw std::invalid_argument("add_photon: trace must be positive");
  if (rho.population(d - 1) >= 1e-8 || rho.population(d - 2) >= 1e-8)
    throw std::invalid_argument("add_photon: insufficient headroom at truncation");
  const CMatrix adag = annihilation_matrix(d).adjoint();
  CMatrix raised = adag * rho.elements() * adag.adjoint();
  const double norm = raised.trace().real();
  raised /= norm;
  // mass pushed past |dim-1> plus the rescaled incoming tail, as a bound
  const double tail = (rho.tail_mass_bound() * d + d * rho.population(d - 1)) / norm;
  return FockDensityMatrix(std::move(raised), tail);
}

/// Photon-added thermal state, closed form: p_n ∝ n (nbar/(1+nbar))^n.
/// nbar = 0 degenerates to the single-photon state.
inline FockDensityMatrix spats_state(double nbar, int dim) {
  if (nbar < 0.0) throw std::invalid_argument("spats_state: nbar must be >= 0");
  if (dim < 2) throw std::invalid_argument("spats_state: dim must be >= 2");
  if (nbar == 0.0) return fock_state(1, dim);
  const double x = nbar / (1.0 + nbar);
  RVector p(dim);
  p[0] = 0.0;
  double xpow = 1.0;  // x^(n-1)
  const double pref = (1.0 - x) * (1.0 - x);
  for (int n = 1; n < dim; ++n) {
    p[n] = pref * n * xpow;
    xpow *= x;
  }
  // exact tail of sum_{n>=dim} n x^n / (nbar(nbar+1)) = x^(dim-1) (dim(1-x)+x)
  const double tail = std::pow(x, dim - 1) * (dim * (1.0 - x) + x);
  p /= p.sum();
  return FockDensityMatrix::diagonal(p, tail);
}

/// Beam-splitter loss of transmittivity eta acting on a diagonal state:
/// binomial damping of the photon-number populations.
inline FockDensityMatrix loss_channel(const FockDensityMatrix& rho, double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("loss_channel: eta outside [0,1]");
  if (!rho.is_diagonal())
    throw std::invalid_argument("loss_channel: non-diagonal input unsupported");
  const int d = rho.dim();
  const RVector p = rho.populations();
  RVector out = RVector::Zero(d);
  for (int n = 0; n < d; ++n) {
    // w = C(m,n) eta^n (1-eta)^(m-n), advanced in m by a stable recurrence
    double w = std::pow(eta, n);
    for (int m = n; m < d; ++m) {
      out[n] += w * p[m];
      w *= (1.0 - eta) * (m + 1) / static_cast<double>(m + 1 - n);
    }
  }
  return FockDensityMatrix::diagonal(out, rho.tail_mass_bound());
}

/// Seed mean photon number from the idler count-rate ratio with the thermal
/// injection present vs blocked; the ratio is (1+nbar).
inline double mean_photon_from_trigger_ratio(double rate_injected, double rate_blocked) {
  if (rate_blocked <= 0.0 || rate_injected <= 0.0)
    throw std::invalid_argument("mean_photon_from_trigger_ratio: rates must be positive");
  const double ratio = rate_injected / rate_blocked;
  if (ratio < 1.0)
    throw std::invalid_argument("mean_photon_from_trigger_ratio: ratio below 1 implies negative nbar");
  return ratio - 1.0;
}

// ---------------------------------------------------------------------------
// StateDescriptor: the canonical text form used by the CLI and file sidecars,
// e.g. "spats(nbar=1.15, eta=0.62, dim=40)".

struct StateDescriptor {
  enum class Kind { vacuum, fock, thermal, spats };

  Kind kind = Kind::vacuum;
  int fock_n = 0;      // only for Kind::fock
  double nbar = 0.0;   // seed thermal mean photon number
  double eta = 1.0;    // overall efficiency
  int dim = 40;

  void validate() const {
    if (nbar < 0.0) throw std::invalid_argument("StateDescriptor: nbar must be >= 0");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("StateDescriptor: eta outside [0,1]");
    if (dim < 2) throw std::invalid_argument("StateDescriptor: dim must be >= 2");
    if (kind == Kind::fock && (fock_n < 0 || fock_n >= dim))
      throw std::invalid_argument("StateDescriptor: fock n out of range");
  }

  std::string to_string() const {
    using detail::format_double;
    std::string head;
    switch (kind) {
      case Kind::vacuum: head = "vacuum("; break;
      case Kind::fock: head = "fock(n=" + std::to_string(fock_n) + ", "; break;
      case Kind::thermal: head = "thermal(nbar=" + format_double(nbar) + ", "; break;
      case Kind::spats: head = "spats(nbar=" + format_double(nbar) + ", "; break;
    }
    return head + "eta=" + format_double(eta) + ", dim=" + std::to_string(dim) + ")";
  }

  static StateDescriptor parse(std::string_view text);
};

namespace detail {

inline std::string lower_nospace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

inline double parse_number(std::string_view s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(std::string("StateDescriptor: bad number for ") + what);
  return v;
}

}  // namespace detail

inline StateDescriptor StateDescriptor::parse(std::string_view text) {
  const std::string s = detail::lower_nospace(text);
  if (s.empty()) throw std::invalid_argument("StateDescriptor: empty text");

  StateDescriptor d;
  std::string_view body;
  std::string_view name = s;
  const auto open = s.find('(');
  if (open != std::string::npos) {
    if (s.back() != ')') throw std::invalid_argument("StateDescriptor: missing ')'");
    name = std::string_view(s).substr(0, open);
    body = std::string_view(s).substr(open + 1, s.size() - open - 2);
  }

  if (name == "vacuum") d.kind = Kind::vacuum;
  else if (name == "fock") d.kind = Kind::fock;
  else if (name == "thermal") d.kind = Kind::thermal;
  else if (name == "spats") d.kind = Kind::spats;
  else throw std::invalid_argument("StateDescriptor: unknown state kind '" + std::string(name) + "'");

  bool saw_positional = false;
  while (!body.empty()) {
    const auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    body = (comma == std::string_view::npos) ? std::string_view{} : body.substr(comma + 1);
    if (item.empty()) continue;

    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      // bare first value: n for fock, nbar otherwise
      if (saw_positional) throw std::invalid_argument("StateDescriptor: unexpected bare value");
      saw_positional = true;
      if (d.kind == Kind::fock)
        d.fock_n = static_cast<int>(detail::parse_number(item, "n"));
      else
        d.nbar = detail::parse_number(item, "nbar");
      continue;
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view val = item.substr(eq + 1);
    if (key == "nbar") d.nbar = detail::parse_number(val, "nbar");
    else if (key == "n") {
      if (d.kind == Kind::fock) d.fock_n = static_cast<int>(detail::parse_number(val, "n"));
      else d.nbar = detail::parse_number(val, "nbar");
    } else if (key == "eta") d.eta = detail::parse_number(val, "eta");
    else if (key == "dim") d.dim = static_cast<int>(detail::parse_number(val, "dim"));
    else throw std::invalid_argument("StateDescriptor: unknown key '" + std::string(key) + "'");
  }

  d.validate();
  return d;
}

/// Build the (possibly lossy) state a descriptor names.
inline FockDensityMatrix make_state(const StateDescriptor& d) {
  d.validate();
  FockDensityMatrix rho = [&] {
    switch (d.kind) {
      case StateDescriptor::Kind::vacuum: return fock_state(0, d.dim);
      case StateDescriptor::Kind::fock: return fock_state(d.fock_n, d.dim);
      case StateDescriptor::Kind::thermal: return thermal_state(d.nbar, d.dim);
      case StateDescriptor::Kind::spats: return spats_state(d.nbar, d.dim);
    }
    throw std::logic_error("unreachable");
  }();
  if (d.eta < 1.0) rho = loss_channel(rho, d.eta);
  return rho;
}

}  // namespace spats
