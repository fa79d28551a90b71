#include <catch2/catch_amalgamated.hpp>

#include "spats/phasespace.hpp"
#include "spats/states.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace spats;

namespace {

// Midpoint rule over [lo,hi]^2; spectrally accurate for the smooth decaying
// integrands here, so the box truncation dominates the error.
template <typename F>
double integrate_plane(F&& f, double lo = -6.0, double hi = 6.0, int n = 481) {
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      const double y = lo + (j + 0.5) * h;
      acc += f(Complex(x, y));
    }
  }
  return acc * h * h;
}

}  // namespace

TEST_CASE("P function of the photon-added thermal state") {
  for (double nbar : {0.5, 1.0, 2.0}) {
    CHECK(p_function_spats(nbar, Complex(0.0, 0.0)) ==
          Catch::Approx(-1.0 / (std::numbers::pi * nbar * nbar)).epsilon(1e-12));

    // root of the bracket at |alpha|^2 = nbar/(1+nbar)
    const double r = std::sqrt(nbar / (1.0 + nbar));
    CHECK(std::abs(p_function_spats(nbar, Complex(r, 0.0))) < 1e-12);
    CHECK(p_function_spats(nbar, Complex(r * 0.9, 0.0)) < 0.0);
    CHECK(p_function_spats(nbar, Complex(r * 1.1, 0.0)) > 0.0);

    const double total = integrate_plane([&](Complex a) { return p_function_spats(nbar, a); });
    CHECK(total == Catch::Approx(1.0).margin(1e-6));
  }
  CHECK_THROWS_AS(p_function_spats(0.0, Complex(0.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(p_function_spats(-1.0, Complex(0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("ideal Wigner function") {
  CHECK(wigner_spats_ideal(0.0, Complex(0.0, 0.0)) ==
        Catch::Approx(-two_over_pi).epsilon(1e-14));
  for (double nbar : {0.0, 0.5, 1.15, 2.0}) {
    CHECK(wigner_spats_ideal(nbar, Complex(0.0, 0.0)) ==
          Catch::Approx(-two_over_pi / ((1 + 2 * nbar) * (1 + 2 * nbar))).epsilon(1e-12));
  }
  for (double nbar : {0.0, 0.5, 1.15}) {
    const double total = integrate_plane([&](Complex a) { return wigner_spats_ideal(nbar, a); });
    CHECK(total == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("lossy Wigner function and the 50% threshold") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> un(0.0, 2.0);
  for (int t = 0; t < 25; ++t) {
    const Complex a(u(gen), u(gen));
    const double nbar = un(gen);
    CHECK(wigner_spats_lossy(nbar, 1.0, a) ==
          Catch::Approx(wigner_spats_ideal(nbar, a)).margin(1e-14));
  }

  CHECK(wigner_spats_lossy(0.0, 0.62, Complex(0.0, 0.0)) ==
        Catch::Approx(-0.24 * two_over_pi).epsilon(1e-12));

  for (double nbar : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    CHECK(std::abs(wigner_spats_lossy(nbar, 0.5, Complex(0.0, 0.0))) < 1e-12);
    CHECK(wigner_spats_lossy(nbar, 0.51, Complex(0.0, 0.0)) < 0.0);
    CHECK(wigner_spats_lossy(nbar, 0.49, Complex(0.0, 0.0)) > 0.0);
  }

  const double total =
      integrate_plane([&](Complex a) { return wigner_spats_lossy(1.15, 0.62, a); });
  CHECK(total == Catch::Approx(1.0).margin(1e-6));

  CHECK_THROWS_AS(wigner_spats_lossy(1.0, 1.3, Complex(0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("series Wigner transform at special points") {
  CHECK(wigner_from_diagonal(fock_state(0, 20), Complex(0.0, 0.0)) ==
        Catch::Approx(two_over_pi).epsilon(1e-14));
  CHECK(wigner_from_diagonal(fock_state(1, 20), Complex(0.0, 0.0)) ==
        Catch::Approx(-two_over_pi).epsilon(1e-14));
  CHECK(wigner_from_diagonal(loss_channel(spats_state(1.15, 60), 0.62), Complex(0.0, 0.0)) ==
        Catch::Approx(wigner_spats_lossy(1.15, 0.62, Complex(0.0, 0.0))).margin(1e-6));

  CMatrix coh = CMatrix::Zero(3, 3);
  coh(0, 0) = coh(1, 1) = 0.5;
  coh(0, 1) = coh(1, 0) = 0.3;
  CHECK_THROWS_AS(wigner_from_diagonal(FockDensityMatrix(coh, 0.0), Complex(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("series and closed forms agree across random states and points") {
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> un(0.0, 2.0);
  std::uniform_real_distribution<double> ue(0.0, 1.0);
  std::uniform_real_distribution<double> ur(0.0, 3.0);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * std::numbers::pi);
  for (int t = 0; t < 50; ++t) {
    const double nbar = un(gen), eta = ue(gen), r = ur(gen), phi = uphi(gen);
    const Complex a = std::polar(r, phi);
    const FockDensityMatrix rho = loss_channel(spats_state(nbar, 60), eta);
    CHECK(wigner_from_diagonal(rho, a) ==
          Catch::Approx(wigner_spats_lossy(nbar, eta, a)).margin(1e-6));
  }
}

TEST_CASE("Wigner value at the origin is the parity expectation") {
  CHECK(wigner_origin(fock_state(0, 10)) == Catch::Approx(two_over_pi).epsilon(1e-14));
  CHECK(wigner_origin(loss_channel(fock_state(1, 10), 0.62)) ==
        Catch::Approx(-0.24 * two_over_pi).epsilon(1e-12));
  for (double nbar : {0.3, 1.0, 2.0}) {
    CHECK(wigner_origin(thermal_state(nbar, 60)) ==
          Catch::Approx(two_over_pi / (1.0 + 2.0 * nbar)).margin(1e-9));
  }
}

TEST_CASE("origin negativity appears exactly above 50% efficiency") {
  for (double nbar : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const FockDensityMatrix ideal = spats_state(nbar, 60);
    for (double eta : {0.1, 0.3, 0.49}) CHECK(wigner_origin(loss_channel(ideal, eta)) > 0.0);
    for (double eta : {0.51, 0.7, 0.9, 1.0}) CHECK(wigner_origin(loss_channel(ideal, eta)) < 0.0);
    CHECK(std::abs(wigner_origin(loss_channel(ideal, 0.5))) < 1e-9);
  }
}

TEST_CASE("Wigner values never exceed the parity bound") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> ua(-3.0, 3.0);
  for (int t = 0; t < 30; ++t) {
    RVector p(25);
    for (int i = 0; i < 25; ++i) p[i] = u(gen);
    p /= p.sum();
    const FockDensityMatrix rho = FockDensityMatrix::diagonal(p, 0.0);
    const Complex a(ua(gen), ua(gen));
    CHECK(std::abs(wigner_from_diagonal(rho, a)) <= two_over_pi + 1e-12);
  }
}

TEST_CASE("grid evaluation and CSV export") {
  const FockDensityMatrix rho = loss_channel(spats_state(0.5, 40), 0.62);
  const PhaseSpaceGrid g = wigner_grid(rho);
  REQUIRE(g.x_values.size() == 121);
  REQUIRE(g.y_values.size() == 121);
  CHECK(g.x_values.front() == Catch::Approx(-3.0));
  CHECK(g.x_values.back() == Catch::Approx(3.0));
  for (size_t i = 1; i < g.x_values.size(); ++i) CHECK(g.x_values[i] > g.x_values[i - 1]);
  CHECK(g.values.allFinite());
  CHECK(g.values(60, 60) == Catch::Approx(wigner_from_diagonal(rho, Complex(0.0, 0.0))));

  const auto path = std::filesystem::temp_directory_path() / "spats_grid_test.csv";
  write_grid_csv(g, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,w");
  long rows = 0;
  std::string line;
  double first_w = 0.0;
  while (std::getline(in, line)) {
    if (rows == 0) {
      const auto second_comma = line.rfind(',');
      first_w = std::stod(line.substr(second_comma + 1));
    }
    ++rows;
  }
  CHECK(rows == 121 * 121);
  CHECK(first_w == Catch::Approx(g.values(0, 0)).epsilon(1e-8));
  std::filesystem::remove(path);
}
