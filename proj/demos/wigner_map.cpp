// Dump the Wigner function of a (possibly lossy) photon-added thermal state
// on the default phase-space grid.
//
//   ./wigner_map "spats(nbar=1.15, eta=0.62, dim=40)" wigner.csv

#include "spats/phasespace.hpp"
#include "spats/states.hpp"

#include <cstdio>

int main(int argc, char** argv) {
  const std::string descriptor = argc > 1 ? argv[1] : "spats(nbar=1.15, eta=0.62, dim=40)";
  const std::string out = argc > 2 ? argv[2] : "wigner.csv";
  try {
    const auto rho = spats::make_state(spats::StateDescriptor::parse(descriptor));
    const auto grid = spats::wigner_grid(rho);
    spats::write_grid_csv(grid, out);
    std::printf("%s  W(0) = %.6f  ->  %s\n", descriptor.c_str(),
                spats::wigner_origin(rho), out.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
