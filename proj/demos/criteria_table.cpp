// Print the noise-free nonclassicality indicators of the lossy model state
// across a range of seed temperatures: W(0), B(0) and the entanglement
// potential, as in the summary figures.

#include "spats/criteria.hpp"

#include <cstdio>

int main(int argc, char** argv) {
  const double eta = argc > 1 ? std::atof(argv[1]) : 0.62;
  std::printf("eta = %.2f\n", eta);
  std::printf("%6s %12s %12s %12s\n", "nbar", "W(0)", "B(0)", "EP");
  for (double nbar = 0.0; nbar <= 3.01; nbar += 0.25) {
    const auto rho = spats::loss_channel(spats::spats_state(nbar, 40), eta);
    std::printf("%6.2f %12.6f %12.6f %12.6f\n", nbar, spats::wigner_origin(rho),
                spats::klyshko_indicator(rho.populations(), 0),
                spats::ep_value(rho, 26));
  }
  return 0;
}
