// Thermalizes a two-unit ferromagnet and compares the sampled statistics
// against the exact Gibbs oracle.
#include <iostream>

#include "qabom/qabom.hpp"

int main() {
  using namespace qabom;

  IsingModel model = IsingModel::restricted(1, 1);
  model.set_coupling(0, 1, 1.0);
  const CostHamiltonian hamiltonian(model, CostVariant::Full);
  const GibbsDistribution gibbs = gibbs_oracle(hamiltonian, 1.0);

  ThermalizeConfig cfg;
  cfg.beta = 1.0;
  cfg.pulses = 3;
  cfg.shots = 500;
  cfg.opt_iterations = 100;

  RngStream rng(42);
  const auto result = thermalize(model, CostVariant::Full, cfg, rng, /*want_exact=*/true);

  std::cout << "initial <H>: " << initial_state_energy(model, CostVariant::Full, cfg.beta) << "\n";
  std::cout << "final   <H>: " << result.estimates.energy_exact << " (estimate "
            << result.estimates.energy << ")\n";
  std::cout << "gibbs   <H>: " << gibbs.expectation_energy() << "\n";
  std::cout << "final <Z0 Z1>: " << result.estimates.edge_zz.at({0, 1})
            << "   gibbs: " << gibbs.expectation_zz(0, 1) << "\n";
  return 0;
}
