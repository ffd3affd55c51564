// Trains a small 2x1 network on a two-mode dataset for a few epochs and
// prints the KL trace.
#include <iostream>

#include "qabom/qabom.hpp"

int main() {
  using namespace qabom;

  HiddenModeParams modes;
  modes.n_bits = 2;
  modes.modes = {0b00, 0b11};
  modes.stay_p = 0.95;
  RngStream data_rng(7);
  const Dataset dataset = hidden_mode_sample(modes, 12, data_rng);

  TrainConfig cfg;
  cfg.n_visible = 2;
  cfg.n_hidden = 1;
  cfg.epochs = 8;
  cfg.shots = 300;
  cfg.opt_iterations = 40;
  cfg.seed = 3;

  const TrainHistory history = train(cfg, dataset);
  for (const auto& rec : history.epochs)
    std::cout << "epoch " << rec.epoch << "  KL " << rec.kl << "\n";
  return 0;
}
