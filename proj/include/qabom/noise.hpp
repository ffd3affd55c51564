// Per-gate depolarizing noise: each application puts X, Y or Z on a target
// with probability p each, identity with 1-3p. The statevector backend
// samples one Pauli per target per gate (trajectory unraveling); the exact
// channel lives in the density-matrix backend.
#pragma once

#include <stdexcept>

#include "qabom/rng.hpp"
#include "qabom/state.hpp"

namespace qabom {

struct NoiseModel {
  double p = 0.0;           // per-Pauli error probability, in [0, 1/4]
  bool noisy_prep = false;  // also attach the channel to preparation gates

  void validate() const {
    if (!(p >= 0.0 && p <= 0.25))
      throw std::invalid_argument("NoiseModel: p must lie in [0, 1/4]");
  }
  bool enabled() const { return p > 0.0; }
};

inline double average_gate_fidelity_1q(double p) { return 1.0 - 2.0 * p; }
inline double average_gate_fidelity_2q(double p) {
  const double f = 1.0 - 2.0 * p;
  return f * f;
}

enum class Pauli { I = 0, X = 1, Y = 2, Z = 3 };

inline Pauli sample_pauli(double p, RngStream& rng) {
  if (p <= 0.0) return Pauli::I;
  const double u = rng.uniform();
  if (u < p) return Pauli::X;
  if (u < 2.0 * p) return Pauli::Y;
  if (u < 3.0 * p) return Pauli::Z;
  return Pauli::I;
}

inline void apply_pauli(StateVector& st, int q, Pauli which) {
  switch (which) {
    case Pauli::I: break;
    case Pauli::X: st.apply_x(q); break;
    case Pauli::Y: st.apply_y(q); break;
    case Pauli::Z: st.apply_z(q); break;
  }
}

// One trajectory sample of the depolarizing channel on a target qubit.
inline void apply_depolarizing_trajectory(StateVector& st, int q, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 0.25))
    throw std::invalid_argument("apply_depolarizing_trajectory: p must lie in [0, 1/4]");
  apply_pauli(st, q, sample_pauli(p, rng));
}

}  // namespace qabom
