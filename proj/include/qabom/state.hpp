// Statevector backend: dense complex amplitudes over a qubit register with
// the gate set needed by the alternating-exponential circuits (diagonal Z/ZZ
// rotations, X rotations, Pauli errors, pair preparation), computational-basis
// sampling and exact Z-product expectations.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qabom/bits.hpp"
#include "qabom/rng.hpp"

namespace qabom {

using cdouble = std::complex<double>;

class StateVector {
 public:
  static constexpr int kMaxQubits = 24;

  explicit StateVector(int n_qubits) : n_qubits_(check_size(n_qubits)), amps_(dim(), cdouble{0.0, 0.0}) {
    amps_[0] = cdouble{1.0, 0.0};
  }

  static StateVector basis_state(int n_qubits, std::uint64_t index) {
    StateVector st(n_qubits);
    if (index >= st.dim()) throw std::out_of_range("basis_state: index out of range");
    st.amps_[0] = cdouble{0.0, 0.0};
    st.amps_[index] = cdouble{1.0, 0.0};
    return st;
  }

  static StateVector from_amplitudes(int n_qubits, std::vector<cdouble> amps) {
    StateVector st(n_qubits);
    if (amps.size() != st.dim()) throw std::invalid_argument("from_amplitudes: wrong length");
    st.amps_ = std::move(amps);
    if (std::abs(st.norm() - 1.0) > 1e-8)
      throw std::invalid_argument("from_amplitudes: amplitudes are not normalized");
    return st;
  }

  int n_qubits() const { return n_qubits_; }
  std::uint64_t dim() const { return 1ULL << n_qubits_; }
  const cdouble& amplitude(std::uint64_t i) const { return amps_[i]; }
  std::span<const cdouble> amplitudes() const { return amps_; }
  std::span<cdouble> amplitudes() { return amps_; }

  double probability(std::uint64_t i) const { return std::norm(amps_[i]); }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  void normalize() {
    const double n = norm();
    if (n <= 0.0) throw std::runtime_error("normalize: zero state");
    for (auto& a : amps_) a /= n;
  }

  void reset_to_basis(std::uint64_t index) {
    if (index >= dim()) throw std::out_of_range("reset_to_basis: index out of range");
    std::fill(amps_.begin(), amps_.end(), cdouble{0.0, 0.0});
    amps_[index] = cdouble{1.0, 0.0};
  }

  // exp(-i angle X_q)
  void apply_exp_x(int q, double angle) {
    check_qubit(q);
    const double c = std::cos(angle);
    const cdouble ms{0.0, -std::sin(angle)};
    const std::uint64_t qm = 1ULL << q;
    for (std::uint64_t i = 0; i < dim(); ++i) {
      if (i & qm) continue;
      const std::uint64_t j = i | qm;
      const cdouble a0 = amps_[i], a1 = amps_[j];
      amps_[i] = c * a0 + ms * a1;
      amps_[j] = ms * a0 + c * a1;
    }
  }

  // exp(-i angle Z_q): phase e^{-i angle} on bit 0, e^{+i angle} on bit 1.
  void apply_exp_z(int q, double angle) {
    check_qubit(q);
    const cdouble p0 = std::polar(1.0, -angle);
    const cdouble p1 = std::polar(1.0, angle);
    const std::uint64_t qm = 1ULL << q;
    for (std::uint64_t i = 0; i < dim(); ++i) amps_[i] *= (i & qm) ? p1 : p0;
  }

  // exp(-i angle Z_q1 Z_q2)
  void apply_exp_zz(int q1, int q2, double angle) {
    check_qubit(q1);
    check_qubit(q2);
    if (q1 == q2) throw std::invalid_argument("apply_exp_zz: targets must be distinct");
    const cdouble peven = std::polar(1.0, -angle);
    const cdouble podd = std::polar(1.0, angle);
    const std::uint64_t m1 = 1ULL << q1, m2 = 1ULL << q2;
    for (std::uint64_t i = 0; i < dim(); ++i) {
      const bool b1 = (i & m1) != 0, b2 = (i & m2) != 0;
      amps_[i] *= (b1 == b2) ? peven : podd;
    }
  }

  // exp(-i (theta/2) Y_q); maps |0> to cos(theta/2)|0> + sin(theta/2)|1>.
  void apply_ry(int q, double theta) {
    check_qubit(q);
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    const std::uint64_t qm = 1ULL << q;
    for (std::uint64_t i = 0; i < dim(); ++i) {
      if (i & qm) continue;
      const std::uint64_t j = i | qm;
      const cdouble a0 = amps_[i], a1 = amps_[j];
      amps_[i] = c * a0 - s * a1;
      amps_[j] = s * a0 + c * a1;
    }
  }

  void apply_x(int q) {
    check_qubit(q);
    const std::uint64_t qm = 1ULL << q;
    for (std::uint64_t i = 0; i < dim(); ++i)
      if (!(i & qm)) std::swap(amps_[i], amps_[i | qm]);
  }

  void apply_y(int q) {
    check_qubit(q);
    const std::uint64_t qm = 1ULL << q;
    const cdouble pi{0.0, 1.0}, mi{0.0, -1.0};
    for (std::uint64_t i = 0; i < dim(); ++i) {
      if (i & qm) continue;
      const std::uint64_t j = i | qm;
      const cdouble a0 = amps_[i], a1 = amps_[j];
      amps_[i] = mi * a1;
      amps_[j] = pi * a0;
    }
  }

  void apply_z(int q) {
    check_qubit(q);
    const std::uint64_t qm = 1ULL << q;
    for (std::uint64_t i = 0; i < dim(); ++i)
      if (i & qm) amps_[i] = -amps_[i];
  }

  void apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw std::invalid_argument("apply_cnot: targets must be distinct");
    const std::uint64_t cm = 1ULL << control, tm = 1ULL << target;
    for (std::uint64_t i = 0; i < dim(); ++i)
      if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
  }

  // One basis-state draw from |amplitude|^2 (linear scan, meant for
  // per-trajectory single shots on small registers).
  std::uint64_t sample_index(RngStream& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) {
      acc += std::norm(amps_[i]);
      if (u < acc) return i;
    }
    return dim() - 1;
  }

  // shots i.i.d. draws; builds the cumulative distribution once.
  std::vector<std::uint64_t> sample_indices(int shots, RngStream& rng) const {
    if (shots < 1) throw std::invalid_argument("sample_indices: shots must be >= 1");
    std::vector<double> cdf(dim());
    double acc = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) {
      acc += std::norm(amps_[i]);
      cdf[i] = acc;
    }
    std::vector<std::uint64_t> out(static_cast<std::size_t>(shots));
    for (auto& s : out) {
      const double u = rng.uniform() * acc;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      s = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                              static_cast<std::ptrdiff_t>(dim()) - 1));
    }
    return out;
  }

  // <prod_{q in mask} Z_q>, exact.
  double expectation_z_product(std::uint64_t mask) const {
    if (mask >> n_qubits_) throw std::out_of_range("expectation_z_product: mask out of range");
    double s = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) s += std::norm(amps_[i]) * z_product_sign(i, mask);
    return s;
  }

 private:
  static int check_size(int n) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("StateVector: qubit count out of range");
    return n;
  }
  void check_qubit(int q) const {
    if (q < 0 || q >= n_qubits_) throw std::out_of_range("StateVector: qubit index out of range");
  }

  int n_qubits_;
  std::vector<cdouble> amps_;
};

inline std::vector<std::string> sample_bitstrings(const StateVector& state, int shots, RngStream& rng) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(shots));
  for (std::uint64_t idx : state.sample_indices(shots, rng))
    out.push_back(to_bitstring(idx, state.n_qubits()));
  return out;
}

// Ry angle realizing the thermal Bell-pair weights: cos(theta/2) = e^{-beta/2}
// and sin(theta/2) = e^{+beta/2}, both divided by sqrt(2 cosh beta).
inline double thermal_pair_angle(double beta) {
  if (beta < 0.0) throw std::invalid_argument("thermal_pair_angle: beta must be >= 0");
  return 2.0 * std::atan2(std::exp(beta / 2.0), std::exp(-beta / 2.0));
}

// Probability that one purified unit reads bit b: (1 - (-1)^b tanh(beta)) / 2.
inline double thermal_bit_probability(double beta, int bit) {
  return 0.5 * (1.0 - (bit == 0 ? 1.0 : -1.0) * std::tanh(beta));
}

// Purified thermal state on 2*n_system qubits: system j is qubit j, its
// environment partner is qubit n_system + j. Tracing out the environment
// leaves each system qubit in diag((1 - tanh beta)/2, (1 + tanh beta)/2).
inline StateVector prepare_purified_thermal(int n_system, double beta) {
  if (n_system < 1) throw std::invalid_argument("prepare_purified_thermal: n_system must be >= 1");
  if (beta < 0.0) throw std::invalid_argument("prepare_purified_thermal: beta must be >= 0");
  if (2 * n_system > StateVector::kMaxQubits)
    throw std::invalid_argument("prepare_purified_thermal: register would exceed the qubit limit");
  StateVector st(2 * n_system);
  const double theta = thermal_pair_angle(beta);
  for (int j = 0; j < n_system; ++j) {
    st.apply_ry(j, theta);
    st.apply_cnot(j, n_system + j);
  }
  return st;
}

}  // namespace qabom
