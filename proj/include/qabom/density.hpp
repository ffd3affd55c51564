// Density-matrix backend. Small (<= 10 qubits) and exact: used as the
// verification oracle for trajectory noise, partial traces, spectra and
// entropies.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qabom/bits.hpp"
#include "qabom/state.hpp"

namespace qabom {

class DensityMatrix {
 public:
  static constexpr int kMaxQubits = 10;

  explicit DensityMatrix(int n_qubits) : n_qubits_(check_size(n_qubits)) {
    rho_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    rho_(0, 0) = 1.0;
  }

  static DensityMatrix from_state(const StateVector& psi) {
    DensityMatrix rho(psi.n_qubits());
    const auto d = static_cast<Eigen::Index>(psi.dim());
    Eigen::VectorXcd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = psi.amplitude(static_cast<std::uint64_t>(i));
    rho.rho_ = v * v.adjoint();
    return rho;
  }

  static DensityMatrix from_diagonal(int n_qubits, const std::vector<double>& probs) {
    DensityMatrix rho(n_qubits);
    if (probs.size() != rho.dim()) throw std::invalid_argument("from_diagonal: wrong length");
    rho.rho_.setZero();
    for (std::uint64_t i = 0; i < rho.dim(); ++i) rho.rho_(i, i) = probs[i];
    return rho;
  }

  static DensityMatrix maximally_mixed(int n_qubits) {
    DensityMatrix rho(n_qubits);
    const double p = 1.0 / static_cast<double>(rho.dim());
    rho.rho_ = Eigen::MatrixXcd::Identity(rho.rho_.rows(), rho.rho_.cols()) * p;
    return rho;
  }

  int n_qubits() const { return n_qubits_; }
  std::uint64_t dim() const { return 1ULL << n_qubits_; }
  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::MatrixXcd& matrix() { return rho_; }

  double trace() const { return rho_.trace().real(); }

  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim());
    for (std::uint64_t i = 0; i < dim(); ++i) d[i] = rho_(i, i).real();
    return d;
  }

  void apply_unitary_1q(int q, const Eigen::Matrix2cd& u) {
    check_qubit(q);
    const std::uint64_t qm = 1ULL << q;
    // rho -> (U x I) rho (U x I)^dagger, column pass then row pass.
    for (std::uint64_t col = 0; col < dim(); ++col)
      for (std::uint64_t i = 0; i < dim(); ++i) {
        if (i & qm) continue;
        const std::uint64_t j = i | qm;
        const cdouble a0 = rho_(i, col), a1 = rho_(j, col);
        rho_(i, col) = u(0, 0) * a0 + u(0, 1) * a1;
        rho_(j, col) = u(1, 0) * a0 + u(1, 1) * a1;
      }
    for (std::uint64_t row = 0; row < dim(); ++row)
      for (std::uint64_t i = 0; i < dim(); ++i) {
        if (i & qm) continue;
        const std::uint64_t j = i | qm;
        const cdouble a0 = rho_(row, i), a1 = rho_(row, j);
        rho_(row, i) = a0 * std::conj(u(0, 0)) + a1 * std::conj(u(0, 1));
        rho_(row, j) = a0 * std::conj(u(1, 0)) + a1 * std::conj(u(1, 1));
      }
  }

  void apply_exp_x(int q, double angle) {
    Eigen::Matrix2cd u;
    const cdouble ms{0.0, -std::sin(angle)};
    u << std::cos(angle), ms, ms, std::cos(angle);
    apply_unitary_1q(q, u);
  }

  void apply_ry(int q, double theta) {
    Eigen::Matrix2cd u;
    u << std::cos(theta / 2.0), -std::sin(theta / 2.0), std::sin(theta / 2.0), std::cos(theta / 2.0);
    apply_unitary_1q(q, u);
  }

  void apply_exp_z(int q, double angle) {
    Eigen::Matrix2cd u;
    u << std::polar(1.0, -angle), 0.0, 0.0, std::polar(1.0, angle);
    apply_unitary_1q(q, u);
  }

  void apply_x(int q) {
    Eigen::Matrix2cd u;
    u << 0.0, 1.0, 1.0, 0.0;
    apply_unitary_1q(q, u);
  }

  void apply_y(int q) {
    Eigen::Matrix2cd u;
    u << cdouble{0.0, 0.0}, cdouble{0.0, -1.0}, cdouble{0.0, 1.0}, cdouble{0.0, 0.0};
    apply_unitary_1q(q, u);
  }

  void apply_z(int q) {
    Eigen::Matrix2cd u;
    u << 1.0, 0.0, 0.0, -1.0;
    apply_unitary_1q(q, u);
  }

  // Diagonal two-qubit phase, exp(-i angle Z_q1 Z_q2).
  void apply_exp_zz(int q1, int q2, double angle) {
    check_qubit(q1);
    check_qubit(q2);
    if (q1 == q2) throw std::invalid_argument("apply_exp_zz: targets must be distinct");
    const std::uint64_t m1 = 1ULL << q1, m2 = 1ULL << q2;
    auto phase = [&](std::uint64_t i) {
      const bool even = ((i & m1) != 0) == ((i & m2) != 0);
      return std::polar(1.0, even ? -angle : angle);
    };
    for (std::uint64_t r = 0; r < dim(); ++r)
      for (std::uint64_t c = 0; c < dim(); ++c) rho_(r, c) *= phase(r) * std::conj(phase(c));
  }

  void apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw std::invalid_argument("apply_cnot: targets must be distinct");
    const std::uint64_t cm = 1ULL << control, tm = 1ULL << target;
    auto image = [&](std::uint64_t i) { return (i & cm) ? (i ^ tm) : i; };
    Eigen::MatrixXcd out(rho_.rows(), rho_.cols());
    for (std::uint64_t r = 0; r < dim(); ++r)
      for (std::uint64_t c = 0; c < dim(); ++c) out(image(r), image(c)) = rho_(r, c);
    rho_ = std::move(out);
  }

  // Exact channel: rho -> (1-3p) rho + p (X rho X + Y rho Y + Z rho Z).
  void apply_depolarizing(int q, double p) {
    check_qubit(q);
    if (!(p >= 0.0 && p <= 0.25))
      throw std::invalid_argument("apply_depolarizing: p must lie in [0, 1/4]");
    if (p == 0.0) return;
    DensityMatrix x = *this, y = *this, z = *this;
    x.apply_x(q);
    y.apply_y(q);
    z.apply_z(q);
    rho_ = (1.0 - 3.0 * p) * rho_ + p * (x.rho_ + y.rho_ + z.rho_);
  }

  // Trace out every qubit not in `keep`; kept qubits are re-indexed in the
  // order given (position r of `keep` becomes qubit r of the result).
  DensityMatrix partial_trace(const std::vector<int>& keep) const {
    if (keep.empty() || keep.size() >= static_cast<std::size_t>(n_qubits_))
      throw std::invalid_argument("partial_trace: keep set must be a proper non-empty subset");
    std::uint64_t keep_mask = 0;
    for (int q : keep) {
      check_qubit(q);
      if (keep_mask & (1ULL << q)) throw std::invalid_argument("partial_trace: duplicate qubit");
      keep_mask |= 1ULL << q;
    }
    const int n_keep = static_cast<int>(keep.size());
    const int n_rest = n_qubits_ - n_keep;
    std::vector<int> rest;
    for (int q = 0; q < n_qubits_; ++q)
      if (!(keep_mask & (1ULL << q))) rest.push_back(q);

    auto compose = [&](std::uint64_t kept_bits, std::uint64_t rest_bits) {
      std::uint64_t full = 0;
      for (int r = 0; r < n_keep; ++r)
        if (kept_bits & (1ULL << r)) full |= 1ULL << keep[static_cast<std::size_t>(r)];
      for (int r = 0; r < n_rest; ++r)
        if (rest_bits & (1ULL << r)) full |= 1ULL << rest[static_cast<std::size_t>(r)];
      return full;
    };

    DensityMatrix out(n_keep);
    out.rho_.setZero();
    const std::uint64_t dk = 1ULL << n_keep, dr = 1ULL << n_rest;
    for (std::uint64_t a = 0; a < dk; ++a)
      for (std::uint64_t b = 0; b < dk; ++b) {
        cdouble s{0.0, 0.0};
        for (std::uint64_t e = 0; e < dr; ++e) s += rho_(compose(a, e), compose(b, e));
        out.rho_(a, b) = s;
      }
    return out;
  }

  std::vector<double> eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho_, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
  }

  // In nats.
  double von_neumann_entropy() const {
    double s = 0.0;
    for (double lam : eigenvalues())
      if (lam > 1e-15) s -= lam * std::log(lam);
    return s;
  }

  double expectation_z_product(std::uint64_t mask) const {
    if (mask >> n_qubits_) throw std::out_of_range("expectation_z_product: mask out of range");
    double s = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) s += rho_(i, i).real() * z_product_sign(i, mask);
    return s;
  }

  std::uint64_t sample_index(RngStream& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) {
      acc += std::max(0.0, rho_(i, i).real());
      if (u < acc) return i;
    }
    return dim() - 1;
  }

 private:
  static int check_size(int n) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("DensityMatrix: qubit count out of range");
    return n;
  }
  void check_qubit(int q) const {
    if (q < 0 || q >= n_qubits_) throw std::out_of_range("DensityMatrix: qubit index out of range");
  }

  int n_qubits_;
  Eigen::MatrixXcd rho_;
};

// D(rho || sigma) in nats for sigma diagonal in the computational basis with
// strictly positive entries on the support of rho.
inline double relative_entropy_to_diagonal(const DensityMatrix& rho, const std::vector<double>& sigma_diag) {
  if (sigma_diag.size() != rho.dim())
    throw std::invalid_argument("relative_entropy_to_diagonal: dimension mismatch");
  double cross = 0.0;
  const auto probs = rho.diagonal();
  for (std::uint64_t i = 0; i < rho.dim(); ++i) {
    if (probs[i] <= 1e-15) continue;
    if (sigma_diag[i] <= 0.0) return std::numeric_limits<double>::infinity();
    cross -= probs[i] * std::log(sigma_diag[i]);
  }
  return cross - rho.von_neumann_entropy();
}

inline DensityMatrix reduced_density(const StateVector& psi, const std::vector<int>& keep) {
  return DensityMatrix::from_state(psi).partial_trace(keep);
}

}  // namespace qabom
