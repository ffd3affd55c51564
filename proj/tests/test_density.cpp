#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "qabom/density.hpp"
#include "qabom/ising.hpp"
#include "qabom/noise.hpp"
#include "qabom/state.hpp"
#include "qabom/thermalize.hpp"

using namespace qabom;
using Catch::Approx;

TEST_CASE("depolarizing channel on the density-matrix backend", "[density]") {
  SECTION("p=0 is the identity map") {
    DensityMatrix rho = DensityMatrix::from_state(prepare_purified_thermal(1, 0.7));
    const Eigen::MatrixXcd before = rho.matrix();
    rho.apply_depolarizing(0, 0.0);
    REQUIRE((rho.matrix() - before).cwiseAbs().maxCoeff() < 1e-15);
  }

  SECTION("the maximally mixed state is a fixed point") {
    DensityMatrix rho = DensityMatrix::maximally_mixed(2);
    const Eigen::MatrixXcd before = rho.matrix();
    rho.apply_depolarizing(0, 0.17);
    rho.apply_depolarizing(1, 0.05);
    REQUIRE((rho.matrix() - before).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("p=1/4 fully depolarizes a pure state") {
    DensityMatrix rho(1);  // |0><0|
    rho.apply_depolarizing(0, 0.25);
    REQUIRE(rho.matrix()(0, 0).real() == Approx(0.5).margin(1e-12));
    REQUIRE(rho.matrix()(1, 1).real() == Approx(0.5).margin(1e-12));
    REQUIRE(std::abs(rho.matrix()(0, 1)) < 1e-12);
  }

  SECTION("p outside [0, 1/4] is rejected") {
    DensityMatrix rho(1);
    REQUIRE_THROWS_AS(rho.apply_depolarizing(0, 0.3), std::invalid_argument);
    REQUIRE_THROWS_AS(rho.apply_depolarizing(0, -0.01), std::invalid_argument);
  }
}

TEST_CASE("partial trace", "[density]") {
  SECTION("product states factor") {
    StateVector a = StateVector::basis_state(1, 1);
    a.apply_exp_x(0, 0.4);
    StateVector product(2);
    // build a (x) |0> by hand
    std::vector<cdouble> amps(4);
    amps[0b00] = a.amplitude(0);
    amps[0b01] = a.amplitude(1);
    const StateVector joint = StateVector::from_amplitudes(2, amps);
    const DensityMatrix reduced = reduced_density(joint, {0});
    const DensityMatrix expected = DensityMatrix::from_state(a);
    REQUIRE((reduced.matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("half of a Bell pair is maximally mixed") {
    const DensityMatrix reduced = reduced_density(prepare_purified_thermal(1, 0.0), {0});
    REQUIRE((reduced.matrix() - DensityMatrix::maximally_mixed(1).matrix()).cwiseAbs().maxCoeff() <
            1e-12);
  }

  SECTION("purified pair at beta=1") {
    const DensityMatrix reduced = reduced_density(prepare_purified_thermal(1, 1.0), {1});
    // environment qubit carries the same diagonal
    REQUIRE(reduced.matrix()(0, 0).real() == Approx(0.5 * (1 - std::tanh(1.0))).margin(1e-12));
    REQUIRE(reduced.matrix()(1, 1).real() == Approx(0.5 * (1 + std::tanh(1.0))).margin(1e-12));
  }

  SECTION("trace is preserved") {
    const DensityMatrix reduced = reduced_density(prepare_purified_thermal(3, 1.3), {0, 4});
    REQUIRE(reduced.trace() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("trajectory noise matches the exact channel", "[density][slow]") {
  // Fixed 2-qubit circuit with p = 0.03 after every gate; compare the
  // measured <Z0 Z1> over 1e5 trajectories with the exact-channel value.
  const double p = 0.03;
  const double beta = 0.8;
  const double theta = thermal_pair_angle(beta);

  auto gates = std::vector<GateOp>{
      GateOp::rot_zz(0, 1, -0.6),
      GateOp::rot_z(0, 0.35),
      GateOp::rot_x(0, 0.9),
      GateOp::rot_x(1, 1.7),
  };

  DensityMatrix exact(2);
  exact.apply_ry(0, theta);  // noiseless preparation
  exact.apply_ry(1, theta);
  exact.apply_exp_zz(0, 1, -0.6);
  exact.apply_depolarizing(0, p);
  exact.apply_depolarizing(1, p);
  exact.apply_exp_z(0, 0.35);
  exact.apply_depolarizing(0, p);
  exact.apply_exp_x(0, 0.9);
  exact.apply_depolarizing(0, p);
  exact.apply_exp_x(1, 1.7);
  exact.apply_depolarizing(1, p);
  const double expected = exact.expectation_z_product(0b11);

  NoiseModel noise;
  noise.p = p;
  RngStream rng(2024);
  const int shots = 100000;
  double sum = 0.0, sum_sq = 0.0;
  StateVector traj(2);
  for (int s = 0; s < shots; ++s) {
    RngStream shot = rng.derive("shot", static_cast<std::uint64_t>(s));
    traj.reset_to_basis(0);
    traj.apply_ry(0, theta);
    traj.apply_ry(1, theta);
    run_gates(traj, gates, noise, shot);
    const std::uint64_t z = traj.sample_index(shot);
    const double v = z_product_sign(z, 0b11);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / shots;
  const double stderr_est = std::sqrt((sum_sq / shots - mean * mean) / shots);
  REQUIRE(std::abs(mean - expected) < 3.0 * stderr_est + 1e-12);
}

TEST_CASE("noiseless circuits preserve the initial spectrum", "[density]") {
  const double beta = 0.8;
  const int n_sys = 3;
  StateVector psi = prepare_purified_thermal(n_sys, beta);

  RngStream rng(5);
  for (int l = 0; l < 3; ++l) {
    psi.apply_exp_zz(0, 1, rng.uniform(0, 6.28));
    psi.apply_exp_zz(1, 2, rng.uniform(0, 6.28));
    psi.apply_exp_z(0, rng.uniform(0, 6.28));
    psi.apply_exp_z(2, rng.uniform(0, 6.28));
    for (int q = 0; q < n_sys; ++q) psi.apply_exp_x(q, rng.uniform(0, 6.28));
  }

  auto eigen = reduced_density(psi, {0, 1, 2}).eigenvalues();
  auto expected = pseudo_thermal_spectrum(beta, n_sys);
  std::sort(eigen.begin(), eigen.end());
  std::sort(expected.begin(), expected.end());
  for (std::size_t i = 0; i < expected.size(); ++i)
    REQUIRE(eigen[i] == Approx(expected[i]).margin(1e-10));
}

TEST_CASE("entropy and relative entropy helpers", "[density]") {
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  REQUIRE(mixed.von_neumann_entropy() == Approx(std::log(4.0)).margin(1e-10));

  DensityMatrix pure(1);
  REQUIRE(pure.von_neumann_entropy() == Approx(0.0).margin(1e-10));

  // D(rho || rho) = 0 for diagonal rho.
  const std::vector<double> diag{0.3, 0.7};
  const DensityMatrix rho = DensityMatrix::from_diagonal(1, diag);
  REQUIRE(relative_entropy_to_diagonal(rho, diag) == Approx(0.0).margin(1e-10));

  // against the uniform distribution: D = ln 2 - H(0.3)
  const double expected = std::log(2.0) + 0.3 * std::log(0.3) + 0.7 * std::log(0.7);
  REQUIRE(relative_entropy_to_diagonal(rho, {0.5, 0.5}) == Approx(expected).margin(1e-10));
}
