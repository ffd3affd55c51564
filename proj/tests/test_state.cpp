#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <map>

#include "qabom/density.hpp"
#include "qabom/state.hpp"

using namespace qabom;
using Catch::Approx;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector plus_state() {
  return StateVector::from_amplitudes(1, {cdouble{kInvSqrt2, 0.0}, cdouble{kInvSqrt2, 0.0}});
}

double fidelity(const StateVector& a, const StateVector& b) {
  cdouble ip{0.0, 0.0};
  for (std::uint64_t i = 0; i < a.dim(); ++i) ip += std::conj(a.amplitude(i)) * b.amplitude(i);
  return std::norm(ip);
}
}  // namespace

TEST_CASE("purified thermal pairs", "[state]") {
  SECTION("beta=0 is a maximally entangled pair") {
    const StateVector st = prepare_purified_thermal(1, 0.0);
    REQUIRE(std::abs(st.amplitude(0b00)) == Approx(kInvSqrt2).margin(1e-12));
    REQUIRE(std::abs(st.amplitude(0b11)) == Approx(kInvSqrt2).margin(1e-12));
    const auto reduced = reduced_density(st, {0});
    REQUIRE(reduced.matrix()(0, 0).real() == Approx(0.5).margin(1e-12));
    REQUIRE(reduced.matrix()(1, 1).real() == Approx(0.5).margin(1e-12));
  }

  SECTION("beta=1 reduced state matches the closed form") {
    const StateVector st = prepare_purified_thermal(1, 1.0);
    const auto reduced = reduced_density(st, {0});
    REQUIRE(reduced.matrix()(0, 0).real() == Approx(0.11920292202211756).margin(1e-12));
    REQUIRE(reduced.matrix()(1, 1).real() == Approx(1.0 - 0.11920292202211756).margin(1e-12));
    REQUIRE(std::abs(reduced.matrix()(0, 1)) < 1e-12);
  }

  SECTION("beta=50 limit pins the qubit to |1>") {
    const StateVector st = prepare_purified_thermal(1, 50.0);
    const auto reduced = reduced_density(st, {0});
    REQUIRE(reduced.matrix()(0, 0).real() < 1e-20);
    REQUIRE(reduced.matrix()(1, 1).real() == Approx(1.0).margin(1e-12));
  }

  SECTION("rejects bad arguments") {
    REQUIRE_THROWS_AS(prepare_purified_thermal(1, -0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(prepare_purified_thermal(0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(prepare_purified_thermal(13, 1.0), std::invalid_argument);
  }
}

TEST_CASE("diagonal cost phases", "[state]") {
  SECTION("gamma=0 is the identity") {
    StateVector st = plus_state();
    st.apply_exp_z(0, 0.0);
    REQUIRE(fidelity(st, plus_state()) == Approx(1.0).margin(1e-12));
  }

  SECTION("single qubit H=-Z at gamma=pi/2") {
    // exp(-i gamma (-Z)) |+> = (e^{i pi/2}|0> + e^{-i pi/2}|1>)/sqrt(2)
    StateVector st = plus_state();
    st.apply_exp_z(0, (3.14159265358979323846 / 2.0) * -1.0);
    REQUIRE(st.amplitude(0).real() == Approx(0.0).margin(1e-12));
    REQUIRE(st.amplitude(0).imag() == Approx(kInvSqrt2).margin(1e-12));
    REQUIRE(st.amplitude(1).imag() == Approx(-kInvSqrt2).margin(1e-12));
  }

  SECTION("computational eigenstates only pick up a global phase") {
    StateVector st = StateVector::basis_state(2, 0b00);
    st.apply_exp_zz(0, 1, -0.77);  // exp(-i gamma (-Z Z)) with gamma = 0.77
    REQUIRE(std::abs(st.amplitude(0b00)) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("mixer rotations", "[state]") {
  SECTION("nu=0 is the identity") {
    StateVector st = StateVector::basis_state(1, 0);
    st.apply_exp_x(0, 0.0);
    REQUIRE(std::abs(st.amplitude(0)) == Approx(1.0).margin(1e-12));
  }

  SECTION("nu=pi/2 maps |0> to -i|1>") {
    StateVector st = StateVector::basis_state(1, 0);
    st.apply_exp_x(0, 3.14159265358979323846 / 2.0);
    REQUIRE(std::abs(st.amplitude(0)) < 1e-12);
    REQUIRE(st.amplitude(1).imag() == Approx(-1.0).margin(1e-12));
  }

  SECTION("nu=pi is the identity up to global phase, nu=pi/2 is X up to phase") {
    // 2x2 exponential: exp(-i nu X) = cos(nu) I - i sin(nu) X.
    StateVector st = plus_state();
    st.apply_exp_z(0, 0.3);  // make it non-trivial
    StateVector ref = st;
    st.apply_exp_x(0, 3.14159265358979323846);
    REQUIRE(fidelity(st, ref) == Approx(1.0).margin(1e-12));

    StateVector half = ref;
    half.apply_exp_x(0, 3.14159265358979323846 / 2.0);
    StateVector x_applied = ref;
    x_applied.apply_x(0);
    REQUIRE(fidelity(half, x_applied) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("sampling", "[state]") {
  RngStream rng(11);

  SECTION("a basis state always samples itself") {
    // "01": unit 0 reads 0, unit 1 reads 1.
    const StateVector st = StateVector::basis_state(2, parse_bitstring("01"));
    for (const auto& s : sample_bitstrings(st, 32, rng)) REQUIRE(s == "01");
  }

  SECTION("uniform two-qubit superposition has 0.25 +- 0.01 frequencies at 1e5 shots") {
    const StateVector st = StateVector::from_amplitudes(
        2, {cdouble{0.5, 0.0}, cdouble{0.5, 0.0}, cdouble{0.5, 0.0}, cdouble{0.5, 0.0}});
    std::map<std::uint64_t, int> counts;
    for (std::uint64_t idx : st.sample_indices(100000, rng)) counts[idx]++;
    for (std::uint64_t k = 0; k < 4; ++k)
      REQUIRE(counts[k] / 100000.0 == Approx(0.25).margin(0.01));
  }

  SECTION("GHZ support") {
    StateVector st = StateVector::from_amplitudes(
        3, {cdouble{kInvSqrt2, 0.0}, {}, {}, {}, {}, {}, {}, cdouble{kInvSqrt2, 0.0}});
    for (std::uint64_t idx : st.sample_indices(1000, rng))
      REQUIRE((idx == 0 || idx == 7));
  }

  SECTION("deterministic given the stream seed") {
    const StateVector st = prepare_purified_thermal(2, 0.8);
    RngStream r1(99), r2(99);
    REQUIRE(st.sample_indices(50, r1) == st.sample_indices(50, r2));
  }
}

TEST_CASE("exact Z-product expectations", "[state]") {
  REQUIRE(StateVector::basis_state(1, 0).expectation_z_product(1) == Approx(1.0));
  REQUIRE(plus_state().expectation_z_product(1) == Approx(0.0).margin(1e-12));

  const StateVector st = prepare_purified_thermal(1, 1.0);
  REQUIRE(st.expectation_z_product(1) == Approx(-std::tanh(1.0)).margin(1e-12));

  REQUIRE_THROWS_AS(plus_state().expectation_z_product(0b10), std::out_of_range);
}

TEST_CASE("norm is preserved by noiseless gates", "[state]") {
  RngStream rng(3);
  StateVector st = prepare_purified_thermal(2, 0.6);
  for (int i = 0; i < 50; ++i) {
    const int q = static_cast<int>(rng.next_index(2));
    switch (rng.next_index(4)) {
      case 0: st.apply_exp_x(q, rng.uniform(0, 6.28)); break;
      case 1: st.apply_exp_z(q, rng.uniform(0, 6.28)); break;
      case 2: st.apply_exp_zz(0, 1, rng.uniform(0, 6.28)); break;
      default: st.apply_ry(q, rng.uniform(0, 6.28)); break;
    }
    REQUIRE(st.norm() == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("system unitaries commute with tracing out the environment", "[state]") {
  // 2 system + 2 environment qubits.
  const StateVector initial = prepare_purified_thermal(2, 0.9);
  auto circuit = [](auto& target) {
    target.apply_exp_zz(0, 1, 0.4);
    target.apply_exp_z(0, -0.2);
    target.apply_exp_x(1, 1.1);
    target.apply_exp_x(0, 0.6);
  };

  StateVector evolved = initial;
  circuit(evolved);
  const DensityMatrix traced_after = reduced_density(evolved, {0, 1});

  DensityMatrix traced_before = reduced_density(initial, {0, 1});
  circuit(traced_before);

  REQUIRE((traced_after.matrix() - traced_before.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gate argument validation", "[state]") {
  StateVector st(2);
  REQUIRE_THROWS_AS(st.apply_exp_x(2, 0.1), std::out_of_range);
  REQUIRE_THROWS_AS(st.apply_exp_zz(0, 0, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(StateVector::from_amplitudes(1, {cdouble{1.0, 0.0}, cdouble{1.0, 0.0}}),
                    std::invalid_argument);
}
