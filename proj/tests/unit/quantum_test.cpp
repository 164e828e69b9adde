#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lgiecho/quantum.hpp"
#include "lgiecho/random.hpp"

using namespace lgiecho;

namespace {

DensityMatrix random_density(StreamRng& rng) {
  // Uniform direction, radius^(1/3) fills the ball uniformly.
  const double z = 2 * rng.uniform() - 1;
  const double phi = 2 * std::numbers::pi * rng.uniform();
  const double r = std::cbrt(rng.uniform());
  const double s = std::sqrt(1 - z * z);
  return DensityMatrix::from_bloch(r * s * std::cos(phi), r * s * std::sin(phi), r * z);
}

PolarState random_pure(StreamRng& rng) {
  const double theta = std::acos(2 * rng.uniform() - 1);
  const double phi = 2 * std::numbers::pi * rng.uniform();
  return {Complex{std::cos(theta / 2)}, std::polar(std::sin(theta / 2), phi), Basis::DA};
}

}  // namespace

TEST(PolarState, RejectsUnnormalizedAmplitudes) {
  EXPECT_THROW(PolarState(Complex{1}, Complex{1}, Basis::DA), InvariantViolation);
  EXPECT_NO_THROW(PolarState::normalized(Complex{1}, Complex{1}, Basis::DA));
}

TEST(PolarState, BasisConversionRoundTrips) {
  StreamRng rng(7, 0);
  for (int k = 0; k < 100; ++k) {
    const auto s = random_pure(rng);
    const auto back = s.in_basis(Basis::HV).in_basis(Basis::DA);
    EXPECT_NEAR(std::abs(back.amp0() - s.amp0()), 0, 1e-12);
    EXPECT_NEAR(std::abs(back.amp1() - s.amp1()), 0, 1e-12);
  }
  // D = (H + V)/sqrt2.
  const auto d = PolarState::D().amplitudes(Basis::HV);
  EXPECT_NEAR(d[0].real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(d[1].real(), std::sqrt(0.5), 1e-15);
}

TEST(BornProbability, IdentityAndOrthogonality) {
  EXPECT_NEAR(born_probability(PolarState::D(), PolarState::D()), 1.0, 1e-15);
  EXPECT_NEAR(born_probability(PolarState::D(), PolarState::A()), 0.0, 1e-15);
}

TEST(BornProbability, PhaseTwoPiOverThree) {
  // (H + e^{i phi} V)/sqrt2 projected on D gives cos^2(phi/2).
  const double phi = 2 * std::numbers::pi / 3;
  const auto s = PolarState::hv(Complex{1}, std::polar(1.0, phi));
  EXPECT_NEAR(born_probability(s, PolarState::D()), 0.25, 1e-12);
}

TEST(BornProbability, OrthonormalPairSumsToOne) {
  StreamRng rng(8, 0);
  for (int k = 0; k < 200; ++k) {
    const auto rho = random_density(rng);
    const auto p = random_pure(rng);
    const PolarState q{-std::conj(p.amp1()), std::conj(p.amp0()), Basis::DA};
    EXPECT_NEAR(born_probability(rho, p) + born_probability(rho, q), 1.0, 1e-12);
  }
}

TEST(DensityMatrix, ValidationRejectsBadMatrices) {
  Matrix2 not_hermitian{{Complex{0.5}, Complex{0.1}, Complex{0.2}, Complex{0.5}}};
  EXPECT_THROW(DensityMatrix::from_da(not_hermitian), InvariantViolation);
  Matrix2 bad_trace{{Complex{0.6}, Complex{0}, Complex{0}, Complex{0.6}}};
  EXPECT_THROW(DensityMatrix::from_da(bad_trace), InvariantViolation);
  Matrix2 negative{{Complex{1.2}, Complex{0}, Complex{0}, Complex{-0.2}}};
  EXPECT_THROW(DensityMatrix::from_da(negative), InvariantViolation);
}

TEST(TraceDistance, Examples) {
  const auto d = DensityMatrix::pure(PolarState::D());
  const auto a = DensityMatrix::pure(PolarState::A());
  EXPECT_NEAR(trace_distance(d, d), 0.0, 1e-15);
  EXPECT_NEAR(trace_distance(d, a), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(d, DensityMatrix::maximally_mixed()), 0.5, 1e-15);
}

TEST(TraceDistance, IsAMetric) {
  StreamRng rng(9, 0);
  for (int k = 0; k < 1000; ++k) {
    const auto a = random_density(rng), b = random_density(rng), c = random_density(rng);
    const double ab = trace_distance(a, b), ba = trace_distance(b, a);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, ba, 1e-10);
    EXPECT_LE(trace_distance(a, c), ab + trace_distance(b, c) + 1e-10);
  }
}

TEST(TraceDistance, EqualsHalfBlochDistance) {
  // Independent oracle: D = |r1 - r2| / 2 for qubits.
  StreamRng rng(10, 0);
  for (int k = 0; k < 200; ++k) {
    const auto a = random_density(rng), b = random_density(rng);
    const auto ra = bloch_vector(a), rb = bloch_vector(b);
    const double d = std::hypot(ra[0] - rb[0], ra[1] - rb[1], ra[2] - rb[2]) / 2;
    EXPECT_NEAR(trace_distance(a, b), d, 1e-12);
  }
}

TEST(Channel, IdentityLeavesStateUnchanged) {
  StreamRng rng(11, 0);
  const auto rho = random_density(rng);
  const auto out = apply_channel(Channel{ChannelKind::Identity, 5.0}, rho, 3.0);
  EXPECT_LT(out.da().max_abs_diff(rho.da()), 1e-15);
}

TEST(Channel, DephasingHalvesCoherencesAtLn2) {
  const double gamma = 1e6;
  const Channel c{ChannelKind::Dephasing, gamma, Basis::DA};
  const auto rho = DensityMatrix::pure(PolarState::normalized(Complex{1}, Complex{1}, Basis::DA));
  const auto out = apply_channel(c, rho, std::log(2.0) / gamma);
  EXPECT_NEAR(std::abs(out(0, 1)), 0.25, 1e-12);
  EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-12);
}

TEST(Channel, FullDephasingKeepsDiagonal) {
  StreamRng rng(12, 0);
  for (Basis b : {Basis::DA, Basis::HV}) {
    const auto rho = random_density(rng);
    const auto out = apply_channel(Channel{ChannelKind::Dephasing, 1e6, b}, rho, 1.0);
    const auto m = out.in_basis(b), m0 = rho.in_basis(b);
    EXPECT_NEAR(std::abs(m(0, 1)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(m(0, 0) - m0(0, 0)), 0.0, 1e-12);
  }
}

TEST(Channel, TraceDistanceIsContractive) {
  StreamRng rng(13, 0);
  for (int k = 0; k < 500; ++k) {
    const auto a = random_density(rng), b = random_density(rng);
    const Channel c{static_cast<ChannelKind>(k % 3), 1e6 * rng.uniform(), k % 2 ? Basis::DA : Basis::HV};
    const double t = 2e-6 * rng.uniform();
    EXPECT_LE(trace_distance(apply_channel(c, a, t), apply_channel(c, b, t)), trace_distance(a, b) + 1e-12);
  }
}

TEST(Channel, DistanceOfHPlusMinusVDecaysExponentially) {
  const auto hp = DensityMatrix::pure(PolarState::hv(Complex{1}, Complex{1}));
  const auto hm = DensityMatrix::pure(PolarState::hv(Complex{1}, Complex{-1}));
  const Channel c{ChannelKind::Dephasing, 2.5e6};
  for (double t : {0.0, 1e-7, 3e-7, 1e-6}) {
    const double d = trace_distance(apply_channel(c, hp, t), apply_channel(c, hm, t));
    EXPECT_NEAR(d, std::exp(-c.rate * t), 1e-9);
  }
}

TEST(Channel, LossIsHeralded) {
  const Channel c{ChannelKind::Loss, 1e6};
  const auto rho = DensityMatrix::pure(PolarState::D());
  EXPECT_LT(apply_channel(c, rho, 1e-6).da().max_abs_diff(rho.da()), 1e-15);
  EXPECT_NEAR(survival_probability(c, 1e-6), std::exp(-1.0), 1e-15);
  EXPECT_THROW(apply_channel(c, rho, -1.0), DomainError);
  EXPECT_THROW(apply_channel(Channel{ChannelKind::Dephasing, -1.0}, rho, 1.0), ConfigError);
}

TEST(BlochVector, Examples) {
  const auto zero = bloch_vector(DensityMatrix::maximally_mixed());
  EXPECT_NEAR(std::abs(zero[0]) + std::abs(zero[1]) + std::abs(zero[2]), 0.0, 1e-15);
  const auto d = bloch_vector(DensityMatrix::pure(PolarState::D()));
  EXPECT_NEAR(d[2], 1.0, 1e-15);
  const auto h = bloch_vector(DensityMatrix::pure(PolarState::H()));
  EXPECT_NEAR(h[0], 1.0, 1e-12);
  const auto mix = DensityMatrix::mix(0.75, DensityMatrix::pure(PolarState::D()), DensityMatrix::pure(PolarState::A()));
  EXPECT_NEAR(bloch_vector(mix)[2], 0.5, 1e-15);
}
