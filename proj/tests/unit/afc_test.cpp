#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "lgiecho/afc.hpp"

using namespace lgiecho;

namespace {

// Intensity ratio of a Gaussian-tooth comb to an ideal comb at time t:
// |FT of a unit Gaussian|^2 = exp(-(2 pi sigma t)^2).
double gaussian_dephasing(double fwhm, double t) {
  const double s = fwhm * kFwhmToSigma;
  return std::exp(-std::pow(2 * std::numbers::pi * s * t, 2));
}

}  // namespace

TEST(CombSpec, ValidationNamesField) {
  CombSpec c;
  c.tooth_fwhm = 9e6;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "CombSpec.tooth_fwhm");
  }
  c = CombSpec{};
  c.bandwidth = 1e6;
  EXPECT_THROW(c.validate(), ConfigError);
  c = CombSpec{};
  c.background_depth = 9;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SampleEnsemble, DefaultCombHasTwelveOrMorePeaks) {
  const CombSpec spec;
  const auto e = sample_ensemble(spec, 10000, 1);
  ASSERT_EQ(e.count(), 10000u);
  std::set<int> teeth(e.tooth_indices.begin(), e.tooth_indices.end());
  EXPECT_GE(teeth.size(), 12u);
  // Histogram with one bin per tooth cell: every occupied cell is a local peak
  // at m * 8 MHz.
  double w2 = 0;
  for (std::size_t j = 0; j < e.count(); ++j) {
    const double c = spec.tooth_center(e.tooth_indices[j]);
    EXPECT_LT(std::abs(e.detunings[j] - c), 0.5 * spec.periodicity_delta);
    EXPECT_LE(std::abs(c), 0.5 * spec.bandwidth + 1e-6);
    w2 += e.weights[j] * e.weights[j];
  }
  EXPECT_NEAR(w2, 1.0, 1e-9);
}

TEST(SampleEnsemble, SingleToothAndDeterminism) {
  CombSpec spec;
  spec.bandwidth = spec.periodicity_delta;
  const auto e = sample_ensemble(spec, 500, 3);
  for (int m : e.tooth_indices) EXPECT_EQ(m, 0);
  const auto a = sample_ensemble(CombSpec{}, 1000, 42), b = sample_ensemble(CombSpec{}, 1000, 42);
  EXPECT_EQ(a.detunings, b.detunings);
  EXPECT_EQ(a.tooth_indices, b.tooth_indices);
  const auto c = sample_ensemble(CombSpec{}, 1000, 43);
  EXPECT_NE(a.detunings, c.detunings);
}

TEST(EchoTrace, PeaksAtMultiplesOfInverseDelta) {
  const auto e = sample_ensemble(CombSpec{}, 10000, 1);
  const auto tr = echo_trace(e, 300e-9, 2e-9);
  const auto p1 = peak_shape(tr, 125e-9, 30e-9);
  const auto p2 = peak_shape(tr, 250e-9, 30e-9);
  // Dominant peak in the bin containing 125 ns.
  EXPECT_LE(p1.time - 1e-9, 125e-9);
  EXPECT_GT(p1.time + 1e-9, 125e-9);
  EXPECT_LE(std::abs(p2.time - 250e-9), 2e-9);
  EXPECT_LT(p2.value, p1.value);
  EXPECT_NEAR(p1.fwhm, 10e-9, 3e-9);
  // Nothing between the echoes comes close to the first echo.
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    if (tr.times[i] > 30e-9 && tr.times[i] < 100e-9) { EXPECT_LT(tr.intensity[i], 0.1 * p1.value); }
}

TEST(EchoTrace, PeriodicityForOtherCombs) {
  for (double delta : {5e6, 12.5e6}) {
    CombSpec spec;
    spec.periodicity_delta = delta;
    spec.tooth_fwhm = 0.2 * delta;
    const auto e = sample_ensemble(spec, 4000, 2);
    const auto tr = echo_trace(e, 2.3 / delta, 2e-9);
    for (int k : {1, 2}) {
      const auto p = peak_shape(tr, k / delta, 0.3 / delta);
      EXPECT_LE(std::abs(p.time - k / delta), 2e-9) << "delta=" << delta << " k=" << k;
    }
  }
}

TEST(EchoTrace, SingleToothHasNoRevival) {
  CombSpec spec;
  spec.bandwidth = spec.periodicity_delta;
  const auto e = sample_ensemble(spec, 10000, 1);
  const auto tr = echo_trace(e, 300e-9, 2e-9);
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_LT(tr.intensity[i], tr.intensity[i - 1]) << i;
}

TEST(EchoTrace, IntensityMatchesGaussianDephasing) {
  // Bin-averaged trace, 0.25 ns bins, so the value at 125 ns is close to the
  // pointwise ratio to the t = 0 intensity.
  const auto e = sample_ensemble(CombSpec{}, 20000, 5);
  const double r = emission_intensity(e, 125e-9) / emission_intensity(e, 0.0);
  EXPECT_NEAR(r, gaussian_dephasing(2e6, 125e-9), 0.02);
}

TEST(EchoEfficiency, Examples) {
  CombSpec sharp;
  sharp.tooth_fwhm = 0;
  const auto ideal = echo_efficiency(sharp, 125e-9);
  EXPECT_NEAR(ideal.dephasing, 1.0, 1e-9);
  EXPECT_NEAR(ideal.value, 0.15, 1e-9);

  const CombSpec spec;
  const auto e1 = echo_efficiency(spec, 125e-9);
  const auto e2 = echo_efficiency(spec, 250e-9);
  EXPECT_LT(e2.value, e1.value);
  EXPECT_EQ(e1.order, 1);
  EXPECT_FALSE(e1.off_peak);
  EXPECT_NEAR(e1.dephasing, gaussian_dephasing(2e6, 125e-9), 0.02);
  EXPECT_NEAR(e2.dephasing, gaussian_dephasing(2e6, 250e-9), 0.02);
}

TEST(EchoEfficiency, WiderTeethDephaseFaster) {
  CombSpec narrow, wide;
  wide.tooth_fwhm = 2 * narrow.tooth_fwhm;
  EXPECT_LT(echo_efficiency(wide, 125e-9).value, echo_efficiency(narrow, 125e-9).value);
  // Same ordering from the echo trace peaks.
  const auto tn = echo_trace(sample_ensemble(narrow, 5000, 1), 140e-9, 2e-9);
  const auto tw = echo_trace(sample_ensemble(wide, 5000, 1), 140e-9, 2e-9);
  EXPECT_LT(peak_shape(tw, 125e-9, 10e-9).value, peak_shape(tn, 125e-9, 10e-9).value);
}

TEST(EchoEfficiency, ConvergesWithAtomNumber) {
  const CombSpec spec;
  EchoOptions o4, o5;
  o4.atoms = 10000;
  o5.atoms = 100000;
  const double a = echo_efficiency(spec, 125e-9, o4).value;
  const double b = echo_efficiency(spec, 125e-9, o5).value;
  EXPECT_LT(std::abs(a - b) / b, 0.05);
}

TEST(EchoProfile, NormalizedAndCentredOnEcho) {
  const auto e = sample_ensemble(CombSpec{}, 10000, 1);
  const EchoProfile p(e, 1, 0.1e-9);
  EXPECT_NEAR(p.fraction(p.start(), p.end()), 1.0, 1e-12);
  EXPECT_NEAR(p.start(), 62.5e-9, 1e-15);
  EXPECT_GT(p.fraction(120e-9, 130e-9), 0.75);
  StreamRng rng(1, 0);
  double mean = 0;
  for (int i = 0; i < 20000; ++i) {
    const double t = p.sample(rng.uniform(), rng.uniform());
    ASSERT_GE(t, p.start());
    ASSERT_LT(t, p.end());
    mean += t / 20000;
  }
  EXPECT_NEAR(mean, 125e-9, 1e-9);
}

TEST(RetrievePolarization, Examples) {
  const auto hv = PolarState::hv(Complex{1}, Complex{1});
  const auto same = retrieve_polarization(hv, 0, 125e-9, 0);
  EXPECT_NEAR(born_probability(same, hv), 1.0, 1e-12);

  const auto hm = PolarState::hv(Complex{1}, Complex{-1});
  EXPECT_NEAR(born_probability(retrieve_polarization(hv, 4e6, 125e-9, 0), hm), 1.0, 1e-12);
  // |1 - e^{i 1.25 pi}|^2 / 4
  const double expected = std::norm(Complex{1} - std::polar(1.0, 1.25 * std::numbers::pi)) / 4;
  EXPECT_NEAR(born_probability(retrieve_polarization(hv, 5e6, 125e-9, 0), hm), expected, 1e-12);
  EXPECT_NEAR(expected, 0.854, 5e-4);
}

TEST(RetrievePolarization, PhaseIsLinearInTime) {
  const auto in = PolarState::hv(Complex{0.6}, Complex{0, 0.8});
  const double d = 3.7e6;
  const auto two = retrieve_polarization(retrieve_polarization(in, d, 40e-9, 0), d, 70e-9, 0);
  const auto one = retrieve_polarization(in, d, 110e-9, 0);
  EXPECT_NEAR(std::abs(inner_product(one, two)), 1.0, 1e-12);
  const auto a = one.amplitudes(Basis::HV), b = two.amplitudes(Basis::HV);
  EXPECT_NEAR(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]), 0.0, 1e-12);
}

TEST(MinContributingIons, Examples) {
  EXPECT_EQ(min_contributing_ions(100e6, 11e3), 9091u);
  EXPECT_EQ(min_contributing_ions(5e3, 5e3), 1u);
  EXPECT_EQ(min_contributing_ions(1e9, 1e3), 1000000u);
  EXPECT_THROW(min_contributing_ions(0, 1), DomainError);
}
