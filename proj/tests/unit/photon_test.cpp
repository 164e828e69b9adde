#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lgiecho/photon.hpp"

using namespace lgiecho;

namespace {

SourceParams lossless_source(double p) {
  SourceParams s;
  s.pair_probability = p;
  s.heralding_efficiency = 1;
  s.transmission_signal = 1;
  s.detector_efficiency = 1;
  s.dark_rate = 0;
  return s;
}

std::int64_t sum(const std::vector<std::int64_t>& v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); }

std::size_t bin_of(const CoincidenceHistogram& h, double t) {
  return static_cast<std::size_t>(std::floor((t - h.origin) / h.bin_width + 1e-9));
}

}  // namespace

TEST(SourceParams, ValidationNamesField) {
  SourceParams s;
  s.dark_rate = -1;
  try {
    s.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "SourceParams.dark_rate");
  }
  s = SourceParams{};
  s.detector_efficiency = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_DOUBLE_EQ(SourceParams{}.trials_per_second(), 1e6);
}

TEST(SimulateRun, NoPairsNoDarksGivesEmptyHistogram) {
  SourceParams s;
  s.pair_probability = 0;
  s.dark_rate = 0;
  const auto h = simulate_run(s, MemoryConfig{}, PolarState::V(), 1'000'000, 1);
  EXPECT_EQ(h.total(), 0);
  EXPECT_EQ(h.heralds, 0);
}

TEST(SimulateRun, DarkOnlyRunIsAllDarkCounts) {
  SourceParams s;
  s.pair_probability = 0;
  s.dark_rate = 2e5;
  const auto h = simulate_run(s, MemoryConfig{}, PolarState::V(), 2'000'000, 2);
  EXPECT_GT(h.total(), 0);
  EXPECT_EQ(h.counts, h.dark_counts);
  EXPECT_EQ(sum(h.heralded_counts), 0);
}

TEST(SimulateRun, CountBookkeeping) {
  SourceParams s;
  s.pair_probability = 0.02;
  s.dark_rate = 1e4;
  const auto h = simulate_run(s, MemoryConfig{}, PolarState::V(), 50'000'000, 3);
  for (std::size_t i = 0; i < h.counts.size(); ++i) EXPECT_GE(h.counts[i], h.heralded_counts[i] + h.dark_counts[i]);
  // Without darks every count is a heralded or an accidental photon.
  s.dark_rate = 0;
  const auto h0 = simulate_run(s, MemoryConfig{}, PolarState::V(), 10'000'000, 3);
  EXPECT_EQ(sum(h0.dark_counts), 0);
  EXPECT_GT(sum(h0.heralded_counts), 0);
}

TEST(SimulateRun, LosslessEchoLandsInEchoWindow) {
  const auto source = lossless_source(0.01);
  MemoryConfig mem;
  mem.photon_coupling = 1;
  mem.max_echo_order = 1;
  mem.extinction_ratio = 1e12;
  const auto analyzer = retrieve_polarization(mem.input_polarization(), mem.excitation.detuning, 125e-9, 0);
  const auto h = simulate_run(source, mem, analyzer, 10'000'000, 4);
  const std::int64_t heralded = sum(h.heralded_counts);
  ASSERT_GT(heralded, 1000);
  // Every heralded photon is an echo: nothing outside one comb period around 125 ns.
  EXPECT_EQ(h.sum_in(h.heralded_counts, TimeWindow{62e-9, 188e-9}), heralded);
  EXPECT_EQ(h.heralded_counts[bin_of(h, 0.0)], 0);
  EXPECT_GE(static_cast<double>(h.sum_in(h.heralded_counts, h.signal_window)), 0.75 * static_cast<double>(heralded));
  EXPECT_NEAR(h.signal_window.start, 120e-9, 1e-18);
  EXPECT_NEAR(h.signal_window.end, 130e-9, 1e-18);
}

TEST(SimulateRun, DefaultHistogramStructure) {
  const SourceParams source;
  MemoryConfig mem;
  mem.input = PolarState::hv(Complex{1}, Complex{1});
  const auto analyzer = PolarState::hv(Complex{1}, Complex{-1});
  const auto h = simulate_run(source, mem, analyzer, 20'000'000'000, 5);
  const auto at = [&](double t) { return h.counts[bin_of(h, t)]; };
  const double background = static_cast<double>(h.window_count(TimeWindow{20e-9, 100e-9})) / 40;
  EXPECT_GT(at(0.0), 10 * background);
  const auto echo1 = h.window_count(h.snap(125e-9, 10e-9));
  const auto echo2 = h.window_count(h.snap(250e-9, 10e-9));
  EXPECT_GT(echo1, 5 * 5 * background);
  EXPECT_GT(echo2, 5 * background);
  EXPECT_LT(echo2, echo1);
}

TEST(SimulateRun, IndependentOfWorkerCount) {
  const SourceParams source;
  const MemoryConfig mem;
  RunOptions o;
  o.block_trials = 1 << 18;
  o.workers = 1;
  const auto a = simulate_run(source, mem, PolarState::V(), 3'000'000'000, 6, o);
  o.workers = 3;
  const auto b = simulate_run(source, mem, PolarState::V(), 3'000'000'000, 6, o);
  o.workers = 8;
  const auto c = simulate_run(source, mem, PolarState::V(), 3'000'000'000, 6, o);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.counts, c.counts);
  EXPECT_EQ(a.dark_counts, c.dark_counts);
  EXPECT_EQ(a.heralds, c.heralds);
  const auto d = simulate_run(source, mem, PolarState::V(), 3'000'000'000, 7, o);
  EXPECT_NE(a.counts, d.counts);
}

TEST(SimulateRun, AgreesWithClosedFormExpectation) {
  const SourceParams source;
  MemoryConfig mem;
  mem.input = PolarState::V();
  const auto analyzer = PolarState::V();
  const std::int64_t trials = 20'000'000'000;
  const auto h = simulate_run(source, mem, analyzer, trials, 8);
  const auto model = build_run_model(source, mem, analyzer);
  for (const auto& w : {h.snap(0, 2e-9), h.snap(125e-9, 10e-9), h.snap(400e-9, 2e-9), h.snap(250e-9, 10e-9)}) {
    const double expected = expected_window_counts(model, w, static_cast<double>(trials)).total();
    const double got = static_cast<double>(h.window_count(w));
    EXPECT_NEAR(got, expected, 4 * std::sqrt(expected) + 2) << "window at " << w.start;
  }
  const double herald_rate = source.pair_probability * source.detector_efficiency + source.dark_rate * source.trial_period;
  EXPECT_NEAR(static_cast<double>(h.heralds), herald_rate * trials, 4 * std::sqrt(herald_rate * trials));
}

TEST(G2Cross, Arithmetic) {
  auto h = make_histogram(SourceParams{});
  h.set_windows(WindowSpec{0, 2e-9, 400e-9});
  h.counts[bin_of(h, 0.0)] = 400;
  h.counts[bin_of(h, 400e-9)] = 100;
  const auto g = g2_cross(h);
  EXPECT_NEAR(g.g2, 4.0, 1e-12);
  EXPECT_EQ(g.n_peak, 400);
  EXPECT_EQ(g.n_offset, 100);
  EXPECT_NEAR(g.sigma, 4.0 * std::sqrt(1.0 / 400 + 1.0 / 100), 1e-12);
  for (auto& c : h.counts) c *= 7;
  EXPECT_NEAR(g2_cross(h).g2, 4.0, 1e-12);
  h.counts[bin_of(h, 400e-9)] = 0;
  EXPECT_THROW(g2_cross(h), EstimationError);
}

TEST(G2Cross, WindowsSnapToWholeBins) {
  auto h = make_histogram(SourceParams{});
  h.set_windows(WindowSpec{0, 2e-9, 400e-9});
  EXPECT_NEAR(h.signal_window.start, 0, 1e-18);
  EXPECT_NEAR(h.signal_window.end, 2e-9, 1e-18);
  EXPECT_NEAR(h.noise_window.start, 400e-9, 1e-18);
  h.set_windows(WindowSpec{125e-9, 10e-9, 400e-9});
  EXPECT_NEAR(h.signal_window.start, 120e-9, 1e-18);
  EXPECT_NEAR(h.signal_window.end, 130e-9, 1e-18);
  EXPECT_THROW(h.set_windows(WindowSpec{0, 10e-9, 4e-9}), ConfigError);
}

TEST(G2Cross, ThermalSourceMatchesOnePlusInverseP) {
  auto s = lossless_source(0.01);
  s.statistics = PairStatistics::Thermal;
  MemoryConfig mem;
  mem.photon_coupling = 0;
  mem.input = PolarState::V();
  const auto h = simulate_run(s, mem, PolarState::V(), 10'000'000, 9);
  const auto g = g2_cross(h);
  EXPECT_NEAR(g.g2, 101.0, 10.1);
}

TEST(G2Cross, IndependentOfEfficiencyWithoutDarks) {
  MemoryConfig mem;
  mem.photon_coupling = 1;
  mem.input = PolarState::V();
  std::vector<G2Result> r;
  for (double eff : {1.0, 0.4}) {
    auto s = lossless_source(0.05);
    s.detector_efficiency = eff;
    s.transmission_signal = eff;
    r.push_back(g2_cross(simulate_run(s, mem, PolarState::V(), 20'000'000, 10)));
  }
  EXPECT_LT(std::abs(r[0].g2 - r[1].g2), 3 * std::hypot(r[0].sigma, r[1].sigma));
  // Bernoulli pairs: g2 = 1/p.
  EXPECT_NEAR(r[0].g2, 20.0, 3 * r[0].sigma);
}

TEST(G2VsStorage, FlatWithoutDarks) {
  auto s = lossless_source(0.05);
  MemoryConfig mem;
  mem.photon_coupling = 1;
  mem.input = PolarState::V();
  const auto pts = g2_vs_storage(s, mem, PolarState::V(), {50e-9, 100e-9, 200e-9}, 20'000'000, 11);
  ASSERT_EQ(pts.size(), 3u);
  for (std::size_t k = 1; k < pts.size(); ++k)
    EXPECT_LT(std::abs(pts[k].g2.g2 - pts[0].g2.g2), 3 * std::hypot(pts[k].g2.sigma, pts[0].g2.sigma));
}

TEST(G2VsStorage, DefaultCalibration) {
  // Closed-form expectations stand in for long runs here.
  const SourceParams source;
  MemoryConfig base;
  base.input = PolarState::V();
  auto expected_g2 = [&](const MemoryConfig& m, double center, double width) {
    const auto model = build_run_model(source, m, PolarState::V());
    const auto h = make_histogram(source);
    const auto sig = h.snap(center, width);
    const TimeWindow noise{sig.start + 400e-9, sig.end + 400e-9};
    return expected_window_counts(model, sig, 1e11).total() / expected_window_counts(model, noise, 1e11).total();
  };
  const double transmitted = expected_g2(base, 0, 2e-9);
  EXPECT_NEAR(transmitted, 452, 45);
  double previous = transmitted;
  for (double tau : {50e-9, 100e-9, 150e-9, 200e-9, 250e-9}) {
    const double g = expected_g2(base.for_storage(tau), tau, 10e-9);
    EXPECT_GT(g, 2);
    EXPECT_LT(g, previous);
    previous = g;
  }
  EXPECT_NEAR(expected_g2(base.for_storage(50e-9), 50e-9, 10e-9), 54.7, 11);
}

TEST(G2VsStorage, EchoWindowHoldsRetrievedCounts) {
  // Heralded counts in the 10 ns echo window are retrieved photons, not
  // transmitted ones: the two are separated in time.
  const SourceParams source;
  MemoryConfig mem;
  mem.input = PolarState::V();
  const auto model = build_run_model(source, mem, PolarState::V());
  const auto w = make_histogram(source).snap(125e-9, 10e-9);
  double retrieved = 0, all = 0;
  for (const auto& f : model.fates) {
    const double n = f.probability * f.click_probability * model.fate_fraction(f, w.start, w.end);
    all += n;
    if (f.order >= 1) retrieved += n;
  }
  EXPECT_GE(retrieved / all, 0.9);

  const auto h = simulate_run(source, mem, PolarState::V(), 10'000'000'000, 12);
  const auto in_window = h.sum_in(h.heralded_counts, h.signal_window);
  ASSERT_GT(in_window, 100);
  // The transmitted bin holds heralded counts too, but none of them leak into the echo window.
  EXPECT_GT(h.heralded_counts[bin_of(h, 0.0)], 0);
  EXPECT_EQ(h.sum_in(h.heralded_counts, TimeWindow{-50e-9, 60e-9}),
            h.sum_in(h.heralded_counts, TimeWindow{-1e-9, 1e-9}) + h.sum_in(h.heralded_counts, TimeWindow{1e-9, 60e-9}));
}

TEST(HeraldedAutocorrBound, Examples) {
  EXPECT_NEAR(heralded_autocorr_bound(14.3), 0.2797, 1e-4);
  EXPECT_DOUBLE_EQ(heralded_autocorr_bound(4), 1.0);
  EXPECT_LT(heralded_autocorr_bound(1e12), 1e-11);
  EXPECT_DOUBLE_EQ(heralded_autocorr_bound(2, [](double x) { return 1 / x; }), 0.5);
  EXPECT_THROW(heralded_autocorr_bound(0), DomainError);
}
