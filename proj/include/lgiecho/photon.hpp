#pragma once

// Heralded single-photon source, memory insertion, detection and
// signal-idler coincidence analysis.
//
// Timing model: trial n starts at n * trial_period. The idler (herald) photon
// arrives at the trial start, the transmitted signal photon at the same time,
// and a photon re-emitted in echo order k at k / Delta plus a delay drawn from
// the Monte-Carlo echo shape. Dark counts of both detectors are homogeneous
// Poisson processes. A coincidence histogram accumulates, for every herald,
// the delays to all signal clicks within [origin, origin + span).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "afc.hpp"
#include "errors.hpp"
#include "lgi.hpp"
#include "parallel.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace lgiecho {

enum class PairStatistics {
  Bernoulli,  // at most one pair per trial
  Thermal     // two-mode squeezed vacuum: geometric pair number, mean = pair_probability
};

inline const char* to_string(PairStatistics s) { return s == PairStatistics::Bernoulli ? "bernoulli" : "thermal"; }

struct SourceParams {
  double pair_probability = 0.0022;
  double heralding_efficiency = 0.10;
  double transmission_signal = 0.23;
  double detector_efficiency = 0.35;
  double dark_rate = 50.0;  // Hz, per detector
  double trial_period = 400e-9;
  std::int64_t trials_per_cycle = 25000;
  double cycle_rate = 40.0;  // Hz
  PairStatistics statistics = PairStatistics::Bernoulli;

  void validate() const {
    auto prob = [](double x, const char* name) {
      if (!(x >= 0 && x <= 1)) throw ConfigError(std::string("SourceParams.") + name, "must lie in [0,1]");
    };
    if (statistics == PairStatistics::Bernoulli) {
      prob(pair_probability, "pair_probability");
    } else if (!(pair_probability >= 0) || !std::isfinite(pair_probability)) {
      throw ConfigError("SourceParams.pair_probability", "mean pair number must be finite and >= 0");
    }
    prob(heralding_efficiency, "heralding_efficiency");
    prob(transmission_signal, "transmission_signal");
    prob(detector_efficiency, "detector_efficiency");
    if (!(dark_rate >= 0) || !std::isfinite(dark_rate)) throw ConfigError("SourceParams.dark_rate", "must be >= 0");
    if (!(trial_period > 0) || !std::isfinite(trial_period))
      throw ConfigError("SourceParams.trial_period", "must be > 0");
    if (trials_per_cycle < 1) throw ConfigError("SourceParams.trials_per_cycle", "must be >= 1");
    if (!(cycle_rate >= 0) || !std::isfinite(cycle_rate)) throw ConfigError("SourceParams.cycle_rate", "must be >= 0");
  }

  /// Signal-arm detection probability for a photon that is not absorbed.
  double signal_path_efficiency() const { return heralding_efficiency * transmission_signal * detector_efficiency; }

  double trials_per_second() const { return static_cast<double>(trials_per_cycle) * cycle_rate; }

  bool operator==(const SourceParams&) const = default;
};

/// The two crystals, the stored excitation and the readout optics.
struct MemoryConfig {
  CombSpec h_comb{};
  CombSpec v_comb{8e6, 2e6, 100e6, 8.0, 0.05, 5e6};
  ExcitationState excitation{};
  EchoOptions echo{};
  double photon_coupling = 0.0375;  // probability that a signal photon is absorbed by the memory
  double extinction_ratio = 1000.0;
  int max_echo_order = 3;
  std::optional<PolarState> input;  // photon polarization; unset means H + exp(i phase0) V

  void validate() const {
    h_comb.validate();
    v_comb.validate();
    excitation.validate();
    echo.validate();
    if (h_comb.periodicity_delta != v_comb.periodicity_delta || h_comb.tooth_fwhm != v_comb.tooth_fwhm ||
        h_comb.bandwidth != v_comb.bandwidth)
      throw ConfigError("MemoryConfig.v_comb", "H and V combs must share periodicity, tooth width and bandwidth");
    const double det = v_comb.center_offset - h_comb.center_offset;
    if (std::abs(det - excitation.detuning) > 1e-6 * std::max(1.0, std::abs(excitation.detuning)))
      throw ConfigError("MemoryConfig.v_comb.center_offset", "comb offset difference must equal the excitation detuning");
    if (!(photon_coupling >= 0 && photon_coupling <= 1)) throw ConfigError("MemoryConfig.photon_coupling", "must lie in [0,1]");
    if (!(extinction_ratio >= 1)) throw ConfigError("MemoryConfig.extinction_ratio", "must be >= 1");
    if (max_echo_order < 0) throw ConfigError("MemoryConfig.max_echo_order", "must be >= 0");
  }

  /// Memory with both combs set to echo after `storage_time` (Delta = 1 / storage_time).
  MemoryConfig for_storage(double storage_time) const {
    if (!(storage_time > 0)) throw DomainError("MemoryConfig::for_storage: storage time must be > 0");
    MemoryConfig m = *this;
    m.h_comb.periodicity_delta = 1.0 / storage_time;
    m.v_comb.periodicity_delta = 1.0 / storage_time;
    return m;
  }

  /// Memory whose excitation equals `level` at time t1 (phase plate compensation).
  MemoryConfig prepared(Level level, double t1) const {
    MemoryConfig m = *this;
    m.excitation.phase0 =
        wrap_phase(-kTwoPi * excitation.detuning * t1 + (level == Level::A ? std::numbers::pi : 0.0));
    return m;
  }

  PolarState input_polarization() const {
    return input ? *input : PolarState::hv(Complex{1}, std::polar(1.0, excitation.phase0));
  }

  bool operator==(const MemoryConfig&) const = default;
};

struct TimeWindow {
  double start = 0;
  double end = 0;

  double width() const { return end - start; }
  bool overlaps(const TimeWindow& o) const { return start < o.end && o.start < end; }
  bool operator==(const TimeWindow&) const = default;
};

/// Signal window of `width` centred on `center`, and an equal noise window
/// shifted by `noise_offset`.
struct WindowSpec {
  double center = 0;
  double width = 2e-9;
  double noise_offset = 400e-9;
};

struct CoincidenceHistogram {
  double bin_width = 2e-9;
  double origin = -50e-9;  // delay at the start of bin 0
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> dark_counts;      // stop click was a detector dark count
  std::vector<std::int64_t> heralded_counts;  // stop photon came from the heralding trial
  TimeWindow signal_window;
  TimeWindow noise_window;
  std::int64_t trials = 0;
  std::int64_t heralds = 0;

  double bin_start(std::size_t i) const { return origin + static_cast<double>(i) * bin_width; }
  double span() const { return static_cast<double>(counts.size()) * bin_width; }

  /// Window made of whole bins: `width` rounded to a bin multiple, starting at
  /// the bin edge nearest to center - width/2.
  TimeWindow snap(double center, double width) const {
    const auto n = std::max<long>(1, std::lround(width / bin_width));
    const double start_edge = center - 0.5 * static_cast<double>(n) * bin_width;
    // Ties (center on a bin edge with an odd bin count) go to the later bin.
    const long i0 = static_cast<long>(std::floor((start_edge - origin) / bin_width + 0.5 + 1e-9));
    return {origin + static_cast<double>(i0) * bin_width, origin + static_cast<double>(i0 + n) * bin_width};
  }

  void set_windows(const WindowSpec& w) {
    signal_window = snap(w.center, w.width);
    const double shift = static_cast<double>(std::lround(w.noise_offset / bin_width)) * bin_width;
    noise_window = {signal_window.start + shift, signal_window.end + shift};
    if (signal_window.overlaps(noise_window)) throw ConfigError("CoincidenceHistogram.noise_window", "windows must be disjoint");
  }

  template <class Vec>
  std::int64_t sum_in(const Vec& v, const TimeWindow& w) const {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double mid = bin_start(i) + 0.5 * bin_width;
      if (mid >= w.start && mid < w.end) n += v[i];
    }
    return n;
  }

  std::int64_t window_count(const TimeWindow& w) const { return sum_in(counts, w); }

  std::int64_t total() const {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
};

/// One way a signal photon can leave the sample.
struct Fate {
  int order = 0;                  // 0 = transmitted, k >= 1 = echo of order k
  double probability = 0;         // per signal photon
  double click_probability = 0;   // detection given this fate (path, detector, analyzer)
  double time = 0;                // nominal emission time after the trial start
};

/// Everything about a run that does not depend on the random stream.
struct RunModel {
  SourceParams source;
  std::vector<Fate> fates;
  std::vector<EchoProfile> profiles;  // profiles[k - 1] for echo order k
  double idler_click = 0;

  /// Probability that one pair produces a signal click (any fate).
  double signal_click() const {
    double b = 0;
    for (const auto& f : fates) b += f.probability * f.click_probability;
    return b;
  }

  /// Fraction of fate-f photons whose arrival falls in [a, b) relative to the trial start.
  double fate_fraction(const Fate& f, double a, double b) const {
    // Transmitted photons arrive at t = 0; the 1 ps slack absorbs rounding in window edges.
    if (f.order == 0) return (a <= 1e-12 && -1e-12 < b) ? 1.0 : 0.0;
    return profiles[f.order - 1].fraction(a, b);
  }
};

inline RunModel build_run_model(const SourceParams& source, const MemoryConfig& memory, const PolarState& analyzer,
                                unsigned workers = 1) {
  source.validate();
  memory.validate();
  RunModel m;
  m.source = source;
  m.idler_click = source.detector_efficiency;

  const double path = source.signal_path_efficiency();
  const double leak = 1.0 / memory.extinction_ratio;
  const PolarState input = memory.input_polarization();
  auto pass = [&](const PolarState& s) {
    const double p = born_probability(s, analyzer);
    return p + (1 - p) * leak;
  };

  m.fates.push_back({0, 1.0 - memory.photon_coupling, path * pass(input), 0.0});

  const double tau = memory.h_comb.echo_time();
  int orders = 0;
  for (int k = 1; k <= memory.max_echo_order; ++k)
    if (k * tau < source.trial_period) orders = k;
  if (orders > 0 && memory.photon_coupling > 0) {
    const auto ensemble = sample_ensemble(memory.h_comb, memory.echo.atoms, memory.echo.seed);
    double remaining = 1.0;
    for (int k = 1; k <= orders; ++k) {
      const double eta = std::min(remaining, echo_efficiency(ensemble, memory.echo.prefactor, k * tau, workers).value);
      remaining -= eta;
      const PolarState out = retrieve_polarization(input, memory.excitation.detuning, k * tau, 0.0);
      m.fates.push_back({k, memory.photon_coupling * eta, path * pass(out), k * tau});
      m.profiles.emplace_back(ensemble, k, 0.1e-9, workers);
    }
  }
  return m;
}

namespace detail {

struct Herald {
  std::int64_t t;      // ps
  std::int64_t trial;  // -1 for a dark count
};

struct Click {
  std::int64_t t;
  std::int64_t trial;

  bool operator<(const Click& o) const { return t < o.t || (t == o.t && trial < o.trial); }
};

struct BlockEvents {
  std::vector<Herald> heralds;
  std::vector<Click> clicks;
};

inline std::int64_t to_ps(double seconds) { return std::llround(seconds * 1e12); }

// Events of trials [begin, end). Uses only the stream (seed, block).
inline BlockEvents generate_block(const RunModel& m, std::uint64_t seed, std::int64_t block, std::int64_t begin,
                                  std::int64_t end) {
  BlockEvents ev;
  StreamRng rng(seed, static_cast<std::uint64_t>(block));
  const auto& src = m.source;
  const std::int64_t period = to_ps(src.trial_period);
  const double a = m.idler_click;
  const double b = m.signal_click();

  std::vector<double> fate_weights;
  for (const auto& f : m.fates) fate_weights.push_back(f.probability * f.click_probability);

  auto click_time = [&](const Fate& f, std::int64_t trial) {
    std::int64_t t = trial * period;
    if (f.order > 0) t += to_ps(m.profiles[f.order - 1].sample(rng.uniform(), rng.uniform()));
    return t;
  };
  auto pick_clicked_fate = [&]() -> const Fate& {
    double u = rng.uniform() * b;
    for (std::size_t i = 0; i < m.fates.size(); ++i) {
      if (u < fate_weights[i]) return m.fates[i];
      u -= fate_weights[i];
    }
    return m.fates.back();
  };

  if (src.statistics == PairStatistics::Bernoulli) {
    // Thinned pair stream: only trials in which the pair produces a click are visited.
    const double r1 = 1 - (1 - a) * (1 - b);
    const double q = src.pair_probability * r1;
    if (q > 0) {
      const double p_idler_only = a * (1 - b) / r1;
      const double p_signal_only = (1 - a) * b / r1;
      std::geometric_distribution<std::int64_t> skip(q);
      for (std::int64_t n = begin + (q < 1 ? skip(rng) : 0); n < end; n += 1 + (q < 1 ? skip(rng) : 0)) {
        // Outcomes laid out on [0,1): signal only | idler only | both.
        const double u = rng.uniform();
        const bool has_signal = u < p_signal_only || u >= p_signal_only + p_idler_only;
        const bool has_idler = u >= p_signal_only;
        if (has_idler) ev.heralds.push_back({n * period, n});
        if (has_signal) ev.clicks.push_back({click_time(pick_clicked_fate(), n), n});
      }
    }
  } else {
    const double nbar = src.pair_probability;
    const double ratio = nbar / (1 + nbar);  // P(n >= 1) and the geometric ratio
    if (ratio > 0) {
      std::geometric_distribution<std::int64_t> skip(ratio);
      std::geometric_distribution<std::int64_t> extra(1 - ratio);
      std::vector<char> fired(m.fates.size());
      for (std::int64_t n = begin + skip(rng); n < end; n += 1 + skip(rng)) {
        const std::int64_t pairs = 1 + extra(rng);
        bool herald = false;
        std::fill(fired.begin(), fired.end(), 0);
        for (std::int64_t k = 0; k < pairs; ++k) {
          if (rng.bernoulli(a)) herald = true;
          double u = rng.uniform();
          for (std::size_t i = 0; i < m.fates.size(); ++i) {
            if (u < m.fates[i].probability) {
              if (rng.bernoulli(m.fates[i].click_probability)) fired[i] = 1;
              break;
            }
            u -= m.fates[i].probability;
          }
        }
        if (herald) ev.heralds.push_back({n * period, n});
        // Non-number-resolving detector: coincident photons of one fate give one click.
        for (std::size_t i = 0; i < m.fates.size(); ++i)
          if (fired[i]) ev.clicks.push_back({click_time(m.fates[i], n), n});
      }
    }
  }

  if (src.dark_rate > 0) {
    const std::int64_t t0 = begin * period;
    const double duration = static_cast<double>(end - begin) * src.trial_period;
    std::poisson_distribution<std::int64_t> darks(src.dark_rate * duration);
    const auto span = static_cast<double>((end - begin) * period);
    for (std::int64_t i = 0, n = darks(rng); i < n; ++i)
      ev.heralds.push_back({t0 + static_cast<std::int64_t>(rng.uniform() * span), -1});
    for (std::int64_t i = 0, n = darks(rng); i < n; ++i)
      ev.clicks.push_back({t0 + static_cast<std::int64_t>(rng.uniform() * span), -1});
  }

  std::sort(ev.heralds.begin(), ev.heralds.end(),
            [](const Herald& x, const Herald& y) { return x.t < y.t || (x.t == y.t && x.trial < y.trial); });
  std::sort(ev.clicks.begin(), ev.clicks.end());
  return ev;
}

}  // namespace detail

struct RunOptions {
  unsigned workers = 1;
  std::int64_t block_trials = std::int64_t{1} << 20;
  std::optional<WindowSpec> window;  // defaults to default_window()
};

/// Retrieved-photon window (10 ns at 1/Delta) when the memory stores photons,
/// otherwise the transmitted window (2 ns at t = 0). Noise windows sit one
/// trial period later.
inline WindowSpec default_window(const SourceParams& source, const MemoryConfig& memory) {
  if (memory.photon_coupling > 0 && memory.max_echo_order >= 1 && memory.h_comb.echo_time() < source.trial_period)
    return {memory.h_comb.echo_time(), 10e-9, source.trial_period};
  return {0.0, 2e-9, source.trial_period};
}

inline CoincidenceHistogram make_histogram(const SourceParams& source, double bin_width = 2e-9) {
  CoincidenceHistogram h;
  h.bin_width = bin_width;
  h.origin = -bin_width * std::ceil(50e-9 / bin_width - 1e-9);
  const auto n = static_cast<std::size_t>(std::ceil((2 * source.trial_period + 100e-9) / bin_width - 1e-9));
  h.counts.assign(n, 0);
  h.dark_counts.assign(n, 0);
  h.heralded_counts.assign(n, 0);
  return h;
}

/// Simulates `duration_trials` trials and histograms herald-to-signal delays.
/// Trials are processed in fixed blocks, each with its own random stream
/// (seed, block index); any split of blocks across workers gives the same
/// histogram.
inline CoincidenceHistogram simulate_run(const SourceParams& source, const MemoryConfig& memory,
                                         const PolarState& analyzer, std::int64_t duration_trials, std::uint64_t seed,
                                         const RunOptions& opts = {}) {
  if (duration_trials < 0) throw DomainError("simulate_run: duration_trials must be >= 0");
  if (opts.block_trials < 1) throw DomainError("simulate_run: block_trials must be >= 1");
  const RunModel model = build_run_model(source, memory, analyzer, opts.workers);

  CoincidenceHistogram hist = make_histogram(source);
  hist.set_windows(opts.window.value_or(default_window(source, memory)));
  hist.trials = duration_trials;

  const std::int64_t B = opts.block_trials;
  const std::int64_t n_blocks = (duration_trials + B - 1) / B;
  const std::int64_t bw_ps = detail::to_ps(hist.bin_width);
  const std::int64_t origin_ps = detail::to_ps(hist.origin);
  const auto n_bins = static_cast<std::int64_t>(hist.counts.size());
  const std::uint64_t stream_seed = derive_seed(seed, 0x7068'6f74'6f6eULL);

  auto block_events = [&](std::int64_t b) {
    if (b < 0 || b >= n_blocks) return detail::BlockEvents{};
    return detail::generate_block(model, stream_seed, b, b * B, std::min(duration_trials, (b + 1) * B));
  };

  struct Partial {
    std::vector<std::int64_t> counts, dark, heralded;
    std::int64_t heralds = 0;
  };
  const unsigned nw = std::max(1u, opts.workers);
  const std::size_t ranges = static_cast<std::size_t>(std::min<std::int64_t>(nw, std::max<std::int64_t>(1, n_blocks)));
  auto partials = parallel_map(ranges, nw, [&](std::size_t r) {
    Partial p{std::vector<std::int64_t>(n_bins), std::vector<std::int64_t>(n_bins), std::vector<std::int64_t>(n_bins)};
    const std::int64_t b0 = n_blocks * static_cast<std::int64_t>(r) / static_cast<std::int64_t>(ranges);
    const std::int64_t b1 = n_blocks * static_cast<std::int64_t>(r + 1) / static_cast<std::int64_t>(ranges);
    if (b0 >= b1) return p;
    detail::BlockEvents prev = block_events(b0 - 1), cur = block_events(b0), next = block_events(b0 + 1);
    std::vector<detail::Click> window;
    for (std::int64_t b = b0; b < b1; ++b) {
      window.clear();
      window.insert(window.end(), prev.clicks.begin(), prev.clicks.end());
      window.insert(window.end(), cur.clicks.begin(), cur.clicks.end());
      window.insert(window.end(), next.clicks.begin(), next.clicks.end());
      std::sort(window.begin(), window.end());
      for (const auto& h : cur.heralds) {
        ++p.heralds;
        const std::int64_t lo = h.t + origin_ps;
        auto it = std::lower_bound(window.begin(), window.end(), detail::Click{lo, std::numeric_limits<std::int64_t>::min()});
        for (; it != window.end(); ++it) {
          const std::int64_t bin = (it->t - lo) / bw_ps;
          if (bin >= n_bins) break;
          ++p.counts[bin];
          if (it->trial < 0)
            ++p.dark[bin];
          else if (it->trial == h.trial)
            ++p.heralded[bin];
        }
      }
      prev = std::move(cur);
      cur = std::move(next);
      next = block_events(b + 2);
    }
    return p;
  });
  for (const auto& p : partials) {
    for (std::int64_t i = 0; i < n_bins; ++i) {
      hist.counts[i] += p.counts[i];
      hist.dark_counts[i] += p.dark[i];
      hist.heralded_counts[i] += p.heralded[i];
    }
    hist.heralds += p.heralds;
  }
  return hist;
}

/// Expected coincidences in a window over `trials` trials, split by origin.
struct WindowExpectation {
  double heralded = 0;
  double accidental = 0;
  double dark = 0;

  double total() const { return heralded + accidental + dark; }
};

/// Closed-form counterpart of simulate_run for Bernoulli pair statistics
/// (edge effects at the first and last trial neglected).
inline WindowExpectation expected_window_counts(const RunModel& m, const TimeWindow& w, double trials) {
  const auto& src = m.source;
  if (src.statistics != PairStatistics::Bernoulli)
    throw DomainError("expected_window_counts: closed form covers Bernoulli pair statistics only");
  const double p = src.pair_probability;
  const double T = src.trial_period;
  const double pair_heralds = p * m.idler_click;
  const double dark_heralds = src.dark_rate * T;

  auto photons_in = [&](double a, double b) {
    double s = 0;
    for (const auto& f : m.fates) s += f.probability * f.click_probability * m.fate_fraction(f, a, b);
    return s;
  };
  WindowExpectation e;
  e.heralded = trials * pair_heralds * photons_in(w.start, w.end);
  double other = 0;
  for (int shift = -2; shift <= 3; ++shift)
    if (shift != 0) other += photons_in(w.start - shift * T, w.end - shift * T);
  e.accidental = trials * (pair_heralds * p * other + dark_heralds * (w.width() / T) * p * m.signal_click());
  e.dark = trials * (pair_heralds + dark_heralds) * src.dark_rate * w.width();
  return e;
}

inline WindowExpectation expected_window_counts(const SourceParams& source, const MemoryConfig& memory,
                                                const PolarState& analyzer, const TimeWindow& w, double trials) {
  return expected_window_counts(build_run_model(source, memory, analyzer), w, trials);
}

struct G2Result {
  double g2 = 0;
  double sigma = 0;
  std::int64_t n_peak = 0;
  std::int64_t n_offset = 0;
};

/// Signal-idler cross-correlation from the signal and noise windows of a
/// histogram: ratio of window-normalized coincidence rates.
inline G2Result g2_cross(const CoincidenceHistogram& hist) {
  if (hist.signal_window.overlaps(hist.noise_window)) throw DomainError("g2_cross: windows overlap");
  const double ws = hist.signal_window.width();
  const double wn = hist.noise_window.width();
  if (!(ws > 0) || !(wn > 0)) throw DomainError("g2_cross: empty window");
  G2Result r;
  r.n_peak = hist.window_count(hist.signal_window);
  r.n_offset = hist.window_count(hist.noise_window);
  if (r.n_offset == 0)
    throw EstimationError("g2_cross: no coincidences in the noise window; integrate for longer (more trials)");
  const double np = static_cast<double>(r.n_peak);
  const double no = static_cast<double>(r.n_offset);
  r.g2 = (np / ws) / (no / wn);
  // sigma = g2 * sqrt(1/n_peak + 1/n_offset), written to stay finite at n_peak = 0.
  r.sigma = (wn / ws) * std::sqrt(np / (no * no) + np * np / (no * no * no));
  return r;
}

/// Upper bound on the heralded signal autocorrelation g2_{i|ss} implied by
/// a measured cross-correlation. The bounding rule is pluggable; the default
/// is 4 / g2_si.
inline double heralded_autocorr_bound(double g2_si,
                                      const std::function<double(double)>& bound_fn = [](double x) { return 4.0 / x; }) {
  if (!(g2_si > 0)) throw DomainError("heralded_autocorr_bound: g2_si must be > 0");
  return bound_fn(g2_si);
}

struct StoragePoint {
  double storage_time = 0;
  G2Result g2;
  CoincidenceHistogram histogram;
};

/// One run per storage time. Storage time 0 measures the transmitted photon
/// (2 ns window at t = 0); a positive storage time tau reconfigures both combs
/// to Delta = 1 / tau and uses the 10 ns retrieved-photon window.
inline std::vector<StoragePoint> g2_vs_storage(const SourceParams& source, const MemoryConfig& memory,
                                               const PolarState& analyzer, const std::vector<double>& storage_times,
                                               std::int64_t trials, std::uint64_t seed, unsigned workers = 1) {
  std::vector<StoragePoint> out;
  for (std::size_t i = 0; i < storage_times.size(); ++i) {
    const double tau = storage_times[i];
    if (!(tau >= 0)) throw DomainError("g2_vs_storage: negative storage time");
    RunOptions opts;
    opts.workers = workers;
    MemoryConfig mem = memory;
    if (tau > 0) {
      mem = memory.for_storage(tau);
      opts.window = WindowSpec{tau, 10e-9, source.trial_period};
    } else {
      opts.window = WindowSpec{0.0, 2e-9, source.trial_period};
    }
    StoragePoint pt;
    pt.storage_time = tau;
    pt.histogram = simulate_run(source, mem, analyzer, trials, derive_seed(seed, i), opts);
    pt.g2 = g2_cross(pt.histogram);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace lgiecho
