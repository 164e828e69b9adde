#pragma once

// Estimators and tests for the stationarity assumptions behind the LGI:
// conditional probabilities from click counts, time-translation invariance,
// trace-distance monotonicity, and noisy K-/+ reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "lgi.hpp"
#include "photon.hpp"
#include "quantum.hpp"
#include "random.hpp"
#include "tomography.hpp"

namespace lgiecho {

struct CountPair {
  std::int64_t n_target = 0;      // clicks with the analyzer on outcome j
  std::int64_t n_complement = 0;  // clicks with the analyzer on the orthogonal outcome

  std::int64_t total() const { return n_target + n_complement; }
  bool operator==(const CountPair&) const = default;
};

struct QEstimate {
  double q_hat = 0;
  double sigma = 0;
  bool boundary = false;  // one outcome had zero clicks; sigma is the Wilson half-width
};

/// q = n_t / n with binomial standard error sqrt(n_t n_c / n^3). When either
/// count is zero that formula gives 0; the Wilson (z = 1) half-width
/// 1 / (2 (n + 1)) is reported instead and the estimate is flagged.
inline QEstimate estimate_q(const CountPair& c) {
  if (c.n_target < 0 || c.n_complement < 0) throw DomainError("estimate_q: negative counts");
  if (c.total() < 1) throw DomainError("estimate_q: no clicks in either outcome");
  const auto nt = static_cast<double>(c.n_target);
  const auto nc = static_cast<double>(c.n_complement);
  const double n = nt + nc;
  QEstimate e;
  e.q_hat = nt / n;
  if (c.n_target == 0 || c.n_complement == 0) {
    e.boundary = true;
    e.sigma = 0.5 / (n + 1);
  } else {
    e.sigma = std::sqrt(nt * nc / (n * n * n));
  }
  return e;
}

/// Noisy LGI report at time t from the D-analyzer counts after t and 2t.
inline LgiReport k_with_sigma(double t, const CountPair& counts_t, const CountPair& counts_2t) {
  const auto a = estimate_q(counts_t);
  const auto b = estimate_q(counts_2t);
  return LgiReport::from_correlations(t, 2 * a.q_hat - 1, 2 * b.q_hat - 1, 2 * a.sigma, 2 * b.sigma);
}

// ---------------------------------------------------------------------------
// Counting model

enum class CountingMode {
  Ideal,    // clicks split exactly by the closed-form Q_ij
  Detector  // photon-pipeline expectation: efficiencies, leakage, accidentals, darks
};

inline const char* to_string(CountingMode m) { return m == CountingMode::Ideal ? "ideal" : "detector"; }

/// Expected click counts for a conditional-probability setting: prepare
/// level i at t1 (phase plate), store until t2 and count with the analyzer on
/// j and on the orthogonal level.
///
/// In Detector mode the memory is reconfigured to Delta = 1 / t2 and the
/// counts are raw coincidences in the retrieved-photon window (signal,
/// accidentals and darks), so they inherit the storage-time dependence of the
/// retrieval efficiency.
struct CountingModel {
  CountingMode mode = CountingMode::Detector;
  SourceParams source{};
  MemoryConfig memory{};
  double trials_per_setting = 3.6e10;  // Detector mode
  double window_width = 10e-9;         // Detector mode
  double clicks_per_setting = 1000;    // Ideal mode, summed over both analyzer settings

  struct Expected {
    double target = 0;
    double complement = 0;
  };

  Expected expected(Level i, Level j, double t1, double t2) const {
    if (!(t1 >= 0) || !(t2 > t1)) throw DomainError("CountingModel: needs 0 <= t1 < t2");
    if (mode == CountingMode::Ideal) {
      const double q = conditional_probability(memory.excitation, i, j, t1, t2);
      return {clicks_per_setting * q, clicks_per_setting * (1 - q)};
    }
    MemoryConfig m = memory.prepared(i, t1).for_storage(t2);
    m.input.reset();
    const Level jc = j == Level::D ? Level::A : Level::D;
    const TimeWindow w = make_histogram(source).snap(t2, window_width);
    Expected e;
    e.target = expected_window_counts(build_run_model(source, m, level_state(j)), w, trials_per_setting).total();
    e.complement = expected_window_counts(build_run_model(source, m, level_state(jc)), w, trials_per_setting).total();
    return e;
  }
};

/// Independent Poisson draws around the expected counts.
inline CountPair sample_counts(const CountingModel::Expected& e, StreamRng& rng) {
  CountPair c;
  c.n_target = e.target > 0 ? std::poisson_distribution<std::int64_t>(e.target)(rng) : 0;
  c.n_complement = e.complement > 0 ? std::poisson_distribution<std::int64_t>(e.complement)(rng) : 0;
  return c;
}

// ---------------------------------------------------------------------------
// Time-translation invariance

/// One measured point Q_ij(t, t + tau).
struct InvarianceCell {
  Level i = Level::D;
  Level j = Level::D;
  double tau = 0;
  double t = 0;
  CountPair counts;
};

struct InvarianceEntry {
  Level i = Level::D;
  Level j = Level::D;
  double tau = 0;
  double t = 0;
  double q_hat = 0;
  double sigma = 0;
  bool boundary = false;
};

struct InvarianceReport {
  std::vector<InvarianceEntry> grid;
  double chi2 = 0;
  int dof = 0;
  double p_value = 1;
  double alpha = 0.05;
  bool pass = true;
  int degenerate_families = 0;  // families whose pooled q is 0 or 1 (no variance, excluded)
};

/// Upper tail of the chi-square distribution.
inline double chi2_survival(double chi2, int dof) {
  if (dof <= 0) return 1.0;
  if (chi2 <= 0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * chi2);
}

/// Pearson chi-square of each (i, j, tau) family against its pooled mean.
/// dof is the number of t values minus one, summed over families.
inline InvarianceReport invariance_test(const std::vector<InvarianceCell>& cells, double alpha = 0.05) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("invariance_test: alpha must lie in (0,1)");
  using Key = std::tuple<int, int, double>;
  std::map<Key, std::vector<const InvarianceCell*>> families;
  for (const auto& c : cells) families[{static_cast<int>(c.i), static_cast<int>(c.j), c.tau}].push_back(&c);
  if (families.empty()) throw DomainError("invariance_test: empty grid");

  InvarianceReport r;
  r.alpha = alpha;
  for (const auto& c : cells) {
    const auto e = estimate_q(c.counts);
    r.grid.push_back({c.i, c.j, c.tau, c.t, e.q_hat, e.sigma, e.boundary});
  }
  for (const auto& [key, fam] : families) {
    if (fam.size() < 2) throw DomainError("invariance_test: each family needs at least two t values");
    double nt = 0, n = 0;
    for (const auto* c : fam) {
      nt += static_cast<double>(c->counts.n_target);
      n += static_cast<double>(c->counts.total());
    }
    const double q = nt / n;
    if (q <= 0 || q >= 1) {
      ++r.degenerate_families;  // every point agrees exactly
      continue;
    }
    for (const auto* c : fam) {
      const auto ni = static_cast<double>(c->counts.total());
      const double d = static_cast<double>(c->counts.n_target) - ni * q;
      r.chi2 += d * d / (ni * q * (1 - q));
    }
    r.dof += static_cast<int>(fam.size()) - 1;
  }
  r.p_value = chi2_survival(r.chi2, r.dof);
  r.pass = r.p_value >= alpha;
  return r;
}

/// Families plotted for the invariance check at detuning 5 MHz.
struct InvarianceFamily {
  Level i;
  Level j;
  double tau;
};

inline std::vector<InvarianceFamily> default_invariance_families() {
  return {{Level::D, Level::A, 100e-9}, {Level::D, Level::D, 100e-9 / 3}, {Level::A, Level::A, 200e-9 / 3},
          {Level::A, Level::A, 100e-9}};
}

/// Expected counts for every (family, t) point, in family-major order.
inline std::vector<CountingModel::Expected> expected_grid(const CountingModel& model,
                                                          const std::vector<InvarianceFamily>& families,
                                                          const std::vector<double>& times, unsigned workers = 1) {
  const std::size_t nt = times.size();
  return parallel_map(families.size() * nt, workers, [&](std::size_t k) {
    const auto& f = families[k / nt];
    const double t = times[k % nt];
    return model.expected(f.i, f.j, t, t + f.tau);
  });
}

/// One Poisson realization of a grid; point k uses stream (seed, k).
inline std::vector<InvarianceCell> sample_grid(const std::vector<CountingModel::Expected>& expected,
                                               const std::vector<InvarianceFamily>& families,
                                               const std::vector<double>& times, std::uint64_t seed) {
  std::vector<InvarianceCell> cells;
  const std::size_t nt = times.size();
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& f = families[k / nt];
    StreamRng rng(seed, k);
    cells.push_back({f.i, f.j, f.tau, times[k % nt], sample_counts(expected[k], rng)});
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Markovianity

struct MonotonicityReport {
  std::vector<double> times;
  std::vector<double> distances;
  std::vector<double> sigmas;  // empty in exact mode
  double max_increase = 0;     // largest step-to-step rise, 0 if non-increasing
  double threshold = 0;
  bool pass = true;
};

inline MonotonicityReport monotonicity_report(std::vector<double> times, std::vector<double> distances,
                                              double threshold) {
  if (times.size() != distances.size()) throw DomainError("monotonicity_report: times and distances differ in length");
  if (!(threshold >= 0)) throw DomainError("monotonicity_report: threshold must be >= 0");
  MonotonicityReport r;
  for (std::size_t k = 1; k < distances.size(); ++k) r.max_increase = std::max(r.max_increase, distances[k] - distances[k - 1]);
  r.times = std::move(times);
  r.distances = std::move(distances);
  r.threshold = threshold;
  r.pass = r.max_increase <= threshold;
  return r;
}

struct MarkovianityOptions {
  bool use_tomography = false;
  std::int64_t shots = 10000;  // per basis
  std::uint64_t seed = 1;
  int bootstrap = 20;  // parametric resamples per time for the distance spread
  double exact_threshold = 1e-12;
  unsigned workers = 1;
};

/// Trace distance between two initial states evolved by `channel`. In
/// tomography mode each state is reconstructed by MLE from simulated counts
/// and the pass threshold is 3 * sqrt(2) * (largest bootstrap sigma), the
/// 3-sigma bound on the difference of two independent distance estimates.
inline MonotonicityReport markovianity_test(const DensityMatrix& rho1, const DensityMatrix& rho2, const Channel& channel,
                                            const std::vector<double>& times, const MarkovianityOptions& opts = {}) {
  if (times.size() < 3) throw DomainError("markovianity_test: needs at least 3 time points");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw DomainError("markovianity_test: times must be strictly increasing");
  if (!opts.use_tomography) {
    std::vector<double> d;
    for (double t : times) d.push_back(trace_distance(apply_channel(channel, rho1, t), apply_channel(channel, rho2, t)));
    return monotonicity_report(times, d, opts.exact_threshold);
  }
  if (opts.shots < 1 || opts.bootstrap < 2) throw DomainError("markovianity_test: needs shots >= 1 and bootstrap >= 2");

  struct Point {
    double distance, sigma;
  };
  auto points = parallel_map(times.size(), opts.workers, [&](std::size_t k) {
    const std::uint64_t s = derive_seed(opts.seed, k);
    const auto a = apply_channel(channel, rho1, times[k]);
    const auto b = apply_channel(channel, rho2, times[k]);
    const auto ha = mle_reconstruct(simulate_tomography(a, opts.shots, derive_seed(s, 1))).rho;
    const auto hb = mle_reconstruct(simulate_tomography(b, opts.shots, derive_seed(s, 2))).rho;
    Point p{trace_distance(ha, hb), 0};
    double sum = 0, sum2 = 0;
    for (int r = 0; r < opts.bootstrap; ++r) {
      const auto ra = mle_reconstruct(simulate_tomography(ha, opts.shots, derive_seed(s, 100 + 2 * r))).rho;
      const auto rb = mle_reconstruct(simulate_tomography(hb, opts.shots, derive_seed(s, 101 + 2 * r))).rho;
      const double d = trace_distance(ra, rb);
      sum += d;
      sum2 += d * d;
    }
    const double n = opts.bootstrap;
    p.sigma = std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1)));
    return p;
  });
  std::vector<double> d, sig;
  double max_sigma = 0;
  for (const auto& p : points) {
    d.push_back(p.distance);
    sig.push_back(p.sigma);
    max_sigma = std::max(max_sigma, p.sigma);
  }
  auto r = monotonicity_report(times, d, 3 * std::sqrt(2.0) * max_sigma);
  r.sigmas = std::move(sig);
  return r;
}

}  // namespace lgiecho
