#pragma once

// Atomic-frequency-comb ensemble: spectrum, Monte-Carlo dipole sum and the
// polarization-dependent readout.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace lgiecho {

inline constexpr double kTwoPi = 2 * std::numbers::pi;
inline constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

/// Absorption spectrum of one comb (one crystal / polarization).
struct CombSpec {
  double periodicity_delta = 8e6;  // Hz, tooth spacing
  double tooth_fwhm = 2e6;         // Hz, Gaussian tooth width
  double bandwidth = 100e6;        // Hz, flat envelope width
  double optical_depth = 8.0;
  double background_depth = 0.05;
  double center_offset = 0.0;  // Hz, 0 for the H comb, delta for the V comb

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(periodicity_delta) || !(periodicity_delta > 0))
      throw ConfigError("CombSpec.periodicity_delta", "must be > 0");
    if (!finite(tooth_fwhm) || !(tooth_fwhm >= 0) || !(tooth_fwhm < periodicity_delta))
      throw ConfigError("CombSpec.tooth_fwhm", "must satisfy 0 <= tooth_fwhm < periodicity_delta");
    if (!finite(bandwidth) || !(bandwidth >= periodicity_delta))
      throw ConfigError("CombSpec.bandwidth", "must be >= periodicity_delta");
    if (!finite(background_depth) || !(background_depth >= 0))
      throw ConfigError("CombSpec.background_depth", "must be >= 0");
    if (!finite(optical_depth) || !(optical_depth > background_depth))
      throw ConfigError("CombSpec.optical_depth", "must exceed background_depth");
    if (!finite(center_offset)) throw ConfigError("CombSpec.center_offset", "must be finite");
  }

  /// Tooth indices m with |m * Delta| <= bandwidth / 2.
  std::pair<int, int> tooth_range() const {
    const int m = static_cast<int>(std::floor(0.5 * bandwidth / periodicity_delta + 1e-9));
    return {-m, m};
  }

  int tooth_count() const {
    const auto [lo, hi] = tooth_range();
    return hi - lo + 1;
  }

  double tooth_center(int m) const { return m * periodicity_delta + center_offset; }

  /// First-order rephasing time 1/Delta.
  double echo_time() const { return 1.0 / periodicity_delta; }

  bool operator==(const CombSpec&) const = default;
};

/// Monte-Carlo sample of the comb. The spatial phase exp(-ikz_j) is absorbed
/// into the weights (forward emission is phase matched), so the sample lives
/// purely in frequency.
struct AtomEnsemble {
  std::vector<double> detunings;  // Hz
  std::vector<double> weights;    // c_j, sum of squares = 1
  std::vector<int> tooth_indices;
  double periodicity_delta = 0;
  double center_offset = 0;

  std::size_t count() const { return detunings.size(); }
};

inline AtomEnsemble sample_ensemble(const CombSpec& spec, std::size_t n_atoms, std::uint64_t seed) {
  spec.validate();
  if (n_atoms < 1) throw DomainError("sample_ensemble: n_atoms must be >= 1");
  const auto [m_lo, m_hi] = spec.tooth_range();
  const double sigma = spec.tooth_fwhm * kFwhmToSigma;
  const double half_gap = 0.5 * spec.periodicity_delta;

  AtomEnsemble e;
  e.periodicity_delta = spec.periodicity_delta;
  e.center_offset = spec.center_offset;
  e.detunings.resize(n_atoms);
  e.tooth_indices.resize(n_atoms);
  e.weights.assign(n_atoms, 1.0 / std::sqrt(static_cast<double>(n_atoms)));

  for (std::size_t j = 0; j < n_atoms; ++j) {
    // One stream per atom: atom j draws the same tooth and the same unit
    // normal deviate for every tooth width.
    StreamRng rng(seed, j);
    std::uniform_int_distribution<int> tooth(m_lo, m_hi);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int m = tooth(rng);
    double offset = 0.0;
    if (sigma > 0) {
      do {
        offset = sigma * normal(rng);
      } while (std::abs(offset) >= half_gap);  // truncate to the tooth's own cell
    }
    e.tooth_indices[j] = m;
    e.detunings[j] = spec.tooth_center(m) + offset;
  }
  return e;
}

namespace detail {

inline constexpr std::size_t kAtomChunk = 2048;

// sum_j w_j^2 exp(i 2 pi delta_j t_k) for t_k = t0 + k dt, k in [0, n_times).
// Atoms are reduced in fixed-size chunks whose partial sums are added in chunk
// order, so the result does not depend on `workers`.
inline std::vector<Complex> dipole_sum_grid(const AtomEnsemble& e, double t0, double dt, std::size_t n_times,
                                            unsigned workers) {
  const std::size_t n_chunks = (e.count() + kAtomChunk - 1) / kAtomChunk;
  auto partial = parallel_map(n_chunks, workers, [&](std::size_t c) {
    std::vector<Complex> acc(n_times);
    const std::size_t lo = c * kAtomChunk;
    const std::size_t hi = std::min(e.count(), lo + kAtomChunk);
    for (std::size_t j = lo; j < hi; ++j) {
      const double w2 = e.weights[j] * e.weights[j];
      Complex z = std::polar(w2, kTwoPi * e.detunings[j] * t0);
      const Complex step = std::polar(1.0, kTwoPi * e.detunings[j] * dt);
      for (std::size_t k = 0; k < n_times; ++k) {
        acc[k] += z;
        z *= step;
      }
    }
    return acc;
  });
  std::vector<Complex> total(n_times);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < n_times; ++k) total[k] += p[k];
  return total;
}

}  // namespace detail

/// Normalized emission intensity |sum_j w_j^2 exp(i 2 pi delta_j t)|^2 at a
/// single time (1 at t = 0).
inline double emission_intensity(const AtomEnsemble& e, double t, unsigned workers = 1) {
  if (e.count() == 0) throw DomainError("emission_intensity: empty ensemble");
  return std::norm(detail::dipole_sum_grid(e, t, 0.0, 1, workers)[0]);
}

/// Same, for a zero-width comb with the ensemble's tooth assignment.
inline double ideal_comb_intensity(const AtomEnsemble& e, double t) {
  if (e.count() == 0) throw DomainError("ideal_comb_intensity: empty ensemble");
  Complex acc{};
  for (std::size_t j = 0; j < e.count(); ++j) {
    const double nu = e.tooth_indices[j] * e.periodicity_delta + e.center_offset;
    acc += std::polar(e.weights[j] * e.weights[j], kTwoPi * nu * t);
  }
  return std::norm(acc);
}

/// Binned re-emission intensity. times[i] is the start of bin i.
struct EchoTrace {
  std::vector<double> times;
  std::vector<double> intensity;
  double bin_width = 0;
};

/// Each bin holds the bin-averaged intensity (midpoint rule over
/// `subsamples` points); the trace is scaled so the t = 0 bin equals 1.
inline EchoTrace echo_trace(const AtomEnsemble& e, double t_max, double bin_width, unsigned workers = 1,
                            int subsamples = 8) {
  if (e.count() == 0) throw DomainError("echo_trace: empty ensemble");
  if (!(bin_width > 0)) throw DomainError("echo_trace: bin_width must be > 0");
  if (!(t_max > 0)) throw DomainError("echo_trace: t_max must be > 0");
  if (subsamples < 1) throw DomainError("echo_trace: subsamples must be >= 1");
  const auto n_bins = static_cast<std::size_t>(std::ceil(t_max / bin_width - 1e-9));
  const double dt = bin_width / subsamples;
  const auto sums = detail::dipole_sum_grid(e, 0.5 * dt, dt, n_bins * subsamples, workers);

  EchoTrace trace;
  trace.bin_width = bin_width;
  trace.times.resize(n_bins);
  trace.intensity.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    double acc = 0;
    for (int s = 0; s < subsamples; ++s) acc += std::norm(sums[b * subsamples + s]);
    trace.times[b] = b * bin_width;
    trace.intensity[b] = acc / subsamples;
  }
  const double norm0 = trace.intensity.front();
  if (norm0 > 0)
    for (auto& v : trace.intensity) v /= norm0;
  return trace;
}

struct PeakShape {
  double time = 0;   // center of the maximal bin
  double value = 0;  // intensity of the maximal bin
  double fwhm = 0;   // full width at half maximum, linear interpolation between bin centers
};

/// Locates the maximal bin within [center - half_window, center + half_window]
/// and measures its width at half maximum.
inline PeakShape peak_shape(const EchoTrace& tr, double center, double half_window) {
  const double bw = tr.bin_width;
  std::size_t best = tr.times.size();
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double mid = tr.times[i] + 0.5 * bw;
    if (std::abs(mid - center) > half_window) continue;
    if (best == tr.times.size() || tr.intensity[i] > tr.intensity[best]) best = i;
  }
  if (best == tr.times.size()) throw DomainError("peak_shape: window contains no bins");
  PeakShape p{tr.times[best] + 0.5 * bw, tr.intensity[best], 0};
  const double half = 0.5 * p.value;
  auto crossing = [&](int dir) {
    std::size_t i = best;
    while (true) {
      const std::size_t nxt = dir > 0 ? i + 1 : i - 1;
      if ((dir < 0 && i == 0) || nxt >= tr.times.size()) return tr.times[i] + 0.5 * bw;
      if (tr.intensity[nxt] <= half) {
        const double f = (tr.intensity[i] - half) / (tr.intensity[i] - tr.intensity[nxt]);
        return tr.times[i] + 0.5 * bw + dir * f * bw;
      }
      i = nxt;
    }
  };
  p.fwhm = crossing(+1) - crossing(-1);
  return p;
}

/// Arrival-time distribution of an echo of a given order, tabulated over one
/// comb period centred on order / Delta.
class EchoProfile {
 public:
  EchoProfile() = default;

  EchoProfile(const AtomEnsemble& e, int order, double resolution, unsigned workers = 1) {
    if (order < 1) throw DomainError("EchoProfile: order must be >= 1");
    if (!(resolution > 0)) throw DomainError("EchoProfile: resolution must be > 0");
    const double period = 1.0 / e.periodicity_delta;
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(period / resolution)));
    dt_ = period / static_cast<double>(n);
    start_ = order * period - 0.5 * period;
    const auto sums = detail::dipole_sum_grid(e, start_ + 0.5 * dt_, dt_, n, workers);
    cdf_.resize(n + 1);
    cdf_[0] = 0;
    for (std::size_t i = 0; i < n; ++i) cdf_[i + 1] = cdf_[i] + std::norm(sums[i]);
    const double total = cdf_.back();
    if (total > 0) {
      for (auto& c : cdf_) c /= total;
    } else {
      for (std::size_t i = 0; i <= n; ++i) cdf_[i] = static_cast<double>(i) / n;
    }
  }

  double start() const { return start_; }
  double end() const { return start_ + dt_ * static_cast<double>(cdf_.size() - 1); }

  /// Probability mass inside [a, b).
  double fraction(double a, double b) const {
    if (cdf_.empty() || b <= a) return 0;
    return cdf_at(b) - cdf_at(a);
  }

  /// Inverse-CDF sample; the cell is chosen from u1 and the position within it from u2.
  double sample(double u1, double u2) const {
    const auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), u1);
    const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()) - 1, cdf_.size() - 2);
    return start_ + (static_cast<double>(cell) + u2) * dt_;
  }

 private:
  double cdf_at(double t) const {
    const double x = (t - start_) / dt_;
    if (x <= 0) return 0;
    const auto n = cdf_.size() - 1;
    if (x >= static_cast<double>(n)) return 1;
    const auto i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    return cdf_[i] + f * (cdf_[i + 1] - cdf_[i]);
  }

  double start_ = 0;
  double dt_ = 1;
  std::vector<double> cdf_;
};

/// Monte-Carlo settings behind echo_efficiency.
struct EchoOptions {
  double prefactor = 0.15;  // first-echo efficiency of an ideal comb
  std::size_t atoms = 10000;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(prefactor >= 0 && prefactor <= 1)) throw ConfigError("EchoOptions.prefactor", "must lie in [0,1]");
    if (atoms < 1) throw ConfigError("EchoOptions.atoms", "must be >= 1");
  }

  bool operator==(const EchoOptions&) const = default;
};

struct EchoEfficiency {
  double value = 0;      // prefactor * dephasing
  double dephasing = 0;  // MC peak intensity relative to the zero-width comb
  int order = 0;         // nearest echo order
  bool off_peak = false; // storage_time is not at a revival k / Delta
};

/// Efficiency of re-emission after `storage_time` for an already sampled ensemble.
inline EchoEfficiency echo_efficiency(const AtomEnsemble& e, double prefactor, double storage_time,
                                      unsigned workers = 1) {
  if (!(storage_time >= 0)) throw DomainError("echo_efficiency: negative storage time");
  const double k_exact = storage_time * e.periodicity_delta;
  const int k = static_cast<int>(std::lround(k_exact));
  EchoEfficiency r;
  r.order = k;
  r.off_peak = k < 1 || std::abs(k_exact - k) > 1e-3;
  const double mc = emission_intensity(e, storage_time, workers);
  if (r.off_peak) {
    r.dephasing = mc;
  } else {
    const double ideal = ideal_comb_intensity(e, storage_time);
    r.dephasing = ideal > 0 ? std::min(1.0, mc / ideal) : 0.0;
  }
  r.value = std::clamp(prefactor * r.dephasing, 0.0, 1.0);
  return r;
}

inline EchoEfficiency echo_efficiency(const CombSpec& spec, double storage_time, const EchoOptions& opts = {},
                                      unsigned workers = 1) {
  opts.validate();
  const auto e = sample_ensemble(spec, opts.atoms, opts.seed);
  return echo_efficiency(e, opts.prefactor, storage_time, workers);
}

/// Phase acquired by the V component: exp(i (2 pi delta t + phase_plate)).
/// Returns the state in the HV basis.
inline PolarState retrieve_polarization(const PolarState& input, double delta, double storage_time, double phase_plate) {
  if (!(storage_time >= 0)) throw DomainError("retrieve_polarization: negative storage time");
  const auto a = input.amplitudes(Basis::HV);
  const Complex phase = std::polar(1.0, kTwoPi * delta * storage_time + phase_plate);
  return PolarState::normalized(a[0], a[1] * phase, Basis::HV);
}

/// ceil(comb_bandwidth / homogeneous_linewidth): the fewest ions that can
/// resolve the comb.
inline std::uint64_t min_contributing_ions(double comb_bandwidth, double homogeneous_linewidth) {
  if (!(comb_bandwidth > 0) || !(homogeneous_linewidth > 0))
    throw DomainError("min_contributing_ions: arguments must be positive");
  const double ratio = comb_bandwidth / homogeneous_linewidth;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) <= 1e-9 * r) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

}  // namespace lgiecho
