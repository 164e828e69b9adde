#pragma once

// Collective-excitation dynamics between the two crystals and the stationary
// Leggett-Garg functionals K(0,2t) -/+ 2K(0,t).

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "afc.hpp"
#include "errors.hpp"
#include "quantum.hpp"

namespace lgiecho {

enum class Level { D, A };

inline PolarState level_state(Level l) { return l == Level::D ? PolarState::D() : PolarState::A(); }

inline const char* to_string(Level l) { return l == Level::D ? "D" : "A"; }

/// Wraps an angle into [0, 2 pi).
inline double wrap_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0;
  return r;
}

/// Delocalized excitation: relative phase 2 pi delta t + phase0 between the
/// two crystal components.
struct ExcitationState {
  double detuning = 5e6;  // Hz, detuning between the H and V combs
  double phase0 = 0.0;    // rad, set by the phase plate, in [0, 2 pi)
  std::pair<std::string, std::string> crystal_labels{"N1", "N2"};

  void validate() const {
    if (!std::isfinite(detuning)) throw ConfigError("ExcitationState.detuning", "must be finite");
    if (!(phase0 >= 0 && phase0 < kTwoPi)) throw ConfigError("ExcitationState.phase0", "must lie in [0, 2pi)");
  }

  double phase(double t) const { return kTwoPi * detuning * t + phase0; }

  bool operator==(const ExcitationState&) const = default;
};

/// cos(phi/2)|D> - i sin(phi/2)|A>, phi = 2 pi delta t + phase0.
inline PolarState state_at(const ExcitationState& ex, double t) {
  if (!(t >= 0)) throw DomainError("state_at: t must be >= 0");
  ex.validate();
  const double half = 0.5 * wrap_phase(ex.phase(t));
  return {Complex{std::cos(half)}, Complex{0, -std::sin(half)}, Basis::DA};
}

/// Q_ij(t1, t2): probability of finding `j` at t2 after preparing `i` at t1.
///
/// The preparation mirrors the experiment: the phase plate is set to
/// phase0 = -2 pi delta t1 (plus pi for A) so the excitation is exactly `i`
/// at t1, and the state is then evolved in absolute time to t2.
inline double conditional_probability(const ExcitationState& ex, Level i, Level j, double t1, double t2) {
  if (!(t1 >= 0)) throw DomainError("conditional_probability: t1 must be >= 0");
  if (!(t2 >= t1)) throw DomainError("conditional_probability: requires t2 >= t1");
  ExcitationState prepared = ex;
  prepared.phase0 = wrap_phase(-kTwoPi * ex.detuning * t1 + (i == Level::A ? std::numbers::pi : 0.0));
  return born_probability(state_at(prepared, t2), level_state(j));
}

/// K(0, t) = 2 Q_DD(0, t) - 1.
inline double autocorrelation(const ExcitationState& ex, double t) {
  return 2.0 * conditional_probability(ex, Level::D, Level::D, 0.0, t) - 1.0;
}

/// Positive result means k lies below the classical bound -1 by that many sigma.
inline double violation_sigma(double k, double sigma) {
  if (!(sigma > 0)) throw DomainError("violation_sigma: sigma must be > 0");
  return (-1.0 - k) / sigma;
}

struct LgiReport {
  double t = 0;  // s
  double k_t = 0;
  double k_2t = 0;
  double k_minus = 0;
  double k_plus = 0;
  double sigma_minus = 0;
  double sigma_plus = 0;
  double violation_sigma_minus = 0;  // NaN when sigma_minus == 0
  double violation_sigma_plus = 0;   // NaN when sigma_plus == 0

  /// Fills the derived fields from K(0,t), K(0,2t) and their standard errors.
  static LgiReport from_correlations(double t, double k_t, double k_2t, double sigma_kt = 0, double sigma_k2t = 0) {
    LgiReport r;
    r.t = t;
    r.k_t = k_t;
    r.k_2t = k_2t;
    r.k_minus = k_2t - 2 * k_t;
    r.k_plus = k_2t + 2 * k_t;
    const double s = std::sqrt(sigma_k2t * sigma_k2t + 4 * sigma_kt * sigma_kt);
    r.sigma_minus = s;
    r.sigma_plus = s;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.violation_sigma_minus = s > 0 ? violation_sigma(r.k_minus, s) : nan;
    r.violation_sigma_plus = s > 0 ? violation_sigma(r.k_plus, s) : nan;
    return r;
  }
};

/// Noiseless K-/+ at time t (sigma fields zero).
inline LgiReport k_functionals(const ExcitationState& ex, double t) {
  if (!(t >= 0)) throw DomainError("k_functionals: t must be >= 0");
  return LgiReport::from_correlations(t, autocorrelation(ex, t), autocorrelation(ex, 2 * t));
}

enum class LgiBranch { Minus, Plus };

inline const char* to_string(LgiBranch b) { return b == LgiBranch::Minus ? "minus" : "plus"; }

struct KMinimum {
  double t_star = 0;
  double k_star = 0;
};

/// Minimum of K-/+ over t in (0, 1/delta). K- bottoms out at 2 pi delta t = pi/3,
/// K+ at 2 pi delta t = 2 pi/3, both at -1.5. The analytic point is checked
/// against a 10^4-point scan.
inline KMinimum k_minimum(LgiBranch which, double delta) {
  if (!(delta > 0) || !std::isfinite(delta)) throw DomainError("k_minimum: delta must be > 0");
  const ExcitationState ex{delta, 0.0, {"N1", "N2"}};
  auto value = [&](double t) {
    const auto r = k_functionals(ex, t);
    return which == LgiBranch::Minus ? r.k_minus : r.k_plus;
  };
  KMinimum best{which == LgiBranch::Minus ? 1.0 / (6 * delta) : 1.0 / (3 * delta), 0};
  best.k_star = value(best.t_star);

  constexpr int kScan = 10000;
  const double period = 1.0 / delta;
  double scan_t = 0, scan_k = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kScan; ++i) {
    const double t = period * i / kScan;
    const double k = value(t);
    if (k < scan_k) {
      scan_k = k;
      scan_t = t;
    }
  }
  // The functional is symmetric about t = 1/(2 delta); the mirror point is an equal minimum.
  const double dist = std::min(std::abs(scan_t - best.t_star), std::abs(scan_t - (period - best.t_star)));
  if (scan_k < best.k_star - 1e-12 || dist > 2 * period / kScan)
    throw std::logic_error("k_minimum: grid scan disagrees with the analytic stationary point");
  return best;
}

}  // namespace lgiecho
