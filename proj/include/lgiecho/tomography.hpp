#pragma once

// Four-basis polarization tomography: simulated counts, linear inversion and
// maximum-likelihood reconstruction.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace lgiecho {

/// Standard analyzer set: H, V, H+iV, H+V.
inline std::vector<PolarState> standard_tomography_bases() {
  return {PolarState::H(), PolarState::V(), PolarState::hv(Complex{1}, Complex{0, 1}), PolarState::hv(Complex{1}, Complex{1})};
}

inline std::vector<std::string> standard_tomography_labels() { return {"H", "V", "H+iV", "H+V"}; }

struct TomographyData {
  std::vector<std::string> labels = standard_tomography_labels();
  std::vector<PolarState> bases = standard_tomography_bases();
  std::vector<std::int64_t> shots;   // per basis
  std::vector<std::int64_t> counts;  // clicks per basis

  void validate() const {
    if (bases.size() != labels.size() || shots.size() != bases.size() || counts.size() != bases.size())
      throw InvariantViolation("TomographyData: bases, labels, shots and counts must have equal length");
    for (std::size_t b = 0; b < bases.size(); ++b) {
      if (shots[b] < 0 || counts[b] < 0 || counts[b] > shots[b])
        throw InvariantViolation("TomographyData: basis " + labels[b] + " needs 0 <= count <= shots");
    }
  }

  std::int64_t total_shots() const {
    std::int64_t n = 0;
    for (auto s : shots) n += s;
    return n;
  }

  /// Index of the basis with the given label, or -1.
  int find(const std::string& label) const {
    for (std::size_t b = 0; b < labels.size(); ++b)
      if (labels[b] == label) return static_cast<int>(b);
    return -1;
  }

  static TomographyData with_counts(std::int64_t shots_per_basis, std::vector<std::int64_t> counts) {
    TomographyData d;
    d.shots.assign(d.bases.size(), shots_per_basis);
    d.counts = std::move(counts);
    d.validate();
    return d;
  }
};

/// Binomial sampling of the Born probability in each basis; basis b uses
/// stream (seed, b).
inline TomographyData simulate_tomography(const DensityMatrix& rho, std::int64_t shots_per_basis, std::uint64_t seed) {
  if (shots_per_basis < 1) throw DomainError("simulate_tomography: shots_per_basis must be >= 1");
  TomographyData d;
  d.shots.assign(d.bases.size(), shots_per_basis);
  for (std::size_t b = 0; b < d.bases.size(); ++b) {
    StreamRng rng(seed, b);
    std::binomial_distribution<std::int64_t> draw(shots_per_basis, born_probability(rho, d.bases[b]));
    d.counts.push_back(draw(rng));
  }
  return d;
}

/// Exact expected frequencies (counts as real numbers scaled by shots) are
/// sometimes wanted; this returns the Born probabilities in the data's bases.
inline std::vector<double> basis_probabilities(const DensityMatrix& rho, const std::vector<PolarState>& bases) {
  std::vector<double> p;
  for (const auto& b : bases) p.push_back(born_probability(rho, b));
  return p;
}

struct LinearInversionResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  bool projected = false;  // raw estimate had a negative eigenvalue and was truncated
};

namespace detail {

/// Stokes-parameter estimate in the HV basis from the four frequencies.
inline Matrix2 stokes_matrix(double p_h, double p_v, double p_r, double p_d) {
  const double n = p_h + p_v;
  if (!(n > 0)) throw EstimationError("linear_inversion: no clicks in the H and V bases");
  const double s1 = (2 * p_d - n) / n;
  const double s2 = (2 * p_r - n) / n;
  const double s3 = (p_h - p_v) / n;
  return {{Complex{0.5 * (1 + s3)}, Complex{0.5 * s1, -0.5 * s2}, Complex{0.5 * s1, 0.5 * s2}, Complex{0.5 * (1 - s3)}}};
}

/// Clips negative eigenvalues of a unit-trace Hermitian matrix and renormalizes.
inline Matrix2 clip_to_psd(const Matrix2& m, bool& clipped) {
  const auto eig = eigen_hermitian(m);
  clipped = eig.values[0] < 0;
  if (!clipped) return m;
  // Unit trace, so the remaining eigenvalue becomes 1 and the state is pure.
  const auto& v = eig.vectors[1];
  return {{v[0] * std::conj(v[0]), v[0] * std::conj(v[1]), v[1] * std::conj(v[0]), v[1] * std::conj(v[1])}};
}

}  // namespace detail

inline LinearInversionResult linear_inversion(const TomographyData& data) {
  data.validate();
  std::array<double, 4> freq{};
  const std::array<const char*, 4> need{"H", "V", "H+iV", "H+V"};
  for (int k = 0; k < 4; ++k) {
    const int b = data.find(need[k]);
    if (b < 0) throw DomainError(std::string("linear_inversion: missing basis ") + need[k]);
    if (data.shots[b] == 0) throw DomainError(std::string("linear_inversion: no shots in basis ") + need[k]);
    freq[k] = static_cast<double>(data.counts[b]) / static_cast<double>(data.shots[b]);
  }
  LinearInversionResult r;
  const Matrix2 raw = detail::stokes_matrix(freq[0], freq[1], freq[2], freq[3]);
  r.rho = DensityMatrix::from_hv(detail::clip_to_psd(raw, r.projected));
  return r;
}

/// Binomial log-likelihood of the data under rho.
inline double log_likelihood(const TomographyData& data, const DensityMatrix& rho) {
  double l = 0;
  for (std::size_t b = 0; b < data.bases.size(); ++b) {
    const double p = born_probability(rho, data.bases[b]);
    const auto n = static_cast<double>(data.counts[b]);
    const auto m = static_cast<double>(data.shots[b] - data.counts[b]);
    if (n > 0) l += n * std::log(p);
    if (m > 0) l += m * std::log1p(-p);
  }
  return l;
}

struct MleOptions {
  double tol = 1e-10;  // stop when the log-likelihood gain of a step falls below this
  int max_iter = 10000;
};

struct ReconstructionResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  double log_likelihood = 0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // optimum on the rank-deficient boundary
  std::vector<double> history;  // log-likelihood after each accepted step
};

namespace detail {

// rho = T^dagger T / tr(T^dagger T), T lower triangular in the HV basis:
// T = [[x0, 0], [x2 + i x3, x1]].
struct Cholesky {
  std::array<double, 4> x{};

  Matrix2 t() const { return {{Complex{x[0]}, Complex{0}, Complex{x[2], x[3]}, Complex{x[1]}}}; }

  Matrix2 rho_hv() const {
    const Matrix2 tm = t();
    const Matrix2 a = tm.adjoint() * tm;
    return Complex{1.0 / a.trace().real()} * a;
  }

  static Cholesky from_rho_hv(const Matrix2& rho) {
    // rho = T^dagger T with T lower triangular: use the reversed Cholesky factor.
    Cholesky c;
    const double r11 = std::max(rho(1, 1).real(), 0.0);
    c.x[1] = std::sqrt(r11);
    if (c.x[1] > 0) {
      const Complex l = rho(1, 0) / c.x[1];  // T11 * T10 = rho10 (T11 real)
      c.x[2] = l.real();
      c.x[3] = l.imag();
      c.x[0] = std::sqrt(std::max(rho(0, 0).real() - std::norm(l), 0.0));
    } else {
      c.x[0] = std::sqrt(std::max(rho(0, 0).real(), 0.0));
    }
    return c;
  }
};

}  // namespace detail

/// Maximum-likelihood density matrix. The four real entries of the factor T
/// are optimized by BFGS with a backtracking line search; every accepted step
/// increases the likelihood.
inline ReconstructionResult mle_reconstruct(const TomographyData& data, const MleOptions& opts = {}) {
  data.validate();
  const std::int64_t total = data.total_shots();
  if (total < 4) throw DomainError("mle_reconstruct: needs at least 4 shots in total");
  std::vector<Matrix2> proj;  // projectors in the HV basis
  for (const auto& b : data.bases) {
    const auto a = b.amplitudes(Basis::HV);
    proj.push_back({{a[0] * std::conj(a[0]), a[0] * std::conj(a[1]), a[1] * std::conj(a[0]), a[1] * std::conj(a[1])}});
  }
  const double scale = static_cast<double>(total);
  using Vec = std::array<double, 4>;

  // Per-shot log-likelihood.
  auto loglik = [&](const detail::Cholesky& c) {
    const Matrix2 rho = c.rho_hv();
    double l = 0;
    for (std::size_t b = 0; b < proj.size(); ++b) {
      const double p = std::clamp((rho * proj[b]).trace().real(), 0.0, 1.0);
      const auto n = static_cast<double>(data.counts[b]);
      const auto m = static_cast<double>(data.shots[b] - data.counts[b]);
      if (n > 0) l += n * std::log(p);
      if (m > 0) l += m * std::log1p(-p);
    }
    return std::isnan(l) ? -std::numeric_limits<double>::infinity() : l / scale;
  };
  // dl = 2 Re tr(dT G' T^dagger) / tr(T^dagger T), G' = G - tr(rho G) I.
  auto gradient = [&](const detail::Cholesky& c) {
    const Matrix2 rho = c.rho_hv();
    Matrix2 g{};
    for (std::size_t b = 0; b < proj.size(); ++b) {
      const double p = std::clamp((rho * proj[b]).trace().real(), 1e-300, 1 - 1e-16);
      const auto n = static_cast<double>(data.counts[b]);
      const auto m = static_cast<double>(data.shots[b] - data.counts[b]);
      g = g + Complex{(n / p - m / (1 - p)) / scale} * proj[b];
    }
    const Matrix2 t = c.t();
    const double k = 2 / (t.adjoint() * t).trace().real();
    const Matrix2 mm = (g - (rho * g).trace() * Matrix2::identity()) * t.adjoint();
    return Vec{k * mm(0, 0).real(), k * mm(1, 1).real(), k * mm(0, 1).real(), -k * mm(0, 1).imag()};
  };

  // Start near the linear-inversion estimate, pulled slightly inside.
  Matrix2 start = 0.5 * Matrix2::identity();
  try {
    start = Complex{0.9} * linear_inversion(data).rho.hv() + Complex{0.05} * Matrix2::identity();
  } catch (const EstimationError&) {
  }
  detail::Cholesky c = detail::Cholesky::from_rho_hv(start);
  double l = loglik(c);
  Vec g = gradient(c);
  std::array<Vec, 4> h{};  // inverse-Hessian estimate of -l
  auto reset = [&] {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) h[i][j] = i == j ? 1.0 : 0.0;
  };
  reset();

  ReconstructionResult r;
  r.history.push_back(l * scale);
  int quiet = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    r.iterations = it;
    Vec d{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) d[i] += h[i][j] * g[j];
    double slope = 0;
    for (int i = 0; i < 4; ++i) slope += d[i] * g[i];
    if (!(slope > 0)) {
      reset();
      d = g;
      slope = 0;
      for (double v : g) slope += v * v;
    }
    if (slope == 0) {
      r.converged = true;
      break;
    }

    double alpha = 1;
    detail::Cholesky trial;
    double l_new = l;
    bool accepted = false;
    for (int k = 0; k < 80; ++k) {
      for (int i = 0; i < 4; ++i) trial.x[i] = c.x[i] + alpha * d[i];
      l_new = loglik(trial);
      if (l_new > l) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      r.converged = true;  // no ascent at machine precision
      break;
    }
    // Rescale T to unit norm (rho is unchanged) so the curvature model stays valid.
    double norm = 0;
    for (double v : trial.x) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : trial.x) v /= norm;
    const Vec g_new = gradient(trial);

    Vec s{}, y{};
    for (int i = 0; i < 4; ++i) {
      s[i] = trial.x[i] - c.x[i];
      y[i] = g[i] - g_new[i];  // gradient change of -l
    }
    double sy = 0;
    for (int i = 0; i < 4; ++i) sy += s[i] * y[i];
    if (sy > 1e-300) {
      Vec hy{};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) hy[i] += h[i][j] * y[j];
      double yhy = 0;
      for (int i = 0; i < 4; ++i) yhy += y[i] * hy[i];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
    }

    if (!(l_new >= l)) throw std::logic_error("mle_reconstruct: log-likelihood decreased");
    const double gain = (l_new - l) * scale;
    c = trial;
    l = l_new;
    g = g_new;
    r.history.push_back(l * scale);
    quiet = gain < opts.tol ? quiet + 1 : 0;
    if (quiet >= 3) {
      r.converged = true;
      break;
    }
  }
  const Matrix2 rho = c.rho_hv();

  // Symmetrize to remove rounding in the Hermitian part.
  Matrix2 sym = Complex{0.5} * (rho + rho.adjoint());
  sym = Complex{1.0 / sym.trace().real()} * sym;
  r.rho = DensityMatrix::from_hv(sym);
  r.log_likelihood = log_likelihood(data, r.rho);
  r.degenerate = r.rho.eigenvalues()[0] < 1e-8;
  return r;
}

}  // namespace lgiecho
