#pragma once

// Two-level quantum mechanics for the delocalized excitation.
//
// Conventions used throughout the library:
//   * |H'> = |e>_N1 |g>_N2 and |V'> = |g>_N1 |e>_N2 are the single-excitation
//     states of the two crystals. They are read out as H and V photons, so the
//     same basis doubles as the photon polarization basis (Basis::HV).
//   * |D> = (|H> + |V>)/sqrt(2), |A> = (|H> - |V>)/sqrt(2) (Basis::DA).
//   * DensityMatrix stores its elements in the DA basis. |D> is the +z Bloch
//     axis and |H> the +x axis, so M = |D><D| - |A><A| acts as Pauli Z.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace lgiecho {

using Complex = std::complex<double>;

enum class Basis { DA, HV };

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;

/// Plain 2x2 complex matrix, row-major. No invariants.
struct Matrix2 {
  std::array<Complex, 4> m{};

  Complex& operator()(int r, int c) { return m[2 * r + c]; }
  const Complex& operator()(int r, int c) const { return m[2 * r + c]; }

  static Matrix2 identity() { return {{Complex{1}, Complex{0}, Complex{0}, Complex{1}}}; }

  Complex trace() const { return m[0] + m[3]; }

  Matrix2 adjoint() const { return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}}; }

  friend Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
    return {{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]}};
  }
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
    return {{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]}};
  }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
             a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
  }
  friend Matrix2 operator*(Complex s, const Matrix2& a) {
    return {{s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]}};
  }

  double max_abs_diff(const Matrix2& o) const {
    double d = 0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(m[i] - o.m[i]));
    return d;
  }
};

/// Eigen-decomposition of a Hermitian 2x2 matrix (only the Hermitian part is read).
struct HermitianEigen {
  std::array<double, 2> values;                   // ascending
  std::array<std::array<Complex, 2>, 2> vectors;  // vectors[k] pairs with values[k]
};

inline HermitianEigen eigen_hermitian(const Matrix2& a) {
  const double p = a(0, 0).real();
  const double q = a(1, 1).real();
  const Complex b = 0.5 * (a(0, 1) + std::conj(a(1, 0)));
  const double mean = 0.5 * (p + q);
  const double half_gap = 0.5 * (p - q);
  const double r = std::hypot(half_gap, std::abs(b));
  HermitianEigen e{{mean - r, mean + r}, {}};
  if (std::abs(b) < 1e-300) {
    // Already diagonal.
    if (p <= q) {
      e.vectors[0] = {Complex{1}, Complex{0}};
      e.vectors[1] = {Complex{0}, Complex{1}};
    } else {
      e.vectors[0] = {Complex{0}, Complex{1}};
      e.vectors[1] = {Complex{1}, Complex{0}};
    }
    return e;
  }
  for (int k = 0; k < 2; ++k) {
    // (a - lambda) v = 0 from either row; take the better-conditioned one.
    const double dp = e.values[k] - p;
    const double dq = e.values[k] - q;
    const std::array<Complex, 2> v =
        std::abs(dp) >= std::abs(dq) ? std::array<Complex, 2>{b, Complex{dp}} : std::array<Complex, 2>{Complex{dq}, std::conj(b)};
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    e.vectors[k] = {v[0] / n, v[1] / n};
  }
  return e;
}

namespace detail {

// Hadamard change of basis between DA and HV coordinates (self-inverse).
inline std::array<Complex, 2> hadamard(Complex a0, Complex a1) {
  constexpr double s = std::numbers::sqrt2 / 2;
  return {s * (a0 + a1), s * (a0 - a1)};
}

inline Matrix2 hadamard(const Matrix2& rho) {
  constexpr double s = std::numbers::sqrt2 / 2;
  const Matrix2 w{{Complex{s}, Complex{s}, Complex{s}, Complex{-s}}};
  return w * rho * w;
}

}  // namespace detail

/// Pure state of the two-level system in either basis.
class PolarState {
 public:
  PolarState(Complex amp0, Complex amp1, Basis basis) : amp0_(amp0), amp1_(amp1), basis_(basis) {
    const double n = std::norm(amp0) + std::norm(amp1);
    if (!(std::abs(n - 1.0) <= kNormTolerance))
      throw InvariantViolation("PolarState: |amp0|^2 + |amp1|^2 = " + std::to_string(n) + ", expected 1");
  }

  /// Builds a state from unnormalized amplitudes.
  static PolarState normalized(Complex amp0, Complex amp1, Basis basis) {
    const double n = std::sqrt(std::norm(amp0) + std::norm(amp1));
    if (!(n > 0) || !std::isfinite(n)) throw InvariantViolation("PolarState: zero or non-finite amplitudes");
    return {amp0 / n, amp1 / n, basis};
  }

  /// Polarization state proportional to h|H> + v|V>.
  static PolarState hv(Complex h, Complex v) { return normalized(h, v, Basis::HV); }

  static PolarState D() { return {Complex{1}, Complex{0}, Basis::DA}; }
  static PolarState A() { return {Complex{0}, Complex{1}, Basis::DA}; }
  static PolarState H() { return {Complex{1}, Complex{0}, Basis::HV}; }
  static PolarState V() { return {Complex{0}, Complex{1}, Basis::HV}; }

  Complex amp0() const { return amp0_; }
  Complex amp1() const { return amp1_; }
  Basis basis() const { return basis_; }

  PolarState in_basis(Basis target) const {
    if (target == basis_) return *this;
    const auto a = detail::hadamard(amp0_, amp1_);
    return normalized(a[0], a[1], target);
  }

  /// Amplitudes in the given basis without renormalization.
  std::array<Complex, 2> amplitudes(Basis target) const {
    if (target == basis_) return {amp0_, amp1_};
    return detail::hadamard(amp0_, amp1_);
  }

  /// Representation equality (same basis, same amplitudes).
  bool operator==(const PolarState&) const = default;

 private:
  Complex amp0_;
  Complex amp1_;
  Basis basis_;
};

/// <a|b>, independent of the bases the two states are expressed in.
inline Complex inner_product(const PolarState& a, const PolarState& b) {
  const auto x = a.amplitudes(Basis::DA);
  const auto y = b.amplitudes(Basis::DA);
  return std::conj(x[0]) * y[0] + std::conj(x[1]) * y[1];
}

/// Density matrix with elements held in the DA basis.
class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity (down to -1e-10).
  static DensityMatrix from_da(const Matrix2& da) {
    validate(da);
    return DensityMatrix(da);
  }
  static DensityMatrix from_hv(const Matrix2& hv) { return from_da(detail::hadamard(hv)); }

  static DensityMatrix pure(const PolarState& s) {
    const auto a = s.amplitudes(Basis::DA);
    Matrix2 m{{a[0] * std::conj(a[0]), a[0] * std::conj(a[1]), a[1] * std::conj(a[0]), a[1] * std::conj(a[1])}};
    return DensityMatrix(m);
  }

  static DensityMatrix maximally_mixed() { return DensityMatrix(0.5 * Matrix2::identity()); }

  /// rho = (I + x X + y Y + z Z) / 2 in the DA frame; requires |r| <= 1.
  static DensityMatrix from_bloch(double x, double y, double z) {
    Matrix2 m{{Complex{0.5 * (1 + z)}, Complex{0.5 * x, -0.5 * y}, Complex{0.5 * x, 0.5 * y}, Complex{0.5 * (1 - z)}}};
    return from_da(m);
  }

  /// Convex mixture w * a + (1 - w) * b.
  static DensityMatrix mix(double w, const DensityMatrix& a, const DensityMatrix& b) {
    if (!(w >= 0 && w <= 1)) throw DomainError("DensityMatrix::mix: weight outside [0,1]");
    return from_da(Complex{w} * a.da_ + Complex{1 - w} * b.da_);
  }

  const Matrix2& da() const { return da_; }
  Matrix2 hv() const { return detail::hadamard(da_); }
  Matrix2 in_basis(Basis b) const { return b == Basis::DA ? da_ : hv(); }

  Complex operator()(int r, int c) const { return da_(r, c); }

  std::array<double, 2> eigenvalues() const { return eigen_hermitian(da_).values; }

  double purity() const { return (da_ * da_).trace().real(); }

  static void validate(const Matrix2& m) {
    for (const auto& z : m.m)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvariantViolation("DensityMatrix: non-finite element");
    if (std::abs(m(0, 1) - std::conj(m(1, 0))) > kHermitianTolerance || std::abs(m(0, 0).imag()) > kHermitianTolerance ||
        std::abs(m(1, 1).imag()) > kHermitianTolerance)
      throw InvariantViolation("DensityMatrix: not Hermitian");
    if (std::abs(m.trace() - 1.0) > kNormTolerance)
      throw InvariantViolation("DensityMatrix: trace " + std::to_string(m.trace().real()) + " != 1");
    if (eigen_hermitian(m).values[0] < -kPsdTolerance) throw InvariantViolation("DensityMatrix: negative eigenvalue");
  }

 private:
  explicit DensityMatrix(const Matrix2& da) : da_(da) {}
  Matrix2 da_;
};

// ---------------------------------------------------------------------------
// Measurement

/// |<projector|state>|^2.
inline double born_probability(const PolarState& state, const PolarState& projector) {
  return std::clamp(std::norm(inner_product(projector, state)), 0.0, 1.0);
}

/// <projector| rho |projector>.
inline double born_probability(const DensityMatrix& rho, const PolarState& projector) {
  const auto p = projector.amplitudes(Basis::DA);
  Complex acc{};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) acc += std::conj(p[r]) * rho(r, c) * p[c];
  return std::clamp(acc.real(), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Distances and geometry

/// Trace distance D = 1/2 tr|rho1 - rho2|.
inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  const auto ev = eigen_hermitian(rho1.da() - rho2.da()).values;
  return std::min(1.0, 0.5 * (std::abs(ev[0]) + std::abs(ev[1])));
}

inline double fidelity_pure(const DensityMatrix& rho, const PolarState& psi) { return born_probability(rho, psi); }

/// Bloch vector (x, y, z) in the DA frame: D -> +z, H -> +x.
inline std::array<double, 3> bloch_vector(const DensityMatrix& rho) {
  const Complex c = rho(0, 1);
  return {2 * c.real(), -2 * c.imag(), (rho(0, 0) - rho(1, 1)).real()};
}

// ---------------------------------------------------------------------------
// Channels

enum class ChannelKind { Identity, Dephasing, Loss };

/// A time-homogeneous single-qubit channel.
///
/// Dephasing damps the coherences in `basis` at `rate`. The physical
/// mechanism (random relative phase between the two crystal excitations)
/// acts in the HV basis, which is the default. Loss is heralded: a lost
/// photon removes the trial from the record, so the conditional state is
/// unchanged and only survival_probability() reflects the loss.
struct Channel {
  ChannelKind kind = ChannelKind::Identity;
  double rate = 0.0;  // s^-1
  Basis basis = Basis::HV;

  void validate() const {
    if (!(rate >= 0) || !std::isfinite(rate)) throw ConfigError("Channel.rate", "must be finite and >= 0");
  }

  bool operator==(const Channel&) const = default;
};

inline DensityMatrix apply_channel(const Channel& channel, const DensityMatrix& rho, double duration) {
  if (!(duration >= 0)) throw DomainError("apply_channel: negative duration");
  channel.validate();
  switch (channel.kind) {
    case ChannelKind::Identity:
    case ChannelKind::Loss:
      return rho;
    case ChannelKind::Dephasing: {
      const double damp = std::exp(-channel.rate * duration);
      Matrix2 m = rho.in_basis(channel.basis);
      m(0, 1) *= damp;
      m(1, 0) *= damp;
      return channel.basis == Basis::DA ? DensityMatrix::from_da(m) : DensityMatrix::from_hv(m);
    }
  }
  return rho;
}

/// Probability that a trial survives the channel for `duration` (1 unless Loss).
inline double survival_probability(const Channel& channel, double duration) {
  if (!(duration >= 0)) throw DomainError("survival_probability: negative duration");
  return channel.kind == ChannelKind::Loss ? std::exp(-channel.rate * duration) : 1.0;
}

inline const char* to_string(Basis b) { return b == Basis::DA ? "DA" : "HV"; }

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::Identity: return "identity";
    case ChannelKind::Dephasing: return "dephasing";
    case ChannelKind::Loss: return "loss";
  }
  return "identity";
}

}  // namespace lgiecho
