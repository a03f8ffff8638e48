#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ovd/errors.hpp"
#include "ovd/model_law.hpp"
#include "ovd/ov_function.hpp"
#include "ovd/ring.hpp"

namespace ovd {

using Complex = std::complex<double>;

/// Uniform-flow quantities at headway b.
struct EquilibriumInfo {
  double b = 0.0;       ///< headway L/N
  double c = 0.0;       ///< speed V(b)
  double f = 0.0;       ///< V'(b)
  double a_star = 0.0;  ///< hybrid threshold c V'(b)
};

inline EquilibriumInfo equilibrium_info(const OvFunction& ov, double b) {
  if (!(b > 0.0)) throw ConfigError("equilibrium headway must be positive");
  EquilibriumInfo eq;
  eq.b = b;
  eq.c = ov.eval(b);
  eq.f = ov.derivative(b);
  eq.a_star = eq.c * eq.f;
  return eq;
}

inline EquilibriumInfo equilibrium_info(const OvFunction& ov, const RingConfig& config) {
  config.validate();
  return equilibrium_info(ov, config.spacing());
}

/// Coefficients of the per-mode characteristic polynomial
///   lambda^2 + damping * lambda + damping * slope * (1 - e^{ik}) = 0.
/// Hybrid law: damping = 2a/c. Classical OVM: damping = alpha. slope = V'(b).
struct DispersionCoefficients {
  double damping = 0.0;
  double slope = 0.0;

  static DispersionCoefficients hybrid(double a, const EquilibriumInfo& eq) {
    if (!(a > 0.0)) throw ConfigError("acceleration scale must be positive");
    if (!(eq.c > 0.0)) throw ConfigError("equilibrium speed must be positive");
    return {2.0 * a / eq.c, eq.f};
  }

  static DispersionCoefficients classical(double alpha, const EquilibriumInfo& eq) {
    if (!(alpha > 0.0)) throw ConfigError("sensitivity must be positive");
    return {alpha, eq.f};
  }

  static DispersionCoefficients of(const ModelLaw& law, const EquilibriumInfo& eq) {
    return law.is_hybrid() ? hybrid(law.rate(), eq) : classical(law.rate(), eq);
  }

  double coupling() const { return damping * slope; }
};

struct SpectrumPoint {
  double k = 0.0;
  Complex lambda_plus;   ///< root with the larger real part
  Complex lambda_minus;
};

/// 1 - e^{ik} without cancellation at small k.
inline Complex one_minus_exp_ik(double k) {
  const double s = std::sin(0.5 * k);
  return {2.0 * s * s, -std::sin(k)};
}

inline SpectrumPoint dispersion_eigenvalues(const DispersionCoefficients& dc, double k) {
  const double B = dc.damping;
  const Complex C = dc.coupling() * one_minus_exp_ik(k);
  // Principal root has Re >= 0, so -B - root never cancels; the other root
  // follows from the product of roots.
  const Complex root = std::sqrt(Complex(B * B) - 4.0 * C);
  const Complex minus = -0.5 * (Complex(B) + root);
  const Complex plus = minus == Complex(0.0) ? Complex(0.0) : C / minus;
  return {k, plus, minus};
}

inline SpectrumPoint dispersion_eigenvalues(double a, const EquilibriumInfo& eq, double k) {
  return dispersion_eigenvalues(DispersionCoefficients::hybrid(a, eq), k);
}

inline double mode_wavenumber(std::size_t m, std::size_t n_vehicles) {
  return 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n_vehicles);
}

inline std::vector<SpectrumPoint> full_spectrum(const DispersionCoefficients& dc,
                                                std::size_t n_vehicles) {
  if (n_vehicles < 2) throw ConfigError("spectrum needs at least 2 vehicles");
  std::vector<SpectrumPoint> out;
  out.reserve(n_vehicles);
  for (std::size_t m = 0; m < n_vehicles; ++m) {
    out.push_back(dispersion_eigenvalues(dc, mode_wavenumber(m, n_vehicles)));
  }
  return out;
}

inline std::vector<SpectrumPoint> full_spectrum(double a, const EquilibriumInfo& eq,
                                                std::size_t n_vehicles) {
  return full_spectrum(DispersionCoefficients::hybrid(a, eq), n_vehicles);
}

/// Largest real part over both branches of every point.
inline double max_real_part(std::span<const SpectrumPoint> spectrum) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : spectrum) {
    best = std::max({best, p.lambda_plus.real(), p.lambda_minus.real()});
  }
  return best + 0.0;  // no signed zero
}

/// Mode index m with the largest Re lambda_plus. Modes m and N - m are
/// conjugates, so only m <= N/2 is scanned and the lowest index wins.
inline std::size_t fastest_mode(std::span<const SpectrumPoint> spectrum) {
  std::size_t best = 1;
  for (std::size_t m = 2; m <= spectrum.size() / 2; ++m) {
    if (spectrum[m].lambda_plus.real() > spectrum[best].lambda_plus.real()) best = m;
  }
  return best;
}

/// Small-k expansion lambda(k) = i mu k + nu k^2 + O(k^3).
struct LongWaveCoefficients {
  double mu = 0.0;
  double nu = 0.0;
};

inline LongWaveCoefficients long_wave_coefficients(const DispersionCoefficients& dc) {
  return {dc.slope, dc.slope * dc.slope / dc.damping - 0.5 * dc.slope};
}

/// mu = f, nu = c f^2 / (2a) - f / 2.
inline LongWaveCoefficients long_wave_coefficients(double a, const EquilibriumInfo& eq) {
  if (!(a > 0.0)) throw ConfigError("acceleration scale must be positive");
  return {eq.f, eq.c / (2.0 * a) * eq.f * eq.f - 0.5 * eq.f};
}

enum class Stability { Stable, Neutral, Unstable };

inline std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Neutral: return "Neutral";
    case Stability::Unstable: return "Unstable";
  }
  return "?";
}

inline constexpr double kNeutralBand = 1e-9;

/// Compares the hybrid acceleration scale with a* = c V'(b).
inline Stability classify(double a, const EquilibriumInfo& eq) {
  if (!(a > 0.0)) throw ConfigError("acceleration scale must be positive");
  if (a > eq.a_star * (1.0 + kNeutralBand)) return Stability::Stable;
  if (a < eq.a_star * (1.0 - kNeutralBand)) return Stability::Unstable;
  return Stability::Neutral;
}

/// Generic form: stable when damping exceeds 2 V'(b) (alpha > 2f for the OVM).
inline Stability classify(const DispersionCoefficients& dc) {
  const double critical = 2.0 * dc.slope;
  if (dc.damping > critical * (1.0 + kNeutralBand)) return Stability::Stable;
  if (dc.damping < critical * (1.0 - kNeutralBand)) return Stability::Unstable;
  return Stability::Neutral;
}

inline Stability classify(const ModelLaw& law, const EquilibriumInfo& eq) {
  return law.is_hybrid() ? classify(law.rate(), eq)
                         : classify(DispersionCoefficients::classical(law.rate(), eq));
}

/// Linearized ring dynamics about uniform flow:
///   d xi_n / dt = eta_n
///   d eta_n / dt = -damping eta_n + damping f (xi_{n+1} - xi_n)
/// Works on real or complexified perturbations.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> linearized_rhs(const DispersionCoefficients& dc,
                                                         std::span<const T> xi,
                                                         std::span<const T> eta) {
  const std::size_t n = xi.size();
  if (eta.size() != n || n == 0) throw ConfigError("linearized_rhs: size mismatch");
  std::vector<T> d_xi(eta.begin(), eta.end());
  std::vector<T> d_eta(n);
  const double coupling = dc.coupling();
  for (std::size_t i = 0; i < n; ++i) {
    const T ahead = xi[(i + 1) % n];
    d_eta[i] = -dc.damping * eta[i] + coupling * (ahead - xi[i]);
  }
  return {std::move(d_xi), std::move(d_eta)};
}

template <typename T>
std::pair<std::vector<T>, std::vector<T>> linearized_rhs(const EquilibriumInfo& eq, double a,
                                                         std::span<const T> xi,
                                                         std::span<const T> eta) {
  return linearized_rhs(DispersionCoefficients::hybrid(a, eq), xi, eta);
}

/// Largest Re lambda_plus over the given wavenumbers.
inline double max_growth(const DispersionCoefficients& dc, std::span<const double> wavenumbers) {
  double best = -std::numeric_limits<double>::infinity();
  for (double k : wavenumbers) best = std::max(best, dispersion_eigenvalues(dc, k).lambda_plus.real());
  return best;
}

/// Finds the acceleration scale at which the most unstable of `wavenumbers`
/// has zero growth rate, by bisection on a.
inline double bisect_threshold(const EquilibriumInfo& eq, std::span<const double> wavenumbers,
                               double rel_tol = 1e-13) {
  if (wavenumbers.empty()) throw ConfigError("threshold bisection needs wavenumbers");
  auto unstable = [&](double a) {
    return max_growth(DispersionCoefficients::hybrid(a, eq), wavenumbers) > 0.0;
  };
  double lo = 0.5 * eq.a_star;
  double hi = 2.0 * eq.a_star;
  for (int i = 0; !unstable(lo); ++i) {
    if (i > 200) throw DomainError("threshold bisection: no unstable bracket");
    lo *= 0.5;
  }
  for (int i = 0; unstable(hi); ++i) {
    if (i > 200) throw DomainError("threshold bisection: no stable bracket");
    hi *= 2.0;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (unstable(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Log-spaced wavenumbers in [k_min, pi], used to resolve the long-wave
/// onset of an unbounded ring.
inline std::vector<double> long_wave_probe(double k_min = 1e-6, std::size_t count = 241) {
  std::vector<double> ks(count);
  const double lmin = std::log(k_min);
  const double lmax = std::log(std::numbers::pi);
  for (std::size_t i = 0; i < count; ++i) {
    ks[i] = std::exp(lmin + (lmax - lmin) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  ks.back() = std::numbers::pi;
  return ks;
}

/// Threshold of the continuum of wavenumbers (N -> infinity).
inline double infinite_ring_threshold(const EquilibriumInfo& eq) {
  const auto ks = long_wave_probe();
  return bisect_threshold(eq, ks);
}

/// Threshold over the discrete modes m = 1..N-1 of a finite ring. Lies
/// below a* because the longest ring wave has k = 2 pi / N > 0.
inline double finite_ring_threshold(const EquilibriumInfo& eq, std::size_t n_vehicles) {
  if (n_vehicles < 2) throw ConfigError("finite ring threshold needs N >= 2");
  std::vector<double> ks;
  for (std::size_t m = 1; m < n_vehicles; ++m) ks.push_back(mode_wavenumber(m, n_vehicles));
  return bisect_threshold(eq, ks);
}

}  // namespace ovd
