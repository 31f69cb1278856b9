#pragma once

// Jacobi theta function θ₁ and the elliptic kernels built from it.
//
// Conventions: θ₁(u|τ) = 2 Σ_{n≥0} (-1)^n q^{(n+1/2)^2} sin((2n+1)πu) with
// q = exp(iπτ), so θ₁(u+1) = -θ₁(u) and θ₁(u+τ) = -exp(-iπτ - 2πiu) θ₁(u).
// Everything here is evaluated at one of three moduli derived from a base τ
// (τ, 2τ, τ/2), which is what the rescaled ℘ functions and the twisted kernels
// need.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include "ellcm/errors.hpp"

namespace ellcm {

/// Which modulus a theta evaluation refers to, relative to the base τ.
enum class Modulus { Base, Doubled, Halved };

/// Primitive periods of a Weierstrass ℘: (1, τ), (1/2, τ) or (2, τ).
enum class PeriodScale { Full, Half, Double };

/// x(u,z), x^(1/2)(u,z) = 2x(2u,z|2τ) and x^(2)(u,z) = x(u/2,z|τ/2)/2.
enum class KernelVariant { Plain, Half, Double };

template <typename Real>
struct TruncationPolicy {
  Real relative_threshold = Real(1e-18);
  int max_index = 200;
};

template <typename Real>
struct ThetaConstants {
  std::complex<Real> modulus;
  std::complex<Real> nome;
  std::complex<Real> d1;  // θ₁'(0)
  std::complex<Real> d2;  // θ₁''(0), zero up to truncation
  std::complex<Real> d3;  // θ₁'''(0)
  std::complex<Real> wp_shift;  // θ₁'''(0) / (3 θ₁'(0))
};

namespace detail {

template <typename Real>
constexpr Real pi = std::numbers::pi_v<Real>;

template <typename Real>
constexpr std::complex<Real> I{Real(0), Real(1)};

/// Derivatives 0..3 of the sine series at an already reduced argument.
template <typename Real>
std::array<std::complex<Real>, 4> theta_series(std::complex<Real> modulus,
                                               std::complex<Real> u0,
                                               const TruncationPolicy<Real>& policy) {
  using Complex = std::complex<Real>;
  std::array<Complex, 4> sum{};
  std::array<Real, 4> mag{};
  for (int n = 0;; ++n) {
    if (n > policy.max_index) {
      std::ostringstream os;
      os << "theta series not converged within " << policy.max_index
         << " terms (Im modulus = " << modulus.imag() << ")";
      throw TruncationError(os.str());
    }
    const Real half = Real(n) + Real(0.5);
    const Real freq = Real(2 * n + 1) * pi<Real>;
    Complex weight = Real(2) * std::exp(I<Real> * pi<Real> * modulus * (half * half));
    if (n % 2 == 1) weight = -weight;
    const Complex s = std::sin(freq * u0);
    const Complex c = std::cos(freq * u0);
    const std::array<Complex, 4> term{weight * s, weight * freq * c,
                                      -weight * freq * freq * s,
                                      -weight * freq * freq * freq * c};
    bool converged = n > 0;
    for (std::size_t k = 0; k < 4; ++k) {
      sum[k] += term[k];
      mag[k] += std::abs(term[k]);
      if (std::abs(term[k]) > policy.relative_threshold * mag[k]) converged = false;
    }
    if (converged) break;
  }
  return sum;
}

/// θ₁ jet at u, with u = u0 + m + n·T and |Re u0| <= 1/2, |Im u0| <= Im T / 2.
template <typename Real>
struct ReducedTheta {
  std::complex<Real> u0;
  Real m = 0;
  Real n = 0;
  std::array<std::complex<Real>, 4> jet{};  // θ₁^(k)(u0)
  // log of the quasi-periodicity factor: θ₁(u) = exp(log_factor) θ₁(u0)
  std::complex<Real> log_factor;
};

template <typename Real>
ReducedTheta<Real> reduce_and_sum(std::complex<Real> modulus, std::complex<Real> u,
                                  const TruncationPolicy<Real>& policy) {
  using Complex = std::complex<Real>;
  if (!std::isfinite(u.real()) || !std::isfinite(u.imag()))
    throw std::domain_error("theta argument is not finite");
  ReducedTheta<Real> r;
  r.n = std::round(u.imag() / modulus.imag());
  const Complex u1 = u - r.n * modulus;
  r.m = std::round(u1.real());
  r.u0 = u1 - r.m;
  r.jet = theta_series(modulus, r.u0, policy);
  r.log_factor = I<Real> * pi<Real> * (r.m + r.n) - I<Real> * pi<Real> * r.n * r.n * modulus -
                 Real(2) * I<Real> * pi<Real> * r.n * r.u0;
  return r;
}

template <typename Real>
void guard_pole(const ReducedTheta<Real>& r, std::complex<Real> modulus, Real radius,
                const char* what) {
  if (std::abs(r.u0) < radius) {
    const std::complex<Real> nearest = r.m + r.n * modulus;
    std::ostringstream os;
    os << what << ": argument within pole guard of lattice point (" << nearest.real() << ", "
       << nearest.imag() << ")";
    throw PoleError(os.str(), std::complex<double>(static_cast<double>(nearest.real()),
                                                   static_cast<double>(nearest.imag())));
  }
}

/// ρ, ρ', ρ'' at u from a reduced jet.
template <typename Real>
std::array<std::complex<Real>, 3> log_derivatives(const ReducedTheta<Real>& r) {
  const auto r1 = r.jet[1] / r.jet[0];
  const auto r2 = r.jet[2] / r.jet[0];
  const auto r3 = r.jet[3] / r.jet[0];
  return {r1 - Real(2) * I<Real> * pi<Real> * r.n, r2 - r1 * r1,
          r3 - Real(3) * r1 * r2 + Real(2) * r1 * r1 * r1};
}

}  // namespace detail

/// Evaluation environment for θ₁ and everything built on it. Immutable.
template <typename Real = double>
class EllipticContext {
 public:
  using Complex = std::complex<Real>;

  explicit EllipticContext(Complex tau, TruncationPolicy<Real> truncation = {},
                           Real pole_guard = Real(1e-6))
      : tau_(tau), truncation_(truncation), pole_guard_(pole_guard) {
    if (!std::isfinite(tau.real()) || !std::isfinite(tau.imag()))
      throw std::domain_error("tau is not finite");
    if (!(tau.imag() > 0)) throw std::domain_error("tau must lie in the upper half plane");
    consts_[index(Modulus::Base)] = make_constants(tau);
    consts_[index(Modulus::Doubled)] = make_constants(Real(2) * tau);
    consts_[index(Modulus::Halved)] = make_constants(tau / Real(2));
  }

  Complex tau() const { return tau_; }
  Complex nome() const { return consts_[0].nome; }
  const TruncationPolicy<Real>& truncation() const { return truncation_; }
  Real pole_guard() const { return pole_guard_; }

  const ThetaConstants<Real>& constants(Modulus m = Modulus::Base) const {
    return consts_[index(m)];
  }
  Complex modulus(Modulus m = Modulus::Base) const { return consts_[index(m)].modulus; }

  /// Same truncation and guard, different modulus.
  EllipticContext with_tau(Complex tau) const {
    return EllipticContext(tau, truncation_, pole_guard_);
  }

  /// ω₀ = 0, ω₁ = 1/2, ω₂ = 1/2 + τ/2, ω₃ = τ/2.
  std::array<Complex, 4> half_periods() const {
    return {Complex(0), Complex(Real(0.5)), Complex(Real(0.5)) + tau_ / Real(2),
            tau_ / Real(2)};
  }

 private:
  static constexpr std::size_t index(Modulus m) { return static_cast<std::size_t>(m); }

  ThetaConstants<Real> make_constants(Complex modulus) const {
    ThetaConstants<Real> c;
    c.modulus = modulus;
    c.nome = std::exp(detail::I<Real> * detail::pi<Real> * modulus);
    if (!(std::abs(c.nome) < Real(1))) throw std::domain_error("nome must satisfy |q| < 1");
    const auto jet = detail::theta_series(modulus, Complex(0), truncation_);
    c.d1 = jet[1];
    c.d2 = jet[2];
    c.d3 = jet[3];
    if (std::abs(c.d2) > truncation_.relative_threshold * std::abs(c.d1))
      throw std::logic_error("theta''(0) is not zero: series parity broken");
    c.wp_shift = c.d3 / (Real(3) * c.d1);
    return c;
  }

  Complex tau_;
  TruncationPolicy<Real> truncation_;
  Real pole_guard_;
  std::array<ThetaConstants<Real>, 3> consts_{};
};

using Context = EllipticContext<double>;

/// θ₁^(order)(u | modulus), order in 0..3.
template <typename Real>
std::complex<Real> theta1(const EllipticContext<Real>& ctx, std::complex<Real> u, int order = 0,
                          Modulus modulus = Modulus::Base) {
  if (order < 0 || order > 3) throw std::invalid_argument("theta1: order must be 0..3");
  const auto T = ctx.modulus(modulus);
  const auto r = detail::reduce_and_sum(T, u, ctx.truncation());
  // The prefactor E(u) has E' = -2πi n E, so Leibniz over the jet.
  const std::complex<Real> shift = -Real(2) * detail::I<Real> * detail::pi<Real> * r.n;
  static constexpr std::array<std::array<int, 4>, 4> binom{
      {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}}};
  std::complex<Real> acc(0);
  for (int j = 0; j <= order; ++j) {
    std::complex<Real> s(1);
    for (int k = 0; k < order - j; ++k) s *= shift;
    acc += Real(binom[order][j]) * s * r.jet[j];
  }
  return std::exp(r.log_factor) * acc;
}

/// Logarithmic derivative θ₁'/θ₁.
template <typename Real>
std::complex<Real> rho(const EllipticContext<Real>& ctx, std::complex<Real> u,
                       Modulus modulus = Modulus::Base) {
  const auto T = ctx.modulus(modulus);
  const auto r = detail::reduce_and_sum(T, u, ctx.truncation());
  detail::guard_pole(r, T, ctx.pole_guard(), "rho");
  return detail::log_derivatives(r)[0];
}

namespace detail {

/// ℘ or ℘' with periods (1, T) where T is one of the context moduli.
template <typename Real>
std::complex<Real> wp_unit(const EllipticContext<Real>& ctx, std::complex<Real> u, Modulus m,
                           int order) {
  const auto& c = ctx.constants(m);
  const auto r = reduce_and_sum(c.modulus, u, ctx.truncation());
  guard_pole(r, c.modulus, ctx.pole_guard(), "wp");
  const auto d = log_derivatives(r);
  return order == 0 ? -d[1] + c.wp_shift : -d[2];
}

}  // namespace detail

/// Weierstrass ℘ (order 0) or ℘' (order 1) at the requested period scale.
///
/// ℘(u|1,τ) = -ρ'(u) + θ₁'''(0)/(3θ₁'(0)). The rescaled lattices reduce to
/// unit-period ones by homothety: ℘(u|1/2,τ) = 4℘(2u|1,2τ) and
/// ℘(u|2,τ) = ℘(u/2|1,τ/2)/4.
template <typename Real>
std::complex<Real> wp(const EllipticContext<Real>& ctx, std::complex<Real> u,
                      PeriodScale scale = PeriodScale::Full, int order = 0) {
  if (order != 0 && order != 1) throw std::invalid_argument("wp: order must be 0 or 1");
  switch (scale) {
    case PeriodScale::Full:
      return detail::wp_unit(ctx, u, Modulus::Base, order);
    case PeriodScale::Half:
      return (order == 0 ? Real(4) : Real(8)) *
             detail::wp_unit(ctx, Real(2) * u, Modulus::Doubled, order);
    case PeriodScale::Double:
      return (order == 0 ? Real(0.25) : Real(0.125)) *
             detail::wp_unit(ctx, u / Real(2), Modulus::Halved, order);
  }
  throw std::invalid_argument("wp: unknown period scale");
}

template <typename Real>
struct KernelValue {
  std::complex<Real> x;
  std::complex<Real> y;  // ∂x/∂u
};

namespace detail {

template <typename Real>
KernelValue<Real> xy_unit(const EllipticContext<Real>& ctx, std::complex<Real> u,
                          std::complex<Real> z, Modulus m) {
  const auto& c = ctx.constants(m);
  const auto ru = reduce_and_sum(c.modulus, u, ctx.truncation());
  guard_pole(ru, c.modulus, ctx.pole_guard(), "kernel (u lattice)");
  const auto rz = reduce_and_sum(c.modulus, z, ctx.truncation());
  guard_pole(rz, c.modulus, ctx.pole_guard(), "kernel (z lattice)");
  const auto rzu = reduce_and_sum(c.modulus, z - u, ctx.truncation());
  const auto x = rzu.jet[0] * c.d1 / (rz.jet[0] * ru.jet[0]) *
                 std::exp(rzu.log_factor - rz.log_factor - ru.log_factor);
  // ρ(z-u) stays finite in the combination x·ρ(z-u) even where θ₁(z-u) = 0.
  const auto rho_u = log_derivatives(ru)[0];
  const auto x_rho_zu = (rzu.jet[1] - Real(2) * I<Real> * pi<Real> * rzu.n * rzu.jet[0]) *
                        c.d1 / (rz.jet[0] * ru.jet[0]) *
                        std::exp(rzu.log_factor - rz.log_factor - ru.log_factor);
  return {x, -(x * rho_u + x_rho_zu)};
}

}  // namespace detail

/// The kernel x(u,z) = θ₁(z-u)θ₁'(0)/(θ₁(z)θ₁(u)) and its u-derivative,
/// y = -x (ρ(u) + ρ(z-u)), for one of the three variants.
template <typename Real>
KernelValue<Real> xy(const EllipticContext<Real>& ctx, std::complex<Real> u,
                     std::complex<Real> z, KernelVariant variant = KernelVariant::Plain) {
  switch (variant) {
    case KernelVariant::Plain:
      return detail::xy_unit(ctx, u, z, Modulus::Base);
    case KernelVariant::Half: {
      const auto k = detail::xy_unit(ctx, Real(2) * u, z, Modulus::Doubled);
      return {Real(2) * k.x, Real(4) * k.y};
    }
    case KernelVariant::Double: {
      const auto k = detail::xy_unit(ctx, u / Real(2), z, Modulus::Halved);
      return {k.x / Real(2), k.y / Real(4)};
    }
  }
  throw std::invalid_argument("xy: unknown kernel variant");
}

/// σ(u,z) = θ₁(u-z)θ₁'(0)/(θ₁(z)θ₁(u)); equal to -x(u,z).
template <typename Real>
std::complex<Real> sigma(const EllipticContext<Real>& ctx, std::complex<Real> u,
                         std::complex<Real> z) {
  const auto& c = ctx.constants(Modulus::Base);
  const auto ru = detail::reduce_and_sum(c.modulus, u, ctx.truncation());
  detail::guard_pole(ru, c.modulus, ctx.pole_guard(), "sigma (u lattice)");
  const auto rz = detail::reduce_and_sum(c.modulus, z, ctx.truncation());
  detail::guard_pole(rz, c.modulus, ctx.pole_guard(), "sigma (z lattice)");
  const auto ruz = detail::reduce_and_sum(c.modulus, u - z, ctx.truncation());
  return ruz.jet[0] * c.d1 / (rz.jet[0] * ru.jet[0]) *
         std::exp(ruz.log_factor - rz.log_factor - ru.log_factor);
}

/// The two halves of the kernel heat equation 2πi ∂_τ x + ∂_u∂_z x = 0.
template <typename Real>
struct HeatTerms {
  std::complex<Real> tau_term;    // 2πi ∂_τ x
  std::complex<Real> mixed_term;  // ∂²x/∂u∂z
  std::complex<Real> residual() const { return tau_term + mixed_term; }
};

/// Finite-difference estimate of both heat-equation terms at (u, z).
///
/// ∂_τ x uses a five-point central difference of step h in τ; ∂_u∂_z x applies
/// the same stencil in z to the closed-form y = ∂_u x.
template <typename Real>
HeatTerms<Real> heat_terms(const EllipticContext<Real>& ctx, KernelVariant variant,
                           std::complex<Real> u, std::complex<Real> z, Real h) {
  if (!(h > 0)) throw std::invalid_argument("heat_terms: step must be positive");
  auto x_at = [&](Real k) { return xy(ctx.with_tau(ctx.tau() + k * h), u, z, variant).x; };
  auto y_at = [&](Real k) { return xy(ctx, u, z + k * h, variant).y; };
  auto central = [&](auto f) {
    return (f(Real(-2)) - Real(8) * f(Real(-1)) + Real(8) * f(Real(1)) - f(Real(2))) /
           (Real(12) * h);
  };
  return {Real(2) * detail::I<Real> * detail::pi<Real> * central(x_at), central(y_at)};
}

template <typename Real>
std::complex<Real> heat_residual(const EllipticContext<Real>& ctx, KernelVariant variant,
                                 std::complex<Real> u, std::complex<Real> z, Real h) {
  return heat_terms(ctx, variant, u, z, h).residual();
}

}  // namespace ellcm
