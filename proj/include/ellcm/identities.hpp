#pragma once

// Registry of functional identities satisfied by ℘, x, y and their twisted
// relatives. Each identity is evaluated as a sum of terms that vanishes
// exactly; the largest term sets the scale for relative residuals.

#include <algorithm>
#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "ellcm/elliptic.hpp"

namespace ellcm {

enum class IdentityId {
  SumRule,
  ZeroSum,
  Factor,
  SigmaSumRule,
  SigmaZeroSum,
  SigmaFactor,
  HalfFactor,
  DoubleFactor,
  PlainHalfFactor,
  PlainPlainFactor,
  PlainDoubleFactor,
  HalfPlainFactor,
  HalfDoubleFactor,
  PlainDoubleSameFactor,
  TwistedSumPlain,
  TwistedSumDouble,
  TwistedSumMixed,
  TwistedSumHalf,
  WpDuplication,
  WpHalfCoset,
  WpDoubleCoset,
};

struct IdentityInfo {
  IdentityId id;
  std::string_view name;
  int arity;  // free variables among u, v, z
  bool has_const;
  std::string_view formula;
};

inline constexpr std::array<IdentityInfo, 21> kIdentities{{
    {IdentityId::SumRule, "sum-rule", 3, false,
     "x(u,z)y(v,z) - y(u,z)x(v,z) = x(u+v,z)(P(u) - P(v))"},
    {IdentityId::ZeroSum, "zero-sum", 2, false, "x(u,z)y(-u,z) - y(u,z)x(-u,z) = P'(u)"},
    {IdentityId::Factor, "factor", 2, false, "x(u,z)x(-u,z) = P(z) - P(u)"},
    {IdentityId::SigmaSumRule, "sigma-sum-rule", 3, false,
     "s(u,z)s(v,z)(r(v)+r(z-v)-r(u)-r(z-u)) = s(u+v,z)(P(u) - P(v))"},
    {IdentityId::SigmaZeroSum, "sigma-zero-sum", 2, false,
     "s(u,z)s(-u,z)(r(u)+r(z-u)-r(-u)-r(z+u)) = P'(u)"},
    {IdentityId::SigmaFactor, "sigma-factor", 2, false, "s(u,z)s(-u,z) = P(z) - P(u)"},
    {IdentityId::HalfFactor, "half-factor", 2, false,
     "xh(u,z)xh(-u,z) = -Ph(u) + Ph(z/2)"},
    {IdentityId::DoubleFactor, "double-factor", 2, false,
     "xd(u,z)xd(-u,z) = -Pd(u) + Pd(2z)"},
    {IdentityId::PlainHalfFactor, "plain-half-factor", 2, true,
     "x(u,2z)xh(-u,2z) + xh(u,2z)x(-u,2z) = -2P(u) + const"},
    {IdentityId::PlainPlainFactor, "plain-plain-factor", 2, true,
     "x(u,2z)x(-2u,z) + x(2u,z)x(-u,2z) = -P(u) + const"},
    {IdentityId::PlainDoubleFactor, "plain-double-factor", 2, true,
     "x(u,2z)xd(-2u,z) + xd(2u,z)x(-u,2z) = -P(u) + const"},
    {IdentityId::HalfPlainFactor, "half-plain-factor", 2, true,
     "xh(u,2z)x(-2u,z) + x(2u,z)xh(-u,2z) = -Ph(u) + const"},
    {IdentityId::HalfDoubleFactor, "half-double-factor", 2, true,
     "xh(u,2z)xd(-2u,z) + xd(2u,z)xh(-u,2z) = -P(u) + const"},
    {IdentityId::PlainDoubleSameFactor, "plain-double-same-factor", 2, true,
     "x(u,z)xd(-u,z) + xd(u,z)x(-u,z) = -2Pd(u) + const"},
    {IdentityId::TwistedSumPlain, "twisted-sum-plain", 3, false,
     "x(2u,z)y(-u-v,z) - y(2u,z)x(-u-v,z) + x(u+v,z)y(-2v,z) - y(u+v,z)x(-2v,z)"
     " = x(u-v,z)(P(2u) - P(2v))"},
    {IdentityId::TwistedSumDouble, "twisted-sum-double", 3, false,
     "xd(2u,z)y(-u-v,z) - yd(2u,z)x(-u-v,z) + x(u+v,z)yd(-2v,z) - y(u+v,z)xd(-2v,z)"
     " = x(u-v,z)(Pd(2u) - Pd(2v))"},
    {IdentityId::TwistedSumMixed, "twisted-sum-mixed", 3, false,
     "2x(u,2z)y(-u-v,z) - y(u,2z)x(-u-v,z) + x(u+v,z)y(-v,2z) - 2y(u+v,z)x(-v,2z)"
     " = x(u-v,z)(P(u) - P(v))"},
    {IdentityId::TwistedSumHalf, "twisted-sum-half", 3, false,
     "2xh(u,2z)y(-u-v,z) - yh(u,2z)x(-u-v,z) + x(u+v,z)yh(-v,2z) - 2y(u+v,z)xh(-v,2z)"
     " = x(u-v,z)(Ph(u) - Ph(v))"},
    {IdentityId::WpDuplication, "wp-duplication", 1, false,
     "P(2u) = (1/4) sum_a P(u + w_a)"},
    {IdentityId::WpHalfCoset, "wp-half-coset", 1, false, "Ph(u) = P(u) + P(u+1/2) - P(1/2)"},
    {IdentityId::WpDoubleCoset, "wp-double-coset", 1, false,
     "Pd(2u) = (P(u) + P(u+tau/2) - P(tau/2)) / 4"},
}};

inline const IdentityInfo& identity_info(IdentityId id) {
  for (const auto& info : kIdentities)
    if (info.id == id) return info;
  throw std::invalid_argument("unknown identity id");
}

inline std::optional<IdentityId> identity_from_name(std::string_view name) {
  for (const auto& info : kIdentities)
    if (info.name == name) return info.id;
  return std::nullopt;
}

template <typename Real>
struct IdentityValue {
  std::complex<Real> value;
  Real scale;  // max(1, largest term magnitude)
  Real relative() const { return std::abs(value) / scale; }
};

namespace detail {

template <typename Real>
class TermSum {
 public:
  void add(std::complex<Real> t) {
    sum_ += t;
    scale_ = std::max(scale_, std::abs(t));
  }
  IdentityValue<Real> result() const { return {sum_, scale_}; }

 private:
  std::complex<Real> sum_{};
  Real scale_ = Real(1);
};

/// LHS - RHS with any const. term left out.
template <typename Real>
IdentityValue<Real> identity_terms(const EllipticContext<Real>& ctx, IdentityId id,
                                   std::complex<Real> u, std::complex<Real> v,
                                   std::complex<Real> z) {
  using C = std::complex<Real>;
  using K = KernelVariant;
  using S = PeriodScale;
  auto X = [&](C a, C b, K k = K::Plain) { return xy(ctx, a, b, k).x; };
  auto XY = [&](C a, C b, K k = K::Plain) { return xy(ctx, a, b, k); };
  auto P = [&](C a, S s = S::Full) { return wp(ctx, a, s, 0); };
  auto dP = [&](C a, S s = S::Full) { return wp(ctx, a, s, 1); };
  auto R = [&](C a) { return rho(ctx, a); };
  auto Sg = [&](C a, C b) { return sigma(ctx, a, b); };
  const C two(Real(2));
  TermSum<Real> t;

  // a·xy(A)·yx(B) - ... pattern shared by the twisted sum rules
  auto sum_rule = [&](K k1, C a1, C b1, Real c1, Real d1, K k2, C a2, C b2, Real c2, Real d2,
                      S scale, C pu, C pv) {
    const auto A = XY(a1, b1, k1);
    const auto B = XY(-u - v, z);
    const auto Cc = XY(u + v, z);
    const auto D = XY(a2, b2, k2);
    t.add(c1 * A.x * B.y);
    t.add(-d1 * A.y * B.x);
    t.add(c2 * Cc.x * D.y);
    t.add(-d2 * Cc.y * D.x);
    const auto xm = X(u - v, z);
    t.add(-xm * P(pu, scale));
    t.add(xm * P(pv, scale));
  };

  switch (id) {
    case IdentityId::SumRule: {
      const auto a = XY(u, z), b = XY(v, z);
      const auto xs = X(u + v, z);
      t.add(a.x * b.y);
      t.add(-a.y * b.x);
      t.add(-xs * P(u));
      t.add(xs * P(v));
      break;
    }
    case IdentityId::ZeroSum: {
      const auto a = XY(u, z), b = XY(-u, z);
      t.add(a.x * b.y);
      t.add(-a.y * b.x);
      t.add(-dP(u));
      break;
    }
    case IdentityId::Factor:
      t.add(X(u, z) * X(-u, z));
      t.add(-P(z));
      t.add(P(u));
      break;
    case IdentityId::SigmaSumRule: {
      const auto ss = Sg(u, z) * Sg(v, z);
      t.add(ss * (R(v) + R(z - v)));
      t.add(-ss * (R(u) + R(z - u)));
      const auto s = Sg(u + v, z);
      t.add(-s * P(u));
      t.add(s * P(v));
      break;
    }
    case IdentityId::SigmaZeroSum: {
      const auto ss = Sg(u, z) * Sg(-u, z);
      t.add(ss * (R(u) + R(z - u)));
      t.add(-ss * (R(-u) + R(z + u)));
      t.add(-dP(u));
      break;
    }
    case IdentityId::SigmaFactor:
      t.add(Sg(u, z) * Sg(-u, z));
      t.add(-P(z));
      t.add(P(u));
      break;
    case IdentityId::HalfFactor:
      t.add(X(u, z, K::Half) * X(-u, z, K::Half));
      t.add(P(u, S::Half));
      t.add(-P(z / Real(2), S::Half));
      break;
    case IdentityId::DoubleFactor:
      t.add(X(u, z, K::Double) * X(-u, z, K::Double));
      t.add(P(u, S::Double));
      t.add(-P(two * z, S::Double));
      break;
    case IdentityId::PlainHalfFactor:
      t.add(X(u, two * z) * X(-u, two * z, K::Half));
      t.add(X(u, two * z, K::Half) * X(-u, two * z));
      t.add(two * P(u));
      break;
    case IdentityId::PlainPlainFactor:
      t.add(X(u, two * z) * X(-two * u, z));
      t.add(X(two * u, z) * X(-u, two * z));
      t.add(P(u));
      break;
    case IdentityId::PlainDoubleFactor:
      t.add(X(u, two * z) * X(-two * u, z, K::Double));
      t.add(X(two * u, z, K::Double) * X(-u, two * z));
      t.add(P(u));
      break;
    case IdentityId::HalfPlainFactor:
      t.add(X(u, two * z, K::Half) * X(-two * u, z));
      t.add(X(two * u, z) * X(-u, two * z, K::Half));
      t.add(P(u, S::Half));
      break;
    case IdentityId::HalfDoubleFactor:
      t.add(X(u, two * z, K::Half) * X(-two * u, z, K::Double));
      t.add(X(two * u, z, K::Double) * X(-u, two * z, K::Half));
      t.add(P(u));
      break;
    case IdentityId::PlainDoubleSameFactor:
      t.add(X(u, z) * X(-u, z, K::Double));
      t.add(X(u, z, K::Double) * X(-u, z));
      t.add(two * P(u, S::Double));
      break;
    case IdentityId::TwistedSumPlain:
      sum_rule(K::Plain, two * u, z, 1, 1, K::Plain, -two * v, z, 1, 1, S::Full, two * u,
               two * v);
      break;
    case IdentityId::TwistedSumDouble:
      sum_rule(K::Double, two * u, z, 1, 1, K::Double, -two * v, z, 1, 1, S::Double, two * u,
               two * v);
      break;
    case IdentityId::TwistedSumMixed:
      sum_rule(K::Plain, u, two * z, 2, 1, K::Plain, -v, two * z, 1, 2, S::Full, u, v);
      break;
    case IdentityId::TwistedSumHalf:
      sum_rule(K::Half, u, two * z, 2, 1, K::Half, -v, two * z, 1, 2, S::Half, u, v);
      break;
    case IdentityId::WpDuplication: {
      t.add(P(two * u));
      for (const auto& w : ctx.half_periods()) t.add(-P(u + w) / Real(4));
      break;
    }
    case IdentityId::WpHalfCoset: {
      const C half(Real(0.5));
      t.add(P(u, S::Half));
      t.add(-P(u));
      t.add(-P(u + half));
      t.add(P(half));
      break;
    }
    case IdentityId::WpDoubleCoset: {
      const C t2 = ctx.tau() / Real(2);
      t.add(P(two * u, S::Double));
      t.add(-P(u) / Real(4));
      t.add(-P(u + t2) / Real(4));
      t.add(P(t2) / Real(4));
      break;
    }
    default:
      throw std::invalid_argument("unknown identity id");
  }
  return t.result();
}

/// Where const_term evaluates: u = s·z, one product vanishing there.
inline double const_point_factor(IdentityId id) {
  return id == IdentityId::PlainPlainFactor ? 0.5 : 1.0;
}

}  // namespace detail

/// The u-independent constant on the right side of a factor-type identity.
template <typename Real>
std::complex<Real> const_term(const EllipticContext<Real>& ctx, IdentityId id,
                              std::complex<Real> z) {
  if (!identity_info(id).has_const)
    throw std::invalid_argument("identity has no const term: " +
                                std::string(identity_info(id).name));
  const Real s = Real(detail::const_point_factor(id));
  const auto at = detail::identity_terms(ctx, id, s * z, std::complex<Real>(0), z);
  const auto mirror = detail::identity_terms(ctx, id, -s * z, std::complex<Real>(0), z);
  const Real scale = std::max(at.scale, mirror.scale);
  if (std::abs(at.value - mirror.value) > Real(1e-8) * scale)
    throw std::runtime_error("const term disagrees between u = sz and u = -sz");
  return at.value;
}

/// LHS - RHS of the identity with its scale; const. terms are subtracted.
template <typename Real>
IdentityValue<Real> evaluate_identity(const EllipticContext<Real>& ctx, IdentityId id,
                                      std::complex<Real> u, std::complex<Real> v,
                                      std::complex<Real> z) {
  auto r = detail::identity_terms(ctx, id, u, v, z);
  if (identity_info(id).has_const) {
    const auto c = const_term(ctx, id, z);
    r.value -= c;
    r.scale = std::max(r.scale, std::abs(c));
  }
  return r;
}

template <typename Real>
std::complex<Real> identity_residual(const EllipticContext<Real>& ctx, IdentityId id,
                                     std::complex<Real> u, std::complex<Real> v,
                                     std::complex<Real> z) {
  return evaluate_identity(ctx, id, u, v, z).value;
}

/// Twisted sum rule at v = u, where x(u-v,z)(F(u)-F(v)) tends to F'(u).
template <typename Real>
IdentityValue<Real> twisted_sum_coincident(const EllipticContext<Real>& ctx, IdentityId id,
                                           std::complex<Real> u, std::complex<Real> z) {
  using C = std::complex<Real>;
  using K = KernelVariant;
  using S = PeriodScale;
  const C two(Real(2));
  K k;
  S scale;
  C a, b;
  Real c1, d1;
  bool doubled;
  switch (id) {
    case IdentityId::TwistedSumPlain:
      k = K::Plain, scale = S::Full, doubled = true;
      break;
    case IdentityId::TwistedSumDouble:
      k = K::Double, scale = S::Double, doubled = true;
      break;
    case IdentityId::TwistedSumMixed:
      k = K::Plain, scale = S::Full, doubled = false;
      break;
    case IdentityId::TwistedSumHalf:
      k = K::Half, scale = S::Half, doubled = false;
      break;
    default:
      throw std::invalid_argument("not a twisted sum rule");
  }
  if (doubled) {
    a = two * u, b = z, c1 = 1, d1 = 1;
  } else {
    a = u, b = two * z, c1 = 2, d1 = 1;
  }
  detail::TermSum<Real> t;
  const auto A = xy(ctx, a, b, k);
  const auto B = xy(ctx, -two * u, z);
  const auto Cc = xy(ctx, two * u, z);
  const auto D = xy(ctx, -a, b, k);
  t.add(c1 * A.x * B.y);
  t.add(-d1 * A.y * B.x);
  t.add(d1 * Cc.x * D.y);
  t.add(-c1 * Cc.y * D.x);
  const C dF = doubled ? two * wp(ctx, two * u, scale, 1) : wp(ctx, u, scale, 1);
  t.add(-dF);
  return t.result();
}

}  // namespace ellcm
