#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ellcm/identities.hpp"
#include "oracles.hpp"

using namespace ellcm;
using oracle::cd;

namespace {

struct Sample {
  cd u, v, z;
};

/// Points with u, v, z and the combinations used by the identities kept off the
/// pole lattices at all three moduli.
Sample generic_triple(std::mt19937_64& rng, const Context& ctx) {
  for (;;) {
    const auto [u, z] = oracle::generic_pair(rng, ctx.tau(), 0.05);
    const auto [v, w] = oracle::generic_pair(rng, ctx.tau(), 0.05);
    (void)w;
    try {
      for (auto id : {IdentityId::TwistedSumPlain, IdentityId::TwistedSumDouble,
                      IdentityId::TwistedSumMixed, IdentityId::TwistedSumHalf,
                      IdentityId::PlainHalfFactor, IdentityId::HalfDoubleFactor,
                      IdentityId::PlainDoubleSameFactor, IdentityId::WpDuplication,
                      IdentityId::WpDoubleCoset})
        evaluate_identity(ctx, id, u, v, z);
      return {u, v, z};
    } catch (const PoleError&) {
    }
  }
}

}  // namespace

TEST(Registry, CompleteAndUnique) {
  EXPECT_EQ(kIdentities.size(), 21u);
  std::set<std::string_view> names;
  int with_const = 0;
  for (const auto& info : kIdentities) {
    names.insert(info.name);
    EXPECT_EQ(identity_from_name(info.name), info.id);
    EXPECT_GE(info.arity, 1);
    EXPECT_LE(info.arity, 3);
    with_const += info.has_const;
  }
  EXPECT_EQ(names.size(), kIdentities.size());
  EXPECT_EQ(with_const, 6);
  EXPECT_FALSE(identity_from_name("no-such-identity").has_value());
}

TEST(Identities, AllVanishAtRandomPoints) {
  for (const cd tau : {cd(0, 1), cd(0.3, 0.8)}) {
    Context ctx(tau);
    std::mt19937_64 rng(101);
    for (const auto& info : kIdentities) {
      double worst = 0;
      for (int k = 0; k < 100; ++k) {
        const auto s = generic_triple(rng, ctx);
        worst = std::max(worst, evaluate_identity(ctx, info.id, s.u, s.v, s.z).relative());
      }
      EXPECT_LT(worst, 1e-10) << info.name << " tau=" << tau;
    }
  }
}

TEST(Identities, UntwistedSumRuleAbsolute) {
  Context ctx(cd(0, 1));
  const cd u(0.21, 0.13), v(-0.17, 0.29), z(0.33, -0.11);
  EXPECT_LT(std::abs(identity_residual(ctx, IdentityId::SumRule, u, v, z)), 1e-10);
  EXPECT_LT(std::abs(identity_residual(ctx, IdentityId::SigmaZeroSum, u, v, z)), 1e-10);
}

TEST(Identities, WrongSignControlFails) {
  // x(u)x(-u) = ℘(z) + ℘(u) is false; checks the residual is sensitive
  Context ctx(cd(0, 1));
  const cd u(0.21, 0.13), z(0.33, -0.11);
  const cd bad = xy(ctx, u, z).x * xy(ctx, -u, z).x - wp(ctx, z) - wp(ctx, u);
  EXPECT_GT(std::abs(bad), 1e-2);
}

TEST(ConstTerm, MirrorPointAgrees) {
  Context ctx(cd(0.3, 0.8));
  std::mt19937_64 rng(103);
  for (const auto& info : kIdentities) {
    if (!info.has_const) continue;
    for (int k = 0; k < 20; ++k) {
      const auto s = generic_triple(rng, ctx);
      const double f = info.id == IdentityId::PlainPlainFactor ? 0.5 : 1.0;
      const auto a = detail::identity_terms(ctx, info.id, f * s.z, cd(0), s.z);
      const auto b = detail::identity_terms(ctx, info.id, -f * s.z, cd(0), s.z);
      EXPECT_LT(std::abs(a.value - b.value) / std::max(a.scale, b.scale), 1e-10) << info.name;
      EXPECT_NO_THROW(const_term(ctx, info.id, s.z));
    }
  }
}

TEST(ConstTerm, SweepOverUWithConstantSubtracted) {
  Context ctx(cd(0, 1));
  std::mt19937_64 rng(107);
  const cd z(0.23, 0.19);
  for (const auto& info : kIdentities) {
    if (!info.has_const) continue;
    for (int k = 0; k < 50; ++k) {
      const cd u = oracle::random_point(rng, 0.5, 0.45);
      try {
        EXPECT_LT(evaluate_identity(ctx, info.id, u, cd(0), z).relative(), 1e-10) << info.name;
      } catch (const PoleError&) {
      }
    }
  }
}

TEST(ConstTerm, HalfFactorHasNoExtraConstant) {
  Context ctx(cd(0.3, 0.8));
  EXPECT_FALSE(identity_info(IdentityId::HalfFactor).has_const);
  EXPECT_THROW(const_term(ctx, IdentityId::HalfFactor, cd(0.2, 0.1)), std::invalid_argument);
  const cd u(0.11, 0.07), z(0.31, -0.12);
  const cd lhs = xy(ctx, u, z, KernelVariant::Half).x * xy(ctx, -u, z, KernelVariant::Half).x;
  EXPECT_LT(std::abs(lhs + wp(ctx, u, PeriodScale::Half) - wp(ctx, z / 2.0, PeriodScale::Half)),
            1e-10);
}

TEST(ConstTerm, PlainHalfMatchesExplicitForm) {
  // at u = z the second product vanishes
  Context ctx(cd(0.3, 0.8));
  const cd z(0.23, 0.19);
  const cd expect = 2.0 * wp(ctx, z) + xy(ctx, z, 2.0 * z).x *
                                           xy(ctx, -z, 2.0 * z, KernelVariant::Half).x;
  EXPECT_LT(std::abs(const_term(ctx, IdentityId::PlainHalfFactor, z) - expect), 1e-10);
}

TEST(TwistedSum, CoincidentLimit) {
  Context ctx(cd(0.3, 0.8));
  std::mt19937_64 rng(109);
  for (auto id : {IdentityId::TwistedSumPlain, IdentityId::TwistedSumDouble,
                  IdentityId::TwistedSumMixed, IdentityId::TwistedSumHalf}) {
    for (int k = 0; k < 20; ++k) {
      const auto s = generic_triple(rng, ctx);
      EXPECT_LT(twisted_sum_coincident(ctx, id, s.u, s.z).relative(), 1e-10);
      // approaching the diagonal, the generic residual stays small
      EXPECT_LT(evaluate_identity(ctx, id, s.u, s.u + 1e-4, s.z).relative(), 1e-9);
    }
  }
  EXPECT_THROW(twisted_sum_coincident(ctx, IdentityId::Factor, cd(0.1), cd(0.2)),
               std::invalid_argument);
}
