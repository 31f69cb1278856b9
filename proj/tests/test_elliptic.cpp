#include <gtest/gtest.h>

#include <random>

#include "ellcm/elliptic.hpp"
#include "oracles.hpp"

using namespace ellcm;
using oracle::cd;
using oracle::I;
using oracle::pi;

namespace {

double rel(cd a, cd b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Theta, VanishesAtOrigin) {
  Context ctx(I);
  EXPECT_EQ(std::abs(theta1(ctx, cd(0))), 0.0);
  EXPECT_LT(std::abs(ctx.constants().d2), 1e-15);
}

TEST(Theta, AntiPeriodicUnderUnitShift) {
  Context ctx(I);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const cd u = oracle::random_point(rng, 2.0, 2.0);
    EXPECT_LT(rel(theta1(ctx, u + 1.0), -theta1(ctx, u)), 1e-12);
  }
}

TEST(Theta, MatchesUnreducedSeries) {
  Context ctx(I);
  const cd u(0.3, 0.1);
  const cd frozen(0.773651221771173147323352042428, 0.172931536591592663012904375162);
  EXPECT_LT(std::abs(theta1(ctx, u) - oracle::theta_direct(u, I)), 1e-14);
  EXPECT_LT(std::abs(theta1(ctx, u) - frozen), 1e-14);
  EXPECT_LT(std::abs(theta1(ctx, u, 1) - cd(1.79019441821331768270150783991,
                                            -0.734742068722505982945763539348)),
            1e-13);
  EXPECT_LT(std::abs(theta1(ctx, u, 3) - cd(-19.449756571945613634752689144,
                                            6.82538643002036029405834981235)),
            1e-12);
}

TEST(Theta, ReductionMatchesDirectSeriesFarFromCell) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const cd u = oracle::random_point(rng, 3.0, 1.5);
    EXPECT_LT(rel(theta1(ctx, u), oracle::theta_direct(u, tau)), 1e-11) << u;
  }
}

TEST(Theta, DerivativesMatchFiniteDifferences) {
  Context ctx(cd(0.1, 0.9));
  const cd u(1.7, 1.3);
  const double h = 1e-5;
  for (int k = 0; k < 3; ++k) {
    const cd fd = (theta1(ctx, u + h, k) - theta1(ctx, u - h, k)) / (2 * h);
    EXPECT_LT(rel(fd, theta1(ctx, u, k + 1)), 1e-7) << k;
  }
}

TEST(Theta, QuasiPeriodicAllModuli) {
  const cd tau(0.2, 0.6);
  Context ctx(tau);
  std::mt19937_64 rng(3);
  for (auto m : {Modulus::Base, Modulus::Doubled, Modulus::Halved}) {
    const cd T = ctx.modulus(m);
    for (int k = 0; k < 100; ++k) {
      const cd u = oracle::random_point(rng, 0.5, 0.5 * T.imag());
      const cd expect = -std::exp(-I * pi * T - 2.0 * pi * I * u) * theta1(ctx, u, 0, m);
      EXPECT_LT(rel(theta1(ctx, u + T, 0, m), expect), 1e-10);
    }
  }
}

TEST(Theta, RejectsInvalidModulus) {
  EXPECT_THROW(Context(cd(0, -1)), std::domain_error);
  EXPECT_THROW(Context(cd(0.5, 0)), std::domain_error);
  EXPECT_THROW(Context(cd(NAN, 1)), std::domain_error);
  EXPECT_THROW(Context(cd(0, 1e-4)), TruncationError);
  Context ctx(I);
  EXPECT_THROW(theta1(ctx, cd(INFINITY, 0)), std::domain_error);
  EXPECT_THROW(theta1(ctx, cd(0.1), 4), std::invalid_argument);
}

TEST(Rho, OddAndShifts) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    const cd u = oracle::random_point(rng, 0.5, 0.4);
    EXPECT_LT(std::abs(rho(ctx, u) + rho(ctx, -u)) / std::max(1.0, std::abs(rho(ctx, u))),
              1e-10);
    EXPECT_LT(std::abs(rho(ctx, u + tau) - rho(ctx, u) + 2.0 * pi * I), 1e-10);
    EXPECT_LT(std::abs(rho(ctx, u + 1.0) - rho(ctx, u)), 1e-10);
  }
  EXPECT_LT(std::abs(rho(ctx, cd(0.17, -0.22)) - cd(1.70359302042867552831850577732,
                                                    3.74908672481884776312650402209)),
            1e-12);
}

TEST(Rho, SmallArgumentExpansion) {
  Context ctx(I);
  const auto& c = ctx.constants();
  const cd u(1e-3);
  const cd lhs = rho(ctx, u) - 1.0 / u;
  EXPECT_LT(std::abs(lhs - c.wp_shift * u), 1e-7);
}

TEST(Rho, PoleGuardReportsNearestLatticePoint) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  try {
    rho(ctx, 2.0 + tau + cd(1e-8, 0));
    FAIL() << "expected PoleError";
  } catch (const PoleError& e) {
    EXPECT_LT(std::abs(e.nearest() - (2.0 + tau)), 1e-12);
  }
}

TEST(Wp, EvenAndPeriodic) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    const cd u = oracle::random_point(rng, 0.5, 0.4);
    const cd w = wp(ctx, u);
    EXPECT_LT(rel(wp(ctx, -u), w), 1e-10);
    EXPECT_LT(rel(wp(ctx, u + tau), w), 1e-10);
    EXPECT_LT(rel(wp(ctx, u + 1.0), w), 1e-10);
  }
}

TEST(Wp, LatticeSumOracleAtFixedPoint) {
  const cd tau(0, 0.8);
  Context ctx(tau);
  const cd u(0.31, 0.07);
  const cd frozen(10.3469482545091110899485238129, -3.66049897304660356343364111216);
  EXPECT_LT(rel(wp(ctx, u), oracle::wp_lattice(u, tau)), 1e-8);
  EXPECT_LT(rel(wp(ctx, u), frozen), 1e-12);
  EXPECT_LT(rel(wp(ctx, u, PeriodScale::Full, 1),
                cd(-40.5500296583036204500377412629, 39.9171129802987420294273475793)),
            1e-11);
}

TEST(Wp, LatticeSumOracleAtRandomPoints) {
  std::mt19937_64 rng(29);
  for (const cd tau : {cd(0, 0.8), cd(0.3, 0.8), cd(-0.4, 1.1)}) {
    Context ctx(tau);
    for (int k = 0; k < 20; ++k) {
      const cd u = oracle::random_point(rng, 0.5, 0.45 * tau.imag());
      EXPECT_LT(rel(wp(ctx, u), oracle::wp_lattice(u, tau)), 1e-8) << u;
    }
  }
}

TEST(Wp, RescaledLatticesMatchLatticeSums) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const cd u = oracle::random_point(rng, 0.25, 0.4);
    // ℘ for periods (1/2, τ) and (2, τ) by homothety of unit-period sums
    const cd half = 4.0 * oracle::wp_lattice(2.0 * u, 2.0 * tau);
    const cd dbl = 0.25 * oracle::wp_lattice(u / 2.0, tau / 2.0);
    EXPECT_LT(rel(wp(ctx, u, PeriodScale::Half), half), 1e-8);
    EXPECT_LT(rel(wp(ctx, u, PeriodScale::Double), dbl), 1e-8);
  }
  EXPECT_LT(rel(wp(ctx, cd(0.17, -0.22), PeriodScale::Half),
                cd(-7.5173311144354049082903164624, 7.31894323939744606340524164838)),
            1e-11);
  EXPECT_LT(rel(wp(ctx, cd(0.17, -0.22), PeriodScale::Double),
                cd(-2.42048033659126065876544641074, 12.3024782857045641502932468561)),
            1e-11);
}

TEST(Wp, DerivativeMatchesFiniteDifference) {
  Context ctx(cd(0.3, 0.8));
  const double h = 1e-5;
  for (auto s : {PeriodScale::Full, PeriodScale::Half, PeriodScale::Double}) {
    const cd u(0.21, 0.13);
    const cd fd = (wp(ctx, u + h, s) - wp(ctx, u - h, s)) / (2 * h);
    EXPECT_LT(rel(fd, wp(ctx, u, s, 1)), 1e-7);
  }
}

TEST(Wp, DuplicationOverHalfPeriods) {
  Context ctx(cd(0.3, 0.8));
  std::mt19937_64 rng(37);
  for (int k = 0; k < 50; ++k) {
    const cd u = oracle::random_point(rng, 0.5, 0.4);
    cd s = 0;
    for (const cd w : ctx.half_periods()) s += wp(ctx, u + w);
    EXPECT_LT(rel(wp(ctx, 2.0 * u), 0.25 * s), 1e-10);
  }
}

TEST(Wp, PoleGuard) {
  Context ctx(I);
  EXPECT_THROW(wp(ctx, cd(1e-9, 0)), PoleError);
  EXPECT_THROW(wp(ctx, cd(0.5, 0), PeriodScale::Half), PoleError);
  EXPECT_NO_THROW(wp(ctx, cd(0.5, 0), PeriodScale::Double));
  EXPECT_THROW(wp(ctx, cd(2, 0), PeriodScale::Double), PoleError);
}

TEST(Kernel, FrozenValues) {
  Context ctx(cd(0.3, 0.8));
  const cd u(0.17, -0.22), z(-0.09, 0.31);
  const auto p = xy(ctx, u, z);
  EXPECT_LT(rel(p.x, cd(1.86559208570497161462044839819, 8.52739018197697629585349192255)),
            1e-12);
  EXPECT_LT(rel(p.y, cd(-5.90610544954564659696413380471, -14.7482378944440310645474208668)),
            1e-12);
  const auto h = xy(ctx, u, z, KernelVariant::Half);
  EXPECT_LT(rel(h.x, cd(1.86673486171061611667495435911, 13.6776990680305186108189015693)),
            1e-12);
  EXPECT_LT(rel(h.y, cd(-5.00915425322289045179744692862, -7.14608965633785808106891473279)),
            1e-12);
  const auto d = xy(ctx, u, z, KernelVariant::Double);
  EXPECT_LT(rel(d.x, cd(3.78260317524176858639693704101, 8.17631480728305434174312237385)),
            1e-12);
  EXPECT_LT(rel(d.y, cd(-8.7138139594771898344234603293, -9.25902078119694645597659506062)),
            1e-12);
}

TEST(Kernel, YIsUDerivative) {
  Context ctx(cd(0.3, 0.8));
  const cd u(0.27, 0.05), z(-0.13, 0.24);
  const double h = 1e-5;
  for (auto v : {KernelVariant::Plain, KernelVariant::Half, KernelVariant::Double}) {
    const cd fd = (xy(ctx, u + h, z, v).x - xy(ctx, u - h, z, v).x) / (2 * h);
    EXPECT_LT(rel(fd, xy(ctx, u, z, v).y), 1e-8);
  }
}

TEST(Kernel, FactorAndSigma) {
  Context ctx(cd(0.3, 0.8));
  std::mt19937_64 rng(41);
  for (int k = 0; k < 100; ++k) {
    const auto [u, z] = oracle::generic_pair(rng, ctx.tau());
    const cd x = xy(ctx, u, z).x;
    EXPECT_LT(rel(x * xy(ctx, -u, z).x, wp(ctx, z) - wp(ctx, u)), 1e-10);
    EXPECT_LT(std::abs(sigma(ctx, u, z) + x) / std::max(1.0, std::abs(x)), 1e-12);
  }
}

TEST(Kernel, QuasiPeriodicInZ) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  std::mt19937_64 rng(43);
  for (int k = 0; k < 100; ++k) {
    const auto [u, z] = oracle::generic_pair(rng, tau);
    const cd x = xy(ctx, u, z).x;
    EXPECT_LT(rel(xy(ctx, u, z + 1.0).x, x), 1e-10);
    EXPECT_LT(rel(xy(ctx, u, z + tau).x, std::exp(2.0 * pi * I * u) * x), 1e-10);
    const cd xh = xy(ctx, u, z, KernelVariant::Half).x;
    EXPECT_LT(rel(xy(ctx, u, z + 1.0, KernelVariant::Half).x, xh), 1e-10);
    EXPECT_LT(rel(xy(ctx, u, z + 2.0 * tau, KernelVariant::Half).x,
                  std::exp(4.0 * pi * I * u) * xh),
              1e-10);
    const cd xd = xy(ctx, u, z, KernelVariant::Double).x;
    EXPECT_LT(rel(xy(ctx, u, z + 1.0, KernelVariant::Double).x, xd), 1e-10);
    EXPECT_LT(rel(xy(ctx, u, z + tau / 2.0, KernelVariant::Double).x,
                  std::exp(pi * I * u) * xd),
              1e-10);
  }
}

TEST(Kernel, SingularBehaviour) {
  Context ctx(cd(0.3, 0.8));
  const cd z(0.21, 0.17), u(-0.14, 0.26);
  for (const cd dir : {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)}) {
    const cd e1 = 1e-4 * dir;
    const cd e2 = 1e-5 * dir;
    // u x(u,z) = 1 - u ρ(z) + O(u²)
    const cd a1 = e1 * xy(ctx, e1, z).x - 1.0, a2 = e2 * xy(ctx, e2, z).x - 1.0;
    EXPECT_LT(std::abs(a1 + e1 * rho(ctx, z)), 1e-6);
    EXPECT_LT(std::abs(a2), std::abs(a1) / 5.0);
    // z x(u,z) = -1 + O(z)
    const cd b1 = e1 * xy(ctx, u, e1).x + 1.0, b2 = e2 * xy(ctx, u, e2).x + 1.0;
    EXPECT_LT(std::abs(b1), 1e-3);
    EXPECT_LT(std::abs(b2), std::abs(b1) / 5.0);
  }
}

TEST(Kernel, PoleGuardOnEitherLattice) {
  Context ctx(I);
  EXPECT_THROW(xy(ctx, cd(0), cd(0.3, 0.1)), PoleError);
  EXPECT_THROW(xy(ctx, cd(0.2, 0.1), I), PoleError);
  // the half kernel sees u on the lattice (1/2, τ)
  EXPECT_THROW(xy(ctx, cd(0.5, 0), cd(0.3, 0.1), KernelVariant::Half), PoleError);
  EXPECT_NO_THROW(xy(ctx, cd(0.5, 0), cd(0.3, 0.1), KernelVariant::Double));
}

TEST(Heat, AllVariantsSatisfyHeatEquation) {
  const cd tau(0.3, 0.8);
  Context ctx(tau);
  std::mt19937_64 rng(47);
  for (auto v : {KernelVariant::Plain, KernelVariant::Half, KernelVariant::Double}) {
    for (int k = 0; k < 50; ++k) {
      const auto [u, z] = oracle::generic_pair(rng, tau, 0.12);
      const auto t = heat_terms(ctx, v, u, z, 1e-5);
      EXPECT_LT(std::abs(t.residual()), 1e-7) << u << " " << z;
      EXPECT_GT(std::abs(t.tau_term - t.mixed_term), 1e-3);
    }
  }
}

TEST(Heat, RejectsBadStep) {
  Context ctx(I);
  EXPECT_THROW(heat_residual(ctx, KernelVariant::Plain, cd(0.1), cd(0.2), 0.0),
               std::invalid_argument);
}

TEST(Context, LongDoubleAgreesWithDouble) {
  using cl = std::complex<long double>;
  EllipticContext<long double> lctx(cl(0.3L, 0.8L));
  Context ctx(cd(0.3, 0.8));
  const cl u(0.17L, -0.22L), z(-0.09L, 0.31L);
  const auto a = xy(lctx, u, z);
  const auto b = xy(ctx, cd(0.17, -0.22), cd(-0.09, 0.31));
  EXPECT_LT(std::abs(cd(double(a.x.real()), double(a.x.imag())) - b.x), 1e-12);
}
