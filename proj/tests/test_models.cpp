#include <gtest/gtest.h>

#include <random>

#include "ellcm/models.hpp"
#include "oracles.hpp"

using namespace ellcm;
using oracle::I;

namespace {

const cd kTau1{0.0, 1.0};
const cd kTau2{0.3, 0.8};

std::vector<ModelSpec> families() {
  return {ModelSpec::a_vector(3, 0.7),
          ModelSpec::simply_laced(build_root_system(Family::A, 2), 0.6),
          ModelSpec::bc_short(2, 0.5, 0.8, 0.4),
          ModelSpec::twisted_bc(2, 0.5, 0.7, 0.3, 0.45, 0.25),
          ModelSpec::spin_sl(3),
          ModelSpec::spin_simply_laced(build_root_system(Family::A, 2))};
}

double spread(const std::vector<cd>& v) {
  double d = 0;
  for (const auto& a : v)
    for (const auto& b : v) d = std::max(d, std::abs(a - b));
  return d;
}

}  // namespace

TEST(Renormalize, Examples) {
  Couplings c{};
  c.g_s = 1;
  c.g_l = 2;
  EXPECT_NEAR(std::abs(renormalize(ModelKind::BCShort, c).gs_sq - 2.0), 0, 1e-15);

  Couplings t{};
  t.g_s1 = 0.7;
  t.g_l1 = 1.3;
  const auto e = renormalize(ModelKind::TwistedBC, t);
  EXPECT_EQ(e.gl2_sq, 0.0);
  EXPECT_EQ(e.gs2_sq, 0.0);
  EXPECT_NEAR(std::abs(e.gs1_sq - (0.49 + 0.7 * 1.3 / 2)), 0, 1e-15);

  const auto z = renormalize(ModelKind::TwistedBC, Couplings{});
  EXPECT_EQ(z.gl2_sq, 0.0);
  EXPECT_EQ(z.gs1_sq, 0.0);
}

TEST(Inozemtsev, MapExamples) {
  Couplings c{};
  c.g_l1 = 2.0 * std::sqrt(2.0);
  EXPECT_NEAR(std::abs(inozemtsev_map(c)[2] - 1.0), 0, 1e-14);
  for (const auto& g : inozemtsev_map(Couplings{})) EXPECT_EQ(g, 0.0);
}

TEST(Inozemtsev, HamiltonianDifferenceIsQIndependent) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int l : {1, 2}) {
    for (cd tau : {kTau1, kTau2}) {
      const Context ctx(tau);
      const auto m = ModelSpec::twisted_bc(l, u(rng), u(rng), u(rng), u(rng), u(rng));
      const auto g = inozemtsev_map(m.couplings());
      const auto om = ctx.half_periods();
      std::vector<cd> diffs;
      for (int k = 0; k < 4; ++k) {
        const auto s = random_state(m, rng, tau);
        cd hi = 0.5 * (s.p.array() * s.p.array()).sum();
        for (int j = 0; j < l; ++j) {
          for (int a = 0; a < 4; ++a) hi += g[a] * wp(ctx, s.q[j] + om[a]);
          for (int i = 0; i < l; ++i)
            if (i != j)
              hi += m.couplings().g_m * m.couplings().g_m *
                    (wp(ctx, s.q[j] - s.q[i]) + wp(ctx, s.q[j] + s.q[i])) / 2.0;
        }
        diffs.push_back(hamiltonian(m, s, ctx) - hi);
      }
      EXPECT_LT(spread(diffs), 1e-9) << "l=" << l;
    }
  }
}

TEST(Hamiltonian, FreeLimitAndTwoParticles) {
  const Context ctx(kTau2);
  std::mt19937_64 rng(3);
  const auto free = ModelSpec::twisted_bc(2, 0, 0, 0, 0, 0);
  const auto s = random_state(free, rng, kTau2);
  EXPECT_NEAR(std::abs(hamiltonian(free, s, ctx) - 0.5 * (s.p.array().square()).sum()), 0, 1e-15);

  const auto m = ModelSpec::a_vector(2, 0.8);
  const auto t = random_state(m, rng, kTau2);
  const cd expect = 0.5 * (t.p[0] * t.p[0] + t.p[1] * t.p[1]) + 0.64 * wp(ctx, t.q[0] - t.q[1]);
  EXPECT_NEAR(std::abs(hamiltonian(m, t, ctx) - expect), 0, 1e-12);
}

TEST(Eom, FreeLimit) {
  const Context ctx(kTau1);
  std::mt19937_64 rng(4);
  const auto m = ModelSpec::a_vector(3, 0);
  const auto s = random_state(m, rng, kTau1);
  const auto d = eom(m, s, ctx, FlowMode::Isospectral);
  EXPECT_EQ((d.q - s.p).norm(), 0.0);
  EXPECT_EQ(d.p.norm(), 0.0);
}

TEST(Eom, MatchesGradientOfHamiltonian) {
  std::mt19937_64 rng(5);
  for (const auto& m : families()) {
    const Context ctx(kTau2);
    const auto s = random_state(m, rng, kTau2);
    const auto d = eom(m, s, ctx, FlowMode::Isospectral);
    const double h = 1e-5;
    for (int j = 0; j < m.dimension(); ++j) {
      auto at = [&](double k) {
        auto t = s;
        t.q[j] += k * h;
        return hamiltonian(m, t, ctx);
      };
      const cd grad = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
      EXPECT_NEAR(std::abs(d.p[j] + grad), 0, 1e-7) << kind_name(m.kind()) << " j=" << j;
    }
    const auto dm = eom(m, s, ctx, FlowMode::Isomonodromic);
    EXPECT_NEAR((dm.pack() * (2.0 * oracle::pi * I) - d.pack()).norm(), 0, 1e-12);
  }
}

TEST(Eom, SpinDiagonalStaysZero) {
  const Context ctx(kTau1);
  std::mt19937_64 rng(6);
  const auto m = ModelSpec::spin_sl(4);
  const auto s = random_state(m, rng, kTau1);
  const auto d = eom(m, s, ctx, FlowMode::Isospectral);
  EXPECT_EQ(d.F.diagonal().norm(), 0.0);
}

TEST(Lax, ZeroCouplingIsFree) {
  const Context ctx(kTau2);
  std::mt19937_64 rng(7);
  for (const auto& m : {ModelSpec::a_vector(3, 0), ModelSpec::simply_laced(build_root_system(Family::D, 4), 0),
                        ModelSpec::twisted_bc(2, 0, 0, 0, 0, 0)}) {
    const auto s = random_state(m, rng, kTau2);
    const auto lm = build_lax(m, s, 0.3 + 0.2 * kTau2, ctx);
    EXPECT_EQ((lm.L - p_diagonal(m, s)).norm(), 0.0);
    EXPECT_EQ(lm.M.norm(), 0.0);
    EXPECT_LT(lax_residual(m, s, 0.3 + 0.2 * kTau2, ctx, FlowMode::Isospectral), 1e-12);
    const auto tr = lax_translation_residual(m, s, 0.3 + 0.2 * kTau2, ctx);
    EXPECT_EQ(tr.r_alpha, 0.0);
    EXPECT_LT(tr.r_beta_L, 1e-14);
  }
}

TEST(Lax, Dimensions) {
  EXPECT_EQ(ModelSpec::a_vector(3, 1).lax_dimension(), 3);
  EXPECT_EQ(ModelSpec::simply_laced(build_root_system(Family::D, 4), 1).lax_dimension(), 24);
  EXPECT_EQ(ModelSpec::bc_short(3, 1, 1, 1).lax_dimension(), 6);
  EXPECT_EQ(ModelSpec::spin_simply_laced(build_root_system(Family::A, 3)).lax_dimension(), 4);
}

TEST(Lax, TraceSquareMinusHamiltonianIsStateIndependent) {
  std::mt19937_64 rng(8);
  for (const auto& m : families()) {
    if (m.is_spin()) continue;
    const Context ctx(kTau2);
    const cd z = random_z(rng, kTau2, 0.1);
    std::vector<cd> diffs;
    for (int k = 0; k < 5; ++k) {
      const auto s = random_state(m, rng, kTau2);
      const auto lm = build_lax(m, s, z, ctx);
      // Tr L² = c (p·p + potential); c is read off from the momentum part.
      const cd pp = (s.p.array() * s.p.array()).sum();
      const cd pl = (p_diagonal(m, s).diagonal().array().square()).sum();
      diffs.push_back((lm.L * lm.L).trace() * (pp / pl) / 2.0 - hamiltonian(m, s, ctx));
    }
    EXPECT_LT(spread(diffs), 1e-8) << kind_name(m.kind());
  }
}

TEST(Lax, TwistedWithoutSecondCouplingsEqualsBC) {
  std::mt19937_64 rng(9);
  const Context ctx(kTau2);
  const auto a = ModelSpec::twisted_bc(3, 0.4, 0.9, 0, 0.6, 0);
  const auto b = ModelSpec::bc_short(3, 0.4, 0.9, 0.6);
  const auto s = random_state(a, rng, kTau2);
  const cd z = random_z(rng, kTau2);
  const auto la = build_lax(a, s, z, ctx), lb = build_lax(b, s, z, ctx);
  EXPECT_EQ((la.L - lb.L).norm(), 0.0);
  EXPECT_EQ((la.M - lb.M).norm(), 0.0);
  EXPECT_NEAR(std::abs(hamiltonian(a, s, ctx) - hamiltonian(b, s, ctx)), 0, 1e-12);
}

TEST(Lax, DiagonalOfMIsEvenInBeta) {
  std::mt19937_64 rng(10);
  const Context ctx(kTau1);
  const auto m = ModelSpec::twisted_bc(3, 0.4, 0.9, 0.3, 0.6, 0.2);
  const auto s = random_state(m, rng, kTau1);
  const auto lm = build_lax(m, s, random_z(rng, kTau1), ctx);
  const auto& w = m.index_weights();
  for (std::size_t b = 0; b < w.size(); ++b)
    for (std::size_t c = 0; c < w.size(); ++c)
      if ((w[b] + w[c]).norm() == 0)
        EXPECT_NEAR(std::abs(lm.M(b, b) - lm.M(c, c)), 0, 1e-12);
}

TEST(Lax, ResidualsAllFamilies) {
  std::mt19937_64 rng(12);
  for (const auto& m : families()) {
    for (cd tau : {kTau1, kTau2}) {
      const Context ctx(tau);
      for (int k = 0; k < 3; ++k) {
        const auto s = random_state(m, rng, tau);
        const cd z = random_z(rng, tau);
        for (auto mode : {FlowMode::Isospectral, FlowMode::Isomonodromic}) {
          EXPECT_LT(lax_residual(m, s, z, ctx, mode), 1e-6) << kind_name(m.kind()) << " " << mode_name(mode);
          EXPECT_GT(lax_residual_flipped(m, s, z, ctx, mode), 1e-3) << kind_name(m.kind());
        }
        EXPECT_LT(lax_translation_residual(m, s, z, ctx).max(), 1e-10) << kind_name(m.kind());
      }
    }
  }
}

TEST(Lax, HigherRankRootSystems) {
  std::mt19937_64 rng(13);
  const Context ctx(kTau2);
  for (const auto& m : {ModelSpec::simply_laced(build_root_system(Family::D, 4), 0.5),
                        ModelSpec::simply_laced(build_root_system(Family::A, 3), 0.5),
                        ModelSpec::twisted_bc(3, 0.5, 0.6, 0.2, 0.4, 0.3),
                        ModelSpec::twisted_bc(1, 0, 0.6, 0.2, 0.4, 0.3)}) {
    const auto s = random_state(m, rng, kTau2);
    const cd z = random_z(rng, kTau2);
    EXPECT_LT(lax_residual(m, s, z, ctx, FlowMode::Isospectral), 1e-6) << m.lax_dimension();
    EXPECT_LT(lax_residual(m, s, z, ctx, FlowMode::Isomonodromic), 1e-6) << m.lax_dimension();
  }
}

TEST(Lax, SpectrumIsWeylInvariant) {
  std::mt19937_64 rng(14);
  const Context ctx(kTau2);
  for (const auto& m : {ModelSpec::simply_laced(build_root_system(Family::A, 2), 0.5),
                        ModelSpec::twisted_bc(2, 0.5, 0.6, 0.2, 0.4, 0.3)}) {
    const auto s = random_state(m, rng, kTau2);
    const cd z = random_z(rng, kTau2);
    const auto ev = build_lax(m, s, z, ctx).L.eigenvalues();
    for (const auto& alpha : m.root_system()->roots()) {
      const Eigen::VectorXd a = to_vector(alpha);
      auto refl = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        const cd c = 2.0 * (a.cast<cd>().array() * v.array()).sum() / a.squaredNorm();
        return v - c * a.cast<cd>();
      };
      auto t = s;
      t.q = refl(s.q);
      t.p = refl(s.p);
      const auto ew = build_lax(m, t, z, ctx).L.eigenvalues();
      std::vector<bool> used(ew.size(), false);
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double best = 1e300;
        Eigen::Index bj = 0;
        for (Eigen::Index j = 0; j < ew.size(); ++j)
          if (!used[j] && std::abs(ev[i] - ew[j]) < best) best = std::abs(ev[i] - ew[j]), bj = j;
        used[bj] = true;
        EXPECT_LT(best, 1e-8);
      }
    }
  }
}

TEST(Spin, MinimalOrbit) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(3), b = Eigen::VectorXcd::Zero(3);
  EXPECT_EQ(spin_minimal_orbit(a, b, 1.0).norm(), 0.0);
  a << 0.3, cd(0.2, 0.1), -0.5;
  b << 1.1, -0.4, cd(0.7, 0.2);
  const cd g = 0.8;
  Eigen::MatrixXcd F = spin_minimal_orbit(a, b, g);
  EXPECT_EQ(F.diagonal().norm(), 0.0);
  F.diagonal() = I * g * (b.array() * a.array()).matrix();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F);
  EXPECT_LT(svd.singularValues()[1], 1e-12 * svd.singularValues()[0]);
}

TEST(Spin, MinimalOrbitReproducesSpinlessHamiltonian) {
  // with b_j a_j = 1 the pair products become -g² for every j ≠ k
  std::mt19937_64 rng(15);
  const Context ctx(kTau2);
  Eigen::VectorXcd a(3), b(3);
  a << 0.5, cd(1.2, 0.3), -0.8;
  b = a.cwiseInverse();
  const cd g = 0.7;
  const auto spin = ModelSpec::spin_sl(3);
  const auto plain = ModelSpec::a_vector(3, g);
  auto s = random_state(spin, rng, kTau2);
  s.F = spin_minimal_orbit(a, b, g);
  PhaseState t{s.q, s.p, {}, {}};
  EXPECT_NEAR(std::abs(hamiltonian(spin, s, ctx) - hamiltonian(plain, t, ctx)), 0, 1e-12);
}

TEST(Spin, SimplyLacedMatchesSlRealization) {
  std::mt19937_64 rng(16);
  const Context ctx(kTau1);
  const auto rs = build_root_system(Family::A, 3);
  const auto m = ModelSpec::spin_simply_laced(rs);
  const auto sl = ModelSpec::spin_sl(4);
  const auto s = random_state(m, rng, kTau1);
  PhaseState t{s.q, s.p, Eigen::MatrixXcd::Zero(4, 4), {}};
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const auto [j, k] = m.root_position(a);
    t.F(j, k) = double(m.root_sign(a)) * s.F(a, 0);
  }
  EXPECT_NEAR(std::abs(hamiltonian(m, s, ctx) - hamiltonian(sl, t, ctx)), 0, 1e-12);
  const cd z = random_z(rng, kTau1);
  EXPECT_LT((build_lax(m, s, z, ctx).L - build_lax(sl, t, z, ctx).L).norm(), 1e-12);
}

TEST(State, Validation) {
  const auto m = ModelSpec::spin_sl(3);
  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(3);
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(3, 3);
  F(1, 1) = 0.1;
  EXPECT_THROW(make_state(m, q, q, F), std::invalid_argument);
  EXPECT_THROW(make_state(m, q, Eigen::VectorXcd::Zero(2), Eigen::MatrixXcd::Zero(3, 3)),
               std::invalid_argument);
  EXPECT_THROW(make_state(ModelSpec::a_vector(3, 1), q, q, F), std::invalid_argument);
  std::mt19937_64 rng(1);
  const auto s = random_state(m, rng, kTau1);
  const auto r = PhaseState::unpack(m, s.pack());
  EXPECT_EQ((r.F - s.F).norm(), 0.0);
}

TEST(Model, SingularPoints) {
  EXPECT_EQ(ModelSpec::a_vector(2, 1).singular_points(kTau1).size(), 1u);
  EXPECT_EQ(ModelSpec::bc_short(2, 1, 1, 1).singular_points(kTau1).size(), 4u);
  EXPECT_THROW(ModelSpec::spin_simply_laced(build_root_system(Family::D, 4)), std::invalid_argument);
}
