#include "ellcm/monodromy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ellcm/spectrum.hpp"

namespace ellcm {

namespace {

constexpr cd I{0.0, 1.0};
constexpr double pi = std::numbers::pi;

// Gauss–Legendre nodes and weights on [-1, 1] by Golub–Welsch.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const Eigen::VectorXd w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w};
}

// Fold z into the cell {a + bτ : a, b ∈ [-h, 1-h)}.
cd reduce(cd z, cd tau, double h) {
  const double b = z.imag() / tau.imag();
  const double nb = std::floor(b + h);
  z -= nb * tau;
  return z - std::floor(z.real() + h);
}

}  // namespace

std::vector<cd> singular_lattice(const ModelSpec& model, cd tau, int reach) {
  std::vector<cd> out;
  for (const cd w : model.singular_points(tau))
    for (int m = -reach; m <= reach; ++m)
      for (int n = -reach; n <= reach; ++n) out.push_back(w + double(m) + double(n) * tau);
  return out;
}

PathSpec detour_line(cd a, cd b, const std::vector<cd>& singular, double clearance) {
  const cd d = b - a;
  const double len = std::abs(d);
  const cd dir = d / len;
  std::vector<double> hits;
  for (const cd p : singular) {
    const cd rel = (p - a) / dir;  // along-track in real part, left offset in imag
    if (rel.real() > 0 && rel.real() < len && std::abs(rel.imag()) < clearance)
      hits.push_back(rel.real());
  }
  std::sort(hits.begin(), hits.end());
  const double r = 2 * clearance;
  const double th = std::arg(dir);
  PathSpec path;
  cd cur = a;
  for (double t : hits) {
    const cd c = a + t * dir;
    path.append(PathSpec::line(cur, c - r * dir));
    path.append(PathSpec::arc(c, r, th + pi, th));  // passes c + r·i·dir on the left
    cur = c + r * dir;
  }
  path.append(PathSpec::line(cur, b));
  return path;
}

namespace {

struct Transported {
  Eigen::MatrixXcd Y;
  double liouville;
};

Transported transport_checked(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                              const PathSpec& path, const OdeConfig& ode_cfg) {
  const Eigen::Index n = model.lax_dimension();
  auto rhs = [&](double t, const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    const Eigen::MatrixXcd L = build_lax(model, s, path.at(t), ctx).L;
    const Eigen::MatrixXcd dY = L * y.reshaped(n, n) * path.tangent(t);
    return dY.reshaped();
  };
  Dopri5<cd> ode(ode_cfg);
  const Eigen::VectorXcd y0 = Eigen::MatrixXcd::Identity(n, n).reshaped();
  const Eigen::VectorXcd y =
      ode.integrate(rhs, y0, path.breakpoints(), [](double, const Eigen::VectorXcd&) {});
  Eigen::MatrixXcd Y = y.reshaped(n, n);
  const cd trP = p_diagonal(model, s).trace();
  const cd expect = std::exp(trP * (path.end() - path.start()));
  return {Y, std::abs(Y.determinant() / expect - 1.0)};
}

}  // namespace

Eigen::MatrixXcd transport(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                           const PathSpec& path, const OdeConfig& ode) {
  return transport_checked(model, s, ctx, path, ode).Y;
}

MonodromyData monodromy_data(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                             const MonodromyConfig& cfg) {
  const cd tau = ctx.tau();
  const cd z0 = cfg.base_a + cfg.base_b * tau;
  const auto sing = singular_lattice(model, tau);
  MonodromyData d{tau, z0, {}, {}, {}, {}, 0.0};
  auto run = [&](const PathSpec& p) {
    auto t = transport_checked(model, s, ctx, p, cfg.ode);
    d.liouville_residual = std::max(d.liouville_residual, t.liouville);
    return t.Y;
  };
  d.gamma_alpha = run(detour_line(z0, z0 + 1.0, sing, cfg.clearance));
  const Eigen::VectorXcd q = q_diagonal(model, s).diagonal();
  const Eigen::MatrixXcd Einv = (-2.0 * pi * I * q).array().exp().matrix().asDiagonal();
  d.gamma_beta = Einv * run(detour_line(z0, z0 + tau, sing, cfg.clearance));
  for (const cd w : model.singular_points(tau)) {
    const cd u = (z0 - w) / std::abs(z0 - w);
    const cd near = w + cfg.loop_radius * u;
    const PathSpec leg = detour_line(z0, near, sing, cfg.clearance);
    PathSpec loop = leg;
    loop.append(PathSpec::arc(w, cfg.loop_radius, std::arg(u), std::arg(u) + 2 * pi));
    loop.append(leg.reversed());
    d.points.push_back(w);
    d.gamma_local.push_back(run(loop));
  }
  return d;
}

MonodromyInvariants invariants(const MonodromyData& d) {
  MonodromyInvariants inv;
  auto add = [&](const std::string& label, const Eigen::MatrixXcd& G) {
    inv.labels.push_back(label);
    inv.eigenvalues.push_back(G.eigenvalues());
    inv.traces.push_back(G.trace());
  };
  add("alpha", d.gamma_alpha);
  add("beta", d.gamma_beta);
  add("alpha_beta", d.gamma_alpha * d.gamma_beta);
  for (std::size_t i = 0; i < d.gamma_local.size(); ++i)
    add("local_" + std::to_string(i), d.gamma_local[i]);
  return inv;
}

double invariant_distance(const MonodromyInvariants& a, const MonodromyInvariants& b) {
  if (a.labels != b.labels) throw std::invalid_argument("invariant sets do not match");
  double m = 0;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    m = std::max(m, spectrum_distance(a.eigenvalues[i], b.eigenvalues[i]));
    m = std::max(m, std::abs(a.traces[i] - b.traces[i]));
  }
  return m;
}

DriftReport isomonodromy_drift(const ModelSpec& model, const PhaseState& start,
                               const PathSpec& tau_path, int n_samples,
                               const MonodromyConfig& cfg, bool control, const OdeConfig& flow) {
  IntegrateConfig icfg;
  icfg.ode = flow;
  icfg.n_samples = n_samples;
  if (control) icfg.field_scale = 2.0 * pi * I;
  const auto traj = integrate(model, start, tau_path, FlowMode::Isomonodromic, icfg);
  DriftReport r;
  for (const auto& smp : traj.samples) {
    const Context ctx(smp.tau);
    auto inv = invariants(monodromy_data(model, smp.state, ctx, cfg));
    r.taus.push_back(smp.tau);
    if (r.drift.empty()) r.initial = inv;
    const double d = invariant_distance(r.initial, inv);
    r.drift.push_back(d);
    r.max_drift = std::max(r.max_drift, d);
    r.final = std::move(inv);
  }
  return r;
}

std::vector<CensusPoint> singularity_census(const ModelSpec& model, const PhaseState& s,
                                            const Context& ctx, int n, double threshold) {
  const cd tau = ctx.tau();
  const auto [x, w] = gauss_legendre(24);
  const double h = 0.5 / n;
  const cd e1 = 2.0 * h, e2 = 2.0 * h * tau;
  std::vector<CensusPoint> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cd c = double(i) / n + double(j) / n * tau;
      const cd corner = c - 0.5 * (e1 + e2);
      const std::array<cd, 4> from{corner, corner + e1, corner + e1 + e2, corner + e2};
      const std::array<cd, 4> step{e1, e2, -e1, -e2};
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(model.lax_dimension(), model.lax_dimension());
      for (int k = 0; k < 4; ++k)
        for (Eigen::Index g = 0; g < x.size(); ++g) {
          const cd z = from[k] + 0.5 * (x[g] + 1.0) * step[k];
          acc += (0.5 * w[g]) * step[k] * build_lax(model, s, z, ctx).L;
        }
      const double res = (acc / (2.0 * pi * I)).cwiseAbs().maxCoeff();
      if (res > threshold) out.push_back({reduce(c, tau, h), res});
    }
  return out;
}

}  // namespace ellcm
