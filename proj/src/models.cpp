#include "ellcm/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace ellcm {

namespace {

constexpr cd I{0.0, 1.0};
constexpr double pi = std::numbers::pi;

Eigen::VectorXd unit(int n, int j) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[j] = 1.0;
  return e;
}

cd dotq(const Eigen::VectorXd& w, const Eigen::VectorXcd& q) {
  return (w.cast<cd>().array() * q.array()).sum();
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// sl(ℓ) matrix units: [E_jk, E_lm] = δ_kl E_jm - δ_mj E_lk
int matrix_unit_n(std::pair<int, int> a, std::pair<int, int> b) {
  const auto [j, k] = a;
  const auto [l, m] = b;
  if (k == l && j != m) return 1;
  if (m == j && l != k) return -1;
  return 0;
}

}  // namespace

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::AVector: return "a-vector";
    case ModelKind::SimplyLaced: return "simply-laced";
    case ModelKind::BCShort: return "bc";
    case ModelKind::TwistedBC: return "twisted-bc";
    case ModelKind::SpinSL: return "spin-sl";
    case ModelKind::SpinSimplyLaced: return "spin-simply-laced";
  }
  return "?";
}

std::optional<ModelKind> parse_kind(const std::string& s) {
  for (auto k : {ModelKind::AVector, ModelKind::SimplyLaced, ModelKind::BCShort,
                 ModelKind::TwistedBC, ModelKind::SpinSL, ModelKind::SpinSimplyLaced})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

std::string mode_name(FlowMode m) {
  return m == FlowMode::Isospectral ? "isospectral" : "isomonodromic";
}

std::optional<FlowMode> parse_mode(const std::string& s) {
  if (s == "isospectral") return FlowMode::Isospectral;
  if (s == "isomonodromic") return FlowMode::Isomonodromic;
  return std::nullopt;
}

EffectiveCouplings renormalize(ModelKind kind, const Couplings& c) {
  EffectiveCouplings e{};
  if (kind == ModelKind::BCShort) e.gs_sq = c.g_s * c.g_s + c.g_s * c.g_l / 2.0;
  if (kind == ModelKind::TwistedBC) {
    e.gl2_sq = c.g_l2 * c.g_l2 + 2.0 * c.g_l1 * c.g_l2;
    e.gs1_sq = c.g_s1 * c.g_s1 + 2.0 * c.g_s1 * c.g_s2 +
               0.5 * (c.g_s1 * c.g_l1 + c.g_s1 * c.g_l2 + c.g_s2 * c.g_l2);
    e.gs2_sq = c.g_s2 * c.g_s2 + c.g_s2 * c.g_l1 / 2.0;
  }
  return e;
}

std::array<cd, 4> inozemtsev_map(const Couplings& c) {
  const auto e = renormalize(ModelKind::TwistedBC, c);
  const cd l1 = c.g_l1 * c.g_l1;
  return {(l1 + e.gl2_sq) / 8.0 + 2.0 * (e.gs1_sq + e.gs2_sq), l1 / 8.0 + 2.0 * e.gs2_sq,
          l1 / 8.0, (l1 + e.gl2_sq) / 8.0};
}

bool ModelSpec::root_type() const {
  return kind_ == ModelKind::SimplyLaced || kind_ == ModelKind::BCShort ||
         kind_ == ModelKind::TwistedBC;
}

std::vector<cd> ModelSpec::singular_points(cd tau) const {
  if (!root_type()) return {cd(0)};
  return {cd(0), cd(0.5), 0.5 + tau / 2.0, tau / 2.0};
}

ModelSpec ModelSpec::a_vector(int l, cd g) {
  if (l < 1) throw std::invalid_argument("a-vector needs at least one particle");
  ModelSpec m;
  m.kind_ = ModelKind::AVector;
  m.rank_ = m.dimension_ = l;
  m.bare_.g = g;
  for (int j = 0; j < l; ++j) m.index_weights_.push_back(unit(l, j));
  if (g != 0.0) {
    for (int j = 0; j < l; ++j)
      for (int k = 0; k < l; ++k) {
        if (j == k) continue;
        const Eigen::VectorXd w = unit(l, j) - unit(l, k);
        m.potential_.push_back({w, PeriodScale::Full, g * g / 2.0});
        m.kernel_terms_.push_back({j, k, w, KernelVariant::Plain, 1.0, I * g, I * g});
        m.diagonal_terms_.push_back({j, w, PeriodScale::Full, I * g});
      }
  }
  m.finish();
  return m;
}

ModelSpec ModelSpec::simply_laced(const RootSystem& rs, cd g) {
  if (!rs.simply_laced()) throw std::invalid_argument("simply-laced model needs an ADE system");
  ModelSpec m;
  m.kind_ = ModelKind::SimplyLaced;
  m.rank_ = rs.rank();
  m.dimension_ = rs.dimension();
  m.bare_.g = g;
  m.roots_ = std::make_shared<RootSystem>(rs);
  const auto& roots = rs.roots();
  const auto n = static_cast<Eigen::Index>(roots.size());
  for (const auto& r : roots) m.index_weights_.push_back(to_vector(r));
  if (g != 0.0) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto& beta = roots[b];
      m.potential_.push_back({to_vector(beta), PeriodScale::Full, g * g / 2.0});
      m.diagonal_terms_.push_back({b, to_vector(beta), PeriodScale::Full, I * g});
      for (const auto& gamma : roots)
        if (dot(beta, gamma) == 1)
          m.diagonal_terms_.push_back({b, to_vector(gamma), PeriodScale::Full, I * g});
      for (Eigen::Index c = 0; c < n; ++c) {
        const Root d = beta - roots[c];
        if (rs.contains(d))
          m.kernel_terms_.push_back({b, c, to_vector(d), KernelVariant::Plain, 1.0, I * g, I * g});
        if (d == scaled(beta, 2))
          m.kernel_terms_.push_back(
              {b, c, to_vector(beta), KernelVariant::Plain, 2.0, 2.0 * I * g, I * g});
      }
    }
  }
  m.finish();
  return m;
}

ModelSpec ModelSpec::twisted_bc(int l, cd g_m, cd g_l1, cd g_l2, cd g_s1, cd g_s2) {
  if (l < 1) throw std::invalid_argument("BC model needs rank >= 1");
  ModelSpec m;
  m.kind_ = ModelKind::TwistedBC;
  m.rank_ = m.dimension_ = l;
  m.bare_.g_m = g_m;
  m.bare_.g_l1 = g_l1;
  m.bare_.g_l2 = g_l2;
  m.bare_.g_s1 = g_s1;
  m.bare_.g_s2 = g_s2;
  m.effective_ = renormalize(ModelKind::TwistedBC, m.bare_);
  const auto rs = build_root_system(Family::BC, l);
  m.roots_ = std::make_shared<RootSystem>(rs);
  const auto lo = rs.orbit(Orbit::Long), mi = rs.orbit(Orbit::Middle), sh = rs.orbit(Orbit::Short);
  const auto& e = m.effective_;

  auto add_potential = [&](const std::vector<Root>& orbit, PeriodScale s, cd coef) {
    if (coef == 0.0) return;
    for (const auto& a : orbit) m.potential_.push_back({to_vector(a), s, coef});
  };
  add_potential(mi, PeriodScale::Full, g_m * g_m / 2.0);
  add_potential(lo, PeriodScale::Full, g_l1 * g_l1 / 4.0);
  add_potential(lo, PeriodScale::Double, e.gl2_sq / 4.0);
  add_potential(sh, PeriodScale::Full, e.gs1_sq);
  add_potential(sh, PeriodScale::Half, e.gs2_sq);

  auto kernel = [&](Eigen::Index b, Eigen::Index c, const Root& a, KernelVariant v, double zs,
                    cd lc, cd mc) {
    if (lc == 0.0 && mc == 0.0) return;
    m.kernel_terms_.push_back({b, c, to_vector(a), v, zs, lc, mc});
  };
  auto diag = [&](Eigen::Index b, const Root& a, PeriodScale s, cd coef) {
    if (coef == 0.0) return;
    m.diagonal_terms_.push_back({b, to_vector(a), s, coef});
  };

  const auto n = static_cast<Eigen::Index>(sh.size());
  for (const auto& s : sh) m.index_weights_.push_back(to_vector(s));
  for (Eigen::Index b = 0; b < n; ++b) {
    const auto& beta = sh[b];
    for (const auto& gamma : mi)
      if (dot(beta, gamma) == 1) diag(b, gamma, PeriodScale::Full, I * g_m);
    diag(b, scaled(beta, 2), PeriodScale::Full, I * g_l1);
    diag(b, scaled(beta, 2), PeriodScale::Double, I * g_l2);
    diag(b, beta, PeriodScale::Full, I * g_s1);
    diag(b, beta, PeriodScale::Half, I * g_s2);
    for (Eigen::Index c = 0; c < n; ++c) {
      const Root d = beta - sh[c];
      if (b == c || !rs.contains(d)) continue;
      switch (rs.orbit_of(d)) {
        case Orbit::Middle:
          kernel(b, c, d, KernelVariant::Plain, 1.0, I * g_m, I * g_m);
          break;
        case Orbit::Long:
          kernel(b, c, d, KernelVariant::Plain, 1.0, I * g_l1, I * g_l1);
          kernel(b, c, d, KernelVariant::Double, 1.0, I * g_l2, I * g_l2);
          break;
        default:
          break;
      }
      if (d == scaled(beta, 2)) {
        kernel(b, c, beta, KernelVariant::Plain, 2.0, 2.0 * I * g_s1, I * g_s1);
        kernel(b, c, beta, KernelVariant::Half, 2.0, 2.0 * I * g_s2, I * g_s2);
      }
    }
  }
  m.finish();
  return m;
}

ModelSpec ModelSpec::bc_short(int l, cd g_m, cd g_l, cd g_s) {
  ModelSpec m = twisted_bc(l, g_m, g_l, 0.0, g_s, 0.0);
  m.kind_ = ModelKind::BCShort;
  m.bare_ = Couplings{};
  m.bare_.g_m = g_m;
  m.bare_.g_l = g_l;
  m.bare_.g_s = g_s;
  m.effective_ = renormalize(ModelKind::BCShort, m.bare_);
  return m;
}

ModelSpec ModelSpec::spin_sl(int l) {
  if (l < 1) throw std::invalid_argument("spin-sl needs l >= 1");
  ModelSpec m;
  m.kind_ = ModelKind::SpinSL;
  m.rank_ = m.dimension_ = l;
  for (int j = 0; j < l; ++j) m.index_weights_.push_back(unit(l, j));
  m.finish();
  return m;
}

ModelSpec ModelSpec::spin_simply_laced(const RootSystem& rs) {
  if (rs.family() != Family::A)
    throw std::invalid_argument("spin-simply-laced is realized for type A only");
  ModelSpec m;
  m.kind_ = ModelKind::SpinSimplyLaced;
  m.rank_ = rs.rank();
  m.dimension_ = rs.dimension();
  m.roots_ = std::make_shared<RootSystem>(rs);
  for (int j = 0; j < m.dimension_; ++j) m.index_weights_.push_back(unit(m.dimension_, j));

  const std::size_t n = rs.size();
  const auto eps = structure_constants(rs);
  auto sgn = [&](std::size_t a) { return rs.height(a) > 0 ? 1 : -1; };
  m.spin_n_.assign(n * n, 0);
  m.root_diff_.assign(n * n, -1);
  m.root_neg_.resize(n);
  m.root_pos_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    m.root_neg_[a] = *rs.index_of(-rs[a]);
    int j = -1, k = -1;
    for (int i = 0; i < m.dimension_; ++i) {
      if (rs[a][i] == HalfInteger(1)) j = i;
      if (rs[a][i] == HalfInteger(-1)) k = i;
    }
    m.root_pos_[a] = {j, k};
    for (std::size_t b = 0; b < n; ++b) {
      if (const auto s = rs.index_of(rs[a] + rs[b]))
        m.spin_n_[a * n + b] = sgn(a) * sgn(b) * sgn(*s) * eps(a, b);
      if (const auto d = rs.index_of(rs[a] - rs[b])) m.root_diff_[a * n + b] = static_cast<int>(*d);
    }
  }

  // Basis signs e_α = s_α E_jk with s_α = s_{-α}: fixed on simple roots, then
  // propagated upward in height, then checked on every pair.
  m.root_sign_.assign(n, 0);
  std::vector<std::size_t> order(n);
  for (std::size_t a = 0; a < n; ++a) order[a] = a;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rs.height(a) < rs.height(b); });
  std::vector<std::size_t> simple;
  for (const auto& s : rs.simple_roots()) simple.push_back(*rs.index_of(s));
  for (std::size_t a : order) {
    if (rs.height(a) <= 0) continue;
    if (rs.height(a) == 1) {
      m.root_sign_[a] = 1;
      continue;
    }
    for (std::size_t s : simple) {
      const int d = m.root_diff_[a * n + s];
      if (d < 0 || rs.height(static_cast<std::size_t>(d)) <= 0) continue;
      const auto du = static_cast<std::size_t>(d);
      m.root_sign_[a] = m.root_sign_[du] * m.root_sign_[s] *
                        matrix_unit_n(m.root_pos_[du], m.root_pos_[s]) * m.spin_n_[du * n + s];
      break;
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    if (rs.height(a) < 0) m.root_sign_[a] = m.root_sign_[m.root_neg_[a]];
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const auto s = rs.index_of(rs[a] + rs[b]);
      if (!s) continue;
      if (m.root_sign_[a] * m.root_sign_[b] * matrix_unit_n(m.root_pos_[a], m.root_pos_[b]) !=
          m.root_sign_[*s] * m.spin_n_[a * n + b])
        throw std::logic_error("no symmetric matrix-unit basis for the structure constants");
    }
  m.finish();
  return m;
}

void ModelSpec::finish() {
  if (kind_ != ModelKind::BCShort) effective_ = renormalize(kind_, bare_);
}

Eigen::VectorXcd PhaseState::pack() const {
  Eigen::VectorXcd v(q.size() + p.size() + F.size() + G.size());
  v << q, p, F.reshaped(), G;
  return v;
}

PhaseState PhaseState::unpack(const ModelSpec& model, const Eigen::VectorXcd& v) {
  const Eigen::Index d = model.dimension();
  PhaseState s;
  s.q = v.segment(0, d);
  s.p = v.segment(d, d);
  Eigen::Index off = 2 * d;
  if (model.kind() == ModelKind::SpinSL) {
    const Eigen::Index l = model.rank();
    s.F = v.segment(off, l * l).reshaped(l, l);
    off += l * l;
  } else if (model.kind() == ModelKind::SpinSimplyLaced) {
    const auto n = static_cast<Eigen::Index>(model.root_system()->size());
    s.F = v.segment(off, n).reshaped(n, 1);
    off += n;
    s.G = v.segment(off, d);
    off += d;
  }
  if (off != v.size()) throw std::invalid_argument("packed state has the wrong length");
  return s;
}

PhaseState make_state(const ModelSpec& model, Eigen::VectorXcd q, Eigen::VectorXcd p,
                      Eigen::MatrixXcd F) {
  PhaseState s{std::move(q), std::move(p), std::move(F), {}};
  if (model.kind() == ModelKind::SpinSimplyLaced)
    s.G = Eigen::VectorXcd::Zero(model.dimension());
  validate_state(model, s);
  return s;
}

void validate_state(const ModelSpec& model, const PhaseState& s, double tol) {
  const Eigen::Index d = model.dimension();
  if (s.q.size() != d || s.p.size() != d)
    throw std::invalid_argument("q and p must have length " + std::to_string(d));
  switch (model.kind()) {
    case ModelKind::SpinSL:
      if (s.F.rows() != model.rank() || s.F.cols() != model.rank())
        throw std::invalid_argument("spin matrix F must be l x l");
      break;
    case ModelKind::SpinSimplyLaced:
      if (s.F.rows() != static_cast<Eigen::Index>(model.root_system()->size()) || s.F.cols() != 1)
        throw std::invalid_argument("spin coefficients F must have one entry per root");
      if (s.G.size() != d) throw std::invalid_argument("Cartan components G have the wrong size");
      break;
    default:
      if (s.F.size() != 0 || s.G.size() != 0)
        throw std::invalid_argument("spinless model given spin variables");
  }
  if (spin_constraint_norm(model, s) > tol)
    throw std::invalid_argument("spin constraint violated: diagonal/Cartan part must vanish");
}

double spin_constraint_norm(const ModelSpec& model, const PhaseState& s) {
  if (model.kind() == ModelKind::SpinSL) return s.F.diagonal().cwiseAbs().maxCoeff();
  if (model.kind() == ModelKind::SpinSimplyLaced) return s.G.size() ? s.G.cwiseAbs().maxCoeff() : 0;
  return 0.0;
}

cd hamiltonian(const ModelSpec& model, const PhaseState& s, const Context& ctx) {
  cd h = 0.5 * (s.p.array() * s.p.array()).sum();
  for (const auto& t : model.potential()) h += t.coef * wp(ctx, dotq(t.weight, s.q), t.scale);
  if (model.kind() == ModelKind::SpinSL) {
    const Eigen::Index l = model.rank();
    for (Eigen::Index j = 0; j < l; ++j)
      for (Eigen::Index k = 0; k < l; ++k)
        if (j != k) h -= 0.5 * wp(ctx, s.q[j] - s.q[k]) * s.F(j, k) * s.F(k, j);
  } else if (model.kind() == ModelKind::SpinSimplyLaced) {
    const auto& rs = *model.root_system();
    for (std::size_t a = 0; a < rs.size(); ++a)
      h -= 0.5 * wp(ctx, dotq(to_vector(rs[a]), s.q)) * s.F(model.negative_root(a), 0) *
           s.F(a, 0);
  }
  return h;
}

PhaseState eom(const ModelSpec& model, const PhaseState& s, const Context& ctx, FlowMode mode) {
  PhaseState d;
  d.q = s.p;
  d.p = Eigen::VectorXcd::Zero(s.p.size());
  d.F = Eigen::MatrixXcd::Zero(s.F.rows(), s.F.cols());
  d.G = Eigen::VectorXcd::Zero(s.G.size());
  for (const auto& t : model.potential())
    d.p -= t.coef * wp(ctx, dotq(t.weight, s.q), t.scale, 1) * t.weight.cast<cd>();

  if (model.kind() == ModelKind::SpinSL) {
    const Eigen::Index l = model.rank();
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(l, l);
    for (Eigen::Index j = 0; j < l; ++j)
      for (Eigen::Index k = 0; k < l; ++k)
        if (j != k) {
          W(j, k) = wp(ctx, s.q[j] - s.q[k]);
          d.p[j] += wp(ctx, s.q[j] - s.q[k], PeriodScale::Full, 1) * s.F(j, k) * s.F(k, j);
        }
    for (Eigen::Index j = 0; j < l; ++j)
      for (Eigen::Index k = 0; k < l; ++k) {
        if (j == k) continue;
        for (Eigen::Index m = 0; m < l; ++m)
          if (m != j && m != k) d.F(j, k) += (W(j, m) - W(m, k)) * s.F(j, m) * s.F(m, k);
      }
  } else if (model.kind() == ModelKind::SpinSimplyLaced) {
    const auto& rs = *model.root_system();
    const std::size_t n = rs.size();
    std::vector<cd> w(n);
    for (std::size_t a = 0; a < n; ++a) {
      const Eigen::VectorXd alpha = to_vector(rs[a]);
      const cd u = dotq(alpha, s.q);
      w[a] = wp(ctx, u);
      d.p += 0.5 * wp(ctx, u, PeriodScale::Full, 1) * s.F(model.negative_root(a), 0) * s.F(a, 0) *
             alpha.cast<cd>();
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const int c = model.root_difference(a, b);
        if (c < 0) continue;
        d.F(a, 0) -= w[b] * double(model.spin_n(a, model.negative_root(b))) *
                     s.F(static_cast<Eigen::Index>(c), 0) * s.F(b, 0);
      }
  }
  if (mode == FlowMode::Isomonodromic) {
    const cd k = 1.0 / (2.0 * pi * I);
    d.q *= k;
    d.p *= k;
    d.F *= k;
    d.G *= k;
  }
  return d;
}

Eigen::MatrixXcd q_diagonal(const ModelSpec& model, const PhaseState& s) {
  Eigen::VectorXcd d(model.lax_dimension());
  for (Eigen::Index b = 0; b < d.size(); ++b) d[b] = dotq(model.index_weights()[b], s.q);
  return d.asDiagonal();
}

Eigen::MatrixXcd p_diagonal(const ModelSpec& model, const PhaseState& s) {
  Eigen::VectorXcd d(model.lax_dimension());
  for (Eigen::Index b = 0; b < d.size(); ++b) d[b] = dotq(model.index_weights()[b], s.p);
  return d.asDiagonal();
}

LaxSample build_lax(const ModelSpec& model, const PhaseState& s, cd z, const Context& ctx) {
  const Eigen::Index n = model.lax_dimension();
  LaxSample out{p_diagonal(model, s), Eigen::MatrixXcd::Zero(n, n), z, ctx.tau(), n};
  auto& L = out.L;
  auto& M = out.M;
  for (const auto& t : model.diagonal_terms())
    M(t.row, t.row) += t.coef * wp(ctx, dotq(t.weight, s.q), t.scale);
  for (const auto& t : model.kernel_terms()) {
    const auto k = xy(ctx, dotq(t.weight, s.q), t.z_scale * z, t.variant);
    L(t.row, t.col) += t.l_coef * k.x;
    M(t.row, t.col) += t.m_coef * k.y;
  }
  if (model.kind() == ModelKind::SpinSL) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        if (j == k || s.F(k, j) == 0.0) continue;
        const auto kv = xy(ctx, s.q[j] - s.q[k], z);
        L(j, k) -= kv.x * s.F(k, j);
        M(j, k) -= kv.y * s.F(k, j);
      }
  } else if (model.kind() == ModelKind::SpinSimplyLaced) {
    const auto& rs = *model.root_system();
    for (std::size_t a = 0; a < rs.size(); ++a) {
      const cd f = double(model.root_sign(a)) * s.F(model.negative_root(a), 0);
      if (f == 0.0) continue;
      const auto [j, k] = model.root_position(a);
      const auto kv = xy(ctx, dotq(to_vector(rs[a]), s.q), z);
      L(j, k) -= kv.x * f;
      M(j, k) -= kv.y * f;
    }
  }
  return out;
}

namespace {

PhaseState shifted(const PhaseState& s, cd t, const PhaseState& v) {
  PhaseState r = s;
  r.q += t * v.q;
  r.p += t * v.p;
  r.F += t * v.F;
  r.G += t * v.G;
  return r;
}

// f'(0) from the trapezoidal rule for Cauchy's integral on |t| = r; f is
// holomorphic, so the error falls like (r/R)^n for the nearest singularity at R.
template <typename F>
Eigen::MatrixXcd contour_derivative(F&& f, double r, int n) {
  Eigen::MatrixXcd acc;
  for (int k = 0; k < n; ++k) {
    const cd w = std::polar(1.0, 2.0 * pi * k / n);
    if (k == 0) acc = f(r * w);
    else acc += f(r * w) / w;
  }
  return acc / (n * r);
}

// Largest |w|₁ over the weights that enter the Lax matrices.
double weight_reach(const ModelSpec& model) {
  double m = model.is_spin() ? 2.0 : 1.0;
  for (const auto& t : model.kernel_terms()) m = std::max(m, t.weight.lpNorm<1>());
  for (const auto& t : model.diagonal_terms()) m = std::max(m, t.weight.lpNorm<1>());
  return m;
}

double residual_impl(const ModelSpec& model, const PhaseState& s, cd z, const Context& ctx,
                     FlowMode mode, const ResidualConfig& cfg, double sign) {
  const auto lm = build_lax(model, s, z, ctx);
  const PhaseState v = eom(model, s, ctx, FlowMode::Isospectral);
  const double reach = weight_reach(model) * std::max(1.0, v.pack().cwiseAbs().maxCoeff());
  const double r = cfg.radius / reach;
  Eigen::MatrixXcd R = contour_derivative(
      [&](cd t) { return build_lax(model, shifted(s, t, v), z, ctx).L; }, r, cfg.nodes);
  R -= sign * (lm.L * lm.M - lm.M * lm.L);
  if (mode == FlowMode::Isomonodromic) {
    const Eigen::MatrixXcd dtau = contour_derivative(
        [&](cd t) { return build_lax(model, s, z, ctx.with_tau(ctx.tau() + t)).L; }, cfg.radius,
        cfg.nodes);
    const Eigen::MatrixXcd dz = contour_derivative(
        [&](cd t) { return build_lax(model, s, z + t, ctx).M; }, cfg.radius, cfg.nodes);
    R += 2.0 * pi * I * dtau + dz;
  }
  return max_abs(R);
}

}  // namespace

double lax_residual(const ModelSpec& model, const PhaseState& s, cd z, const Context& ctx,
                    FlowMode mode, const ResidualConfig& cfg) {
  return residual_impl(model, s, z, ctx, mode, cfg, 1.0);
}

double lax_residual_flipped(const ModelSpec& model, const PhaseState& s, cd z,
                            const Context& ctx, FlowMode mode, const ResidualConfig& cfg) {
  return residual_impl(model, s, z, ctx, mode, cfg, -1.0);
}

TranslationResidual lax_translation_residual(const ModelSpec& model, const PhaseState& s, cd z,
                                             const Context& ctx) {
  const cd tau = ctx.tau();
  const auto a = build_lax(model, s, z, ctx);
  const auto b = build_lax(model, s, z + 1.0, ctx);
  const auto c = build_lax(model, s, z + tau, ctx);
  const Eigen::VectorXcd qd = q_diagonal(model, s).diagonal();
  const Eigen::Index n = qd.size();
  Eigen::MatrixXcd phase(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) phase(j, k) = std::exp(2.0 * pi * I * (qd[j] - qd[k]));
  const Eigen::MatrixXcd P = p_diagonal(model, s);
  return {max_abs(b.L - a.L), max_abs(c.L - phase.cwiseProduct(a.L)),
          max_abs(c.M - phase.cwiseProduct(a.M + 2.0 * pi * I * a.L) + 2.0 * pi * I * P)};
}

double half_lattice_distance(cd w, cd tau) {
  const double n = std::round(2.0 * w.imag() / tau.imag());
  const cd w1 = w - n * tau / 2.0;
  return std::abs(w1 - std::round(2.0 * w1.real()) / 2.0);
}

PhaseState random_state(const ModelSpec& model, std::mt19937_64& rng, cd tau, double margin) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> weights;
  for (const auto& t : model.potential()) weights.push_back(t.weight);
  for (const auto& t : model.kernel_terms()) weights.push_back(t.weight);
  for (const auto& t : model.diagonal_terms()) weights.push_back(t.weight);
  if (model.root_system())
    for (const auto& r : model.root_system()->roots()) weights.push_back(to_vector(r));
  const int d = model.dimension();
  if (model.kind() == ModelKind::SpinSL)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < j; ++k) weights.push_back(unit(d, j) - unit(d, k));
  // q and p are kept in the span of the roots
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(d, d);
  if (model.root_system() && model.rank() < d) {
    const auto& simple = model.root_system()->simple_roots();
    Eigen::MatrixXd S(simple.size(), d);
    for (std::size_t i = 0; i < simple.size(); ++i) S.row(i) = to_vector(simple[i]).transpose();
    proj = (S.transpose() * (S * S.transpose()).inverse() * S).cast<cd>();
  }
  auto draw = [&](double re, double im) {
    const double a = u(rng);
    return cd(re * a, im * u(rng));
  };
  PhaseState s;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    s.q.resize(d);
    for (int j = 0; j < d; ++j) s.q[j] = draw(0.5, 0.1 * tau.imag());
    s.q = proj * s.q;
    bool ok = true;
    for (const auto& w : weights)
      if (half_lattice_distance(dotq(w, s.q), tau) < margin) ok = false;
    if (ok) break;
  }
  s.p.resize(d);
  for (int j = 0; j < d; ++j) s.p[j] = draw(1.0, 0.5);
  s.p = proj * s.p;
  if (model.kind() == ModelKind::SpinSL) {
    s.F.resize(d, d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) s.F(j, k) = j == k ? cd(0) : draw(0.5, 0.5);
  } else if (model.kind() == ModelKind::SpinSimplyLaced) {
    const auto n = static_cast<Eigen::Index>(model.root_system()->size());
    s.F.resize(n, 1);
    for (Eigen::Index a = 0; a < n; ++a) s.F(a, 0) = draw(0.5, 0.5);
    s.G = Eigen::VectorXcd::Zero(d);
  }
  return s;
}

cd random_z(std::mt19937_64& rng, cd tau, double margin) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double a = u(rng);
    const double b = u(rng);
    const cd z = a + b * tau;
    if (half_lattice_distance(z, tau) >= margin) return z;
  }
}

cd random_tau(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.8, 1.2);
  const double a = re(rng);
  return {a, im(rng)};
}

Eigen::MatrixXcd spin_minimal_orbit(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, cd g) {
  if (a.size() != b.size()) throw std::invalid_argument("a and b must have equal length");
  Eigen::MatrixXcd F = I * g * b * a.transpose();
  F.diagonal().setZero();
  return F;
}

}  // namespace ellcm
