#include "ellcm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "ellcm/errors.hpp"
#include "ellcm/spectrum.hpp"

namespace ellcm {

namespace {

constexpr cd I{0.0, 1.0};

double relative_drift(const std::vector<cd>& v) {
  double d = 0;
  for (const auto& x : v) d = std::max(d, std::abs(x - v.front()));
  return d / std::max(1.0, std::abs(v.front()));
}

}  // namespace

cd PathSegment::at(double t) const {
  if (kind == Kind::Line) return start + t * (end - start);
  return center + std::polar(radius, angle0 + t * (angle1 - angle0));
}

cd PathSegment::tangent(double t) const {
  if (kind == Kind::Line) return end - start;
  const double th = angle0 + t * (angle1 - angle0);
  return I * std::polar(radius, th) * (angle1 - angle0);
}

double PathSegment::length() const {
  if (kind == Kind::Line) return std::abs(end - start);
  return radius * std::abs(angle1 - angle0);
}

PathSpec PathSpec::line(cd a, cd b) {
  PathSpec p;
  p.append(PathSegment{PathSegment::Kind::Line, a, b, {}, 0, 0, 0});
  return p;
}

PathSpec PathSpec::polyline(const std::vector<cd>& points) {
  if (points.size() < 2) throw std::invalid_argument("a polyline needs at least two points");
  PathSpec p;
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    p.append(PathSegment{PathSegment::Kind::Line, points[i], points[i + 1], {}, 0, 0, 0});
  return p;
}

PathSpec PathSpec::arc(cd center, double radius, double angle0, double angle1) {
  PathSpec p;
  PathSegment s;
  s.kind = PathSegment::Kind::Arc;
  s.center = center;
  s.radius = radius;
  s.angle0 = angle0;
  s.angle1 = angle1;
  s.start = s.at(0);
  s.end = s.at(1);
  p.append(s);
  return p;
}

PathSpec& PathSpec::append(const PathSegment& seg) {
  const double len = seg.length();
  if (len == 0) return *this;
  segs_.push_back(seg);
  total_ += len;
  cum_.push_back(total_);
  return *this;
}

PathSpec& PathSpec::append(const PathSpec& other) {
  for (const auto& s : other.segs_) append(s);
  return *this;
}

PathSpec PathSpec::reversed() const {
  PathSpec p;
  for (auto it = segs_.rbegin(); it != segs_.rend(); ++it) {
    PathSegment s = *it;
    std::swap(s.start, s.end);
    std::swap(s.angle0, s.angle1);
    p.append(s);
  }
  return p;
}

std::pair<std::size_t, double> PathSpec::locate(double s) const {
  if (segs_.empty()) throw std::logic_error("empty path");
  const double l = std::clamp(s, 0.0, 1.0) * total_;
  std::size_t i = std::lower_bound(cum_.begin(), cum_.end(), l) - cum_.begin();
  i = std::min(i, segs_.size() - 1);
  const double begin = i == 0 ? 0.0 : cum_[i - 1];
  return {i, (l - begin) / (cum_[i] - begin)};
}

cd PathSpec::at(double s) const {
  const auto [i, t] = locate(s);
  return segs_[i].at(t);
}

cd PathSpec::tangent(double s) const {
  const auto [i, t] = locate(s);
  const double begin = i == 0 ? 0.0 : cum_[i - 1];
  return segs_[i].tangent(t) * (total_ / (cum_[i] - begin));
}

std::vector<double> PathSpec::breakpoints() const {
  std::vector<double> b{0.0};
  for (std::size_t i = 0; i + 1 < cum_.size(); ++i) b.push_back(cum_[i] / total_);
  b.push_back(1.0);
  return b;
}

double PathSpec::min_imag() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : segs_) {
    m = std::min({m, s.start.imag(), s.end.imag()});
    if (s.kind == PathSegment::Kind::Arc) {
      // lowest point of the circle, if the arc passes it
      const double lo = std::min(s.angle0, s.angle1), hi = std::max(s.angle0, s.angle1);
      const double bottom = -std::numbers::pi / 2;
      for (int k = -4; k <= 4; ++k) {
        const double a = bottom + 2 * std::numbers::pi * k;
        if (a >= lo && a <= hi) m = std::min(m, s.center.imag() - s.radius);
      }
    }
  }
  return m;
}

PathSpec default_tau_path() { return PathSpec::polyline({I, 1.1 * I, 0.05 + 1.1 * I}); }

Monitor measure(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                const std::vector<Probe>& probes) {
  Monitor m;
  m.hamiltonian = hamiltonian(model, s, ctx);
  m.spin_norm = spin_constraint_norm(model, s);
  for (const auto& p : probes) {
    const Eigen::MatrixXcd L = build_lax(model, s, p.z, ctx).L;
    std::vector<cd> tr;
    for (int k : p.powers) {
      Eigen::MatrixXcd Lk = Eigen::MatrixXcd::Identity(L.rows(), L.cols());
      for (int i = 0; i < k; ++i) Lk = Lk * L;
      tr.push_back(Lk.trace());
    }
    m.traces.push_back(std::move(tr));
    m.eigenvalues.push_back(p.eigenvalues ? Eigen::VectorXcd(L.eigenvalues())
                                          : Eigen::VectorXcd());
  }
  return m;
}

Trajectory integrate(const ModelSpec& model, const PhaseState& start, const PathSpec& path,
                     FlowMode mode, const IntegrateConfig& cfg) {
  validate_state(model, start);
  if (cfg.n_samples < 2) throw std::invalid_argument("need at least two samples");
  if (mode == FlowMode::Isomonodromic && !(path.min_imag() > 0))
    throw std::invalid_argument("tau path leaves the upper half plane");
  if (mode == FlowMode::Isospectral && !(cfg.tau.imag() > 0))
    throw std::invalid_argument("tau must lie in the upper half plane");

  const TruncationPolicy<double> trunc{};
  const Context fixed(cfg.tau, trunc, cfg.collision_guard);
  auto context_at = [&](double s) {
    return mode == FlowMode::Isomonodromic ? Context(path.at(s), trunc, cfg.collision_guard)
                                           : fixed;
  };

  std::set<double> grid;
  for (int i = 0; i < cfg.n_samples; ++i) grid.insert(double(i) / (cfg.n_samples - 1));
  const auto bp = path.breakpoints();
  grid.insert(bp.begin(), bp.end());
  const std::vector<double> outputs(grid.begin(), grid.end());
  std::set<double> sampled;
  for (int i = 0; i < cfg.n_samples; ++i) sampled.insert(double(i) / (cfg.n_samples - 1));

  Trajectory traj{mode, cfg.probes, {}, {}};
  auto rhs = [&](double s, const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    const auto st = PhaseState::unpack(model, y);
    return eom(model, st, context_at(s), mode).pack() * (cfg.field_scale * path.tangent(s));
  };
  auto observe = [&](double s, const Eigen::VectorXcd& y) {
    if (!sampled.count(s)) return;
    const auto ctx = context_at(s);
    auto st = PhaseState::unpack(model, y);
    auto mon = measure(model, st, ctx, cfg.probes);
    traj.samples.push_back({s, path.at(s), ctx.tau(), std::move(st), std::move(mon)});
  };

  Dopri5<cd> ode(cfg.ode);
  try {
    ode.integrate(rhs, start.pack(), outputs, observe);
  } catch (const PoleError& e) {
    throw IntegrationError(std::string("collision guard tripped: ") + e.what(), ode.last_s(),
                           PhaseState::unpack(model, ode.last_y()));
  } catch (const StepUnderflow& e) {
    throw IntegrationError(e.what(), ode.last_s(), PhaseState::unpack(model, ode.last_y()));
  }
  traj.stats = ode.stats();
  return traj;
}

double ConservedReport::max_trace_drift() const {
  double m = 0;
  for (const auto& t : traces) m = std::max(m, t.drift);
  return m;
}

double ConservedReport::max_eigenvalue_drift() const {
  double m = 0;
  for (double d : eigenvalue_drift) m = std::max(m, d);
  return m;
}

ConservedReport conserved_report(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  ConservedReport r{traj.mode, 0, {}, {}, 0};
  std::vector<cd> h;
  for (const auto& s : traj.samples) {
    h.push_back(s.monitor.hamiltonian);
    r.spin_norm_max = std::max(r.spin_norm_max, s.monitor.spin_norm);
  }
  r.hamiltonian_drift = relative_drift(h);
  for (std::size_t p = 0; p < traj.probes.size(); ++p) {
    const auto& probe = traj.probes[p];
    for (std::size_t k = 0; k < probe.powers.size(); ++k) {
      std::vector<cd> t;
      for (const auto& s : traj.samples) t.push_back(s.monitor.traces[p][k]);
      r.traces.push_back({probe.z, probe.powers[k], relative_drift(t)});
    }
    if (probe.eigenvalues) {
      double d = 0;
      const auto& e0 = traj.front().monitor.eigenvalues[p];
      for (const auto& s : traj.samples)
        d = std::max(d, spectrum_distance(e0, s.monitor.eigenvalues[p]));
      r.eigenvalue_drift.push_back(d);
    }
  }
  return r;
}

}  // namespace ellcm
