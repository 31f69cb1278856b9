#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ellcm/models.hpp"
#include "ellcm/ode.hpp"

namespace ellcm {

/// Straight segment or circular arc in the complex plane.
struct PathSegment {
  enum class Kind { Line, Arc } kind = Kind::Line;
  cd start, end;           // Line
  cd center;               // Arc
  double radius = 0;       // Arc
  double angle0 = 0, angle1 = 0;  // Arc, radians; angle1 < angle0 runs clockwise

  cd at(double t) const;       // t ∈ [0, 1]
  cd tangent(double t) const;  // d/dt
  double length() const;
};

/// Piecewise path parametrized by s ∈ [0, 1], each segment taking a share of
/// the parameter proportional to its length.
class PathSpec {
 public:
  static PathSpec line(cd a, cd b);
  static PathSpec polyline(const std::vector<cd>& points);
  static PathSpec arc(cd center, double radius, double angle0, double angle1);

  PathSpec& append(const PathSegment& seg);
  PathSpec& append(const PathSpec& other);
  PathSpec reversed() const;

  cd at(double s) const;
  cd tangent(double s) const;  // dz/ds
  cd start() const { return at(0.0); }
  cd end() const { return at(1.0); }
  double length() const { return total_; }
  const std::vector<PathSegment>& segments() const { return segs_; }
  /// Segment boundaries in s, starting with 0 and ending with 1.
  std::vector<double> breakpoints() const;
  /// Smallest imaginary part along the path.
  double min_imag() const;

 private:
  std::pair<std::size_t, double> locate(double s) const;
  std::vector<PathSegment> segs_;
  std::vector<double> cum_;  // cumulative lengths
  double total_ = 0;
};

/// Tr L(z)^k is recorded at z for each k in `powers`, and the spectrum of L(z)
/// when `eigenvalues` is set.
struct Probe {
  cd z;
  std::vector<int> powers{2, 3};
  bool eigenvalues = true;
};

struct IntegrateConfig {
  OdeConfig ode{};
  int n_samples = 101;
  cd tau{0.0, 1.0};  // fixed modulus of isospectral flows
  std::vector<Probe> probes;
  double collision_guard = 1e-4;
  cd field_scale = 1.0;  // multiplies the vector field; only harness controls change it
};

struct Monitor {
  cd hamiltonian;
  std::vector<std::vector<cd>> traces;         // [probe][power]
  std::vector<Eigen::VectorXcd> eigenvalues;  // [probe], empty when disabled
  double spin_norm = 0;
};

struct Sample {
  double s;
  cd time;  // t for isospectral flows, τ for isomonodromic ones
  cd tau;
  PhaseState state;
  Monitor monitor;
};

struct Trajectory {
  FlowMode mode;
  std::vector<Probe> probes;
  std::vector<Sample> samples;
  OdeStats stats;
  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
};

/// The flow stopped early: a pole guard tripped or the step size collapsed.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double s, PhaseState last)
      : std::runtime_error(what), s_(s), last_(std::move(last)) {}
  double at() const { return s_; }
  const PhaseState& last_state() const { return last_; }

 private:
  double s_;
  PhaseState last_;
};

Monitor measure(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                const std::vector<Probe>& probes);

/// Isospectral flows follow a path in complex time at fixed cfg.tau; isomonodromic
/// flows follow a path in τ, with the elliptic functions re-evaluated at every stage.
Trajectory integrate(const ModelSpec& model, const PhaseState& start, const PathSpec& path,
                     FlowMode mode, const IntegrateConfig& cfg = {});

struct ProbeDrift {
  cd z;
  int power;
  double drift;  // max |T(s) - T(0)| / max(1, |T(0)|)
};

struct ConservedReport {
  FlowMode mode;
  double hamiltonian_drift;  // same relative measure as ProbeDrift
  std::vector<ProbeDrift> traces;
  std::vector<double> eigenvalue_drift;  // per probe with eigenvalues, absolute
  double spin_norm_max;
  /// Conservation is expected only along isospectral flows.
  bool conservation_expected() const { return mode == FlowMode::Isospectral; }
  double max_trace_drift() const;
  double max_eigenvalue_drift() const;
};

ConservedReport conserved_report(const Trajectory& traj);

/// Default τ path: i → 1.1i → 0.05 + 1.1i.
PathSpec default_tau_path();

}  // namespace ellcm
