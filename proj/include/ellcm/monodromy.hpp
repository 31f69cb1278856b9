#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ellcm/dynamics.hpp"
#include "ellcm/models.hpp"

namespace ellcm {

struct MonodromyConfig {
  double base_a = 0.1;  // base point z0 = a + b τ
  double base_b = 0.3;
  double loop_radius = 0.05;
  double clearance = 0.01;  // straight legs keep at least this far from singular points
  OdeConfig ode{1e-11, 1e-13};
};

/// Lattice translates of the model's singular points with |m|, |n| <= reach.
std::vector<cd> singular_lattice(const ModelSpec& model, cd tau, int reach = 3);

/// Straight path from a to b, with a left-hand semicircle of radius 2·clearance
/// around every singular point that comes within `clearance` of the segment.
PathSpec detour_line(cd a, cd b, const std::vector<cd>& singular, double clearance);

/// Y(end of path) for dY/dz = L(z) Y with Y(start) = 1.
Eigen::MatrixXcd transport(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                           const PathSpec& path, const OdeConfig& ode = {1e-11, 1e-13});

struct MonodromyData {
  cd tau;
  cd z0;
  Eigen::MatrixXcd gamma_alpha;  // z0 → z0 + 1
  Eigen::MatrixXcd gamma_beta;   // e^{-2πiQ} Y(z0 + τ)
  std::vector<cd> points;        // singular points the local loops encircle
  std::vector<Eigen::MatrixXcd> gamma_local;
  /// max |det Y / exp(Tr P Δz) - 1| over all transports.
  double liouville_residual;
};

MonodromyData monodromy_data(const ModelSpec& model, const PhaseState& s, const Context& ctx,
                             const MonodromyConfig& cfg = {});

/// Conjugation-invariant data: spectrum and trace of Γ_α, Γ_β, Γ_αΓ_β and each local loop.
struct MonodromyInvariants {
  std::vector<std::string> labels;
  std::vector<Eigen::VectorXcd> eigenvalues;
  std::vector<cd> traces;
};

MonodromyInvariants invariants(const MonodromyData& d);

/// Largest eigenvalue or trace difference, matched label by label.
double invariant_distance(const MonodromyInvariants& a, const MonodromyInvariants& b);

struct DriftReport {
  std::vector<cd> taus;
  std::vector<double> drift;  // against the first sample
  double max_drift = 0;
  MonodromyInvariants initial;
  MonodromyInvariants final;
};

/// Follows the isomonodromic flow along the τ path and measures how far the
/// monodromy invariants move. With `control` set the τ flow uses the isospectral
/// field without the 1/(2πi), which should not preserve them.
DriftReport isomonodromy_drift(const ModelSpec& model, const PhaseState& start,
                               const PathSpec& tau_path, int n_samples = 5,
                               const MonodromyConfig& cfg = {}, bool control = false,
                               const OdeConfig& flow = {});

struct CensusPoint {
  cd z;            // cell center reduced to the fundamental cell
  double residue;  // max-norm of the residue of L
};

/// Scans the fundamental cell on an n × n grid of cells centered on k/n + jτ/n,
/// integrating L around each cell; cells with residue above `threshold` are poles.
std::vector<CensusPoint> singularity_census(const ModelSpec& model, const PhaseState& s,
                                            const Context& ctx, int n = 8,
                                            double threshold = 1e-6);

}  // namespace ellcm
