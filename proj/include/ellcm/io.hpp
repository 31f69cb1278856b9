#pragma once

#include <Eigen/Dense>
#include <complex>
#include <json.hpp>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ellcm/dynamics.hpp"
#include "ellcm/models.hpp"
#include "ellcm/monodromy.hpp"
#include "ellcm/rootsys.hpp"

namespace ellcm {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// "1", "-0.5i", "0.3+0.8i", "i+0.1i" (terms are summed), "2e-3-1e-2i".
cd parse_complex(const std::string& text);
/// Shortest round-trip form, e.g. "0.3+0.8i"; real values print as "2".
std::string format_complex(cd z);
/// "start..end"
std::pair<cd, cd> parse_range(const std::string& text);
/// Points separated by ':' or ';', e.g. "i:i+0.1i".
std::vector<cd> parse_points(const std::string& text);
/// Comma-separated complex list.
Eigen::VectorXcd parse_vector(const std::string& text);

json to_json(cd z);
cd complex_from_json(const json& j);
json to_json(const Eigen::VectorXcd& v);
/// Row-major nested arrays of [re, im].
json to_json(const Eigen::MatrixXcd& m);
Eigen::VectorXcd vector_from_json(const json& j);
Eigen::MatrixXcd matrix_from_json(const json& j);

json to_json(const ModelSpec& model);
/// Accepts the output of to_json(ModelSpec).
ModelSpec model_from_json(const json& j);
json to_json(const PhaseState& s);
PhaseState state_from_json(const ModelSpec& model, const json& j);

/// Roots and orbits with exact coordinates as strings ("1/2", "-1").
json to_json(const RootSystem& rs);

json to_json(const ConservedReport& r);
json to_json(const MonodromyData& d);
json to_json(const MonodromyInvariants& inv);
json to_json(const DriftReport& r);

/// One row per sample: s, time, τ, H, spin norm, q, p and the probe traces.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Static line plot of log10 drift against the path parameter.
std::string drift_svg(const std::vector<double>& s, const std::vector<double>& drift,
                      const std::string& title);

}  // namespace ellcm
