#include "ellcm/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <random>

#include "ellcm/dynamics.hpp"
#include "ellcm/errors.hpp"
#include "ellcm/identities.hpp"
#include "ellcm/io.hpp"
#include "ellcm/models.hpp"
#include "ellcm/monodromy.hpp"

namespace ellcm {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolved options of one command, all kept as the strings given on the command line.
struct Values {
  std::string command;
  std::map<std::string, std::string> opts;
  std::map<std::string, bool> flags;

  const std::string& str(const std::string& k) const {
    const auto it = opts.find(k);
    if (it == opts.end()) throw std::logic_error("undeclared option " + k);
    return it->second;
  }
  bool flag(const std::string& k) const {
    const auto it = flags.find(k);
    if (it == flags.end()) throw std::logic_error("undeclared flag " + k);
    return it->second;
  }
  double real(const std::string& k) const {
    const auto& s = str(k);
    double x = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw UsageError("--" + k + " expects a number, got '" + s + "'");
    return x;
  }
  long integer(const std::string& k) const {
    const auto& s = str(k);
    long x = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw UsageError("--" + k + " expects an integer, got '" + s + "'");
    return x;
  }
  long positive(const std::string& k, long min = 1) const {
    const long x = integer(k);
    if (x < min) throw UsageError("--" + k + " must be at least " + std::to_string(min));
    return x;
  }
  cd complex(const std::string& k) const {
    try {
      return parse_complex(str(k));
    } catch (const std::invalid_argument& e) {
      throw UsageError("--" + k + ": " + e.what());
    }
  }
  std::uint64_t seed() const {
    const auto& s = str("seed");
    std::uint64_t x = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw UsageError("--seed expects a non-negative integer");
    return x;
  }
};

void require_upper(cd tau, const std::string& what) {
  if (!(tau.imag() > 0)) throw UsageError(what + " must lie in the upper half plane");
}

cd tau_option(const Values& v, const std::string& k) {
  const cd t = v.complex(k);
  require_upper(t, "--" + k);
  return t;
}

std::vector<cd> tau_list(const Values& v, const std::string& k) {
  Eigen::VectorXcd t;
  try {
    t = parse_vector(v.str(k));
  } catch (const std::invalid_argument& e) {
    throw UsageError("--" + k + ": " + e.what());
  }
  std::vector<cd> out(t.begin(), t.end());
  for (const cd x : out) require_upper(x, "--" + k);
  return out;
}

PathSpec tau_path_option(const Values& v) {
  std::vector<cd> pts;
  try {
    pts = parse_points(v.str("tau-path"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--tau-path: ") + e.what());
  }
  for (const cd t : pts) require_upper(t, "--tau-path");
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i] == pts[i + 1]) throw UsageError("--tau-path repeats a point");
  return PathSpec::polyline(pts);
}

json config_json(const Values& v) {
  json j = json::object();
  for (const auto& [k, s] : v.opts)
    if (k != "config" && k != "out") j[k] = s;
  for (const auto& [k, b] : v.flags) j[k] = b;
  return j;
}

json header(const Values& v) {
  json j;
  j["schema"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = v.command;
  j["config"] = config_json(v);
  return j;
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw OutputError("cannot create " + dir_.string() + ": " + ec.message());
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void text(const std::string& name, const std::string& body) const {
    std::ofstream f(path(name), std::ios::binary);
    f << body;
    if (!f) throw OutputError("cannot write " + path(name).string());
  }
  void json_file(const std::string& name, const json& j) const { text(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
};

std::string sci(double x) {
  std::ostringstream o;
  o << std::scientific << std::setprecision(2) << x;
  return o.str();
}

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

const char* verdict(bool ok) { return ok ? "pass" : "FAIL"; }

ModelSpec build_model(const Values& v) {
  const auto kind = parse_kind(v.str("model"));
  if (!kind)
    throw UsageError("unknown model '" + v.str("model") +
                     "'; expected a-vector, simply-laced, bc, twisted-bc, spin-sl or "
                     "spin-simply-laced");
  const int rank = static_cast<int>(v.positive("rank"));
  auto roots = [&] {
    const auto f = parse_family(v.str("family"));
    if (!f) throw UsageError("unknown root family '" + v.str("family") + "'");
    return build_root_system(*f, rank);
  };
  try {
    switch (*kind) {
      case ModelKind::AVector: return ModelSpec::a_vector(rank, v.complex("g"));
      case ModelKind::SimplyLaced: return ModelSpec::simply_laced(roots(), v.complex("g"));
      case ModelKind::BCShort:
        return ModelSpec::bc_short(rank, v.complex("gm"), v.complex("gl"), v.complex("gs"));
      case ModelKind::TwistedBC:
        return ModelSpec::twisted_bc(rank, v.complex("gm"), v.complex("gl1"), v.complex("gl2"),
                                     v.complex("gs1"), v.complex("gs2"));
      case ModelKind::SpinSL: return ModelSpec::spin_sl(rank);
      case ModelKind::SpinSimplyLaced: return ModelSpec::spin_simply_laced(roots());
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw std::logic_error("unreachable");
}

PhaseState initial_state(const ModelSpec& model, const Values& v, cd tau) {
  std::mt19937_64 rng(v.seed());
  PhaseState s = random_state(model, rng, tau);
  auto override_with = [&](const std::string& k, Eigen::VectorXcd& target) {
    if (v.str(k).empty()) return;
    Eigen::VectorXcd x;
    try {
      x = parse_vector(v.str(k));
    } catch (const std::invalid_argument& e) {
      throw UsageError("--" + k + ": " + e.what());
    }
    if (x.size() != target.size())
      throw UsageError("--" + k + " needs " + std::to_string(target.size()) + " entries");
    target = x;
  };
  override_with("q", s.q);
  override_with("p", s.p);
  try {
    validate_state(model, s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return s;
}

std::optional<RootSystem> root_system_for(const ModelSpec& m) {
  if (m.root_system()) return *m.root_system();
  switch (m.kind()) {
    case ModelKind::AVector:
    case ModelKind::SpinSL:
      if (m.rank() >= 2) return build_root_system(Family::A, m.rank() - 1);
      return std::nullopt;
    case ModelKind::BCShort:
    case ModelKind::TwistedBC: return build_root_system(Family::BC, m.rank());
    default: return std::nullopt;
  }
}

// ---- identities ----

struct IdentityPoint {
  cd u, v, z;
};

IdentityPoint identity_point(std::mt19937_64& rng, const Context& ctx) {
  const cd tau = ctx.tau();
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(-0.45, 0.45);
  auto draw = [&] {
    const double a = re(rng);
    return cd(a, im(rng) * tau.imag());
  };
  for (;;) {
    const cd u = draw();
    const cd v = draw();
    const cd z = draw();
    bool ok = true;
    for (const cd w : {u, v, z, z - u, z + u, z - v, z + v, u + v, u - v})
      if (half_lattice_distance(w, tau) < 0.05) ok = false;
    if (!ok) continue;
    try {
      for (const auto& info : kIdentities) evaluate_identity(ctx, info.id, u, v, z);
      return {u, v, z};
    } catch (const PoleError&) {
    }
  }
}

std::pair<cd, cd> heat_point(std::mt19937_64& rng, cd tau) {
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(-0.45, 0.45);
  for (;;) {
    const double a = re(rng), b = im(rng), c = re(rng), d = im(rng);
    const cd u(a, b * tau.imag()), z(c, d * tau.imag());
    bool ok = true;
    for (const cd w : {u, z, z - u, z + u})
      if (half_lattice_distance(w, tau) < 0.12) ok = false;
    if (ok) return {u, z};
  }
}

int cmd_identities(const Values& v, std::ostream& out) {
  if (v.flag("list")) {
    for (const auto& info : kIdentities)
      out << std::left << std::setw(26) << info.name << (info.has_const ? "+const  " : "        ")
          << info.formula << "\n";
    return kExitOk;
  }
  const auto taus = tau_list(v, "tau");
  const long points = v.positive("points");
  const long heat_points = v.positive("heat-points", 0);
  const double tol = v.real("tolerance"), heat_tol = v.real("heat-tolerance");
  const double h = v.real("heat-step");
  if (!(h > 0)) throw UsageError("--heat-step must be positive");
  const Output o(v.str("out"));

  std::ostringstream csv;
  csv << "check,tau_re,tau_im,points,max_residual,tolerance,pass\n";
  json rows = json::array();
  bool all = true;
  auto record = [&](const std::string& name, cd tau, long n, double worst, double bound) {
    const bool ok = worst < bound;
    all = all && ok;
    csv << name << "," << num(tau.real()) << "," << num(tau.imag()) << "," << n << ","
        << num(worst) << "," << num(bound) << "," << (ok ? "true" : "false") << "\n";
    rows.push_back({{"check", name},
                    {"tau", to_json(tau)},
                    {"points", n},
                    {"max_residual", worst},
                    {"tolerance", bound},
                    {"pass", ok}});
    out << std::left << std::setw(28) << name << std::setw(14) << format_complex(tau)
        << std::setw(10) << sci(worst) << verdict(ok) << "\n";
  };

  std::mt19937_64 rng(v.seed());
  for (const cd tau : taus) {
    const Context ctx(tau);
    std::vector<IdentityPoint> pts;
    for (long k = 0; k < points; ++k) pts.push_back(identity_point(rng, ctx));
    for (const auto& info : kIdentities) {
      double worst = 0;
      for (const auto& p : pts)
        worst = std::max(worst, evaluate_identity(ctx, info.id, p.u, p.v, p.z).relative());
      record(std::string(info.name), tau, points, worst, tol);
    }
    if (heat_points == 0) continue;
    const std::pair<KernelVariant, const char*> variants[] = {
        {KernelVariant::Plain, "heat-plain"},
        {KernelVariant::Half, "heat-half"},
        {KernelVariant::Double, "heat-double"}};
    for (const auto& [variant, name] : variants) {
      double worst = 0;
      for (long k = 0; k < heat_points; ++k) {
        const auto [u, z] = heat_point(rng, tau);
        worst = std::max(worst, std::abs(heat_residual(ctx, variant, u, z, h)));
      }
      record(name, tau, heat_points, worst, heat_tol);
    }
  }

  json j = header(v);
  j["results"] = rows;
  j["pass"] = all;
  o.text("identities.csv", csv.str());
  o.json_file("identities.json", j);
  return all ? kExitOk : kExitCheckFailed;
}

// ---- lax-check ----

int cmd_lax_check(const Values& v, std::ostream& out) {
  const ModelSpec model = build_model(v);
  std::vector<FlowMode> modes;
  const auto& mode = v.str("mode");
  if (mode == "both") {
    modes = {FlowMode::Isospectral, FlowMode::Isomonodromic};
  } else if (const auto m = parse_mode(mode)) {
    modes = {*m};
  } else {
    throw UsageError("--mode must be isospectral, isomonodromic or both");
  }
  const long samples = v.positive("samples");
  const double tol = v.real("tolerance"), ttol = v.real("translation-tolerance");
  std::optional<cd> fixed_tau;
  if (!v.str("tau").empty()) fixed_tau = tau_option(v, "tau");
  const bool spin = model.is_spin();
  const Output o(v.str("out"));

  std::ostringstream csv;
  csv << "sample,tau_re,tau_im,z_re,z_im,mode,lax_residual,translation_residual";
  if (spin) csv << ",constraint_rate";
  csv << "\n";
  json rows = json::array();
  std::map<FlowMode, double> worst;
  double worst_t = 0, worst_c = 0;

  std::mt19937_64 rng(v.seed());
  for (long i = 0; i < samples; ++i) {
    const cd tau = fixed_tau ? *fixed_tau : random_tau(rng);
    const Context ctx(tau);
    const PhaseState s = random_state(model, rng, tau);
    const cd z = random_z(rng, tau);
    const double tr = lax_translation_residual(model, s, z, ctx).max();
    const double rate =
        spin ? spin_constraint_norm(model, eom(model, s, ctx, FlowMode::Isospectral)) : 0.0;
    worst_t = std::max(worst_t, tr);
    worst_c = std::max(worst_c, rate);
    for (const FlowMode m : modes) {
      const double r = lax_residual(model, s, z, ctx, m);
      worst[m] = std::max(worst[m], r);
      csv << i << "," << num(tau.real()) << "," << num(tau.imag()) << "," << num(z.real())
          << "," << num(z.imag()) << "," << mode_name(m) << "," << num(r) << "," << num(tr);
      if (spin) csv << "," << num(rate);
      csv << "\n";
      json row = {{"sample", i},        {"tau", to_json(tau)},
                  {"z", to_json(z)},    {"mode", mode_name(m)},
                  {"lax_residual", r},  {"translation_residual", tr}};
      if (spin) row["constraint_rate"] = rate;
      rows.push_back(std::move(row));
    }
  }

  bool all = worst_t < ttol && worst_c < tol;
  json summary = json::object();
  for (const FlowMode m : modes) {
    const bool ok = worst[m] < tol;
    all = all && ok;
    summary[mode_name(m)] = {{"max_lax_residual", worst[m]}, {"pass", ok}};
    out << std::left << std::setw(16) << mode_name(m) << "max Lax residual      "
        << sci(worst[m]) << "  " << verdict(ok) << "\n";
  }
  summary["max_translation_residual"] = worst_t;
  out << std::left << std::setw(16) << "translation" << "max residual          " << sci(worst_t)
      << "  " << verdict(worst_t < ttol) << "\n";
  if (spin) {
    summary["max_constraint_rate"] = worst_c;
    out << std::left << std::setw(16) << "spin constraint" << "max rate of change    "
        << sci(worst_c) << "  " << verdict(worst_c < tol) << "\n";
  }

  json j = header(v);
  j["model"] = to_json(model);
  j["summary"] = summary;
  j["samples"] = rows;
  j["pass"] = all;
  o.text("lax_check.csv", csv.str());
  o.json_file("lax_check.json", j);
  return all ? kExitOk : kExitCheckFailed;
}

// ---- evolve ----

int cmd_evolve(const Values& v, std::ostream& out) {
  const ModelSpec model = build_model(v);
  const auto mode = parse_mode(v.str("mode"));
  if (!mode) throw UsageError("--mode must be isospectral or isomonodromic");
  IntegrateConfig cfg;
  cfg.ode.rel_tol = v.real("rtol");
  cfg.ode.abs_tol = v.real("atol");
  cfg.n_samples = static_cast<int>(v.positive("samples", 2));
  PathSpec path;
  cd tau0;
  if (*mode == FlowMode::Isospectral) {
    std::pair<cd, cd> t;
    try {
      t = parse_range(v.str("t"));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--t: ") + e.what());
    }
    if (t.first == t.second) throw UsageError("--t needs distinct endpoints");
    path = PathSpec::line(t.first, t.second);
    cfg.tau = tau0 = tau_option(v, "tau");
  } else {
    path = tau_path_option(v);
    tau0 = path.start();
  }
  Eigen::VectorXcd probes;
  try {
    probes = parse_vector(v.str("probe"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--probe: ") + e.what());
  }
  for (const cd z : probes) cfg.probes.push_back({z});
  const PhaseState s0 = initial_state(model, v, tau0);
  const Output o(v.str("out"));

  json j = header(v);
  j["model"] = to_json(model);
  j["initial_state"] = to_json(s0);
  Trajectory traj;
  try {
    traj = integrate(model, s0, path, *mode, cfg);
  } catch (const IntegrationError& e) {
    j["status"] = "aborted";
    j["error"] = e.what();
    j["failed_at"] = e.at();
    j["last_state"] = to_json(e.last_state());
    o.json_file("summary.json", j);
    throw;
  }
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  o.text("trajectory.csv", csv.str());

  const auto rep = conserved_report(traj);
  const double tol = v.real("tolerance"), etol = v.real("eigenvalue-tolerance");
  const bool ok = !rep.conservation_expected() ||
                  (rep.hamiltonian_drift < tol && rep.max_trace_drift() < tol &&
                   rep.max_eigenvalue_drift() < etol);
  j["status"] = "completed";
  j["final_state"] = to_json(traj.back().state);
  j["final_hamiltonian"] = to_json(traj.back().monitor.hamiltonian);
  j["conservation"] = to_json(rep);
  j["ode"] = {{"steps", traj.stats.steps},
              {"rejections", traj.stats.rejections},
              {"evaluations", traj.stats.evaluations}};
  j["pass"] = ok;
  o.json_file("summary.json", j);

  out << mode_name(*mode) << " flow, " << traj.samples.size() << " samples, "
      << traj.stats.steps << " steps\n";
  out << "H drift            " << sci(rep.hamiltonian_drift) << "\n";
  out << "trace drift        " << sci(rep.max_trace_drift()) << "\n";
  out << "eigenvalue drift   " << sci(rep.max_eigenvalue_drift()) << "\n";
  if (model.is_spin()) out << "spin constraint    " << sci(rep.spin_norm_max) << "\n";
  if (rep.conservation_expected())
    out << "conservation       " << verdict(ok) << "\n";
  else
    out << "conservation is not expected along the isomonodromic flow\n";
  return ok ? kExitOk : kExitCheckFailed;
}

// ---- monodromy ----

int cmd_monodromy(const Values& v, std::ostream& out) {
  const ModelSpec model = build_model(v);
  const PathSpec path = tau_path_option(v);
  const int checkpoints = static_cast<int>(v.positive("checkpoints", 2));
  MonodromyConfig mc;
  mc.base_a = v.real("base-a");
  mc.base_b = v.real("base-b");
  mc.loop_radius = v.real("loop-radius");
  mc.clearance = v.real("clearance");
  if (!(mc.loop_radius > 0) || !(mc.clearance > 0))
    throw UsageError("--loop-radius and --clearance must be positive");
  mc.ode.rel_tol = v.real("transport-rtol");
  mc.ode.abs_tol = v.real("transport-atol");
  OdeConfig flow;
  flow.rel_tol = v.real("rtol");
  flow.abs_tol = v.real("atol");
  const double tol = v.real("tolerance"), ctol = v.real("control-threshold");
  const bool control = v.flag("control");
  const PhaseState s0 = initial_state(model, v, path.start());
  const Output o(v.str("out"));

  const auto data0 = monodromy_data(model, s0, Context(path.start()), mc);
  const auto drift = isomonodromy_drift(model, s0, path, checkpoints, mc, false, flow);
  std::optional<DriftReport> ctrl;
  if (control) ctrl = isomonodromy_drift(model, s0, path, checkpoints, mc, true, flow);

  const bool drift_ok = drift.max_drift < tol;
  const bool ctrl_ok = !ctrl || ctrl->max_drift > ctol;
  const bool ok = drift_ok && ctrl_ok;

  std::vector<double> s;
  std::ostringstream csv;
  csv << "checkpoint,s,tau_re,tau_im,drift" << (ctrl ? ",control_drift" : "") << "\n";
  for (std::size_t i = 0; i < drift.drift.size(); ++i) {
    s.push_back(double(i) / (checkpoints - 1));
    csv << i << "," << num(s.back()) << "," << num(drift.taus[i].real()) << ","
        << num(drift.taus[i].imag()) << "," << num(drift.drift[i]);
    if (ctrl) csv << "," << num(ctrl->drift[i]);
    csv << "\n";
  }
  o.text("drift.csv", csv.str());
  o.text("drift.svg", drift_svg(s, drift.drift,
                                "monodromy invariant drift, " + kind_name(model.kind()) +
                                    " rank " + std::to_string(model.rank())));

  json j = header(v);
  j["model"] = to_json(model);
  j["initial_state"] = to_json(s0);
  j["monodromy"] = to_json(data0);
  j["drift"] = to_json(drift);
  j["drift"]["tolerance"] = tol;
  j["drift"]["pass"] = drift_ok;
  if (ctrl) {
    j["control"] = to_json(*ctrl);
    j["control"]["threshold"] = ctol;
    j["control"]["pass"] = ctrl_ok;
  }
  j["pass"] = ok;
  o.json_file("monodromy.json", j);

  out << "singular points    " << data0.points.size() << "\n";
  out << "Liouville check    " << sci(data0.liouville_residual) << "\n";
  out << "invariant drift    " << sci(drift.max_drift) << "  " << verdict(drift_ok) << "\n";
  if (ctrl)
    out << "control drift      " << sci(ctrl->max_drift) << "  " << verdict(ctrl_ok) << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

// ---- couplings ----

json couplings_json(const ModelSpec& model) {
  json j = to_json(model);
  if (model.kind() == ModelKind::TwistedBC) {
    const auto g = inozemtsev_map(model.couplings());
    json a = json::array();
    for (const cd x : g) a.push_back(to_json(x));
    j["inozemtsev_sq"] = a;
  }
  return j;
}

int cmd_couplings(const Values& v, std::ostream& out) {
  const ModelSpec model = build_model(v);
  if (v.flag("json")) {
    json j = header(v);
    j["couplings"] = couplings_json(model);
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  const auto& c = model.couplings();
  const auto& e = model.effective();
  auto line = [&](const std::string& k, cd x) { out << k << " = " << format_complex(x) << "\n"; };
  out << "model " << kind_name(model.kind()) << ", rank " << model.rank() << "\n";
  switch (model.kind()) {
    case ModelKind::BCShort:
      line("g_m", c.g_m);
      line("g_l", c.g_l);
      line("g_s", c.g_s);
      line("g~_s^2 = g_s^2 + g_s g_l/2", e.gs_sq);
      break;
    case ModelKind::TwistedBC: {
      line("g_m", c.g_m);
      line("g_l1", c.g_l1);
      line("g_l2", c.g_l2);
      line("g_s1", c.g_s1);
      line("g_s2", c.g_s2);
      line("g~_l2^2", e.gl2_sq);
      line("g~_s1^2", e.gs1_sq);
      line("g~_s2^2", e.gs2_sq);
      const auto g = inozemtsev_map(c);
      const char* at[] = {"0", "1/2", "(1+tau)/2", "tau/2"};
      for (int a = 0; a < 4; ++a) line(std::string("inozemtsev g^2 at ") + at[a], g[a]);
      break;
    }
    case ModelKind::AVector:
    case ModelKind::SimplyLaced:
      line("g", c.g);
      out << "no renormalization: the Hamiltonian carries g^2\n";
      break;
    default:
      out << "spin models carry no coupling constants\n";
      break;
  }
  return kExitOk;
}

// ---- registry ----

struct Command {
  CLI::App* app = nullptr;
  Values values;
  std::function<int(const Values&, std::ostream&)> run;
};

void opt(Command& c, const std::string& name, const std::string& def, const std::string& help) {
  c.values.opts[name] = def;
  c.app->add_option("--" + name, c.values.opts[name], help)->capture_default_str();
}

void flag(Command& c, const std::string& name, const std::string& help) {
  c.values.flags[name] = false;
  c.app->add_flag("--" + name, c.values.flags[name], help);
}

void model_options(Command& c) {
  opt(c, "model", "a-vector", "a-vector, simply-laced, bc, twisted-bc, spin-sl, spin-simply-laced");
  opt(c, "rank", "2", "particle number, or the rank of the root system");
  opt(c, "family", "A", "root family of simply-laced models: A, D, E6, E7, E8");
  opt(c, "g", "0.3", "coupling of vector and simply-laced models");
  opt(c, "gm", "0.2", "middle-root coupling");
  opt(c, "gl", "0.3", "long-root coupling (bc)");
  opt(c, "gs", "0.2", "short-root coupling (bc)");
  opt(c, "gl1", "0.15", "long-root coupling, first kernel (twisted-bc)");
  opt(c, "gl2", "0.1", "long-root coupling, doubled kernel (twisted-bc)");
  opt(c, "gs1", "0.1", "short-root coupling, first kernel (twisted-bc)");
  opt(c, "gs2", "0.05", "short-root coupling, half kernel (twisted-bc)");
}

void state_options(Command& c) {
  opt(c, "q", "", "initial positions, comma separated; random when empty");
  opt(c, "p", "", "initial momenta, comma separated; random when empty");
}

std::string default_out() {
  const char* env = std::getenv("ECM_OUTPUT_DIR");
  return env && *env ? env : ".";
}

void common_options(Command& c) {
  opt(c, "seed", "7", "random seed");
  opt(c, "out", default_out(), "output directory");
  opt(c, "config", "", "JSON file of option values; command-line flags win");
}

void identity_options(Command& c) {
  opt(c, "tau", "i,0.3+0.8i", "moduli, comma separated");
  opt(c, "points", "100", "random points per modulus");
  opt(c, "tolerance", "1e-10", "bound on relative identity residuals");
  opt(c, "heat-points", "50", "random points per kernel for the heat equation; 0 skips it");
  opt(c, "heat-tolerance", "1e-7", "bound on heat-equation residuals");
  opt(c, "heat-step", "1e-5", "difference step of the heat-equation check");
}

void lax_options(Command& c) {
  opt(c, "mode", "both", "isospectral, isomonodromic or both");
  opt(c, "samples", "20", "random (state, z, tau) samples");
  opt(c, "tau", "", "fixed modulus; random per sample when empty");
  opt(c, "tolerance", "1e-6", "bound on Lax residuals and the spin constraint rate");
  opt(c, "translation-tolerance", "1e-10", "bound on translation residuals");
}

void evolve_options(Command& c) {
  opt(c, "mode", "isospectral", "isospectral or isomonodromic");
  opt(c, "t", "0..1", "complex time range of isospectral flows");
  opt(c, "tau", "i", "modulus of isospectral flows");
  opt(c, "tau-path", "i:1.1i:0.05+1.1i", "polyline in tau for isomonodromic flows");
  opt(c, "samples", "101", "output samples");
  opt(c, "rtol", "1e-10", "relative tolerance of the integrator");
  opt(c, "atol", "1e-12", "absolute tolerance of the integrator");
  opt(c, "probe", "0.27+0.19i", "spectral parameters where Tr L^k is monitored, comma separated");
  opt(c, "tolerance", "1e-8", "bound on H and trace drift of isospectral flows");
  opt(c, "eigenvalue-tolerance", "1e-7", "bound on eigenvalue drift of isospectral flows");
}

void monodromy_options(Command& c) {
  opt(c, "tau-path", "i:1.1i:0.05+1.1i", "polyline in tau");
  opt(c, "checkpoints", "5", "tau values where monodromy is computed, endpoints included");
  opt(c, "tolerance", "1e-5", "bound on invariant drift");
  opt(c, "control-threshold", "1e-3", "drift the control run must exceed");
  opt(c, "base-a", "0.1", "base point z0 = a + b tau");
  opt(c, "base-b", "0.3", "base point z0 = a + b tau");
  opt(c, "loop-radius", "0.05", "radius of local loops");
  opt(c, "clearance", "0.01", "distance below which cycle paths detour around a pole");
  opt(c, "rtol", "1e-10", "relative tolerance of the tau flow");
  opt(c, "atol", "1e-12", "absolute tolerance of the tau flow");
  opt(c, "transport-rtol", "1e-11", "relative tolerance of z transport");
  opt(c, "transport-atol", "1e-13", "absolute tolerance of z transport");
}

int guarded(const std::function<int()>& f, std::ostream& err) {
  try {
    return f();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IntegrationError& e) {
    err << "numerical abort at s = " << e.at() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const PoleError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_report(const Values& v, std::ostream& out, std::ostream& err,
               const std::map<std::string, Command>& registry) {
  const ModelSpec model = build_model(v);
  const Output o(v.str("out"));
  json parts = json::object();
  int worst = kExitOk;
  for (const std::string name : {"identities", "lax-check", "evolve", "monodromy"}) {
    const Command& cmd = registry.at(name);
    Values sub = cmd.values;
    sub.command = name;
    for (const auto& [k, val] : v.opts)
      if (sub.opts.count(k) && k != "config") sub.opts[k] = val;
    sub.opts["out"] = o.path(name).string();
    if (sub.flags.count("control")) sub.flags["control"] = true;
    out << "== " << name << "\n";
    const int code = guarded([&] { return cmd.run(sub, out); }, err);
    parts[name] = {{"exit_code", code}, {"directory", name}};
    worst = std::max(worst, code);
  }
  json cj = header(v);
  cj["command"] = "couplings";
  cj["couplings"] = couplings_json(model);
  o.json_file("couplings.json", cj);
  parts["couplings"] = {{"exit_code", 0}, {"file", "couplings.json"}};
  if (const auto rs = root_system_for(model)) {
    json rj = header(v);
    rj["root_system"] = to_json(*rs);
    o.json_file("root_system.json", rj);
    parts["root_system"] = {{"file", "root_system.json"}};
  }
  json j = header(v);
  j["model"] = to_json(model);
  j["parts"] = parts;
  j["exit_code"] = worst;
  o.json_file("report.json", j);
  out << "== report written to " << v.str("out") << ", exit code " << worst << "\n";
  return worst;
}

// Appends "--key value" for config-file keys not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args, const Command& cmd) {
  const CLI::App& sub = *cmd.app;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file " + path);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") continue;
    const std::string long_name = "--" + name;
    const CLI::Option* option = sub.get_option_no_throw(long_name);
    if (!option) throw UsageError("config key '" + key + "' is not an option of " + sub.get_name());
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == long_name || a.rfind(long_name + "=", 0) == 0;
    });
    if (given) continue;
    if (cmd.values.flags.count(name)) {
      if (!value.is_boolean()) throw UsageError("config key '" + key + "' must be true or false");
      if (value.get<bool>()) args.push_back(long_name);
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.dump();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        text += (i ? "," : "") + (value[i].is_string() ? value[i].get<std::string>() : value[i].dump());
    } else {
      throw UsageError("config key '" + key + "' has an unsupported type");
    }
    args.push_back(long_name);
    args.push_back(text);
  }
  return args;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elliptic Calogero-Moser Lax pairs, flows and monodromy", "ellcm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::map<std::string, Command> registry;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    Command& c = registry[name];
    c.app = app.add_subcommand(name, help);
    c.values.command = name;
    return c;
  };

  {
    Command& c = add("identities", "check every functional identity and the heat equations");
    identity_options(c);
    flag(c, "list", "list the registered identities and exit");
    common_options(c);
    c.run = cmd_identities;
  }
  {
    Command& c = add("lax-check", "sweep Lax-equation and translation residuals");
    model_options(c);
    lax_options(c);
    common_options(c);
    c.run = cmd_lax_check;
  }
  {
    Command& c = add("evolve", "integrate a flow and monitor conserved quantities");
    model_options(c);
    state_options(c);
    evolve_options(c);
    common_options(c);
    c.run = cmd_evolve;
  }
  {
    Command& c = add("monodromy", "monodromy data and its drift along a tau path");
    model_options(c);
    state_options(c);
    monodromy_options(c);
    flag(c, "control", "also run the isospectral-flow control, which should drift");
    common_options(c);
    c.run = cmd_monodromy;
  }
  {
    Command& c = add("couplings", "print renormalized couplings and the Inozemtsev map");
    model_options(c);
    flag(c, "json", "print JSON instead of text");
    opt(c, "config", "", "JSON file of option values; command-line flags win");
    c.run = cmd_couplings;
  }
  {
    Command& c = add("report", "run every check and bundle the outputs in one directory");
    model_options(c);
    opt(c, "tau-path", "i:1.1i:0.05+1.1i", "polyline in tau for the monodromy drift");
    common_options(c);
    c.run = [&registry, &err](const Values& v, std::ostream& o) {
      return cmd_report(v, o, err, registry);
    };
  }

  std::vector<std::string> argv = args;
  for (const auto& a : args) {
    const auto it = registry.find(a);
    if (it == registry.end()) continue;
    const int code = guarded(
        [&] {
          argv = merge_config(args, it->second);
          return 0;
        },
        err);
    if (code) return code;
    break;
  }

  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (auto& [name, cmd] : registry)
    if (cmd.app->parsed()) return guarded([&] { return cmd.run(cmd.values, out); }, err);
  return kExitUsage;
}

}  // namespace ellcm
