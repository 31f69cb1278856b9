#include "ellcm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ellcm {

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

cd parse_complex(const std::string& text) {
  const std::string s = strip(text);
  if (s.empty()) throw std::invalid_argument("empty complex literal");
  cd total = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    double sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    }
    double mag = 1;
    bool has_number = false;
    if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
      const char* begin = s.c_str() + i;
      char* end = nullptr;
      mag = std::strtod(begin, &end);
      if (end == begin) throw std::invalid_argument("bad complex literal: " + text);
      i += static_cast<std::size_t>(end - begin);
      has_number = true;
    }
    bool imag = false;
    if (i < s.size() && (s[i] == 'i' || s[i] == 'j')) {
      imag = true;
      ++i;
    }
    if (!has_number && !imag) throw std::invalid_argument("bad complex literal: " + text);
    if (i < s.size() && s[i] != '+' && s[i] != '-')
      throw std::invalid_argument("bad complex literal: " + text);
    total += imag ? cd(0, sign * mag) : cd(sign * mag, 0);
  }
  return total;
}

std::string format_complex(cd z) {
  if (z.imag() == 0) return shortest(z.real());
  std::string im = shortest(z.imag());
  if (im.front() != '-') im = "+" + im;
  return shortest(z.real()) + im + "i";
}

std::pair<cd, cd> parse_range(const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) throw std::invalid_argument("range must look like start..end");
  return {parse_complex(text.substr(0, pos)), parse_complex(text.substr(pos + 2))};
}

std::vector<cd> parse_points(const std::string& text) {
  std::vector<cd> out;
  for (const auto& part : split(strip(text), ":;")) out.push_back(parse_complex(part));
  if (out.size() < 2) throw std::invalid_argument("a path needs at least two points");
  return out;
}

Eigen::VectorXcd parse_vector(const std::string& text) {
  const auto parts = split(strip(text), ",");
  Eigen::VectorXcd v(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) v[i] = parse_complex(parts[i]);
  return v;
}

json to_json(cd z) { return json::array({z.real(), z.imag()}); }

cd complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_string()) return parse_complex(j.get<std::string>());
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("complex numbers are [re, im] pairs");
}

json to_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
  return a;
}

json to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXcd vector_from_json(const json& j) {
  Eigen::VectorXcd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = complex_from_json(j[i]);
  return v;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXcd m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw std::invalid_argument("ragged matrix");
    for (std::size_t c = 0; c < j[r].size(); ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

json to_json(const ModelSpec& model) {
  json j;
  j["kind"] = kind_name(model.kind());
  j["rank"] = model.rank();
  if (model.root_system()) j["family"] = family_name(model.root_system()->family());
  const auto& c = model.couplings();
  json cj = json::object();
  switch (model.kind()) {
    case ModelKind::AVector:
    case ModelKind::SimplyLaced:
      cj["g"] = to_json(c.g);
      break;
    case ModelKind::BCShort:
      cj["g_m"] = to_json(c.g_m);
      cj["g_l"] = to_json(c.g_l);
      cj["g_s"] = to_json(c.g_s);
      break;
    case ModelKind::TwistedBC:
      cj["g_m"] = to_json(c.g_m);
      cj["g_l1"] = to_json(c.g_l1);
      cj["g_l2"] = to_json(c.g_l2);
      cj["g_s1"] = to_json(c.g_s1);
      cj["g_s2"] = to_json(c.g_s2);
      break;
    default:
      break;
  }
  j["couplings"] = cj;
  const auto& e = model.effective();
  if (model.kind() == ModelKind::BCShort) j["effective"] = {{"gs_sq", to_json(e.gs_sq)}};
  if (model.kind() == ModelKind::TwistedBC)
    j["effective"] = {{"gl2_sq", to_json(e.gl2_sq)},
                      {"gs1_sq", to_json(e.gs1_sq)},
                      {"gs2_sq", to_json(e.gs2_sq)}};
  return j;
}

ModelSpec model_from_json(const json& j) {
  const auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown model kind " + j.at("kind").dump());
  const int rank = j.at("rank").get<int>();
  const json c = j.value("couplings", json::object());
  auto g = [&](const char* key) { return c.contains(key) ? complex_from_json(c[key]) : cd(0); };
  auto roots = [&] {
    const auto f = parse_family(j.value("family", std::string("A")));
    if (!f) throw std::invalid_argument("unknown root family");
    return build_root_system(*f, rank);
  };
  switch (*kind) {
    case ModelKind::AVector: return ModelSpec::a_vector(rank, g("g"));
    case ModelKind::SimplyLaced: return ModelSpec::simply_laced(roots(), g("g"));
    case ModelKind::BCShort: return ModelSpec::bc_short(rank, g("g_m"), g("g_l"), g("g_s"));
    case ModelKind::TwistedBC:
      return ModelSpec::twisted_bc(rank, g("g_m"), g("g_l1"), g("g_l2"), g("g_s1"), g("g_s2"));
    case ModelKind::SpinSL: return ModelSpec::spin_sl(rank);
    case ModelKind::SpinSimplyLaced: return ModelSpec::spin_simply_laced(roots());
  }
  throw std::logic_error("unreachable");
}

json to_json(const PhaseState& s) {
  json j;
  j["q"] = to_json(s.q);
  j["p"] = to_json(s.p);
  if (s.F.size()) j["F"] = to_json(s.F);
  return j;
}

PhaseState state_from_json(const ModelSpec& model, const json& j) {
  Eigen::MatrixXcd F;
  if (j.contains("F")) F = matrix_from_json(j["F"]);
  return make_state(model, vector_from_json(j.at("q")), vector_from_json(j.at("p")), F);
}

json to_json(const RootSystem& rs) {
  auto root_json = [](const Root& r) {
    json a = json::array();
    for (const auto& x : r) a.push_back(x.str());
    return a;
  };
  json j;
  j["family"] = family_name(rs.family());
  j["rank"] = rs.rank();
  j["dimension"] = rs.dimension();
  json roots = json::array();
  for (const auto& r : rs.roots()) roots.push_back(root_json(r));
  j["roots"] = roots;
  json simple = json::array();
  for (const auto& r : rs.simple_roots()) simple.push_back(root_json(r));
  j["simple_roots"] = simple;
  json orbits = json::object();
  for (auto o : {Orbit::Single, Orbit::Long, Orbit::Middle, Orbit::Short}) {
    const auto members = rs.orbit(o);
    if (members.empty()) continue;
    json a = json::array();
    for (const auto& r : members) a.push_back(root_json(r));
    orbits[orbit_name(o)] = a;
  }
  j["orbits"] = orbits;
  return j;
}

json to_json(const ConservedReport& r) {
  json j;
  j["mode"] = mode_name(r.mode);
  j["conservation_expected"] = r.conservation_expected();
  j["hamiltonian_drift"] = r.hamiltonian_drift;
  json t = json::array();
  for (const auto& p : r.traces)
    t.push_back({{"z", to_json(p.z)}, {"power", p.power}, {"drift", p.drift}});
  j["trace_drift"] = t;
  j["eigenvalue_drift"] = r.eigenvalue_drift;
  j["spin_norm_max"] = r.spin_norm_max;
  return j;
}

json to_json(const MonodromyData& d) {
  json j;
  j["tau"] = to_json(d.tau);
  j["z0"] = to_json(d.z0);
  j["convention"] = "Y(z0) = 1, Y(z+1) = Y(z) Gamma_alpha, Y(z+tau) = exp(2 pi i Q) Y(z) Gamma_beta";
  j["gamma_alpha"] = to_json(d.gamma_alpha);
  j["gamma_beta"] = to_json(d.gamma_beta);
  json loc = json::array();
  for (std::size_t i = 0; i < d.gamma_local.size(); ++i)
    loc.push_back({{"point", to_json(d.points[i])}, {"gamma", to_json(d.gamma_local[i])}});
  j["gamma_local"] = loc;
  j["liouville_residual"] = d.liouville_residual;
  return j;
}

json to_json(const MonodromyInvariants& inv) {
  json j = json::array();
  for (std::size_t i = 0; i < inv.labels.size(); ++i)
    j.push_back({{"label", inv.labels[i]},
                 {"eigenvalues", to_json(inv.eigenvalues[i])},
                 {"trace", to_json(inv.traces[i])}});
  return j;
}

json to_json(const DriftReport& r) {
  json j;
  json taus = json::array();
  for (const auto& t : r.taus) taus.push_back(to_json(t));
  j["taus"] = taus;
  j["drift"] = r.drift;
  j["max_drift"] = r.max_drift;
  j["initial"] = to_json(r.initial);
  j["final"] = to_json(r.final);
  return j;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.samples.empty()) return;
  const auto& first = traj.front();
  out << "s,time_re,time_im,tau_re,tau_im,H_re,H_im,spin_norm";
  for (Eigen::Index j = 0; j < first.state.q.size(); ++j)
    out << ",q" << j << "_re,q" << j << "_im";
  for (Eigen::Index j = 0; j < first.state.p.size(); ++j)
    out << ",p" << j << "_re,p" << j << "_im";
  for (std::size_t i = 0; i < traj.probes.size(); ++i)
    for (int k : traj.probes[i].powers) out << ",tr" << k << "_z" << i << "_re,tr" << k << "_z" << i << "_im";
  out << "\n";
  auto c = [&](cd z) { out << "," << shortest(z.real()) << "," << shortest(z.imag()); };
  for (const auto& smp : traj.samples) {
    out << shortest(smp.s);
    c(smp.time);
    c(smp.tau);
    c(smp.monitor.hamiltonian);
    out << "," << shortest(smp.monitor.spin_norm);
    for (Eigen::Index j = 0; j < smp.state.q.size(); ++j) c(smp.state.q[j]);
    for (Eigen::Index j = 0; j < smp.state.p.size(); ++j) c(smp.state.p[j]);
    for (const auto& tr : smp.monitor.traces)
      for (const auto& t : tr) c(t);
    out << "\n";
  }
}

std::string drift_svg(const std::vector<double>& s, const std::vector<double>& drift,
                      const std::string& title) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  std::vector<double> y;
  for (double d : drift) y.push_back(std::log10(std::max(d, 1e-18)));
  double lo = -18, hi = 0;
  if (!y.empty()) {
    lo = std::floor(*std::min_element(y.begin(), y.end())) - 1;
    hi = std::ceil(*std::max_element(y.begin(), y.end())) + 1;
  }
  const double s0 = s.empty() ? 0 : s.front(), s1 = s.empty() ? 1 : s.back();
  auto px = [&](double v) { return L + (W - L - R) * (v - s0) / (s1 > s0 ? s1 - s0 : 1.0); };
  auto py = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); ++e) {
    o << "<line x1=\"" << L - 4 << "\" y1=\"" << py(e) << "\" x2=\"" << L << "\" y2=\"" << py(e)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << L - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e
      << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = s0 + (s1 - s0) * k / 4.0;
    o << "<text x=\"" << px(v) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << std::setprecision(2) << v << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\">path parameter s</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">max invariant drift</text>\n";
  o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < y.size() && i < s.size(); ++i)
    o << (i ? " " : "") << px(s[i]) << "," << py(y[i]);
  o << "\"/>\n";
  for (std::size_t i = 0; i < y.size() && i < s.size(); ++i)
    o << "<circle cx=\"" << px(s[i]) << "\" cy=\"" << py(y[i]) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace ellcm
