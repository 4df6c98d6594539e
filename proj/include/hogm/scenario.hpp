#ifndef HOGM_SCENARIO_HPP
#define HOGM_SCENARIO_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "hogm/hogm.hpp"
#include "hogm/verify.hpp"

namespace hogm::scenario {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k{"ep", "olp", "wong", "wong2", "lp2", "ohp", "spline_bvp", "verify"};
  return k;
}

// ---------------------------------------------------------------------------
// Field access with JSON-pointer diagnostics

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw InputError((path.empty() ? std::string("/") : path) + ": " + msg);
}

inline const json& need(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) fail(path, "expected an object");
  if (!j.contains(key)) fail(join(path, key), "required field is missing");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline double number_or(const json& j, const std::string& path, const std::string& key, double dflt) {
  return j.contains(key) ? number(j.at(key), join(path, key)) : dflt;
}

inline double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "expected a positive number");
  return v;
}

inline std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline Vec vec(const json& j, const std::string& path, Eigen::Index n = -1) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  if (n >= 0 && static_cast<Eigen::Index>(j.size()) != n) {
    fail(path, "expected " + std::to_string(n) + " numbers, got " + std::to_string(j.size()));
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "/" + std::to_string(i));
  return v;
}

/// Nested rows or a flat row-major array.
inline Mat mat(const json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) fail(path, "expected a matrix (array of rows or flat row-major array)");
  Mat m(rows, cols);
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) fail(path, "expected " + std::to_string(rows) + " rows");
    for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = vec(j[r], path + "/" + std::to_string(r), cols).transpose();
    return m;
  }
  const Vec flat = vec(j, path, rows * cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat(r * cols + c);
  return m;
}

/// Symmetric positive-definite form: a diagonal list or a full matrix.
inline Inertia form(const json& j, const std::string& path, int n) {
  if (!j.is_array()) fail(path, "expected a diagonal list or a matrix");
  try {
    if (!j.empty() && j[0].is_array()) return Inertia(mat(j, path, n, n));
    if (static_cast<int>(j.size()) == n * n && n > 1) return Inertia(mat(j, path, n, n));
    return Inertia::diagonal(vec(j, path, n));
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (!what.empty() && what[0] == '/') throw;
    fail(path, what);
  }
}

inline std::optional<Inertia> optional_form(const json& j, const std::string& path, const std::string& key, int n) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return form(j.at(key), join(path, key), n);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Algebra, model and connection specifications

/// "so3", "se3", "so2", "abelian<n>" / "r<n>", or an object
/// {"name", "dim", "basis": [row-major matrices], "structure_constants"?}.
inline AlgebraPtr parse_group(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "so3" || name == "SO3") return LieAlgebra::so3();
    if (name == "se3" || name == "SE3") return LieAlgebra::se3();
    if (name == "so2" || name == "SO2") return LieAlgebra::so2();
    if (name == "u1" || name == "U1") return LieAlgebra::abelian(1);
    static const std::regex ab(R"((abelian|r|R)([1-9][0-9]?))");
    std::smatch m;
    if (std::regex_match(name, m, ab)) return LieAlgebra::abelian(std::stoi(m[2]));
    detail::fail(path, "unknown group '" + name + "' (expected so3, se3, so2, u1, abelian<n> or an object)");
  }
  if (!j.is_object()) detail::fail(path, "expected a group name or a group object");
  const std::string name = detail::text(detail::need(j, path, "name"), path + "/name");
  const json& jb = detail::need(j, path, "basis");
  if (!jb.is_array() || jb.empty()) detail::fail(path + "/basis", "expected a non-empty array of matrices");
  const int d = static_cast<int>(jb.size());
  if (j.contains("dim")) {
    const double dim = detail::number(j.at("dim"), path + "/dim");
    if (dim != d) detail::fail(path + "/dim", "does not match the number of basis matrices");
  }
  std::vector<Mat> basis;
  Eigen::Index r = -1;
  for (int i = 0; i < d; ++i) {
    const std::string p = path + "/basis/" + std::to_string(i);
    const json& jm = jb[static_cast<size_t>(i)];
    if (!jm.is_array() || jm.empty()) detail::fail(p, "expected a square matrix");
    Eigen::Index n = 0;
    if (jm[0].is_array()) {
      n = static_cast<Eigen::Index>(jm.size());
    } else {
      n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(jm.size()))));
      if (n * n != static_cast<Eigen::Index>(jm.size())) detail::fail(p, "flat basis matrix is not square");
    }
    if (r >= 0 && n != r) detail::fail(p, "basis matrices must share one size");
    r = n;
    basis.push_back(detail::mat(jm, p, n, n));
  }
  try {
    if (j.contains("structure_constants")) {
      const Vec c = detail::vec(j.at("structure_constants"), path + "/structure_constants", d * d * d);
      return std::make_shared<const LieAlgebra>(name, std::vector<double>(c.data(), c.data() + c.size()), basis);
    }
    return std::make_shared<const LieAlgebra>(name, basis);
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (!what.empty() && what[0] == '/') throw;
    detail::fail(path, what);
  }
}

inline Chirality parse_chirality(const json& s) {
  if (!s.contains("chirality")) return Chirality::Left;
  try {
    return chirality_from_string(detail::text(s.at("chirality"), "/chirality"));
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (!what.empty() && what[0] == '/') throw;
    detail::fail("/chirality", what);
  }
}

/// {"family": rigid_body | spline2 | quadratic2 | quadratic3, "inertia",
///  "inertia2" (quadratic2), "tau" and "bi_invariant" (spline2)}.
inline ReducedLagrangian parse_model(const json& j, const std::string& path, AlgebraPtr g, Chirality ch) {
  const std::string fam = detail::text(detail::need(j, path, "family"), path + "/family");
  const int d = g->dim();
  const Inertia I = detail::form(detail::need(j, path, "inertia"), path + "/inertia", d);
  try {
    if (fam == "rigid_body") return rigid_body(g, I, ch);
    if (fam == "spline2") {
      bool bi = false;
      if (j.contains("bi_invariant")) {
        if (!j.at("bi_invariant").is_boolean()) detail::fail(path + "/bi_invariant", "expected true or false");
        bi = j.at("bi_invariant").get<bool>();
      }
      return spline2(g, I, bi, detail::number_or(j, path, "tau", 0.0), ch);
    }
    if (fam == "quadratic2") {
      return quadratic2(g, I, detail::form(detail::need(j, path, "inertia2"), path + "/inertia2", d), ch);
    }
    if (fam == "quadratic3") return quadratic3(g, I, ch);
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (!what.empty() && what[0] == '/') throw;
    detail::fail(path, what);
  }
  detail::fail(path + "/family", "unknown model family '" + fam +
                                     "' (expected rigid_body, spline2, quadratic2 or quadratic3)");
}

/// "zero", {"type": "zero"}, {"type": "constant", "A": d x m},
/// {"type": "linear", "A0": d x m, "A_i": [m matrices d x m]} or
/// {"type": "abelian_symmetric_gauge", "B": field strength}.
inline Connection parse_connection(const json& j, const std::string& path, AlgebraPtr g, int m, Chirality ch) {
  const int d = g->dim();
  std::string type;
  if (j.is_string()) {
    type = j.get<std::string>();
  } else {
    type = detail::text(detail::need(j, path, "type"), path + "/type");
  }
  if (type == "zero") return zero_connection(g, m, ch);
  if (j.is_string()) detail::fail(path, "connection '" + type + "' needs parameters; use an object");
  if (type == "constant") return constant_connection(g, detail::mat(detail::need(j, path, "A"), path + "/A", d, m), ch);
  if (type == "linear") {
    const Mat A0 = detail::mat(detail::need(j, path, "A0"), path + "/A0", d, m);
    const json& ji = detail::need(j, path, "A_i");
    if (!ji.is_array() || static_cast<int>(ji.size()) != m) {
      detail::fail(path + "/A_i", "expected one matrix per base coordinate (" + std::to_string(m) + ")");
    }
    std::vector<Mat> Ai;
    for (int i = 0; i < m; ++i) Ai.push_back(detail::mat(ji[i], path + "/A_i/" + std::to_string(i), d, m));
    return linear_connection(g, A0, Ai, ch);
  }
  if (type == "abelian_symmetric_gauge") {
    if (m != 2) detail::fail(path, "abelian_symmetric_gauge needs a two-dimensional base");
    if (d != 1) detail::fail(path, "abelian_symmetric_gauge needs a one-dimensional group (u1)");
    return abelian_symmetric_gauge(detail::number(detail::need(j, path, "B"), path + "/B"), ch, g);
  }
  detail::fail(path + "/type", "unknown connection '" + type +
                                   "' (expected zero, constant, linear or abelian_symmetric_gauge)");
}

/// Either exponential coordinates (dim numbers) or a group matrix (n x n).
inline Mat parse_group_element(const json& j, const std::string& path, const LieAlgebra& g) {
  const Eigen::Index n = g.identity().rows();
  if (j.is_object()) {
    if (j.contains("exp")) return g.exp(detail::vec(j.at("exp"), path + "/exp", g.dim()));
    if (j.contains("matrix")) return detail::mat(j.at("matrix"), path + "/matrix", n, n);
    detail::fail(path, "expected {\"exp\": [...]} or {\"matrix\": [...]}");
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) return detail::mat(j, path, n, n);
  if (j.is_array() && static_cast<Eigen::Index>(j.size()) == g.dim() && g.dim() != n * n) {
    return g.exp(detail::vec(j, path, g.dim()));
  }
  if (j.is_array() && static_cast<Eigen::Index>(j.size()) == n * n) return detail::mat(j, path, n, n);
  detail::fail(path, "expected " + std::to_string(g.dim()) + " exponential coordinates or a " + std::to_string(n) +
                         "x" + std::to_string(n) + " matrix");
}

inline Jet parse_jet(const json& j, const std::string& path, size_t entries, int d) {
  if (!j.is_array() || j.size() != entries) {
    detail::fail(path, "expected " + std::to_string(entries) + " jet entries (xi, xi', ...)");
  }
  Jet out;
  for (size_t i = 0; i < entries; ++i) out.push_back(detail::vec(j[i], path + "/" + std::to_string(i), d));
  return out;
}

// ---------------------------------------------------------------------------
// Normalization and overrides

struct Overrides {
  std::optional<double> dt, T;
  std::optional<std::string> output;
};

/// Validates the envelope, fills defaults and applies overrides. The result
/// is what --dump-config prints; running it reproduces the same output.
inline json normalize(json s, const Overrides& o = {}) {
  if (!s.is_object()) detail::fail("", "scenario must be a JSON object");
  if (s.contains("schema_version")) {
    const double v = detail::number(s.at("schema_version"), "/schema_version");
    if (v != kSchemaVersion) detail::fail("/schema_version", "unsupported version (expected 1)");
  }
  s["schema_version"] = kSchemaVersion;
  const std::string kind = detail::text(detail::need(s, "", "kind"), "/kind");
  if (std::find(kinds().begin(), kinds().end(), kind) == kinds().end()) {
    detail::fail("/kind", "unknown kind '" + kind + "' (expected ep, olp, wong, wong2, lp2, ohp, spline_bvp or verify)");
  }
  if (kind == "verify") {
    if (!s.contains("suite")) s["suite"] = "all";
    detail::text(s.at("suite"), "/suite");
  } else {
    detail::need(s, "", "group");
    if (!s.contains("chirality")) s["chirality"] = "left";
    if (o.dt) s["dt"] = *o.dt;
    if (o.T) s["T"] = *o.T;
    if (!s.contains("dt")) s["dt"] = 1e-3;
    if (!s.contains("T")) s["T"] = kind == "spline_bvp" ? 1.0 : 10.0;
    detail::positive(s.at("dt"), "/dt");
    detail::positive(s.at("T"), "/T");
  }
  if (!s.contains("seed")) s["seed"] = 42u;
  if (!s.at("seed").is_number_integer() || s.at("seed").get<std::int64_t>() < 0) {
    detail::fail("/seed", "expected a non-negative integer");
  }
  if (o.output) s["output"] = *o.output;
  return s;
}

// ---------------------------------------------------------------------------
// Runs

/// Time series as a header plus rows, and the JSON summary.
struct Output {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::string>> text_rows;  // used by verify
  json summary;
};

namespace detail {

inline void add_names(std::vector<std::string>& h, const std::string& prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) h.push_back(prefix + "_" + std::to_string(i));
}

inline void add_values(std::vector<double>& row, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
}

inline void add_matrix(std::vector<double>& row, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
}

inline json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vec(m.row(r).transpose())));
  return rows;
}

inline json to_json(const Jet& j) {
  json out = json::array();
  for (const auto& v : j) out.push_back(to_json(v));
  return out;
}

/// Max |x - x0| over a series.
inline double drift(const std::vector<double>& xs) {
  double d = 0.0;
  for (double x : xs) d = std::max(d, std::abs(x - xs.front()));
  return d;
}

inline json extrema(const std::vector<double>& xs) {
  return {{"min", *std::min_element(xs.begin(), xs.end())}, {"max", *std::max_element(xs.begin(), xs.end())}};
}

inline IntegratorConfig config(const json& s) { return IntegratorConfig{s.at("dt").get<double>()}; }

inline Output ep_output(const ReducedLagrangian& m, const EPTrajectory& tr) {
  const auto& g = *m.algebra;
  const Eigen::Index n = g.identity().rows();
  Output out;
  out.header.push_back("t");
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out.header.push_back("g_" + std::to_string(r) + std::to_string(c));
  for (int j = 0; j < m.full_jet_size(); ++j) add_names(out.header, "xi" + std::to_string(j), g.dim());
  add_names(out.header, "m", g.dim());
  out.header.push_back("energy");
  out.header.push_back("noether_drift");
  const bool has_xidd = m.full_jet_size() >= 3;
  if (has_xidd) out.header.push_back("xi_ddot_norm");

  const Vec J0 = noether_momentum(g, m.chirality, tr.states.front());
  std::vector<double> energy, noether, xidd;
  for (size_t i = 0; i < tr.states.size(); ++i) {
    const EPState& s = tr.states[i];
    const Jet full = ep_full_jet(m, s);
    std::vector<double> row{tr.t[i]};
    add_matrix(row, s.g);
    for (const auto& v : full) add_values(row, v);
    add_values(row, s.m);
    energy.push_back(reduced_energy(m, full));
    noether.push_back((noether_momentum(g, m.chirality, s) - J0).norm());
    row.push_back(energy.back());
    row.push_back(noether.back());
    if (has_xidd) {
      xidd.push_back(full[2].norm());
      row.push_back(xidd.back());
    }
    out.rows.push_back(std::move(row));
  }
  const EPState& last = tr.states.back();
  out.summary["final_state"] = {{"t", tr.t.back()},
                                {"g", to_json(last.g)},
                                {"jet", to_json(ep_full_jet(m, last))},
                                {"m", to_json(last.m)}};
  json mon = {{"energy_drift", drift(energy)},
              {"noether_drift", *std::max_element(noether.begin(), noether.end())},
              {"group_residual", g.group_residual(last.g)}};
  if (has_xidd) {
    mon["xi_ddot_norm"] = extrema(xidd);
    mon["xi_ddot_norm_drift"] = drift(xidd);
  }
  out.summary["monitors"] = mon;
  return out;
}

inline void add_lp_header(Output& out, const LPState& s) {
  add_names(out.header, "rho", s.rho.size());
  add_names(out.header, "rho_dot", s.rho_dot.size());
  add_names(out.header, "rho_ddot", s.rho_ddot.size());
  add_names(out.header, "rho_dddot", s.rho_dddot.size());
  add_names(out.header, "sigma", s.sigma.size());
  add_names(out.header, "sigma_dot", s.sigma_dot.size());
  add_names(out.header, "pi0", s.pi0.size());
}

inline json lp_json(const LPState& s) {
  json j = {{"rho", to_json(s.rho)}, {"rho_dot", to_json(s.rho_dot)}, {"pi0", to_json(s.pi0)}};
  if (s.rho_ddot.size()) j["rho_ddot"] = to_json(s.rho_ddot);
  if (s.rho_dddot.size()) j["rho_dddot"] = to_json(s.rho_dddot);
  if (s.sigma.size()) j["sigma"] = to_json(s.sigma);
  if (s.sigma_dot.size()) j["sigma_dot"] = to_json(s.sigma_dot);
  return j;
}

/// Reads the LP slots; rho_ddot/rho_dddot only when `base2`, sigma/sigma_dot only when `fiber2`.
inline LPState parse_lp_state(const json& s, int m, int d, bool base2, bool fiber2, const char* charge_key) {
  const json& ji = need(s, "", "initial");
  LPState st;
  st.rho = vec(need(ji, "/initial", "rho"), "/initial/rho", m);
  st.rho_dot = vec(need(ji, "/initial", "rho_dot"), "/initial/rho_dot", m);
  st.pi0 = vec(need(ji, "/initial", charge_key), std::string("/initial/") + charge_key, d);
  auto slot = [&](const char* key, bool wanted, Vec& dst, int n) {
    if (wanted) {
      dst = vec(need(ji, "/initial", key), std::string("/initial/") + key, n);
    } else if (ji.contains(key)) {
      throw DegeneracyError(std::string("/initial/") + key +
                            ": slot has no equation for these parameters (its length or fiber term is zero)");
    }
  };
  slot("rho_ddot", base2, st.rho_ddot, m);
  slot("rho_dddot", base2, st.rho_dddot, m);
  slot("sigma", fiber2, st.sigma, d);
  slot("sigma_dot", fiber2, st.sigma_dot, d);
  return st;
}

inline void lp_rows(Output& out, const SlotTrajectory<LPState>& tr, const std::function<double(const LPState&)>& energy) {
  out.header.insert(out.header.begin(), "t");
  out.header.push_back("energy");
  std::vector<double> e;
  for (size_t i = 0; i < tr.states.size(); ++i) {
    std::vector<double> row{tr.t[i]};
    for (const Vec* v : tr.states[i].slots()) add_values(row, *v);
    e.push_back(energy(tr.states[i]));
    row.push_back(e.back());
    out.rows.push_back(std::move(row));
  }
  out.summary["final_state"] = lp_json(tr.states.back());
  out.summary["final_state"]["t"] = tr.t.back();
  out.summary["monitors"] = {{"energy_drift", drift(e)}};
}

struct BundleSetup {
  AlgebraPtr group;
  Chirality ch;
  int m;
  BaseMetric gamma;
  Inertia kappa;
  Connection conn;
};

inline BundleSetup parse_bundle(const json& s) {
  const AlgebraPtr g = parse_group(s.at("group"), "/group");
  const Chirality ch = parse_chirality(s);
  const Vec base = vec(need(s, "", "base_metric"), "/base_metric");
  const json& jb = s.at("base_metric");
  int m = static_cast<int>(base.size());
  if (!jb.empty() && jb[0].is_array()) m = static_cast<int>(jb.size());
  if (m < 1) fail("/base_metric", "needs at least one base coordinate");
  const BaseMetric gamma(form(jb, "/base_metric", m));
  const Inertia kappa = form(need(s, "", "fiber_metric"), "/fiber_metric", g->dim());
  const Connection c = parse_connection(need(s, "", "connection"), "/connection", g, m, ch);
  return {g, ch, m, gamma, kappa, c};
}

inline Wong2Params parse_wong2_params(const json& s, const BundleSetup& b) {
  const double l1 = number(need(s, "", "lambda1"), "/lambda1");
  const double l2 = number(need(s, "", "lambda2"), "/lambda2");
  if (l1 < 0.0) fail("/lambda1", "must be >= 0");
  if (l2 < 0.0) fail("/lambda2", "must be >= 0");
  return {b.gamma, b.kappa, b.conn, l1, l2};
}

}  // namespace detail

inline Output run_ep(const json& s) {
  const AlgebraPtr g = parse_group(s.at("group"), "/group");
  const Chirality ch = parse_chirality(s);
  const ReducedLagrangian m = parse_model(detail::need(s, "", "model"), "/model", g, ch);
  const json& ji = detail::need(s, "", "initial");
  const Jet jet = parse_jet(detail::need(ji, "/initial", "jet"), "/initial/jet", static_cast<size_t>(m.full_jet_size()), g->dim());
  const Mat g0 = ji.contains("g") ? parse_group_element(ji.at("g"), "/initial/g", *g) : g->identity();
  const EPTrajectory tr = simulate_ep(m, make_ep_state(m, g0, jet), s.at("T").get<double>(), detail::config(s));
  return detail::ep_output(m, tr);
}

inline Output run_olp(const json& s) {
  const AlgebraPtr g = parse_group(s.at("group"), "/group");
  const Chirality ch = parse_chirality(s);
  const ReducedLagrangian m = parse_model(detail::need(s, "", "model"), "/model", g, ch);
  const json& ji = detail::need(s, "", "initial");
  const Jet jet = parse_jet(detail::need(ji, "/initial", "jet"), "/initial/jet", static_cast<size_t>(m.full_jet_size()), g->dim());
  const ReducedHamiltonian h = hamiltonian(m);
  const OLPTrajectory tr = simulate_olp(h, legendre(m, jet), s.at("T").get<double>(), detail::config(s));

  Output out;
  out.header.push_back("t");
  for (int j = 0; j + 1 < m.order; ++j) detail::add_names(out.header, "xi" + std::to_string(j), g->dim());
  for (int j = 1; j < m.order; ++j) detail::add_names(out.header, "pi" + std::to_string(j), g->dim());
  detail::add_names(out.header, "pi0", g->dim());
  out.header.push_back("h");
  out.header.push_back("pi0_norm");
  std::vector<double> hs, cs;
  for (size_t i = 0; i < tr.states.size(); ++i) {
    const OLPState& z = tr.states[i];
    std::vector<double> row{tr.t[i]};
    detail::add_values(row, hogm::detail::pack_olp(z));
    hs.push_back(h.eval(z));
    cs.push_back(z.pi0.norm());
    row.push_back(hs.back());
    row.push_back(cs.back());
    out.rows.push_back(std::move(row));
  }
  const OLPState& z = tr.states.back();
  out.summary["final_state"] = {
      {"t", tr.t.back()}, {"xi", detail::to_json(z.xi)}, {"pi", detail::to_json(z.pi)}, {"pi0", detail::to_json(z.pi0)}};
  json mon = {{"energy_drift", detail::drift(hs)}};
  // |pi0| is a Casimir only for so(3)-like algebras; reported where it applies.
  if (g->kind() == GroupKind::SO3) mon["casimir_drift"] = detail::drift(cs);
  out.summary["monitors"] = mon;
  return out;
}

inline Output run_wong(const json& s) {
  const detail::BundleSetup b = detail::parse_bundle(s);
  const json& ji = detail::need(s, "", "initial");
  const WongState w0{detail::vec(detail::need(ji, "/initial", "rho"), "/initial/rho", b.m),
                     detail::vec(detail::need(ji, "/initial", "rho_dot"), "/initial/rho_dot", b.m),
                     detail::vec(detail::need(ji, "/initial", "mu"), "/initial/mu", b.group->dim())};
  const auto tr = simulate<WongState>(
      [&](const WongState& st) { return wong_vector_field(b.gamma, b.kappa, b.conn, st); }, w0,
      s.at("T").get<double>(), detail::config(s));
  Output out;
  out.header.push_back("t");
  detail::add_names(out.header, "rho", b.m);
  detail::add_names(out.header, "rho_dot", b.m);
  detail::add_names(out.header, "mu", b.group->dim());
  out.header.push_back("energy");
  out.header.push_back("charge_norm");
  std::vector<double> e, q;
  for (size_t i = 0; i < tr.states.size(); ++i) {
    const WongState& st = tr.states[i];
    std::vector<double> row{tr.t[i]};
    for (const Vec* v : st.slots()) detail::add_values(row, *v);
    e.push_back(wong_energy(b.gamma, b.kappa, st));
    q.push_back(std::sqrt(b.kappa.dual_norm2(st.mu)));
    row.push_back(e.back());
    row.push_back(q.back());
    out.rows.push_back(std::move(row));
  }
  const WongState& last = tr.states.back();
  out.summary["final_state"] = {{"t", tr.t.back()},
                                {"rho", detail::to_json(last.rho)},
                                {"rho_dot", detail::to_json(last.rho_dot)},
                                {"mu", detail::to_json(last.mu)}};
  out.summary["monitors"] = {{"energy_drift", detail::drift(e)}, {"charge_norm_drift", detail::drift(q)}};
  return out;
}

inline Output run_wong2(const json& s) {
  const detail::BundleSetup b = detail::parse_bundle(s);
  const Wong2Params p = detail::parse_wong2_params(s, b);
  const LPState l0 = detail::parse_lp_state(s, b.m, b.group->dim(), p.lambda1 > 0.0, p.lambda2 > 0.0, "pi0");
  const auto tr = simulate<LPState>([&](const LPState& st) { return wong2_vector_field(p, st); }, l0,
                                    s.at("T").get<double>(), detail::config(s));
  Output out;
  detail::add_lp_header(out, l0);
  detail::lp_rows(out, tr, [&](const LPState& st) { return wong2_energy(p, st); });
  return out;
}

inline Output run_lp2(const json& s) {
  const AlgebraPtr g = parse_group(s.at("group"), "/group");
  const Chirality ch = parse_chirality(s);
  const json& jl = detail::need(s, "", "lagrangian");
  const json& jg1 = detail::need(jl, "/lagrangian", "G1");
  int m = static_cast<int>(jg1.is_array() ? jg1.size() : 0);
  if (m < 1) detail::fail("/lagrangian/G1", "expected a diagonal list or a matrix");
  const int d = g->dim();
  LP2Lagrangian lag;
  lag.G1 = detail::form(jg1, "/lagrangian/G1", m).matrix();
  if (auto f = detail::optional_form(jl, "/lagrangian", "G2", m)) lag.G2 = f->matrix();
  lag.K1 = detail::form(detail::need(jl, "/lagrangian", "K1"), "/lagrangian/K1", d).matrix();
  if (auto f = detail::optional_form(jl, "/lagrangian", "K2", d)) lag.K2 = f->matrix();
  const Connection c = parse_connection(detail::need(s, "", "connection"), "/connection", g, m, ch);
  const LPState l0 = detail::parse_lp_state(s, m, d, lag.G2.size() > 0, lag.K2.size() > 0, "pi0");
  const auto tr = simulate<LPState>([&](const LPState& st) { return lp2_vector_field(lag, c, st); }, l0,
                                    s.at("T").get<double>(), detail::config(s));
  Output out;
  detail::add_lp_header(out, l0);
  detail::lp_rows(out, tr, [&](const LPState& st) { return lp2_energy(lag, st); });
  return out;
}

/// OHP flow of the wong (k = 1) or wong2 (k = 2) Hamiltonian, started from
/// Lagrangian initial data mapped through the Legendre transform.
inline Output run_ohp(const json& s) {
  const detail::BundleSetup b = detail::parse_bundle(s);
  const std::string which = s.contains("hamiltonian") ? detail::text(s.at("hamiltonian"), "/hamiltonian") : "wong2";
  BundleHamiltonian h;
  OHPState z0;
  if (which == "wong2") {
    const Wong2Params p = detail::parse_wong2_params(s, b);
    h = wong2_hamiltonian(p);
    z0 = wong2_legendre(p, detail::parse_lp_state(s, b.m, b.group->dim(), true, true, "pi0"));
  } else if (which == "wong") {
    hogm::detail::require_ad_invariant(b.kappa, *b.group, "ohp");
    h = wong_hamiltonian(b.gamma, b.kappa);
    const json& ji = detail::need(s, "", "initial");
    z0.rho = detail::vec(detail::need(ji, "/initial", "rho"), "/initial/rho", b.m);
    z0.gamma0 = b.gamma.flat(detail::vec(detail::need(ji, "/initial", "rho_dot"), "/initial/rho_dot", b.m));
    z0.pi0 = detail::vec(detail::need(ji, "/initial", "pi0"), "/initial/pi0", b.group->dim());
  } else {
    detail::fail("/hamiltonian", "unknown Hamiltonian '" + which + "' (expected wong or wong2)");
  }
  const auto tr = simulate<OHPState>([&](const OHPState& z) { return ohp_vector_field(h, b.conn, z); }, z0,
                                     s.at("T").get<double>(), detail::config(s));
  Output out;
  out.header.push_back("t");
  const char* names[] = {"rho", "rho_dot", "gamma0", "gamma1", "sigma", "pi1", "pi0"};
  auto slots = z0.slots();
  for (size_t i = 0; i < slots.size(); ++i) detail::add_names(out.header, names[i], slots[i]->size());
  out.header.push_back("h");
  std::vector<double> hs;
  for (size_t i = 0; i < tr.states.size(); ++i) {
    std::vector<double> row{tr.t[i]};
    for (const Vec* v : tr.states[i].slots()) detail::add_values(row, *v);
    hs.push_back(h.eval(tr.states[i]));
    row.push_back(hs.back());
    out.rows.push_back(std::move(row));
  }
  json fin = {{"t", tr.t.back()}};
  auto last = tr.states.back().slots();
  for (size_t i = 0; i < last.size(); ++i) {
    if (last[i]->size()) fin[names[i]] = detail::to_json(*last[i]);
  }
  out.summary["final_state"] = fin;
  out.summary["monitors"] = {{"energy_drift", detail::drift(hs)}};
  return out;
}

inline Output run_spline_bvp(const json& s) {
  const AlgebraPtr g = parse_group(s.at("group"), "/group");
  const Chirality ch = parse_chirality(s);
  json model = s.contains("model") ? s.at("model") : json{{"family", "spline2"}, {"inertia", std::vector<double>(g->dim(), 1.0)}};
  if (!model.contains("family")) model["family"] = "spline2";
  if (model.at("family") != "spline2") detail::fail("/model/family", "spline_bvp needs the spline2 family");
  const json& jb = detail::need(s, "", "boundary");
  ShootingProblem p{.model = parse_model(model, "/model", g, ch),
                    .g0 = jb.contains("g0") ? parse_group_element(jb.at("g0"), "/boundary/g0", *g) : g->identity(),
                    .g1 = parse_group_element(detail::need(jb, "/boundary", "g1"), "/boundary/g1", *g),
                    .v0 = jb.contains("v0") ? detail::vec(jb.at("v0"), "/boundary/v0", g->dim()) : Vec::Zero(g->dim()),
                    .v1 = jb.contains("v1") ? detail::vec(jb.at("v1"), "/boundary/v1", g->dim()) : Vec::Zero(g->dim())};
  p.T = s.at("T").get<double>();
  p.dt = s.at("dt").get<double>();
  p.tol = detail::number_or(s, "", "tol", p.tol);
  if (!(p.tol > 0.0)) detail::fail("/tol", "expected a positive number");
  if (s.contains("max_iter")) {
    if (!s.at("max_iter").is_number_integer() || s.at("max_iter").get<std::int64_t>() < 0) detail::fail("/max_iter", "expected a non-negative integer");
    p.max_iter = s.at("max_iter").get<int>();
  }
  const ShootingResult r = shoot_spline(p);
  Output out = detail::ep_output(p.model, r.trajectory);
  out.summary["solution"] = {{"initial_jet", detail::to_json(r.initial_jet)},
                             {"iterations", r.iterations},
                             {"residual", r.residual},
                             {"residual_history", r.residual_history}};
  out.summary["monitors"]["residual"] = r.residual;
  return out;
}

inline Output run_verify(const json& s) {
  const std::string suite = s.at("suite").get<std::string>();
  const verify::Report rep = verify::run_suite(suite, s.at("seed").get<std::uint64_t>());
  Output out;
  out.header = {"suite", "check", "value", "op", "tolerance", "pass"};
  json checks = json::array();
  bool ok = true;
  for (const auto& c : rep) {
    char v[32], t[32];
    std::snprintf(v, sizeof v, "%.17g", c.value);
    std::snprintf(t, sizeof t, "%.17g", c.tol);
    out.text_rows.push_back({c.suite, c.name, v, c.op(), t, c.pass() ? "1" : "0"});
    checks.push_back({{"suite", c.suite}, {"check", c.name}, {"value", c.value}, {"op", c.op()},
                      {"tolerance", c.tol}, {"pass", c.pass()}});
    ok = ok && c.pass();
  }
  out.summary["checks"] = checks;
  out.summary["passed"] = ok;
  return out;
}

/// Dispatches a normalized scenario. The summary carries schema_version,
/// kind and the monitors of the run.
inline Output run(const json& s) {
  const std::string kind = s.at("kind").get<std::string>();
  Output out;
  if (kind == "ep") out = run_ep(s);
  else if (kind == "olp") out = run_olp(s);
  else if (kind == "wong") out = run_wong(s);
  else if (kind == "wong2") out = run_wong2(s);
  else if (kind == "lp2") out = run_lp2(s);
  else if (kind == "ohp") out = run_ohp(s);
  else if (kind == "spline_bvp") out = run_spline_bvp(s);
  else out = run_verify(s);
  out.summary["schema_version"] = kSchemaVersion;
  out.summary["kind"] = kind;
  if (kind != "verify") {
    out.summary["T"] = s.at("T");
    out.summary["dt"] = s.at("dt");
    out.summary["steps"] = out.rows.empty() ? 0 : out.rows.size() - 1;
  }
  return out;
}

/// CSV with a header row; numbers printed with 17 significant digits so
/// reruns are byte-identical.
inline std::string to_csv(const Output& o) {
  std::string s;
  for (size_t i = 0; i < o.header.size(); ++i) s += (i ? "," : "") + o.header[i];
  s += '\n';
  char buf[40];
  for (const auto& row : o.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      if (i) s += ',';
      s += buf;
    }
    s += '\n';
  }
  for (const auto& row : o.text_rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      const bool quote = row[i].find_first_of(",\"") != std::string::npos;
      std::string cell = row[i];
      if (quote) {
        std::string q = "\"";
        for (char c : cell) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        cell = q + "\"";
      }
      if (i) s += ',';
      s += cell;
    }
    s += '\n';
  }
  return s;
}

}  // namespace hogm::scenario

#endif  // HOGM_SCENARIO_HPP
