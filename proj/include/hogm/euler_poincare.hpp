#ifndef HOGM_EULER_POINCARE_HPP
#define HOGM_EULER_POINCARE_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hogm/algebra.hpp"
#include "hogm/core.hpp"
#include "hogm/integrate.hpp"
#include "hogm/models.hpp"

namespace hogm {

/// Reduced state (g, xi, ..., xi^(2k-3), m) of a kth-order Euler-Poincare
/// system, where m = sum_j (-1)^j d^j/dt^j dl/dxi^(j). The missing top
/// derivative xi^(2k-2) is recovered from m through the model's `accel`.
/// For k = 1 the jet is empty and xi = accel({}, m).
///
/// The same struct carries time derivatives (g holds g').
struct EPState {
  Mat g;
  Jet jet;
  Vec m;
};

/// xi at the state.
inline Vec ep_xi(const ReducedLagrangian& model, const EPState& s) {
  if (model.order == 1) return model.accel({}, s.m);
  return s.jet.at(0);
}

/// Extended jet (xi, ..., xi^(2k-2)) at the state.
inline Jet ep_full_jet(const ReducedLagrangian& model, const EPState& s) {
  Jet full = s.jet;
  Vec top = model.accel(s.jet, s.m);
  if (model.order == 1) return {top};
  full.push_back(std::move(top));
  return full;
}

/// Builds an EPState whose m is consistent with `full_jet` (2k-1 entries).
inline EPState make_ep_state(const ReducedLagrangian& model, const Mat& g, const Jet& full_jet) {
  if (static_cast<int>(full_jet.size()) != model.full_jet_size()) {
    throw InputError("make_ep_state: expected " + std::to_string(model.full_jet_size()) +
                     " jet entries, got " + std::to_string(full_jet.size()));
  }
  for (const auto& v : full_jet) require_dim(v, model.dim(), "make_ep_state");
  EPState s;
  s.g = g;
  s.jet.assign(full_jet.begin(), full_jet.begin() + model.lower_jet_size());
  s.m = model.momenta(full_jet)[0];
  return s;
}

/// Right side of (d/dt +/- ad*_xi) m = 0 together with the jet shift and
/// the reconstruction equation g' = xi g (Right) or g xi (Left).
inline EPState ep_vector_field(const ReducedLagrangian& model, const EPState& s) {
  const auto& alg = *model.algebra;
  const double sg = sign(model.chirality);
  const Vec top = model.accel(s.jet, s.m);
  if (!top.allFinite()) throw HyperregularityError("ep_vector_field: accel produced non-finite values");
  const Vec xi = model.order == 1 ? top : s.jet.at(0);
  const Mat X = alg.hat(xi);
  EPState d;
  d.g = model.chirality == Chirality::Right ? Mat(X * s.g) : Mat(s.g * X);
  d.jet.resize(s.jet.size());
  for (size_t j = 0; j + 1 < s.jet.size(); ++j) d.jet[j] = s.jet[j + 1];
  if (!s.jet.empty()) d.jet.back() = top;
  d.m = -sg * alg.ad_star(xi, s.m);
  return d;
}

/// Bi-invariant 2-spline fast path: (xi, xi', xi'') -> (xi', xi'', +/-[xi, xi'']).
inline Jet bi_invariant_spline_field(const LieAlgebra& alg, Chirality ch, const Jet& s) {
  if (s.size() != 3) throw InputError("bi_invariant_spline_field: expects (xi, xi', xi'')");
  return {s[1], s[2], sign(ch) * alg.bracket(s[0], s[2])};
}

namespace detail {

inline Vec pack_ep(const EPState& s) {
  Eigen::Index n = s.g.size() + s.m.size();
  for (const auto& v : s.jet) n += v.size();
  Vec out(n);
  Eigen::Index o = 0;
  out.segment(o, s.g.size()) = s.g.reshaped();
  o += s.g.size();
  for (const auto& v : s.jet) {
    out.segment(o, v.size()) = v;
    o += v.size();
  }
  out.segment(o, s.m.size()) = s.m;
  return out;
}

inline EPState unpack_ep(const ReducedLagrangian& model, const Vec& x) {
  const int n = model.algebra->group_dim();
  const int d = model.dim();
  EPState s;
  s.g = x.head(n * n).reshaped(n, n);
  Eigen::Index o = n * n;
  s.jet.resize(model.lower_jet_size());
  for (auto& v : s.jet) {
    v = x.segment(o, d);
    o += d;
  }
  s.m = x.segment(o, d);
  return s;
}

}  // namespace detail

struct EPTrajectory {
  std::vector<double> t;
  std::vector<EPState> states;
};

/// RK4 on the EP system with polar re-projection of g every
/// `reprojection_interval` steps.
inline EPTrajectory simulate_ep(const ReducedLagrangian& model, const EPState& s0, double T,
                                const IntegratorConfig& cfg = {}) {
  require_dim(s0.m, model.dim(), "simulate_ep: m");
  if (static_cast<int>(s0.jet.size()) != model.lower_jet_size()) {
    throw InputError("simulate_ep: jet has the wrong length");
  }
  const int n = model.algebra->group_dim();
  if (s0.g.rows() != n || s0.g.cols() != n) throw InputError("simulate_ep: g has the wrong size");
  const Field f = [&model](double, const Vec& x) {
    return detail::pack_ep(ep_vector_field(model, detail::unpack_ep(model, x)));
  };
  const auto project = [&model, n](Vec& x) {
    const Mat g = x.head(n * n).reshaped(n, n);
    x.head(n * n) = model.algebra->project(g).reshaped();
  };
  const Trajectory tr = integrate(f, detail::pack_ep(s0), T, cfg, project);
  EPTrajectory out;
  out.t = tr.t;
  out.states.reserve(tr.x.size());
  for (const auto& x : tr.x) out.states.push_back(detail::unpack_ep(model, x));
  return out;
}

/// Conserved spatial momentum: Ad*_g m (Right) or Ad*_{g^-1} m (Left).
inline Vec noether_momentum(const LieAlgebra& alg, Chirality ch, const EPState& s) {
  if (ch == Chirality::Right) return alg.coadjoint(s.g, s.m);
  return alg.coadjoint(s.g.inverse(), s.m);
}

/// (xi(0), ..., xi^(k-1)(0)) from matrix derivatives (g, g', ..., g^(k)) at
/// t = 0, with xi = g' g^-1 (Right) or g^-1 g' (Left).
inline Jet reduce_group_jet(const LieAlgebra& alg, Chirality ch, const std::vector<Mat>& derivs, int k) {
  if (k < 1 || k > 3) throw InputError("reduce_group_jet: k must be 1, 2 or 3");
  if (static_cast<int>(derivs.size()) < k + 1) {
    throw InputError("reduce_group_jet: need derivatives up to order k");
  }
  const Eigen::PartialPivLU<Mat> lu(derivs[0]);
  if (!(std::abs(lu.determinant()) > 1e-300)) throw InputError("reduce_group_jet: singular g");
  const Mat G = lu.inverse();
  const bool right = ch == Chirality::Right;
  const Mat X = right ? Mat(derivs[1] * G) : Mat(G * derivs[1]);
  Jet out{alg.vee(X)};
  if (k == 1) return out;
  const Mat A2 = right ? Mat(derivs[2] * G) : Mat(G * derivs[2]);
  const Mat Xd = A2 - X * X;
  out.push_back(alg.vee(Xd));
  if (k == 2) return out;
  const Mat A3 = right ? Mat(derivs[3] * G) : Mat(G * derivs[3]);
  const Mat cross = right ? Mat(A2 * X) : Mat(X * A2);
  out.push_back(alg.vee(A3 - cross - Xd * X - X * Xd));
  return out;
}

namespace detail {

/// One commutator-free order-4 step for g' = A(t) g (Right) or g A(t)
/// (Left), with A1, A2, A3 sampled at t, t + h/2, t + h.
inline Mat cf4_step(const LieAlgebra& alg, Chirality ch, const Mat& g, const Vec& A1, const Vec& A2,
                    const Vec& A3, double h) {
  const Mat E1 = alg.exp((h / 12.0) * (3.0 * A1 + 4.0 * A2 - A3));
  const Mat E2 = alg.exp((h / 12.0) * (-A1 + 4.0 * A2 + 3.0 * A3));
  return ch == Chirality::Right ? Mat(E2 * E1 * g) : Mat(g * E1 * E2);
}

}  // namespace detail

/// Reconstruction from a continuous xi(t) on [0, T].
inline std::vector<Mat> reconstruct(const LieAlgebra& alg, const std::function<Vec(double)>& xi,
                                    const Mat& g0, Chirality ch, double T, double dt,
                                    int reprojection_interval = 100) {
  const long n = step_count(T, dt);
  const double h = T / static_cast<double>(n);
  std::vector<Mat> out{g0};
  out.reserve(n + 1);
  Mat g = g0;
  for (long i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    g = detail::cf4_step(alg, ch, g, xi(t), xi(t + 0.5 * h), xi(t + h), h);
    if (reprojection_interval > 0 && (i + 1) % reprojection_interval == 0) g = alg.project(g);
    out.push_back(g);
  }
  return out;
}

/// Reconstruction from samples xi_n = xi(n dt). Midpoint values come from
/// cubic Lagrange interpolation (one-sided at the ends).
inline std::vector<Mat> reconstruct(const LieAlgebra& alg, const std::vector<Vec>& xi, const Mat& g0,
                                    Chirality ch, double dt, int reprojection_interval = 100) {
  if (xi.size() < 2) throw InputError("reconstruct: need at least two samples");
  const size_t n = xi.size() - 1;
  const auto mid = [&](size_t i) -> Vec {
    if (xi.size() < 4) return 0.5 * (xi[i] + xi[i + 1]);
    if (i == 0) return (5.0 * xi[0] + 15.0 * xi[1] - 5.0 * xi[2] + xi[3]) / 16.0;
    if (i + 1 == n) return (xi[n - 3] - 5.0 * xi[n - 2] + 15.0 * xi[n - 1] + 5.0 * xi[n]) / 16.0;
    return (-xi[i - 1] + 9.0 * xi[i] + 9.0 * xi[i + 1] - xi[i + 2]) / 16.0;
  };
  std::vector<Mat> out{g0};
  out.reserve(n + 1);
  Mat g = g0;
  for (size_t i = 0; i < n; ++i) {
    g = detail::cf4_step(alg, ch, g, xi[i], mid(i), xi[i + 1], dt);
    if (reprojection_interval > 0 && (i + 1) % reprojection_interval == 0) g = alg.project(g);
    out.push_back(g);
  }
  return out;
}

/// Admissible variation eta_n = b(t_n) v with the bump
/// b = (1 - u^2)^(2k+2) on [0.1 T, 0.9 T] (u rescaled to [-1, 1]) and zero
/// elsewhere, so all derivatives up to order 2k+1 vanish at the endpoints.
/// With a `profile`, eta_n = b(t_n) profile(t_n).
inline std::vector<Vec> bump_variation(size_t nodes, double dt, int k, const std::function<Vec(double)>& profile) {
  const double T = dt * static_cast<double>(nodes - 1);
  const double a = 0.1 * T, b = 0.9 * T;
  const Eigen::Index d = profile(0.0).size();
  std::vector<Vec> eta(nodes, Vec::Zero(d));
  for (size_t i = 0; i < nodes; ++i) {
    const double t = dt * static_cast<double>(i);
    if (t <= a || t >= b) continue;
    const double u = (2.0 * t - a - b) / (b - a);
    eta[i] = std::pow(1.0 - u * u, 2 * k + 2) * profile(t);
  }
  return eta;
}

inline std::vector<Vec> bump_variation(size_t nodes, double dt, int k, const Vec& v) {
  return bump_variation(nodes, dt, k, [v](double) { return v; });
}

namespace detail {

/// Per-term Lagrangian values of the discrete action on `path`. Midpoint
/// velocities come from logs of consecutive elements; higher derivatives
/// from centered differences of the midpoint series.
inline std::vector<double> action_terms(const ReducedLagrangian& model, const std::vector<Mat>& path,
                                        double dt) {
  const auto& alg = *model.algebra;
  const size_t M = path.size() - 1;
  std::vector<Vec> xi(M);
  for (size_t i = 0; i < M; ++i) {
    const Mat inc = model.chirality == Chirality::Right ? Mat(path[i + 1] * path[i].inverse())
                                                        : Mat(path[i].inverse() * path[i + 1]);
    xi[i] = alg.log(inc) / dt;
  }
  std::vector<double> terms;
  if (model.order == 1) {
    for (size_t i = 0; i < M; ++i) terms.push_back(model.eval({xi[i]}));
    return terms;
  }
  for (size_t i = 1; i + 1 < M; ++i) {
    Jet j{xi[i], (xi[i + 1] - xi[i - 1]) / (2.0 * dt)};
    if (model.order == 3) j.push_back((xi[i + 1] - 2.0 * xi[i] + xi[i - 1]) / (dt * dt));
    terms.push_back(model.eval(j));
  }
  return terms;
}

inline std::vector<Mat> perturb(const LieAlgebra& alg, Chirality ch, const std::vector<Mat>& path,
                                const std::vector<Vec>& eta, double eps) {
  std::vector<Mat> out(path.size());
  for (size_t i = 0; i < path.size(); ++i) {
    if (eta[i].isZero(0.0)) {
      out[i] = path[i];
      continue;
    }
    const Mat E = alg.exp(eps * eta[i]);
    out[i] = ch == Chirality::Right ? Mat(E * path[i]) : Mat(path[i] * E);
  }
  return out;
}

}  // namespace detail

/// Discrete action sum_n dt l(...) along `path`.
inline double discrete_action(const ReducedLagrangian& model, const std::vector<Mat>& path, double dt) {
  if (static_cast<int>(path.size()) < 2 * model.order + 1) {
    throw InputError("discrete_action: path shorter than the 2k+1 point stencil");
  }
  double s = 0.0;
  for (double v : detail::action_terms(model, path, dt)) s += dt * v;
  return s;
}

/// Directional derivatives dS/de of the discrete action along each
/// variation g_n -> exp(e eta_n) g_n (Right) or g_n exp(e eta_n) (Left).
/// The derivative is a 4-point stencil in e, differenced term by term.
inline std::vector<double> discrete_action_gradient(const ReducedLagrangian& model,
                                                    const std::vector<Mat>& path, double dt,
                                                    const std::vector<std::vector<Vec>>& variations,
                                                    double eps = 1e-3) {
  if (static_cast<int>(path.size()) < 2 * model.order + 1) {
    throw InputError("discrete_action_gradient: path shorter than the 2k+1 point stencil");
  }
  const auto& alg = *model.algebra;
  std::vector<double> out;
  out.reserve(variations.size());
  for (const auto& eta : variations) {
    if (eta.size() != path.size()) throw InputError("discrete_action_gradient: variation length mismatch");
    const auto tp2 = detail::action_terms(model, detail::perturb(alg, model.chirality, path, eta, 2 * eps), dt);
    const auto tp1 = detail::action_terms(model, detail::perturb(alg, model.chirality, path, eta, eps), dt);
    const auto tm1 = detail::action_terms(model, detail::perturb(alg, model.chirality, path, eta, -eps), dt);
    const auto tm2 = detail::action_terms(model, detail::perturb(alg, model.chirality, path, eta, -2 * eps), dt);
    double d = 0.0;
    for (size_t i = 0; i < tp1.size(); ++i) {
      d += dt * ((tm2[i] - tp2[i]) + 8.0 * (tp1[i] - tm1[i])) / (12.0 * eps);
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace hogm

#endif  // HOGM_EULER_POINCARE_HPP
