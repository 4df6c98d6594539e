#ifndef HOGM_SHOOTING_HPP
#define HOGM_SHOOTING_HPP

#include <string>
#include <vector>

#include "hogm/algebra.hpp"
#include "hogm/core.hpp"
#include "hogm/euler_poincare.hpp"
#include "hogm/integrate.hpp"
#include "hogm/models.hpp"

namespace hogm {

/// Two-point boundary problem for a 2-spline: g(0) = g0, g(T) = g1,
/// xi(0) = v0, xi(T) = v1.
struct ShootingProblem {
  ReducedLagrangian model;
  Mat g0, g1;
  Vec v0, v1;
  double T = 1.0;
  double tol = 1e-8;
  int max_iter = 50;
  double dt = 1e-3;
};

struct ShootingResult {
  Jet initial_jet;  // (xi(0), xi'(0), xi''(0))
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  EPTrajectory trajectory;
};

namespace detail {

inline Vec boundary_increment(const LieAlgebra& g, Chirality ch, const Mat& from, const Mat& to) {
  return ch == Chirality::Right ? g.log(to * from.inverse()) : g.log(from.inverse() * to);
}

}  // namespace detail

/// Euclidean-cubic seed applied to Delta = log(g0^-1 g1) (Left) or
/// log(g1 g0^-1) (Right): returns (xi'(0), xi''(0)) stacked.
inline Vec shooting_seed(const ShootingProblem& p) {
  const auto& g = *p.model.algebra;
  const Vec delta = detail::boundary_increment(g, p.model.chirality, p.g0, p.g1);
  const double T = p.T;
  const Vec a = (3.0 * delta - (2.0 * p.v0 + p.v1) * T) / (T * T);
  const Vec b = (-2.0 * delta + (p.v0 + p.v1) * T) / (T * T * T);
  Vec x(2 * g.dim());
  x << 2.0 * a, 6.0 * b;
  return x;
}

/// Integrates from (g0, v0, xi'(0), xi''(0)) to T and returns the boundary
/// residual (log(g1 g(T)^-1) or log(g(T)^-1 g1), xi(T) - v1).
inline Vec shooting_residual(const ShootingProblem& p, const Vec& unknowns, EPTrajectory* keep = nullptr) {
  const auto& m = p.model;
  const int d = m.dim();
  const Jet full{p.v0, unknowns.head(d), unknowns.tail(d)};
  const EPState s0 = make_ep_state(m, p.g0, full);
  EPTrajectory tr = simulate_ep(m, s0, p.T, IntegratorConfig{p.dt});
  const EPState& end = tr.states.back();
  Vec r(2 * d);
  const Vec gap = m.chirality == Chirality::Right ? m.algebra->log(p.g1 * end.g.inverse())
                                                  : m.algebra->log(end.g.inverse() * p.g1);
  r << gap, ep_xi(m, end) - p.v1;
  if (keep) *keep = std::move(tr);
  return r;
}

/// Damped Newton with a finite-difference Jacobian and Armijo backtracking.
/// Throws NonConvergenceError after max_iter iterations or when no step
/// reduces the residual.
inline ShootingResult shoot_spline(const ShootingProblem& p) {
  const auto& m = p.model;
  if (m.order != 2) throw InputError("shoot_spline: model must be a second-order spline");
  if (!(p.T > 0.0)) throw InputError("shoot_spline: T must be positive");
  const int d = m.dim();
  require_dim(p.v0, d, "shoot_spline: v0");
  require_dim(p.v1, d, "shoot_spline: v1");

  Vec x;
  try {
    x = shooting_seed(p);
  } catch (const CutLocusError& e) {
    throw CutLocusError(std::string(e.what()) + "; re-seed with closer endpoints or an intermediate pose");
  }
  ShootingResult res;
  Vec r = shooting_residual(p, x);
  double rn = r.norm();
  res.residual_history.push_back(rn);
  int it = 0;
  while (rn >= p.tol) {
    if (it >= p.max_iter) throw NonConvergenceError("shoot_spline: max_iter exceeded", rn);
    const Mat J = fd_jacobian([&](const Vec& y) { return shooting_residual(p, y); }, x);
    const Vec step = J.fullPivLu().solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-6) {
      const Vec xt = x + alpha * step;
      Vec rt;
      try {
        rt = shooting_residual(p, xt);
      } catch (const CutLocusError&) {
        alpha *= 0.5;
        continue;
      }
      if (rt.allFinite() && rt.norm() <= (1.0 - 1e-4 * alpha) * rn) {
        x = xt;
        r = rt;
        rn = rt.norm();
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw NonConvergenceError("shoot_spline: line search failed", rn);
    ++it;
    res.residual_history.push_back(rn);
  }
  shooting_residual(p, x, &res.trajectory);
  res.initial_jet = {p.v0, x.head(d), x.tail(d)};
  res.iterations = it;
  res.residual = rn;
  return res;
}

}  // namespace hogm

#endif  // HOGM_SHOOTING_HPP
