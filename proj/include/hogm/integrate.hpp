#ifndef HOGM_INTEGRATE_HPP
#define HOGM_INTEGRATE_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hogm/core.hpp"

namespace hogm {

enum class Scheme { RK4, CommutatorFree4 };

struct IntegratorConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::RK4;
  int reprojection_interval = 100;
};

using Field = std::function<Vec(double, const Vec&)>;

/// Uniformly sampled solution x(t_n), t_n = n h.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
};

/// Number of fixed steps covering [0, T]; the step is then T / n.
inline long step_count(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("integrate: dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw InputError("integrate: T must be non-negative");
  return std::max(1L, std::lround(T / dt));
}

inline Vec rk4_step(const Field& f, double t, const Vec& x, double h) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Vec k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Classical RK4 on [0, T]. `project`, when set, is applied every
/// `reprojection_interval` steps. Throws DivergenceError at the first
/// non-finite state.
inline Trajectory integrate(const Field& f, const Vec& x0, double T, const IntegratorConfig& cfg,
                            const std::function<void(Vec&)>& project = {}) {
  if (cfg.scheme != Scheme::RK4) {
    throw InputError("integrate: only RK4 applies to flat state vectors");
  }
  const long n = step_count(T, cfg.dt);
  const double h = T / static_cast<double>(n);
  Trajectory out;
  out.t.reserve(n + 1);
  out.x.reserve(n + 1);
  out.t.push_back(0.0);
  out.x.push_back(x0);
  Vec x = x0;
  for (long i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    x = rk4_step(f, t, x, h);
    if (project && cfg.reprojection_interval > 0 && (i + 1) % cfg.reprojection_interval == 0) {
      project(x);
    }
    const double t1 = h * static_cast<double>(i + 1);
    if (!x.allFinite()) throw DivergenceError("integration diverged at t = " + std::to_string(t1), t1);
    out.t.push_back(t1);
    out.x.push_back(x);
  }
  return out;
}

/// Centered-difference Jacobian with per-coordinate step eps * max(1, |x_i|).
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, double eps = 1e-6) {
  const Vec f0 = map(x);
  if (!f0.allFinite()) throw DivergenceError("fd_jacobian: non-finite map value", 0.0);
  Mat J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = eps * std::max(1.0, std::abs(x(i)));
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const Vec fp = map(xp), fm = map(xm);
    if (!fp.allFinite() || !fm.allFinite()) {
      throw DivergenceError("fd_jacobian: non-finite map value", 0.0);
    }
    J.col(i) = (fp - fm) / (xp(i) - xm(i));
  }
  return J;
}

}  // namespace hogm

#endif  // HOGM_INTEGRATE_HPP
