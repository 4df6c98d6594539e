#ifndef HOGM_BUNDLE_HPP
#define HOGM_BUNDLE_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hogm/algebra.hpp"
#include "hogm/core.hpp"
#include "hogm/integrate.hpp"
#include "hogm/models.hpp"

// Lagrange-Poincare and Ostrogradsky-Hamilton-Poincare dynamics on a trivial
// bundle Q = R^m x G with a constant base metric. Sections of the adjoint
// bundle and its dual are written in the trivialization as algebra and dual
// vectors, so every covariant derivative becomes an ordinary one plus a
// bracket with A(x) x'.

namespace hogm {

/// Principal connection in the trivialization: A(x) is the d x m matrix
/// whose column j is A(x) e_j. `dA`, when set, returns the m partial
/// derivatives dA/dx_i.
struct Connection {
  AlgebraPtr algebra;
  int base_dim = 0;
  Chirality chirality = Chirality::Left;
  std::function<Mat(const Vec&)> A{};
  std::function<std::vector<Mat>(const Vec&)> dA{};
  std::string kind = "custom";

  Vec apply(const Vec& x, const Vec& u) const { return A(x) * u; }
};

inline Connection zero_connection(AlgebraPtr g, int m, Chirality ch) {
  const int d = g->dim();
  Connection c{g, m, ch};
  c.A = [d, m](const Vec&) { return Mat(Mat::Zero(d, m)); };
  c.dA = [d, m](const Vec&) { return std::vector<Mat>(m, Mat::Zero(d, m)); };
  c.kind = "zero";
  return c;
}

/// A(x) = A0 + sum_i x_i A_i.
inline Connection linear_connection(AlgebraPtr g, const Mat& A0, const std::vector<Mat>& Ai, Chirality ch) {
  const int d = g->dim();
  const int m = static_cast<int>(A0.cols());
  if (A0.rows() != d) throw InputError("connection: A0 must have one row per algebra coordinate");
  if (!Ai.empty() && static_cast<int>(Ai.size()) != m) {
    throw InputError("connection: need one A_i matrix per base coordinate");
  }
  for (const auto& a : Ai) {
    if (a.rows() != d || a.cols() != m) throw InputError("connection: A_i has the wrong shape");
  }
  Connection c{g, m, ch};
  std::vector<Mat> parts = Ai.empty() ? std::vector<Mat>(m, Mat::Zero(d, m)) : Ai;
  c.A = [A0, parts](const Vec& x) {
    Mat a = A0;
    for (size_t i = 0; i < parts.size(); ++i) a += x(static_cast<Eigen::Index>(i)) * parts[i];
    return a;
  };
  c.dA = [parts](const Vec&) { return parts; };
  c.kind = Ai.empty() ? "constant" : "linear";
  return c;
}

inline Connection constant_connection(AlgebraPtr g, const Mat& A0, Chirality ch) {
  return linear_connection(std::move(g), A0, {}, ch);
}

/// U(1)-type gauge on R^2: A = B/2 (-x2 dx1 + x1 dx2), curvature B dx1^dx2.
inline Connection abelian_symmetric_gauge(double B, Chirality ch, AlgebraPtr g = LieAlgebra::abelian(1)) {
  if (g->dim() != 1) throw InputError("abelian_symmetric_gauge: needs a one-dimensional algebra");
  Mat A0 = Mat::Zero(1, 2);
  Mat A1 = Mat::Zero(1, 2), A2 = Mat::Zero(1, 2);
  A1(0, 1) = 0.5 * B;   // d/dx1 of (B/2) x1 dx2
  A2(0, 0) = -0.5 * B;  // d/dx2 of -(B/2) x2 dx1
  Connection c = linear_connection(std::move(g), A0, {A1, A2}, ch);
  c.kind = "abelian_symmetric_gauge";
  return c;
}

/// dA/dx_i, analytic when available, otherwise fourth-order central
/// differences with step 1e-4.
inline std::vector<Mat> connection_partials(const Connection& c, const Vec& x) {
  if (c.dA) return c.dA(x);
  const double h = 1e-4;
  std::vector<Mat> out(c.base_dim);
  for (int i = 0; i < c.base_dim; ++i) {
    auto at = [&](double s) {
      Vec y = x;
      y(i) += s * h;
      return c.A(y);
    };
    out[i] = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h);
  }
  return out;
}

namespace detail {

/// A(x) and its partials evaluated once, reused by the force terms.
struct ConnectionJet {
  const Connection* conn;
  Mat A;
  std::vector<Mat> dA;

  ConnectionJet(const Connection& c, const Vec& x) : conn(&c), A(c.A(x)), dA(connection_partials(c, x)) {
    require_dim(x, c.base_dim, "connection: base point");
  }

  Mat directional(const Vec& u) const {
    Mat out = Mat::Zero(A.rows(), A.cols());
    for (size_t i = 0; i < dA.size(); ++i) out += u(static_cast<Eigen::Index>(i)) * dA[i];
    return out;
  }

  Vec curvature(const Vec& u, const Vec& v) const {
    const double s = sign(conn->chirality);
    const Vec d = directional(u) * v - directional(v) * u;
    return d + s * conn->algebra->bracket(A * u, A * v);
  }

  /// F_j = <charge, B(v, e_j)>.
  Vec force(const Vec& charge, const Vec& v) const {
    const double s = sign(conn->chirality);
    const int m = conn->base_dim;
    const Mat Dv = directional(v);
    const Vec Av = A * v;
    Vec F(m);
    for (int j = 0; j < m; ++j) {
      const Vec B = Dv.col(j) - dA[j] * v + s * conn->algebra->bracket(Av, A.col(j));
      F(j) = charge.dot(B);
    }
    return F;
  }
};

}  // namespace detail

/// dA(u, v) = (D_u A) v - (D_v A) u.
inline Vec exterior_derivative(const Connection& c, const Vec& x, const Vec& u, const Vec& v) {
  const detail::ConnectionJet j(c, x);
  return j.directional(u) * v - j.directional(v) * u;
}

/// B(u, v) = dA(u, v) +/- [A u, A v].
inline Vec curvature(const Connection& c, const Vec& x, const Vec& u, const Vec& v) {
  require_dim(u, c.base_dim, "curvature");
  require_dim(v, c.base_dim, "curvature");
  return detail::ConnectionJet(c, x).curvature(u, v);
}

/// D sigma/Dt = sigma' +/- [A(x) x', sigma].
inline Vec ad_covariant_derivative(const Connection& c, const Vec& x, const Vec& xdot, const Vec& sigma,
                                   const Vec& sigmadot) {
  return sigmadot + sign(c.chirality) * c.algebra->bracket(c.apply(x, xdot), sigma);
}

/// D mu/Dt = mu' -/+ ad*_{A(x) x'} mu, the dual of ad_covariant_derivative.
inline Vec coad_covariant_derivative(const Connection& c, const Vec& x, const Vec& xdot, const Vec& mu,
                                     const Vec& mudot) {
  return mudot - sign(c.chirality) * c.algebra->ad_star(c.apply(x, xdot), mu);
}

// ---------------------------------------------------------------------------
// Lagrangian side

/// Wong's equations: (rho, rho', charge mu).
struct WongState {
  Vec rho, rho_dot, mu;

  std::array<Vec*, 3> slots() { return {&rho, &rho_dot, &mu}; }
  std::array<const Vec*, 3> slots() const { return {&rho, &rho_dot, &mu}; }
};

namespace detail {

inline void require_ad_invariant(const Inertia& kappa, const LieAlgebra& g, const char* what) {
  const double scale = std::max(1.0, kappa.matrix().cwiseAbs().maxCoeff());
  if (kappa.ad_invariance_residual(g) > 1e-10 * scale) {
    throw InputError(std::string(what) + ": fiber metric kappa must be ad-invariant");
  }
}

inline void check_bundle_dims(const BaseMetric& gamma, const Inertia& kappa, const Connection& c,
                              const char* what) {
  if (gamma.dim() != c.base_dim) throw InputError(std::string(what) + ": base metric dimension mismatch");
  if (kappa.dim() != c.algebra->dim()) throw InputError(std::string(what) + ": fiber metric dimension mismatch");
}

}  // namespace detail

/// rho'' = -gamma^-1 <mu, B(rho', .)>,  mu' = +/- ad*_{A rho'} mu (D mu/Dt = 0).
inline WongState wong_vector_field(const BaseMetric& gamma, const Inertia& kappa, const Connection& c,
                                   const WongState& s) {
  detail::check_bundle_dims(gamma, kappa, c, "wong");
  detail::require_ad_invariant(kappa, *c.algebra, "wong");
  require_dim(s.rho_dot, c.base_dim, "wong: rho_dot");
  require_dim(s.mu, c.algebra->dim(), "wong: mu");
  const detail::ConnectionJet j(c, s.rho);
  const double sg = sign(c.chirality);
  WongState d;
  d.rho = s.rho_dot;
  d.rho_dot = -gamma.sharp(j.force(s.mu, s.rho_dot));
  d.mu = sg * c.algebra->ad_star(j.A * s.rho_dot, s.mu);
  return d;
}

/// 1/2 rho' gamma rho' + 1/2 mu kappa^-1 mu.
inline double wong_energy(const BaseMetric& gamma, const Inertia& kappa, const WongState& s) {
  return 0.5 * gamma.norm2(s.rho_dot) + 0.5 * kappa.dual_norm2(s.mu);
}

/// Shared state of the second-order Lagrange-Poincare systems:
/// (rho, rho', rho'', rho''', sigma, D sigma/Dt, pi0) with
/// pi0 = dl/dsigma - D/Dt dl/d(sigma'). Slots of size zero are absent:
/// rho'' and rho''' when the base is first order, sigma and D sigma/Dt when
/// the fiber is first order (then sigma follows from pi0).
struct LPState {
  Vec rho, rho_dot, rho_ddot, rho_dddot, sigma, sigma_dot, pi0;

  std::array<Vec*, 7> slots() { return {&rho, &rho_dot, &rho_ddot, &rho_dddot, &sigma, &sigma_dot, &pi0}; }
  std::array<const Vec*, 7> slots() const {
    return {&rho, &rho_dot, &rho_ddot, &rho_dddot, &sigma, &sigma_dot, &pi0};
  }
};

/// Second-order Kaluza-Klein data: base metric gamma, fiber metric kappa
/// and the lengths lambda1 (base) and lambda2 (fiber).
struct Wong2Params {
  BaseMetric gamma;
  Inertia kappa;
  Connection conn;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

namespace detail {

inline void check_wong2(const Wong2Params& p, const LPState& s) {
  check_bundle_dims(p.gamma, p.kappa, p.conn, "wong2");
  require_ad_invariant(p.kappa, *p.conn.algebra, "wong2");
  if (!(p.lambda1 >= 0.0) || !(p.lambda2 >= 0.0)) throw InputError("wong2: lambda1, lambda2 must be >= 0");
  const int m = p.conn.base_dim, d = p.conn.algebra->dim();
  require_dim(s.rho, m, "wong2: rho");
  require_dim(s.rho_dot, m, "wong2: rho_dot");
  require_dim(s.pi0, d, "wong2: pi0");
  if (p.lambda1 == 0.0 && (s.rho_dddot.size() > 0 || s.rho_ddot.size() > 0)) {
    throw DegeneracyError("wong2: lambda1 = 0 leaves the rho''' slot without an equation; use wong");
  }
  if (p.lambda2 == 0.0 && (s.sigma_dot.size() > 0 || s.sigma.size() > 0)) {
    throw DegeneracyError("wong2: lambda2 = 0 leaves the D sigma/Dt slot without an equation");
  }
  if (p.lambda1 > 0.0) {
    require_dim(s.rho_ddot, m, "wong2: rho_ddot");
    require_dim(s.rho_dddot, m, "wong2: rho_dddot");
  }
  if (p.lambda2 > 0.0) {
    require_dim(s.sigma, d, "wong2: sigma");
    require_dim(s.sigma_dot, d, "wong2: sigma_dot");
  }
}

}  // namespace detail

/// Second-order Wong equations on a flat base:
///   gamma rho'' - lambda1^2 gamma rho'''' = -<pi0 -/+ lambda2^2 ad*_sigma kappa sigma', B(rho', .)>
///   (D/Dt +/- ad*_sigma) pi0 = 0,  pi0 = kappa sigma - lambda2^2 D/Dt (kappa D sigma/Dt).
/// With lambda1 = lambda2 = 0 the right-hand side is Wong's field on the
/// shared slots (rho, rho', pi0 = mu).
inline LPState wong2_vector_field(const Wong2Params& p, const LPState& s) {
  detail::check_wong2(p, s);
  const auto& g = *p.conn.algebra;
  const double sg = sign(p.conn.chirality);
  const detail::ConnectionJet j(p.conn, s.rho);
  const Vec a = j.A * s.rho_dot;
  const bool fiber2 = p.lambda2 > 0.0;

  Vec charge = s.pi0;
  if (fiber2) charge -= sg * p.lambda2 * p.lambda2 * g.ad_star(s.sigma, p.kappa.flat(s.sigma_dot));
  const Vec F = j.force(charge, s.rho_dot);

  LPState d;
  d.rho = s.rho_dot;
  if (p.lambda1 > 0.0) {
    d.rho_dot = s.rho_ddot;
    d.rho_ddot = s.rho_dddot;
    d.rho_dddot = (s.rho_ddot + p.gamma.sharp(F)) / (p.lambda1 * p.lambda1);
  } else {
    d.rho_dot = -p.gamma.sharp(F);
  }
  d.pi0 = sg * g.ad_star(a, s.pi0);
  if (fiber2) {
    // With sigma = kappa^-1 pi0 (first-order fiber) ad*_sigma pi0 vanishes
    // for ad-invariant kappa, so the term only appears here.
    d.pi0 -= sg * g.ad_star(s.sigma, s.pi0);
    d.sigma = s.sigma_dot - sg * g.bracket(a, s.sigma);
    const Vec rhs = (p.kappa.flat(s.sigma) - s.pi0) / (p.lambda2 * p.lambda2) +
                    sg * g.ad_star(a, p.kappa.flat(s.sigma_dot));
    d.sigma_dot = p.kappa.sharp(rhs);
  }
  return d;
}

/// Reduced energy sum <momenta, velocities> - l of the second-order
/// Kaluza-Klein Lagrangian, conserved by wong2_vector_field.
inline double wong2_energy(const Wong2Params& p, const LPState& s) {
  const double l1 = p.lambda1 * p.lambda1, l2 = p.lambda2 * p.lambda2;
  double e = 0.5 * p.gamma.norm2(s.rho_dot);
  if (p.lambda1 > 0.0) {
    e += 0.5 * l1 * p.gamma.norm2(s.rho_ddot) - l1 * s.rho_dddot.dot(p.gamma.flat(s.rho_dot));
  }
  if (p.lambda2 > 0.0) {
    e += s.pi0.dot(s.sigma) - 0.5 * p.kappa.norm2(s.sigma) + 0.5 * l2 * p.kappa.norm2(s.sigma_dot);
  } else {
    e += 0.5 * p.kappa.dual_norm2(s.pi0);
  }
  return e;
}

/// Quadratic reduced Lagrangian on T^(2)(R^m) + 2 Ad:
///   l = 1/2 rho' G1 rho' + 1/2 rho'' G2 rho'' + 1/2 sigma K1 sigma
///       + 1/2 (D sigma/Dt) K2 (D sigma/Dt).
/// G2 and K2 may be absent (empty); K1 need not be ad-invariant.
struct LP2Lagrangian {
  Mat G1, G2, K1, K2;
};

inline LP2Lagrangian kaluza_klein2(const BaseMetric& gamma, const Inertia& kappa, double lambda1,
                                   double lambda2) {
  LP2Lagrangian l{gamma.matrix(), Mat(), kappa.matrix(), Mat()};
  if (lambda1 > 0.0) l.G2 = lambda1 * lambda1 * gamma.matrix();
  if (lambda2 > 0.0) l.K2 = lambda2 * lambda2 * kappa.matrix();
  return l;
}

namespace detail {

struct LP2Forms {
  Inertia G1;
  std::optional<Inertia> G2;
  Inertia K1;
  std::optional<Inertia> K2;

  explicit LP2Forms(const LP2Lagrangian& l)
      : G1(l.G1), G2(l.G2.size() ? std::optional<Inertia>(Inertia(l.G2)) : std::nullopt), K1(l.K1),
        K2(l.K2.size() ? std::optional<Inertia>(Inertia(l.K2)) : std::nullopt) {}
};

}  // namespace detail

/// Lagrange-Poincare equations (k <= 2) of an LP2Lagrangian:
///   dl/drho^h - d/dt dl/drho' + d^2/dt^2 dl/drho'' = <pi0 -/+ ad*_sigma dl/dsigma', B(rho', .)>
///   (D/Dt +/- ad*_sigma) pi0 = 0
/// where the horizontal derivative dl/drho^h_j = -/+ <K1 sigma, [A e_j, sigma]>
/// -/+ <K2 sigma', [A e_j, sigma']> accounts for the trivialization.
inline LPState lp2_vector_field(const LP2Lagrangian& lag, const Connection& c, const LPState& s) {
  const detail::LP2Forms L(lag);
  const auto& g = *c.algebra;
  const int m = c.base_dim, d = g.dim();
  if (L.G1.dim() != m || (L.G2 && L.G2->dim() != m)) throw InputError("lp2: base metric dimension mismatch");
  if (L.K1.dim() != d || (L.K2 && L.K2->dim() != d)) throw InputError("lp2: fiber metric dimension mismatch");
  require_dim(s.rho, m, "lp2: rho");
  require_dim(s.rho_dot, m, "lp2: rho_dot");
  require_dim(s.pi0, d, "lp2: pi0");
  if (L.G2) {
    require_dim(s.rho_ddot, m, "lp2: rho_ddot");
    require_dim(s.rho_dddot, m, "lp2: rho_dddot");
  } else if (s.rho_ddot.size() || s.rho_dddot.size()) {
    throw DegeneracyError("lp2: rho''' slot present but G2 is absent");
  }
  if (L.K2) {
    require_dim(s.sigma, d, "lp2: sigma");
    require_dim(s.sigma_dot, d, "lp2: sigma_dot");
  } else if (s.sigma.size() || s.sigma_dot.size()) {
    throw DegeneracyError("lp2: D sigma/Dt slot present but K2 is absent");
  }

  const double sg = sign(c.chirality);
  const detail::ConnectionJet j(c, s.rho);
  const Vec a = j.A * s.rho_dot;
  const Vec sigma = L.K2 ? s.sigma : L.K1.sharp(s.pi0);

  Vec horiz(m);
  for (int k = 0; k < m; ++k) {
    const Vec Ae = j.A.col(k);
    horiz(k) = -sg * L.K1.flat(sigma).dot(g.bracket(Ae, sigma));
    if (L.K2) horiz(k) -= sg * L.K2->flat(s.sigma_dot).dot(g.bracket(Ae, s.sigma_dot));
  }
  Vec charge = s.pi0;
  if (L.K2) charge -= sg * g.ad_star(sigma, L.K2->flat(s.sigma_dot));
  const Vec F = j.force(charge, s.rho_dot);

  LPState out;
  out.rho = s.rho_dot;
  if (L.G2) {
    out.rho_dot = s.rho_ddot;
    out.rho_ddot = s.rho_dddot;
    out.rho_dddot = L.G2->sharp(F - horiz + L.G1.flat(s.rho_ddot));
  } else {
    out.rho_dot = L.G1.sharp(horiz - F);
  }
  out.pi0 = sg * g.ad_star(a, s.pi0) - sg * g.ad_star(sigma, s.pi0);
  if (L.K2) {
    out.sigma = s.sigma_dot - sg * g.bracket(a, s.sigma);
    out.sigma_dot = L.K2->sharp(L.K1.flat(s.sigma) - s.pi0 + sg * g.ad_star(a, L.K2->flat(s.sigma_dot)));
  }
  return out;
}

/// Reduced energy of an LP2Lagrangian.
inline double lp2_energy(const LP2Lagrangian& lag, const LPState& s) {
  const detail::LP2Forms L(lag);
  double e = 0.5 * L.G1.norm2(s.rho_dot);
  if (L.G2) e += 0.5 * L.G2->norm2(s.rho_ddot) - s.rho_dddot.dot(L.G2->flat(s.rho_dot));
  if (L.K2) {
    e += s.pi0.dot(s.sigma) - 0.5 * L.K1.norm2(s.sigma) + 0.5 * L.K2->norm2(s.sigma_dot);
  } else {
    e += 0.5 * L.K1.dual_norm2(s.pi0);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Hamiltonian side

/// (rho, rho', gamma0, gamma1, sigma, pi1, pi0); for k = 1 the slots rho',
/// gamma1, sigma and pi1 are empty.
struct OHPState {
  Vec rho, rho_dot, gamma0, gamma1, sigma, pi1, pi0;

  std::array<Vec*, 7> slots() { return {&rho, &rho_dot, &gamma0, &gamma1, &sigma, &pi1, &pi0}; }
  std::array<const Vec*, 7> slots() const { return {&rho, &rho_dot, &gamma0, &gamma1, &sigma, &pi1, &pi0}; }
  int order() const { return rho_dot.size() > 0 || sigma.size() > 0 ? 2 : 1; }
};

/// Partials of a scalar on OHP space, one entry per OHPState slot.
struct OHPCovector {
  Vec d_rho, d_rho_dot, d_gamma0, d_gamma1, d_sigma, d_pi1, d_pi0;
};

struct BundleHamiltonian {
  int order = 2;
  std::function<double(const OHPState&)> eval{};
  std::function<OHPCovector(const OHPState&)> partials{};
};

struct OHPObservable {
  std::function<double(const OHPState&)> eval{};
  std::function<OHPCovector(const OHPState&)> partials{};
};

/// h = <gamma0, rho'> + 1/(2 l1^2) gamma1 gamma^-1 gamma1 - 1/2 rho' gamma rho'
///     + <pi0, sigma> + 1/(2 l2^2) pi1 kappa^-1 pi1 - 1/2 sigma kappa sigma.
inline BundleHamiltonian wong2_hamiltonian(const Wong2Params& p) {
  if (!(p.lambda1 > 0.0) || !(p.lambda2 > 0.0)) {
    throw HyperregularityError("wong2_hamiltonian: needs lambda1 > 0 and lambda2 > 0");
  }
  const BaseMetric gm = p.gamma;
  const Inertia k = p.kappa;
  const double i1 = 1.0 / (p.lambda1 * p.lambda1), i2 = 1.0 / (p.lambda2 * p.lambda2);
  BundleHamiltonian h;
  h.order = 2;
  h.eval = [=](const OHPState& z) {
    return z.gamma0.dot(z.rho_dot) + 0.5 * i1 * gm.dual_norm2(z.gamma1) - 0.5 * gm.norm2(z.rho_dot) +
           z.pi0.dot(z.sigma) + 0.5 * i2 * k.dual_norm2(z.pi1) - 0.5 * k.norm2(z.sigma);
  };
  h.partials = [=](const OHPState& z) {
    OHPCovector c;
    c.d_rho = Vec::Zero(z.rho.size());
    c.d_rho_dot = z.gamma0 - gm.flat(z.rho_dot);
    c.d_gamma0 = z.rho_dot;
    c.d_gamma1 = i1 * gm.sharp(z.gamma1);
    c.d_sigma = z.pi0 - k.flat(z.sigma);
    c.d_pi1 = i2 * k.sharp(z.pi1);
    c.d_pi0 = z.sigma;
    return c;
  };
  return h;
}

/// k = 1 Hamiltonian of Wong's equations: 1/2 gamma0 gamma^-1 gamma0 + 1/2 pi0 kappa^-1 pi0.
inline BundleHamiltonian wong_hamiltonian(const BaseMetric& gamma, const Inertia& kappa) {
  BundleHamiltonian h;
  h.order = 1;
  h.eval = [=](const OHPState& z) { return 0.5 * gamma.dual_norm2(z.gamma0) + 0.5 * kappa.dual_norm2(z.pi0); };
  h.partials = [=](const OHPState& z) {
    OHPCovector c;
    c.d_rho = Vec::Zero(z.rho.size());
    c.d_gamma0 = gamma.sharp(z.gamma0);
    c.d_pi0 = kappa.sharp(z.pi0);
    return c;
  };
  return h;
}

/// A Lie-Poisson Hamiltonian seen on a bundle with zero-dimensional base.
inline BundleHamiltonian bundle_hamiltonian(const ReducedHamiltonian& rh) {
  if (rh.order > 2) throw InputError("bundle_hamiltonian: order must be 1 or 2");
  auto to_olp = [rh](const OHPState& z) {
    OLPState o;
    if (rh.order == 2) {
      o.xi = {z.sigma};
      o.pi = {z.pi1};
    }
    o.pi0 = z.pi0;
    return o;
  };
  BundleHamiltonian h;
  h.order = rh.order;
  h.eval = [rh, to_olp](const OHPState& z) { return rh.eval(to_olp(z)); };
  h.partials = [rh, to_olp](const OHPState& z) {
    const OLPCovector o = rh.partials(to_olp(z));
    OHPCovector c;
    c.d_rho = Vec::Zero(0);
    c.d_gamma0 = Vec::Zero(0);
    if (rh.order == 2) {
      c.d_rho_dot = Vec::Zero(0);
      c.d_gamma1 = Vec::Zero(0);
      c.d_sigma = o.d_xi.at(0);
      c.d_pi1 = o.d_pi.at(0);
    }
    c.d_pi0 = o.d_pi0;
    return c;
  };
  return h;
}

/// Legendre map of the second-order Kaluza-Klein Lagrangian:
/// gamma1 = l1^2 gamma rho'', gamma0 = gamma rho' - l1^2 gamma rho''',
/// pi1 = l2^2 kappa D sigma/Dt, pi0 unchanged.
inline OHPState wong2_legendre(const Wong2Params& p, const LPState& s) {
  if (!(p.lambda1 > 0.0) || !(p.lambda2 > 0.0)) {
    throw HyperregularityError("wong2_legendre: needs lambda1 > 0 and lambda2 > 0");
  }
  const double l1 = p.lambda1 * p.lambda1, l2 = p.lambda2 * p.lambda2;
  OHPState z;
  z.rho = s.rho;
  z.rho_dot = s.rho_dot;
  z.gamma1 = l1 * p.gamma.flat(s.rho_ddot);
  z.gamma0 = p.gamma.flat(s.rho_dot) - l1 * p.gamma.flat(s.rho_dddot);
  z.sigma = s.sigma;
  z.pi1 = l2 * p.kappa.flat(s.sigma_dot);
  z.pi0 = s.pi0;
  return z;
}

inline LPState wong2_legendre_inverse(const Wong2Params& p, const OHPState& z) {
  const double l1 = p.lambda1 * p.lambda1, l2 = p.lambda2 * p.lambda2;
  LPState s;
  s.rho = z.rho;
  s.rho_dot = z.rho_dot;
  s.rho_ddot = p.gamma.sharp(z.gamma1) / l1;
  s.rho_dddot = (z.rho_dot - p.gamma.sharp(z.gamma0)) / l1;
  s.sigma = z.sigma;
  s.sigma_dot = p.kappa.sharp(z.pi1) / l2;
  s.pi0 = z.pi0;
  return s;
}

namespace detail {

inline void check_ohp(const Connection& c, const OHPState& z, const OHPCovector& df, const char* what) {
  const int m = c.base_dim, d = c.algebra->dim();
  const bool k2 = z.order() == 2;
  auto need = [&](const Vec& v, int n, const char* slot) {
    if (v.size() != n) {
      throw InputError(std::string(what) + ": slot " + slot + " has dimension " + std::to_string(v.size()) +
                       ", expected " + std::to_string(n));
    }
  };
  need(z.rho, m, "rho");
  need(z.gamma0, m, "gamma0");
  need(z.pi0, d, "pi0");
  need(df.d_rho, m, "dh/drho");
  need(df.d_gamma0, m, "dh/dgamma0");
  need(df.d_pi0, d, "dh/dpi0");
  if (k2) {
    need(z.rho_dot, m, "rho_dot");
    need(z.gamma1, m, "gamma1");
    need(z.sigma, d, "sigma");
    need(z.pi1, d, "pi1");
    need(df.d_rho_dot, m, "dh/drho_dot");
    need(df.d_gamma1, m, "dh/dgamma1");
    need(df.d_sigma, d, "dh/dsigma");
    need(df.d_pi1, d, "dh/dpi1");
  }
}

}  // namespace detail

/// Horizontal rho-derivative of an observable in the trivialization:
///   d^h f/drho_j = df/drho_j + <df/dsigma, -/+[A e_j, sigma]>
///                  + sum over pi slots <+/- ad*_{A e_j} pi, df/dpi>.
inline Vec horizontal_rho_partial(const Connection& c, const OHPState& z, const OHPCovector& df) {
  const auto& g = *c.algebra;
  const double sg = sign(c.chirality);
  const Mat A = c.A(z.rho);
  Vec out = df.d_rho;
  for (int j = 0; j < c.base_dim; ++j) {
    const Vec Ae = A.col(j);
    out(j) += sg * g.ad_star(Ae, z.pi0).dot(df.d_pi0);
    if (z.order() == 2) {
      out(j) -= sg * df.d_sigma.dot(g.bracket(Ae, z.sigma));
      out(j) += sg * g.ad_star(Ae, z.pi1).dot(df.d_pi1);
    }
  }
  return out;
}

/// Ostrogradsky-Hamilton-Poincare equations (k <= 2), with v = dh/dgamma0:
///   rho' = v                          rho'' = dh/dgamma1
///   gamma0' = -d^h h/drho - <pi0 -/+ ad*_sigma pi1, B(v, .)>
///   gamma1' = -dh/drho'
///   pi0' = +/- ad*_{A v} pi0 -/+ ad*_{dh/dpi0} pi0
///   sigma' = dh/dpi1 -/+ [A v, sigma]
///   pi1' = -dh/dsigma +/- ad*_{A v} pi1
inline OHPState ohp_vector_field(const BundleHamiltonian& h, const Connection& c, const OHPState& z) {
  const OHPCovector dh = h.partials(z);
  detail::check_ohp(c, z, dh, "ohp_vector_field");
  const auto& g = *c.algebra;
  const double sg = sign(c.chirality);
  const bool k2 = z.order() == 2;
  const detail::ConnectionJet j(c, z.rho);
  const Vec v = dh.d_gamma0;
  const Vec a = j.A * v;

  Vec charge = z.pi0;
  if (k2) charge -= sg * g.ad_star(z.sigma, z.pi1);

  OHPState d;
  d.rho = v;
  d.gamma0 = -horizontal_rho_partial(c, z, dh) - j.force(charge, v);
  d.pi0 = sg * g.ad_star(a, z.pi0) - sg * g.ad_star(dh.d_pi0, z.pi0);
  if (k2) {
    d.rho_dot = dh.d_gamma1;
    d.gamma1 = -dh.d_rho_dot;
    d.sigma = dh.d_pi1 - sg * g.bracket(a, z.sigma);
    d.pi1 = -dh.d_sigma + sg * g.ad_star(a, z.pi1);
  }
  return d;
}

/// Gauged Poisson bracket: canonical brackets on the base (with horizontal
/// rho-derivatives) and on (sigma, pi1), the Lie-Poisson term on pi0 and the
/// curvature term <pi0 -/+ ad*_sigma pi1, B(df/dgamma0, dg/dgamma0)>. The
/// sign in front of ad*_sigma pi1 is the one for which f' = {f, h}
/// reproduces ohp_vector_field.
inline double gauged_bracket(const Connection& c, const OHPCovector& df, const OHPCovector& dg,
                             const OHPState& z) {
  detail::check_ohp(c, z, df, "gauged_bracket");
  detail::check_ohp(c, z, dg, "gauged_bracket");
  const auto& g = *c.algebra;
  const double sg = sign(c.chirality);
  const bool k2 = z.order() == 2;
  const Vec hf = horizontal_rho_partial(c, z, df);
  const Vec hg = horizontal_rho_partial(c, z, dg);
  double b = hf.dot(dg.d_gamma0) - hg.dot(df.d_gamma0);
  Vec charge = z.pi0;
  if (k2) {
    b += df.d_rho_dot.dot(dg.d_gamma1) - dg.d_rho_dot.dot(df.d_gamma1);
    b += df.d_sigma.dot(dg.d_pi1) - dg.d_sigma.dot(df.d_pi1);
    charge -= sg * g.ad_star(z.sigma, z.pi1);
  }
  b += sg * z.pi0.dot(g.bracket(df.d_pi0, dg.d_pi0));
  if (c.base_dim > 0) b += charge.dot(curvature(c, z.rho, df.d_gamma0, dg.d_gamma0));
  return b;
}

inline double gauged_bracket(const Connection& c, const OHPObservable& f, const OHPObservable& g,
                             const OHPState& z) {
  return gauged_bracket(c, f.partials(z), g.partials(z), z);
}

// ---------------------------------------------------------------------------
// Integration of slot-structured states

namespace detail {

template <class S>
Vec pack_slots(const S& s) {
  Eigen::Index n = 0;
  for (const Vec* v : s.slots()) n += v->size();
  Vec out(n);
  Eigen::Index o = 0;
  for (const Vec* v : s.slots()) {
    out.segment(o, v->size()) = *v;
    o += v->size();
  }
  return out;
}

template <class S>
S unpack_slots(const S& layout, const Vec& x) {
  S s;
  auto dst = s.slots();
  auto src = layout.slots();
  Eigen::Index o = 0;
  for (size_t i = 0; i < dst.size(); ++i) {
    *dst[i] = x.segment(o, src[i]->size());
    o += src[i]->size();
  }
  return s;
}

}  // namespace detail

template <class S>
struct SlotTrajectory {
  std::vector<double> t;
  std::vector<S> states;
};

/// RK4 on any slot-structured state (WongState, LPState, OHPState).
template <class S>
SlotTrajectory<S> simulate(const std::function<S(const S&)>& field, const S& s0, double T,
                           const IntegratorConfig& cfg = {}) {
  const Field f = [&](double, const Vec& x) {
    const S d = field(detail::unpack_slots(s0, x));
    // Derivative slots must mirror the state layout.
    auto ds = d.slots();
    auto ss = s0.slots();
    for (size_t i = 0; i < ds.size(); ++i) {
      if (ds[i]->size() != ss[i]->size()) throw InputError("simulate: field changed the state layout");
    }
    return detail::pack_slots(d);
  };
  const Trajectory tr = integrate(f, detail::pack_slots(s0), T, cfg);
  SlotTrajectory<S> out;
  out.t = tr.t;
  for (const auto& x : tr.x) out.states.push_back(detail::unpack_slots(s0, x));
  return out;
}

template <class S>
double slot_distance(const S& a, const S& b) {
  const Vec d = detail::pack_slots(a) - detail::pack_slots(b);
  return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace hogm

#endif  // HOGM_BUNDLE_HPP
