#ifndef HOGM_MODELS_HPP
#define HOGM_MODELS_HPP

#include <functional>
#include <optional>
#include <random>
#include <string>

#include "hogm/algebra.hpp"
#include "hogm/core.hpp"

namespace hogm {

enum class ModelFamily {
  RigidBody,   // k = 1, l = 1/2 <I xi, xi>
  Spline2,     // k = 2, l = 1/2 |xi'^flat +/- ad*_xi xi^flat|^2 + tau^2/2 <I xi, xi>
  Quadratic2,  // k = 2, l = 1/2 <K xi, xi> + 1/2 <L xi', xi'>
  Quadratic3,  // k = 3, l = 1/2 <I xi'', xi''>
};

inline std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::RigidBody: return "rigid_body";
    case ModelFamily::Spline2: return "spline2";
    case ModelFamily::Quadratic2: return "quadratic2";
    case ModelFamily::Quadratic3: return "quadratic3";
  }
  return "?";
}

/// Reduced Lagrangian l(xi, xi', ..., xi^(k-1)) on k copies of the algebra.
///
/// Jets passed to `eval`/`grads` hold k entries. `momenta` takes the extended
/// jet (xi, ..., xi^(2k-2)) and returns the Ostrogradsky momenta
/// pi_(i) = sum_j (-1)^j d^j/dt^j dl/dxi^(i+j), i = 0..k-1, with the time
/// derivatives expanded in closed form. `accel` inverts pi_(0) for the top
/// entry: given (xi, ..., xi^(2k-3)) and pi_(0) it returns xi^(2k-2).
struct ReducedLagrangian {
  ModelFamily family;
  int order;
  AlgebraPtr algebra;
  Chirality chirality;
  Inertia inertia;
  std::optional<Inertia> inertia2{};  // L for Quadratic2
  double tau = 0.0;
  bool bi_invariant = false;

  std::function<double(const Jet&)> eval{};
  std::function<Jet(const Jet&)> grads{};
  std::function<Jet(const Jet&)> momenta{};
  std::function<Vec(const Jet&, const Vec&)> accel{};
  bool hyperregular = true;

  int dim() const { return algebra->dim(); }
  /// Entries of the extended jet consumed by `momenta`.
  int full_jet_size() const { return 2 * order - 1; }
  /// Entries of the jet carried alongside pi_(0) in the Euler-Poincare state.
  int lower_jet_size() const { return 2 * order - 2; }
};

/// Phase point (xi, ..., xi^(k-2), pi_(1), ..., pi_(k-1), pi_(0)).
struct OLPState {
  Jet xi;  // k-1 entries
  Jet pi;  // pi_(1) .. pi_(k-1)
  Vec pi0;
};

/// Partial derivatives of a scalar on OLP space, laid out like OLPState:
/// d_xi[j] = df/dxi^(j) (dual), d_pi[j-1] = df/dpi_(j) and d_pi0 = df/dpi_(0)
/// (algebra vectors).
struct OLPCovector {
  Jet d_xi;
  Jet d_pi;
  Vec d_pi0;
};

struct ReducedHamiltonian {
  int order;
  AlgebraPtr algebra;
  Chirality chirality;
  std::function<double(const OLPState&)> eval{};
  std::function<OLPCovector(const OLPState&)> partials{};
};

namespace detail {

inline void check_jet(const Jet& jet, size_t n, int d, const char* what) {
  if (jet.size() != n) {
    throw InputError(std::string(what) + ": expected " + std::to_string(n) + " jet entries, got " +
                     std::to_string(jet.size()));
  }
  for (const auto& v : jet) require_dim(v, d, what);
}

/// Top-slot sensitivity of pi_(0) by centered differences; returns its
/// condition number at the given extended jet.
inline double top_slot_condition(const ReducedLagrangian& m, const Jet& full) {
  const int d = m.dim();
  Mat J(d, d);
  const double h = 1e-5;
  for (int i = 0; i < d; ++i) {
    Jet p = full, q = full;
    p.back()(i) += h;
    q.back()(i) -= h;
    J.col(i) = (m.momenta(p)[0] - m.momenta(q)[0]) / (2.0 * h);
  }
  const Eigen::JacobiSVD<Mat> svd(J);
  const Vec sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 0.0)) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

/// Samples a few jets and throws HyperregularityError when the top-slot
/// Legendre map has condition number >= 1e10.
inline void check_hyperregular(const ReducedLagrangian& m) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> n01;
  for (int s = 0; s < 4; ++s) {
    Jet full(m.full_jet_size());
    for (auto& v : full) {
      v.resize(m.dim());
      for (int i = 0; i < m.dim(); ++i) v(i) = n01(rng);
    }
    const double cond = top_slot_condition(m, full);
    if (!(cond < 1e10)) {
      throw HyperregularityError(to_string(m.family) + ": top-slot Legendre map is singular (condition " +
                                 std::to_string(cond) + ")");
    }
  }
}

}  // namespace detail

inline ReducedLagrangian rigid_body(AlgebraPtr g, const Inertia& I, Chirality ch) {
  if (I.dim() != g->dim()) throw InputError("rigid_body: inertia dimension mismatch");
  ReducedLagrangian m{.family = ModelFamily::RigidBody, .order = 1, .algebra = g, .chirality = ch, .inertia = I};
  const int d = g->dim();
  m.eval = [I, d](const Jet& j) {
    detail::check_jet(j, 1, d, "rigid_body");
    return 0.5 * I.norm2(j[0]);
  };
  m.grads = [I, d](const Jet& j) {
    detail::check_jet(j, 1, d, "rigid_body");
    return Jet{I.flat(j[0])};
  };
  m.momenta = m.grads;
  m.accel = [I](const Jet&, const Vec& mu) { return I.sharp(mu); };
  detail::check_hyperregular(m);
  return m;
}

namespace detail {

/// Closed forms for the 2-spline Lagrangian. With a(xi) = ad*_xi I xi and
/// eta = xi' + s I^-1 a(xi):
///   dl/dxi' = I eta
///   dl/dxi  = -s (ad*_eta I xi + I ad_eta xi) + tau^2 I xi
///   d/dt (I eta) = I xi'' + s (ad*_xi' I xi + ad*_xi I xi')
struct Spline2Forms {
  AlgebraPtr g;
  Inertia I;
  double s;
  double tau;

  Vec a(const Vec& xi) const { return g->ad_star(xi, I.flat(xi)); }
  Vec eta(const Vec& xi, const Vec& xid) const { return xid + s * I.sharp(a(xi)); }
  Vec dl_dxi(const Vec& xi, const Vec& eta_v) const {
    const Vec Ixi = I.flat(xi);
    return -s * (g->ad_star(eta_v, Ixi) + I.flat(g->bracket(eta_v, xi))) + tau * tau * Ixi;
  }
  Vec d_eta_flat_rest(const Vec& xi, const Vec& xid) const {
    return s * (g->ad_star(xid, I.flat(xi)) + g->ad_star(xi, I.flat(xid)));
  }
};

}  // namespace detail

/// Elastic 2-spline on a group with left/right invariant metric I. When
/// `bi_invariant` is set, I is checked for ad-invariance.
inline ReducedLagrangian spline2(AlgebraPtr g, const Inertia& I, bool bi_invariant, double tau,
                                 Chirality ch) {
  if (I.dim() != g->dim()) throw InputError("spline2: inertia dimension mismatch");
  if (bi_invariant && I.ad_invariance_residual(*g) > 1e-10) {
    throw InputError("spline2: inertia is not ad-invariant but bi_invariant was requested");
  }
  const int d = g->dim();
  const detail::Spline2Forms f{g, I, sign(ch), tau};
  ReducedLagrangian m{.family = ModelFamily::Spline2, .order = 2, .algebra = g, .chirality = ch, .inertia = I};
  m.tau = tau;
  m.bi_invariant = bi_invariant;
  m.eval = [f, d](const Jet& j) {
    detail::check_jet(j, 2, d, "spline2");
    const Vec eta = f.eta(j[0], j[1]);
    return 0.5 * f.I.norm2(eta) + 0.5 * f.tau * f.tau * f.I.norm2(j[0]);
  };
  m.grads = [f, d](const Jet& j) {
    detail::check_jet(j, 2, d, "spline2");
    const Vec eta = f.eta(j[0], j[1]);
    return Jet{f.dl_dxi(j[0], eta), f.I.flat(eta)};
  };
  m.momenta = [f, d](const Jet& j) {
    detail::check_jet(j, 3, d, "spline2 momenta");
    const Vec eta = f.eta(j[0], j[1]);
    const Vec deta = f.I.flat(j[2]) + f.d_eta_flat_rest(j[0], j[1]);
    return Jet{f.dl_dxi(j[0], eta) - deta, f.I.flat(eta)};
  };
  m.accel = [f, d](const Jet& lo, const Vec& mu) {
    detail::check_jet(lo, 2, d, "spline2 accel");
    const Vec eta = f.eta(lo[0], lo[1]);
    return f.I.sharp(f.dl_dxi(lo[0], eta) - f.d_eta_flat_rest(lo[0], lo[1]) - mu);
  };
  detail::check_hyperregular(m);
  return m;
}

/// l = 1/2 <K xi, xi> + 1/2 <L xi', xi'>: the fiber part of the second-order
/// Kaluza-Klein Lagrangian.
inline ReducedLagrangian quadratic2(AlgebraPtr g, const Inertia& K, const Inertia& L, Chirality ch) {
  if (K.dim() != g->dim() || L.dim() != g->dim()) throw InputError("quadratic2: dimension mismatch");
  const int d = g->dim();
  ReducedLagrangian m{.family = ModelFamily::Quadratic2, .order = 2, .algebra = g, .chirality = ch, .inertia = K};
  m.inertia2 = L;
  m.eval = [K, L, d](const Jet& j) {
    detail::check_jet(j, 2, d, "quadratic2");
    return 0.5 * K.norm2(j[0]) + 0.5 * L.norm2(j[1]);
  };
  m.grads = [K, L, d](const Jet& j) {
    detail::check_jet(j, 2, d, "quadratic2");
    return Jet{K.flat(j[0]), L.flat(j[1])};
  };
  m.momenta = [K, L, d](const Jet& j) {
    detail::check_jet(j, 3, d, "quadratic2 momenta");
    return Jet{K.flat(j[0]) - L.flat(j[2]), L.flat(j[1])};
  };
  m.accel = [K, L, d](const Jet& lo, const Vec& mu) {
    detail::check_jet(lo, 2, d, "quadratic2 accel");
    return L.sharp(K.flat(lo[0]) - mu);
  };
  detail::check_hyperregular(m);
  return m;
}

/// l = 1/2 <I xi'', xi''>, the third-order quadratic model.
inline ReducedLagrangian quadratic3(AlgebraPtr g, const Inertia& I, Chirality ch) {
  if (I.dim() != g->dim()) throw InputError("quadratic3: inertia dimension mismatch");
  const int d = g->dim();
  ReducedLagrangian m{.family = ModelFamily::Quadratic3, .order = 3, .algebra = g, .chirality = ch, .inertia = I};
  m.eval = [I, d](const Jet& j) {
    detail::check_jet(j, 3, d, "quadratic3");
    return 0.5 * I.norm2(j[2]);
  };
  m.grads = [I, d](const Jet& j) {
    detail::check_jet(j, 3, d, "quadratic3");
    return Jet{Vec::Zero(d), Vec::Zero(d), I.flat(j[2])};
  };
  m.momenta = [I, d](const Jet& j) {
    detail::check_jet(j, 5, d, "quadratic3 momenta");
    return Jet{I.flat(j[4]), -I.flat(j[3]), I.flat(j[2])};
  };
  m.accel = [I, d](const Jet& lo, const Vec& mu) {
    detail::check_jet(lo, 4, d, "quadratic3 accel");
    return I.sharp(mu);
  };
  detail::check_hyperregular(m);
  return m;
}

/// Hamiltonian of the 2-spline,
///   h = 1/2 |pi1|^2 + <pi0, xi> -/+ <pi1, (ad*_xi xi^flat)^sharp> - tau^2/2 <I xi, xi>.
inline ReducedHamiltonian spline2_hamiltonian(const ReducedLagrangian& m) {
  if (m.family != ModelFamily::Spline2 || m.order != 2) {
    throw InputError("spline2_hamiltonian: model is not a 2-spline (order mismatch)");
  }
  const detail::Spline2Forms f{m.algebra, m.inertia, sign(m.chirality), m.tau};
  ReducedHamiltonian h{.order = 2, .algebra = m.algebra, .chirality = m.chirality};
  h.eval = [f](const OLPState& z) {
    const Vec& xi = z.xi.at(0);
    const Vec& p1 = z.pi.at(0);
    return 0.5 * f.I.dual_norm2(p1) + z.pi0.dot(xi) - f.s * p1.dot(f.I.sharp(f.a(xi))) -
           0.5 * f.tau * f.tau * f.I.norm2(xi);
  };
  h.partials = [f](const OLPState& z) {
    const Vec& xi = z.xi.at(0);
    const Vec& p1 = z.pi.at(0);
    const Vec w = f.I.sharp(p1);
    const Vec da = -f.s * (-f.g->ad_star(w, f.I.flat(xi)) + f.I.flat(f.g->bracket(xi, w)));
    OLPCovector c;
    c.d_xi = {z.pi0 + da - f.tau * f.tau * f.I.flat(xi)};
    c.d_pi = {w - f.s * f.I.sharp(f.a(xi))};
    c.d_pi0 = xi;
    return c;
  };
  return h;
}

/// h = e_l o leg^-1 for every built-in family.
inline ReducedHamiltonian hamiltonian(const ReducedLagrangian& m) {
  ReducedHamiltonian h{.order = m.order, .algebra = m.algebra, .chirality = m.chirality};
  switch (m.family) {
    case ModelFamily::Spline2:
      return spline2_hamiltonian(m);
    case ModelFamily::RigidBody: {
      const Inertia I = m.inertia;
      h.eval = [I](const OLPState& z) { return 0.5 * I.dual_norm2(z.pi0); };
      h.partials = [I](const OLPState& z) {
        OLPCovector c;
        c.d_pi0 = I.sharp(z.pi0);
        return c;
      };
      return h;
    }
    case ModelFamily::Quadratic2: {
      const Inertia K = m.inertia, L = *m.inertia2;
      h.eval = [K, L](const OLPState& z) {
        return z.pi0.dot(z.xi.at(0)) + 0.5 * L.dual_norm2(z.pi.at(0)) - 0.5 * K.norm2(z.xi.at(0));
      };
      h.partials = [K, L](const OLPState& z) {
        OLPCovector c;
        c.d_xi = {z.pi0 - K.flat(z.xi.at(0))};
        c.d_pi = {L.sharp(z.pi.at(0))};
        c.d_pi0 = z.xi.at(0);
        return c;
      };
      return h;
    }
    case ModelFamily::Quadratic3: {
      const Inertia I = m.inertia;
      h.eval = [I](const OLPState& z) {
        return z.pi0.dot(z.xi.at(0)) + z.pi.at(0).dot(z.xi.at(1)) + 0.5 * I.dual_norm2(z.pi.at(1));
      };
      h.partials = [I](const OLPState& z) {
        OLPCovector c;
        c.d_xi = {z.pi0, z.pi.at(0)};
        c.d_pi = {z.xi.at(1), I.sharp(z.pi.at(1))};
        c.d_pi0 = z.xi.at(0);
        return c;
      };
      return h;
    }
  }
  throw InputError("hamiltonian: unknown model family");
}

}  // namespace hogm

#endif  // HOGM_MODELS_HPP
