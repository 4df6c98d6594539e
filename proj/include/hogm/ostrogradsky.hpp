#ifndef HOGM_OSTROGRADSKY_HPP
#define HOGM_OSTROGRADSKY_HPP

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "hogm/algebra.hpp"
#include "hogm/core.hpp"
#include "hogm/euler_poincare.hpp"
#include "hogm/integrate.hpp"
#include "hogm/models.hpp"

namespace hogm {

/// Reduced Legendre transform (xi, ..., xi^(2k-2)) -> OLPState with
/// pi_(i) = sum_{j=0}^{k-i-1} (-1)^j d^j/dt^j dl/dxi^(i+j).
inline OLPState legendre(const ReducedLagrangian& model, const Jet& full_jet) {
  const auto pis = model.momenta(full_jet);
  OLPState z;
  z.xi.assign(full_jet.begin(), full_jet.begin() + (model.order - 1));
  z.pi.assign(pis.begin() + 1, pis.end());
  z.pi0 = pis[0];
  return z;
}

/// e_l = sum_{i=0}^{k-1} <pi_(i), xi^(i)> - l(xi, ..., xi^(k-1)).
inline double reduced_energy(const ReducedLagrangian& model, const Jet& full_jet) {
  const auto pis = model.momenta(full_jet);
  double e = 0.0;
  for (int i = 0; i < model.order; ++i) e += pis[i].dot(full_jet[i]);
  return e - model.eval(Jet(full_jet.begin(), full_jet.begin() + model.order));
}

/// Ostrogradsky-Lie-Poisson flow:
///   pi0' = -/+ ad*_{dh/dpi0} pi0,  xi^(j-1)' = dh/dpi_(j),  pi_(j)' = -dh/dxi^(j-1).
inline OLPState olp_vector_field(const ReducedHamiltonian& h, const OLPState& z) {
  const OLPCovector c = h.partials(z);
  if (c.d_xi.size() != z.xi.size() || c.d_pi.size() != z.pi.size() || c.d_pi0.size() != z.pi0.size()) {
    throw InputError("olp_vector_field: Hamiltonian partials do not match the state layout");
  }
  OLPState d;
  d.xi = c.d_pi;
  d.pi.resize(z.pi.size());
  for (size_t j = 0; j < z.pi.size(); ++j) d.pi[j] = -c.d_xi[j];
  d.pi0 = -sign(h.chirality) * h.algebra->ad_star(c.d_pi0, z.pi0);
  return d;
}

/// Scalar on OLP space with exact partials.
struct OLPObservable {
  std::function<double(const OLPState&)> eval;
  std::function<OLPCovector(const OLPState&)> partials;
};

/// {f, g} = sum_j (df/dxi^(j-1) dg/dpi_(j) - dg/dxi^(j-1) df/dpi_(j))
///          +/- <pi0, [df/dpi0, dg/dpi0]>.
inline double reduced_bracket(const LieAlgebra& alg, Chirality ch, const OLPCovector& df,
                              const OLPCovector& dg, const OLPState& z) {
  double b = 0.0;
  for (size_t j = 0; j < z.xi.size(); ++j) {
    b += df.d_xi[j].dot(dg.d_pi[j]) - dg.d_xi[j].dot(df.d_pi[j]);
  }
  return b + sign(ch) * z.pi0.dot(alg.bracket(df.d_pi0, dg.d_pi0));
}

inline double reduced_bracket(const LieAlgebra& alg, Chirality ch, const OLPObservable& f,
                              const OLPObservable& g, const OLPState& z) {
  return reduced_bracket(alg, ch, f.partials(z), g.partials(z), z);
}

namespace detail {

inline Vec pack_olp(const OLPState& z) {
  Eigen::Index n = z.pi0.size();
  for (const auto& v : z.xi) n += v.size();
  for (const auto& v : z.pi) n += v.size();
  Vec out(n);
  Eigen::Index o = 0;
  for (const auto* part : {&z.xi, &z.pi}) {
    for (const auto& v : *part) {
      out.segment(o, v.size()) = v;
      o += v.size();
    }
  }
  out.segment(o, z.pi0.size()) = z.pi0;
  return out;
}

inline OLPState unpack_olp(int order, int d, const Vec& x) {
  OLPState z;
  z.xi.resize(order - 1);
  z.pi.resize(order - 1);
  Eigen::Index o = 0;
  for (auto* part : {&z.xi, &z.pi}) {
    for (auto& v : *part) {
      v = x.segment(o, d);
      o += d;
    }
  }
  z.pi0 = x.segment(o, d);
  return z;
}

}  // namespace detail

struct OLPTrajectory {
  std::vector<double> t;
  std::vector<OLPState> states;
};

inline OLPTrajectory simulate_olp(const ReducedHamiltonian& h, const OLPState& z0, double T,
                                  const IntegratorConfig& cfg = {}) {
  const int d = h.algebra->dim();
  if (static_cast<int>(z0.xi.size()) != h.order - 1 || static_cast<int>(z0.pi.size()) != h.order - 1) {
    throw InputError("simulate_olp: state layout does not match the Hamiltonian order");
  }
  require_dim(z0.pi0, d, "simulate_olp: pi0");
  const Field f = [&h, d](double, const Vec& x) {
    return detail::pack_olp(olp_vector_field(h, detail::unpack_olp(h.order, d, x)));
  };
  const Trajectory tr = integrate(f, detail::pack_olp(z0), T, cfg);
  OLPTrajectory out;
  out.t = tr.t;
  for (const auto& x : tr.x) out.states.push_back(detail::unpack_olp(h.order, d, x));
  return out;
}

/// Sup-norm distance between two OLP states.
inline double olp_distance(const OLPState& a, const OLPState& b) {
  return (detail::pack_olp(a) - detail::pack_olp(b)).cwiseAbs().maxCoeff();
}

/// Integrates EP and OLP from Legendre-matched data and returns the sup-norm
/// deviation of legendre(EP) from OLP over all steps.
inline double olp_equivalence_check(const ReducedLagrangian& model, const Jet& full_jet0, double T,
                                    double dt) {
  const ReducedHamiltonian h = hamiltonian(model);
  const IntegratorConfig cfg{dt};
  const EPState s0 = make_ep_state(model, model.algebra->identity(), full_jet0);
  const EPTrajectory ep = simulate_ep(model, s0, T, cfg);
  const OLPTrajectory olp = simulate_olp(h, legendre(model, full_jet0), T, cfg);
  double worst = 0.0;
  for (size_t i = 0; i < ep.states.size(); ++i) {
    const OLPState z = legendre(model, ep_full_jet(model, ep.states[i]));
    worst = std::max(worst, olp_distance(z, olp.states[i]));
  }
  return worst;
}

}  // namespace hogm

#endif  // HOGM_OSTROGRADSKY_HPP
