#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace hogm;
using hogm::test::fd_gradient;
using hogm::test::randn;
using hogm::test::random_jet;
using hogm::test::rel_err;

namespace {

const Inertia I123 = Inertia::diagonal(Vec(Eigen::Vector3d(1, 2, 3)));

std::vector<ReducedLagrangian> sample_models() {
  std::vector<ReducedLagrangian> ms;
  for (Chirality ch : {Chirality::Left, Chirality::Right}) {
    ms.push_back(rigid_body(LieAlgebra::so3(), I123, ch));
    ms.push_back(spline2(LieAlgebra::so3(), I123, false, 0.0, ch));
    ms.push_back(spline2(LieAlgebra::so3(), I123, false, 0.7, ch));
    ms.push_back(spline2(LieAlgebra::so3(), Inertia::identity(3), true, 0.0, ch));
    ms.push_back(spline2(LieAlgebra::se3(), Inertia::diagonal(randn(6).cwiseAbs().array() + 0.5), false,
                         0.3, ch));
    ms.push_back(quadratic2(LieAlgebra::so3(), I123, Inertia::diagonal(Vec(Eigen::Vector3d(2, 1, 1))), ch));
    ms.push_back(quadratic3(LieAlgebra::so3(), I123, ch));
  }
  return ms;
}

// Momenta oracle: evaluates the gradients along the Taylor curve through the
// extended jet and differentiates them numerically in time.
Jet momenta_by_time_differencing(const ReducedLagrangian& m, const Jet& full) {
  const int k = m.order;
  auto curve_grads = [&](double t) {
    Jet j(k, Vec::Zero(m.dim()));
    for (int i = 0; i < k; ++i) {
      double fact = 1.0;
      for (int p = 0; i + p < static_cast<int>(full.size()); ++p) {
        if (p > 0) fact *= p;
        j[i] += std::pow(t, p) / fact * full[i + p];
      }
    }
    return m.grads(j);
  };
  const double h = 1e-2;
  // Fourth-order stencils for first and second derivatives.
  std::vector<Jet> g;
  for (int s = -2; s <= 2; ++s) g.push_back(curve_grads(s * h));
  auto d1 = [&](int slot) {
    return Vec((g[0][slot] - 8.0 * g[1][slot] + 8.0 * g[3][slot] - g[4][slot]) / (12.0 * h));
  };
  auto d2 = [&](int slot) {
    return Vec((-g[0][slot] + 16.0 * g[1][slot] - 30.0 * g[2][slot] + 16.0 * g[3][slot] - g[4][slot]) /
               (12.0 * h * h));
  };
  Jet pi(k);
  for (int i = 0; i < k; ++i) {
    pi[i] = g[2][i];
    if (i + 1 < k) pi[i] -= d1(i + 1);
    if (i + 2 < k) pi[i] += d2(i + 2);
  }
  return pi;
}

}  // namespace

TEST(Models, RigidBodyExamples) {
  const auto m = rigid_body(LieAlgebra::so3(), I123, Chirality::Left);
  EXPECT_DOUBLE_EQ(m.eval({Vec::Unit(3, 0)}), 0.5);
  EXPECT_EQ(m.grads({Vec::Unit(3, 1)})[0], Vec(Eigen::Vector3d(0, 2, 0)));
}

TEST(Models, BiInvariantSplineExample) {
  const auto m = spline2(LieAlgebra::so3(), Inertia::identity(3), true, 0.0, Chirality::Right);
  EXPECT_DOUBLE_EQ(m.eval({Vec::Unit(3, 0), Vec::Zero(3)}), 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec xi = randn(3);
    EXPECT_LT(m.algebra->ad_star(xi, m.inertia.flat(xi)).norm(), 1e-10);
    const Vec xid = randn(3);
    EXPECT_NEAR(m.eval({xi, xid}), 0.5 * xid.squaredNorm(), 1e-12);
  }
}

TEST(Models, AbelianSplineIsHalfSquaredAcceleration) {
  const auto m = spline2(LieAlgebra::abelian(3), Inertia::identity(3), false, 0.0, Chirality::Left);
  const Vec xi = randn(3), xid = randn(3);
  EXPECT_NEAR(m.eval({xi, xid}), 0.5 * xid.squaredNorm(), 1e-14);
}

TEST(Models, BiInvariantFlagRequiresAdInvariance) {
  EXPECT_THROW(spline2(LieAlgebra::so3(), I123, true, 0.0, Chirality::Left), InputError);
  EXPECT_THROW(rigid_body(LieAlgebra::so3(), Inertia::identity(2), Chirality::Left), InputError);
}

TEST(Models, GradientsMatchFiniteDifferences) {
  for (const auto& m : sample_models()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Jet j = random_jet(m.order, m.dim());
      const Jet g = m.grads(j);
      for (int slot = 0; slot < m.order; ++slot) {
        const Vec fd = fd_gradient(
            [&](const Vec& v) {
              Jet jj = j;
              jj[slot] = v;
              return m.eval(jj);
            },
            j[slot]);
        EXPECT_LT(rel_err(g[slot], fd), 1e-6) << to_string(m.family) << " slot " << slot;
      }
    }
  }
}

TEST(Models, AccelInvertsTopSlot) {
  for (const auto& m : sample_models()) {
    for (int trial = 0; trial < 50; ++trial) {
      const Jet lower = random_jet(m.lower_jet_size(), m.dim());
      const Vec mu = randn(m.dim());
      Jet full = lower;
      full.push_back(m.accel(lower, mu));
      EXPECT_LT((m.momenta(full)[0] - mu).norm(), 1e-9 * std::max(1.0, mu.norm())) << to_string(m.family);
    }
  }
}

TEST(Models, MomentaMatchTimeDifferencedGradients) {
  for (const auto& m : sample_models()) {
    for (int trial = 0; trial < 10; ++trial) {
      const Jet full = random_jet(m.full_jet_size(), m.dim(), 0.5);
      const Jet pi = m.momenta(full);
      const Jet ref = momenta_by_time_differencing(m, full);
      for (int i = 0; i < m.order; ++i) {
        EXPECT_LT(rel_err(pi[i], ref[i]), 1e-6) << to_string(m.family) << " pi_" << i;
      }
    }
  }
}

TEST(Models, BiInvariantSplineMomenta) {
  const auto m = spline2(LieAlgebra::so3(), Inertia::identity(3), true, 0.0, Chirality::Left);
  const Jet full = random_jet(3, 3);
  const Jet pi = m.momenta(full);
  EXPECT_LT((pi[1] - full[1]).norm(), 1e-12);
  EXPECT_LT((pi[0] + full[2]).norm(), 1e-12);
}

TEST(Models, HyperregularityDetected) {
  auto m = quadratic2(LieAlgebra::so3(), I123, I123, Chirality::Left);
  // Top slot drops out of pi_0 entirely.
  m.momenta = [](const Jet& j) { return Jet{j[0], j[1]}; };
  EXPECT_THROW(detail::check_hyperregular(m), HyperregularityError);
}

TEST(Hamiltonians, PartialsMatchFiniteDifferences) {
  for (const auto& m : sample_models()) {
    const ReducedHamiltonian h = hamiltonian(m);
    for (int trial = 0; trial < 50; ++trial) {
      OLPState z;
      z.xi = random_jet(m.order - 1, m.dim());
      z.pi = random_jet(m.order - 1, m.dim());
      z.pi0 = randn(m.dim());
      const OLPCovector c = h.partials(z);
      for (size_t s = 0; s < z.xi.size(); ++s) {
        const Vec fx = fd_gradient([&](const Vec& v) { OLPState q = z; q.xi[s] = v; return h.eval(q); }, z.xi[s]);
        EXPECT_LT(rel_err(c.d_xi[s], fx), 1e-6) << to_string(m.family);
        const Vec fp = fd_gradient([&](const Vec& v) { OLPState q = z; q.pi[s] = v; return h.eval(q); }, z.pi[s]);
        EXPECT_LT(rel_err(c.d_pi[s], fp), 1e-6) << to_string(m.family);
      }
      const Vec f0 = fd_gradient([&](const Vec& v) { OLPState q = z; q.pi0 = v; return h.eval(q); }, z.pi0);
      EXPECT_LT(rel_err(c.d_pi0, f0), 1e-6) << to_string(m.family);
    }
  }
}

TEST(Hamiltonians, SplineClosedFormCases) {
  const auto ab = spline2(LieAlgebra::abelian(3), Inertia::identity(3), false, 0.0, Chirality::Right);
  const auto h = spline2_hamiltonian(ab);
  OLPState z{{randn(3)}, {randn(3)}, randn(3)};
  EXPECT_NEAR(h.eval(z), 0.5 * z.pi[0].squaredNorm() + z.pi0.dot(z.xi[0]), 1e-13);

  const auto bi = spline2(LieAlgebra::so3(), Inertia::identity(3), true, 0.0, Chirality::Left);
  const auto hb = spline2_hamiltonian(bi);
  EXPECT_NEAR(hb.eval(z), 0.5 * z.pi[0].squaredNorm() + z.pi0.dot(z.xi[0]), 1e-13);

  EXPECT_THROW(spline2_hamiltonian(rigid_body(LieAlgebra::so3(), I123, Chirality::Left)), InputError);
}
