#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace hogm;
using hogm::test::randn;
using hogm::test::random_jet;

namespace {

const Inertia I123 = Inertia::diagonal(Vec(Eigen::Vector3d(1, 2, 3)));
const Chirality kBoth[] = {Chirality::Left, Chirality::Right};

Vec v3(double a, double b, double c) { return Vec(Eigen::Vector3d(a, b, c)); }

std::vector<ReducedLagrangian> all_models(Chirality ch) {
  const auto so3 = LieAlgebra::so3();
  return {rigid_body(so3, I123, ch), spline2(so3, Inertia::identity(3), true, 0.0, ch),
          spline2(so3, I123, false, 0.7, ch), spline2(LieAlgebra::se3(), Inertia::identity(6), false, 0.0, ch),
          quadratic2(so3, I123, Inertia::diagonal(v3(2, 1, 3)), ch), quadratic3(so3, I123, ch)};
}

OLPState random_olp(int order, int d) {
  return detail::unpack_olp(order, d, randn((2 * order - 1) * d));
}

// Poisson tensor built directly from structure constants:
// canonical (xi, pi) blocks plus s * sum_k pi0_k c^k_ab on the pi0 block.
Mat poisson_tensor(const LieAlgebra& g, Chirality ch, int order, const Vec& z) {
  const int d = g.dim(), n = (2 * order - 1) * d, half = (order - 1) * d;
  Mat J = Mat::Zero(n, n);
  J.block(0, half, half, half) = Mat::Identity(half, half);
  J.block(half, 0, half, half) = -Mat::Identity(half, half);
  const auto& c = g.structure_constants();
  const Vec pi0 = z.tail(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double v = 0.0;
      for (int k = 0; k < d; ++k) v += pi0(k) * c[(k * d + a) * d + b];
      J(2 * half + a, 2 * half + b) = sign(ch) * v;
    }
  return J;
}

struct Quadratic {
  Mat A;
  Vec c;
  Vec grad(const Vec& z) const { return A * z + c; }
  double eval(const Vec& z) const { return 0.5 * z.dot(A * z) + c.dot(z); }
};

Quadratic random_quadratic(int n) {
  const Mat M = Mat::Random(n, n);
  return {M + M.transpose(), randn(n)};
}

OLPCovector as_covector(int order, int d, const Vec& g) {
  const OLPState s = detail::unpack_olp(order, d, g);
  return {s.xi, s.pi, s.pi0};
}

}  // namespace

TEST(Ostrogradsky, LegendreExamples) {
  const auto so3 = LieAlgebra::so3();
  for (Chirality ch : kBoth) {
    const Vec w = randn(3);
    const OLPState rb = legendre(rigid_body(so3, I123, ch), {w});
    EXPECT_TRUE(rb.xi.empty());
    EXPECT_LT((rb.pi0 - Vec(v3(1, 2, 3).cwiseProduct(w))).norm(), 1e-15);
    // Bi-invariant spline with I = 1: pi1 = xi', pi0 = -xi''.
    const Jet j = random_jet(3, 3);
    const OLPState sp = legendre(spline2(so3, Inertia::identity(3), true, 0.0, ch), j);
    EXPECT_LT((sp.xi[0] - j[0]).norm(), 1e-15);
    EXPECT_LT((sp.pi[0] - j[1]).norm(), 1e-14);
    EXPECT_LT((sp.pi0 + j[2]).norm(), 1e-14);
  }
}

TEST(Ostrogradsky, HamiltonianOfLegendreIsEnergy) {
  for (Chirality ch : kBoth) {
    for (const auto& m : all_models(ch)) {
      const ReducedHamiltonian h = hamiltonian(m);
      for (int trial = 0; trial < 20; ++trial) {
        const Jet j = random_jet(m.full_jet_size(), m.dim());
        const double e = reduced_energy(m, j);
        EXPECT_LT(std::abs(h.eval(legendre(m, j)) - e), 1e-10 * std::max(1.0, std::abs(e))) << to_string(m.family);
      }
    }
  }
}

TEST(Ostrogradsky, ReducedEnergyExamples) {
  const Vec w = randn(3);
  EXPECT_NEAR(reduced_energy(rigid_body(LieAlgebra::so3(), I123, Chirality::Left), {w}),
              0.5 * w.dot(v3(1, 2, 3).cwiseProduct(w)), 1e-14);
  // Abelian cubic: e = 1/2 |xi'|^2 - <xi'', xi>.
  const Jet j = random_jet(3, 2);
  const auto m = spline2(LieAlgebra::abelian(2), Inertia::identity(2), false, 0.0, Chirality::Right);
  EXPECT_NEAR(reduced_energy(m, j), 0.5 * j[1].squaredNorm() - j[2].dot(j[0]), 1e-14);
}

TEST(Ostrogradsky, RigidBodyFieldIsEulerEquation) {
  const auto so3 = LieAlgebra::so3();
  const Vec p = randn(3);
  const Eigen::Vector3d P = p, w = v3(1, 0.5, 1.0 / 3).cwiseProduct(p);
  const auto left = olp_vector_field(hamiltonian(rigid_body(so3, I123, Chirality::Left)), OLPState{{}, {}, p});
  EXPECT_LT((left.pi0 - Vec(P.cross(w))).norm(), 1e-14);
  const auto right = olp_vector_field(hamiltonian(rigid_body(so3, I123, Chirality::Right)), OLPState{{}, {}, p});
  EXPECT_LT((right.pi0 + Vec(P.cross(w))).norm(), 1e-14);
}

TEST(Ostrogradsky, AbelianSplineField) {
  const auto m = spline2(LieAlgebra::abelian(3), Inertia::identity(3), false, 0.0, Chirality::Left);
  const OLPState z = random_olp(2, 3);
  const OLPState d = olp_vector_field(hamiltonian(m), z);
  EXPECT_LT((d.xi[0] - z.pi[0]).norm(), 1e-15);
  EXPECT_LT((d.pi[0] + z.pi0).norm(), 1e-15);
  EXPECT_EQ(d.pi0, Vec::Zero(3));
}

TEST(Ostrogradsky, EnergyAndCasimirConservation) {
  const auto so3 = LieAlgebra::so3();
  for (Chirality ch : kBoth) {
    for (const auto& m : {rigid_body(so3, I123, ch), spline2(so3, I123, false, 0.0, ch)}) {
      const ReducedHamiltonian h = hamiltonian(m);
      Jet j{v3(0.4, -0.3, 0.6), v3(0.2, 0.1, -0.2), v3(-0.1, 0.3, 0.2)};
      j.resize(m.full_jet_size());
      const OLPState z0 = legendre(m, j);
      const auto tr = simulate_olp(h, z0, 10.0, IntegratorConfig{1e-3});
      const double h0 = h.eval(z0), c0 = z0.pi0.squaredNorm();
      double dh = 0.0, dc = 0.0;
      for (const auto& z : tr.states) {
        dh = std::max(dh, std::abs(h.eval(z) - h0));
        dc = std::max(dc, std::abs(z.pi0.squaredNorm() - c0));
      }
      EXPECT_LT(dh, 1e-8) << to_string(m.family);
      EXPECT_LT(dc, 1e-8) << to_string(m.family);
    }
  }
}

TEST(Ostrogradsky, BracketMatchesStructureConstantTensor) {
  for (const auto& g : {LieAlgebra::so3(), LieAlgebra::se3()}) {
    for (Chirality ch : kBoth) {
      for (int order : {1, 2, 3}) {
        const int d = g->dim(), n = (2 * order - 1) * d;
        const Vec z = randn(n), a = randn(n), b = randn(n);
        const double ref = a.dot(poisson_tensor(*g, ch, order, z) * b);
        const OLPState zs = detail::unpack_olp(order, d, z);
        const double got = reduced_bracket(*g, ch, as_covector(order, d, a), as_covector(order, d, b), zs);
        EXPECT_LT(std::abs(got - ref), 1e-12);
        EXPECT_LT(std::abs(got + reduced_bracket(*g, ch, as_covector(order, d, b), as_covector(order, d, a), zs)), 1e-12);
      }
    }
  }
}

TEST(Ostrogradsky, CanonicalAndLiePoissonBrackets) {
  const auto g = LieAlgebra::so3();
  for (Chirality ch : kBoth) {
    const OLPState z = random_olp(2, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        OLPCovector xi_i{{Vec::Unit(3, i)}, {Vec::Zero(3)}, Vec::Zero(3)};
        OLPCovector pi_j{{Vec::Zero(3)}, {Vec::Unit(3, j)}, Vec::Zero(3)};
        EXPECT_EQ(reduced_bracket(*g, ch, xi_i, pi_j, z), i == j ? 1.0 : 0.0);
      }
    const Vec a = randn(3), b = randn(3);
    const OLPCovector fa{{Vec::Zero(3)}, {Vec::Zero(3)}, a}, fb{{Vec::Zero(3)}, {Vec::Zero(3)}, b};
    const double expect = sign(ch) * z.pi0.dot(Vec(Eigen::Vector3d(a).cross(Eigen::Vector3d(b))));
    EXPECT_LT(std::abs(reduced_bracket(*g, ch, fa, fb, z) - expect), 1e-14);
  }
}

TEST(Ostrogradsky, JacobiIdentity) {
  // Exact gradients of {f, g} for quadratic f, g: A_f J b - A_g J a + s [a_pi0, b_pi0] on the pi0 block.
  for (const auto& g : {LieAlgebra::so3(), LieAlgebra::se3()}) {
    for (Chirality ch : kBoth) {
      for (int order : {1, 2, 3}) {
        const int d = g->dim(), n = (2 * order - 1) * d;
        for (int trial = 0; trial < 5; ++trial) {
          const Vec z = randn(n);
          const Mat J = poisson_tensor(*g, ch, order, z);
          const Quadratic f = random_quadratic(n), h = random_quadratic(n), k = random_quadratic(n);
          auto grad_bracket = [&](const Quadratic& p, const Quadratic& q) {
            const Vec a = p.grad(z), b = q.grad(z);
            Vec out = p.A * (J * b) - q.A * (J * a);
            out.tail(d) += sign(ch) * g->bracket(a.tail(d), b.tail(d));
            return out;
          };
          const OLPState zs = detail::unpack_olp(order, d, z);
          auto br = [&](const Vec& a, const Vec& b) {
            return reduced_bracket(*g, ch, as_covector(order, d, a), as_covector(order, d, b), zs);
          };
          const double jac = br(grad_bracket(f, h), k.grad(z)) + br(grad_bracket(h, k), f.grad(z)) +
                             br(grad_bracket(k, f), h.grad(z));
          const double scale = std::abs(br(grad_bracket(f, h), k.grad(z)));
          EXPECT_LT(std::abs(jac), 1e-10 * std::max(1.0, scale)) << g->name() << " order " << order;
        }
      }
    }
  }
}

TEST(Ostrogradsky, LeibnizRule) {
  const auto g = LieAlgebra::so3();
  const int order = 2, d = 3, n = 9;
  for (Chirality ch : kBoth) {
    const Vec z = randn(n);
    const OLPState zs = detail::unpack_olp(order, d, z);
    const Quadratic f = random_quadratic(n), p = random_quadratic(n), q = random_quadratic(n);
    auto br = [&](const Vec& a, const Vec& b) {
      return reduced_bracket(*g, ch, as_covector(order, d, a), as_covector(order, d, b), zs);
    };
    const Vec grad_pq = q.eval(z) * p.grad(z) + p.eval(z) * q.grad(z);
    const double lhs = br(f.grad(z), grad_pq);
    const double rhs = br(f.grad(z), p.grad(z)) * q.eval(z) + p.eval(z) * br(f.grad(z), q.grad(z));
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Ostrogradsky, LegendreDuality) {
  // dh/dpi_(j) at leg(jet) recovers xi^(j), and dh/dpi0 recovers xi.
  for (Chirality ch : kBoth) {
    for (const auto& m : all_models(ch)) {
      const ReducedHamiltonian h = hamiltonian(m);
      const Jet j = random_jet(m.full_jet_size(), m.dim());
      const OLPCovector c = h.partials(legendre(m, j));
      EXPECT_LT((c.d_pi0 - j[0]).norm(), 1e-10) << to_string(m.family);
      for (int i = 0; i + 1 < m.order; ++i) EXPECT_LT((c.d_pi[i] - j[i + 1]).norm(), 1e-10) << to_string(m.family);
    }
  }
}

TEST(Ostrogradsky, FlowMatchesBracket) {
  for (Chirality ch : kBoth) {
    for (const auto& m : all_models(ch)) {
      const ReducedHamiltonian h = hamiltonian(m);
      const int d = m.dim(), n = (2 * m.order - 1) * d;
      for (int trial = 0; trial < 10; ++trial) {
        const Vec z = randn(n);
        const OLPState zs = detail::unpack_olp(m.order, d, z);
        const Quadratic f = random_quadratic(n);
        const double fdot = f.grad(z).dot(detail::pack_olp(olp_vector_field(h, zs)));
        const double br = reduced_bracket(*m.algebra, ch, as_covector(m.order, d, f.grad(z)), h.partials(zs), zs);
        EXPECT_LT(std::abs(fdot - br), 1e-9 * std::max(1.0, std::abs(br))) << to_string(m.family);
      }
    }
  }
}

TEST(Ostrogradsky, EquivalenceWithEulerPoincare) {
  for (Chirality ch : kBoth) {
    const Jet j{v3(0.4, -0.3, 0.6), v3(0.2, 0.1, -0.2), v3(-0.1, 0.3, 0.2)};
    const auto ab = spline2(LieAlgebra::abelian(3), Inertia::identity(3), false, 0.0, ch);
    EXPECT_LT(olp_equivalence_check(ab, j, 5.0, 1e-3), 1e-10);
    const auto bi = spline2(LieAlgebra::so3(), Inertia::identity(3), true, 0.0, ch);
    EXPECT_LT(olp_equivalence_check(bi, j, 5.0, 1e-3), 1e-6);
    const auto rb = rigid_body(LieAlgebra::so3(), I123, ch);
    EXPECT_LT(olp_equivalence_check(rb, {j[0]}, 5.0, 1e-3), 1e-8);
    const auto gen = spline2(LieAlgebra::so3(), I123, false, 0.3, ch);
    EXPECT_LT(olp_equivalence_check(gen, j, 5.0, 1e-3), 1e-6);
  }
}
