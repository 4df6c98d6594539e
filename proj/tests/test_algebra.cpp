#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace hogm;
using hogm::test::randn;
using hogm::test::random_group;
using hogm::test::uniform_ball;

namespace {

std::vector<AlgebraPtr> all_algebras() {
  return {LieAlgebra::so3(), LieAlgebra::se3(), LieAlgebra::so2(), LieAlgebra::abelian(3)};
}

// Reads coordinates off a 4x4 se(3) matrix without going through vee.
Vec se3_coords(const Mat& m) {
  Vec v(6);
  v << m(2, 1), m(0, 2), m(1, 0), m(0, 3), m(1, 3), m(2, 3);
  return v;
}

}  // namespace

TEST(Algebra, So3BasisBracket) {
  const auto g = LieAlgebra::so3();
  const Vec z = g->bracket(Vec::Unit(3, 0), Vec::Unit(3, 1));
  EXPECT_EQ(z, Vec::Unit(3, 2));
  EXPECT_EQ(g->bracket(Vec::Unit(3, 1), Vec::Unit(3, 2)), Vec::Unit(3, 0));
}

TEST(Algebra, SelfBracketVanishes) {
  for (const auto& g : all_algebras()) {
    const Vec x = randn(g->dim());
    EXPECT_LT(g->bracket(x, x).norm(), 1e-15) << g->name();
  }
}

TEST(Algebra, Se3BracketMatchesMatrixCommutator) {
  const auto g = LieAlgebra::se3();
  Mat X = Mat::Zero(4, 4), Y = Mat::Zero(4, 4);
  X(2, 1) = 1.0;
  X(1, 2) = -1.0;  // omega = e1
  Y(0, 2) = 1.0;
  Y(2, 0) = -1.0;  // omega = e2
  Vec x = Vec::Zero(6), y = Vec::Zero(6);
  x(0) = 1.0;
  y(1) = 1.0;
  EXPECT_LT((g->bracket(x, y) - se3_coords(X * Y - Y * X)).norm(), 1e-15);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec a = randn(6), b = randn(6);
    const Mat A = g->hat(a), B = g->hat(b);
    EXPECT_LT((g->bracket(a, b) - se3_coords(A * B - B * A)).norm(), 1e-12);
  }
}

TEST(Algebra, StructureConstantInvariants) {
  for (const auto& g : all_algebras()) {
    EXPECT_EQ(g->antisymmetry_residual(), 0.0) << g->name();
    EXPECT_LT(g->jacobi_residual(), 1e-12) << g->name();
    EXPECT_LT(g->bracket_consistency_residual(), 1e-12) << g->name();
  }
}

TEST(Algebra, AdStarContract) {
  for (const auto& g : all_algebras()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = randn(g->dim()), mu = randn(g->dim()), y = randn(g->dim());
      EXPECT_LT(std::abs(g->ad_star(x, mu).dot(y) - mu.dot(g->bracket(x, y))), 1e-12) << g->name();
    }
  }
}

TEST(Algebra, AdStarSo3Example) {
  const auto g = LieAlgebra::so3();
  const Vec r = g->ad_star(Vec::Unit(3, 0), Vec::Unit(3, 1));
  // <mu, [e1, e_j]> over the basis: [e1, e3] = -e2 so only the e3 entry is -1.
  Vec expect(3);
  for (int j = 0; j < 3; ++j) expect(j) = Eigen::Vector3d::Unit(1).dot(Eigen::Vector3d::Unit(0).cross(Eigen::Vector3d::Unit(j)));
  EXPECT_LT((r - expect).norm(), 1e-15);
  EXPECT_LT((r - Vec(Eigen::Vector3d(0, 0, -1))).norm(), 1e-15);
}

TEST(Algebra, AdStarTrivialCases) {
  const auto r3 = LieAlgebra::abelian(3);
  EXPECT_EQ(r3->ad_star(randn(3), randn(3)), Vec::Zero(3));
  const auto so3 = LieAlgebra::so3();
  EXPECT_EQ(so3->ad_star(randn(3), Vec::Zero(3)), Vec::Zero(3));
}

TEST(Algebra, AdjointAndCoadjoint) {
  for (const auto& g : all_algebras()) {
    const Vec x = randn(g->dim());
    EXPECT_LT((g->adjoint(g->identity(), x) - x).norm(), 1e-15);
    const Mat e = g->exp(0.7 * x);
    EXPECT_LT((g->adjoint(e, x) - x).norm(), 1e-12 * std::max(1.0, x.norm())) << g->name();
    for (int trial = 0; trial < 20; ++trial) {
      const Mat h = random_group(*g, 1.5);
      const Vec mu = randn(g->dim()), y = randn(g->dim()), z = randn(g->dim());
      EXPECT_LT(std::abs(g->coadjoint(h, mu).dot(y) - mu.dot(g->adjoint(h, y))), 1e-12) << g->name();
      const Vec lhs = g->adjoint(h, g->bracket(y, z));
      const Vec rhs = g->bracket(g->adjoint(h, y), g->adjoint(h, z));
      EXPECT_LT((lhs - rhs).norm(), 1e-10) << g->name();
    }
  }
}

TEST(Algebra, ExpClosedForms) {
  const auto g = LieAlgebra::so3();
  EXPECT_LT((g->exp(Vec::Zero(3)) - Mat::Identity(3, 3)).norm(), 1e-15);
  Mat Rz(3, 3);
  Rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((g->exp(Vec(Eigen::Vector3d(0, 0, std::numbers::pi / 2))) - Rz).norm(), 1e-15);
}

TEST(Algebra, ExpMatchesMatrixExponential) {
  for (const auto& g : all_algebras()) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vec x = uniform_ball(g->dim(), 2.0);
      const Mat ref = g->hat(x).exp();
      EXPECT_LT((g->exp(x) - ref).norm(), 1e-12) << g->name();
    }
  }
}

TEST(Algebra, ExpLogRoundTrip) {
  for (const auto& g : all_algebras()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = uniform_ball(g->dim(), 1.0);
      EXPECT_LT((g->log(g->exp(x)) - x).norm(), 1e-10) << g->name();
    }
  }
  const auto so3 = LieAlgebra::so3();
  const Vec tiny = 1e-9 * randn(3);
  EXPECT_LT((so3->log(so3->exp(tiny)) - tiny).norm(), 1e-20);
}

TEST(Algebra, LogCutLocus) {
  const auto g = LieAlgebra::so3();
  EXPECT_THROW(g->log(g->exp(Vec(Eigen::Vector3d(std::numbers::pi, 0, 0)))), CutLocusError);
  EXPECT_NO_THROW(g->log(g->exp(Vec(Eigen::Vector3d(std::numbers::pi - 1e-3, 0, 0)))));
  const auto se = LieAlgebra::se3();
  Vec x = Vec::Zero(6);
  x(2) = std::numbers::pi;
  EXPECT_THROW(se->log(se->exp(x)), CutLocusError);
}

TEST(Algebra, DimensionMismatch) {
  const auto g = LieAlgebra::so3();
  EXPECT_THROW(g->bracket(Vec::Zero(3), Vec::Zero(4)), InputError);
  EXPECT_THROW(g->ad_star(Vec::Zero(2), Vec::Zero(3)), InputError);
  EXPECT_THROW(g->exp(Vec::Zero(2)), InputError);
  EXPECT_THROW(g->log(Mat::Identity(4, 4)), InputError);
}

TEST(Algebra, GenericAlgebraFromBasis) {
  // so(3) presented without its closed forms.
  const auto ref = LieAlgebra::so3();
  const LieAlgebra gen("so3_generic", ref->basis());
  EXPECT_EQ(gen.kind(), GroupKind::Generic);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = uniform_ball(3, 1.0), y = randn(3), mu = randn(3);
    EXPECT_LT((gen.bracket(x, y) - ref->bracket(x, y)).norm(), 1e-14);
    EXPECT_LT((gen.ad_star(x, mu) - ref->ad_star(x, mu)).norm(), 1e-14);
    EXPECT_LT((gen.exp(x) - ref->exp(x)).norm(), 1e-12);
    EXPECT_LT((gen.log(gen.exp(x)) - x).norm(), 1e-10);
  }
}

TEST(Algebra, StructureConstantValidation) {
  const auto ref = LieAlgebra::so3();
  std::vector<double> c = ref->structure_constants();
  EXPECT_NO_THROW(LieAlgebra("ok", c, ref->basis()));
  std::vector<double> bad = c;
  bad[(2 * 3 + 0) * 3 + 1] = 2.0;  // c^3_12 = 2 but c^3_21 = -1
  EXPECT_THROW(LieAlgebra("bad", bad, ref->basis()), InputError);
  std::vector<double> scaled = c;
  for (auto& v : scaled) v *= 2.0;  // antisymmetric and Jacobi, but not the basis commutators
  EXPECT_THROW(LieAlgebra("bad", scaled, ref->basis()), InputError);
  EXPECT_THROW(LieAlgebra("bad", std::vector<double>(5, 0.0), ref->basis()), InputError);
  EXPECT_THROW(LieAlgebra("dep", std::vector<Mat>{ref->basis()[0], ref->basis()[0]}), InputError);
}

TEST(Algebra, JacobiViolationRejected) {
  // A 3-dim antisymmetric bracket violating Jacobi: [e1,e2] = e1, [e2,e3] = e1, [e1,e3] = e2.
  std::vector<double> c(27, 0.0);
  auto set = [&](int k, int i, int j, double v) {
    c[(k * 3 + i) * 3 + j] = v;
    c[(k * 3 + j) * 3 + i] = -v;
  };
  set(0, 0, 1, 1.0);
  set(0, 1, 2, 1.0);
  set(1, 0, 2, 1.0);
  EXPECT_THROW(LieAlgebra("nj", c, LieAlgebra::so3()->basis()), InputError);
}

TEST(Algebra, Projection) {
  const auto g = LieAlgebra::so3();
  const Mat R = random_group(*g, 2.0);
  const Mat noisy = R + 1e-6 * Mat::Random(3, 3);
  const Mat P = g->project(noisy);
  EXPECT_LT(g->group_residual(P), 1e-13);
  EXPECT_LT((P - R).norm(), 1e-5);
}

TEST(Inertia, FlatSharp) {
  const Inertia id = Inertia::identity(3);
  const Vec x = randn(3);
  EXPECT_EQ(id.flat(x), x);
  const Inertia I = Inertia::diagonal(Vec(Eigen::Vector3d(1, 2, 3)));
  EXPECT_EQ(I.flat(Vec::Ones(3)), Vec(Eigen::Vector3d(1, 2, 3)));
  for (int trial = 0; trial < 20; ++trial) {
    const Vec y = randn(3);
    EXPECT_LT((I.sharp(I.flat(y)) - y).norm(), 1e-12);
  }
}

TEST(Inertia, Validation) {
  Mat ns(2, 2);
  ns << 1, 0.5, 0, 1;
  EXPECT_THROW(Inertia{ns}, InputError);
  EXPECT_THROW(Inertia(Mat(Vec(Eigen::Vector2d(1, -1)).asDiagonal())), InputError);
  EXPECT_THROW(Inertia(Mat(Vec(Eigen::Vector2d(1, 1e-13)).asDiagonal())), InputError);
  EXPECT_THROW(Inertia(Mat::Ones(2, 3)), InputError);
}

TEST(Inertia, AdInvariance) {
  const auto g = LieAlgebra::so3();
  EXPECT_LT(Inertia::identity(3).ad_invariance_residual(*g), 1e-15);
  EXPECT_GT(Inertia::diagonal(Vec(Eigen::Vector3d(1, 2, 3))).ad_invariance_residual(*g), 0.1);
}
