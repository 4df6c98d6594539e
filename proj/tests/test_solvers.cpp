#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_util.hpp"

using namespace hogm;
using hogm::test::randn;

namespace {

Vec v3(double a, double b, double c) { return Vec(Eigen::Vector3d(a, b, c)); }

}  // namespace

TEST(Integrator, ConstantField) {
  const Vec c = randn(4);
  const Trajectory tr = integrate([&](double, const Vec&) { return c; }, Vec::Zero(4), 1.5, IntegratorConfig{0.1});
  ASSERT_EQ(tr.x.size(), 16u);
  EXPECT_NEAR(tr.t.back(), 1.5, 1e-15);
  EXPECT_LT((tr.x.back() - 1.5 * c).norm(), 1e-14);
}

TEST(Integrator, LinearFieldMatchesMatrixExponential) {
  const Mat A = Mat::Random(4, 4);
  const Vec x0 = randn(4);
  const Trajectory tr = integrate([&](double, const Vec& x) { return Vec(A * x); }, x0, 1.0, IntegratorConfig{1e-3});
  EXPECT_LT((tr.x.back() - Mat(A).exp() * x0).norm(), 1e-11);
}

TEST(Integrator, FourthOrderConvergence) {
  const Field f = [](double t, const Vec& x) { return Vec(Vec::Constant(1, std::cos(t) * x(0))); };
  const double exact = std::exp(std::sin(2.0));
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    err.push_back(std::abs(integrate(f, Vec::Ones(1), 2.0, IntegratorConfig{dt}).x.back()(0) - exact));
  }
  for (size_t i = 0; i + 1 < err.size(); ++i) {
    const double order = std::log2(err[i] / err[i + 1]);
    EXPECT_GT(order, 3.7);
    EXPECT_LT(order, 4.3);
  }
}

TEST(Integrator, DivergenceIsReported) {
  // x' = x^2 from x = 1 blows up at t = 1.
  const Field f = [](double, const Vec& x) { return Vec(x.cwiseProduct(x)); };
  try {
    integrate(f, Vec::Ones(1), 2.0, IntegratorConfig{1e-2});
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.time(), 0.9);
    EXPECT_LT(e.time(), 2.0);
  }
}

TEST(Integrator, ProjectionHookRunsOnSchedule) {
  int calls = 0;
  IntegratorConfig cfg{0.01};
  cfg.reprojection_interval = 10;
  integrate([](double, const Vec& x) { return x; }, Vec::Ones(1), 1.0, cfg, [&](Vec&) { ++calls; });
  EXPECT_EQ(calls, 10);
}

TEST(FdJacobian, LinearMapIsExact) {
  const Mat A = Mat::Random(3, 5);
  const Mat J = fd_jacobian([&](const Vec& x) { return Vec(A * x); }, randn(5));
  EXPECT_LT((J - A).norm(), 1e-9);
}

TEST(FdJacobian, NonlinearMap) {
  const Vec x = v3(0.3, -1.2, 2.0);
  auto f = [](const Vec& y) { return Vec(Eigen::Vector2d(std::sin(y(0)) * y(1), y(2) * y(2) + y(0))); };
  Mat expect(2, 3);
  expect << std::cos(x(0)) * x(1), std::sin(x(0)), 0, 1, 0, 2 * x(2);
  EXPECT_LT((fd_jacobian(f, x) - expect).norm(), 1e-8);
}

TEST(Shooting, AbelianCubicIsSolvedBySeed) {
  const auto r1 = LieAlgebra::abelian(1);
  ShootingProblem p{.model = spline2(r1, Inertia::identity(1), false, 0.0, Chirality::Left),
                    .g0 = r1->identity(),
                    .g1 = r1->exp(Vec::Ones(1)),
                    .v0 = Vec::Zero(1),
                    .v1 = Vec::Zero(1)};
  p.tol = 1e-9;
  const Vec seed = shooting_seed(p);
  EXPECT_LT(std::abs(seed(0) - 6.0), 1e-12);
  EXPECT_LT(std::abs(seed(1) + 12.0), 1e-12);
  const ShootingResult r = shoot_spline(p);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_LT(std::abs(r.initial_jet[1](0) - 6.0), 1e-9);
  EXPECT_LT(std::abs(r.initial_jet[2](0) + 12.0), 1e-9);
}

TEST(Shooting, TrivialProblem) {
  const auto g = LieAlgebra::so3();
  const ShootingProblem p{.model = spline2(g, Inertia::diagonal(v3(1, 2, 3)), false, 0.0, Chirality::Right),
                          .g0 = Mat::Identity(3, 3),
                          .g1 = Mat::Identity(3, 3),
                          .v0 = Vec::Zero(3),
                          .v1 = Vec::Zero(3)};
  const ShootingResult r = shoot_spline(p);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_LT(r.residual, 1e-14);
  EXPECT_LT((r.trajectory.states.back().g - Mat::Identity(3, 3)).norm(), 1e-14);
}

TEST(Shooting, So3Geodesic) {
  const auto g = LieAlgebra::so3();
  for (Chirality ch : {Chirality::Left, Chirality::Right}) {
    const Vec v = v3(0.4, -0.7, 0.5);
    const Mat g0 = g->exp(v3(0.1, 0.2, -0.3));
    ShootingProblem p{.model = spline2(g, Inertia::identity(3), true, 0.0, ch),
                      .g0 = g0,
                      .g1 = ch == Chirality::Right ? Mat(g->exp(v) * g0) : Mat(g0 * g->exp(v)),
                      .v0 = v,
                      .v1 = v};
    p.tol = 1e-10;
    const ShootingResult r = shoot_spline(p);
    EXPECT_LE(r.iterations, 3);
    EXPECT_LT(r.residual, 1e-10);
    EXPECT_LT(r.initial_jet[1].norm(), 1e-8);
  }
}

TEST(Shooting, GenericPosePair) {
  for (const auto& g : {LieAlgebra::so3(), LieAlgebra::se3()}) {
    for (Chirality ch : {Chirality::Left, Chirality::Right}) {
      const int d = g->dim();
      const Inertia I = Inertia::diagonal(Vec::LinSpaced(d, 1.0, 2.5));
      ShootingProblem p{.model = spline2(g, I, false, 0.0, ch),
                        .g0 = g->exp(Vec::Constant(d, 0.1)),
                        .g1 = g->exp(Vec::LinSpaced(d, -0.6, 0.8)),
                        .v0 = Vec::LinSpaced(d, 0.2, -0.3),
                        .v1 = Vec::LinSpaced(d, -0.1, 0.4)};
      p.tol = 1e-10;
      const ShootingResult r = shoot_spline(p);
      EXPECT_LT(r.residual, 1e-8) << g->name();
      EXPECT_LE(r.iterations, 10) << g->name();
      for (size_t i = 0; i + 1 < r.residual_history.size(); ++i) {
        EXPECT_LT(r.residual_history[i + 1], r.residual_history[i]);
      }
      // The returned jet really hits the boundary data.
      const Vec unknowns = (Vec(2 * d) << r.initial_jet[1], r.initial_jet[2]).finished();
      EXPECT_LT(shooting_residual(p, unknowns).norm(), 1e-8);
      const auto& end = r.trajectory.states.back();
      EXPECT_LT((end.g - p.g1).norm(), 1e-8);
    }
  }
}

TEST(Shooting, ReportsNonConvergence) {
  const auto g = LieAlgebra::so3();
  ShootingProblem p{.model = spline2(g, Inertia::diagonal(v3(1, 2, 3)), false, 0.0, Chirality::Left),
                    .g0 = Mat::Identity(3, 3),
                    .g1 = g->exp(v3(1.5, -1.0, 0.8)),
                    .v0 = v3(2, 0, 0),
                    .v1 = v3(0, -2, 1)};
  p.max_iter = 1;
  p.tol = 1e-14;
  EXPECT_THROW(shoot_spline(p), NonConvergenceError);
}

TEST(Shooting, CutLocusSeed) {
  const auto g = LieAlgebra::so3();
  const ShootingProblem p{.model = spline2(g, Inertia::identity(3), true, 0.0, Chirality::Left),
                          .g0 = Mat::Identity(3, 3),
                          .g1 = g->exp(v3(std::numbers::pi, 0, 0)),
                          .v0 = Vec::Zero(3),
                          .v1 = Vec::Zero(3)};
  EXPECT_THROW(shoot_spline(p), CutLocusError);
}

TEST(Shooting, RejectsBadProblems) {
  const auto g = LieAlgebra::so3();
  ShootingProblem p{.model = rigid_body(g, Inertia::identity(3), Chirality::Left),
                    .g0 = Mat::Identity(3, 3),
                    .g1 = Mat::Identity(3, 3),
                    .v0 = Vec::Zero(3),
                    .v1 = Vec::Zero(3)};
  EXPECT_THROW(shoot_spline(p), InputError);
  p.model = spline2(g, Inertia::identity(3), true, 0.0, Chirality::Left);
  p.v1 = Vec::Zero(2);
  EXPECT_THROW(shoot_spline(p), InputError);
}
