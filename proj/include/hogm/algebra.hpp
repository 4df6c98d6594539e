#ifndef HOGM_ALGEBRA_HPP
#define HOGM_ALGEBRA_HPP

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hogm/core.hpp"

namespace hogm {

/// Which closed forms back exp/log/projection for a LieAlgebra.
enum class GroupKind { SO3, SE3, SO2, Abelian, Generic };

/// Finite-dimensional Lie algebra given by structure constants c^k_ij together
/// with a faithful matrix representation: [E_i, E_j] = sum_k c^k_ij E_k.
///
/// Group elements are the matrices of the corresponding matrix group. All
/// members are immutable after construction.
class LieAlgebra {
 public:
  /// Derives the structure constants from the matrix commutators of `basis`.
  LieAlgebra(std::string name, std::vector<Mat> basis, GroupKind kind = GroupKind::Generic)
      : name_(std::move(name)), kind_(kind), basis_(std::move(basis)) {
    init_basis();
    c_.assign(static_cast<size_t>(dim_) * dim_ * dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        const Vec z = vee(basis_[i] * basis_[j] - basis_[j] * basis_[i]);
        for (int k = 0; k < dim_; ++k) c_[index(k, i, j)] = z(k);
      }
    }
    // Snap roundoff so that antisymmetry holds bit-for-bit.
    for (auto& v : c_) {
      if (std::abs(v) < 1e-14) v = 0.0;
    }
    for (int k = 0; k < dim_; ++k) {
      for (int i = 0; i < dim_; ++i) {
        for (int j = i + 1; j < dim_; ++j) {
          const double a = 0.5 * (c_[index(k, i, j)] - c_[index(k, j, i)]);
          c_[index(k, i, j)] = a;
          c_[index(k, j, i)] = -a;
        }
        c_[index(k, i, i)] = 0.0;
      }
    }
    validate();
  }

  /// Uses the supplied structure constants (flattened as c[(k*d + i)*d + j])
  /// and checks them against the basis.
  LieAlgebra(std::string name, std::vector<double> structure_constants, std::vector<Mat> basis,
             GroupKind kind = GroupKind::Generic)
      : name_(std::move(name)), kind_(kind), basis_(std::move(basis)),
        c_(std::move(structure_constants)) {
    init_basis();
    if (c_.size() != static_cast<size_t>(dim_) * dim_ * dim_) {
      throw InputError("structure constants: expected d^3 = " + std::to_string(dim_ * dim_ * dim_) +
                       " entries, got " + std::to_string(c_.size()));
    }
    validate();
  }

  static std::shared_ptr<const LieAlgebra> so3() {
    std::vector<Mat> b(3, Mat::Zero(3, 3));
    for (int i = 0; i < 3; ++i) b[i] = skew(Eigen::Vector3d::Unit(i));
    return std::make_shared<const LieAlgebra>("so3", b, GroupKind::SO3);
  }

  /// se(3) with coordinates (omega | v): hat = [[omega^, v], [0, 0]].
  static std::shared_ptr<const LieAlgebra> se3() {
    std::vector<Mat> b(6, Mat::Zero(4, 4));
    for (int i = 0; i < 3; ++i) {
      b[i].topLeftCorner(3, 3) = skew(Eigen::Vector3d::Unit(i));
      b[3 + i](i, 3) = 1.0;
    }
    return std::make_shared<const LieAlgebra>("se3", b, GroupKind::SE3);
  }

  static std::shared_ptr<const LieAlgebra> so2() {
    Mat e(2, 2);
    e << 0.0, -1.0, 1.0, 0.0;
    return std::make_shared<const LieAlgebra>("so2", std::vector<Mat>{e}, GroupKind::SO2);
  }

  /// R^n as the translation group, represented by (n+1)x(n+1) matrices.
  static std::shared_ptr<const LieAlgebra> abelian(int n) {
    if (n < 1) throw InputError("abelian algebra needs dimension >= 1");
    std::vector<Mat> b(n, Mat::Zero(n + 1, n + 1));
    for (int i = 0; i < n; ++i) b[i](i, n) = 1.0;
    return std::make_shared<const LieAlgebra>("r" + std::to_string(n), b, GroupKind::Abelian);
  }

  const std::string& name() const { return name_; }
  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int group_dim() const { return n_; }
  const std::vector<Mat>& basis() const { return basis_; }

  /// c^k_ij
  double c(int k, int i, int j) const { return c_[index(k, i, j)]; }
  const std::vector<double>& structure_constants() const { return c_; }

  bool is_abelian() const {
    for (double v : c_) {
      if (v != 0.0) return false;
    }
    return true;
  }

  Mat hat(const Vec& x) const {
    require_dim(x, dim_, "hat");
    Mat m = Mat::Zero(n_, n_);
    for (int i = 0; i < dim_; ++i) m += x(i) * basis_[i];
    return m;
  }

  Vec vee(const Mat& m) const {
    if (m.rows() != n_ || m.cols() != n_) throw InputError("vee: matrix size mismatch");
    switch (kind_) {
      case GroupKind::SO3:
        return Eigen::Vector3d(m(2, 1), m(0, 2), m(1, 0));
      case GroupKind::SE3: {
        Vec v(6);
        v << m(2, 1), m(0, 2), m(1, 0), m(0, 3), m(1, 3), m(2, 3);
        return v;
      }
      case GroupKind::SO2:
        return Vec::Constant(1, m(1, 0));
      case GroupKind::Abelian:
        return m.col(n_ - 1).head(dim_);
      case GroupKind::Generic:
        break;
    }
    return vee_pinv_ * m.reshaped();
  }

  /// Matrix of ad_x in coordinates: (ad_x)_kj = sum_i c^k_ij x^i.
  Mat ad(const Vec& x) const {
    require_dim(x, dim_, "ad");
    Mat a = Mat::Zero(dim_, dim_);
    for (int k = 0; k < dim_; ++k) {
      for (int i = 0; i < dim_; ++i) {
        if (x(i) == 0.0) continue;
        for (int j = 0; j < dim_; ++j) a(k, j) += c_[index(k, i, j)] * x(i);
      }
    }
    return a;
  }

  Vec bracket(const Vec& x, const Vec& y) const {
    require_dim(y, dim_, "bracket");
    if (kind_ == GroupKind::SO3) {
      require_dim(x, 3, "bracket");
      return Eigen::Vector3d(x.head<3>()).cross(Eigen::Vector3d(y.head<3>()));
    }
    return ad(x) * y;
  }

  /// ad*_x mu, defined by <ad*_x mu, y> = <mu, [x, y]>.
  Vec ad_star(const Vec& x, const Vec& mu) const {
    require_dim(mu, dim_, "ad_star");
    if (kind_ == GroupKind::SO3) {
      require_dim(x, 3, "ad_star");
      return Eigen::Vector3d(mu.head<3>()).cross(Eigen::Vector3d(x.head<3>()));
    }
    return ad(x).transpose() * mu;
  }

  /// Matrix of Ad_g: columns are vee(g E_j g^-1).
  Mat Ad(const Mat& g) const {
    check_group_shape(g);
    if (kind_ == GroupKind::SO3) return g;
    if (kind_ == GroupKind::SO2 || kind_ == GroupKind::Abelian) return Mat::Identity(dim_, dim_);
    const Eigen::PartialPivLU<Mat> lu(g);
    if (!(std::abs(lu.determinant()) > 1e-300)) throw InputError("Ad: singular group matrix");
    const Mat ginv = lu.inverse();
    Mat a(dim_, dim_);
    for (int j = 0; j < dim_; ++j) a.col(j) = vee(g * basis_[j] * ginv);
    return a;
  }

  Vec adjoint(const Mat& g, const Vec& x) const {
    require_dim(x, dim_, "adjoint");
    return Ad(g) * x;
  }

  /// Ad*_g mu, defined by <Ad*_g mu, x> = <mu, Ad_g x>.
  Vec coadjoint(const Mat& g, const Vec& mu) const {
    require_dim(mu, dim_, "coadjoint");
    return Ad(g).transpose() * mu;
  }

  Mat identity() const { return Mat::Identity(n_, n_); }

  Mat exp(const Vec& x) const {
    require_dim(x, dim_, "exp");
    switch (kind_) {
      case GroupKind::SO3:
        return so3_exp(x);
      case GroupKind::SE3: {
        const Eigen::Vector3d w = x.head<3>();
        const double th2 = w.squaredNorm();
        const double th = std::sqrt(th2);
        double b, cc;
        if (th < 1e-4) {
          b = 0.5 - th2 / 24.0 + th2 * th2 / 720.0;
          cc = 1.0 / 6.0 - th2 / 120.0 + th2 * th2 / 5040.0;
        } else {
          b = (1.0 - std::cos(th)) / th2;
          cc = (th - std::sin(th)) / (th2 * th);
        }
        const Eigen::Matrix3d W = skew(w);
        const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + b * W + cc * W * W;
        Mat g = Mat::Identity(4, 4);
        g.topLeftCorner(3, 3) = so3_exp(w);
        g.topRightCorner(3, 1) = V * x.tail<3>();
        return g;
      }
      case GroupKind::SO2: {
        Mat g(2, 2);
        const double c = std::cos(x(0)), s = std::sin(x(0));
        g << c, -s, s, c;
        return g;
      }
      case GroupKind::Abelian:
        return identity() + hat(x);
      case GroupKind::Generic:
        break;
    }
    return hat(x).exp();
  }

  /// Inverse of exp near the identity. Throws CutLocusError when a rotation
  /// angle reaches pi - 1e-6.
  Vec log(const Mat& g) const {
    check_group_shape(g);
    switch (kind_) {
      case GroupKind::SO3:
        return so3_log(g);
      case GroupKind::SE3: {
        const Eigen::Vector3d w = so3_log(g.topLeftCorner(3, 3));
        const double th2 = w.squaredNorm();
        const double th = std::sqrt(th2);
        double cc;
        if (th < 1e-4) {
          cc = 1.0 / 12.0 + th2 / 720.0;
        } else {
          cc = (1.0 - th * std::sin(th) / (2.0 * (1.0 - std::cos(th)))) / th2;
        }
        const Eigen::Matrix3d W = skew(w);
        const Eigen::Matrix3d Vinv = Eigen::Matrix3d::Identity() - 0.5 * W + cc * W * W;
        Vec out(6);
        out.head<3>() = w;
        out.tail<3>() = Vinv * Eigen::Vector3d(g.topRightCorner(3, 1));
        return out;
      }
      case GroupKind::SO2: {
        const double th = std::atan2(g(1, 0), g(0, 0));
        if (std::abs(th) >= std::numbers::pi - 1e-6) {
          throw CutLocusError("log: SO(2) angle at the cut locus");
        }
        return Vec::Constant(1, th);
      }
      case GroupKind::Abelian:
        return vee(g - identity());
      case GroupKind::Generic:
        break;
    }
    const Mat l = g.log();
    if (!l.allFinite()) throw CutLocusError("log: matrix logarithm failed");
    return vee(l);
  }

  /// Nearest group element (polar decomposition for rotation blocks).
  Mat project(const Mat& g) const {
    check_group_shape(g);
    switch (kind_) {
      case GroupKind::SO3:
        return project_rotation(g);
      case GroupKind::SE3: {
        Mat out = Mat::Identity(4, 4);
        out.topLeftCorner(3, 3) = project_rotation(g.topLeftCorner(3, 3));
        out.topRightCorner(3, 1) = g.topRightCorner(3, 1);
        return out;
      }
      case GroupKind::SO2:
        return exp(Vec::Constant(1, std::atan2(g(1, 0), g(0, 0))));
      case GroupKind::Abelian:
        return identity() + hat(vee(g - identity()));
      case GroupKind::Generic:
        break;
    }
    return g;
  }

  /// Distance of g from the group manifold; 0 when the group has no cheap test.
  double group_residual(const Mat& g) const {
    check_group_shape(g);
    switch (kind_) {
      case GroupKind::SO3:
      case GroupKind::SO2: {
        const double r = (g.transpose() * g - identity()).norm();
        return g.determinant() > 0.0 ? r : std::max(r, 1.0);
      }
      case GroupKind::SE3: {
        const Mat R = g.topLeftCorner(3, 3);
        double r = (R.transpose() * R - Mat::Identity(3, 3)).norm();
        r += (g.row(3) - Mat::Identity(4, 4).row(3)).norm();
        return R.determinant() > 0.0 ? r : std::max(r, 1.0);
      }
      case GroupKind::Abelian:
        return (g - identity() - hat(vee(g - identity()))).norm();
      case GroupKind::Generic:
        break;
    }
    return 0.0;
  }

  /// Max over basis triples of the Jacobi residual
  /// sum_m (c^m_ij c^l_mk + c^m_jk c^l_mi + c^m_ki c^l_mj).
  double jacobi_residual() const {
    double worst = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          for (int l = 0; l < dim_; ++l) {
            double s = 0.0;
            for (int m = 0; m < dim_; ++m) {
              s += c(m, i, j) * c(l, m, k) + c(m, j, k) * c(l, m, i) + c(m, k, i) * c(l, m, j);
            }
            worst = std::max(worst, std::abs(s));
          }
    return worst;
  }

  /// Max |c^k_ij + c^k_ji|; zero for a valid algebra.
  double antisymmetry_residual() const {
    double worst = 0.0;
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          worst = std::max(worst, std::abs(c(k, i, j) + c(k, j, i)));
    return worst;
  }

  /// Max entry of [E_i, E_j] - sum_k c^k_ij E_k over basis pairs.
  double bracket_consistency_residual() const {
    double worst = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        Mat d = basis_[i] * basis_[j] - basis_[j] * basis_[i];
        for (int k = 0; k < dim_; ++k) d -= c(k, i, j) * basis_[k];
        worst = std::max(worst, d.cwiseAbs().maxCoeff());
      }
    return worst;
  }

  static Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
    Eigen::Matrix3d m;
    m << 0.0, -w(2), w(1), w(2), 0.0, -w(0), -w(1), w(0), 0.0;
    return m;
  }

 private:
  size_t index(int k, int i, int j) const {
    return (static_cast<size_t>(k) * dim_ + i) * dim_ + j;
  }

  void init_basis() {
    if (basis_.empty()) throw InputError("Lie algebra '" + name_ + "' has an empty basis");
    dim_ = static_cast<int>(basis_.size());
    n_ = static_cast<int>(basis_.front().rows());
    Mat stacked(n_ * n_, dim_);
    for (int i = 0; i < dim_; ++i) {
      if (basis_[i].rows() != n_ || basis_[i].cols() != n_) {
        throw InputError("basis matrix " + std::to_string(i) + " is not " + std::to_string(n_) +
                         "x" + std::to_string(n_));
      }
      stacked.col(i) = basis_[i].reshaped();
    }
    const Eigen::ColPivHouseholderQR<Mat> qr(stacked);
    if (qr.rank() < dim_) throw InputError("basis matrices of '" + name_ + "' are linearly dependent");
    vee_pinv_ = (stacked.transpose() * stacked).ldlt().solve(stacked.transpose());
  }

  void validate() const {
    double scale = 1.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    if (antisymmetry_residual() != 0.0) {
      throw InputError("structure constants of '" + name_ + "' are not antisymmetric");
    }
    if (jacobi_residual() > 1e-12 * scale * scale) {
      throw InputError("structure constants of '" + name_ + "' violate the Jacobi identity");
    }
    if (bracket_consistency_residual() > 1e-12 * scale) {
      throw InputError("structure constants of '" + name_ + "' disagree with the basis commutators");
    }
  }

  void check_group_shape(const Mat& g) const {
    if (g.rows() != n_ || g.cols() != n_) {
      throw InputError("group element of '" + name_ + "' must be " + std::to_string(n_) + "x" +
                       std::to_string(n_));
    }
  }

  static Mat so3_exp(const Vec& w3) {
    const Eigen::Vector3d w = w3.head<3>();
    const double th2 = w.squaredNorm();
    const double th = std::sqrt(th2);
    double a, b;
    if (th < 1e-4) {
      a = 1.0 - th2 / 6.0 + th2 * th2 / 120.0;
      b = 0.5 - th2 / 24.0 + th2 * th2 / 720.0;
    } else {
      a = std::sin(th) / th;
      b = (1.0 - std::cos(th)) / th2;
    }
    const Eigen::Matrix3d W = skew(w);
    return Eigen::Matrix3d(Eigen::Matrix3d::Identity() + a * W + b * W * W);
  }

  static Vec so3_log(const Mat& R) {
    const Eigen::Vector3d s(0.5 * (R(2, 1) - R(1, 2)), 0.5 * (R(0, 2) - R(2, 0)),
                            0.5 * (R(1, 0) - R(0, 1)));
    const double cos_th = 0.5 * (R.trace() - 1.0);
    const double sin_th = s.norm();
    const double th = std::atan2(sin_th, cos_th);
    if (th >= std::numbers::pi - 1e-6) {
      throw CutLocusError("log: SO(3) rotation angle " + std::to_string(th) + " is at the cut locus");
    }
    double f;
    if (th < 1e-4) {
      const double t2 = th * th;
      f = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
    } else {
      f = th / sin_th;
    }
    return Vec(f * s);
  }

  static Mat project_rotation(const Mat& R) {
    const Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat U = svd.matrixU();
    const Mat V = svd.matrixV();
    if ((U * V.transpose()).determinant() < 0.0) U.col(U.cols() - 1) *= -1.0;
    return U * V.transpose();
  }

  std::string name_;
  GroupKind kind_;
  std::vector<Mat> basis_;
  std::vector<double> c_;
  int dim_ = 0;
  int n_ = 0;
  Mat vee_pinv_;
};

using AlgebraPtr = std::shared_ptr<const LieAlgebra>;

/// Symmetric positive-definite d x d matrix defining gamma_e(x, y) = x^T M y
/// together with the flat/sharp maps between the algebra and its dual.
class Inertia {
 public:
  explicit Inertia(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InputError("inertia must be square");
    if (m_.rows() == 0) return;
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InputError("inertia is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Mat> es(m_);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw InputError("inertia is not positive definite");
    if (hi / lo > 1e12) throw InputError("inertia is ill-conditioned (condition number > 1e12)");
    inv_ = m_.llt().solve(Mat::Identity(m_.rows(), m_.cols()));
    inv_ = 0.5 * (inv_ + inv_.transpose()).eval();
  }

  static Inertia identity(int d) { return Inertia(Mat::Identity(d, d)); }
  static Inertia diagonal(const Vec& diag) { return Inertia(Mat(diag.asDiagonal())); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  const Mat& inverse() const { return inv_; }

  Vec flat(const Vec& x) const {
    require_dim(x, dim(), "flat");
    return m_ * x;
  }
  Vec sharp(const Vec& mu) const {
    require_dim(mu, dim(), "sharp");
    return inv_ * mu;
  }
  /// <x, M x>
  double norm2(const Vec& x) const { return x.dot(m_ * x); }
  /// <mu, M^-1 mu>, so that the dual norm of flat(x) equals the norm of x.
  double dual_norm2(const Vec& mu) const { return mu.dot(inv_ * mu); }

  /// max over basis triples of |<M[x,y], z> + <M y, [x,z]>|.
  double ad_invariance_residual(const LieAlgebra& g) const {
    const int d = g.dim();
    if (d != dim()) throw InputError("inertia dimension does not match algebra");
    double worst = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          const Vec x = Vec::Unit(d, i), y = Vec::Unit(d, j), z = Vec::Unit(d, k);
          const double r = (m_ * g.bracket(x, y)).dot(z) + (m_ * y).dot(g.bracket(x, z));
          worst = std::max(worst, std::abs(r));
        }
    return worst;
  }

 private:
  Mat m_;
  Mat inv_;
};

/// Constant metric on a flat base R^m.
class BaseMetric : public Inertia {
 public:
  using Inertia::Inertia;
  explicit BaseMetric(const Inertia& i) : Inertia(i) {}
  static BaseMetric identity(int m) { return BaseMetric(Mat::Identity(m, m)); }
};

}  // namespace hogm

#endif  // HOGM_ALGEBRA_HPP
