#ifndef HOGM_CORE_HPP
#define HOGM_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hogm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Coordinates of a Lie algebra element in the basis of its LieAlgebra.
using AlgebraVector = Vec;
/// Coordinates of a dual element; pairs with AlgebraVector by the dot product.
using DualVector = Vec;
/// Matrix representative of a group element.
using GroupMatrix = Mat;

/// Ordered stack (x, x', x'', ...) of algebra vectors, each derivative an
/// independent coordinate.
using Jet = std::vector<Vec>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or dimensionally inconsistent input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Logarithm requested too close to the cut locus (rotation angle near pi).
class CutLocusError : public Error {
 public:
  using Error::Error;
};

/// The top-slot Legendre map is singular or too badly conditioned to invert.
class HyperregularityError : public Error {
 public:
  using Error::Error;
};

/// A highest-order solve was requested with a vanishing coefficient.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Left or right invariance. Right selects the upper sign of every paired
/// +/- in the reduced equations, Left the lower one.
enum class Chirality { Left, Right };

/// +1 for Right, -1 for Left. Every "+/-" in the dynamics is written as
/// `sign(c) * term` and every "-/+" as `-sign(c) * term`.
constexpr double sign(Chirality c) { return c == Chirality::Right ? 1.0 : -1.0; }

inline std::string to_string(Chirality c) { return c == Chirality::Right ? "right" : "left"; }

inline Chirality chirality_from_string(const std::string& s) {
  if (s == "right") return Chirality::Right;
  if (s == "left") return Chirality::Left;
  throw InputError("unknown chirality '" + s + "' (expected \"left\" or \"right\")");
}

inline void require_dim(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw InputError(std::string(what) + ": expected dimension " + std::to_string(n) + ", got " +
                     std::to_string(v.size()));
  }
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace hogm

#endif  // HOGM_CORE_HPP
