#pragma once

// Closed-form kernel of the Henon family phi_{a,b}(x, y) = (y, a - b x + y^2).
//
// The elementary maps are templates so the same formulas serve double
// precision work and the extended-precision Cantor-slice construction.

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "henon/error.hpp"

namespace henon {

template <class Real>
struct BasicParams {
  Real a{};  // unfolding parameter
  Real b{};  // Jacobian determinant
};

template <class Real>
struct BasicPoint {
  Real x{};
  Real y{};

  friend BasicPoint operator+(const BasicPoint& p, const BasicPoint& q) { return {p.x + q.x, p.y + q.y}; }
  friend BasicPoint operator-(const BasicPoint& p, const BasicPoint& q) { return {p.x - q.x, p.y - q.y}; }
  friend BasicPoint operator*(const Real& s, const BasicPoint& p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const BasicPoint&, const BasicPoint&) = default;
};

using Params = BasicParams<double>;
using PlanePoint = BasicPoint<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Axis-aligned closed box in the plane.
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(const PlanePoint& z) const {
    return z.x >= x_min && z.x <= x_max && z.y >= y_min && z.y <= y_max;
  }
};

inline Vec2 to_vec(const PlanePoint& p) { return {p.x, p.y}; }
inline PlanePoint to_point(const Vec2& v) { return {v.x(), v.y()}; }

template <class To, class From>
BasicPoint<To> point_cast(const BasicPoint<From>& p) {
  return {static_cast<To>(p.x), static_cast<To>(p.y)};
}

template <class To, class From>
BasicParams<To> params_cast(const BasicParams<From>& p) {
  return {static_cast<To>(p.a), static_cast<To>(p.b)};
}

template <class Real>
BasicPoint<Real> apply(const BasicParams<Real>& p, const BasicPoint<Real>& z) {
  return {z.y, p.a - p.b * z.x + z.y * z.y};
}

/// Inverse map ((a + x^2 - y) / b, x). Raises NonInvertible when b = 0.
template <class Real>
BasicPoint<Real> apply_inverse(const BasicParams<Real>& p, const BasicPoint<Real>& z) {
  if (p.b == 0) {
    throw Error(ErrorCode::NonInvertible, "phi_{a,0} is not a diffeomorphism");
  }
  return {(p.a + z.x * z.x - z.y) / p.b, z.x};
}

template <class Real>
BasicPoint<Real> iterate(const BasicParams<Real>& p, BasicPoint<Real> z, int n) {
  for (int i = 0; i < n; ++i) z = apply(p, z);
  for (int i = 0; i > n; --i) z = apply_inverse(p, z);
  return z;
}

/// Second-order jet of a plane curve: position and first two derivatives with
/// respect to the curve parameter. Pushing a jet through the map is exact
/// forward-mode differentiation.
template <class Real>
struct Jet2 {
  BasicPoint<Real> p;
  BasicPoint<Real> d1;
  BasicPoint<Real> d2;
};

template <class Real>
Jet2<Real> apply(const BasicParams<Real>& prm, const Jet2<Real>& j) {
  Jet2<Real> out;
  out.p = apply(prm, j.p);
  out.d1 = {j.d1.y, -prm.b * j.d1.x + 2 * j.p.y * j.d1.y};
  out.d2 = {j.d2.y, -prm.b * j.d2.x + 2 * j.p.y * j.d2.y + 2 * j.d1.y * j.d1.y};
  return out;
}

template <class Real>
Jet2<Real> apply_inverse(const BasicParams<Real>& prm, const Jet2<Real>& j) {
  if (prm.b == 0) {
    throw Error(ErrorCode::NonInvertible, "phi_{a,0} is not a diffeomorphism");
  }
  Jet2<Real> out;
  out.p = apply_inverse(prm, j.p);
  out.d1 = {(2 * j.p.x * j.d1.x - j.d1.y) / prm.b, j.d1.x};
  out.d2 = {(2 * j.p.x * j.d2.x + 2 * j.d1.x * j.d1.x - j.d2.y) / prm.b, j.d2.x};
  return out;
}

/// Differential [[0, 1], [-b, 2y]]; its determinant is b at every point.
Mat2 jacobian(const Params& p, const PlanePoint& z);

enum class Root { plus, minus };

struct SaddleData {
  PlanePoint point;
  double lambda = 0.0;  // eigenvalue of smaller modulus
  double sigma = 0.0;   // eigenvalue of larger modulus
  Vec2 v_s = Vec2::Zero();
  Vec2 v_u = Vec2::Zero();
  Root sign = Root::plus;
  bool real_eigenvalues = true;  // false at a focus; lambda = sigma = y then
};

/// y^{+/-}_{a,b} = (1 + b +/- sqrt((1 + b)^2 - 4a)) / 2.
double fixed_point_coordinate(const Params& p, Root sign);

/// Eigendata of one fixed point. Raises NoRealFixedPoints when the
/// discriminant is negative.
SaddleData fixed_point(const Params& p, Root sign = Root::plus);

/// Both fixed points, plus root first. At a zero discriminant the two entries
/// coincide.
std::array<SaddleData, 2> fixed_points(const Params& p);

/// 0 < |lambda| < 1 < sigma and |lambda| sigma < 1.
bool is_dissipative_saddle(const SaddleData& s);

struct ConjugatedData {
  Params params;
  PlanePoint point;
};

/// The classical map f_{a,b}(x, y) = (1 - a x^2 + y, b x).
PlanePoint classical_map(double a_orig, double b_orig, const PlanePoint& z);

/// Coordinate change (x, y) -> (-a y / b, -a x) taking the classical family at
/// (a, b) to phi at (-a, -b). Raises DegenerateConjugacy when a or b is zero.
PlanePoint conjugacy_coordinates(double a_orig, double b_orig, const PlanePoint& z);

ConjugatedData conjugate_from_original(double a_orig, double b_orig, const PlanePoint& z);

}  // namespace henon
