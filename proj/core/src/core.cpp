#include "henon/core.hpp"

#include <cmath>
#include <sstream>

namespace henon {

Mat2 jacobian(const Params& p, const PlanePoint& z) {
  Mat2 m;
  m << 0.0, 1.0, -p.b, 2.0 * z.y;
  return m;
}

namespace {

double discriminant(const Params& p) {
  const double s = 1.0 + p.b;
  return s * s - 4.0 * p.a;
}

Vec2 eigenvector(double mu) { return Vec2(1.0, mu).normalized(); }

}  // namespace

double fixed_point_coordinate(const Params& p, Root sign) {
  const double disc = discriminant(p);
  if (disc < 0.0) {
    std::ostringstream os;
    os << "(1+b)^2 - 4a = " << disc << " < 0 at (a,b) = (" << p.a << ", " << p.b << ")";
    throw Error(ErrorCode::NoRealFixedPoints, os.str());
  }
  const double r = std::sqrt(disc);
  return sign == Root::plus ? 0.5 * (1.0 + p.b + r) : 0.5 * (1.0 + p.b - r);
}

SaddleData fixed_point(const Params& p, Root sign) {
  const double y = fixed_point_coordinate(p, sign);
  SaddleData s;
  s.point = {y, y};
  s.sign = sign;
  const double inner = y * y - p.b;
  if (inner < 0.0) {
    s.real_eigenvalues = false;
    s.lambda = s.sigma = y;
    return s;
  }
  // Eigenvalues solve mu^2 - 2 y mu + b = 0. The larger root is formed without
  // cancellation; the smaller one from the product b.
  const double root = std::sqrt(inner);
  const double big = y >= 0.0 ? y + root : y - root;
  const double small = big != 0.0 ? p.b / big : 0.0;
  s.sigma = big;
  s.lambda = small;
  s.v_s = eigenvector(s.lambda);
  s.v_u = eigenvector(s.sigma);
  return s;
}

std::array<SaddleData, 2> fixed_points(const Params& p) {
  return {fixed_point(p, Root::plus), fixed_point(p, Root::minus)};
}

bool is_dissipative_saddle(const SaddleData& s) {
  if (!s.real_eigenvalues) return false;
  const double l = std::abs(s.lambda);
  return l > 0.0 && l < 1.0 && s.sigma > 1.0 && l * s.sigma < 1.0;
}

PlanePoint classical_map(double a_orig, double b_orig, const PlanePoint& z) {
  return {1.0 - a_orig * z.x * z.x + z.y, b_orig * z.x};
}

PlanePoint conjugacy_coordinates(double a_orig, double b_orig, const PlanePoint& z) {
  if (a_orig == 0.0 || b_orig == 0.0) {
    throw Error(ErrorCode::DegenerateConjugacy, "coordinate change needs a != 0 and b != 0");
  }
  return {-a_orig * z.y / b_orig, -a_orig * z.x};
}

ConjugatedData conjugate_from_original(double a_orig, double b_orig, const PlanePoint& z) {
  return {{-a_orig, -b_orig}, conjugacy_coordinates(a_orig, b_orig, z)};
}

}  // namespace henon
