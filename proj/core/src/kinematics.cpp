#include "chiralmag/kinematics.hpp"

#include "chiralmag/errors.hpp"

#include <cmath>
#include <sstream>

namespace chiralmag {

double frobenius_norm(const Mat3& F) { return F.norm(); }

double determinant(const Mat3& F) {
  return F(0, 0) * (F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1)) -
         F(0, 1) * (F(1, 0) * F(2, 2) - F(1, 2) * F(2, 0)) +
         F(0, 2) * (F(1, 0) * F(2, 1) - F(1, 1) * F(2, 0));
}

Mat3 cofactor(const Mat3& F) {
  Mat3 C;
  C(0, 0) = F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1);
  C(0, 1) = F(1, 2) * F(2, 0) - F(1, 0) * F(2, 2);
  C(0, 2) = F(1, 0) * F(2, 1) - F(1, 1) * F(2, 0);
  C(1, 0) = F(0, 2) * F(2, 1) - F(0, 1) * F(2, 2);
  C(1, 1) = F(0, 0) * F(2, 2) - F(0, 2) * F(2, 0);
  C(1, 2) = F(0, 1) * F(2, 0) - F(0, 0) * F(2, 1);
  C(2, 0) = F(0, 1) * F(1, 2) - F(0, 2) * F(1, 1);
  C(2, 1) = F(0, 2) * F(1, 0) - F(0, 0) * F(1, 2);
  C(2, 2) = F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
  return C;
}

Mat3 adjugate(const Mat3& F) { return cofactor(F).transpose(); }

bool has_positive_determinant(const Mat3& F) {
  const double n = frobenius_norm(F);
  return determinant(F) > kDetGate * n * n * n;
}

namespace {

void require_positive(const Mat3& F) {
  if (!has_positive_determinant(F)) {
    std::ostringstream os;
    os << "det F = " << determinant(F) << " fails the positivity gate";
    throw Error(ErrorCode::NonPositiveDeterminant, os.str());
  }
}

} // namespace

Mat3 inverse_gradient(const Mat3& F) {
  require_positive(F);
  return adjugate(F) / determinant(F);
}

InverseIdentities inverse_identities(const Mat3& F) {
  require_positive(F);
  const double d = determinant(F);
  return {adjugate(F) / d, F / d, 1.0 / d};
}

Mat3 cofactor_vjp(const Mat3& F, const Mat3& A) {
  Mat3 G;
  for (int k = 0; k < 3; ++k) {
    const int k1 = (k + 1) % 3;
    const int k2 = (k + 2) % 3;
    const Vec3 a1 = A.row(k1).transpose();
    const Vec3 a2 = A.row(k2).transpose();
    const Vec3 r1 = F.row(k1).transpose();
    const Vec3 r2 = F.row(k2).transpose();
    G.row(k) = (a1.cross(r2) + r1.cross(a2)).transpose();
  }
  return G;
}

Vec3 curl_from_gradient(const Mat3& G) {
  return {G(2, 1) - G(1, 2), G(0, 2) - G(2, 0), G(1, 0) - G(0, 1)};
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

} // namespace chiralmag
