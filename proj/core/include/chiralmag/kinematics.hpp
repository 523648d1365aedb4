#pragma once

#include "chiralmag/types.hpp"

namespace chiralmag {

/// Relative threshold below which det F is treated as non-positive:
/// det F > kDetGate * |F|^3 is required wherever an inverse is taken.
inline constexpr double kDetGate = 1e-12;

double frobenius_norm(const Mat3& F);
double determinant(const Mat3& F);

/// Cofactor by explicit 2x2 minor expansion; defined for singular F.
Mat3 cofactor(const Mat3& F);

/// adj F = (cof F)^T, so that F * adj F = det F * I.
Mat3 adjugate(const Mat3& F);

/// True when det F passes the positivity gate.
bool has_positive_determinant(const Mat3& F);

/// F^{-1} = adj F / det F. Throws NonPositiveDeterminant.
Mat3 inverse_gradient(const Mat3& F);

/// Quantities of the inverse map used when changing variables between the
/// reference and deformed configurations.
struct InverseIdentities {
  Mat3 inverse;          // F^{-1}
  Mat3 adj_of_inverse;   // adj(F^{-1}) = F / det F
  double det_of_inverse; // 1 / det F
};

InverseIdentities inverse_identities(const Mat3& F);

/// Gradient with respect to F of the scalar A : cof(F).
/// Rows of cof F are cross products of rows of F, which gives
/// d/dr_k = a_{k+1} x r_{k+2} + r_{k+1} x a_{k+2} (indices mod 3).
Mat3 cofactor_vjp(const Mat3& F, const Mat3& A);

/// Axial vector of the chirality contraction: c_i = eps_ijk G_kj.
/// For G the Eulerian gradient of m this is curl m.
Vec3 curl_from_gradient(const Mat3& G);

/// Skew matrix [v]_x with [v]_x w = v x w.
Mat3 cross_matrix(const Vec3& v);

} // namespace chiralmag
