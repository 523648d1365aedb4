#pragma once

#include "chiralmag/errors.hpp"
#include "chiralmag/fields.hpp"

#include <gtest/gtest.h>

#include <random>

namespace chiralmag::test {

// det > 0 by construction: rotation times a well-conditioned SPD stretch.
inline Mat3 random_gradient(std::mt19937_64& rng, double spread = 0.3) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat3 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = spread * n(rng);
  Mat3 S = Mat3::Identity() + 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(S);
  S = es.eigenvectors() * es.eigenvalues().cwiseMax(0.2).asDiagonal() * es.eigenvectors().transpose();
  const Eigen::Quaterniond r(n(rng), n(rng), n(rng), n(rng));
  return r.normalized().toRotationMatrix() * S;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

template <class Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

} // namespace chiralmag::test
