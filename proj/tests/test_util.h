#ifndef PCOL_TESTS_TEST_UTIL_H_
#define PCOL_TESTS_TEST_UTIL_H_

#include <random>

#include <gtest/gtest.h>

#include "pcol/errors.h"
#include "pcol/geometry.h"

#define EXPECT_PCOL_ERROR(stmt, expected_code)                          \
  do {                                                                  \
    try {                                                               \
      stmt;                                                             \
      ADD_FAILURE() << "expected pcol::Error from " #stmt;              \
    } catch (const ::pcol::Error& e) {                                  \
      EXPECT_EQ(e.code(), expected_code) << e.what();                   \
    }                                                                   \
  } while (0)

namespace pcol::testutil {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double Normal() { return std::normal_distribution<double>()(engine_); }
  std::int64_t Int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline Vec3 RandomVec(Rng& rng, double scale) {
  return Vec3(rng.Normal(), rng.Normal(), rng.Normal()) * scale;
}

inline Mat3 RandomSpd(Rng& rng, double scale) {
  Mat3 a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.Normal() * scale;
  Mat3 c = a * a.transpose() + Mat3::Identity() * scale * scale * 0.05;
  return 0.5 * (c + c.transpose());
}

inline ObjectState RandomState(Rng& rng) {
  ObjectState s;
  s.position = RandomVec(rng, 300.0);
  s.velocity = RandomVec(rng, 5000.0);
  s.covariance = RandomSpd(rng, rng.Uniform(5.0, 80.0));
  s.radius = rng.Uniform(0.5, 10.0);
  return s;
}

inline Mat3 RandomRotation(Rng& rng) {
  Eigen::Quaterniond q(rng.Normal(), rng.Normal(), rng.Normal(), rng.Normal());
  return q.normalized().toRotationMatrix();
}

}  // namespace pcol::testutil

#endif  // PCOL_TESTS_TEST_UTIL_H_
