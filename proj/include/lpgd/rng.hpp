#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace lpgd {

// Deterministic random source. The engine algorithm and all value mappings
// are fully specified here, so identical seeds give identical streams on any
// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double a = 0.0, double b = 1.0) {
    const std::uint64_t r = engine_() >> 11;  // 53 mantissa bits
    return a + (b - a) * (static_cast<double>(r) * 0x1.0p-53);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_cached_) {
      have_cached_ = false;
      return mean + stddev * cached_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  // Uniform integer in [0, n). n must be positive and far below 2^64.
  std::uint64_t integer(std::uint64_t n) { return engine_() % n; }

  Eigen::VectorXd uniform_vector(Eigen::Index n, double a, double b) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  Eigen::VectorXd normal_vector(Eigen::Index n, double stddev = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(0.0, stddev);
    return v;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c,
                                double stddev = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(0.0, stddev);
    return m;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[integer(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace lpgd
