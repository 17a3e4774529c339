#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Base error for every contract violation raised by the library.
/// `indices` carries offending node / vertex / triangle ids when there are any.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::vector<long> indices = {})
      : std::runtime_error(what), indices_(std::move(indices)) {}

  const std::vector<long>& indices() const noexcept { return indices_; }

 private:
  std::vector<long> indices_;
};

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path; both produce bitwise identical results.
enum class Exec { serial, parallel };

/// Thread cap: HF_THREADS if set and positive, otherwise the OpenMP default.
int max_threads();

/// Runs fn(i) for i in [0, n). Every iteration must write only to its own
/// slots; no reductions happen inside, so results never depend on scheduling.
template <typename Fn>
void for_each_index(long n, Exec exec, Fn&& fn) {
  if (exec == Exec::parallel) {
    const int threads = max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long i = 0; i < n; ++i) fn(i);
  } else {
    for (long i = 0; i < n; ++i) fn(i);
  }
}

/// Same as for_each_index with dynamic scheduling, for uneven per-item cost.
template <typename Fn>
void for_each_index_dynamic(long n, Exec exec, Fn&& fn) {
  if (exec == Exec::parallel) {
    const int threads = max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (long i = 0; i < n; ++i) fn(i);
  } else {
    for (long i = 0; i < n; ++i) fn(i);
  }
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace hf
