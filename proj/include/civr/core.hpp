#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace civr {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// One draw of the random component. In finite-sum mode this is the
/// component index in [0, n); in expectation mode it is an opaque token the
/// oracle maps deterministically to a realization of xi.
using Draw = std::uint64_t;

/// Count of (g_xi, g'_xi) pair evaluations, each at a single point.
using SampleCount = std::int64_t;

/// Raised when an iterate stops being finite; carries the (epoch, iter)
/// slot where it happened.
class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& what, std::int64_t epoch, std::int64_t iter)
      : std::runtime_error(what + " at epoch " + std::to_string(epoch) + ", iter " +
                           std::to_string(iter)),
        epoch_(epoch),
        iter_(iter) {}

  std::int64_t epoch() const noexcept { return epoch_; }
  std::int64_t iter() const noexcept { return iter_; }

 private:
  std::int64_t epoch_;
  std::int64_t iter_;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

inline void require_dims(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(std::string("dimension mismatch: ") + message);
}

}  // namespace civr
