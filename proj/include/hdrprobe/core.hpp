#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hdrprobe {

static constexpr auto DYN = Eigen::Dynamic;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, DYN, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, DYN, DYN>;
template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// One row per cell or pixel, one column per color channel (R, G, B).
template <typename Scalar>
using ChannelMat = Eigen::Matrix<Scalar, DYN, 3>;

using RadianceMat = ChannelMat<double>;
using ClipMask = Eigen::Array<bool, DYN, 3>;

inline constexpr int kChannels = 3;

/// Argument outside an operation's domain (bad resolution, out-of-disk
/// coordinate, mismatched sizes).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input that is well-formed but carries no usable information.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double kkt_violation)
      : std::runtime_error(what), kkt_violation_(kkt_violation) {}

  double kkt_violation() const noexcept { return kkt_violation_; }

 private:
  double kkt_violation_;
};

}  // namespace hdrprobe
