#ifndef WSSEG_CAMERA_HPP
#define WSSEG_CAMERA_HPP

#include <cmath>
#include <optional>

#include <Eigen/Core>
#include <Eigen/LU>

#include "wsseg/tensor_io.hpp"

namespace wsseg {

// Pinhole model: depth * [u, v, 1]^T = K * (R * p + t).
template <typename Scalar>
struct PinholeCamera {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Matrix3 intrinsics = Matrix3::Identity();
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();
  int width = 0;
  int height = 0;

  bool is_valid(Scalar tolerance = Scalar(1e-6)) const {
    const bool orthonormal =
        ((rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff() <=
         tolerance);
    const bool focal_ok = intrinsics(0, 0) > Scalar(0) && intrinsics(1, 1) > Scalar(0);
    const bool lower_ok = intrinsics(1, 0) == Scalar(0) && intrinsics(2, 0) == Scalar(0);
    return orthonormal && focal_ok && lower_ok && width >= 0 && height >= 0;
  }
};

template <typename Scalar>
struct Projection {
  Eigen::Matrix<Scalar, 2, 1> pixel;  // continuous (u, v)
  Scalar depth;
};

inline constexpr double kMinDepth = 1e-9;

template <typename Scalar>
std::optional<Projection<Scalar>> project_point(const Eigen::Matrix<Scalar, 3, 1>& p,
                                                const PinholeCamera<Scalar>& cam) {
  const Eigen::Matrix<Scalar, 3, 1> q = cam.rotation * p + cam.translation;
  if (!(q.z() > Scalar(kMinDepth))) return std::nullopt;
  const Eigen::Matrix<Scalar, 3, 1> h = cam.intrinsics * q;
  return Projection<Scalar>{h.template head<2>() / h.z(), q.z()};
}

// Camera-frame point at `depth` along the ray through `pixel`.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> backproject(const Eigen::Matrix<Scalar, 2, 1>& pixel,
                                        Scalar depth, const PinholeCamera<Scalar>& cam) {
  const Eigen::Matrix<Scalar, 3, 1> ray =
      cam.intrinsics.inverse() * Eigen::Matrix<Scalar, 3, 1>(pixel.x(), pixel.y(), Scalar(1));
  return depth * ray / ray.z();
}

// Nearest pixel after rounding half away from zero; nullopt outside the grid.
template <typename Scalar>
std::optional<Eigen::Index> pixel_index(const Eigen::Matrix<Scalar, 2, 1>& pixel,
                                        const PinholeCamera<Scalar>& cam) {
  using std::round;
  const Scalar cu = round(pixel.x()), cv = round(pixel.y());
  if (!(cu >= Scalar(0) && cv >= Scalar(0) && cu < Scalar(cam.width) &&
        cv < Scalar(cam.height)))
    return std::nullopt;
  return static_cast<Eigen::Index>(cv) * cam.width + static_cast<Eigen::Index>(cu);
}

enum class PayloadKind { Logits, Embeddings };

// A posed view with its per-pixel payload stored as (H*W) x channels, row
// index = v * W + u.
struct CameraView {
  PinholeCamera<double> camera;
  PayloadKind kind = PayloadKind::Logits;
  RowMatrixXf payload;

  Eigen::Index channels() const { return payload.cols(); }

  // Throws DataError on a broken pose/intrinsics or a payload whose row
  // count is not width * height.
  void validate() const;
};

}  // namespace wsseg

#endif  // WSSEG_CAMERA_HPP
