#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "binseg/error.h"

namespace binseg {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

// Proper rigid motion x -> R x + t.
template <typename Scalar>
class RigidTransformT {
 public:
  using Vec = Vec3T<Scalar>;
  using Mat = Mat3T<Scalar>;

  RigidTransformT() : rotation_(Mat::Identity()), translation_(Vec::Zero()) {}
  RigidTransformT(const Mat& rotation, const Vec& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransformT Identity() { return {}; }

  const Mat& rotation() const { return rotation_; }
  const Vec& translation() const { return translation_; }

  Vec operator*(const Vec& p) const { return rotation_ * p + translation_; }

  // (this * other)(x) == this(other(x))
  RigidTransformT operator*(const RigidTransformT& other) const {
    return {rotation_ * other.rotation_,
            rotation_ * other.translation_ + translation_};
  }

  RigidTransformT inverse() const {
    Mat rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
  }

  // True when R^T R = I and det R = +1 within tol per entry.
  bool isProper(Scalar tol = Scalar(1e-9)) const {
    Mat err = rotation_.transpose() * rotation_ - Mat::Identity();
    return err.cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation_.determinant() - Scalar(1)) <= tol;
  }

  template <typename Other>
  RigidTransformT<Other> cast() const {
    return {rotation_.template cast<Other>(),
            translation_.template cast<Other>()};
  }

 private:
  Mat rotation_;
  Vec translation_;
};

using RigidTransform = RigidTransformT<double>;

inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return a * b;
}

// Rotation of `angle` radians about the world z axis.
Mat3 yawRotation(double angle);

struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  Mat3 matrix() const;
  // Throws ArgumentError unless fx, fy > 0 and the principal point lies in
  // the image.
  void validate() const;
};

struct CameraModel {
  CameraIntrinsics intrinsics;
  RigidTransform pose;  // camera-to-world; camera looks along +z, y down
};

struct Projection {
  double u, v, depth;
};

// Pinhole projection of a camera-frame point. Throws ArgumentError
// ("behind camera") when z <= 0.
template <typename Scalar>
Projection project(const CameraIntrinsics& k, const Vec3T<Scalar>& p) {
  if (!(p.z() > 0)) throw ArgumentError("behind camera");
  const double x = double(p.x()), y = double(p.y()), z = double(p.z());
  return {k.fx * x / z + k.cx, k.fy * y / z + k.cy, z};
}

// Inverse of project. Throws ArgumentError ("invalid depth") when d <= 0.
template <typename Scalar = double>
Vec3T<Scalar> deproject(const CameraIntrinsics& k, double u, double v,
                        double d) {
  if (!(d > 0)) throw ArgumentError("invalid depth");
  return Vec3T<Scalar>(Scalar((u - k.cx) * d / k.fx),
                       Scalar((v - k.cy) * d / k.fy), Scalar(d));
}

struct Triangle {
  std::uint32_t a, b, c;
  std::uint32_t operator[](int i) const { return i == 0 ? a : (i == 1 ? b : c); }
  friend bool operator==(const Triangle&, const Triangle&) = default;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::string name;

  // Drops triangles whose area is zero (collinear or repeated vertices).
  void dropDegenerate();
  // Throws DataError if any index is out of range.
  void validate() const;

  Eigen::AlignedBox3d bounds() const;
  double surfaceArea() const;
};

enum class ObjectKind { kForeground, kBackground };

struct ObjectInstance {
  std::string mesh_id;
  RigidTransform pose;  // object-to-world
  ObjectKind kind = ObjectKind::kForeground;
};

struct SceneState {
  std::vector<ObjectInstance> foreground;
  std::vector<ObjectInstance> background;
  CameraModel camera;
  std::uint64_t rng_seed = 0;
};

// H x W range image in meters; 0 marks a pixel with no return.
class DepthImage {
 public:
  using Array =
      Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  static constexpr float kInvalid = 0.0f;

  DepthImage() = default;
  DepthImage(int width, int height) : data_(Array::Zero(height, width)) {}
  explicit DepthImage(Array data) : data_(std::move(data)) {}

  int width() const { return int(data_.cols()); }
  int height() const { return int(data_.rows()); }
  std::size_t size() const { return std::size_t(data_.size()); }

  float operator()(int u, int v) const { return data_(v, u); }
  float& operator()(int u, int v) { return data_(v, u); }
  bool valid(int u, int v) const { return data_(v, u) > 0.0f; }

  const Array& array() const { return data_; }
  Array& array() { return data_; }
  const float* data() const { return data_.data(); }
  float* data() { return data_.data(); }

  std::size_t validCount() const {
    return std::size_t((data_ > 0.0f).count());
  }

  friend bool operator==(const DepthImage& a, const DepthImage& b) {
    return a.width() == b.width() && a.height() == b.height() &&
           (a.data_ == b.data_).all();
  }

 private:
  Array data_;
};

}  // namespace binseg
