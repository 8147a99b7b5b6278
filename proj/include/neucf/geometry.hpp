#pragma once

#include <array>

#include <nlohmann/json_fwd.hpp>

#include "neucf/types.hpp"

namespace neucf {

/// 2x3 affine map from the camera frame to the orthographic frame:
///   [x'; y'] = [a00 a01; a10 a11] [x; y] + [b00; b10]
struct AffineMap {
  double a00 = 1.0, a01 = 0.0, a10 = 0.0, a11 = 1.0;
  double b00 = 0.0, b10 = 0.0;

  double determinant() const { return a00 * a11 - a01 * a10; }
  static AffineMap identity() { return {}; }
};

/// Orthographic-frame extents (pixels) and the workspace they cover (cm).
struct WorkspaceCalib {
  double x_max = 520.0;
  double y_max = 470.0;
  double width_cm = 52.0;
  double height_cm = 47.0;

  void validate() const;
};

/// Exact 3-point fit. Throws CollinearPoints when the source triangle is
/// degenerate (|det| of the homogeneous source matrix below 1e-12).
AffineMap estimate_affine(const std::array<Vec2, 3>& src, const std::array<Vec2, 3>& dst);

Vec2 apply_affine(const AffineMap& m, const Vec2& p);

/// Throws CollinearPoints when the linear part is singular.
AffineMap invert_affine(const AffineMap& m);

/// Linear pixel -> cm mapping. Throws OutOfFrame when `p` leaves
/// [0, x_max] x [0, y_max] by more than one pixel.
Vec2 pixel_to_world(const WorkspaceCalib& c, const Vec2& p);
Vec2 world_to_pixel(const WorkspaceCalib& c, const Vec2& w);

/// Full camera calibration: camera -> orthographic affine plus the frame extents.
struct CameraCalibration {
  AffineMap affine;
  WorkspaceCalib workspace;
};

void to_json(nlohmann::json& j, const CameraCalibration& c);
void from_json(const nlohmann::json& j, CameraCalibration& c);

}  // namespace neucf
