#include "neucf/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace neucf {

std::string_view to_string(BeaconColor c) { return c == BeaconColor::Orange ? "orange" : "green"; }

BeaconColor beacon_color_from_string(std::string_view s) {
  if (s == "orange") return BeaconColor::Orange;
  if (s == "green") return BeaconColor::Green;
  throw ValidationError("unknown beacon color '" + std::string(s) + "'");
}

void WorkspaceCalib::validate() const {
  if (!(x_max > 0.0 && y_max > 0.0 && width_cm > 0.0 && height_cm > 0.0)) {
    throw InvalidParameter("workspace calibration extents must be strictly positive");
  }
}

AffineMap estimate_affine(const std::array<Vec2, 3>& src, const std::array<Vec2, 3>& dst) {
  // Rows [x y 1]; the same system solves both output coordinates.
  Eigen::Matrix3d s;
  for (int i = 0; i < 3; ++i) s.row(i) << src[i].x(), src[i].y(), 1.0;
  if (std::abs(s.determinant()) < 1e-12) {
    throw CollinearPoints("affine fit needs three non-collinear source points");
  }
  Eigen::Matrix<double, 3, 2> d;
  for (int i = 0; i < 3; ++i) d.row(i) << dst[i].x(), dst[i].y();
  const Eigen::Matrix<double, 3, 2> coef = s.fullPivLu().solve(d);

  AffineMap m;
  m.a00 = coef(0, 0);
  m.a01 = coef(1, 0);
  m.b00 = coef(2, 0);
  m.a10 = coef(0, 1);
  m.a11 = coef(1, 1);
  m.b10 = coef(2, 1);
  return m;
}

Vec2 apply_affine(const AffineMap& m, const Vec2& p) {
  return {m.a00 * p.x() + m.a01 * p.y() + m.b00, m.a10 * p.x() + m.a11 * p.y() + m.b10};
}

AffineMap invert_affine(const AffineMap& m) {
  const double det = m.determinant();
  if (std::abs(det) < 1e-12) throw CollinearPoints("affine map is not invertible");
  AffineMap inv;
  inv.a00 = m.a11 / det;
  inv.a01 = -m.a01 / det;
  inv.a10 = -m.a10 / det;
  inv.a11 = m.a00 / det;
  inv.b00 = -(inv.a00 * m.b00 + inv.a01 * m.b10);
  inv.b10 = -(inv.a10 * m.b00 + inv.a11 * m.b10);
  return inv;
}

Vec2 pixel_to_world(const WorkspaceCalib& c, const Vec2& p) {
  constexpr double kSlack = 1.0;
  if (p.x() < -kSlack || p.y() < -kSlack || p.x() > c.x_max + kSlack || p.y() > c.y_max + kSlack) {
    throw OutOfFrame("pixel (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                     ") outside the calibrated frame");
  }
  return {p.x() / c.x_max * c.width_cm, p.y() / c.y_max * c.height_cm};
}

Vec2 world_to_pixel(const WorkspaceCalib& c, const Vec2& w) {
  return {w.x() / c.width_cm * c.x_max, w.y() / c.height_cm * c.y_max};
}

void to_json(nlohmann::json& j, const CameraCalibration& c) {
  const auto& a = c.affine;
  j = nlohmann::json{{"a", {{a.a00, a.a01}, {a.a10, a.a11}}},
                     {"b", {a.b00, a.b10}},
                     {"x_max", c.workspace.x_max},
                     {"y_max", c.workspace.y_max},
                     {"width_cm", c.workspace.width_cm},
                     {"height_cm", c.workspace.height_cm}};
}

void from_json(const nlohmann::json& j, CameraCalibration& c) {
  const auto& a = j.at("a");
  c.affine.a00 = a.at(0).at(0).get<double>();
  c.affine.a01 = a.at(0).at(1).get<double>();
  c.affine.a10 = a.at(1).at(0).get<double>();
  c.affine.a11 = a.at(1).at(1).get<double>();
  c.affine.b00 = j.at("b").at(0).get<double>();
  c.affine.b10 = j.at("b").at(1).get<double>();
  c.workspace.x_max = j.at("x_max").get<double>();
  c.workspace.y_max = j.at("y_max").get<double>();
  c.workspace.width_cm = j.at("width_cm").get<double>();
  c.workspace.height_cm = j.at("height_cm").get<double>();
  c.workspace.validate();
}

}  // namespace neucf
