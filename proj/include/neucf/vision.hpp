#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "neucf/geometry.hpp"
#include "neucf/types.hpp"

namespace neucf {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Hue in degrees [0, 360), saturation and value in [0, 1].
struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;
};

/// Standard hexcone conversion. Achromatic pixels (S = 0) get hue 0.
Hsv rgb_to_hsv(Rgb px);

/// Row-major 8-bit RGB raster. Pixel (x, y) covers [x, x+1) x [y, y+1).
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const Rgb> pixels() const { return pixels_; }

  void fill(Rgb c);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

// Binary P6 portable pixmap, maxval 255.
RasterImage read_ppm(std::istream& in);
RasterImage read_ppm(const std::filesystem::path& path);
void write_ppm(std::ostream& out, const RasterImage& img);
void write_ppm(const std::filesystem::path& path, const RasterImage& img);

/// Paints every pixel whose centre lies within `radius` of `center`.
void fill_disc(RasterImage& img, const Vec2& center, double radius, Rgb color);

struct HueWindow {
  double lo_deg = 0.0;
  double hi_deg = 0.0;
  bool contains(double h) const { return h >= lo_deg && h <= hi_deg; }
};

struct SegmentationConfig {
  HueWindow orange{10.0, 35.0};
  HueWindow green{85.0, 150.0};
  double min_saturation = 0.35;
  double min_value = 0.25;
  /// Components smaller than this fraction of the image area are dropped.
  double min_area_fraction = 0.001;
};

struct Blob {
  BeaconColor color = BeaconColor::Orange;
  Vec2 centroid = Vec2::Zero();  // pixel coordinates, pixel centres at +0.5
  std::size_t area = 0;
};

/// 4-connected components of the orange and green hue masks, largest first.
std::vector<Blob> segment_beacons(const RasterImage& img, const SegmentationConfig& cfg);

/// Colours used when rendering synthetic frames; both sit inside the default hue windows.
inline constexpr Rgb kOrangeBall{255, 120, 0};
inline constexpr Rgb kGreenBall{20, 190, 40};
inline constexpr Rgb kTableTop{235, 235, 230};

struct SceneBall {
  BeaconColor color;
  Vec2 pos_cm;
};

/// Synthetic bird's-eye camera. The image is taken in the camera frame; the
/// calibration maps camera pixels to the orthographic frame, which maps
/// linearly to the workspace.
class SyntheticCamera {
 public:
  SyntheticCamera(CameraCalibration calib, int width, int height, double ball_diameter_cm = 7.5);

  /// Default rig: a slightly rotated camera at half the orthographic resolution
  /// covering the whole table, with the calibration fitted from three table corners.
  static SyntheticCamera default_rig(const WorkspaceCalib& ws = {});

  const CameraCalibration& calibration() const { return calib_; }
  int width() const { return width_; }
  int height() const { return height_; }

  RasterImage render(std::span<const SceneBall> balls) const;
  void render_into(RasterImage& img, std::span<const SceneBall> balls) const;

  /// Camera pixel -> world cm using the calibration.
  Vec2 camera_to_world(const Vec2& px) const;
  Vec2 world_to_camera(const Vec2& w) const;

 private:
  CameraCalibration calib_;
  AffineMap inverse_;
  int width_;
  int height_;
  double ball_radius_cm_;
};

}  // namespace neucf
