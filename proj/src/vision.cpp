#include "neucf/vision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace neucf {

Hsv rgb_to_hsv(Rgb px) {
  const double r = px.r / 255.0, g = px.g / 255.0, b = px.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double c = mx - mn;

  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? c / mx : 0.0;
  if (c <= 0.0) return out;

  double h;
  if (mx == r) {
    h = std::fmod((g - b) / c, 6.0);
  } else if (mx == g) {
    h = (b - r) / c + 2.0;
  } else {
    h = (r - g) / c + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ImageFormatError("negative image dimensions");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

void RasterImage::fill(Rgb c) { std::fill(pixels_.begin(), pixels_.end(), c); }

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_positive(const std::string& tok, const char* what) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ImageFormatError(std::string("bad PPM ") + what + " '" + tok + "'");
  }
  if (tok.size() > 9) throw ImageFormatError(std::string("PPM ") + what + " too large");
  return std::stoi(tok);
}

}  // namespace

RasterImage read_ppm(std::istream& in) {
  if (next_token(in) != "P6") throw ImageFormatError("missing P6 magic");
  const int w = parse_positive(next_token(in), "width");
  const int h = parse_positive(next_token(in), "height");
  const int maxval = parse_positive(next_token(in), "maxval");
  if (maxval != 255) throw ImageFormatError("only maxval 255 is supported");
  if (w == 0 || h == 0) throw ImageFormatError("empty PPM image");

  RasterImage img(w, h);
  std::vector<char> buf(static_cast<std::size_t>(w) * h * 3);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw ImageFormatError("truncated PPM pixel data");
  }
  std::size_t k = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x, k += 3) {
      img.at(x, y) = {static_cast<std::uint8_t>(buf[k]), static_cast<std::uint8_t>(buf[k + 1]),
                      static_cast<std::uint8_t>(buf[k + 2])};
    }
  }
  return img;
}

RasterImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open '" + path.string() + "'");
  return read_ppm(in);
}

void write_ppm(std::ostream& out, const RasterImage& img) {
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (const Rgb& p : img.pixels()) {
    const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(rgb, 3);
  }
}

void write_ppm(const std::filesystem::path& path, const RasterImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageFormatError("cannot write '" + path.string() + "'");
  write_ppm(out, img);
}

void fill_disc(RasterImage& img, const Vec2& center, double radius, Rgb color) {
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x() - radius)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(center.x() + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y() - radius)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(center.y() + radius)));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    const double dy = y + 0.5 - center.y();
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - center.x();
      if (dx * dx + dy * dy <= r2) img.at(x, y) = color;
    }
  }
}

std::vector<Blob> segment_beacons(const RasterImage& img, const SegmentationConfig& cfg) {
  const int w = img.width(), h = img.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;

  // 0 = background, 1 = orange, 2 = green
  std::vector<std::uint8_t> cls(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Hsv hsv = rgb_to_hsv(img.pixels()[i]);
    if (hsv.s < cfg.min_saturation || hsv.v < cfg.min_value) continue;
    if (cfg.orange.contains(hsv.h)) {
      cls[i] = 1;
    } else if (cfg.green.contains(hsv.h)) {
      cls[i] = 2;
    }
  }

  const double min_area = cfg.min_area_fraction * static_cast<double>(n);
  std::vector<Blob> blobs;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (cls[start] == 0 || seen[start]) continue;
    const std::uint8_t c = cls[start];
    double sx = 0.0, sy = 0.0;
    std::size_t area = 0;
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      ++area;
      sx += x + 0.5;
      sy += y + 0.5;
      auto visit = [&](std::size_t j) {
        if (cls[j] == c && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < w) visit(i + 1);
      if (y > 0) visit(i - w);
      if (y + 1 < h) visit(i + w);
    }
    if (static_cast<double>(area) < min_area) continue;
    blobs.push_back({c == 1 ? BeaconColor::Orange : BeaconColor::Green,
                     Vec2(sx / area, sy / area), area});
  }
  std::stable_sort(blobs.begin(), blobs.end(),
                   [](const Blob& a, const Blob& b) { return a.area > b.area; });
  return blobs;
}

SyntheticCamera::SyntheticCamera(CameraCalibration calib, int width, int height, double ball_diameter_cm)
    : calib_(calib),
      inverse_(invert_affine(calib.affine)),
      width_(width),
      height_(height),
      ball_radius_cm_(ball_diameter_cm / 2.0) {
  calib_.workspace.validate();
  if (width <= 0 || height <= 0) throw InvalidParameter("camera image must be non-empty");
  if (!(ball_diameter_cm > 0.0)) throw InvalidParameter("ball diameter must be positive");
}

SyntheticCamera SyntheticCamera::default_rig(const WorkspaceCalib& ws) {
  ws.validate();
  // Camera placement: orthographic frame rotated by 3 degrees, scaled 0.525, offset.
  const double th = 3.0 * std::numbers::pi / 180.0, s = 0.525;
  const double ox = 18.0, oy = 6.0;
  auto to_cam = [&](const Vec2& o) {
    return Vec2(s * (std::cos(th) * o.x() - std::sin(th) * o.y()) + ox,
                s * (std::sin(th) * o.x() + std::cos(th) * o.y()) + oy);
  };
  const std::array<Vec2, 3> corners_o{Vec2(0.0, 0.0), Vec2(ws.x_max, 0.0), Vec2(0.0, ws.y_max)};
  const std::array<Vec2, 3> corners_cam{to_cam(corners_o[0]), to_cam(corners_o[1]), to_cam(corners_o[2])};

  CameraCalibration calib{estimate_affine(corners_cam, corners_o), ws};
  const Vec2 far = to_cam(Vec2(ws.x_max, ws.y_max));
  const int w = static_cast<int>(std::ceil(std::max(far.x(), corners_cam[1].x()) + ox));
  const int h = static_cast<int>(std::ceil(std::max(far.y(), corners_cam[2].y()) + oy));
  return SyntheticCamera(calib, w, h);
}

Vec2 SyntheticCamera::camera_to_world(const Vec2& px) const {
  return pixel_to_world(calib_.workspace, apply_affine(calib_.affine, px));
}

Vec2 SyntheticCamera::world_to_camera(const Vec2& w) const {
  return apply_affine(inverse_, world_to_pixel(calib_.workspace, w));
}

RasterImage SyntheticCamera::render(std::span<const SceneBall> balls) const {
  RasterImage img(width_, height_, kTableTop);
  render_into(img, balls);
  return img;
}

void SyntheticCamera::render_into(RasterImage& img, std::span<const SceneBall> balls) const {
  if (img.width() != width_ || img.height() != height_) img = RasterImage(width_, height_);
  img.fill(kTableTop);

  const auto& ws = calib_.workspace;
  const auto& a = calib_.affine;
  const double sx = ws.width_cm / ws.x_max, sy = ws.height_cm / ws.y_max;
  // Upper bound on camera pixels per cm, for the bounding box.
  const double inv_norm = std::sqrt(inverse_.a00 * inverse_.a00 + inverse_.a01 * inverse_.a01 +
                                    inverse_.a10 * inverse_.a10 + inverse_.a11 * inverse_.a11);
  const double r_px = ball_radius_cm_ * std::max(1.0 / sx, 1.0 / sy) * inv_norm + 1.0;
  const double r2 = ball_radius_cm_ * ball_radius_cm_;

  for (const SceneBall& b : balls) {
    const Vec2 c = world_to_camera(b.pos_cm);
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x() - r_px)));
    const int x1 = std::min(width_ - 1, static_cast<int>(std::ceil(c.x() + r_px)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y() - r_px)));
    const int y1 = std::min(height_ - 1, static_cast<int>(std::ceil(c.y() + r_px)));
    const Rgb color = b.color == BeaconColor::Orange ? kOrangeBall : kGreenBall;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double wx = (a.a00 * px + a.a01 * py + a.b00) * sx;
        const double wy = (a.a10 * px + a.a11 * py + a.b10) * sy;
        const double dx = wx - b.pos_cm.x(), dy = wy - b.pos_cm.y();
        if (dx * dx + dy * dy <= r2) img.at(x, y) = color;
      }
    }
  }
}

}  // namespace neucf
