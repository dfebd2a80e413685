#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdassist/drawing.hpp"

namespace tdassist::segmentation {

struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major grayscale

  Bitmap() = default;
  Bitmap(int w, int h, std::uint8_t fill = 255);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { pixels[static_cast<std::size_t>(y) * width + x] = v; }
};

// Binary PGM (P5, maxval <= 255) or PNG; PNG colour is reduced to luma.
Bitmap load_bitmap(const std::string& path);
Bitmap parse_pgm(std::string_view bytes);
Bitmap decode_png(std::string_view bytes);
std::string encode_pgm(const Bitmap& b);

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

// Pixels darker than the threshold, in row-major order.
std::vector<Point> foreground_pixels(const Bitmap& b, int threshold = 200);

inline constexpr int kNoise = -1;

// Cluster id per point (kNoise for noise). Clusters are numbered in the
// order their first core point appears in the input.
std::vector<int> dbscan(const std::vector<Point>& points, double eps = 30.0, int min_pts = 1);

// max(1, round(1e-5 * width * height)).
int default_min_pts(int width, int height);

struct Segment {
  int cluster = 0;
  std::size_t pixels = 0;
  drawing::BoundingBox bbox;
};

std::vector<Segment> segment_bboxes(const std::vector<Point>& points,
                                    const std::vector<int>& assignment);

struct SegmentParams {
  int threshold = 200;
  double eps = 30.0;
  int min_pts = 0;  // 0: derive from the image size
};

std::vector<Segment> segment(const Bitmap& b, const SegmentParams& params = {});

// {"clusters": [{"bbox": [x, y, w, h], "pixels": n}, ...]}
std::string segments_to_json(const std::vector<Segment>& segments);

}  // namespace tdassist::segmentation
