#include "tdassist/segmentation.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "tdassist/error.hpp"

namespace tdassist::segmentation {

Bitmap::Bitmap(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw ValidationError("bitmap dimensions must be positive");
  pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const auto start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return std::string(bytes.substr(start, pos - start));
}

int pgm_int(std::string_view bytes, std::size_t& pos, const char* what) {
  const auto tok = pgm_token(bytes, pos);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(std::string("pgm: bad ") + what + " '" + tok + "'");
}

}  // namespace

Bitmap parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5") throw ParseError("pgm: expected magic P5");
  const int w = pgm_int(bytes, pos, "width");
  const int h = pgm_int(bytes, pos, "height");
  const int maxval = pgm_int(bytes, pos, "maxval");
  if (w <= 0 || h <= 0) throw ParseError("pgm: dimensions must be positive");
  if (maxval <= 0 || maxval > 255) throw ParseError("pgm: only 8-bit maxval is supported");
  ++pos;  // single whitespace byte before the raster
  const auto n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) throw ParseError("pgm: raster truncated");
  Bitmap b(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<unsigned char>(bytes[pos + i]);
    b.pixels[i] = static_cast<std::uint8_t>(maxval == 255 ? v : v * 255 / maxval);
  }
  return b;
}

std::string encode_pgm(const Bitmap& b) {
  std::string out = "P5\n" + std::to_string(b.width) + " " + std::to_string(b.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(b.pixels.data()), b.pixels.size());
  return out;
}

Bitmap decode_png(std::string_view bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw ParseError(std::string("png: ") + image.message);
  image.format = PNG_FORMAT_GRAY;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw ParseError("png: empty image");
  }
  Bitmap b(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, b.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw ParseError("png: " + msg);
  }
  return b;
}

Bitmap load_bitmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("not-found", "cannot open image '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG", 4) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return parse_pgm(bytes);
  throw ParseError("'" + path + "' is neither a binary PGM nor a PNG");
}

std::vector<Point> foreground_pixels(const Bitmap& b, int threshold) {
  std::vector<Point> out;
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x)
      if (b.at(x, y) < threshold) out.push_back({x, y});
  return out;
}

int default_min_pts(int width, int height) {
  const double n = 1e-5 * static_cast<double>(width) * static_cast<double>(height);
  return std::max(1, static_cast<int>(std::lround(n)));
}

namespace {

// Buckets of side eps; a neighbourhood query scans the 3x3 buckets around
// the point's own.
class Grid {
 public:
  Grid(const std::vector<Point>& points, double eps) : points_(points), eps_(eps) {
    for (std::size_t i = 0; i < points.size(); ++i) buckets_[key(cell(points[i]))].push_back(i);
  }

  void neighbours(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const auto [cx, cy] = cell(points_[i]);
    const double eps2 = eps_ * eps_;
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find(key({cx + dx, cy + dy}));
        if (it == buckets_.end()) continue;
        for (auto j : it->second) {
          const double ddx = points_[j].x - points_[i].x;
          const double ddy = points_[j].y - points_[i].y;
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    std::sort(out.begin(), out.end());
  }

 private:
  std::pair<std::int64_t, std::int64_t> cell(Point p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / eps_)),
            static_cast<std::int64_t>(std::floor(p.y / eps_))};
  }
  static std::uint64_t key(std::pair<std::int64_t, std::int64_t> c) {
    return (static_cast<std::uint64_t>(c.first) << 32) ^ static_cast<std::uint32_t>(c.second);
  }

  const std::vector<Point>& points_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace

std::vector<int> dbscan(const std::vector<Point>& points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (min_pts < 1) throw ConfigError("min_pts must be at least 1");
  constexpr int kUnvisited = -2;
  std::vector<int> label(points.size(), kUnvisited);
  Grid grid(points, eps);
  std::vector<std::size_t> nb, nb2, queue;
  int next_cluster = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    grid.neighbours(i, nb);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int c = next_cluster++;
    label[i] = c;
    queue.assign(nb.begin(), nb.end());
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const auto j = queue[q];
      if (label[j] == kNoise) label[j] = c;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = c;
      grid.neighbours(j, nb2);
      if (static_cast<int>(nb2.size()) >= min_pts)
        for (auto n : nb2)
          if (label[n] == kUnvisited || label[n] == kNoise) queue.push_back(n);
    }
  }
  return label;
}

std::vector<Segment> segment_bboxes(const std::vector<Point>& points,
                                    const std::vector<int>& assignment) {
  if (points.size() != assignment.size())
    throw ValidationError("assignment does not match the point set");
  struct Extent {
    int x0, y0, x1, y1;
    std::size_t n = 0;
  };
  std::map<int, Extent> ext;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assignment[i] < 0) continue;
    const auto p = points[i];
    auto [it, fresh] = ext.try_emplace(assignment[i], Extent{p.x, p.y, p.x, p.y});
    auto& e = it->second;
    e.x0 = std::min(e.x0, p.x);
    e.y0 = std::min(e.y0, p.y);
    e.x1 = std::max(e.x1, p.x);
    e.y1 = std::max(e.y1, p.y);
    ++e.n;
  }
  std::vector<Segment> out;
  for (const auto& [c, e] : ext)
    out.push_back({c, e.n, drawing::BoundingBox{e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1}});
  return out;
}

std::vector<Segment> segment(const Bitmap& b, const SegmentParams& params) {
  const auto points = foreground_pixels(b, params.threshold);
  const int min_pts = params.min_pts > 0 ? params.min_pts : default_min_pts(b.width, b.height);
  return segment_bboxes(points, dbscan(points, params.eps, min_pts));
}

std::string segments_to_json(const std::vector<Segment>& segments) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& s : segments)
    clusters.push_back({{"bbox", {s.bbox.x, s.bbox.y, s.bbox.width, s.bbox.height}},
                        {"pixels", s.pixels}});
  return nlohmann::json{{"clusters", clusters}}.dump();
}

}  // namespace tdassist::segmentation
