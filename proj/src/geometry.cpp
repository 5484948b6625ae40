#include "courtviz/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "courtviz/error.hpp"
#include "courtviz/video_meta.hpp"

namespace courtviz {

namespace {

constexpr double kDenominatorEpsilon = 1e-9;
constexpr double kSingularEpsilon = 1e-12;

std::array<double, 9> normalized(std::array<double, 9> m) {
  if (m[8] != 0.0 && m[8] != 1.0) {
    const double s = m[8];
    for (double& v : m) v /= s;
  }
  return m;
}

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& row_major) : m_(normalized(row_major)) {}

double Homography::determinant() const { return det3(m_); }

bool Homography::invertible() const { return std::abs(determinant()) > kSingularEpsilon; }

Point apply(const Homography& h, Point p) {
  const auto& m = h.values();
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  if (std::abs(w) <= kDenominatorEpsilon) {
    throw Error(ErrorCode::kDegenerate, "point maps to infinity under homography");
  }
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography inverse(const Homography& h) {
  const auto& m = h.values();
  const double det = det3(m);
  if (!std::isfinite(det) || std::abs(det) <= kSingularEpsilon) {
    throw Error(ErrorCode::kDegenerate, "homography is singular");
  }
  // adjugate / det
  std::array<double, 9> inv{
      (m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det, (m[1] * m[5] - m[2] * m[4]) / det,
      (m[5] * m[6] - m[3] * m[8]) / det, (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
      (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det, (m[0] * m[4] - m[1] * m[3]) / det,
  };
  return Homography(inv);
}

Homography compose(const Homography& a, const Homography& b) {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
      out[static_cast<std::size_t>(r * 3 + c)] = s;
    }
  }
  return Homography(out);
}

Homography homography_from_points(const std::array<Point, 4>& src, const std::array<Point, 4>& dst) {
  // Eight unknowns with h33 fixed to 1.
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[static_cast<std::size_t>(i)].x;
    const double y = src[static_cast<std::size_t>(i)].y;
    const double u = dst[static_cast<std::size_t>(i)].x;
    const double v = dst[static_cast<std::size_t>(i)].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kDegenerate, "point correspondences are degenerate");
  }
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  return Homography({h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0});
}

Homography default_ground_homography(int width, int height) {
  const double w = width;
  const double h = height;
  return homography_from_points({Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{1, 1}},
                                {Point{0.2 * w, 0.55 * h}, Point{0.8 * w, 0.55 * h}, Point{0, h}, Point{w, h}});
}

Homography default_ground_homography(const VideoMeta& meta) {
  return default_ground_homography(meta.width, meta.height);
}

double horizontal_scale(const Homography& h, Point ground) {
  const auto& m = h.values();
  const double u = m[0] * ground.x + m[1] * ground.y + m[2];
  const double v = m[3] * ground.x + m[4] * ground.y + m[5];
  const double w = m[6] * ground.x + m[7] * ground.y + m[8];
  if (std::abs(w) <= kDenominatorEpsilon) {
    throw Error(ErrorCode::kDegenerate, "point maps to infinity under homography");
  }
  const double dx = (m[0] * w - u * m[6]) / (w * w);
  const double dy = (m[3] * w - v * m[6]) / (w * w);
  return std::hypot(dx, dy);
}

std::vector<Point> project_polyline(const Homography& h, std::span<const Point> points, double max_seg_len) {
  if (points.size() < 2) throw Error(ErrorCode::kInvalidArgument, "polyline needs at least 2 points");
  if (!(max_seg_len > 0.0)) throw Error(ErrorCode::kInvalidArgument, "max segment length must be positive");
  std::vector<Point> out;
  out.push_back(apply(h, points[0]));
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Point a = points[i - 1];
    const Point b = points[i];
    const auto pieces = std::max<long>(1, static_cast<long>(std::ceil(distance(a, b) / max_seg_len)));
    for (long k = 1; k < pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      out.push_back(apply(h, a + t * (b - a)));
    }
    out.push_back(apply(h, b));
  }
  return out;
}

std::vector<Point> ellipse_for_anchor(const Homography& h, Point center, double radius, int n_vertices) {
  if (n_vertices < 8) throw Error(ErrorCode::kInvalidArgument, "ellipse needs at least 8 vertices");
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ellipse radius must be positive");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n_vertices));
  for (int i = 0; i < n_vertices; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n_vertices;
    out.push_back(apply(h, {center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)}));
  }
  return out;
}

std::vector<Point> smooth_path(std::span<const Point> points) {
  if (points.size() < 2) throw Error(ErrorCode::kInvalidArgument, "path needs at least 2 points");
  const std::size_t n = points.size();
  auto control = [&](long i) -> Point {
    // Reflected phantom points at both ends.
    if (i < 0) return 2.0 * points[0] - points[1];
    if (i >= static_cast<long>(n)) return 2.0 * points[n - 1] - points[n - 2];
    return points[static_cast<std::size_t>(i)];
  };
  auto knot = [](Point a, Point b) {
    const double d = std::sqrt(distance(a, b));  // centripetal, alpha = 0.5
    return d > 1e-12 ? d : 1.0;
  };

  std::vector<Point> out;
  out.reserve((n - 1) * kSmoothSamplesPerSpan + 1);
  for (std::size_t span = 0; span + 1 < n; ++span) {
    const long i = static_cast<long>(span);
    const Point p0 = control(i - 1);
    const Point p1 = control(i);
    const Point p2 = control(i + 1);
    const Point p3 = control(i + 2);
    const double t0 = 0.0;
    const double t1 = t0 + knot(p0, p1);
    const double t2 = t1 + knot(p1, p2);
    const double t3 = t2 + knot(p2, p3);

    out.push_back(p1);
    for (int j = 1; j < kSmoothSamplesPerSpan; ++j) {
      const double t = t1 + (t2 - t1) * j / kSmoothSamplesPerSpan;
      // Barry-Goldman pyramidal evaluation.
      const Point a1 = ((t1 - t) / (t1 - t0)) * p0 + ((t - t0) / (t1 - t0)) * p1;
      const Point a2 = ((t2 - t) / (t2 - t1)) * p1 + ((t - t1) / (t2 - t1)) * p2;
      const Point a3 = ((t3 - t) / (t3 - t2)) * p2 + ((t - t2) / (t3 - t2)) * p3;
      const Point b1 = ((t2 - t) / (t2 - t0)) * a1 + ((t - t0) / (t2 - t0)) * a2;
      const Point b2 = ((t3 - t) / (t3 - t1)) * a2 + ((t - t1) / (t3 - t1)) * a3;
      out.push_back(((t2 - t) / (t2 - t1)) * b1 + ((t - t1) / (t2 - t1)) * b2);
    }
  }
  out.push_back(points[n - 1]);
  return out;
}

namespace {

double orient(Point a, Point b, Point c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point a, Point b, Point c, Point d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

bool is_simple_polygon(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (polygon[i] == polygon[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  // Zero area polygons (all collinear) are not usable zones either.
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    area2 += polygon[i].x * polygon[(i + 1) % n].y - polygon[(i + 1) % n].x * polygon[i].y;
  }
  return std::abs(area2) > 1e-12;
}

}  // namespace courtviz
