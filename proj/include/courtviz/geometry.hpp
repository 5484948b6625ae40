#pragma once

#include <array>
#include <span>
#include <vector>

namespace courtviz {

struct VideoMeta;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

double distance(Point a, Point b);

/// Planar projective transform, stored row-major and normalized so that the
/// bottom-right element is 1.
///
/// The ground matrix of a project maps normalized court-plane coordinates to
/// scene pixels. Ground effects are built in the court plane and mapped
/// through it, which gives them the foreshortening of the broadcast camera.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const std::array<double, 9>& row_major);

  static Homography identity() { return Homography(); }

  double operator()(int row, int col) const { return m_[static_cast<std::size_t>(row * 3 + col)]; }
  const std::array<double, 9>& values() const { return m_; }

  double determinant() const;
  bool invertible() const;

  friend bool operator==(const Homography&, const Homography&) = default;

 private:
  std::array<double, 9> m_;
};

/// Maps p through h. Throws Error(kDegenerate) when the projective
/// denominator is within 1e-9 of zero.
Point apply(const Homography& h, Point p);

/// Throws Error(kDegenerate) for singular matrices.
Homography inverse(const Homography& h);

/// Matrix product: apply(compose(a, b), p) == apply(a, apply(b, p)).
Homography compose(const Homography& a, const Homography& b);

/// Solves the 4-point correspondence src[i] -> dst[i].
Homography homography_from_points(const std::array<Point, 4>& src, const std::array<Point, 4>& dst);

/// Fixed broadcast-style ground matrix: the unit square maps onto an isoceles
/// trapezoid whose top edge spans 0.2W..0.8W at 0.55H and whose bottom edge is
/// the bottom of the frame.
Homography default_ground_homography(const VideoMeta& meta);
Homography default_ground_homography(int width, int height);

/// Length of the image of a unit step along the ground x axis at `ground`,
/// i.e. scene pixels per ground unit in the horizontal direction.
double horizontal_scale(const Homography& h, Point ground);

/// Subdivides every segment so no pre-image piece exceeds max_seg_len, then
/// maps each vertex through h.
std::vector<Point> project_polyline(const Homography& h, std::span<const Point> points, double max_seg_len);

/// Circle of `radius` around `center` (both in the domain of h), sampled at
/// n uniform angles and mapped through h. n must be at least 8.
std::vector<Point> ellipse_for_anchor(const Homography& h, Point center, double radius, int n_vertices);

inline constexpr int kSmoothSamplesPerSpan = 16;

/// Centripetal Catmull-Rom through all control points. The output contains
/// kSmoothSamplesPerSpan samples per span plus the final point, and every
/// control point appears verbatim.
std::vector<Point> smooth_path(std::span<const Point> points);

/// True when no two non-adjacent edges of the closed polygon intersect.
bool is_simple_polygon(std::span<const Point> polygon);

}  // namespace courtviz
