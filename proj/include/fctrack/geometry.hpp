#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Core>

#include "fctrack/error.hpp"

namespace fctrack {

/// Axis-aligned box in continuous pixel coordinates, stored as (left, top, width, height)
/// like MOT Challenge files. Extents are strictly positive.
class BoundingBox {
 public:
  BoundingBox(double left, double top, double width, double height)
      : left_(left), top_(top), width_(width), height_(height) {
    if (!std::isfinite(left) || !std::isfinite(top) || !std::isfinite(width) ||
        !std::isfinite(height)) {
      throw InputError("bounding box has non-finite coordinates");
    }
    if (width <= 0.0 || height <= 0.0) {
      throw InputError("bounding box must have positive width and height (got " +
                       std::to_string(width) + "x" + std::to_string(height) + ")");
    }
  }

  static BoundingBox from_center(double cx, double cy, double width, double height) {
    return BoundingBox(cx - width / 2.0, cy - height / 2.0, width, height);
  }

  double left() const { return left_; }
  double top() const { return top_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double right() const { return left_ + width_; }
  double bottom() const { return top_ + height_; }
  double center_x() const { return left_ + width_ / 2.0; }
  double center_y() const { return top_ + height_ / 2.0; }

  BoundingBox translated(double dx, double dy) const {
    return BoundingBox(left_ + dx, top_ + dy, width_, height_);
  }

  bool operator==(const BoundingBox&) const = default;

 private:
  double left_;
  double top_;
  double width_;
  double height_;
};

inline double area(const BoundingBox& b) { return b.width() * b.height(); }

namespace detail {

// Area measured between corners. Matches intersection_area() bit for bit when one box
// covers the other, which keeps ioa(b, b) and full containment at exactly 1.
inline double corner_area(const BoundingBox& b) {
  return (b.right() - b.left()) * (b.bottom() - b.top());
}

}  // namespace detail

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = detail::corner_area(a) + detail::corner_area(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Intersection over the area of `reference`. Directional: ioa(a, b) != ioa(b, a) in general.
inline double ioa(const BoundingBox& reference, const BoundingBox& other) {
  const double inter = intersection_area(reference, other);
  if (inter == 0.0) return 0.0;
  return std::clamp(inter / detail::corner_area(reference), 0.0, 1.0);
}

/// Row i, column j holds ioa(boxes[i], boxes[j]); row index is the reference box.
using IoAMatrix = Eigen::MatrixXd;

inline IoAMatrix pairwise_ioa_matrix(std::span<const BoundingBox> boxes) {
  const auto n = static_cast<Eigen::Index>(boxes.size());
  IoAMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = (i == j) ? 1.0 : ioa(boxes[i], boxes[j]);
    }
  }
  return m;
}

}  // namespace fctrack
