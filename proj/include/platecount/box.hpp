#pragma once

// Axis-aligned box geometry. Boxes are (x, y, w, h) with (x, y) the top-left
// corner in pixel coordinates, the convention used by AGAR and COCO.

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "platecount/error.hpp"

namespace platecount {

template <typename Scalar>
struct Box {
  Scalar x{};
  Scalar y{};
  Scalar w{};
  Scalar h{};

  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }
  Scalar area() const { return w * h; }

  Eigen::Matrix<Scalar, 2, 1> origin() const { return {x, y}; }
  Eigen::Matrix<Scalar, 2, 1> center() const { return {x + w / 2, y + h / 2}; }

  template <typename Other>
  Box<Other> cast() const {
    return {static_cast<Other>(x), static_cast<Other>(y), static_cast<Other>(w),
            static_cast<Other>(h)};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

using BBox = Box<double>;

template <typename Scalar>
bool is_valid(const Box<Scalar>& b) {
  return std::isfinite(static_cast<double>(b.x)) && std::isfinite(static_cast<double>(b.y)) &&
         b.w > 0 && b.h > 0;
}

/// Overlap of two boxes; zero width/height when they do not intersect.
template <typename Scalar>
Box<Scalar> intersection(const Box<Scalar>& a, const Box<Scalar>& b) {
  const Scalar x0 = std::max(a.x, b.x);
  const Scalar y0 = std::max(a.y, b.y);
  const Scalar x1 = std::min(a.right(), b.right());
  const Scalar y1 = std::min(a.bottom(), b.bottom());
  return {x0, y0, std::max(Scalar(0), x1 - x0), std::max(Scalar(0), y1 - y0)};
}

template <typename Scalar>
Scalar intersection_area(const Box<Scalar>& a, const Box<Scalar>& b) {
  return intersection(a, b).area();
}

/// Intersection over union using continuous area.
template <typename Scalar>
Scalar iou(const Box<Scalar>& a, const Box<Scalar>& b) {
  if (a == b) return Scalar(1);
  const Scalar inter = intersection_area(a, b);
  if (inter <= 0) return Scalar(0);
  const Scalar uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

/// True when `inner` lies entirely inside `outer` (edges may touch).
template <typename Scalar>
bool contains(const Box<Scalar>& outer, const Box<Scalar>& inner) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.right() <= outer.right() &&
         inner.bottom() <= outer.bottom();
}

/// x' = s*x + offset.x, w' = s*w (same for y/h).
template <typename Scalar, typename Derived>
Box<Scalar> transform_box(const Box<Scalar>& b, Scalar scale,
                          const Eigen::MatrixBase<Derived>& offset) {
  if (!(scale > 0)) throw Error(ErrorCode::NonPositiveScale, "scale must be positive");
  const Eigen::Matrix<Scalar, 2, 1> o = scale * b.origin() + offset.template cast<Scalar>();
  return {o.x(), o.y(), scale * b.w, scale * b.h};
}

}  // namespace platecount
