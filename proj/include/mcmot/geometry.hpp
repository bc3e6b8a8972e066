#pragma once

#include <cmath>

namespace mcmot {

/// Axis-aligned box in pixel coordinates (top-left corner plus extent).
struct BoundingBox {
    double left = 0.0;
    double top = 0.0;
    double width = 1.0;
    double height = 1.0;

    static BoundingBox from_center(double cx, double cy, double w, double h) {
        return {cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    double right() const { return left + width; }
    double bottom() const { return top + height; }
    double center_x() const { return left + 0.5 * width; }
    double center_y() const { return top + 0.5 * height; }
    double area() const { return width * height; }
    double diagonal() const { return std::hypot(width, height); }

    bool valid() const {
        return std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
               std::isfinite(height) && width > 0.0 && height > 0.0;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union. Evaluated with the same operation order as the
/// batched kernels so scalar and vector paths agree bitwise.
double iou(const BoundingBox& a, const BoundingBox& b);

double center_distance(const BoundingBox& a, const BoundingBox& b);

}  // namespace mcmot
