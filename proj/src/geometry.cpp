#include "mcmot/geometry.hpp"

#include <algorithm>

namespace mcmot {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ar = a.left + a.width;
    const double ab = a.top + a.height;
    const double br = b.left + b.width;
    const double bb = b.top + b.height;
    const double ix = std::max(0.0, std::min(ar, br) - std::max(a.left, b.left));
    const double iy = std::max(0.0, std::min(ab, bb) - std::max(a.top, b.top));
    const double inter = ix * iy;
    const double uni = a.width * a.height + b.width * b.height - inter;
    return inter / uni;
}

double center_distance(const BoundingBox& a, const BoundingBox& b) {
    return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

}  // namespace mcmot
