#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace mcmot::kernels::detail {

void iou_one_to_many_scalar(const BoundingBox& box, const double* left, const double* top,
                            const double* right, const double* bottom, const double* area,
                            std::size_t n, double* out) {
    const double bl = box.left;
    const double bt = box.top;
    const double br = box.left + box.width;
    const double bb = box.top + box.height;
    const double ba = box.width * box.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double ix = std::max(0.0, std::min(br, right[i]) - std::max(bl, left[i]));
        const double iy = std::max(0.0, std::min(bb, bottom[i]) - std::max(bt, top[i]));
        const double inter = ix * iy;
        out[i] = inter / (ba + area[i] - inter);
    }
}

void gaussian_exponents_scalar(const GaussianQuery& q, const double* cx, const double* cy,
                               const double* lw, const double* lh, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = q.cx - cx[i];
        const double dy = q.cy - cy[i];
        const double dw = q.log_w - lw[i];
        const double dh = q.log_h - lh[i];
        const double pos = (dx * dx + dy * dy) * q.inv_var_pos;
        const double size = (dw * dw + dh * dh) * q.inv_var_size;
        out[i] = -0.5 * (pos + size);
    }
}

double bhattacharyya_coefficient_scalar(const double* p, const double* q, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += std::sqrt(p[i] * q[i]);
    }
    return sum;
}

}  // namespace mcmot::kernels::detail
