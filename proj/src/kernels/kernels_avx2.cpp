#include "kernels_impl.hpp"

#if defined(MCMOT_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// No "fma" in the target list: contracting mul+add would break bitwise
// agreement with the scalar reference.
#define MCMOT_AVX2 __attribute__((target("avx2")))

namespace mcmot::kernels::detail {

MCMOT_AVX2
void iou_one_to_many_avx2(const BoundingBox& box, const double* left, const double* top,
                          const double* right, const double* bottom, const double* area,
                          std::size_t n, double* out) {
    const double bl = box.left;
    const double bt = box.top;
    const double br = box.left + box.width;
    const double bb = box.top + box.height;
    const double ba = box.width * box.height;

    const __m256d vbl = _mm256_set1_pd(bl);
    const __m256d vbt = _mm256_set1_pd(bt);
    const __m256d vbr = _mm256_set1_pd(br);
    const __m256d vbb = _mm256_set1_pd(bb);
    const __m256d vba = _mm256_set1_pd(ba);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d l = _mm256_loadu_pd(left + i);
        const __m256d t = _mm256_loadu_pd(top + i);
        const __m256d r = _mm256_loadu_pd(right + i);
        const __m256d b = _mm256_loadu_pd(bottom + i);
        const __m256d a = _mm256_loadu_pd(area + i);
        const __m256d ix = _mm256_max_pd(
            zero, _mm256_sub_pd(_mm256_min_pd(vbr, r), _mm256_max_pd(vbl, l)));
        const __m256d iy = _mm256_max_pd(
            zero, _mm256_sub_pd(_mm256_min_pd(vbb, b), _mm256_max_pd(vbt, t)));
        const __m256d inter = _mm256_mul_pd(ix, iy);
        const __m256d uni = _mm256_sub_pd(_mm256_add_pd(vba, a), inter);
        _mm256_storeu_pd(out + i, _mm256_div_pd(inter, uni));
    }
    for (; i < n; ++i) {
        const double ix = std::max(0.0, std::min(br, right[i]) - std::max(bl, left[i]));
        const double iy = std::max(0.0, std::min(bb, bottom[i]) - std::max(bt, top[i]));
        const double inter = ix * iy;
        out[i] = inter / (ba + area[i] - inter);
    }
}

MCMOT_AVX2
void gaussian_exponents_avx2(const GaussianQuery& q, const double* cx, const double* cy,
                             const double* lw, const double* lh, std::size_t n, double* out) {
    const __m256d qx = _mm256_set1_pd(q.cx);
    const __m256d qy = _mm256_set1_pd(q.cy);
    const __m256d qw = _mm256_set1_pd(q.log_w);
    const __m256d qh = _mm256_set1_pd(q.log_h);
    const __m256d ivp = _mm256_set1_pd(q.inv_var_pos);
    const __m256d ivs = _mm256_set1_pd(q.inv_var_size);
    const __m256d half = _mm256_set1_pd(-0.5);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(qx, _mm256_loadu_pd(cx + i));
        const __m256d dy = _mm256_sub_pd(qy, _mm256_loadu_pd(cy + i));
        const __m256d dw = _mm256_sub_pd(qw, _mm256_loadu_pd(lw + i));
        const __m256d dh = _mm256_sub_pd(qh, _mm256_loadu_pd(lh + i));
        const __m256d pos =
            _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), ivp);
        const __m256d size =
            _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(dw, dw), _mm256_mul_pd(dh, dh)), ivs);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(half, _mm256_add_pd(pos, size)));
    }
    for (; i < n; ++i) {
        const double dx = q.cx - cx[i];
        const double dy = q.cy - cy[i];
        const double dw = q.log_w - lw[i];
        const double dh = q.log_h - lh[i];
        const double pos = (dx * dx + dy * dy) * q.inv_var_pos;
        const double size = (dw * dw + dh * dh) * q.inv_var_size;
        out[i] = -0.5 * (pos + size);
    }
}

MCMOT_AVX2
double bhattacharyya_coefficient_avx2(const double* p, const double* q, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(q + i));
        acc = _mm256_add_pd(acc, _mm256_sqrt_pd(prod));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        sum += std::sqrt(p[i] * q[i]);
    }
    return sum;
}

}  // namespace mcmot::kernels::detail

#endif
