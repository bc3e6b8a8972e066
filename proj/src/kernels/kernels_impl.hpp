#pragma once

#include "mcmot/kernels.hpp"

namespace mcmot::kernels::detail {

void iou_one_to_many_scalar(const BoundingBox& box, const double* left, const double* top,
                            const double* right, const double* bottom, const double* area,
                            std::size_t n, double* out);
void gaussian_exponents_scalar(const GaussianQuery& q, const double* cx, const double* cy,
                               const double* lw, const double* lh, std::size_t n, double* out);
double bhattacharyya_coefficient_scalar(const double* p, const double* q, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
#define MCMOT_HAVE_AVX2_KERNELS 1
void iou_one_to_many_avx2(const BoundingBox& box, const double* left, const double* top,
                          const double* right, const double* bottom, const double* area,
                          std::size_t n, double* out);
void gaussian_exponents_avx2(const GaussianQuery& q, const double* cx, const double* cy,
                             const double* lw, const double* lh, std::size_t n, double* out);
double bhattacharyya_coefficient_avx2(const double* p, const double* q, std::size_t n);
#endif

}  // namespace mcmot::kernels::detail
