#pragma once

// Data-parallel inner loops used by the likelihood and proposal code.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2 variant
// compiled through function-level target attributes. The active table is
// picked once at first use from CPUID; MCMOT_KERNELS=scalar forces the
// reference path. IoU and Gaussian-exponent kernels are lane-wise and agree
// bitwise with the reference; the histogram coefficient is a reduction and
// agrees to rounding.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mcmot/geometry.hpp"

namespace mcmot::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Structure-of-arrays box storage fed to the batched IoU kernel.
class BoxArray {
public:
    void clear();
    void reserve(std::size_t n);
    void push_back(const BoundingBox& box);
    std::size_t size() const { return left_.size(); }
    bool empty() const { return left_.empty(); }

    const double* left() const { return left_.data(); }
    const double* top() const { return top_.data(); }
    const double* right() const { return right_.data(); }
    const double* bottom() const { return bottom_.data(); }
    const double* area() const { return area_.data(); }

private:
    std::vector<double> left_, top_, right_, bottom_, area_;
};

/// Means of N axis-aligned Gaussians over (cx, cy, log w, log h).
class GaussianMeans {
public:
    void clear();
    void reserve(std::size_t n);
    void push_back(double cx, double cy, double log_w, double log_h);
    std::size_t size() const { return cx_.size(); }
    bool empty() const { return cx_.empty(); }

    const double* cx() const { return cx_.data(); }
    const double* cy() const { return cy_.data(); }
    const double* log_w() const { return lw_.data(); }
    const double* log_h() const { return lh_.data(); }

private:
    std::vector<double> cx_, cy_, lw_, lh_;
};

/// Point at which Gaussian exponents are evaluated, plus inverse variances.
struct GaussianQuery {
    double cx = 0.0;
    double cy = 0.0;
    double log_w = 0.0;
    double log_h = 0.0;
    double inv_var_pos = 1.0;
    double inv_var_size = 1.0;
};

struct KernelTable {
    Isa isa;
    void (*iou_one_to_many)(const BoundingBox& box, const double* left, const double* top,
                            const double* right, const double* bottom, const double* area,
                            std::size_t n, double* out);
    // out[i] = -0.5 * ((dx^2 + dy^2) * inv_var_pos + (dlw^2 + dlh^2) * inv_var_size)
    void (*gaussian_exponents)(const GaussianQuery& q, const double* cx, const double* cy,
                               const double* lw, const double* lh, std::size_t n, double* out);
    double (*bhattacharyya_coefficient)(const double* p, const double* q, std::size_t n);
};

const KernelTable& scalar_table();

/// AVX2 table, or nullptr when not compiled in or unsupported by this CPU.
const KernelTable* avx2_table();

const KernelTable& active();
Isa active_isa();

/// Overrides the dispatch decision. Intended for tests and benchmarks.
void force_isa(Isa isa);

void iou_one_to_many(const BoundingBox& box, const BoxArray& boxes, std::span<double> out);
void gaussian_exponents(const GaussianQuery& q, const GaussianMeans& means, std::span<double> out);
double bhattacharyya_coefficient(std::span<const double> p, std::span<const double> q);

}  // namespace mcmot::kernels
