#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "mcmot/errors.hpp"

namespace mcmot::kernels {

namespace {

const KernelTable kScalar{Isa::scalar, detail::iou_one_to_many_scalar,
                          detail::gaussian_exponents_scalar,
                          detail::bhattacharyya_coefficient_scalar};

#if defined(MCMOT_HAVE_AVX2_KERNELS)
const KernelTable kAvx2{Isa::avx2, detail::iou_one_to_many_avx2,
                        detail::gaussian_exponents_avx2,
                        detail::bhattacharyya_coefficient_avx2};
#endif

const KernelTable* detect() {
    if (const char* env = std::getenv("MCMOT_KERNELS")) {
        if (std::string(env) == "scalar") return &kScalar;
    }
    if (const KernelTable* t = avx2_table()) return t;
    return &kScalar;
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(MCMOT_HAVE_AVX2_KERNELS)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

Isa active_isa() { return active().isa; }

void force_isa(Isa isa) {
    if (isa == Isa::scalar) {
        slot().store(&kScalar, std::memory_order_release);
        return;
    }
    const KernelTable* t = avx2_table();
    if (!t) throw ContractError("AVX2 kernels are not available on this host");
    slot().store(t, std::memory_order_release);
}

void BoxArray::clear() {
    left_.clear();
    top_.clear();
    right_.clear();
    bottom_.clear();
    area_.clear();
}

void BoxArray::reserve(std::size_t n) {
    left_.reserve(n);
    top_.reserve(n);
    right_.reserve(n);
    bottom_.reserve(n);
    area_.reserve(n);
}

void BoxArray::push_back(const BoundingBox& box) {
    left_.push_back(box.left);
    top_.push_back(box.top);
    right_.push_back(box.left + box.width);
    bottom_.push_back(box.top + box.height);
    area_.push_back(box.width * box.height);
}

void GaussianMeans::clear() {
    cx_.clear();
    cy_.clear();
    lw_.clear();
    lh_.clear();
}

void GaussianMeans::reserve(std::size_t n) {
    cx_.reserve(n);
    cy_.reserve(n);
    lw_.reserve(n);
    lh_.reserve(n);
}

void GaussianMeans::push_back(double cx, double cy, double log_w, double log_h) {
    cx_.push_back(cx);
    cy_.push_back(cy);
    lw_.push_back(log_w);
    lh_.push_back(log_h);
}

void iou_one_to_many(const BoundingBox& box, const BoxArray& boxes, std::span<double> out) {
    if (out.size() < boxes.size()) throw ContractError("iou_one_to_many: output too small");
    active().iou_one_to_many(box, boxes.left(), boxes.top(), boxes.right(), boxes.bottom(),
                             boxes.area(), boxes.size(), out.data());
}

void gaussian_exponents(const GaussianQuery& q, const GaussianMeans& means, std::span<double> out) {
    if (out.size() < means.size()) throw ContractError("gaussian_exponents: output too small");
    active().gaussian_exponents(q, means.cx(), means.cy(), means.log_w(), means.log_h(),
                                means.size(), out.data());
}

double bhattacharyya_coefficient(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ContractError("bhattacharyya_coefficient: length mismatch");
    return active().bhattacharyya_coefficient(p.data(), q.data(), p.size());
}

}  // namespace mcmot::kernels
