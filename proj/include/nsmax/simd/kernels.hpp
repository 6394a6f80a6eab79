#pragma once

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
// The variant is chosen once at first use from CPUID; set NSMAX_SIMD=scalar
// in the environment to force the reference path.

#include <cstddef>
#include <span>

namespace nsmax::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    // out[i] = || A (dx[i], dy[i]) || for the row-major 2x2 matrix a.
    void (*aniso_norms)(const double* dx, const double* dy, std::size_t n, const double* a, double* out);
    // sum_i |a[i] - b[i]|
    double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);
    // #{i : x[i] > ux and y[i] > uy}; *n_x receives #{i : x[i] > ux}.
    std::size_t (*count_joint_exceed)(const double* x, const double* y, std::size_t n, double ux, double uy,
                                      std::size_t* n_x);
    // true if scale * w[i] >= z[i] for some i.
    bool (*any_reaches)(double scale, const double* w, const double* z, std::size_t n);
    // z[i] = max(z[i], scale * w[i])
    void (*max_scaled_update)(double scale, const double* w, double* z, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

const KernelTable& active() noexcept;
// Returns false (and keeps the current table) if the ISA is unavailable.
bool select(Isa isa) noexcept;

inline void aniso_norms(std::span<const double> dx, std::span<const double> dy, const double (&a)[4],
                        std::span<double> out) {
    active().aniso_norms(dx.data(), dy.data(), dx.size(), a, out.data());
}

inline double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
    return active().abs_diff_sum(a.data(), b.data(), a.size());
}

inline bool any_reaches(double scale, std::span<const double> w, std::span<const double> z) {
    return active().any_reaches(scale, w.data(), z.data(), z.size());
}

inline void max_scaled_update(double scale, std::span<const double> w, std::span<double> z) {
    active().max_scaled_update(scale, w.data(), z.data(), z.size());
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(NSMAX_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace nsmax::simd
