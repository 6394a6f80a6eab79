// Compiled with -mavx2 -mfma; only reached after the CPUID check in dispatch.cpp.
#include <immintrin.h>

#include <bit>
#include <cmath>

#include "nsmax/simd/kernels.hpp"

namespace nsmax::simd {
namespace {

void aniso_norms_avx2(const double* dx, const double* dy, std::size_t n, const double* a, double* out) {
    const __m256d a0 = _mm256_set1_pd(a[0]);
    const __m256d a1 = _mm256_set1_pd(a[1]);
    const __m256d a2 = _mm256_set1_pd(a[2]);
    const __m256d a3 = _mm256_set1_pd(a[3]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(dx + i);
        const __m256d y = _mm256_loadu_pd(dy + i);
        const __m256d u = _mm256_fmadd_pd(a0, x, _mm256_mul_pd(a1, y));
        const __m256d v = _mm256_fmadd_pd(a2, x, _mm256_mul_pd(a3, y));
        const __m256d s = _mm256_fmadd_pd(u, u, _mm256_mul_pd(v, v));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(s));
    }
    for (; i < n; ++i) {
        const double u = a[0] * dx[i] + a[1] * dy[i];
        const double v = a[2] * dx[i] + a[3] * dy[i];
        out[i] = std::sqrt(u * u + v * v);
    }
}

double abs_diff_sum_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d0));
        acc1 = _mm256_add_pd(acc1, _mm256_andnot_pd(sign, d1));
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d0));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s;
}

std::size_t count_joint_exceed_avx2(const double* x, const double* y, std::size_t n, double ux, double uy,
                                    std::size_t* n_x) {
    const __m256d vx = _mm256_set1_pd(ux);
    const __m256d vy = _mm256_set1_pd(uy);
    std::size_t cx = 0, both = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ex = _mm256_cmp_pd(_mm256_loadu_pd(x + i), vx, _CMP_GT_OQ);
        const __m256d ey = _mm256_cmp_pd(_mm256_loadu_pd(y + i), vy, _CMP_GT_OQ);
        cx += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(ex))));
        both += static_cast<std::size_t>(
            std::popcount(static_cast<unsigned>(_mm256_movemask_pd(_mm256_and_pd(ex, ey)))));
    }
    for (; i < n; ++i) {
        const bool ex = x[i] > ux;
        cx += ex;
        both += ex && y[i] > uy;
    }
    if (n_x) *n_x = cx;
    return both;
}

bool any_reaches_avx2(double scale, const double* w, const double* z, std::size_t n) {
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_mul_pd(s, _mm256_loadu_pd(w + i));
        if (_mm256_movemask_pd(_mm256_cmp_pd(v, _mm256_loadu_pd(z + i), _CMP_GE_OQ))) return true;
    }
    for (; i < n; ++i)
        if (scale * w[i] >= z[i]) return true;
    return false;
}

void max_scaled_update_avx2(double scale, const double* w, double* z, std::size_t n) {
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_mul_pd(s, _mm256_loadu_pd(w + i));
        const __m256d cur = _mm256_loadu_pd(z + i);
        // max(cur, v) keeps cur on ties and when v is NaN, matching the scalar branch.
        _mm256_storeu_pd(z + i, _mm256_blendv_pd(cur, v, _mm256_cmp_pd(v, cur, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) {
        const double v = scale * w[i];
        if (v > z[i]) z[i] = v;
    }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2,           "avx2",
                             aniso_norms_avx2,    abs_diff_sum_avx2,
                             count_joint_exceed_avx2, any_reaches_avx2,
                             max_scaled_update_avx2};
}

}  // namespace nsmax::simd
