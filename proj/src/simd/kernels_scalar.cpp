#include <cmath>

#include "nsmax/simd/kernels.hpp"

namespace nsmax::simd {
namespace {

void aniso_norms_scalar(const double* dx, const double* dy, std::size_t n, const double* a, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double u = a[0] * dx[i] + a[1] * dy[i];
        const double v = a[2] * dx[i] + a[3] * dy[i];
        out[i] = std::sqrt(u * u + v * v);
    }
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s;
}

std::size_t count_joint_exceed_scalar(const double* x, const double* y, std::size_t n, double ux, double uy,
                                      std::size_t* n_x) {
    std::size_t cx = 0, both = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ex = x[i] > ux;
        cx += ex;
        both += ex && y[i] > uy;
    }
    if (n_x) *n_x = cx;
    return both;
}

bool any_reaches_scalar(double scale, const double* w, const double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (scale * w[i] >= z[i]) return true;
    return false;
}

void max_scaled_update_scalar(double scale, const double* w, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = scale * w[i];
        if (v > z[i]) z[i] = v;
    }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar,           "scalar",
                               aniso_norms_scalar,    abs_diff_sum_scalar,
                               count_joint_exceed_scalar, any_reaches_scalar,
                               max_scaled_update_scalar};
}

}  // namespace nsmax::simd
