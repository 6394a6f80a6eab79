#include <doctest.h>

#include <random>
#include <vector>

#include "nsmax/rng.hpp"
#include "nsmax/simd/kernels.hpp"

using namespace nsmax;

TEST_CASE("SIMD variants match the scalar reference") {
    const auto* avx = simd::avx2_table();
    if (!avx) {
        MESSAGE("AVX2 unavailable; equivalence test skipped");
        return;
    }
    const auto& sc = simd::scalar_table();
    Engine rng(42);
    std::normal_distribution<double> nd(0.0, 100.0);
    std::uniform_real_distribution<double> un(0.0, 2.0);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 257u, 1000u}) {
        std::vector<double> a(n), b(n), w(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = nd(rng);
            b[i] = nd(rng);
            w[i] = un(rng);
            z[i] = un(rng);
        }
        const double m[4] = {0.3, -0.2, 0.7, 1.1};
        std::vector<double> o1(n), o2(n);
        sc.aniso_norms(a.data(), b.data(), n, m, o1.data());
        avx->aniso_norms(a.data(), b.data(), n, m, o2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-14));

        const double s1 = sc.abs_diff_sum(a.data(), b.data(), n);
        const double s2 = avx->abs_diff_sum(a.data(), b.data(), n);
        CHECK(s2 == doctest::Approx(s1).epsilon(1e-13));

        std::size_t nx1 = 0, nx2 = 0;
        CHECK(sc.count_joint_exceed(a.data(), b.data(), n, 10.0, -5.0, &nx1) ==
              avx->count_joint_exceed(a.data(), b.data(), n, 10.0, -5.0, &nx2));
        CHECK(nx1 == nx2);

        for (double scale : {0.1, 0.9, 1.0, 3.0}) {
            CHECK(sc.any_reaches(scale, w.data(), z.data(), n) == avx->any_reaches(scale, w.data(), z.data(), n));
            auto z1 = z, z2 = z;
            sc.max_scaled_update(scale, w.data(), z1.data(), n);
            avx->max_scaled_update(scale, w.data(), z2.data(), n);
            CHECK(z1 == z2);
        }
    }
}

TEST_CASE("dispatch can be forced to the scalar table and back") {
    const auto before = simd::active().isa;
    CHECK(simd::select(simd::Isa::Scalar));
    CHECK(simd::active().isa == simd::Isa::Scalar);
    if (simd::avx2_table()) {
        CHECK(simd::select(simd::Isa::Avx2));
        CHECK(simd::active().isa == simd::Isa::Avx2);
    } else {
        CHECK_FALSE(simd::select(simd::Isa::Avx2));
    }
    simd::select(before);
}
