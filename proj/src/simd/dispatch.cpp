#include <atomic>
#include <cstdlib>
#include <string_view>

#include "nsmax/simd/kernels.hpp"

namespace nsmax::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(NSMAX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept {
    const char* env = std::getenv("NSMAX_SIMD");
    if (env && std::string_view(env) == "scalar") return &detail::kScalarTable;
    if (const auto* t = avx2_table()) return t;
    return &detail::kScalarTable;
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_table() noexcept {
#if defined(NSMAX_HAVE_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &detail::kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept {
    const KernelTable* t = isa == Isa::Scalar ? &detail::kScalarTable : avx2_table();
    if (!t) return false;
    current().store(t, std::memory_order_release);
    return true;
}

}  // namespace nsmax::simd
