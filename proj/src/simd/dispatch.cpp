#include <cstdlib>
#include <string>

#include "cbf/error.hpp"
#include "cbf/simd/kernels.hpp"

namespace cbf::simd {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(CBF_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

namespace {

const KernelTable kScalarTable{Isa::Scalar, &detail::genz_integrand_scalar,
                               &detail::count_satisfied_scalar};
#if defined(CBF_HAVE_AVX2)
const KernelTable kAvx2Table{Isa::Avx2, &detail::genz_integrand_avx2,
                             &detail::count_satisfied_avx2};
#endif

const KernelTable& select_default() {
    const char* env = std::getenv("CBF_SIMD");
    if (env && std::string(env) == "scalar") return kScalarTable;
#if defined(CBF_HAVE_AVX2)
    if (isa_available(Isa::Avx2)) return kAvx2Table;
#endif
    return kScalarTable;
}

} // namespace

const KernelTable& kernels(Isa isa) {
    if (!isa_available(isa)) {
        fail(Errc::InvalidConfig, std::string("instruction set not available: ") +
                                      std::string(to_string(isa)));
    }
#if defined(CBF_HAVE_AVX2)
    if (isa == Isa::Avx2) return kAvx2Table;
#endif
    return kScalarTable;
}

const KernelTable& kernels() {
    static const KernelTable& table = select_default();
    return table;
}

} // namespace cbf::simd
