#pragma once

#include <cstddef>
#include <string_view>

namespace cbf::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Rectangle problem in Genz's separation-of-variables form. `chol` is the
/// row-major lower Cholesky factor of the (already reordered) covariance;
/// limits are centred at the mean and may be +/-infinity.
struct GenzProblem {
    int dim = 0;
    const double* chol = nullptr;
    const double* lower = nullptr;
    const double* upper = nullptr;
};

/// Evaluates the Genz integrand at `count` points of [0,1]^(dim-1).
/// `points` is structure-of-arrays: coordinate k of point i is
/// points[k * count + i]. `scale` (may be null) multiplies the limits per
/// point, which is how the Student t mixing variable enters.
using GenzIntegrandFn = void (*)(const GenzProblem& problem, const double* points,
                                 const double* scale, std::size_t count, double* out);

/// Counts points x (SoA, `cols` coordinates each) with A x > rhs on every row.
/// `a` is row-major rows x cols. When `hit` is non-null it receives a 0/1 flag
/// per point.
using CountSatisfiedFn = std::size_t (*)(const double* a, int rows, int cols, const double* rhs,
                                         const double* points, std::size_t count, unsigned char* hit);

struct KernelTable {
    Isa isa;
    GenzIntegrandFn genz_integrand;
    CountSatisfiedFn count_satisfied;
};

bool isa_available(Isa isa) noexcept;

/// Kernels for an explicit instruction set (must be available).
const KernelTable& kernels(Isa isa);

/// Kernels chosen at first use: AVX2 when the CPU supports it, unless the
/// environment variable CBF_SIMD=scalar forces the reference path.
const KernelTable& kernels();

namespace detail {
void genz_integrand_scalar(const GenzProblem&, const double*, const double*, std::size_t, double*);
std::size_t count_satisfied_scalar(const double*, int, int, const double*, const double*,
                                   std::size_t, unsigned char*);
#if defined(CBF_HAVE_AVX2)
void genz_integrand_avx2(const GenzProblem&, const double*, const double*, std::size_t, double*);
std::size_t count_satisfied_avx2(const double*, int, int, const double*, const double*,
                                 std::size_t, unsigned char*);
#endif
} // namespace detail

} // namespace cbf::simd
