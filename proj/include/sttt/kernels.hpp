#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Low-level contiguous-array kernels. Scalar reference implementations are
// always present; an AVX2 variant is selected at runtime on x86-64 hosts
// that support it. Variants must agree with the scalar reference:
//   - elementwise kernels (add/sub/mul/scale/axpy/add_scaled): bitwise,
//     because both paths perform the same mul/add per element (no FMA,
//     built with -ffp-contract=off),
//   - reductions (dot/sum/sumsq): to rounding, since lane accumulators
//     change the summation order.
// Within one process the selected variant is fixed, so repeated runs are
// bitwise reproducible.

namespace sttt::kern {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

template <class T>
struct Table {
    T (*dot)(const T* x, const T* y, size_t n);
    void (*axpy)(T a, const T* x, T* y, size_t n);           // y += a*x
    void (*add)(const T* x, const T* y, T* z, size_t n);     // z = x + y
    void (*sub)(const T* x, const T* y, T* z, size_t n);     // z = x - y
    void (*mul)(const T* x, const T* y, T* z, size_t n);     // z = x .* y
    void (*scale)(T a, const T* x, T* z, size_t n);          // z = a*x
    void (*add_scaled)(const T* x, T a, const T* y, T* z, size_t n);  // z = x + a*y
    T (*sum)(const T* x, size_t n);
    T (*sumsq)(const T* x, size_t n);
};

template <class T>
const Table<T>& active();

Isa active_isa();
std::vector<Isa> available();

// Force a variant (throws ConfigError if unavailable). Used by tests and
// the STTT_KERNEL env var; default is the best available.
void select(Isa isa);

// Applies STTT_KERNEL={auto,scalar,avx2} once at startup.
void init_from_env();

// Direct access to a specific variant, for equivalence tests.
template <class T>
const Table<T>& table_for(Isa isa);

}  // namespace sttt::kern
