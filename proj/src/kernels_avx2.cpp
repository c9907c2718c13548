// AVX2 variants. Built with -mavx2 only (no FMA): elementwise kernels do
// mul-then-add exactly like the scalar reference, so they are bitwise
// identical to it. Reductions accumulate per lane and fold at the end.

#if defined(__AVX2__)

#include <immintrin.h>

#include "sttt/kernels.hpp"

namespace sttt::kern {

namespace {

// ---- float ----------------------------------------------------------------

inline float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehl_ps(lo, lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_shuffle_ps(lo, lo, 0x1);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
}

float dot_f32(const float* x, const float* y, size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_add_ps(acc0, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
        acc1 = _mm256_add_ps(acc1, _mm256_mul_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8)));
    }
    for (; i + 8 <= n; i += 8)
        acc0 = _mm256_add_ps(acc0, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    float r = hsum256(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

void axpy_f32(float a, const float* x, float* y, size_t n) {
    __m256 va = _mm256_set1_ps(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void add_f32(const float* x, const float* y, float* z, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(z + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) z[i] = x[i] + y[i];
}

void sub_f32(const float* x, const float* y, float* z, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(z + i, _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) z[i] = x[i] - y[i];
}

void mul_f32(const float* x, const float* y, float* z, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(z + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void scale_f32(float a, const float* x, float* z, size_t n) {
    __m256 va = _mm256_set1_ps(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(z + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) z[i] = a * x[i];
}

void add_scaled_f32(const float* x, float a, const float* y, float* z, size_t n) {
    __m256 va = _mm256_set1_ps(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(y + i));
        _mm256_storeu_ps(z + i, _mm256_add_ps(_mm256_loadu_ps(x + i), prod));
    }
    for (; i < n; ++i) z[i] = x[i] + a * y[i];
}

float sum_f32(const float* x, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    float r = hsum256(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

float sumsq_f32(const float* x, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(x + i);
        acc = _mm256_add_ps(acc, _mm256_mul_ps(v, v));
    }
    float r = hsum256(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

// ---- double ---------------------------------------------------------------

inline double hsum256d(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    lo = _mm_add_sd(lo, sh);
    return _mm_cvtsd_f64(lo);
}

double dot_f64(const double* x, const double* y, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    double r = hsum256d(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

void axpy_f64(double a, const double* x, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void add_f64(const double* x, const double* y, double* z, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] + y[i];
}

void sub_f64(const double* x, const double* y, double* z, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] - y[i];
}

void mul_f64(const double* x, const double* y, double* z, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void scale_f64(double a, const double* x, double* z, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(z + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) z[i] = a * x[i];
}

void add_scaled_f64(const double* x, double a, const double* y, double* z, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(z + i, _mm256_add_pd(_mm256_loadu_pd(x + i), prod));
    }
    for (; i < n; ++i) z[i] = x[i] + a * y[i];
}

double sum_f64(const double* x, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = hsum256d(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double sumsq_f64(const double* x, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
    }
    double r = hsum256d(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

}  // namespace

template <class T>
Table<T> avx2_table();

template <>
Table<float> avx2_table<float>() {
    Table<float> t;
    t.dot = dot_f32;
    t.axpy = axpy_f32;
    t.add = add_f32;
    t.sub = sub_f32;
    t.mul = mul_f32;
    t.scale = scale_f32;
    t.add_scaled = add_scaled_f32;
    t.sum = sum_f32;
    t.sumsq = sumsq_f32;
    return t;
}

template <>
Table<double> avx2_table<double>() {
    Table<double> t;
    t.dot = dot_f64;
    t.axpy = axpy_f64;
    t.add = add_f64;
    t.sub = sub_f64;
    t.mul = mul_f64;
    t.scale = scale_f64;
    t.add_scaled = add_scaled_f64;
    t.sum = sum_f64;
    t.sumsq = sumsq_f64;
    return t;
}

}  // namespace sttt::kern

#endif  // __AVX2__
