#include "sttt/kernels.hpp"

// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against.

namespace sttt::kern {

namespace {

template <class T>
T dot_scalar(const T* x, const T* y, size_t n) {
    T acc = T(0);
    for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

template <class T>
void axpy_scalar(T a, const T* x, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
void add_scalar(const T* x, const T* y, T* z, size_t n) {
    for (size_t i = 0; i < n; ++i) z[i] = x[i] + y[i];
}

template <class T>
void sub_scalar(const T* x, const T* y, T* z, size_t n) {
    for (size_t i = 0; i < n; ++i) z[i] = x[i] - y[i];
}

template <class T>
void mul_scalar(const T* x, const T* y, T* z, size_t n) {
    for (size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

template <class T>
void scale_scalar(T a, const T* x, T* z, size_t n) {
    for (size_t i = 0; i < n; ++i) z[i] = a * x[i];
}

template <class T>
void add_scaled_scalar(const T* x, T a, const T* y, T* z, size_t n) {
    for (size_t i = 0; i < n; ++i) z[i] = x[i] + a * y[i];
}

template <class T>
T sum_scalar(const T* x, size_t n) {
    T acc = T(0);
    for (size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

template <class T>
T sumsq_scalar(const T* x, size_t n) {
    T acc = T(0);
    for (size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

}  // namespace

template <class T>
Table<T> scalar_table() {
    Table<T> t;
    t.dot = dot_scalar<T>;
    t.axpy = axpy_scalar<T>;
    t.add = add_scalar<T>;
    t.sub = sub_scalar<T>;
    t.mul = mul_scalar<T>;
    t.scale = scale_scalar<T>;
    t.add_scaled = add_scaled_scalar<T>;
    t.sum = sum_scalar<T>;
    t.sumsq = sumsq_scalar<T>;
    return t;
}

template Table<float> scalar_table<float>();
template Table<double> scalar_table<double>();

}  // namespace sttt::kern
