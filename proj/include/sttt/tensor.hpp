#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "sttt/common.hpp"

namespace sttt {

// Dense row-major tensor, rank <= 5. Values are treated as immutable once an
// operation has returned the tensor; ops allocate fresh outputs.
template <class T>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
        check_rank();
        v.assign(static_cast<size_t>(numel_of(shape)), T(0));
    }
    Tensor(std::vector<int64_t> s, std::vector<T> data) : shape(std::move(s)), v(std::move(data)) {
        check_rank();
        if (numel_of(shape) != static_cast<int64_t>(v.size()))
            throw ShapeError("tensor: shape product does not match value count");
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t e : s) {
            if (e < 0) throw ShapeError("tensor: negative extent");
            n *= e;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(v.size()); }
    int rank() const { return static_cast<int>(shape.size()); }

    int64_t rows() const { return shape.size() >= 1 ? shape[0] : 1; }
    int64_t cols() const {
        if (shape.size() < 2) throw ShapeError("tensor: cols() on rank<2");
        return shape[1];
    }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& at(int64_t i, int64_t j) { return v[static_cast<size_t>(i * shape[1] + j)]; }
    T at(int64_t i, int64_t j) const { return v[static_cast<size_t>(i * shape[1] + j)]; }

    T* row(int64_t i) { return v.data() + i * shape[1]; }
    const T* row(int64_t i) const { return v.data() + i * shape[1]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int64_t> s, T value) {
        Tensor t(std::move(s));
        for (auto& x : t.v) x = value;
        return t;
    }
    static Tensor identity(int64_t n) {
        Tensor t({n, n});
        for (int64_t i = 0; i < n; ++i) t.at(i, i) = T(1);
        return t;
    }
    static Tensor randn(std::vector<int64_t> s, Rng& rng, double stddev = 1.0) {
        Tensor t(std::move(s));
        for (auto& x : t.v) x = static_cast<T>(rng.normal(0.0, stddev));
        return t;
    }

private:
    void check_rank() const {
        if (shape.size() > 5) throw ShapeError("tensor: rank > 5");
    }
};

std::string shape_str(const std::vector<int64_t>& s);

// Raises NumericError if any element is NaN/Inf. Every public operation in
// the engine runs its result through this.
template <class T>
void check_finite(const Tensor<T>& t, const char* op) {
    for (const T& x : t.v) {
        if (!std::isfinite(static_cast<double>(x)))
            throw NumericError(std::string(op) + ": non-finite value in result");
    }
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace sttt
