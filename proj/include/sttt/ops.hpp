#pragma once

#include <cstdint>
#include <vector>

#include "sttt/flops.hpp"
#include "sttt/tensor.hpp"

// Raw (untracked) tensor operations. These define the numeric semantics; the
// graph layer in graph.hpp records the same operations for reverse-mode
// differentiation and calls back into these for the actual arithmetic.
//
// Every function validates shapes, books MACs for dense contractions into
// the current FlopCategory scope, and checks results for NaN/Inf.

namespace sttt {

// Boolean matrix used by masked softmax.
struct BoolMat {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<uint8_t> m;

    BoolMat() = default;
    BoolMat(int64_t r, int64_t c, uint8_t fill = 0) : rows(r), cols(c), m(static_cast<size_t>(r * c), fill) {}
    uint8_t at(int64_t i, int64_t j) const { return m[static_cast<size_t>(i * cols + j)]; }
    void set(int64_t i, int64_t j, bool v) { m[static_cast<size_t>(i * cols + j)] = v ? 1 : 0; }
};

// Number of execution threads for row-parallel loops (1 = serial). Results
// are independent of the setting: each output row is produced wholly by one
// thread running the same kernel.
void set_threads(int n);
int threads();
void parallel_rows(int64_t n, void (*body)(int64_t, int64_t, void*), void* ctx);

template <class F>
void parallel_rows(int64_t n, F&& f) {
    struct Ctx {
        F* f;
    } ctx{&f};
    parallel_rows(
        n, [](int64_t lo, int64_t hi, void* c) { (*static_cast<Ctx*>(c)->f)(lo, hi); }, &ctx);
}

// ---- dense contractions (book MACs) ----------------------------------------

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);  // a(m,k) * b(k,n)
template <class T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);  // a(m,k) * b(n,k)^T
template <class T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b);  // a(k,m)^T * b(k,n)

// ---- elementwise / structural (no MACs) ------------------------------------

template <class T>
Tensor<T> transpose(const Tensor<T>& a);
template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T>
Tensor<T> scale(const Tensor<T>& a, T alpha);
template <class T>
Tensor<T> add_scaled(const Tensor<T>& a, T alpha, const Tensor<T>& b);  // a + alpha*b
template <class T>
Tensor<T> silu(const Tensor<T>& a);
template <class T>
Tensor<T> silu_prime(const Tensor<T>& a);
template <class T>
Tensor<T> sqrt_all(const Tensor<T>& a);
template <class T>
Tensor<T> mul_rowvec(const Tensor<T>& a, const Tensor<T>& v);  // each row of a ⊙ v
template <class T>
Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& v);
template <class T>
Tensor<T> div_by_scalar(const Tensor<T>& a, const Tensor<T>& s);  // s: shape {1}
template <class T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts);
template <class T>
Tensor<T> slice_rows(const Tensor<T>& a, int64_t r0, int64_t r1);  // rows [r0, r1)
template <class T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<int64_t>& ids);

// ---- reductions -------------------------------------------------------------

template <class T>
Tensor<T> row_norms(const Tensor<T>& a);  // {rows}: L2 norm of each row
template <class T>
Tensor<T> sum_all(const Tensor<T>& a);    // {1}
template <class T>
Tensor<T> sumsq_all(const Tensor<T>& a);  // {1}
template <class T>
Tensor<T> mean_all(const Tensor<T>& a);   // {1}

// ---- fused primitives --------------------------------------------------------

// Row softmax with boolean mask; masked entries get exactly zero weight.
// Stabilized by row-max subtraction. Errors on a fully masked row.
template <class T>
Tensor<T> softmax_rows(const Tensor<T>& s, const BoolMat& mask);

// Rescales each row to the target magnitude, preserving direction.
// Errors on a zero-norm row.
template <class T>
Tensor<T> l2_normalize_rows(const Tensor<T>& m, const Tensor<T>& magnitudes);

template <class T>
Tensor<T> rms_norm(const Tensor<T>& x, const Tensor<T>& gain);

// Rotary position encoding per head, pairwise rotation of (2i, 2i+1) lanes.
template <class T>
Tensor<T> rope(const Tensor<T>& x, const std::vector<int64_t>& positions, int heads, double base);

// Multi-head causal attention. Key j is visible to query i iff
// k_pos[j] <= q_pos[i] and (window == 0 or q_pos[i] - k_pos[j] < window).
// k_pos must be ascending. Books 2 * sum(visible) * head_dim MACs per head.
template <class T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, int heads,
                    const std::vector<int64_t>& q_pos, const std::vector<int64_t>& k_pos,
                    int64_t window);

// Backward of attention; same visibility rule, recomputes the row softmax.
template <class T>
void attention_backward(const Tensor<T>& dout, const Tensor<T>& q, const Tensor<T>& k,
                        const Tensor<T>& v, int heads, const std::vector<int64_t>& q_pos,
                        const std::vector<int64_t>& k_pos, int64_t window, Tensor<T>& dq,
                        Tensor<T>& dk, Tensor<T>& dv);

// Mean next-token cross entropy over rows where loss_mask is set.
template <class T>
Tensor<T> cross_entropy_rows(const Tensor<T>& logits, const std::vector<int64_t>& targets,
                             const std::vector<uint8_t>& loss_mask);

std::vector<int64_t> argmax_rows_of(const Tensor<float>& logits);
std::vector<int64_t> argmax_rows_of(const Tensor<double>& logits);

// Frobenius norm as a plain value.
template <class T>
T frob_norm(const Tensor<T>& a);

// Access the underlying value of either a Tensor or a Var (generic helpers).
template <class T>
inline const Tensor<T>& value_of(const Tensor<T>& t) {
    return t;
}

}  // namespace sttt
