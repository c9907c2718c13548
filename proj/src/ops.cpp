#include "sttt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sttt/kernels.hpp"

namespace sttt {

namespace {
int g_threads = 1;

template <class T>
void require_mat(const Tensor<T>& a, const char* op) {
    if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + shape_str(a.shape));
}
}  // namespace

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

void parallel_rows(int64_t n, void (*body)(int64_t, int64_t, void*), void* ctx) {
    int k = g_threads;
    if (k <= 1 || n < 4 * k) {
        body(0, n, ctx);
        return;
    }
    std::vector<std::thread> pool;
    int64_t chunk = (n + k - 1) / k;
    for (int t = 1; t < k; ++t) {
        int64_t lo = t * chunk, hi = std::min<int64_t>(n, lo + chunk);
        if (lo < hi) pool.emplace_back(body, lo, hi, ctx);
    }
    body(0, std::min<int64_t>(n, chunk), ctx);
    for (auto& th : pool) th.join();
}

// ---- dense contractions -----------------------------------------------------

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    require_mat(a, "matmul");
    require_mat(b, "matmul");
    const int64_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    if (b.shape[0] != k)
        throw ShapeError("matmul: inner extents differ: " + shape_str(a.shape) + " * " + shape_str(b.shape));
    Tensor<T> c({m, n});
    const auto& K = kern::active<T>();
    parallel_rows(m, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            T* ci = c.row(i);
            const T* ai = a.row(i);
            for (int64_t l = 0; l < k; ++l) K.axpy(ai[l], b.row(l), ci, static_cast<size_t>(n));
        }
    });
    flops::add(static_cast<uint64_t>(m) * k * n);
    check_finite(c, "matmul");
    return c;
}

template <class T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
    require_mat(a, "matmul_nt");
    require_mat(b, "matmul_nt");
    const int64_t m = a.shape[0], k = a.shape[1], n = b.shape[0];
    if (b.shape[1] != k)
        throw ShapeError("matmul_nt: inner extents differ: " + shape_str(a.shape) + " * " + shape_str(b.shape) + "^T");
    Tensor<T> c({m, n});
    const auto& K = kern::active<T>();
    parallel_rows(m, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            T* ci = c.row(i);
            const T* ai = a.row(i);
            for (int64_t j = 0; j < n; ++j) ci[j] = K.dot(ai, b.row(j), static_cast<size_t>(k));
        }
    });
    flops::add(static_cast<uint64_t>(m) * k * n);
    check_finite(c, "matmul_nt");
    return c;
}

template <class T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
    require_mat(a, "matmul_tn");
    require_mat(b, "matmul_tn");
    const int64_t k = a.shape[0], m = a.shape[1], n = b.shape[1];
    if (b.shape[0] != k)
        throw ShapeError("matmul_tn: inner extents differ: " + shape_str(a.shape) + "^T * " + shape_str(b.shape));
    Tensor<T> c({m, n});
    const auto& K = kern::active<T>();
    // c[i,:] = sum_l a[l,i] * b[l,:]; row-parallel over i would stride badly,
    // so accumulate serially over l with axpy into each output row.
    for (int64_t l = 0; l < k; ++l) {
        const T* al = a.row(l);
        const T* bl = b.row(l);
        for (int64_t i = 0; i < m; ++i) K.axpy(al[i], bl, c.row(i), static_cast<size_t>(n));
    }
    flops::add(static_cast<uint64_t>(m) * k * n);
    check_finite(c, "matmul_tn");
    return c;
}

// ---- elementwise / structural ----------------------------------------------

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
    require_mat(a, "transpose");
    Tensor<T> c({a.shape[1], a.shape[0]});
    for (int64_t i = 0; i < a.shape[0]; ++i)
        for (int64_t j = 0; j < a.shape[1]; ++j) c.at(j, i) = a.at(i, j);
    return c;
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeError("add: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor<T> c(a.shape);
    kern::active<T>().add(a.data(), b.data(), c.data(), a.v.size());
    check_finite(c, "add");
    return c;
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeError("sub: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor<T> c(a.shape);
    kern::active<T>().sub(a.data(), b.data(), c.data(), a.v.size());
    check_finite(c, "sub");
    return c;
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeError("mul: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor<T> c(a.shape);
    kern::active<T>().mul(a.data(), b.data(), c.data(), a.v.size());
    check_finite(c, "mul");
    return c;
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T alpha) {
    Tensor<T> c(a.shape);
    kern::active<T>().scale(alpha, a.data(), c.data(), a.v.size());
    check_finite(c, "scale");
    return c;
}

template <class T>
Tensor<T> add_scaled(const Tensor<T>& a, T alpha, const Tensor<T>& b) {
    if (!a.same_shape(b))
        throw ShapeError("add_scaled: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor<T> c(a.shape);
    kern::active<T>().add_scaled(a.data(), alpha, b.data(), c.data(), a.v.size());
    check_finite(c, "add_scaled");
    return c;
}

template <class T>
Tensor<T> silu(const Tensor<T>& a) {
    Tensor<T> c(a.shape);
    for (size_t i = 0; i < a.v.size(); ++i) {
        T x = a.v[i];
        T s = T(1) / (T(1) + std::exp(-x));
        c.v[i] = x * s;
    }
    check_finite(c, "silu");
    return c;
}

template <class T>
Tensor<T> silu_prime(const Tensor<T>& a) {
    Tensor<T> c(a.shape);
    for (size_t i = 0; i < a.v.size(); ++i) {
        T x = a.v[i];
        T s = T(1) / (T(1) + std::exp(-x));
        c.v[i] = s * (T(1) + x * (T(1) - s));
    }
    check_finite(c, "silu_prime");
    return c;
}

template <class T>
Tensor<T> sqrt_all(const Tensor<T>& a) {
    Tensor<T> c(a.shape);
    for (size_t i = 0; i < a.v.size(); ++i) c.v[i] = std::sqrt(a.v[i]);
    check_finite(c, "sqrt_all");
    return c;
}

template <class T>
Tensor<T> mul_rowvec(const Tensor<T>& a, const Tensor<T>& v) {
    require_mat(a, "mul_rowvec");
    if (v.rank() != 1 || v.shape[0] != a.shape[1]) throw ShapeError("mul_rowvec: vector length != columns");
    Tensor<T> c(a.shape);
    const auto& K = kern::active<T>();
    for (int64_t i = 0; i < a.shape[0]; ++i)
        K.mul(a.row(i), v.data(), c.row(i), static_cast<size_t>(a.shape[1]));
    check_finite(c, "mul_rowvec");
    return c;
}

template <class T>
Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& v) {
    require_mat(a, "add_rowvec");
    if (v.rank() != 1 || v.shape[0] != a.shape[1]) throw ShapeError("add_rowvec: vector length != columns");
    Tensor<T> c(a.shape);
    const auto& K = kern::active<T>();
    for (int64_t i = 0; i < a.shape[0]; ++i)
        K.add(a.row(i), v.data(), c.row(i), static_cast<size_t>(a.shape[1]));
    check_finite(c, "add_rowvec");
    return c;
}

template <class T>
Tensor<T> div_by_scalar(const Tensor<T>& a, const Tensor<T>& s) {
    if (s.numel() != 1) throw ShapeError("div_by_scalar: scalar tensor expected");
    if (s.v[0] == T(0)) throw NumericError("div_by_scalar: division by zero");
    return scale(a, T(1) / s.v[0]);
}

template <class T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: empty input");
    int64_t cols = parts[0].shape.size() == 2 ? parts[0].shape[1] : -1;
    int64_t rows = 0;
    for (const auto& p : parts) {
        if (p.rank() != 2 || p.shape[1] != cols) throw ShapeError("concat_rows: column mismatch");
        rows += p.shape[0];
    }
    Tensor<T> c({rows, cols});
    int64_t r = 0;
    for (const auto& p : parts) {
        std::copy(p.v.begin(), p.v.end(), c.v.begin() + r * cols);
        r += p.shape[0];
    }
    return c;
}

template <class T>
Tensor<T> slice_rows(const Tensor<T>& a, int64_t r0, int64_t r1) {
    require_mat(a, "slice_rows");
    if (r0 < 0 || r1 < r0 || r1 > a.shape[0]) throw ShapeError("slice_rows: range out of bounds");
    Tensor<T> c({r1 - r0, a.shape[1]});
    std::copy(a.v.begin() + r0 * a.shape[1], a.v.begin() + r1 * a.shape[1], c.v.begin());
    return c;
}

template <class T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<int64_t>& ids) {
    require_mat(table, "gather_rows");
    Tensor<T> c({static_cast<int64_t>(ids.size()), table.shape[1]});
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= table.shape[0]) throw ShapeError("gather_rows: id out of range");
        std::copy(table.row(ids[i]), table.row(ids[i]) + table.shape[1], c.row(static_cast<int64_t>(i)));
    }
    return c;
}

// ---- reductions ---------------------------------------------------------------

template <class T>
Tensor<T> row_norms(const Tensor<T>& a) {
    require_mat(a, "row_norms");
    Tensor<T> c({a.shape[0]});
    const auto& K = kern::active<T>();
    for (int64_t i = 0; i < a.shape[0]; ++i)
        c.v[static_cast<size_t>(i)] = std::sqrt(K.sumsq(a.row(i), static_cast<size_t>(a.shape[1])));
    check_finite(c, "row_norms");
    return c;
}

template <class T>
Tensor<T> sum_all(const Tensor<T>& a) {
    Tensor<T> c({1});
    c.v[0] = kern::active<T>().sum(a.data(), a.v.size());
    check_finite(c, "sum_all");
    return c;
}

template <class T>
Tensor<T> sumsq_all(const Tensor<T>& a) {
    Tensor<T> c({1});
    c.v[0] = kern::active<T>().sumsq(a.data(), a.v.size());
    check_finite(c, "sumsq_all");
    return c;
}

template <class T>
Tensor<T> mean_all(const Tensor<T>& a) {
    if (a.numel() == 0) throw ShapeError("mean_all: empty tensor");
    Tensor<T> c({1});
    c.v[0] = kern::active<T>().sum(a.data(), a.v.size()) / static_cast<T>(a.numel());
    check_finite(c, "mean_all");
    return c;
}

// ---- fused primitives -----------------------------------------------------------

template <class T>
Tensor<T> softmax_rows(const Tensor<T>& s, const BoolMat& mask) {
    require_mat(s, "softmax_rows");
    if (mask.rows != s.shape[0] || mask.cols != s.shape[1])
        throw ShapeError("softmax_rows: mask shape mismatch");
    Tensor<T> p(s.shape);
    const int64_t n = s.shape[0], m = s.shape[1];
    for (int64_t i = 0; i < n; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (int64_t j = 0; j < m; ++j)
            if (mask.at(i, j)) mx = std::max(mx, s.at(i, j));
        if (!std::isfinite(static_cast<double>(mx)))
            throw ShapeError("softmax_rows: fully masked row " + std::to_string(i));
        T denom = T(0);
        for (int64_t j = 0; j < m; ++j) {
            T e = mask.at(i, j) ? std::exp(s.at(i, j) - mx) : T(0);
            p.at(i, j) = e;
            denom += e;
        }
        for (int64_t j = 0; j < m; ++j) p.at(i, j) /= denom;
    }
    check_finite(p, "softmax_rows");
    return p;
}

template <class T>
Tensor<T> l2_normalize_rows(const Tensor<T>& m, const Tensor<T>& magnitudes) {
    require_mat(m, "l2_normalize_rows");
    if (magnitudes.rank() != 1 || magnitudes.shape[0] != m.shape[0])
        throw ShapeError("l2_normalize_rows: magnitudes length != rows");
    const auto& K = kern::active<T>();
    Tensor<T> c(m.shape);
    for (int64_t i = 0; i < m.shape[0]; ++i) {
        T mag = magnitudes.v[static_cast<size_t>(i)];
        if (!(mag > T(0))) throw NumericError("l2_normalize_rows: nonpositive target magnitude");
        T nrm = std::sqrt(K.sumsq(m.row(i), static_cast<size_t>(m.shape[1])));
        if (nrm == T(0)) throw NumericError("l2_normalize_rows: zero-norm row " + std::to_string(i));
        K.scale(mag / nrm, m.row(i), c.row(i), static_cast<size_t>(m.shape[1]));
    }
    check_finite(c, "l2_normalize_rows");
    return c;
}

template <class T>
Tensor<T> rms_norm(const Tensor<T>& x, const Tensor<T>& gain) {
    require_mat(x, "rms_norm");
    if (gain.rank() != 1 || gain.shape[0] != x.shape[1]) throw ShapeError("rms_norm: gain length != columns");
    const auto& K = kern::active<T>();
    const T eps = static_cast<T>(1e-6);
    Tensor<T> c(x.shape);
    const int64_t d = x.shape[1];
    for (int64_t i = 0; i < x.shape[0]; ++i) {
        T ms = K.sumsq(x.row(i), static_cast<size_t>(d)) / static_cast<T>(d);
        T inv = T(1) / std::sqrt(ms + eps);
        for (int64_t j = 0; j < d; ++j) c.at(i, j) = x.at(i, j) * inv * gain.v[static_cast<size_t>(j)];
    }
    check_finite(c, "rms_norm");
    return c;
}

template <class T>
Tensor<T> rope(const Tensor<T>& x, const std::vector<int64_t>& positions, int heads, double base) {
    require_mat(x, "rope");
    if (static_cast<int64_t>(positions.size()) != x.shape[0]) throw ShapeError("rope: positions length != rows");
    const int64_t d = x.shape[1];
    if (heads <= 0 || d % heads) throw ShapeError("rope: head count does not divide width");
    const int64_t hd = d / heads;
    if (hd % 2) throw ShapeError("rope: head width must be even");
    Tensor<T> c(x.shape);
    for (int64_t i = 0; i < x.shape[0]; ++i) {
        double pos = static_cast<double>(positions[static_cast<size_t>(i)]);
        for (int h = 0; h < heads; ++h) {
            const int64_t off = h * hd;
            for (int64_t p = 0; p < hd / 2; ++p) {
                double theta = std::pow(base, -2.0 * static_cast<double>(p) / static_cast<double>(hd));
                double ang = pos * theta;
                T cs = static_cast<T>(std::cos(ang)), sn = static_cast<T>(std::sin(ang));
                T a = x.at(i, off + 2 * p), b = x.at(i, off + 2 * p + 1);
                c.at(i, off + 2 * p) = a * cs - b * sn;
                c.at(i, off + 2 * p + 1) = a * sn + b * cs;
            }
        }
    }
    check_finite(c, "rope");
    return c;
}

namespace {

// Visibility range of query i: key indices [lo, hi) in ascending k_pos order.
inline void visible_range(const std::vector<int64_t>& k_pos, int64_t qp, int64_t window, int64_t& lo,
                          int64_t& hi) {
    const auto begin = k_pos.begin(), end = k_pos.end();
    hi = std::upper_bound(begin, end, qp) - begin;
    lo = window > 0 ? std::lower_bound(begin, end, qp - window + 1) - begin : 0;
}

}  // namespace

template <class T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, int heads,
                    const std::vector<int64_t>& q_pos, const std::vector<int64_t>& k_pos,
                    int64_t window) {
    require_mat(q, "attention");
    require_mat(k, "attention");
    require_mat(v, "attention");
    const int64_t nq = q.shape[0], nk = k.shape[0], d = q.shape[1];
    if (k.shape[1] != d || v.shape[1] != d || v.shape[0] != nk) throw ShapeError("attention: shape mismatch");
    if (heads <= 0 || d % heads) throw ShapeError("attention: head count does not divide width");
    if (window < 0) throw ShapeError("attention: negative window");
    if (static_cast<int64_t>(q_pos.size()) != nq || static_cast<int64_t>(k_pos.size()) != nk)
        throw ShapeError("attention: position lengths");
    const int64_t hd = d / heads;
    const T inv_scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
    Tensor<T> out({nq, d});
    uint64_t macs = 0;
    const auto& K = kern::active<T>();
    std::vector<T> sc;
    for (int64_t i = 0; i < nq; ++i) {
        int64_t lo, hi;
        visible_range(k_pos, q_pos[static_cast<size_t>(i)], window, lo, hi);
        if (lo >= hi) throw ShapeError("attention: no visible key for query row " + std::to_string(i));
        sc.resize(static_cast<size_t>(hi - lo));
        for (int h = 0; h < heads; ++h) {
            const int64_t off = h * hd;
            const T* qi = q.row(i) + off;
            T mx = -std::numeric_limits<T>::infinity();
            for (int64_t j = lo; j < hi; ++j) {
                T s = K.dot(qi, k.row(j) + off, static_cast<size_t>(hd)) * inv_scale;
                sc[static_cast<size_t>(j - lo)] = s;
                mx = std::max(mx, s);
            }
            T denom = T(0);
            for (int64_t j = lo; j < hi; ++j) {
                T e = std::exp(sc[static_cast<size_t>(j - lo)] - mx);
                sc[static_cast<size_t>(j - lo)] = e;
                denom += e;
            }
            T* oi = out.row(i) + off;
            for (int64_t j = lo; j < hi; ++j)
                K.axpy(sc[static_cast<size_t>(j - lo)] / denom, v.row(j) + off, oi, static_cast<size_t>(hd));
        }
        macs += static_cast<uint64_t>(hi - lo) * static_cast<uint64_t>(d) * 2;
    }
    {
        flops::Scope scope(FlopCategory::attention);
        flops::add(macs);
    }
    check_finite(out, "attention");
    return out;
}

template <class T>
void attention_backward(const Tensor<T>& dout, const Tensor<T>& q, const Tensor<T>& k,
                        const Tensor<T>& v, int heads, const std::vector<int64_t>& q_pos,
                        const std::vector<int64_t>& k_pos, int64_t window, Tensor<T>& dq,
                        Tensor<T>& dk, Tensor<T>& dv) {
    const int64_t nq = q.shape[0], d = q.shape[1];
    const int64_t hd = d / heads;
    const T inv_scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
    dq = Tensor<T>(q.shape);
    dk = Tensor<T>(k.shape);
    dv = Tensor<T>(v.shape);
    const auto& K = kern::active<T>();
    uint64_t macs = 0;
    std::vector<T> p, dp;
    for (int64_t i = 0; i < nq; ++i) {
        int64_t lo, hi;
        visible_range(k_pos, q_pos[static_cast<size_t>(i)], window, lo, hi);
        const size_t L = static_cast<size_t>(hi - lo);
        p.resize(L);
        dp.resize(L);
        for (int h = 0; h < heads; ++h) {
            const int64_t off = h * hd;
            const T* qi = q.row(i) + off;
            const T* doi = dout.row(i) + off;
            T mx = -std::numeric_limits<T>::infinity();
            for (int64_t j = lo; j < hi; ++j) {
                T s = K.dot(qi, k.row(j) + off, static_cast<size_t>(hd)) * inv_scale;
                p[static_cast<size_t>(j - lo)] = s;
                mx = std::max(mx, s);
            }
            T denom = T(0);
            for (size_t j = 0; j < L; ++j) {
                p[j] = std::exp(p[j] - mx);
                denom += p[j];
            }
            T dot_pd = T(0);
            for (int64_t j = lo; j < hi; ++j) {
                p[static_cast<size_t>(j - lo)] /= denom;
                dp[static_cast<size_t>(j - lo)] = K.dot(doi, v.row(j) + off, static_cast<size_t>(hd));
                dot_pd += p[static_cast<size_t>(j - lo)] * dp[static_cast<size_t>(j - lo)];
            }
            T* dqi = dq.row(i) + off;
            for (int64_t j = lo; j < hi; ++j) {
                const size_t jj = static_cast<size_t>(j - lo);
                T ds = p[jj] * (dp[jj] - dot_pd) * inv_scale;
                K.axpy(ds, k.row(j) + off, dqi, static_cast<size_t>(hd));
                K.axpy(ds, qi, dk.row(j) + off, static_cast<size_t>(hd));
                K.axpy(p[jj], doi, dv.row(j) + off, static_cast<size_t>(hd));
            }
        }
        macs += static_cast<uint64_t>(hi - lo) * static_cast<uint64_t>(d) * 4;
    }
    {
        flops::Scope scope(FlopCategory::attention);
        flops::add(macs);
    }
    check_finite(dq, "attention_backward");
    check_finite(dk, "attention_backward");
    check_finite(dv, "attention_backward");
}

template <class T>
Tensor<T> cross_entropy_rows(const Tensor<T>& logits, const std::vector<int64_t>& targets,
                             const std::vector<uint8_t>& loss_mask) {
    require_mat(logits, "cross_entropy_rows");
    const int64_t n = logits.shape[0], vsz = logits.shape[1];
    if (static_cast<int64_t>(targets.size()) != n || static_cast<int64_t>(loss_mask.size()) != n)
        throw ShapeError("cross_entropy_rows: length mismatch");
    double total = 0.0;
    int64_t count = 0;
    for (int64_t i = 0; i < n; ++i) {
        if (!loss_mask[static_cast<size_t>(i)]) continue;
        int64_t t = targets[static_cast<size_t>(i)];
        if (t < 0 || t >= vsz) throw ShapeError("cross_entropy_rows: target id out of range");
        T mx = logits.at(i, 0);
        for (int64_t j = 1; j < vsz; ++j) mx = std::max(mx, logits.at(i, j));
        double denom = 0.0;
        for (int64_t j = 0; j < vsz; ++j) denom += std::exp(static_cast<double>(logits.at(i, j) - mx));
        total += std::log(denom) + static_cast<double>(mx) - static_cast<double>(logits.at(i, t));
        ++count;
    }
    if (count == 0) throw ShapeError("cross_entropy_rows: no row selected by loss mask");
    Tensor<T> c({1});
    c.v[0] = static_cast<T>(total / static_cast<double>(count));
    check_finite(c, "cross_entropy_rows");
    return c;
}

namespace {
template <class T>
std::vector<int64_t> argmax_rows_impl(const Tensor<T>& logits) {
    std::vector<int64_t> out(static_cast<size_t>(logits.shape[0]));
    for (int64_t i = 0; i < logits.shape[0]; ++i) {
        int64_t best = 0;
        for (int64_t j = 1; j < logits.shape[1]; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        out[static_cast<size_t>(i)] = best;
    }
    return out;
}
}  // namespace

std::vector<int64_t> argmax_rows_of(const Tensor<float>& logits) { return argmax_rows_impl(logits); }
std::vector<int64_t> argmax_rows_of(const Tensor<double>& logits) { return argmax_rows_impl(logits); }

template <class T>
T frob_norm(const Tensor<T>& a) {
    return std::sqrt(kern::active<T>().sumsq(a.data(), a.v.size()));
}

// ---- explicit instantiations ----------------------------------------------------

#define STTT_INSTANTIATE_OPS(T)                                                                        \
    template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                 \
    template Tensor<T> matmul_nt<T>(const Tensor<T>&, const Tensor<T>&);                              \
    template Tensor<T> matmul_tn<T>(const Tensor<T>&, const Tensor<T>&);                              \
    template Tensor<T> transpose<T>(const Tensor<T>&);                                                \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                    \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                                    \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                    \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                                 \
    template Tensor<T> add_scaled<T>(const Tensor<T>&, T, const Tensor<T>&);                          \
    template Tensor<T> silu<T>(const Tensor<T>&);                                                     \
    template Tensor<T> silu_prime<T>(const Tensor<T>&);                                               \
    template Tensor<T> sqrt_all<T>(const Tensor<T>&);                                                 \
    template Tensor<T> mul_rowvec<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> add_rowvec<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> div_by_scalar<T>(const Tensor<T>&, const Tensor<T>&);                          \
    template Tensor<T> concat_rows<T>(const std::vector<Tensor<T>>&);                                 \
    template Tensor<T> slice_rows<T>(const Tensor<T>&, int64_t, int64_t);                             \
    template Tensor<T> gather_rows<T>(const Tensor<T>&, const std::vector<int64_t>&);                 \
    template Tensor<T> row_norms<T>(const Tensor<T>&);                                                \
    template Tensor<T> sum_all<T>(const Tensor<T>&);                                                  \
    template Tensor<T> sumsq_all<T>(const Tensor<T>&);                                                \
    template Tensor<T> mean_all<T>(const Tensor<T>&);                                                 \
    template Tensor<T> softmax_rows<T>(const Tensor<T>&, const BoolMat&);                             \
    template Tensor<T> l2_normalize_rows<T>(const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> rms_norm<T>(const Tensor<T>&, const Tensor<T>&);                               \
    template Tensor<T> rope<T>(const Tensor<T>&, const std::vector<int64_t>&, int, double);           \
    template Tensor<T> attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,        \
                                    const std::vector<int64_t>&, const std::vector<int64_t>&,         \
                                    int64_t);                                                         \
    template void attention_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                        const Tensor<T>&, int, const std::vector<int64_t>&,           \
                                        const std::vector<int64_t>&, int64_t, Tensor<T>&, Tensor<T>&, \
                                        Tensor<T>&);                                                  \
    template Tensor<T> cross_entropy_rows<T>(const Tensor<T>&, const std::vector<int64_t>&,           \
                                             const std::vector<uint8_t>&);                            \
    template T frob_norm<T>(const Tensor<T>&);

STTT_INSTANTIATE_OPS(float)
STTT_INSTANTIATE_OPS(double)

}  // namespace sttt
