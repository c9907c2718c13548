#include "sttt/graph.hpp"

#include <cmath>
#include <memory>

namespace sttt {

namespace {

template <class T>
Tensor<T> silu_second(const Tensor<T>& a) {
    Tensor<T> c(a.shape);
    for (size_t i = 0; i < a.v.size(); ++i) {
        T x = a.v[i];
        T s = T(1) / (T(1) + std::exp(-x));
        c.v[i] = s * (T(1) - s) * (T(2) + x * (T(1) - T(2) * s));
    }
    return c;
}

template <class T>
Tensor<T> colsum_of_product(const Tensor<T>& a, const Tensor<T>& b) {
    Tensor<T> out({a.shape[1]});
    for (int64_t i = 0; i < a.shape[0]; ++i)
        for (int64_t j = 0; j < a.shape[1]; ++j) out.v[static_cast<size_t>(j)] += a.at(i, j) * b.at(i, j);
    return out;
}

}  // namespace

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    auto out = sttt::matmul(a.val(), b.val());
    int32_t ai = a.id, bi = b.id;
    return g.push(std::move(out), [ai, bi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        gg.accum(ai, sttt::matmul_nt(d, gg.val(bi)));
        gg.accum(bi, sttt::matmul_tn(gg.val(ai), d));
    });
}

template <class T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    auto out = sttt::matmul_nt(a.val(), b.val());
    int32_t ai = a.id, bi = b.id;
    return g.push(std::move(out), [ai, bi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        gg.accum(ai, sttt::matmul(d, gg.val(bi)));
        gg.accum(bi, sttt::matmul_tn(d, gg.val(ai)));
    });
}

template <class T>
Var<T> matmul_tn(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    auto out = sttt::matmul_tn(a.val(), b.val());
    int32_t ai = a.id, bi = b.id;
    return g.push(std::move(out), [ai, bi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        gg.accum(ai, sttt::matmul_nt(gg.val(bi), d));
        gg.accum(bi, sttt::matmul(gg.val(ai), d));
    });
}

template <class T>
Var<T> transpose(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::transpose(a.val()), [ai](Graph<T>& gg, int32_t self) {
        gg.accum(ai, sttt::transpose(gg.grad(self)));
    });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, bi = b.id;
    return g.push(sttt::add(a.val(), b.val()), [ai, bi](Graph<T>& gg, int32_t self) {
        gg.accum(ai, gg.grad(self));
        gg.accum(bi, gg.grad(self));
    });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, bi = b.id;
    return g.push(sttt::sub(a.val(), b.val()), [ai, bi](Graph<T>& gg, int32_t self) {
        gg.accum(ai, gg.grad(self));
        gg.accum(bi, sttt::scale(gg.grad(self), T(-1)));
    });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, bi = b.id;
    return g.push(sttt::mul(a.val(), b.val()), [ai, bi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        gg.accum(ai, sttt::mul(d, gg.val(bi)));
        gg.accum(bi, sttt::mul(d, gg.val(ai)));
    });
}

template <class T>
Var<T> scale(Var<T> a, T alpha) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::scale(a.val(), alpha), [ai, alpha](Graph<T>& gg, int32_t self) {
        gg.accum(ai, sttt::scale(gg.grad(self), alpha));
    });
}

template <class T>
Var<T> add_scaled(Var<T> a, T alpha, Var<T> b) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, bi = b.id;
    return g.push(sttt::add_scaled(a.val(), alpha, b.val()), [ai, bi, alpha](Graph<T>& gg, int32_t self) {
        gg.accum(ai, gg.grad(self));
        gg.accum(bi, sttt::scale(gg.grad(self), alpha));
    });
}

template <class T>
Var<T> silu(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::silu(a.val()), [ai](Graph<T>& gg, int32_t self) {
        gg.accum(ai, sttt::mul(gg.grad(self), sttt::silu_prime(gg.val(ai))));
    });
}

template <class T>
Var<T> silu_prime(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::silu_prime(a.val()), [ai](Graph<T>& gg, int32_t self) {
        gg.accum(ai, sttt::mul(gg.grad(self), silu_second(gg.val(ai))));
    });
}

template <class T>
Var<T> sqrt_all(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::sqrt_all(a.val()), [ai](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        const Tensor<T>& y = gg.val(self);
        Tensor<T> da(d.shape);
        for (size_t i = 0; i < d.v.size(); ++i) da.v[i] = d.v[i] * T(0.5) / y.v[i];
        check_finite(da, "sqrt_all backward");
        gg.accum(ai, da);
    });
}

template <class T>
Var<T> mul_rowvec(Var<T> a, Var<T> v) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, vi = v.id;
    return g.push(sttt::mul_rowvec(a.val(), v.val()), [ai, vi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        gg.accum(ai, sttt::mul_rowvec(d, gg.val(vi)));
        gg.accum(vi, colsum_of_product(d, gg.val(ai)));
    });
}

template <class T>
Var<T> add_rowvec(Var<T> a, Var<T> v) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, vi = v.id;
    return g.push(sttt::add_rowvec(a.val(), v.val()), [ai, vi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        gg.accum(ai, d);
        Tensor<T> dv({d.shape[1]});
        for (int64_t i = 0; i < d.shape[0]; ++i)
            kern::active<T>().add(dv.data(), d.row(i), dv.data(), static_cast<size_t>(d.shape[1]));
        gg.accum(vi, dv);
    });
}

template <class T>
Var<T> div_by_scalar(Var<T> a, Var<T> s) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id, si = s.id;
    return g.push(sttt::div_by_scalar(a.val(), s.val()), [ai, si](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        T sv = gg.val(si).v[0];
        gg.accum(ai, sttt::scale(d, T(1) / sv));
        Tensor<T> ds({1});
        // d/ds (a/s) = -a/s^2 = -c/s
        const Tensor<T>& c = gg.val(self);
        T acc = T(0);
        for (size_t i = 0; i < d.v.size(); ++i) acc += d.v[i] * c.v[i];
        ds.v[0] = -acc / sv;
        gg.accum(si, ds);
    });
}

template <class T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: empty input");
    Graph<T>& g = *parts[0].g;
    std::vector<Tensor<T>> vals;
    auto ids = std::make_shared<std::vector<int32_t>>();
    vals.reserve(parts.size());
    for (const auto& p : parts) {
        vals.push_back(p.val());
        ids->push_back(p.id);
    }
    return g.push(sttt::concat_rows(vals), [ids](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        int64_t r = 0;
        for (int32_t id : *ids) {
            int64_t rows = gg.val(id).shape[0];
            gg.accum(id, sttt::slice_rows(d, r, r + rows));
            r += rows;
        }
    });
}

template <class T>
Var<T> slice_rows(Var<T> a, int64_t r0, int64_t r1) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::slice_rows(a.val(), r0, r1), [ai, r0, r1](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        Tensor<T> da(gg.val(ai).shape);
        std::copy(d.v.begin(), d.v.end(), da.v.begin() + r0 * da.shape[1]);
        (void)r1;
        gg.accum(ai, da);
    });
}

template <class T>
Var<T> gather_rows(Var<T> table, const std::vector<int64_t>& ids) {
    Graph<T>& g = *table.g;
    int32_t ti = table.id;
    auto idc = std::make_shared<std::vector<int64_t>>(ids);
    return g.push(sttt::gather_rows(table.val(), ids), [ti, idc](Graph<T>& gg, int32_t self) {
        const Tensor<T>& d = gg.grad(self);
        Tensor<T> dt(gg.val(ti).shape);
        for (size_t i = 0; i < idc->size(); ++i)
            kern::active<T>().add(dt.row((*idc)[i]), d.row(static_cast<int64_t>(i)), dt.row((*idc)[i]),
                                  static_cast<size_t>(dt.shape[1]));
        gg.accum(ti, dt);
    });
}

template <class T>
Var<T> row_norms(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::row_norms(a.val()), [ai](Graph<T>& gg, int32_t self) {
        const Tensor<T>& x = gg.val(ai);
        const Tensor<T>& nrm = gg.val(self);
        const Tensor<T>& d = gg.grad(self);
        Tensor<T> dx(x.shape);
        for (int64_t i = 0; i < x.shape[0]; ++i) {
            T c = d.v[static_cast<size_t>(i)] / nrm.v[static_cast<size_t>(i)];
            kern::active<T>().scale(c, x.row(i), dx.row(i), static_cast<size_t>(x.shape[1]));
        }
        check_finite(dx, "row_norms backward");
        gg.accum(ai, dx);
    });
}

template <class T>
Var<T> sum_all(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::sum_all(a.val()), [ai](Graph<T>& gg, int32_t self) {
        gg.accum(ai, Tensor<T>::full(gg.val(ai).shape, gg.grad(self).v[0]));
    });
}

template <class T>
Var<T> sumsq_all(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::sumsq_all(a.val()), [ai](Graph<T>& gg, int32_t self) {
        gg.accum(ai, sttt::scale(gg.val(ai), T(2) * gg.grad(self).v[0]));
    });
}

template <class T>
Var<T> mean_all(Var<T> a) {
    Graph<T>& g = *a.g;
    int32_t ai = a.id;
    return g.push(sttt::mean_all(a.val()), [ai](Graph<T>& gg, int32_t self) {
        T s = gg.grad(self).v[0] / static_cast<T>(gg.val(ai).numel());
        gg.accum(ai, Tensor<T>::full(gg.val(ai).shape, s));
    });
}

template <class T>
Var<T> softmax_rows(Var<T> s, const BoolMat& mask) {
    Graph<T>& g = *s.g;
    int32_t si = s.id;
    return g.push(sttt::softmax_rows(s.val(), mask), [si](Graph<T>& gg, int32_t self) {
        const Tensor<T>& p = gg.val(self);
        const Tensor<T>& d = gg.grad(self);
        Tensor<T> ds(p.shape);
        for (int64_t i = 0; i < p.shape[0]; ++i) {
            T dot = kern::active<T>().dot(d.row(i), p.row(i), static_cast<size_t>(p.shape[1]));
            for (int64_t j = 0; j < p.shape[1]; ++j) ds.at(i, j) = p.at(i, j) * (d.at(i, j) - dot);
        }
        gg.accum(si, ds);
    });
}

template <class T>
Var<T> l2_normalize_rows(Var<T> m, Var<T> magnitudes) {
    Graph<T>& g = *m.g;
    int32_t mi = m.id, gi = magnitudes.id;
    return g.push(sttt::l2_normalize_rows(m.val(), magnitudes.val()), [mi, gi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& x = gg.val(mi);
        const Tensor<T>& mags = gg.val(gi);
        const Tensor<T>& d = gg.grad(self);
        const auto& K = kern::active<T>();
        const int64_t cols = x.shape[1];
        Tensor<T> dx(x.shape);
        Tensor<T> dmag(mags.shape);
        for (int64_t i = 0; i < x.shape[0]; ++i) {
            T nrm = std::sqrt(K.sumsq(x.row(i), static_cast<size_t>(cols)));
            T mag = mags.v[static_cast<size_t>(i)];
            T xd = K.dot(x.row(i), d.row(i), static_cast<size_t>(cols));
            // d/dx of mag * x/|x| : (mag/|x|) (d - x (x.d)/|x|^2)
            T a = mag / nrm;
            T b = -mag * xd / (nrm * nrm * nrm);
            for (int64_t j = 0; j < cols; ++j) dx.at(i, j) = a * d.at(i, j) + b * x.at(i, j);
            dmag.v[static_cast<size_t>(i)] = xd / nrm;
        }
        check_finite(dx, "l2_normalize_rows backward");
        gg.accum(mi, dx);
        gg.accum(gi, dmag);
    });
}

template <class T>
Var<T> rms_norm(Var<T> x, Var<T> gain) {
    Graph<T>& g = *x.g;
    int32_t xi = x.id, gi = gain.id;
    return g.push(sttt::rms_norm(x.val(), gain.val()), [xi, gi](Graph<T>& gg, int32_t self) {
        const Tensor<T>& xv = gg.val(xi);
        const Tensor<T>& gn = gg.val(gi);
        const Tensor<T>& d = gg.grad(self);
        const auto& K = kern::active<T>();
        const T eps = static_cast<T>(1e-6);
        const int64_t dim = xv.shape[1];
        Tensor<T> dx(xv.shape);
        Tensor<T> dg(gn.shape);
        for (int64_t i = 0; i < xv.shape[0]; ++i) {
            T ms = K.sumsq(xv.row(i), static_cast<size_t>(dim)) / static_cast<T>(dim);
            T inv = T(1) / std::sqrt(ms + eps);
            // dl/dx_k = inv * g_k d_k - x_k * inv^3/dim * sum_j d_j g_j x_j
            T sum_dgx = T(0);
            for (int64_t j = 0; j < dim; ++j) sum_dgx += d.at(i, j) * gn.v[static_cast<size_t>(j)] * xv.at(i, j);
            T coef = inv * inv * inv * sum_dgx / static_cast<T>(dim);
            for (int64_t j = 0; j < dim; ++j) {
                dx.at(i, j) = inv * gn.v[static_cast<size_t>(j)] * d.at(i, j) - coef * xv.at(i, j);
                dg.v[static_cast<size_t>(j)] += d.at(i, j) * xv.at(i, j) * inv;
            }
        }
        gg.accum(xi, dx);
        gg.accum(gi, dg);
    });
}

template <class T>
Var<T> rope(Var<T> x, const std::vector<int64_t>& positions, int heads, double base) {
    Graph<T>& g = *x.g;
    int32_t xi = x.id;
    auto pos = std::make_shared<std::vector<int64_t>>(positions);
    return g.push(sttt::rope(x.val(), positions, heads, base), [xi, pos, heads, base](Graph<T>& gg, int32_t self) {
        // rotation transpose = rotation by the negated angle
        std::vector<int64_t> neg(*pos);
        for (auto& p : neg) p = -p;
        gg.accum(xi, sttt::rope(gg.grad(self), neg, heads, base));
    });
}

template <class T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, int heads, const std::vector<int64_t>& q_pos,
                 const std::vector<int64_t>& k_pos, int64_t window) {
    Graph<T>& g = *q.g;
    int32_t qi = q.id, ki = k.id, vi = v.id;
    auto qp = std::make_shared<std::vector<int64_t>>(q_pos);
    auto kp = std::make_shared<std::vector<int64_t>>(k_pos);
    return g.push(sttt::attention(q.val(), k.val(), v.val(), heads, q_pos, k_pos, window),
                  [qi, ki, vi, qp, kp, heads, window](Graph<T>& gg, int32_t self) {
                      Tensor<T> dq, dk, dv;
                      sttt::attention_backward(gg.grad(self), gg.val(qi), gg.val(ki), gg.val(vi), heads,
                                               *qp, *kp, window, dq, dk, dv);
                      gg.accum(qi, dq);
                      gg.accum(ki, dk);
                      gg.accum(vi, dv);
                  });
}

template <class T>
Var<T> cross_entropy_rows(Var<T> logits, const std::vector<int64_t>& targets,
                          const std::vector<uint8_t>& loss_mask) {
    Graph<T>& g = *logits.g;
    int32_t li = logits.id;
    auto tg = std::make_shared<std::vector<int64_t>>(targets);
    auto mk = std::make_shared<std::vector<uint8_t>>(loss_mask);
    return g.push(sttt::cross_entropy_rows(logits.val(), targets, loss_mask),
                  [li, tg, mk](Graph<T>& gg, int32_t self) {
                      const Tensor<T>& lg = gg.val(li);
                      const int64_t n = lg.shape[0], vsz = lg.shape[1];
                      int64_t count = 0;
                      for (uint8_t m : *mk) count += m ? 1 : 0;
                      T w = gg.grad(self).v[0] / static_cast<T>(count);
                      Tensor<T> dl(lg.shape);
                      for (int64_t i = 0; i < n; ++i) {
                          if (!(*mk)[static_cast<size_t>(i)]) continue;
                          T mx = lg.at(i, 0);
                          for (int64_t j = 1; j < vsz; ++j) mx = std::max(mx, lg.at(i, j));
                          double denom = 0.0;
                          for (int64_t j = 0; j < vsz; ++j)
                              denom += std::exp(static_cast<double>(lg.at(i, j) - mx));
                          for (int64_t j = 0; j < vsz; ++j) {
                              T p = static_cast<T>(std::exp(static_cast<double>(lg.at(i, j) - mx)) / denom);
                              dl.at(i, j) = w * p;
                          }
                          dl.at(i, (*tg)[static_cast<size_t>(i)]) -= w;
                      }
                      gg.accum(li, dl);
                  });
}

// ---- explicit instantiations ----------------------------------------------------

#define STTT_INSTANTIATE_GRAPH(T)                                                                   \
    template Var<T> matmul<T>(Var<T>, Var<T>);                                                      \
    template Var<T> matmul_nt<T>(Var<T>, Var<T>);                                                   \
    template Var<T> matmul_tn<T>(Var<T>, Var<T>);                                                   \
    template Var<T> transpose<T>(Var<T>);                                                           \
    template Var<T> add<T>(Var<T>, Var<T>);                                                         \
    template Var<T> sub<T>(Var<T>, Var<T>);                                                         \
    template Var<T> mul<T>(Var<T>, Var<T>);                                                         \
    template Var<T> scale<T>(Var<T>, T);                                                            \
    template Var<T> add_scaled<T>(Var<T>, T, Var<T>);                                               \
    template Var<T> silu<T>(Var<T>);                                                                \
    template Var<T> silu_prime<T>(Var<T>);                                                          \
    template Var<T> sqrt_all<T>(Var<T>);                                                            \
    template Var<T> mul_rowvec<T>(Var<T>, Var<T>);                                                  \
    template Var<T> add_rowvec<T>(Var<T>, Var<T>);                                                  \
    template Var<T> div_by_scalar<T>(Var<T>, Var<T>);                                               \
    template Var<T> concat_rows<T>(const std::vector<Var<T>>&);                                     \
    template Var<T> slice_rows<T>(Var<T>, int64_t, int64_t);                                        \
    template Var<T> gather_rows<T>(Var<T>, const std::vector<int64_t>&);                            \
    template Var<T> sum_all<T>(Var<T>);                                                             \
    template Var<T> sumsq_all<T>(Var<T>);                                                           \
    template Var<T> mean_all<T>(Var<T>);                                                            \
    template Var<T> softmax_rows<T>(Var<T>, const BoolMat&);                                        \
    template Var<T> l2_normalize_rows<T>(Var<T>, Var<T>);                                           \
    template Var<T> rms_norm<T>(Var<T>, Var<T>);                                                    \
    template Var<T> rope<T>(Var<T>, const std::vector<int64_t>&, int, double);                      \
    template Var<T> attention<T>(Var<T>, Var<T>, Var<T>, int, const std::vector<int64_t>&,          \
                                 const std::vector<int64_t>&, int64_t);                             \
    template Var<T> cross_entropy_rows<T>(Var<T>, const std::vector<int64_t>&,                      \
                                          const std::vector<uint8_t>&);

STTT_INSTANTIATE_GRAPH(float)
STTT_INSTANTIATE_GRAPH(double)

}  // namespace sttt
