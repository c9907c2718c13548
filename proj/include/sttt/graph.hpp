#pragma once

#include <functional>
#include <vector>

#include "sttt/ops.hpp"

// Reverse-mode tape. Nodes are recorded in execution order and replayed in
// exact reverse order by backward(). Composite operations (attention is the
// one fused exception, with an analytic backward of its own) decompose into
// the primitives below. Gradients accumulate, so reusing a value twice is
// fine; an input never touched by the loss keeps an exactly-zero gradient.

namespace sttt {

template <class T>
class Graph;

template <class T>
struct Var {
    Graph<T>* g = nullptr;
    int32_t id = -1;

    Var() = default;
    Var(Graph<T>* graph, int32_t node) : g(graph), id(node) {}
    bool valid() const { return g != nullptr && id >= 0; }
    const Tensor<T>& val() const;
    const Tensor<T>& grad() const;
};

template <class T>
class Graph {
public:
    struct Node {
        Tensor<T> val;
        Tensor<T> grad;  // empty until something accumulates into it
        std::function<void(Graph<T>&, int32_t)> backward;
    };

    Var<T> leaf(Tensor<T> value) {
        nodes_.push_back(Node{std::move(value), {}, nullptr});
        return Var<T>(this, static_cast<int32_t>(nodes_.size() - 1));
    }

    Var<T> push(Tensor<T> value, std::function<void(Graph<T>&, int32_t)> backward) {
        nodes_.push_back(Node{std::move(value), {}, std::move(backward)});
        return Var<T>(this, static_cast<int32_t>(nodes_.size() - 1));
    }

    const Tensor<T>& val(int32_t id) const { return nodes_[static_cast<size_t>(id)].val; }

    const Tensor<T>& grad(int32_t id) const {
        const Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.v.empty()) {
            static thread_local Tensor<T> zero;
            zero = Tensor<T>(n.val.shape);
            return zero;
        }
        return n.grad;
    }

    void accum(int32_t id, const Tensor<T>& g) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.val.same_shape(g)) throw ShapeError("tape: gradient shape mismatch");
        if (n.grad.v.empty())
            n.grad = g;
        else
            kern::active<T>().add(n.grad.data(), g.data(), n.grad.data(), n.grad.v.size());
    }

    // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse recording
    // order. Only nodes that received a gradient propagate further.
    void backward(Var<T> loss) {
        if (loss.g != this) throw Error("backward: loss is not on this tape");
        if (!loss.valid() || loss.id >= static_cast<int32_t>(nodes_.size()))
            throw Error("backward: loss is not on this tape");
        if (loss.val().numel() != 1) throw ShapeError("backward: loss must be scalar");
        clear_grads();
        accum(loss.id, Tensor<T>::full({1}, T(1)));
        for (int32_t id = loss.id; id >= 0; --id) {
            Node& n = nodes_[static_cast<size_t>(id)];
            if (n.grad.v.empty() || !n.backward) continue;
            n.backward(*this, id);
        }
    }

    void clear_grads() {
        for (auto& n : nodes_) n.grad = Tensor<T>();
    }

    size_t size() const { return nodes_.size(); }
    void reset() { nodes_.clear(); }

private:
    std::vector<Node> nodes_;
};

template <class T>
inline const Tensor<T>& Var<T>::val() const {
    return g->val(id);
}
template <class T>
inline const Tensor<T>& Var<T>::grad() const {
    return g->grad(id);
}

template <class T>
inline const Tensor<T>& value_of(const Var<T>& v) {
    return v.val();
}

// Lift a plain tensor into the same execution context as `like`.
template <class T>
inline Var<T> lift(const Var<T>& like, Tensor<T> t) {
    return like.g->leaf(std::move(t));
}
template <class T>
inline Tensor<T> lift(const Tensor<T>&, Tensor<T> t) {
    return t;
}

// ---- recorded primitives (same names and semantics as the raw ops) ---------

template <class T>
Var<T> matmul(Var<T> a, Var<T> b);
template <class T>
Var<T> matmul_nt(Var<T> a, Var<T> b);
template <class T>
Var<T> matmul_tn(Var<T> a, Var<T> b);
template <class T>
Var<T> transpose(Var<T> a);
template <class T>
Var<T> add(Var<T> a, Var<T> b);
template <class T>
Var<T> sub(Var<T> a, Var<T> b);
template <class T>
Var<T> mul(Var<T> a, Var<T> b);
template <class T>
Var<T> scale(Var<T> a, T alpha);
template <class T>
Var<T> add_scaled(Var<T> a, T alpha, Var<T> b);
template <class T>
Var<T> silu(Var<T> a);
template <class T>
Var<T> silu_prime(Var<T> a);
template <class T>
Var<T> sqrt_all(Var<T> a);
template <class T>
Var<T> mul_rowvec(Var<T> a, Var<T> v);
template <class T>
Var<T> add_rowvec(Var<T> a, Var<T> v);
template <class T>
Var<T> div_by_scalar(Var<T> a, Var<T> s);
template <class T>
Var<T> concat_rows(const std::vector<Var<T>>& parts);
template <class T>
Var<T> slice_rows(Var<T> a, int64_t r0, int64_t r1);
template <class T>
Var<T> gather_rows(Var<T> table, const std::vector<int64_t>& ids);
template <class T>
Var<T> row_norms(Var<T> a);
template <class T>
Var<T> sum_all(Var<T> a);
template <class T>
Var<T> sumsq_all(Var<T> a);
template <class T>
Var<T> mean_all(Var<T> a);
template <class T>
Var<T> softmax_rows(Var<T> s, const BoolMat& mask);
template <class T>
Var<T> l2_normalize_rows(Var<T> m, Var<T> magnitudes);
template <class T>
Var<T> rms_norm(Var<T> x, Var<T> gain);
template <class T>
Var<T> rope(Var<T> x, const std::vector<int64_t>& positions, int heads, double base);
template <class T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, int heads, const std::vector<int64_t>& q_pos,
                 const std::vector<int64_t>& k_pos, int64_t window);
template <class T>
Var<T> cross_entropy_rows(Var<T> logits, const std::vector<int64_t>& targets,
                          const std::vector<uint8_t>& loss_mask);

using VarF = Var<float>;
using VarD = Var<double>;

}  // namespace sttt
