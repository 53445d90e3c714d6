#pragma once

// Reverse-mode automatic differentiation over vectors. Matrices live only in a
// ParamStore; the tape records vector values, and backward() scatters gradients
// into a flat buffer aligned with the store.

#include "t2c/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace t2c::nn {

template <class T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        std::size_t offset;
        std::size_t rows;
        std::size_t cols;
        std::size_t size() const { return rows * cols; }
    };

    std::size_t add(const std::string& name, std::size_t rows, std::size_t cols) {
        if (index_.contains(name)) throw Error(ErrorCode::InvalidArgument, "duplicate parameter '" + name + "'");
        const std::size_t id = entries_.size();
        entries_.push_back({name, values_.size(), rows, cols});
        values_.resize(values_.size() + rows * cols, T(0));
        index_.emplace(name, id);
        return id;
    }

    const Entry& entry(std::size_t id) const { return entries_[id]; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error(ErrorCode::NotFound, "no parameter '" + name + "'");
        return it->second;
    }
    bool contains(const std::string& name) const { return index_.contains(name); }

    std::span<T> data(std::size_t id) { return {values_.data() + entries_[id].offset, entries_[id].size()}; }
    std::span<const T> data(std::size_t id) const {
        return {values_.data() + entries_[id].offset, entries_[id].size()};
    }
    const T* ptr(std::size_t id) const { return values_.data() + entries_[id].offset; }

    std::vector<T>& values() { return values_; }
    const std::vector<T>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    /// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) with fan_in = cols (vectors use their length).
    void init_uniform(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        for (const Entry& e : entries_) {
            const double fan_in = static_cast<double>(e.cols > 1 ? e.cols : e.rows);
            const double bound = 1.0 / std::sqrt(std::max(1.0, fan_in));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (std::size_t i = 0; i < e.size(); ++i) values_[e.offset + i] = static_cast<T>(dist(rng));
        }
    }

private:
    std::vector<Entry> entries_;
    std::vector<T> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Var {
    std::int32_t id = -1;
    bool valid() const { return id >= 0; }
};

template <class T>
class Tape {
public:
    explicit Tape(const ParamStore<T>& params) : params_(&params) {}

    void clear() {
        nodes_.clear();
        vals_.clear();
        aux_.clear();
        lists_.clear();
    }
    std::size_t node_count() const { return nodes_.size(); }

    std::span<const T> value(Var v) const { return {vals_.data() + nodes_[v.id].off, nodes_[v.id].len}; }
    std::size_t size(Var v) const { return nodes_[v.id].len; }
    T scalar(Var v) const { return vals_[nodes_[v.id].off]; }

    Var input(std::span<const T> x) {
        Var v = push(Op::Input, x.size());
        std::copy(x.begin(), x.end(), vals_.begin() + nodes_[v.id].off);
        return v;
    }
    Var zeros(std::size_t n) { return push(Op::Input, n); }

    Var param(std::size_t pid) {
        const auto& e = params_->entry(pid);
        Var v = push(Op::Param, e.size());
        nodes_[v.id].p[0] = static_cast<std::int32_t>(pid);
        const T* src = params_->ptr(pid);
        std::copy(src, src + e.size(), vals_.begin() + nodes_[v.id].off);
        return v;
    }

    /// W x (+ b). W is rows x cols row-major; pass bias = -1 for none.
    Var affine(std::size_t w, std::int64_t b, Var x) {
        const auto& e = params_->entry(w);
        if (size(x) != e.cols)
            throw Error(ErrorCode::DimensionMismatch, "affine '" + e.name + "' expects " + std::to_string(e.cols) +
                                                          " inputs, got " + std::to_string(size(x)));
        Var v = push(Op::Affine, e.rows);
        Node& n = nodes_[v.id];
        n.a = x.id;
        n.p[0] = static_cast<std::int32_t>(w);
        n.p[1] = static_cast<std::int32_t>(b);
        const T* W = params_->ptr(w);
        const T* xv = vals_.data() + nodes_[x.id].off;
        T* out = vals_.data() + n.off;
        const std::size_t cols = e.cols;
        for (std::size_t r = 0; r < e.rows; ++r) {
            const T* row = W + r * cols;
            T acc = T(0);
            for (std::size_t c = 0; c < cols; ++c) acc += row[c] * xv[c];
            out[r] = acc;
        }
        if (b >= 0) {
            const T* bv = params_->ptr(static_cast<std::size_t>(b));
            for (std::size_t r = 0; r < e.rows; ++r) out[r] += bv[r];
        }
        return v;
    }

    Var add(Var a, Var b) { return binary(Op::Add, a, b); }
    Var sub(Var a, Var b) { return binary(Op::Sub, a, b); }
    Var mul(Var a, Var b) { return binary(Op::Mul, a, b); }

    Var sigmoid(Var a) { return unary(Op::Sigmoid, a); }
    Var tanh(Var a) { return unary(Op::Tanh, a); }

    Var scale(Var a, T c) {
        Var v = unary(Op::Scale, a, false);
        nodes_[v.id].c = c;
        T* out = vals_.data() + nodes_[v.id].off;
        const T* x = vals_.data() + nodes_[a.id].off;
        for (std::size_t i = 0; i < size(a); ++i) out[i] = c * x[i];
        return v;
    }

    Var dot(Var a, Var b) {
        check_same(a, b);
        Var v = push(Op::Dot, 1);
        nodes_[v.id].a = a.id;
        nodes_[v.id].b = b.id;
        const T* x = vals_.data() + nodes_[a.id].off;
        const T* y = vals_.data() + nodes_[b.id].off;
        T acc = T(0);
        for (std::size_t i = 0; i < size(a); ++i) acc += x[i] * y[i];
        vals_[nodes_[v.id].off] = acc;
        return v;
    }

    Var concat(std::span<const Var> parts) {
        std::size_t total = 0;
        for (Var p : parts) total += size(p);
        Var v = push(Op::Concat, total);
        set_list(v, parts);
        T* out = vals_.data() + nodes_[v.id].off;
        for (Var p : parts) {
            const auto src = value(p);
            out = std::copy(src.begin(), src.end(), out);
        }
        return v;
    }

    Var mean(std::span<const Var> parts) {
        const std::size_t n = size(parts[0]);
        Var v = push(Op::Mean, n);
        set_list(v, parts);
        T* out = vals_.data() + nodes_[v.id].off;
        const T inv = T(1) / static_cast<T>(parts.size());
        for (Var p : parts) {
            if (size(p) != n) throw Error(ErrorCode::DimensionMismatch, "mean over unequal vectors");
            const T* x = vals_.data() + nodes_[p.id].off;
            for (std::size_t i = 0; i < n; ++i) out[i] += inv * x[i];
        }
        return v;
    }

    Var softmax(Var a) {
        Var v = unary(Op::Softmax, a, false);
        const T* x = vals_.data() + nodes_[a.id].off;
        T* out = vals_.data() + nodes_[v.id].off;
        const std::size_t n = size(a);
        const T mx = *std::max_element(x, x + n);
        T total = T(0);
        for (std::size_t i = 0; i < n; ++i) total += (out[i] = std::exp(x[i] - mx));
        for (std::size_t i = 0; i < n; ++i) out[i] /= total;
        return v;
    }

    /// sum_i w[i] * vs[i]
    Var weighted_sum(Var w, std::span<const Var> vs) {
        if (size(w) != vs.size()) throw Error(ErrorCode::DimensionMismatch, "weighted_sum arity");
        const std::size_t n = size(vs[0]);
        Var v = push(Op::WeightedSum, n);
        nodes_[v.id].a = w.id;
        set_list(v, vs);
        T* out = vals_.data() + nodes_[v.id].off;
        const T* wv = vals_.data() + nodes_[w.id].off;
        for (std::size_t k = 0; k < vs.size(); ++k) {
            const T* x = vals_.data() + nodes_[vs[k].id].off;
            for (std::size_t i = 0; i < n; ++i) out[i] += wv[k] * x[i];
        }
        return v;
    }

    /// GRU cell with gate order (reset, update, candidate):
    /// r = s(Wi_r x + bi_r + Wh_r h + bh_r), u = s(...), c = tanh(Wi_c x + bi_c + r * (Wh_c h + bh_c)),
    /// h' = (1 - u) * c + u * h.
    Var gru(Var x, Var h, std::size_t wi, std::size_t wh, std::size_t bi, std::size_t bh) {
        const std::size_t H = size(h);
        const auto& ei = params_->entry(wi);
        const auto& eh = params_->entry(wh);
        if (ei.rows != 3 * H || ei.cols != size(x) || eh.rows != 3 * H || eh.cols != H)
            throw Error(ErrorCode::DimensionMismatch, "gru '" + ei.name + "' shape mismatch");
        Var v = push(Op::Gru, H);
        Node& n = nodes_[v.id];
        n.a = x.id;
        n.b = h.id;
        n.p = {static_cast<std::int32_t>(wi), static_cast<std::int32_t>(wh), static_cast<std::int32_t>(bi),
               static_cast<std::int32_t>(bh)};
        n.aux_off = aux_.size();
        aux_.resize(aux_.size() + 4 * H);  // r, u, c, (Wh_c h + bh_c)

        scratch_.assign(6 * H, T(0));
        T* gi = scratch_.data();
        T* gh = scratch_.data() + 3 * H;
        const T* xv = vals_.data() + nodes_[x.id].off;
        const T* hv = vals_.data() + nodes_[h.id].off;
        matvec(params_->ptr(wi), 3 * H, ei.cols, xv, gi);
        matvec(params_->ptr(wh), 3 * H, H, hv, gh);
        const T* biv = params_->ptr(bi);
        const T* bhv = params_->ptr(bh);
        T* r = aux_.data() + n.aux_off;
        T* u = r + H;
        T* c = u + H;
        T* ghc = c + H;
        T* out = vals_.data() + n.off;
        for (std::size_t i = 0; i < H; ++i) {
            r[i] = sigm(gi[i] + biv[i] + gh[i] + bhv[i]);
            u[i] = sigm(gi[H + i] + biv[H + i] + gh[H + i] + bhv[H + i]);
            ghc[i] = gh[2 * H + i] + bhv[2 * H + i];
            c[i] = std::tanh(gi[2 * H + i] + biv[2 * H + i] + r[i] * ghc[i]);
            out[i] = (T(1) - u[i]) * c[i] + u[i] * hv[i];
        }
        return v;
    }

    /// out[i] = a[2i] - a[2i+1]: a two-logit softmax's first probability is sigmoid(out[i]).
    Var pair_diff(Var a) {
        const std::size_t n = size(a) / 2;
        Var v = unary(Op::PairDiff, a, false, n);
        const T* x = vals_.data() + nodes_[a.id].off;
        T* out = vals_.data() + nodes_[v.id].off;
        for (std::size_t i = 0; i < n; ++i) out[i] = x[2 * i] - x[2 * i + 1];
        return v;
    }

    Var gather(Var a, std::span<const std::int32_t> idx) {
        Var v = push(Op::Gather, idx.size());
        nodes_[v.id].a = a.id;
        nodes_[v.id].list_off = static_cast<std::uint32_t>(lists_.size());
        nodes_[v.id].list_len = static_cast<std::uint32_t>(idx.size());
        lists_.insert(lists_.end(), idx.begin(), idx.end());
        const T* x = vals_.data() + nodes_[a.id].off;
        T* out = vals_.data() + nodes_[v.id].off;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (static_cast<std::size_t>(idx[i]) >= size(a)) throw Error(ErrorCode::DimensionMismatch, "gather index");
            out[i] = x[idx[i]];
        }
        return v;
    }

    /// mean_i [ softplus(u_i) - y_i u_i ]: binary cross-entropy of sigmoid(u) against labels y.
    Var bce_logits(Var u, std::span<const T> labels) {
        if (labels.size() != size(u)) throw Error(ErrorCode::KeyMismatch, "labels do not match scores");
        Var v = push(Op::BceLogits, 1);
        nodes_[v.id].a = u.id;
        nodes_[v.id].aux_off = aux_.size();
        aux_.insert(aux_.end(), labels.begin(), labels.end());
        const T* x = vals_.data() + nodes_[u.id].off;
        T acc = T(0);
        for (std::size_t i = 0; i < labels.size(); ++i) acc += softplus(x[i]) - labels[i] * x[i];
        vals_[nodes_[v.id].off] = labels.empty() ? T(0) : acc / static_cast<T>(labels.size());
        return v;
    }

    /// Sum of scalars, each weighted.
    Var weighted_total(std::span<const Var> scalars, T weight) {
        Var v = push(Op::Total, 1);
        set_list(v, scalars);
        nodes_[v.id].c = weight;
        T acc = T(0);
        for (Var s : scalars) acc += scalar(s);
        vals_[nodes_[v.id].off] = weight * acc;
        return v;
    }

    /// Accumulates d(root)/d(param) into `param_grad` (same layout as the store).
    void backward(Var root, std::vector<T>& param_grad) {
        if (!root.valid() || static_cast<std::size_t>(root.id) >= nodes_.size())
            throw Error(ErrorCode::NoRecordedGraph, "backward without a recorded forward pass");
        if (param_grad.size() != params_->size()) param_grad.assign(params_->size(), T(0));
        grads_.assign(vals_.size(), T(0));
        grads_[nodes_[root.id].off] = T(1);
        for (std::int32_t id = root.id; id >= 0; --id) back(nodes_[id], param_grad);
    }

    static T sigm(T x) {
        if (x >= 0) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
    }
    static T softplus(T x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

private:
    enum class Op : std::uint8_t {
        Input, Param, Affine, Add, Sub, Mul, Sigmoid, Tanh, Scale, Dot, Concat, Mean, Softmax,
        WeightedSum, Gru, PairDiff, Gather, BceLogits, Total,
    };

    struct Node {
        Op op;
        std::uint32_t off = 0;
        std::uint32_t len = 0;
        std::int32_t a = -1;
        std::int32_t b = -1;
        std::array<std::int32_t, 4> p{-1, -1, -1, -1};
        std::size_t aux_off = 0;
        std::uint32_t list_off = 0;
        std::uint32_t list_len = 0;
        T c = T(0);
    };

    Var push(Op op, std::size_t len) {
        Node n;
        n.op = op;
        n.off = static_cast<std::uint32_t>(vals_.size());
        n.len = static_cast<std::uint32_t>(len);
        vals_.resize(vals_.size() + len, T(0));
        nodes_.push_back(n);
        return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    void set_list(Var v, std::span<const Var> parts) {
        nodes_[v.id].list_off = static_cast<std::uint32_t>(lists_.size());
        nodes_[v.id].list_len = static_cast<std::uint32_t>(parts.size());
        for (Var p : parts) lists_.push_back(p.id);
    }

    void check_same(Var a, Var b) const {
        if (size(a) != size(b))
            throw Error(ErrorCode::DimensionMismatch,
                        "operand sizes differ: " + std::to_string(size(a)) + " vs " + std::to_string(size(b)));
    }

    Var binary(Op op, Var a, Var b) {
        check_same(a, b);
        Var v = push(op, size(a));
        nodes_[v.id].a = a.id;
        nodes_[v.id].b = b.id;
        const T* x = vals_.data() + nodes_[a.id].off;
        const T* y = vals_.data() + nodes_[b.id].off;
        T* out = vals_.data() + nodes_[v.id].off;
        for (std::size_t i = 0; i < size(a); ++i) {
            switch (op) {
            case Op::Add: out[i] = x[i] + y[i]; break;
            case Op::Sub: out[i] = x[i] - y[i]; break;
            default: out[i] = x[i] * y[i]; break;
            }
        }
        return v;
    }

    Var unary(Op op, Var a, bool compute = true, std::size_t len = SIZE_MAX) {
        Var v = push(op, len == SIZE_MAX ? size(a) : len);
        nodes_[v.id].a = a.id;
        if (!compute) return v;
        const T* x = vals_.data() + nodes_[a.id].off;
        T* out = vals_.data() + nodes_[v.id].off;
        for (std::size_t i = 0; i < size(a); ++i) out[i] = op == Op::Sigmoid ? sigm(x[i]) : std::tanh(x[i]);
        return v;
    }

    static void matvec(const T* W, std::size_t rows, std::size_t cols, const T* x, T* out) {
        for (std::size_t r = 0; r < rows; ++r) {
            const T* row = W + r * cols;
            T acc = T(0);
            for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
            out[r] = acc;
        }
    }

    // dW += g x^T ; dx += W^T g
    void affine_back(std::size_t w, const T* g, std::size_t rows, std::size_t cols, const T* x, T* dx,
                     std::vector<T>& pg) {
        const T* W = params_->ptr(w);
        T* dW = pg.data() + params_->entry(w).offset;
        for (std::size_t r = 0; r < rows; ++r) {
            const T gr = g[r];
            if (gr == T(0)) continue;
            const T* row = W + r * cols;
            T* drow = dW + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                drow[c] += gr * x[c];
                dx[c] += gr * row[c];
            }
        }
    }

    void back(const Node& n, std::vector<T>& pg) {
        const T* g = grads_.data() + n.off;
        const T* out = vals_.data() + n.off;
        auto grad_of = [this](std::int32_t id) { return grads_.data() + nodes_[id].off; };
        auto val_of = [this](std::int32_t id) { return vals_.data() + nodes_[id].off; };
        switch (n.op) {
        case Op::Input:
            break;
        case Op::Param: {
            T* d = pg.data() + params_->entry(static_cast<std::size_t>(n.p[0])).offset;
            for (std::size_t i = 0; i < n.len; ++i) d[i] += g[i];
            break;
        }
        case Op::Affine: {
            const auto& e = params_->entry(static_cast<std::size_t>(n.p[0]));
            affine_back(static_cast<std::size_t>(n.p[0]), g, e.rows, e.cols, val_of(n.a), grad_of(n.a), pg);
            if (n.p[1] >= 0) {
                T* db = pg.data() + params_->entry(static_cast<std::size_t>(n.p[1])).offset;
                for (std::size_t i = 0; i < n.len; ++i) db[i] += g[i];
            }
            break;
        }
        case Op::Add:
        case Op::Sub: {
            T* da = grad_of(n.a);
            T* db = grad_of(n.b);
            const T sign = n.op == Op::Add ? T(1) : T(-1);
            for (std::size_t i = 0; i < n.len; ++i) {
                da[i] += g[i];
                db[i] += sign * g[i];
            }
            break;
        }
        case Op::Mul: {
            T* da = grad_of(n.a);
            T* db = grad_of(n.b);
            const T* x = val_of(n.a);
            const T* y = val_of(n.b);
            for (std::size_t i = 0; i < n.len; ++i) {
                da[i] += g[i] * y[i];
                db[i] += g[i] * x[i];
            }
            break;
        }
        case Op::Sigmoid: {
            T* da = grad_of(n.a);
            for (std::size_t i = 0; i < n.len; ++i) da[i] += g[i] * out[i] * (T(1) - out[i]);
            break;
        }
        case Op::Tanh: {
            T* da = grad_of(n.a);
            for (std::size_t i = 0; i < n.len; ++i) da[i] += g[i] * (T(1) - out[i] * out[i]);
            break;
        }
        case Op::Scale: {
            T* da = grad_of(n.a);
            for (std::size_t i = 0; i < n.len; ++i) da[i] += n.c * g[i];
            break;
        }
        case Op::Dot: {
            const std::size_t len = nodes_[n.a].len;
            T* da = grad_of(n.a);
            T* db = grad_of(n.b);
            const T* x = val_of(n.a);
            const T* y = val_of(n.b);
            for (std::size_t i = 0; i < len; ++i) {
                da[i] += g[0] * y[i];
                db[i] += g[0] * x[i];
            }
            break;
        }
        case Op::Concat: {
            const T* src = g;
            for (std::uint32_t k = 0; k < n.list_len; ++k) {
                const std::int32_t id = lists_[n.list_off + k];
                T* d = grad_of(id);
                for (std::size_t i = 0; i < nodes_[id].len; ++i) d[i] += src[i];
                src += nodes_[id].len;
            }
            break;
        }
        case Op::Mean: {
            const T inv = T(1) / static_cast<T>(n.list_len);
            for (std::uint32_t k = 0; k < n.list_len; ++k) {
                T* d = grad_of(lists_[n.list_off + k]);
                for (std::size_t i = 0; i < n.len; ++i) d[i] += inv * g[i];
            }
            break;
        }
        case Op::Softmax: {
            T dotgy = T(0);
            for (std::size_t i = 0; i < n.len; ++i) dotgy += g[i] * out[i];
            T* da = grad_of(n.a);
            for (std::size_t i = 0; i < n.len; ++i) da[i] += out[i] * (g[i] - dotgy);
            break;
        }
        case Op::WeightedSum: {
            const T* w = val_of(n.a);
            T* dw = grad_of(n.a);
            for (std::uint32_t k = 0; k < n.list_len; ++k) {
                const std::int32_t id = lists_[n.list_off + k];
                const T* x = val_of(id);
                T* dx = grad_of(id);
                T acc = T(0);
                for (std::size_t i = 0; i < n.len; ++i) {
                    acc += g[i] * x[i];
                    dx[i] += w[k] * g[i];
                }
                dw[k] += acc;
            }
            break;
        }
        case Op::Gru:
            gru_back(n, g, pg);
            break;
        case Op::PairDiff: {
            T* da = grad_of(n.a);
            for (std::size_t i = 0; i < n.len; ++i) {
                da[2 * i] += g[i];
                da[2 * i + 1] -= g[i];
            }
            break;
        }
        case Op::Gather: {
            T* da = grad_of(n.a);
            for (std::uint32_t i = 0; i < n.list_len; ++i) da[lists_[n.list_off + i]] += g[i];
            break;
        }
        case Op::BceLogits: {
            const std::size_t len = nodes_[n.a].len;
            if (len == 0) break;
            const T* x = val_of(n.a);
            const T* y = aux_.data() + n.aux_off;
            T* da = grad_of(n.a);
            const T inv = g[0] / static_cast<T>(len);
            for (std::size_t i = 0; i < len; ++i) da[i] += inv * (sigm(x[i]) - y[i]);
            break;
        }
        case Op::Total: {
            for (std::uint32_t k = 0; k < n.list_len; ++k) grad_of(lists_[n.list_off + k])[0] += n.c * g[0];
            break;
        }
        }
    }

    void gru_back(const Node& n, const T* g, std::vector<T>& pg) {
        const std::size_t H = n.len;
        const auto wi = static_cast<std::size_t>(n.p[0]), wh = static_cast<std::size_t>(n.p[1]);
        const auto bi = static_cast<std::size_t>(n.p[2]), bh = static_cast<std::size_t>(n.p[3]);
        const std::size_t in = nodes_[n.a].len;
        const T* r = aux_.data() + n.aux_off;
        const T* u = r + H;
        const T* c = u + H;
        const T* ghc = c + H;
        const T* xv = vals_.data() + nodes_[n.a].off;
        const T* hv = vals_.data() + nodes_[n.b].off;
        T* dx = grads_.data() + nodes_[n.a].off;
        T* dh = grads_.data() + nodes_[n.b].off;

        scratch_.assign(6 * H, T(0));
        T* dgi = scratch_.data();
        T* dgh = scratch_.data() + 3 * H;
        for (std::size_t i = 0; i < H; ++i) {
            const T dc = g[i] * (T(1) - u[i]);
            const T du = g[i] * (hv[i] - c[i]);
            dh[i] += g[i] * u[i];
            const T dc_pre = dc * (T(1) - c[i] * c[i]);
            const T dr = dc_pre * ghc[i];
            const T dr_pre = dr * r[i] * (T(1) - r[i]);
            const T du_pre = du * u[i] * (T(1) - u[i]);
            dgi[i] = dr_pre;
            dgi[H + i] = du_pre;
            dgi[2 * H + i] = dc_pre;
            dgh[i] = dr_pre;
            dgh[H + i] = du_pre;
            dgh[2 * H + i] = dc_pre * r[i];
        }
        affine_back(wi, dgi, 3 * H, in, xv, dx, pg);
        affine_back(wh, dgh, 3 * H, H, hv, dh, pg);
        T* dbi = pg.data() + params_->entry(bi).offset;
        T* dbh = pg.data() + params_->entry(bh).offset;
        for (std::size_t i = 0; i < 3 * H; ++i) {
            dbi[i] += dgi[i];
            dbh[i] += dgh[i];
        }
    }

    const ParamStore<T>* params_;
    std::vector<Node> nodes_;
    std::vector<T> vals_;
    std::vector<T> grads_;
    std::vector<T> aux_;
    std::vector<std::int32_t> lists_;
    std::vector<T> scratch_;
};

}  // namespace t2c::nn
