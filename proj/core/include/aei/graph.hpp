#pragma once

#include <functional>
#include <vector>

#include "aei/params.hpp"
#include "aei/tensor.hpp"

namespace aei::nn {

using NodeId = int;

/// Reverse-mode autodiff tape. Nodes are appended in forward order, so the
/// creation order is already a topological order and backward() is a single
/// reverse sweep. One graph serves one forward/backward pass; build a fresh
/// graph per training step.
class Graph {
public:
    // -- leaves ---------------------------------------------------------
    NodeId constant(Tensor t);
    NodeId constant_scalar(Real v) { return constant(Tensor::scalar(v)); }
    /// Leaf bound to an external parameter; backward() accumulates into
    /// param.grad.
    NodeId param(Parameter& p);

    // -- elementwise ----------------------------------------------------
    NodeId add(NodeId a, NodeId b);  // same shape, or b broadcast as a row bias
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);  // same shape
    NodeId scale(NodeId a, Real c);
    NodeId div_scalar(NodeId a, NodeId s);  // s is a {1} node
    NodeId relu(NodeId a);
    NodeId sigmoid(NodeId a);

    // -- shape ----------------------------------------------------------
    NodeId reshape(NodeId a, Shape shape);
    NodeId transpose(NodeId a);               // rank 2
    NodeId concat(NodeId a, NodeId b, int axis);
    NodeId concat_rows(const std::vector<NodeId>& rows);  // k vectors {d} -> {k,d}
    NodeId slice_cols(NodeId a, int c0, int c1);
    NodeId gather_rows(NodeId a, std::vector<int> idx);
    NodeId broadcast_row(NodeId a, int n);    // {d} or {1,d} -> {n,d}
    NodeId rowwise_scale(NodeId x, NodeId s); // row i of x scaled by s[i]

    // -- linear algebra / nn --------------------------------------------
    NodeId matmul(NodeId a, NodeId b);
    NodeId softmax(NodeId a);    // over the last axis (rank 1 or 2)
    NodeId layer_norm(NodeId x, NodeId gamma, NodeId beta, Real eps = 1e-5);
    NodeId l2_norm(NodeId a);    // over the last axis: {d}->{1}, {n,d}->{n}
    NodeId mean_pool(NodeId a, int axis);  // rank 2 -> rank 1
    NodeId sum_all(NodeId a);    // -> {1}
    /// 1-D convolution over time: x {T,Cin}, w {Cout,Cin,K} (K odd), b {Cout};
    /// stride 1, zero same-padding -> {T,Cout}.
    NodeId conv1d(NodeId x, NodeId w, NodeId b);
    /// Mean of `samples` uniformly spaced, linearly interpolated rows over
    /// each window [start, start+len-1]; x {T,C} -> {W,C}.
    NodeId window_pool(NodeId x, const std::vector<std::pair<int, int>>& windows, int samples);

    // -- losses ---------------------------------------------------------
    /// Negated weighted binary log-likelihood: probabilities clamped to
    /// [1e-6, 1-1e-6]; positive/negative groups normalized by their counts.
    /// A group with zero count contributes nothing (caller warns).
    NodeId weighted_bll_loss(NodeId p, const std::vector<Real>& labels);
    NodeId mse_loss(NodeId p, const std::vector<Real>& labels);

    // -- access ----------------------------------------------------------
    const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Tensor& grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].grad; }

    /// Reverse sweep from a scalar loss node. Throws std::logic_error on a
    /// second call (one backward per graph).
    void backward(NodeId loss);

    size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Graph&)> back;  // empty for constants
    };

    NodeId make(Tensor value, std::function<void(Graph&)> back);
    Tensor& grad_ref(NodeId id) { return nodes_[static_cast<size_t>(id)].grad; }
    void check_rank12(NodeId a, const char* op) const;

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace aei::nn
