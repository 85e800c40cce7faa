#pragma once

#include <utility>
#include <vector>

#include "aei/dataio.hpp"
#include "aei/model.hpp"

namespace aei::bmm {

using model::ModelConfig;
using nn::Graph;
using nn::NodeId;
using nn::ParamStore;
using nn::Parameter;
using nn::Real;

struct BmmParams {
    Parameter* conv1_w;
    Parameter* conv1_b;
    Parameter* conv2_w;
    Parameter* conv2_b;
    Parameter* start_conv_w;
    Parameter* start_conv_b;
    Parameter* start_out_w;
    Parameter* start_out_b;
    Parameter* end_conv_w;
    Parameter* end_conv_b;
    Parameter* end_out_w;
    Parameter* end_out_b;
    Parameter* prop_w1;
    Parameter* prop_b1;
    Parameter* prop_w2;
    Parameter* prop_b2;
};

BmmParams make_bmm_params(ParamStore& store, const ModelConfig& cfg, std::mt19937& rng);

/// Per-snippet boundary probabilities and the (start, duration) actionness
/// grid. Durations run 1..D; entries with start + duration > T are invalid
/// and held at zero.
struct BoundaryMaps {
    int T = 0;
    int D = 0;
    std::vector<Real> start_prob;  // length T
    std::vector<Real> end_prob;    // length T
    std::vector<Real> actionness;  // T*D row-major, column j = duration j+1

    Real action_at(int i, int d) const { return actionness[static_cast<size_t>(i) * D + (d - 1)]; }
    bool valid(int i, int d) const { return d >= 1 && d <= D && i >= 0 && i + d <= T; }
};

/// Two conv1d layers (kernel 3, same padding, ReLU): {T, C_f} -> {T, C_b}.
NodeId base_module(Graph& g, NodeId feats, const BmmParams& p);

/// Start/end heads: conv1d (kernel 3, ReLU) + pointwise conv + sigmoid.
std::pair<NodeId, NodeId> temporal_eval(Graph& g, NodeId hidden, const BmmParams& p);

/// Every valid (start, duration) pair with duration in [1, D], start-major.
std::vector<std::pair<int, int>> proposal_windows(int T, int D);

/// Window-pooled actionness scores aligned with proposal_windows(T, D).
NodeId proposal_eval(Graph& g, NodeId hidden, int D, const BmmParams& p, int samples);

struct ForwardResult {
    NodeId start_prob = -1;  // {T}
    NodeId end_prob = -1;    // {T}
    NodeId actionness = -1;  // {W}, aligned with windows
    std::vector<std::pair<int, int>> windows;
    int T = 0;
    int D = 0;
};

ForwardResult forward(Graph& g, NodeId feats, const BmmParams& p, const ModelConfig& cfg);

BoundaryMaps extract_maps(const Graph& g, const ForwardResult& r);

/// L_start + L_end + L_actionness; boundary terms are the negated weighted
/// binary log-likelihood, actionness adds lambda * MSE over valid entries.
NodeId loss_aei(Graph& g, const ForwardResult& r, const data::GroundTruthLabels& labels,
                Real lambda = 10.0);

}  // namespace aei::bmm
