#pragma once

#include <string>

#include "aei/graph.hpp"
#include "aei/params.hpp"

namespace aei::model {

using nn::Graph;
using nn::NodeId;
using nn::ParamStore;
using nn::Parameter;
using nn::Real;

/// Architecture knobs. Feature dimensions come from the data; the rest are
/// config-file keys with these defaults.
struct ModelConfig {
    int env_dim = 0;    // C_e, from features
    int actor_dim = 0;  // C_a, from features
    int embed_dim = 64;
    int mlp_hidden = 128;
    int feature_dim = 256;   // C_f, per-snippet representation
    int base_channels = 128; // C_b
    int head_hidden = 64;
    int attn_heads = 1;
    int window_samples = 8;
    int max_duration = 0;  // D; 0 = use T
    Real loss_lambda = 10.0;

    // Ablations (all off = full model).
    bool environment_only = false;
    bool actors_only = false;
    bool no_interaction = false;
    bool no_selection = false;
    bool no_fusion = false;
};

/// One self-attention block: Q/K/V/output projections plus the residual
/// layer-norm affine.
struct AttnParams {
    Parameter* wq;
    Parameter* wk;
    Parameter* wv;
    Parameter* wo;
    Parameter* gamma;
    Parameter* beta;
};

struct MlpParams {
    Parameter* w1;
    Parameter* b1;
    Parameter* w2;
    Parameter* b2;
};

AttnParams make_attn_params(ParamStore& store, const std::string& prefix, int dim,
                            std::mt19937& rng);
MlpParams make_mlp_params(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                          int out_dim, std::mt19937& rng);

/// y = relu(x w1 + b1) w2 + b2 for x {n, in_dim}.
NodeId mlp(Graph& g, NodeId x, const MlpParams& p);

/// Single-layer scaled dot-product self-attention over x {n, d} with a
/// learned output projection, residual connection and layer norm. `heads`
/// must divide d.
NodeId self_attention(Graph& g, NodeId x, const AttnParams& p, int heads = 1);

}  // namespace aei::model
