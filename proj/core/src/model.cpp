#include "aei/model.hpp"

#include <cmath>
#include <stdexcept>

namespace aei::model {

AttnParams make_attn_params(ParamStore& store, const std::string& prefix, int dim,
                            std::mt19937& rng) {
    AttnParams p;
    p.wq = &store.create(prefix + ".wq", {dim, dim}, dim, rng);
    p.wk = &store.create(prefix + ".wk", {dim, dim}, dim, rng);
    p.wv = &store.create(prefix + ".wv", {dim, dim}, dim, rng);
    p.wo = &store.create(prefix + ".wo", {dim, dim}, dim, rng);
    p.gamma = &store.create_const(prefix + ".gamma", {dim}, 1.0);
    p.beta = &store.create_zeros(prefix + ".beta", {dim});
    return p;
}

MlpParams make_mlp_params(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                          int out_dim, std::mt19937& rng) {
    MlpParams p;
    p.w1 = &store.create(prefix + ".w1", {in_dim, hidden}, in_dim, rng);
    p.b1 = &store.create_zeros(prefix + ".b1", {hidden});
    p.w2 = &store.create(prefix + ".w2", {hidden, out_dim}, hidden, rng);
    p.b2 = &store.create_zeros(prefix + ".b2", {out_dim});
    return p;
}

NodeId mlp(Graph& g, NodeId x, const MlpParams& p) {
    NodeId h = g.relu(g.add(g.matmul(x, g.param(*p.w1)), g.param(*p.b1)));
    return g.add(g.matmul(h, g.param(*p.w2)), g.param(*p.b2));
}

NodeId self_attention(Graph& g, NodeId x, const AttnParams& p, int heads) {
    const int n = g.value(x).rows();
    const int d = g.value(x).cols();
    if (n < 1) throw std::invalid_argument("self_attention: empty input");
    if (heads < 1 || d % heads != 0)
        throw std::invalid_argument("self_attention: heads must divide the model dimension");
    NodeId q = g.matmul(x, g.param(*p.wq));
    NodeId k = g.matmul(x, g.param(*p.wk));
    NodeId v = g.matmul(x, g.param(*p.wv));
    const int dh = d / heads;
    const Real inv_sqrt = 1.0 / std::sqrt(static_cast<Real>(dh));
    NodeId fused = -1;
    for (int h = 0; h < heads; ++h) {
        NodeId qh = heads == 1 ? q : g.slice_cols(q, h * dh, (h + 1) * dh);
        NodeId kh = heads == 1 ? k : g.slice_cols(k, h * dh, (h + 1) * dh);
        NodeId vh = heads == 1 ? v : g.slice_cols(v, h * dh, (h + 1) * dh);
        NodeId attn = g.softmax(g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt));
        NodeId oh = g.matmul(attn, vh);
        fused = h == 0 ? oh : g.concat(fused, oh, 1);
    }
    NodeId proj = g.matmul(fused, g.param(*p.wo));
    return g.layer_norm(g.add(x, proj), g.param(*p.gamma), g.param(*p.beta));
}

}  // namespace aei::model
