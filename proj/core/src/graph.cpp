#include "aei/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aei::nn {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                                " and " + shape_str(b));
}

}  // namespace

NodeId Graph::make(Tensor value, std::function<void(Graph&)> back) {
    Node n;
    n.grad = Tensor::zeros(value.shape());
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check_rank12(NodeId a, const char* op) const {
    int r = value(a).rank();
    if (r < 1 || r > 2)
        throw std::invalid_argument(std::string(op) + ": expected rank 1 or 2, got rank " +
                                    std::to_string(r));
}

NodeId Graph::constant(Tensor t) { return make(std::move(t), nullptr); }

NodeId Graph::param(Parameter& p) {
    Parameter* pp = &p;
    NodeId out = make(p.value, nullptr);
    nodes_.back().back = [out, pp](Graph& g) {
        const Tensor& go = g.grad(out);
        for (int64_t i = 0; i < go.numel(); ++i) pp->grad[i] += go[i];
    };
    return out;
}

NodeId Graph::add(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.same_shape(tb)) {
        Tensor out = ta;
        for (int64_t i = 0; i < out.numel(); ++i) out[i] += tb[i];
        NodeId o = make(std::move(out), nullptr);
        nodes_.back().back = [o, a, b](Graph& g) {
            const Tensor& go = g.grad(o);
            Tensor& ga = g.grad_ref(a);
            Tensor& gb = g.grad_ref(b);
            for (int64_t i = 0; i < go.numel(); ++i) {
                ga[i] += go[i];
                gb[i] += go[i];
            }
        };
        return o;
    }
    // row-bias broadcast: {n,m} + {m}
    if (ta.rank() == 2 && tb.rank() == 1 && ta.cols() == tb.dim(0)) {
        Tensor out = ta;
        for (int i = 0; i < ta.rows(); ++i)
            for (int j = 0; j < ta.cols(); ++j) out.at(i, j) += tb[j];
        NodeId o = make(std::move(out), nullptr);
        nodes_.back().back = [o, a, b](Graph& g) {
            const Tensor& go = g.grad(o);
            Tensor& ga = g.grad_ref(a);
            Tensor& gb = g.grad_ref(b);
            for (int i = 0; i < go.rows(); ++i)
                for (int j = 0; j < go.cols(); ++j) {
                    ga.at(i, j) += go.at(i, j);
                    gb[j] += go.at(i, j);
                }
        };
        return o;
    }
    shape_error("add", ta.shape(), tb.shape());
}

NodeId Graph::sub(NodeId a, NodeId b) { return add(a, scale(b, -1.0)); }

NodeId Graph::mul(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb)) shape_error("mul", ta.shape(), tb.shape());
    Tensor out = ta;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= tb[i];
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, b](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& va = g.value(a);
        const Tensor& vb = g.value(b);
        Tensor& ga = g.grad_ref(a);
        Tensor& gb = g.grad_ref(b);
        for (int64_t i = 0; i < go.numel(); ++i) {
            ga[i] += go[i] * vb[i];
            gb[i] += go[i] * va[i];
        }
    };
    return o;
}

NodeId Graph::scale(NodeId a, Real c) {
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= c;
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, c](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (int64_t i = 0; i < go.numel(); ++i) ga[i] += c * go[i];
    };
    return o;
}

NodeId Graph::div_scalar(NodeId a, NodeId s) {
    if (value(s).numel() != 1) throw std::invalid_argument("div_scalar: divisor must be a scalar node");
    const Real sv = value(s)[0];
    if (sv == 0.0) throw std::invalid_argument("div_scalar: division by zero");
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] /= sv;
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, s, sv](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& va = g.value(a);
        Tensor& ga = g.grad_ref(a);
        Tensor& gs = g.grad_ref(s);
        for (int64_t i = 0; i < go.numel(); ++i) {
            ga[i] += go[i] / sv;
            gs[0] -= go[i] * va[i] / (sv * sv);
        }
    };
    return o;
}

NodeId Graph::relu(NodeId a) {
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::max<Real>(out[i], 0.0);
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& va = g.value(a);
        Tensor& ga = g.grad_ref(a);
        for (int64_t i = 0; i < go.numel(); ++i)
            if (va[i] > 0.0) ga[i] += go[i];
    };
    return o;
}

NodeId Graph::sigmoid(NodeId a) {
    Tensor out = value(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& vo = g.value(o);
        Tensor& ga = g.grad_ref(a);
        for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * vo[i] * (1.0 - vo[i]);
    };
    return o;
}

NodeId Graph::reshape(NodeId a, Shape shape) {
    if (shape_numel(shape) != value(a).numel())
        shape_error("reshape", value(a).shape(), shape);
    Tensor out(std::move(shape), value(a).vec());
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
    };
    return o;
}

NodeId Graph::transpose(NodeId a) {
    const Tensor& ta = value(a);
    if (ta.rank() != 2) throw std::invalid_argument("transpose: expected rank 2, got " + shape_str(ta.shape()));
    Tensor out({ta.cols(), ta.rows()});
    for (int i = 0; i < ta.rows(); ++i)
        for (int j = 0; j < ta.cols(); ++j) out.at(j, i) = ta.at(i, j);
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (int i = 0; i < go.rows(); ++i)
            for (int j = 0; j < go.cols(); ++j) ga.at(j, i) += go.at(i, j);
    };
    return o;
}

NodeId Graph::concat(NodeId a, NodeId b, int axis) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rank() == 1 && tb.rank() == 1 && axis == 0) {
        Tensor out({ta.dim(0) + tb.dim(0)});
        std::copy(ta.data(), ta.data() + ta.numel(), out.data());
        std::copy(tb.data(), tb.data() + tb.numel(), out.data() + ta.numel());
        const int64_t na = ta.numel();  // before make(): push_back may invalidate ta
        NodeId o = make(std::move(out), nullptr);
        nodes_.back().back = [o, a, b, na](Graph& g) {
            const Tensor& go = g.grad(o);
            Tensor& ga = g.grad_ref(a);
            Tensor& gb = g.grad_ref(b);
            for (int64_t i = 0; i < na; ++i) ga[i] += go[i];
            for (int64_t i = na; i < go.numel(); ++i) gb[i - na] += go[i];
        };
        return o;
    }
    if (ta.rank() == 2 && tb.rank() == 2) {
        if (axis == 0) {
            if (ta.cols() != tb.cols()) shape_error("concat(axis=0)", ta.shape(), tb.shape());
            Tensor out({ta.rows() + tb.rows(), ta.cols()});
            std::copy(ta.data(), ta.data() + ta.numel(), out.data());
            std::copy(tb.data(), tb.data() + tb.numel(), out.data() + ta.numel());
            const int64_t na = ta.numel();
            NodeId o = make(std::move(out), nullptr);
            nodes_.back().back = [o, a, b, na](Graph& g) {
                const Tensor& go = g.grad(o);
                Tensor& ga = g.grad_ref(a);
                Tensor& gb = g.grad_ref(b);
                for (int64_t i = 0; i < na; ++i) ga[i] += go[i];
                for (int64_t i = na; i < go.numel(); ++i) gb[i - na] += go[i];
            };
            return o;
        }
        if (axis == 1) {
            if (ta.rows() != tb.rows()) shape_error("concat(axis=1)", ta.shape(), tb.shape());
            Tensor out({ta.rows(), ta.cols() + tb.cols()});
            for (int i = 0; i < ta.rows(); ++i) {
                for (int j = 0; j < ta.cols(); ++j) out.at(i, j) = ta.at(i, j);
                for (int j = 0; j < tb.cols(); ++j) out.at(i, ta.cols() + j) = tb.at(i, j);
            }
            const int ca = ta.cols();
            NodeId o = make(std::move(out), nullptr);
            nodes_.back().back = [o, a, b, ca](Graph& g) {
                const Tensor& go = g.grad(o);
                Tensor& ga = g.grad_ref(a);
                Tensor& gb = g.grad_ref(b);
                for (int i = 0; i < go.rows(); ++i) {
                    for (int j = 0; j < ca; ++j) ga.at(i, j) += go.at(i, j);
                    for (int j = ca; j < go.cols(); ++j) gb.at(i, j - ca) += go.at(i, j);
                }
            };
            return o;
        }
    }
    shape_error("concat", ta.shape(), tb.shape());
}

NodeId Graph::concat_rows(const std::vector<NodeId>& rows) {
    if (rows.empty()) throw std::invalid_argument("concat_rows: empty row list");
    const int d = value(rows[0]).dim(0);
    for (NodeId r : rows) {
        if (value(r).rank() != 1 || value(r).dim(0) != d)
            shape_error("concat_rows", value(rows[0]).shape(), value(r).shape());
    }
    Tensor out({static_cast<int>(rows.size()), d});
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy(value(rows[i]).data(), value(rows[i]).data() + d, out.data() + i * d);
    NodeId o = make(std::move(out), nullptr);
    std::vector<NodeId> parents = rows;
    nodes_.back().back = [o, parents, d](Graph& g) {
        const Tensor& go = g.grad(o);
        for (size_t i = 0; i < parents.size(); ++i) {
            Tensor& gp = g.grad_ref(parents[i]);
            for (int j = 0; j < d; ++j) gp[j] += go[static_cast<int64_t>(i) * d + j];
        }
    };
    return o;
}

NodeId Graph::slice_cols(NodeId a, int c0, int c1) {
    const Tensor& ta = value(a);
    if (ta.rank() != 2 || c0 < 0 || c1 > ta.cols() || c0 >= c1)
        throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + "," +
                                    std::to_string(c1) + ") for " + shape_str(ta.shape()));
    Tensor out({ta.rows(), c1 - c0});
    for (int i = 0; i < ta.rows(); ++i)
        for (int j = c0; j < c1; ++j) out.at(i, j - c0) = ta.at(i, j);
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, c0](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (int i = 0; i < go.rows(); ++i)
            for (int j = 0; j < go.cols(); ++j) ga.at(i, c0 + j) += go.at(i, j);
    };
    return o;
}

NodeId Graph::gather_rows(NodeId a, std::vector<int> idx) {
    const Tensor& ta = value(a);
    if (ta.rank() != 2) throw std::invalid_argument("gather_rows: expected rank 2");
    for (int i : idx)
        if (i < 0 || i >= ta.rows()) throw std::invalid_argument("gather_rows: index out of range");
    Tensor out({static_cast<int>(idx.size()), ta.cols()});
    for (size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < ta.cols(); ++j) out.at(static_cast<int>(r), j) = ta.at(idx[r], j);
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, idx](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (size_t r = 0; r < idx.size(); ++r)
            for (int j = 0; j < go.cols(); ++j) ga.at(idx[r], j) += go.at(static_cast<int>(r), j);
    };
    return o;
}

NodeId Graph::broadcast_row(NodeId a, int n) {
    const Tensor& ta = value(a);
    int d;
    if (ta.rank() == 1)
        d = ta.dim(0);
    else if (ta.rank() == 2 && ta.rows() == 1)
        d = ta.cols();
    else
        throw std::invalid_argument("broadcast_row: expected {d} or {1,d}, got " + shape_str(ta.shape()));
    Tensor out({n, d});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out.at(i, j) = ta[j];
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (int i = 0; i < go.rows(); ++i)
            for (int j = 0; j < go.cols(); ++j) ga[j] += go.at(i, j);
    };
    return o;
}

NodeId Graph::rowwise_scale(NodeId x, NodeId s) {
    const Tensor& tx = value(x);
    const Tensor& ts = value(s);
    if (tx.rank() != 2 || ts.rank() != 1 || ts.dim(0) != tx.rows())
        shape_error("rowwise_scale", tx.shape(), ts.shape());
    Tensor out = tx;
    for (int i = 0; i < tx.rows(); ++i)
        for (int j = 0; j < tx.cols(); ++j) out.at(i, j) *= ts[i];
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, x, s](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& vx = g.value(x);
        const Tensor& vs = g.value(s);
        Tensor& gx = g.grad_ref(x);
        Tensor& gs = g.grad_ref(s);
        for (int i = 0; i < go.rows(); ++i)
            for (int j = 0; j < go.cols(); ++j) {
                gx.at(i, j) += go.at(i, j) * vs[i];
                gs[i] += go.at(i, j) * vx.at(i, j);
            }
    };
    return o;
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows())
        shape_error("matmul", ta.shape(), tb.shape());
    const int n = ta.rows(), k = ta.cols(), m = tb.cols();
    Tensor out({n, m});
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
            const Real av = ta.at(i, p);
            if (av == 0.0) continue;
            for (int j = 0; j < m; ++j) out.at(i, j) += av * tb.at(p, j);
        }
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, b, n, k, m](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& va = g.value(a);
        const Tensor& vb = g.value(b);
        Tensor& ga = g.grad_ref(a);
        Tensor& gb = g.grad_ref(b);
        // ga += go * vb^T ; gb += va^T * go
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                const Real gv = go.at(i, j);
                if (gv == 0.0) continue;
                for (int p = 0; p < k; ++p) {
                    ga.at(i, p) += gv * vb.at(p, j);
                    gb.at(p, j) += va.at(i, p) * gv;
                }
            }
    };
    return o;
}

NodeId Graph::softmax(NodeId a) {
    check_rank12(a, "softmax");
    const Tensor& ta = value(a);
    const int rows = ta.rank() == 2 ? ta.rows() : 1;
    const int cols = ta.rank() == 2 ? ta.cols() : ta.dim(0);
    Tensor out = ta;
    for (int i = 0; i < rows; ++i) {
        Real* row = out.data() + static_cast<int64_t>(i) * cols;
        Real mx = row[0];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
        Real sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (int j = 0; j < cols; ++j) row[j] /= sum;
    }
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, rows, cols](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& vo = g.value(o);
        Tensor& ga = g.grad_ref(a);
        for (int i = 0; i < rows; ++i) {
            const Real* y = vo.data() + static_cast<int64_t>(i) * cols;
            const Real* dy = go.data() + static_cast<int64_t>(i) * cols;
            Real* dx = ga.data() + static_cast<int64_t>(i) * cols;
            Real dot = 0.0;
            for (int j = 0; j < cols; ++j) dot += dy[j] * y[j];
            for (int j = 0; j < cols; ++j) dx[j] += y[j] * (dy[j] - dot);
        }
    };
    return o;
}

NodeId Graph::layer_norm(NodeId x, NodeId gamma, NodeId beta, Real eps) {
    check_rank12(x, "layer_norm");
    const Tensor& tx = value(x);
    const int rows = tx.rank() == 2 ? tx.rows() : 1;
    const int cols = tx.rank() == 2 ? tx.cols() : tx.dim(0);
    const Tensor& tg = value(gamma);
    const Tensor& tb = value(beta);
    if (tg.numel() != cols || tb.numel() != cols)
        shape_error("layer_norm(affine)", tx.shape(), tg.shape());
    Tensor out = tx;
    for (int i = 0; i < rows; ++i) {
        Real* row = out.data() + static_cast<int64_t>(i) * cols;
        Real mean = 0.0;
        for (int j = 0; j < cols; ++j) mean += row[j];
        mean /= cols;
        Real var = 0.0;
        for (int j = 0; j < cols; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= cols;
        const Real inv = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < cols; ++j) row[j] = tg[j] * ((row[j] - mean) * inv) + tb[j];
    }
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, x, gamma, beta, rows, cols, eps](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& vx = g.value(x);
        const Tensor& vg = g.value(gamma);
        Tensor& gx = g.grad_ref(x);
        Tensor& gg = g.grad_ref(gamma);
        Tensor& gb = g.grad_ref(beta);
        for (int i = 0; i < rows; ++i) {
            const Real* xr = vx.data() + static_cast<int64_t>(i) * cols;
            const Real* dy = go.data() + static_cast<int64_t>(i) * cols;
            Real* dx = gx.data() + static_cast<int64_t>(i) * cols;
            Real mean = 0.0;
            for (int j = 0; j < cols; ++j) mean += xr[j];
            mean /= cols;
            Real var = 0.0;
            for (int j = 0; j < cols; ++j) var += (xr[j] - mean) * (xr[j] - mean);
            var /= cols;
            const Real inv = 1.0 / std::sqrt(var + eps);
            Real sum_dh = 0.0, sum_dh_xhat = 0.0;
            std::vector<Real> xhat(static_cast<size_t>(cols)), dh(static_cast<size_t>(cols));
            for (int j = 0; j < cols; ++j) {
                xhat[static_cast<size_t>(j)] = (xr[j] - mean) * inv;
                dh[static_cast<size_t>(j)] = dy[j] * vg[j];
                sum_dh += dh[static_cast<size_t>(j)];
                sum_dh_xhat += dh[static_cast<size_t>(j)] * xhat[static_cast<size_t>(j)];
                gg[j] += dy[j] * xhat[static_cast<size_t>(j)];
                gb[j] += dy[j];
            }
            for (int j = 0; j < cols; ++j)
                dx[j] += inv * (dh[static_cast<size_t>(j)] - sum_dh / cols -
                                xhat[static_cast<size_t>(j)] * sum_dh_xhat / cols);
        }
    };
    return o;
}

NodeId Graph::l2_norm(NodeId a) {
    check_rank12(a, "l2_norm");
    const Tensor& ta = value(a);
    const int rows = ta.rank() == 2 ? ta.rows() : 1;
    const int cols = ta.rank() == 2 ? ta.cols() : ta.dim(0);
    Tensor out({rows});
    for (int i = 0; i < rows; ++i) {
        Real s = 0.0;
        for (int j = 0; j < cols; ++j) {
            Real v = ta[static_cast<int64_t>(i) * cols + j];
            s += v * v;
        }
        out[i] = std::sqrt(s);
    }
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, rows, cols](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& vo = g.value(o);
        const Tensor& va = g.value(a);
        Tensor& ga = g.grad_ref(a);
        for (int i = 0; i < rows; ++i) {
            const Real norm = vo[i];
            if (norm == 0.0) continue;  // subgradient 0 at the origin
            for (int j = 0; j < cols; ++j)
                ga[static_cast<int64_t>(i) * cols + j] +=
                    go[i] * va[static_cast<int64_t>(i) * cols + j] / norm;
        }
    };
    return o;
}

NodeId Graph::mean_pool(NodeId a, int axis) {
    const Tensor& ta = value(a);
    if (ta.rank() != 2 || (axis != 0 && axis != 1))
        throw std::invalid_argument("mean_pool: expected rank 2 and axis 0/1, got " +
                                    shape_str(ta.shape()));
    const int n = ta.rows(), m = ta.cols();
    if (axis == 0) {
        Tensor out({m});
        for (int j = 0; j < m; ++j) {
            Real s = 0.0;
            for (int i = 0; i < n; ++i) s += ta.at(i, j);
            out[j] = s / n;
        }
        NodeId o = make(std::move(out), nullptr);
        nodes_.back().back = [o, a, n, m](Graph& g) {
            const Tensor& go = g.grad(o);
            Tensor& ga = g.grad_ref(a);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) ga.at(i, j) += go[j] / n;
        };
        return o;
    }
    Tensor out({n});
    for (int i = 0; i < n; ++i) {
        Real s = 0.0;
        for (int j = 0; j < m; ++j) s += ta.at(i, j);
        out[i] = s / m;
    }
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, a, n, m](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& ga = g.grad_ref(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) ga.at(i, j) += go[i] / m;
    };
    return o;
}

NodeId Graph::sum_all(NodeId a) {
    const Tensor& ta = value(a);
    Real s = 0.0;
    for (int64_t i = 0; i < ta.numel(); ++i) s += ta[i];
    NodeId o = make(Tensor::scalar(s), nullptr);
    nodes_.back().back = [o, a](Graph& g) {
        const Real go = g.grad(o)[0];
        Tensor& ga = g.grad_ref(a);
        for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += go;
    };
    return o;
}

NodeId Graph::conv1d(NodeId x, NodeId w, NodeId b) {
    const Tensor& tx = value(x);
    const Tensor& tw = value(w);
    const Tensor& tb = value(b);
    if (tx.rank() != 2 || tw.rank() != 3 || tw.dim(1) != tx.cols())
        shape_error("conv1d", tx.shape(), tw.shape());
    const int T = tx.rows(), ci = tx.cols(), co = tw.dim(0), K = tw.dim(2);
    if (K % 2 == 0) throw std::invalid_argument("conv1d: kernel size must be odd");
    if (tb.numel() != co) shape_error("conv1d(bias)", tw.shape(), tb.shape());
    const int pad = K / 2;
    Tensor out({T, co});
    for (int t = 0; t < T; ++t)
        for (int oc = 0; oc < co; ++oc) {
            Real s = tb[oc];
            for (int k = 0; k < K; ++k) {
                const int src = t + k - pad;
                if (src < 0 || src >= T) continue;
                const Real* xr = tx.data() + static_cast<int64_t>(src) * ci;
                const Real* wr = tw.data() + (static_cast<int64_t>(oc) * ci) * K + k;
                for (int c = 0; c < ci; ++c) s += xr[c] * wr[static_cast<int64_t>(c) * K];
            }
            out.at(t, oc) = s;
        }
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, x, w, b, T, ci, co, K, pad](Graph& g) {
        const Tensor& go = g.grad(o);
        const Tensor& vx = g.value(x);
        const Tensor& vw = g.value(w);
        Tensor& gx = g.grad_ref(x);
        Tensor& gw = g.grad_ref(w);
        Tensor& gb = g.grad_ref(b);
        for (int t = 0; t < T; ++t)
            for (int oc = 0; oc < co; ++oc) {
                const Real gv = go.at(t, oc);
                if (gv == 0.0) continue;
                gb[oc] += gv;
                for (int k = 0; k < K; ++k) {
                    const int src = t + k - pad;
                    if (src < 0 || src >= T) continue;
                    for (int c = 0; c < ci; ++c) {
                        const int64_t wi = (static_cast<int64_t>(oc) * ci + c) * K + k;
                        gx.at(src, c) += gv * vw[wi];
                        gw[wi] += gv * vx.at(src, c);
                    }
                }
            }
    };
    return o;
}

NodeId Graph::window_pool(NodeId x, const std::vector<std::pair<int, int>>& windows, int samples) {
    const Tensor& tx = value(x);
    if (tx.rank() != 2) throw std::invalid_argument("window_pool: expected rank 2 input");
    if (samples < 1) throw std::invalid_argument("window_pool: samples must be >= 1");
    const int T = tx.rows(), C = tx.cols();
    const int W = static_cast<int>(windows.size());
    // Precompute interpolation taps: (row, weight) pairs per window.
    struct Tap {
        int row;
        Real wgt;
    };
    auto taps = std::make_shared<std::vector<std::vector<Tap>>>();
    taps->reserve(windows.size());
    for (auto [start, len] : windows) {
        if (len < 1 || start < 0 || start + len > T)
            throw std::invalid_argument("window_pool: window [" + std::to_string(start) + ", len " +
                                        std::to_string(len) + "] out of range for T=" + std::to_string(T));
        std::vector<Tap> wt;
        for (int k = 0; k < samples; ++k) {
            const Real pos = samples == 1
                                 ? static_cast<Real>(start)
                                 : start + static_cast<Real>(len - 1) * k / (samples - 1);
            const int lo = static_cast<int>(std::floor(pos));
            const Real frac = pos - lo;
            if (frac == 0.0 || lo + 1 >= T) {
                wt.push_back({lo, 1.0 / samples});
            } else {
                wt.push_back({lo, (1.0 - frac) / samples});
                wt.push_back({lo + 1, frac / samples});
            }
        }
        taps->push_back(std::move(wt));
    }
    Tensor out({W, C});
    for (int wi = 0; wi < W; ++wi)
        for (const auto& tap : (*taps)[static_cast<size_t>(wi)])
            for (int c = 0; c < C; ++c) out.at(wi, c) += tap.wgt * tx.at(tap.row, c);
    NodeId o = make(std::move(out), nullptr);
    nodes_.back().back = [o, x, taps, W, C](Graph& g) {
        const Tensor& go = g.grad(o);
        Tensor& gx = g.grad_ref(x);
        for (int wi = 0; wi < W; ++wi)
            for (const auto& tap : (*taps)[static_cast<size_t>(wi)])
                for (int c = 0; c < C; ++c) gx.at(tap.row, c) += tap.wgt * go.at(wi, c);
    };
    return o;
}

NodeId Graph::weighted_bll_loss(NodeId p, const std::vector<Real>& labels) {
    const Tensor& tp = value(p);
    if (tp.numel() != static_cast<int64_t>(labels.size()))
        throw std::invalid_argument("weighted_bll_loss: prediction/label length mismatch (" +
                                    std::to_string(tp.numel()) + " vs " +
                                    std::to_string(labels.size()) + ")");
    constexpr Real kClamp = 1e-6;
    int64_t npos = 0, nneg = 0;
    for (Real l : labels) (l > 0.5 ? npos : nneg)++;
    const Real wpos = npos > 0 ? 1.0 / npos : 0.0;
    const Real wneg = nneg > 0 ? 1.0 / nneg : 0.0;
    Real loss = 0.0;
    for (int64_t i = 0; i < tp.numel(); ++i) {
        const Real pv = std::clamp(tp[i], kClamp, 1.0 - kClamp);
        const Real l = labels[static_cast<size_t>(i)];
        loss -= l * wpos * std::log(pv) + (1.0 - l) * wneg * std::log(1.0 - pv);
    }
    NodeId o = make(Tensor::scalar(loss), nullptr);
    auto lbl = std::make_shared<std::vector<Real>>(labels);
    nodes_.back().back = [o, p, lbl, wpos, wneg](Graph& g) {
        const Real go = g.grad(o)[0];
        const Tensor& vp = g.value(p);
        Tensor& gp = g.grad_ref(p);
        for (int64_t i = 0; i < vp.numel(); ++i) {
            const Real pv = vp[i];
            if (pv <= kClamp || pv >= 1.0 - kClamp) continue;  // clamped region: zero grad
            const Real l = (*lbl)[static_cast<size_t>(i)];
            gp[i] += go * (-(l * wpos / pv) + (1.0 - l) * wneg / (1.0 - pv));
        }
    };
    return o;
}

NodeId Graph::mse_loss(NodeId p, const std::vector<Real>& labels) {
    const Tensor& tp = value(p);
    if (tp.numel() != static_cast<int64_t>(labels.size()))
        throw std::invalid_argument("mse_loss: prediction/label length mismatch");
    const int64_t n = tp.numel();
    Real loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const Real d = tp[i] - labels[static_cast<size_t>(i)];
        loss += d * d;
    }
    loss /= static_cast<Real>(n);
    NodeId o = make(Tensor::scalar(loss), nullptr);
    auto lbl = std::make_shared<std::vector<Real>>(labels);
    nodes_.back().back = [o, p, lbl, n](Graph& g) {
        const Real go = g.grad(o)[0];
        const Tensor& vp = g.value(p);
        Tensor& gp = g.grad_ref(p);
        for (int64_t i = 0; i < n; ++i)
            gp[i] += go * 2.0 * (vp[i] - (*lbl)[static_cast<size_t>(i)]) / static_cast<Real>(n);
    };
    return o;
}

void Graph::backward(NodeId loss) {
    if (backward_done_)
        throw std::logic_error("Graph::backward: backward already ran on this graph");
    if (value(loss).numel() != 1)
        throw std::invalid_argument("Graph::backward: loss must be a scalar node");
    backward_done_ = true;
    grad_ref(loss)[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
        auto& node = nodes_[static_cast<size_t>(id)];
        if (node.back) node.back(*this);
    }
}

}  // namespace aei::nn
