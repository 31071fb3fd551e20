#include "sea/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sea/error.hpp"

namespace sea {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void check_finite(const Tensor& t, const char* op) {
    for (double x : t.values())
        if (!std::isfinite(x)) fail(op, ": non-finite output value");
}

Tape* tape_of(const Tensor& a) { return a.node() >= 0 ? a.tape() : nullptr; }

Tape* tape_of(const Tensor& a, const Tensor& b) {
    Tape* ta = tape_of(a);
    Tape* tb = tape_of(b);
    if (ta && tb) require(ta == tb, "op: inputs recorded on different tapes");
    return ta ? ta : tb;
}

// Value-only helpers used by forward computations and backward closures.

Tensor raw_matmul(const Tensor& a, const Tensor& b) {
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    Tensor out({n, p});
    const double* av = a.values().data();
    const double* bv = b.values().data();
    double* ov = out.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = av[i * m + k];
            if (aik == 0.0) continue;
            const double* brow = bv + k * p;
            double* orow = ov + i * p;
            for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor raw_transpose(const Tensor& a) {
    Tensor out({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    return out;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.shape() == b.shape(), op, ": shape mismatch ", a.shape_str(),
            " vs ", b.shape_str());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), v_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), v_(std::move(values)) {
    require(v_.size() == shape_size(shape_),
            "tensor: value count ", v_.size(), " != shape product ",
            shape_size(shape_));
}

Tensor Tensor::scalar(double v) { return Tensor({1, 1}, {v}); }

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
    return Tensor({rows, cols});
}

Tensor Tensor::row(std::initializer_list<double> vs) {
    return Tensor({1, vs.size()}, std::vector<double>(vs));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> vs) {
    return Tensor({rows, cols}, std::vector<double>(vs));
}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape_[i]);
    }
    return s + ")";
}

double Tensor::item() const {
    require(v_.size() == 1, "tensor: item() on non-scalar ", shape_str());
    return v_[0];
}

Tensor Tape::leaf(const Tensor& t) {
    Tensor out = t.detach();
    out.tape_ = this;
    out.node_ = static_cast<int>(records_.size());
    records_.push_back({{}, nullptr, out.shape()});
    return out;
}

Tensor Tape::record(Tensor out, std::vector<int> inputs, BackwardFn back) {
    out.tape_ = this;
    out.node_ = static_cast<int>(records_.size());
    records_.push_back({std::move(inputs), std::move(back), out.shape()});
    return out;
}

std::vector<Tensor> Tape::backward(const Tensor& loss) const {
    require(loss.size() == 1, "backward: loss must be scalar, got ",
            loss.shape_str());
    require(loss.node() >= 0 && loss.tape() == this,
            "backward: loss is not recorded on this tape");

    std::vector<Tensor> grads(records_.size());
    grads[loss.node()] = Tensor(loss.shape(), {1.0});

    for (int id = loss.node(); id >= 0; --id) {
        const Record& rec = records_[id];
        if (grads[id].empty() || !rec.back) continue;
        std::vector<Tensor> gs = rec.back(grads[id]);
        require(gs.size() == rec.inputs.size(),
                "backward: rule returned wrong input count");
        for (std::size_t j = 0; j < gs.size(); ++j) {
            const int in = rec.inputs[j];
            if (in < 0 || gs[j].empty()) continue;
            check_finite(gs[j], "backward");
            if (grads[in].empty()) {
                grads[in] = std::move(gs[j]);
            } else {
                auto& acc = grads[in].values();
                const auto& add = gs[j].values();
                for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += add[k];
            }
        }
    }
    for (std::size_t id = 0; id < records_.size(); ++id)
        if (grads[id].empty()) grads[id] = Tensor(records_[id].shape);
    return grads;
}

const Tensor& Tape::grad_of(const std::vector<Tensor>& grads,
                            const Tensor& tracked) {
    require(tracked.node() >= 0, "grad_of: tensor is not tracked");
    return grads[tracked.node()];
}

// ---- primitive ops ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.shape().size() == 2 && b.shape().size() == 2 &&
                a.cols() == b.rows(),
            "matmul: incompatible shapes ", a.shape_str(), " x ", b.shape_str());
    Tensor out = raw_matmul(a, b);
    check_finite(out, "matmul");
    if (Tape* t = tape_of(a, b)) {
        Tensor av = a.detach(), bv = b.detach();
        return t->record(std::move(out), {a.node(), b.node()},
                         [av, bv](const Tensor& g) {
                             std::vector<Tensor> gs(2);
                             gs[0] = raw_matmul(g, raw_transpose(bv));
                             gs[1] = raw_matmul(raw_transpose(av), g);
                             return gs;
                         });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out(a.shape(), a.values());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
    check_finite(out, "add");
    if (Tape* t = tape_of(a, b)) {
        return t->record(std::move(out), {a.node(), b.node()},
                         [](const Tensor& g) {
                             return std::vector<Tensor>{g, g};
                         });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out(a.shape(), a.values());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
    check_finite(out, "sub");
    if (Tape* t = tape_of(a, b)) {
        return t->record(std::move(out), {a.node(), b.node()},
                         [](const Tensor& g) {
                             Tensor neg(g.shape(), g.values());
                             for (double& x : neg.values()) x = -x;
                             return std::vector<Tensor>{g, std::move(neg)};
                         });
    }
    return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& row) {
    require(row.rows() == 1 && row.cols() == a.cols(),
            "add_rowvec: shape mismatch ", a.shape_str(), " vs ",
            row.shape_str());
    Tensor out(a.shape(), a.values());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out.at(i, j) += row.at(0, j);
    check_finite(out, "add_rowvec");
    if (Tape* t = tape_of(a, row)) {
        const std::size_t r = a.rows(), c = a.cols();
        return t->record(std::move(out), {a.node(), row.node()},
                         [r, c](const Tensor& g) {
                             Tensor gr({1, c});
                             for (std::size_t i = 0; i < r; ++i)
                                 for (std::size_t j = 0; j < c; ++j)
                                     gr.at(0, j) += g.at(i, j);
                             return std::vector<Tensor>{g, std::move(gr)};
                         });
    }
    return out;
}

Tensor mul_elementwise(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul_elementwise");
    Tensor out(a.shape(), a.values());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
    check_finite(out, "mul_elementwise");
    if (Tape* t = tape_of(a, b)) {
        Tensor av = a.detach(), bv = b.detach();
        return t->record(std::move(out), {a.node(), b.node()},
                         [av, bv](const Tensor& g) {
                             std::vector<Tensor> gs(2);
                             gs[0] = Tensor(g.shape(), g.values());
                             gs[1] = Tensor(g.shape(), g.values());
                             for (std::size_t i = 0; i < g.size(); ++i) {
                                 gs[0].values()[i] *= bv.values()[i];
                                 gs[1].values()[i] *= av.values()[i];
                             }
                             return gs;
                         });
    }
    return out;
}

Tensor scale(const Tensor& a, double c) {
    require(std::isfinite(c), "scale: non-finite factor");
    Tensor out(a.shape(), a.values());
    for (double& x : out.values()) x *= c;
    check_finite(out, "scale");
    if (Tape* t = tape_of(a)) {
        return t->record(std::move(out), {a.node()}, [c](const Tensor& g) {
            Tensor gs(g.shape(), g.values());
            for (double& x : gs.values()) x *= c;
            return std::vector<Tensor>{std::move(gs)};
        });
    }
    return out;
}

Tensor scale_rows(const Tensor& a, const Tensor& col) {
    require(col.rows() == a.rows() && col.cols() == 1,
            "scale_rows: shape mismatch ", a.shape_str(), " vs ",
            col.shape_str());
    Tensor out(a.shape(), a.values());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out.at(i, j) *= col.at(i, 0);
    check_finite(out, "scale_rows");
    if (Tape* t = tape_of(a, col)) {
        Tensor av = a.detach(), cv = col.detach();
        return t->record(
            std::move(out), {a.node(), col.node()}, [av, cv](const Tensor& g) {
                std::vector<Tensor> gs(2);
                gs[0] = Tensor(g.shape(), g.values());
                gs[1] = Tensor({av.rows(), 1});
                for (std::size_t i = 0; i < av.rows(); ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < av.cols(); ++j) {
                        gs[0].at(i, j) *= cv.at(i, 0);
                        s += g.at(i, j) * av.at(i, j);
                    }
                    gs[1].at(i, 0) = s;
                }
                return gs;
            });
    }
    return out;
}

Tensor concat_last_dim(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_last_dim: empty input list");
    const std::size_t r = parts[0].rows();
    std::size_t total = 0;
    Tape* t = nullptr;
    for (const Tensor& p : parts) {
        require(p.rows() == r, "concat_last_dim: row mismatch ", p.shape_str());
        total += p.cols();
        if (p.node() >= 0) {
            require(!t || t == p.tape(), "concat_last_dim: mixed tapes");
            t = p.tape();
        }
    }
    Tensor out({r, total});
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j)
                out.at(i, off + j) = p.at(i, j);
        off += p.cols();
    }
    check_finite(out, "concat_last_dim");
    if (t) {
        std::vector<int> inputs;
        std::vector<std::size_t> widths;
        for (const Tensor& p : parts) {
            inputs.push_back(p.node());
            widths.push_back(p.cols());
        }
        return t->record(std::move(out), std::move(inputs),
                         [r, widths](const Tensor& g) {
                             std::vector<Tensor> gs;
                             std::size_t off2 = 0;
                             for (std::size_t w : widths) {
                                 Tensor part({r, w});
                                 for (std::size_t i = 0; i < r; ++i)
                                     for (std::size_t j = 0; j < w; ++j)
                                         part.at(i, j) = g.at(i, off2 + j);
                                 gs.push_back(std::move(part));
                                 off2 += w;
                             }
                             return gs;
                         });
    }
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_rows: empty input list");
    const std::size_t c = parts[0].cols();
    std::size_t total = 0;
    Tape* t = nullptr;
    for (const Tensor& p : parts) {
        require(p.cols() == c, "concat_rows: column mismatch ", p.shape_str());
        total += p.rows();
        if (p.node() >= 0) {
            require(!t || t == p.tape(), "concat_rows: mixed tapes");
            t = p.tape();
        }
    }
    Tensor out({total, c});
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        std::copy(p.values().begin(), p.values().end(),
                  out.values().begin() + off * c);
        off += p.rows();
    }
    check_finite(out, "concat_rows");
    if (t) {
        std::vector<int> inputs;
        std::vector<std::size_t> heights;
        for (const Tensor& p : parts) {
            inputs.push_back(p.node());
            heights.push_back(p.rows());
        }
        return t->record(std::move(out), std::move(inputs),
                         [c, heights](const Tensor& g) {
                             std::vector<Tensor> gs;
                             std::size_t off2 = 0;
                             for (std::size_t h : heights) {
                                 Tensor part({h, c});
                                 std::copy(g.values().begin() + off2 * c,
                                           g.values().begin() + (off2 + h) * c,
                                           part.values().begin());
                                 gs.push_back(std::move(part));
                                 off2 += h;
                             }
                             return gs;
                         });
    }
    return out;
}

Tensor relu(const Tensor& a) {
    Tensor out(a.shape(), a.values());
    for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
    check_finite(out, "relu");
    if (Tape* t = tape_of(a)) {
        std::vector<char> pos(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) pos[i] = a.values()[i] > 0.0;
        return t->record(std::move(out), {a.node()},
                         [pos](const Tensor& g) {
                             Tensor gs(g.shape(), g.values());
                             for (std::size_t i = 0; i < gs.size(); ++i)
                                 if (!pos[i]) gs.values()[i] = 0.0;
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor softplus(const Tensor& a) {
    Tensor out(a.shape(), a.values());
    for (double& x : out.values())
        x = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    check_finite(out, "softplus");
    if (Tape* t = tape_of(a)) {
        Tensor av = a.detach();
        return t->record(std::move(out), {a.node()},
                         [av](const Tensor& g) {
                             Tensor gs(g.shape(), g.values());
                             for (std::size_t i = 0; i < gs.size(); ++i) {
                                 const double x = av.values()[i];
                                 const double sig =
                                     x > 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                             : std::exp(x) / (1.0 + std::exp(x));
                                 gs.values()[i] *= sig;
                             }
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor sum_rows(const Tensor& a) {
    Tensor out({a.rows(), 1});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a.at(i, j);
        out.at(i, 0) = s;
    }
    check_finite(out, "sum_rows");
    if (Tape* t = tape_of(a)) {
        const std::size_t r = a.rows(), c = a.cols();
        return t->record(std::move(out), {a.node()},
                         [r, c](const Tensor& g) {
                             Tensor gs({r, c});
                             for (std::size_t i = 0; i < r; ++i)
                                 for (std::size_t j = 0; j < c; ++j)
                                     gs.at(i, j) = g.at(i, 0);
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor sum_all(const Tensor& a) {
    double s = std::accumulate(a.values().begin(), a.values().end(), 0.0);
    Tensor out = Tensor::scalar(s);
    check_finite(out, "sum_all");
    if (Tape* t = tape_of(a)) {
        auto shape = a.shape();
        return t->record(std::move(out), {a.node()},
                         [shape](const Tensor& g) {
                             Tensor gs(shape);
                             for (double& x : gs.values()) x = g.values()[0];
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
    const std::size_t c = a.cols();
    Tensor out({idx.size(), c});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < a.rows(),
                "gather_rows: index ", idx[i], " out of range for ",
                a.shape_str());
        std::copy(a.values().begin() + idx[i] * c,
                  a.values().begin() + (idx[i] + 1) * c,
                  out.values().begin() + i * c);
    }
    check_finite(out, "gather_rows");
    if (Tape* t = tape_of(a)) {
        const std::size_t src_rows = a.rows();
        return t->record(std::move(out), {a.node()},
                         [idx, src_rows, c](const Tensor& g) {
                             Tensor gs({src_rows, c});
                             for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t j = 0; j < c; ++j)
                                     gs.at(idx[i], j) += g.at(i, j);
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor scatter_add_rows(const Tensor& a, const std::vector<int>& idx,
                        std::size_t out_rows) {
    require(idx.size() == a.rows(), "scatter_add_rows: ", idx.size(),
            " indices for ", a.rows(), " rows");
    const std::size_t c = a.cols();
    Tensor out({out_rows, c});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < out_rows,
                "scatter_add_rows: index ", idx[i], " out of range for ",
                out_rows, " rows");
        for (std::size_t j = 0; j < c; ++j) out.at(idx[i], j) += a.at(i, j);
    }
    check_finite(out, "scatter_add_rows");
    if (Tape* t = tape_of(a)) {
        return t->record(std::move(out), {a.node()},
                         [idx, c](const Tensor& g) {
                             Tensor gs({idx.size(), c});
                             for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t j = 0; j < c; ++j)
                                     gs.at(i, j) = g.at(idx[i], j);
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor scatter_max_rows(const Tensor& a, const std::vector<int>& idx,
                        std::size_t out_rows) {
    require(idx.size() == a.rows(), "scatter_max_rows: ", idx.size(),
            " indices for ", a.rows(), " rows");
    const std::size_t c = a.cols();
    Tensor out({out_rows, c});
    // argmax source row per output cell; -1 marks "no contribution" (stays 0).
    std::vector<int> arg(out_rows * c, -1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < out_rows,
                "scatter_max_rows: index ", idx[i], " out of range");
        for (std::size_t j = 0; j < c; ++j) {
            const std::size_t cell = idx[i] * c + j;
            if (arg[cell] < 0 || a.at(i, j) > out.values()[cell]) {
                out.values()[cell] = a.at(i, j);
                arg[cell] = static_cast<int>(i);
            }
        }
    }
    check_finite(out, "scatter_max_rows");
    if (Tape* t = tape_of(a)) {
        const std::size_t in_rows = a.rows();
        return t->record(std::move(out), {a.node()},
                         [arg, in_rows, c](const Tensor& g) {
                             Tensor gs({in_rows, c});
                             for (std::size_t cell = 0; cell < arg.size(); ++cell)
                                 if (arg[cell] >= 0)
                                     gs.at(arg[cell], cell % c) +=
                                         g.values()[cell];
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor reshape(const Tensor& a, std::vector<std::size_t> shape) {
    require(shape_size(shape) == a.size(), "reshape: size mismatch ",
            a.shape_str());
    Tensor out(shape, a.values());
    if (Tape* t = tape_of(a)) {
        auto orig = a.shape();
        return t->record(std::move(out), {a.node()},
                         [orig](const Tensor& g) {
                             return std::vector<Tensor>{Tensor(orig, g.values())};
                         });
    }
    return out;
}

Tensor masked_row_softmax(const Tensor& scores, const Tensor& mask) {
    check_same_shape(scores, mask, "masked_row_softmax");
    const std::size_t r = scores.rows(), c = scores.cols();
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c; ++j)
            if (mask.at(i, j) != 0.0) mx = std::max(mx, scores.at(i, j));
        if (mx == -std::numeric_limits<double>::infinity()) continue;  // all masked
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            if (mask.at(i, j) != 0.0) {
                out.at(i, j) = std::exp(scores.at(i, j) - mx);
                z += out.at(i, j);
            }
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
    }
    check_finite(out, "masked_row_softmax");
    if (Tape* t = tape_of(scores)) {
        Tensor y = out.detach();
        Tensor res = t->record(
            std::move(out), {scores.node()}, [y](const Tensor& g) {
                // ds = y * (g - sum_j g_j y_j) per row; zero on masked entries
                // (their y is 0).
                Tensor gs(y.shape());
                for (std::size_t i = 0; i < y.rows(); ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        dot += g.at(i, j) * y.at(i, j);
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        gs.at(i, j) = y.at(i, j) * (g.at(i, j) - dot);
                }
                return std::vector<Tensor>{std::move(gs)};
            });
        return res;
    }
    return out;
}

Tensor log_softmax_rows(const Tensor& a) {
    const std::size_t r = a.rows(), c = a.cols();
    require(c >= 1, "log_softmax_rows: empty rows");
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double mx = a.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, a.at(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(a.at(i, j) - mx);
        const double lse = mx + std::log(z);
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = a.at(i, j) - lse;
    }
    check_finite(out, "log_softmax_rows");
    if (Tape* t = tape_of(a)) {
        Tensor y = out.detach();
        return t->record(std::move(out), {a.node()},
                         [y](const Tensor& g) {
                             Tensor gs(y.shape());
                             for (std::size_t i = 0; i < y.rows(); ++i) {
                                 double gsum = 0.0;
                                 for (std::size_t j = 0; j < y.cols(); ++j)
                                     gsum += g.at(i, j);
                                 for (std::size_t j = 0; j < y.cols(); ++j)
                                     gs.at(i, j) = g.at(i, j) -
                                                   std::exp(y.at(i, j)) * gsum;
                             }
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

Tensor pick_per_row(const Tensor& a, const std::vector<int>& idx) {
    require(idx.size() == a.rows(), "pick_per_row: ", idx.size(),
            " indices for ", a.rows(), " rows");
    Tensor out({a.rows(), 1});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < a.cols(),
                "pick_per_row: column ", idx[i], " out of range for ",
                a.shape_str());
        out.at(i, 0) = a.at(i, idx[i]);
    }
    check_finite(out, "pick_per_row");
    if (Tape* t = tape_of(a)) {
        const std::size_t r = a.rows(), c = a.cols();
        return t->record(std::move(out), {a.node()},
                         [idx, r, c](const Tensor& g) {
                             Tensor gs({r, c});
                             for (std::size_t i = 0; i < r; ++i)
                                 gs.at(i, idx[i]) = g.at(i, 0);
                             return std::vector<Tensor>{std::move(gs)};
                         });
    }
    return out;
}

double finite_diff_gradcheck(const std::function<Tensor(const Tensor&)>& f,
                             const Tensor& x, double h) {
    Tape tape;
    Tensor xt = tape.leaf(x);
    Tensor loss = f(xt);
    require(loss.size() == 1, "gradcheck: function must return a scalar");
    // A loss that never touched x has zero gradient everywhere.
    Tensor analytic(x.shape());
    if (loss.node() >= 0) {
        auto grads = tape.backward(loss);
        analytic = Tape::grad_of(grads, xt);
    }

    double worst = 0.0;
    Tensor xp = x.detach();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = xp.values()[i];
        xp.values()[i] = orig + h;
        const double up = f(xp).item();
        xp.values()[i] = orig - h;
        const double dn = f(xp).item();
        xp.values()[i] = orig;
        require(std::isfinite(up) && std::isfinite(dn),
                "gradcheck: non-finite evaluation");
        const double numeric = (up - dn) / (2.0 * h);
        const double a = analytic.values()[i];
        const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    return worst;
}

}  // namespace sea
