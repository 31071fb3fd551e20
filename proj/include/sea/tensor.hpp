#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace sea {

class Tape;

// Dense row-major array of 64-bit floats. A tensor produced by an op on
// tracked inputs carries a node id into the recording tape; plain tensors
// have node() == -1 and behave as constants.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor zeros(std::size_t rows, std::size_t cols);
    static Tensor row(std::initializer_list<double> vs);
    static Tensor matrix(std::size_t rows, std::size_t cols,
                         std::initializer_list<double> vs);

    bool empty() const { return shape_.empty(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return v_.size(); }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
    std::string shape_str() const;

    double& at(std::size_t i, std::size_t j) { return v_[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return v_[i * cols() + j]; }
    double item() const;

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    int node() const { return node_; }
    Tape* tape() const { return tape_; }

    // Detached copy of the values (constant, off-tape).
    Tensor detach() const { return Tensor(shape_, v_); }

private:
    friend class Tape;
    std::vector<std::size_t> shape_;
    std::vector<double> v_;
    int node_ = -1;
    Tape* tape_ = nullptr;
};

// Recorded computation for reverse-mode differentiation. Ops append one
// record each; backward replays them once in reverse order with a fixed
// accumulation order, so repeated calls are bit-identical.
class Tape {
public:
    // Given the gradient of the loss w.r.t. the record's output, returns the
    // gradients w.r.t. the tracked inputs (aligned with the input id list;
    // an empty tensor means "no contribution").
    using BackwardFn = std::function<std::vector<Tensor>(const Tensor&)>;

    // Registers a differentiable leaf (e.g. a parameter) and returns the
    // tracked copy.
    Tensor leaf(const Tensor& t);

    // Records an op. Returns out with tape binding attached.
    Tensor record(Tensor out, std::vector<int> inputs, BackwardFn back);

    std::size_t num_nodes() const { return records_.size(); }

    // Gradient of the scalar loss w.r.t. every node; indexed by node id.
    // Unreached nodes get zero tensors of the right shape.
    std::vector<Tensor> backward(const Tensor& loss) const;

    static const Tensor& grad_of(const std::vector<Tensor>& grads,
                                 const Tensor& tracked);

private:
    struct Record {
        std::vector<int> inputs;
        BackwardFn back;                 // null for leaves
        std::vector<std::size_t> shape;  // output shape, for zero grads
    };
    std::vector<Record> records_;
};

// ---- primitive ops ---------------------------------------------------------
// Every op checks shapes, traps non-finite outputs, and records exactly one
// tape node when any input is tracked.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& a, const Tensor& row);  // row shape (1, cols)
Tensor mul_elementwise(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor scale_rows(const Tensor& a, const Tensor& col);  // col shape (rows, 1)
Tensor concat_last_dim(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor relu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor sum_rows(const Tensor& a);  // (r, c) -> (r, 1)
Tensor sum_all(const Tensor& a);   // -> (1, 1)
Tensor gather_rows(const Tensor& a, const std::vector<int>& idx);
Tensor scatter_add_rows(const Tensor& a, const std::vector<int>& idx,
                        std::size_t out_rows);
Tensor scatter_max_rows(const Tensor& a, const std::vector<int>& idx,
                        std::size_t out_rows);  // empty rows -> 0
Tensor reshape(const Tensor& a, std::vector<std::size_t> shape);

// Row softmax over the unmasked entries (mask != 0). Masked entries give 0;
// a fully masked row gives all zeros.
Tensor masked_row_softmax(const Tensor& scores, const Tensor& mask);
Tensor log_softmax_rows(const Tensor& a);
Tensor pick_per_row(const Tensor& a, const std::vector<int>& idx);  // -> (r, 1)

// ---- verification ----------------------------------------------------------

// Max over coordinates of |analytic - central difference| scaled by
// max(1, |analytic|, |numeric|). The callable must build a scalar loss from
// the (tracked) input tensor.
double finite_diff_gradcheck(const std::function<Tensor(const Tensor&)>& f,
                             const Tensor& x, double h = 1e-5);

}  // namespace sea
