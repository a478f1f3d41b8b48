#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Reverse-mode autodiff over dense double tensors. Define-by-run: every op
// records a node with a backward closure; backward(loss) walks the graph in
// reverse topological order. Only the operations the dialog model and its
// losses need are provided; no general broadcasting.
namespace galaxy::ad {

class OpError : public std::runtime_error {
public:
    OpError(std::string op, const std::string& msg)
        : std::runtime_error(op + ": " + msg), op_(std::move(op)) {}
    const std::string& op() const { return op_; }

private:
    std::string op_;
};

using Shape = std::vector<size_t>;

size_t numel_of(const Shape& s);
std::string shape_str(const Shape& s);

struct Node {
    Shape shape;
    std::vector<double> v;
    std::vector<double> g; // lazily allocated, same size as v
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backfn; // push this->g into parents' g

    void ensure_grad() {
        if (g.size() != v.size()) g.assign(v.size(), 0.0);
    }
};

/// Value-semantics handle to a shared graph node.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const { return node().shape; }
    size_t numel() const { return node().v.size(); }
    size_t rows() const;
    size_t cols() const;

    const std::vector<double>& values() const { return node().v; }
    /// Leaf mutation only (parameters, test perturbations); results of ops
    /// must not be written through.
    std::vector<double>& mutable_values() { return node().v; }

    bool has_grad() const { return node().g.size() == node().v.size(); }
    const std::vector<double>& grad() const;
    std::vector<double>& mutable_grad();
    void zero_grad() { node().g.assign(node().v.size(), 0.0); }

    bool requires_grad() const { return node().requires_grad; }
    double item() const;

    std::shared_ptr<Node> raw() const { return n_; }

private:
    friend Tensor wrap(std::shared_ptr<Node> n);
    Node& node() const {
        if (!n_) throw OpError("tensor", "use of empty tensor");
        return *n_;
    }
    std::shared_ptr<Node> n_;
};

/// Precomputed inverted-dropout mask: identical (key, size, keep_prob)
/// always yields the identical mask; kept entries are scaled by 1/keep_prob.
struct DropoutMask {
    double keep_prob = 1.0;
    uint64_t key = 0;
    std::vector<uint8_t> keep;

    static DropoutMask make(size_t numel, double keep_prob, uint64_t key);
};

// --- forward ops ------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);    // (m,k)@(k,n)
Tensor matmul_nt(const Tensor& a, const Tensor& b); // (m,k)@(n,k)^T
Tensor add(const Tensor& a, const Tensor& b);       // same shape
Tensor add_rowvec(const Tensor& a, const Tensor& v);// (m,n) + (n) per row
Tensor multiply(const Tensor& a, const Tensor& b);  // elementwise
Tensor affine(const Tensor& x, double mul, double shift); // mul*x + shift
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);
Tensor softmax_rows(const Tensor& x);               // last axis
/// Softmax restricted to positions where allow!=0 (row-major over x);
/// disallowed outputs are exactly 0. Each row needs >=1 allowed entry.
Tensor masked_softmax_rows(const Tensor& x, const std::vector<uint8_t>& allow);
Tensor sigmoid(const Tensor& x);
Tensor tanh_op(const Tensor& x);
Tensor gelu(const Tensor& x);
Tensor log_op(const Tensor& x);                     // domain error on x <= 0
Tensor exp_op(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi); // zero grad outside range
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-6);               // per row
Tensor dropout(const Tensor& x, const DropoutMask& mask);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, size_t r0, size_t r1);
Tensor slice_cols(const Tensor& x, size_t c0, size_t c1);
Tensor reduce_sum(const Tensor& x);                 // -> scalar
Tensor reduce_mean(const Tensor& x);                // -> scalar
/// Per-row log softmax(x)[target]: (m,n) + m targets -> (m) log-probs.
Tensor rows_log_prob(const Tensor& logits, const std::vector<int>& targets);

/// Stops gradient flow; values shared read-only.
Tensor detach(const Tensor& x);

// --- backward ---------------------------------------------------------

/// Populates grad for every requires-grad tensor reachable from `loss`
/// (scalar). Repeated calls accumulate until zero_grad.
void backward(const Tensor& loss, double seed = 1.0);

// --- finite-difference gradient checking ------------------------------

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> per_param;
    double max_rel_err = 0.0;
    bool pass(double tol) const { return max_rel_err <= tol; }
};

/// Central differences against the analytic gradient of f() (a scalar graph
/// over the given leaf parameters; must be deterministic). Relative error
/// uses |a-n| / max(|a|,|n|,1e-8), which falls back to the absolute
/// difference when both gradients vanish.
GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double step, double tol);

} // namespace galaxy::ad
