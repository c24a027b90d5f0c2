#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "simmst/error.hpp"

namespace simmst {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);
std::vector<int64_t> row_major_strides(const Shape& shape);

// Broadcast two shapes numpy-style; throws DimensionError when incompatible.
Shape broadcast_shapes(const Shape& a, const Shape& b);

class Tape;

namespace detail {

// Storage shared by every Tensor copy that refers to the same buffer. The
// parameter registry and the module structs alias the same state, so a
// gradient written through one copy is visible through the other.
struct TensorState {
  std::vector<double> values;
  std::vector<double> grad;  // empty until backward (or grad_mut) touches it
  bool requires_grad = false;
  uint64_t tape_id = 0;  // tape that assigned `node`; stale ids are ignored
  int64_t node = -1;
};

}  // namespace detail

// Dense f64 tensor with row-major layout. Scalars use shape {1}. Copies are
// shallow: they share values and gradient storage.
class Tensor {
 public:
  Tensor() = default;  // undefined handle; any use except defined() throws
  Tensor(Shape shape, std::vector<double> values);
  explicit Tensor(Shape shape);  // zero-filled

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor identity(int64_t n);

  bool defined() const { return static_cast<bool>(state_); }
  const Shape& shape() const;
  int64_t ndim() const;
  int64_t numel() const;
  int64_t dim(int64_t axis) const;  // negative axes count from the back

  const std::vector<double>& values() const;
  // In-place edits are legal only while no tape holds nodes that read this
  // tensor (optimizer updates, finite-difference probes).
  std::vector<double>& values_mut();
  double scalar_value() const;  // numel must be 1

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool has_grad() const;
  const std::vector<double>& grad() const;  // ContractError when absent
  std::vector<double>& grad_mut();          // allocates zeros when absent
  void zero_grad();                         // resets to zeros (allocating)

  // Node id on the most recent tape that saw this tensor, -1 otherwise.
  int64_t node_id() const;

  std::shared_ptr<detail::TensorState> state() const { return state_; }

 private:
  Shape shape_;
  std::shared_ptr<detail::TensorState> state_;
};

// Reverse-mode tape. Ops append one node per output while a TapeScope is
// active and at least one input requires grad; backward() walks the node list
// once in reverse. The tape is rebuilt for every forward pass.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  uint64_t id() const { return id_; }
  int64_t size() const { return static_cast<int64_t>(nodes_.size()); }

  // Node id of `t` on this tape, registering a leaf when t requires grad.
  // Returns -1 for constants.
  int64_t node_of(const Tensor& t);

  // Register `out` as the result of `op` over the given input nodes.
  // backward_fn must add d(out) contributions into the input grads.
  void record(Tensor& out, const char* op, std::vector<int64_t> input_nodes,
              std::function<void()> backward_fn);

  // Seeds d(root)/d(root) = 1 and runs the recorded backward functions in
  // reverse order. Root must be scalar and recorded on this tape. Gradients
  // accumulate additively into every requires-grad tensor reachable from the
  // root; zero leaf grads between optimizer steps, not between the samples of
  // a batch.
  void backward(const Tensor& root);

  static Tape* active();

 private:
  struct Node {
    const char* op;
    std::vector<int64_t> inputs;
    std::function<void()> backward_fn;  // null for leaves
    std::shared_ptr<detail::TensorState> out;
  };
  std::vector<Node> nodes_;
  uint64_t id_;
};

// RAII activation of a tape on the current thread. Scopes nest; the previous
// active tape is restored on destruction.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Primitive ops. Each op validates shapes, computes the forward value, and
// records a backward closure on the active tape when needed.

// Batched matrix product: a [..., p, q] x b [..., q, r] -> [..., p, r] with
// numpy-style broadcasting over the leading dimensions.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise with numpy broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);
Tensor reciprocal(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
// Exact-CDF form x * Phi(x), no tanh approximation.
Tensor gelu(const Tensor& x);
Tensor abs(const Tensor& x);

// Normalization over the last axis with learnable per-feature gain and shift.
// Population variance, epsilon inside the square root.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

Tensor permute(const Tensor& x, const std::vector<int64_t>& order);
Tensor reshape(const Tensor& x, Shape shape);
Tensor broadcast_to(const Tensor& x, const Shape& shape);
Tensor sum_all(const Tensor& x);  // -> {1}

// Mean-pool axis 1 of [N, T, D] down to out_len segments with equipartition
// boundaries floor(j * T / out_len); segment sizes differ by at most one.
Tensor pool_time(const Tensor& x, int64_t out_len);

Tensor concat_last(const Tensor& a, const Tensor& b);

// Row lookup with scatter-add backward into the table.
Tensor embedding_row(const Tensor& table, int64_t row);

// Single element by flat index -> {1}.
Tensor take(const Tensor& x, int64_t flat_index);

// Keeps the k largest entries of each row of a 2-D tensor and zeroes the
// rest; ties keep the lowest column index. Gradient flows only through the
// surviving entries. k >= cols is the identity.
Tensor sparsify_rows(const Tensor& x, int64_t k);

}  // namespace simmst
