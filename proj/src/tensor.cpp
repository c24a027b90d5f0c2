#include "simmst/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace simmst {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<int64_t> row_major_strides(const Shape& shape) {
  std::vector<int64_t> s(shape.size(), 1);
  for (int64_t i = static_cast<int64_t>(shape.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * shape[i + 1];
  return s;
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  size_t nd = std::max(a.size(), b.size());
  Shape out(nd, 1);
  for (size_t i = 0; i < nd; ++i) {
    int64_t da = i < nd - a.size() ? 1 : a[i - (nd - a.size())];
    int64_t db = i < nd - b.size() ? 1 : b[i - (nd - b.size())];
    if (da != db && da != 1 && db != 1)
      throw DimensionError("cannot broadcast " + shape_to_string(a) + " with " +
                           shape_to_string(b));
    out[i] = std::max(da, db);
  }
  return out;
}

namespace {

void check_shape(const Shape& shape) {
  for (int64_t d : shape)
    if (d < 1)
      throw DimensionError("dimensions must be positive, got " +
                           shape_to_string(shape));
}

std::vector<double>& ensure_grad(detail::TensorState& st) {
  if (st.grad.empty()) st.grad.assign(st.values.size(), 0.0);
  return st.grad;
}

// Input strides aligned to the broadcast output shape; 0 on stretched axes.
std::vector<int64_t> aligned_strides(const Shape& in, const Shape& out) {
  auto in_strides = row_major_strides(in);
  std::vector<int64_t> s(out.size(), 0);
  size_t off = out.size() - in.size();
  for (size_t i = 0; i < in.size(); ++i)
    s[off + i] = (in[i] == 1 && out[off + i] != 1) ? 0 : in_strides[i];
  return s;
}

// Calls f(out_idx, a_idx, b_idx) over the whole broadcast output space, with
// out_idx running sequentially.
template <class F>
void for_each_bcast2(const Shape& out, const Shape& a, const Shape& b, F&& f) {
  int64_t total = shape_numel(out);
  size_t nd = out.size();
  if (nd == 0) {
    f(0, 0, 0);
    return;
  }
  auto sa = aligned_strides(a, out);
  auto sb = aligned_strides(b, out);
  std::vector<int64_t> idx(nd, 0);
  int64_t ia = 0, ib = 0;
  for (int64_t io = 0; io < total; ++io) {
    f(io, ia, ib);
    for (int64_t ax = static_cast<int64_t>(nd) - 1; ax >= 0; --ax) {
      ++idx[ax];
      ia += sa[ax];
      ib += sb[ax];
      if (idx[ax] < out[ax]) break;
      ia -= sa[ax] * out[ax];
      ib -= sb[ax] * out[ax];
      idx[ax] = 0;
    }
  }
}

void require_defined(const Tensor& t, const char* who) {
  if (!t.defined()) throw ContractError(std::string(who) + ": undefined tensor");
}

std::atomic<uint64_t> g_tape_counter{0};
thread_local Tape* g_active_tape = nullptr;

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), state_(std::make_shared<detail::TensorState>()) {
  check_shape(shape_);
  if (static_cast<int64_t>(values.size()) != shape_numel(shape_))
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_to_string(shape_));
  state_->values = std::move(values);
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), state_(std::make_shared<detail::TensorState>()) {
  check_shape(shape_);
  state_->values.assign(shape_numel(shape_), 0.0);
}

Tensor Tensor::zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.state_->values.begin(), t.state_->values.end(), value);
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::identity(int64_t n) {
  Tensor t({n, n});
  for (int64_t i = 0; i < n; ++i) t.state_->values[i * n + i] = 1.0;
  return t;
}

const Shape& Tensor::shape() const {
  require_defined(*this, "Tensor::shape");
  return shape_;
}

int64_t Tensor::ndim() const { return static_cast<int64_t>(shape().size()); }

int64_t Tensor::numel() const {
  require_defined(*this, "Tensor::numel");
  return static_cast<int64_t>(state_->values.size());
}

int64_t Tensor::dim(int64_t axis) const {
  int64_t nd = ndim();
  if (axis < 0) axis += nd;
  if (axis < 0 || axis >= nd)
    throw ContractError("axis " + std::to_string(axis) + " out of range for " +
                        shape_to_string(shape_));
  return shape_[axis];
}

const std::vector<double>& Tensor::values() const {
  require_defined(*this, "Tensor::values");
  return state_->values;
}

std::vector<double>& Tensor::values_mut() {
  require_defined(*this, "Tensor::values_mut");
  return state_->values;
}

double Tensor::scalar_value() const {
  if (numel() != 1)
    throw ContractError("scalar_value on non-scalar " + shape_to_string(shape_));
  return state_->values[0];
}

bool Tensor::requires_grad() const {
  require_defined(*this, "Tensor::requires_grad");
  return state_->requires_grad;
}

Tensor& Tensor::set_requires_grad(bool flag) {
  require_defined(*this, "Tensor::set_requires_grad");
  state_->requires_grad = flag;
  return *this;
}

bool Tensor::has_grad() const {
  require_defined(*this, "Tensor::has_grad");
  return !state_->grad.empty();
}

const std::vector<double>& Tensor::grad() const {
  if (!has_grad())
    throw ContractError("grad requested but none was computed");
  return state_->grad;
}

std::vector<double>& Tensor::grad_mut() {
  require_defined(*this, "Tensor::grad_mut");
  return ensure_grad(*state_);
}

void Tensor::zero_grad() {
  require_defined(*this, "Tensor::zero_grad");
  state_->grad.assign(state_->values.size(), 0.0);
}

int64_t Tensor::node_id() const {
  require_defined(*this, "Tensor::node_id");
  Tape* t = Tape::active();
  if (t && state_->tape_id == t->id()) return state_->node;
  return -1;
}

Tape::Tape() : id_(++g_tape_counter) {}

Tape* Tape::active() { return g_active_tape; }

int64_t Tape::node_of(const Tensor& t) {
  require_defined(t, "Tape::node_of");
  auto st = t.state();
  if (st->tape_id == id_ && st->node >= 0) return st->node;
  if (!st->requires_grad) return -1;
  // A requires-grad tensor first seen by this tape is a leaf. Gradients stop
  // here even if the tensor was produced by an op on an earlier tape.
  st->tape_id = id_;
  st->node = static_cast<int64_t>(nodes_.size());
  nodes_.push_back(Node{"leaf", {}, nullptr, st});
  return st->node;
}

void Tape::record(Tensor& out, const char* op, std::vector<int64_t> input_nodes,
                  std::function<void()> backward_fn) {
  auto st = out.state();
  if (!st) throw ContractError("Tape::record: undefined output tensor");
  st->requires_grad = true;
  st->tape_id = id_;
  st->node = static_cast<int64_t>(nodes_.size());
  nodes_.push_back(Node{op, std::move(input_nodes), std::move(backward_fn), st});
}

void Tape::backward(const Tensor& root) {
  require_defined(root, "Tape::backward");
  if (root.numel() != 1)
    throw ContractError("backward root must be scalar, got " +
                        shape_to_string(root.shape()));
  auto rs = root.state();
  if (rs->tape_id != id_ || rs->node < 0)
    throw ContractError("backward root is not recorded on this tape");
  ensure_grad(*rs)[0] += 1.0;
  for (int64_t i = static_cast<int64_t>(nodes_.size()) - 1; i >= 0; --i) {
    Node& nd = nodes_[i];
    if (!nd.backward_fn) continue;       // leaf
    if (nd.out->grad.empty()) continue;  // not on a path from the root
    nd.backward_fn();
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

namespace {

enum class BinKind { Add, Sub, Mul };

Tensor binary_op(BinKind kind, const char* name, const Tensor& a,
                 const Tensor& b) {
  require_defined(a, name);
  require_defined(b, name);
  Shape out_shape = broadcast_shapes(a.shape(), b.shape());
  Tensor out(out_shape);
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values_mut();
  for_each_bcast2(out_shape, a.shape(), b.shape(),
                  [&](int64_t io, int64_t ia, int64_t ib) {
                    switch (kind) {
                      case BinKind::Add: ov[io] = av[ia] + bv[ib]; break;
                      case BinKind::Sub: ov[io] = av[ia] - bv[ib]; break;
                      case BinKind::Mul: ov[io] = av[ia] * bv[ib]; break;
                    }
                  });
  Tape* tp = Tape::active();
  if (tp) {
    int64_t na = tp->node_of(a), nb = tp->node_of(b);
    if (na >= 0 || nb >= 0) {
      auto as = a.state(), bs = b.state(), os = out.state();
      Shape ash = a.shape(), bsh = b.shape(), osh = out_shape;
      bool wa = na >= 0, wb = nb >= 0;
      tp->record(out, name, {na, nb}, [=]() {
        const auto& gy = os->grad;
        std::vector<double>* ga = wa ? &ensure_grad(*as) : nullptr;
        std::vector<double>* gb = wb ? &ensure_grad(*bs) : nullptr;
        for_each_bcast2(osh, ash, bsh, [&](int64_t io, int64_t ia, int64_t ib) {
          double g = gy[io];
          switch (kind) {
            case BinKind::Add:
              if (ga) (*ga)[ia] += g;
              if (gb) (*gb)[ib] += g;
              break;
            case BinKind::Sub:
              if (ga) (*ga)[ia] += g;
              if (gb) (*gb)[ib] -= g;
              break;
            case BinKind::Mul:
              if (ga) (*ga)[ia] += g * bs->values[ib];
              if (gb) (*gb)[ib] += g * as->values[ia];
              break;
          }
        });
      });
    }
  }
  return out;
}

// Unary op plumbing: `backward` receives (upstream grad, input grad buffer).
template <class F>
void record_unary(const char* op, const Tensor& x, Tensor& out, F&& backward) {
  Tape* tp = Tape::active();
  if (!tp) return;
  int64_t nx = tp->node_of(x);
  if (nx < 0) return;
  auto xs = x.state();
  auto os = out.state();
  tp->record(out, op, {nx},
             [xs, os, backward = std::forward<F>(backward)]() {
               backward(os->grad, ensure_grad(*xs));
             });
}

constexpr double kInvSqrt2Pi = 0.39894228040143268;

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(BinKind::Add, "add", a, b);
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(BinKind::Sub, "sub", a, b);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(BinKind::Mul, "mul", a, b);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.ndim() < 2 || b.ndim() < 2)
    throw DimensionError("matmul needs >= 2-D inputs, got " +
                         shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  int64_t p = a.dim(-2), q = a.dim(-1);
  int64_t q2 = b.dim(-2), r = b.dim(-1);
  if (q != q2)
    throw DimensionError("matmul inner dimensions differ: " +
                         shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  Shape a_batch(a.shape().begin(), a.shape().end() - 2);
  Shape b_batch(b.shape().begin(), b.shape().end() - 2);
  Shape batch = broadcast_shapes(a_batch, b_batch);
  Shape out_shape = batch;
  out_shape.push_back(p);
  out_shape.push_back(r);
  Tensor out(out_shape);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.values_mut().data();
  auto run_forward = [&]() {
    for_each_bcast2(batch, a_batch, b_batch,
                    [&](int64_t io, int64_t ia, int64_t ib) {
                      const double* A = av + ia * p * q;
                      const double* B = bv + ib * q * r;
                      double* C = ov + io * p * r;
                      for (int64_t i = 0; i < p; ++i)
                        for (int64_t k = 0; k < q; ++k) {
                          double aik = A[i * q + k];
                          const double* Bk = B + k * r;
                          double* Ci = C + i * r;
                          for (int64_t j = 0; j < r; ++j) Ci[j] += aik * Bk[j];
                        }
                    });
  };
  run_forward();
  Tape* tp = Tape::active();
  if (tp) {
    int64_t na = tp->node_of(a), nb = tp->node_of(b);
    if (na >= 0 || nb >= 0) {
      auto as = a.state(), bs = b.state(), os = out.state();
      bool wa = na >= 0, wb = nb >= 0;
      tp->record(out, "matmul", {na, nb}, [=]() {
        const double* A = as->values.data();
        const double* B = bs->values.data();
        const double* G = os->grad.data();
        double* ga = wa ? ensure_grad(*as).data() : nullptr;
        double* gb = wb ? ensure_grad(*bs).data() : nullptr;
        for_each_bcast2(batch, a_batch, b_batch,
                        [&](int64_t io, int64_t ia, int64_t ib) {
                          const double* Ab = A + ia * p * q;
                          const double* Bb = B + ib * q * r;
                          const double* Gb = G + io * p * r;
                          if (ga) {
                            double* gab = ga + ia * p * q;
                            for (int64_t i = 0; i < p; ++i)
                              for (int64_t k = 0; k < q; ++k) {
                                double s = 0.0;
                                const double* Gi = Gb + i * r;
                                const double* Bk = Bb + k * r;
                                for (int64_t j = 0; j < r; ++j) s += Gi[j] * Bk[j];
                                gab[i * q + k] += s;
                              }
                          }
                          if (gb) {
                            double* gbb = gb + ib * q * r;
                            for (int64_t i = 0; i < p; ++i)
                              for (int64_t k = 0; k < q; ++k) {
                                double aik = Ab[i * q + k];
                                const double* Gi = Gb + i * r;
                                double* gBk = gbb + k * r;
                                for (int64_t j = 0; j < r; ++j) gBk[j] += aik * Gi[j];
                              }
                          }
                        });
      });
    }
  }
  return out;
}

Tensor scale(const Tensor& x, double c) {
  require_defined(x, "scale");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] * c;
  record_unary("scale", x, out,
               [c](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * c;
               });
  return out;
}

Tensor add_scalar(const Tensor& x, double c) {
  require_defined(x, "add_scalar");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] + c;
  record_unary("add_scalar", x, out,
               [](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
               });
  return out;
}

Tensor reciprocal(const Tensor& x) {
  require_defined(x, "reciprocal");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = 1.0 / xv[i];
  auto xs = x.state();
  record_unary("reciprocal", x, out,
               [xs](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i) {
                   double v = xs->values[i];
                   gx[i] -= gy[i] / (v * v);
                 }
               });
  return out;
}

Tensor relu(const Tensor& x) {
  require_defined(x, "relu");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  auto xs = x.state();
  record_unary("relu", x, out,
               [xs](const std::vector<double>& gy, std::vector<double>& gx) {
                 // Subgradient 0 at the kink.
                 for (size_t i = 0; i < gy.size(); ++i)
                   if (xs->values[i] > 0.0) gx[i] += gy[i];
               });
  return out;
}

Tensor tanh(const Tensor& x) {
  require_defined(x, "tanh");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = std::tanh(xv[i]);
  auto os = out.state();
  record_unary("tanh", x, out,
               [os](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i) {
                   double y = os->values[i];
                   gx[i] += gy[i] * (1.0 - y * y);
                 }
               });
  return out;
}

Tensor gelu(const Tensor& x) {
  require_defined(x, "gelu");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] * normal_cdf(xv[i]);
  auto xs = x.state();
  record_unary("gelu", x, out,
               [xs](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i) {
                   double v = xs->values[i];
                   gx[i] += gy[i] * (normal_cdf(v) + v * normal_pdf(v));
                 }
               });
  return out;
}

Tensor abs(const Tensor& x) {
  require_defined(x, "abs");
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (size_t i = 0; i < xv.size(); ++i) ov[i] = std::fabs(xv[i]);
  auto xs = x.state();
  record_unary("abs", x, out,
               [xs](const std::vector<double>& gy, std::vector<double>& gx) {
                 // Subgradient 0 at 0.
                 for (size_t i = 0; i < gy.size(); ++i) {
                   double v = xs->values[i];
                   if (v > 0.0)
                     gx[i] += gy[i];
                   else if (v < 0.0)
                     gx[i] -= gy[i];
                 }
               });
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  require_defined(x, "layer_norm");
  require_defined(gamma, "layer_norm");
  require_defined(beta, "layer_norm");
  int64_t n = x.dim(-1);
  if (gamma.ndim() != 1 || gamma.dim(0) != n || beta.ndim() != 1 ||
      beta.dim(0) != n)
    throw DimensionError("layer_norm expects gamma/beta of shape [" +
                         std::to_string(n) + "], got " +
                         shape_to_string(gamma.shape()) + " and " +
                         shape_to_string(beta.shape()));
  int64_t rows = x.numel() / n;
  Tensor out(x.shape());
  const auto& xv = x.values();
  const auto& gv = gamma.values();
  const auto& bv = beta.values();
  auto& ov = out.values_mut();
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * n;
    double mean = 0.0;
    for (int64_t j = 0; j < n; ++j) mean += xr[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      double d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    double* hr = xhat->data() + r * n;
    double* yr = ov.data() + r * n;
    for (int64_t j = 0; j < n; ++j) {
      hr[j] = (xr[j] - mean) * inv;
      yr[j] = hr[j] * gv[j] + bv[j];
    }
  }
  Tape* tp = Tape::active();
  if (tp) {
    int64_t nx = tp->node_of(x), ng = tp->node_of(gamma), nb = tp->node_of(beta);
    if (nx >= 0 || ng >= 0 || nb >= 0) {
      auto xs = x.state(), gs = gamma.state(), bs = beta.state(),
           os = out.state();
      bool wx = nx >= 0, wg = ng >= 0, wb = nb >= 0;
      tp->record(out, "layer_norm", {nx, ng, nb}, [=]() {
        const auto& gy = os->grad;
        double* gx = wx ? ensure_grad(*xs).data() : nullptr;
        double* gg = wg ? ensure_grad(*gs).data() : nullptr;
        double* gb = wb ? ensure_grad(*bs).data() : nullptr;
        for (int64_t r = 0; r < rows; ++r) {
          const double* gyr = gy.data() + r * n;
          const double* hr = xhat->data() + r * n;
          double inv = (*inv_std)[r];
          if (gx) {
            // dx = inv * (dyg - mean(dyg) - xhat * mean(dyg * xhat))
            double m1 = 0.0, m2 = 0.0;
            for (int64_t j = 0; j < n; ++j) {
              double dyg = gyr[j] * gs->values[j];
              m1 += dyg;
              m2 += dyg * hr[j];
            }
            m1 /= static_cast<double>(n);
            m2 /= static_cast<double>(n);
            double* gxr = gx + r * n;
            for (int64_t j = 0; j < n; ++j) {
              double dyg = gyr[j] * gs->values[j];
              gxr[j] += inv * (dyg - m1 - hr[j] * m2);
            }
          }
          if (gg)
            for (int64_t j = 0; j < n; ++j) gg[j] += gyr[j] * hr[j];
          if (gb)
            for (int64_t j = 0; j < n; ++j) gb[j] += gyr[j];
        }
      });
    }
  }
  return out;
}

Tensor permute(const Tensor& x, const std::vector<int64_t>& order) {
  require_defined(x, "permute");
  int64_t nd = x.ndim();
  if (static_cast<int64_t>(order.size()) != nd)
    throw DimensionError("permute order size " + std::to_string(order.size()) +
                         " does not match rank " + std::to_string(nd));
  std::vector<bool> seen(nd, false);
  for (int64_t ax : order) {
    if (ax < 0 || ax >= nd || seen[ax])
      throw DimensionError("permute order is not a permutation");
    seen[ax] = true;
  }
  Shape out_shape(nd);
  for (int64_t i = 0; i < nd; ++i) out_shape[i] = x.shape()[order[i]];
  Tensor out(out_shape);
  auto in_strides = row_major_strides(x.shape());
  // Stride of output axis i in the input buffer.
  std::vector<int64_t> strides(nd);
  for (int64_t i = 0; i < nd; ++i) strides[i] = in_strides[order[i]];
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  int64_t total = x.numel();
  std::vector<int64_t> idx(nd, 0);
  int64_t ix = 0;
  for (int64_t io = 0; io < total; ++io) {
    ov[io] = xv[ix];
    for (int64_t ax = nd - 1; ax >= 0; --ax) {
      ++idx[ax];
      ix += strides[ax];
      if (idx[ax] < out_shape[ax]) break;
      ix -= strides[ax] * out_shape[ax];
      idx[ax] = 0;
    }
  }
  auto xs = x.state();
  record_unary("permute", x, out,
               [xs, out_shape, strides, nd](const std::vector<double>& gy,
                                            std::vector<double>& gx) {
                 std::vector<int64_t> idx(nd, 0);
                 int64_t ix = 0;
                 for (size_t io = 0; io < gy.size(); ++io) {
                   gx[ix] += gy[io];
                   for (int64_t ax = nd - 1; ax >= 0; --ax) {
                     ++idx[ax];
                     ix += strides[ax];
                     if (idx[ax] < out_shape[ax]) break;
                     ix -= strides[ax] * out_shape[ax];
                     idx[ax] = 0;
                   }
                 }
               });
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  require_defined(x, "reshape");
  check_shape(shape);
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape " + shape_to_string(x.shape()) + " -> " +
                         shape_to_string(shape) + " changes element count");
  Tensor out(std::move(shape), x.values());
  record_unary("reshape", x, out,
               [](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
               });
  return out;
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  require_defined(x, "broadcast_to");
  check_shape(shape);
  if (broadcast_shapes(x.shape(), shape) != shape)
    throw DimensionError("cannot broadcast " + shape_to_string(x.shape()) +
                         " to " + shape_to_string(shape));
  Tensor out(shape);
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for_each_bcast2(shape, x.shape(), x.shape(),
                  [&](int64_t io, int64_t ia, int64_t) { ov[io] = xv[ia]; });
  Shape in_shape = x.shape();
  record_unary("broadcast_to", x, out,
               [in_shape, shape](const std::vector<double>& gy,
                                 std::vector<double>& gx) {
                 for_each_bcast2(shape, in_shape, in_shape,
                                 [&](int64_t io, int64_t ia, int64_t) {
                                   gx[ia] += gy[io];
                                 });
               });
  return out;
}

Tensor sum_all(const Tensor& x) {
  require_defined(x, "sum_all");
  const auto& xv = x.values();
  double s = 0.0;
  for (double v : xv) s += v;
  Tensor out = Tensor::scalar(s);
  record_unary("sum_all", x, out,
               [](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gx.size(); ++i) gx[i] += gy[0];
               });
  return out;
}

Tensor pool_time(const Tensor& x, int64_t out_len) {
  require_defined(x, "pool_time");
  if (x.ndim() != 3)
    throw DimensionError("pool_time expects [N,T,D], got " +
                         shape_to_string(x.shape()));
  int64_t N = x.dim(0), T = x.dim(1), D = x.dim(2);
  if (out_len < 1 || out_len > T)
    throw DimensionError("pool_time output length " + std::to_string(out_len) +
                         " not in [1," + std::to_string(T) + "]");
  // Equipartition boundaries; every segment is nonempty.
  std::vector<int64_t> bounds(out_len + 1);
  for (int64_t j = 0; j <= out_len; ++j) bounds[j] = j * T / out_len;
  Tensor out({N, out_len, D});
  const auto& xv = x.values();
  auto& ov = out.values_mut();
  for (int64_t n = 0; n < N; ++n)
    for (int64_t j = 0; j < out_len; ++j) {
      int64_t lo = bounds[j], hi = bounds[j + 1];
      double invw = 1.0 / static_cast<double>(hi - lo);
      for (int64_t d = 0; d < D; ++d) {
        double s = 0.0;
        for (int64_t t = lo; t < hi; ++t) s += xv[(n * T + t) * D + d];
        ov[(n * out_len + j) * D + d] = s * invw;
      }
    }
  record_unary("pool_time", x, out,
               [N, T, D, out_len, bounds](const std::vector<double>& gy,
                                          std::vector<double>& gx) {
                 for (int64_t n = 0; n < N; ++n)
                   for (int64_t j = 0; j < out_len; ++j) {
                     int64_t lo = bounds[j], hi = bounds[j + 1];
                     double invw = 1.0 / static_cast<double>(hi - lo);
                     for (int64_t d = 0; d < D; ++d) {
                       double g = gy[(n * out_len + j) * D + d] * invw;
                       for (int64_t t = lo; t < hi; ++t)
                         gx[(n * T + t) * D + d] += g;
                     }
                   }
               });
  return out;
}

Tensor concat_last(const Tensor& a, const Tensor& b) {
  require_defined(a, "concat_last");
  require_defined(b, "concat_last");
  if (a.ndim() != b.ndim())
    throw DimensionError("concat_last rank mismatch: " +
                         shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  int64_t nd = a.ndim();
  for (int64_t i = 0; i < nd - 1; ++i)
    if (a.shape()[i] != b.shape()[i])
      throw DimensionError("concat_last needs equal leading dims: " +
                           shape_to_string(a.shape()) + " vs " +
                           shape_to_string(b.shape()));
  int64_t la = a.dim(-1), lb = b.dim(-1);
  Shape out_shape = a.shape();
  out_shape[nd - 1] = la + lb;
  Tensor out(out_shape);
  int64_t rows = a.numel() / la;
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values_mut();
  for (int64_t r = 0; r < rows; ++r) {
    std::memcpy(ov.data() + r * (la + lb), av.data() + r * la,
                sizeof(double) * la);
    std::memcpy(ov.data() + r * (la + lb) + la, bv.data() + r * lb,
                sizeof(double) * lb);
  }
  Tape* tp = Tape::active();
  if (tp) {
    int64_t na = tp->node_of(a), nb = tp->node_of(b);
    if (na >= 0 || nb >= 0) {
      auto as = a.state(), bs = b.state(), os = out.state();
      bool wa = na >= 0, wb = nb >= 0;
      tp->record(out, "concat_last", {na, nb}, [=]() {
        const auto& gy = os->grad;
        double* ga = wa ? ensure_grad(*as).data() : nullptr;
        double* gb = wb ? ensure_grad(*bs).data() : nullptr;
        for (int64_t r = 0; r < rows; ++r) {
          const double* g = gy.data() + r * (la + lb);
          if (ga)
            for (int64_t j = 0; j < la; ++j) ga[r * la + j] += g[j];
          if (gb)
            for (int64_t j = 0; j < lb; ++j) gb[r * lb + j] += g[la + j];
        }
      });
    }
  }
  return out;
}

Tensor embedding_row(const Tensor& table, int64_t row) {
  require_defined(table, "embedding_row");
  if (table.ndim() != 2)
    throw DimensionError("embedding_row expects a 2-D table, got " +
                         shape_to_string(table.shape()));
  int64_t R = table.dim(0), D = table.dim(1);
  if (row < 0 || row >= R)
    throw ContractError("embedding_row index " + std::to_string(row) +
                        " out of range [0," + std::to_string(R) + ")");
  Tensor out({D});
  const auto& tv = table.values();
  auto& ov = out.values_mut();
  std::memcpy(ov.data(), tv.data() + row * D, sizeof(double) * D);
  record_unary("embedding_row", table, out,
               [row, D](const std::vector<double>& gy, std::vector<double>& gt) {
                 for (int64_t j = 0; j < D; ++j) gt[row * D + j] += gy[j];
               });
  return out;
}

Tensor take(const Tensor& x, int64_t flat_index) {
  require_defined(x, "take");
  if (flat_index < 0 || flat_index >= x.numel())
    throw ContractError("take index " + std::to_string(flat_index) +
                        " out of range [0," + std::to_string(x.numel()) + ")");
  Tensor out = Tensor::scalar(x.values()[flat_index]);
  record_unary("take", x, out,
               [flat_index](const std::vector<double>& gy,
                            std::vector<double>& gx) {
                 gx[flat_index] += gy[0];
               });
  return out;
}

Tensor sparsify_rows(const Tensor& x, int64_t k) {
  require_defined(x, "sparsify_rows");
  if (x.ndim() != 2)
    throw DimensionError("sparsify_rows expects a 2-D tensor, got " +
                         shape_to_string(x.shape()));
  if (k < 1) throw ContractError("sparsify_rows needs k >= 1");
  int64_t rows = x.dim(0), cols = x.dim(1);
  int64_t keep = std::min(k, cols);
  auto mask = std::make_shared<std::vector<uint8_t>>(x.numel(), 0);
  const auto& xv = x.values();
  std::vector<int64_t> idx(cols);
  for (int64_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * cols;
    std::iota(idx.begin(), idx.end(), 0);
    // Value descending, ties keep the lowest column index.
    std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                      [row](int64_t a, int64_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    for (int64_t j = 0; j < keep; ++j) (*mask)[r * cols + idx[j]] = 1;
  }
  Tensor out(x.shape());
  auto& ov = out.values_mut();
  for (int64_t i = 0; i < x.numel(); ++i) ov[i] = (*mask)[i] ? xv[i] : 0.0;
  record_unary("sparsify_rows", x, out,
               [mask](const std::vector<double>& gy, std::vector<double>& gx) {
                 for (size_t i = 0; i < gy.size(); ++i)
                   if ((*mask)[i]) gx[i] += gy[i];
               });
  return out;
}

}  // namespace simmst
