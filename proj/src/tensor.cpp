#include "mre/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "mre/errors.hpp"

namespace mre {

using detail::Node;

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (auto e : shape)
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shapes " + shape_string(a) + " and " + shape_string(b) +
                   " do not conform");
}

// Gradient buffer of operand i, or nullptr when it does not take gradients.
double* pgrad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? p.ensure_grad().data() : nullptr;
}

const double* pvalue(Node& self, std::size_t i) { return self.parents[i]->value.data(); }

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

// Elementwise unary op whose derivative is expressed via input x and output y.
template <typename F, typename D>
Tensor unary_op(const char* op, const Tensor& x, F&& f, D&& df) {
  auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_result(op, x.shape(), std::move(out), {x}, [df](Node& self) {
    double* gx = pgrad(self, 0);
    if (!gx) return;
    const double* xv = pvalue(self, 0);
    const std::size_t n = self.value.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += self.grad[i] * df(xv[i], self.value[i]);
  });
}

enum class BinaryKind { add, subtract, multiply, divide };

// The broadcast operand repeats with period `small`; blocks of that size walk
// the larger operand contiguously.
template <BinaryKind Kind>
void binary_forward(const double* av, const double* bv, double* out, std::size_t blocks,
                    std::size_t small, bool a_big) {
  for (std::size_t r = 0; r < blocks; ++r) {
    const double* x = av + (a_big ? r * small : 0);
    const double* y = bv + (a_big ? 0 : r * small);
    double* o = out + r * small;
    for (std::size_t j = 0; j < small; ++j) {
      if constexpr (Kind == BinaryKind::add) o[j] = x[j] + y[j];
      if constexpr (Kind == BinaryKind::subtract) o[j] = x[j] - y[j];
      if constexpr (Kind == BinaryKind::multiply) o[j] = x[j] * y[j];
      if constexpr (Kind == BinaryKind::divide) o[j] = x[j] / y[j];
    }
  }
}

template <BinaryKind Kind>
void binary_backward(Node& self, std::size_t blocks, std::size_t small, bool a_big) {
  double* ga = pgrad(self, 0);
  double* gb = pgrad(self, 1);
  const double* av = pvalue(self, 0);
  const double* bv = pvalue(self, 1);
  for (std::size_t r = 0; r < blocks; ++r) {
    const std::size_t oa = a_big ? r * small : 0;
    const std::size_t ob = a_big ? 0 : r * small;
    const double* g = self.grad.data() + r * small;
    for (std::size_t j = 0; j < small; ++j) {
      const double x = av[oa + j];
      const double y = bv[ob + j];
      if constexpr (Kind == BinaryKind::add) {
        if (ga) ga[oa + j] += g[j];
        if (gb) gb[ob + j] += g[j];
      }
      if constexpr (Kind == BinaryKind::subtract) {
        if (ga) ga[oa + j] += g[j];
        if (gb) gb[ob + j] -= g[j];
      }
      if constexpr (Kind == BinaryKind::multiply) {
        if (ga) ga[oa + j] += g[j] * y;
        if (gb) gb[ob + j] += g[j] * x;
      }
      if constexpr (Kind == BinaryKind::divide) {
        if (ga) ga[oa + j] += g[j] / y;
        if (gb) gb[ob + j] -= g[j] * x / (y * y);
      }
    }
  }
}

template <BinaryKind Kind>
Tensor binary(const char* op, const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  const bool a_big = is_suffix(sb, sa);
  if (!a_big && !is_suffix(sa, sb)) mismatch(op, sa, sb);
  const Shape& out_shape = a_big ? sa : sb;
  const std::size_t n = shape_numel(out_shape);
  const std::size_t small = a_big ? b.numel() : a.numel();
  const std::size_t blocks = n / small;
  if constexpr (Kind == BinaryKind::divide)
    for (double v : b.data())
      if (v == 0.0) throw DomainError("divide: zero divisor");
  std::vector<double> out(n);
  binary_forward<Kind>(a.data().data(), b.data().data(), out.data(), blocks, small, a_big);
  return make_result(op, out_shape, std::move(out), {a, b}, [blocks, small, a_big](Node& self) {
    binary_backward<Kind>(self, blocks, small, a_big);
  });
}

// Splits a shape around an axis into (outer, extent, inner) for strided loops.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

// --- Tensor ----------------------------------------------------------------

Tensor::Tensor(Shape shape, bool requires_grad) : node_(std::make_shared<Node>()) {
  check_extents(shape);
  node_->value.assign(shape_numel(shape), 0.0);
  node_->shape = std::move(shape);
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  check_extents(shape);
  if (values.size() != shape_numel(shape))
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_string(shape));
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank())
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape()));
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }
std::span<double> Tensor::mutable_data() { return node_->value; }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::mutable_grad() { return node_->ensure_grad(); }

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
  Tape tape(*this);
  tape.backward();
}

Tensor Tensor::detach(bool requires_grad) const {
  return Tensor(node_->shape, node_->value, requires_grad);
}

const char* Tensor::op_name() const { return node_->op; }

Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> operands, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  const bool tracked =
      backward && std::any_of(operands.begin(), operands.end(),
                              [](const Tensor& t) { return t.node_->requires_grad; });
  if (tracked) {
    node->requires_grad = true;
    node->parents.reserve(operands.size());
    for (auto& t : operands) node->parents.push_back(t.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

// --- Tape ------------------------------------------------------------------

Tape::Tape(const Tensor& root) : root_(root.node_) {
  // Iterative post-order DFS yields operands before results.
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root_.get(), 0);
  visited.insert(root_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order_.push_back(node);
      stack.pop_back();
    }
  }
}

std::vector<std::string> Tape::op_names() const {
  std::vector<std::string> names;
  names.reserve(order_.size());
  for (auto* n : order_) names.emplace_back(n->op);
  return names;
}

void Tape::backward() {
  if (root_->value.size() != 1)
    throw ContractError("backward() requires a scalar loss, got shape " +
                        shape_string(root_->shape));
  if (!root_->requires_grad) return;
  for (auto* n : order_)
    if (n->backward) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  root_->ensure_grad()[0] = 1.0;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

// --- Linear algebra and shape ops --------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2) mismatch("matmul", sa, sb);
  const std::size_t n = sa[sa.size() - 2];
  const std::size_t k = sa.back();
  const std::size_t m = sb.back();
  if (sb[sb.size() - 2] != k) mismatch("matmul", sa, sb);
  const bool shared_b = sb.size() == 2;
  if (!shared_b && (sb.size() != sa.size() || !std::equal(sa.begin(), sa.end() - 2, sb.begin())))
    mismatch("matmul", sa, sb);

  const std::size_t batch = a.numel() / (n * k);
  Shape out_shape(sa.begin(), sa.end() - 1);
  out_shape.push_back(m);
  // A shared right operand lets the batch collapse into one tall product.
  const std::size_t rows = shared_b ? batch * n : n;
  const std::size_t reps = shared_b ? 1 : batch;

  std::vector<double> out(batch * n * m, 0.0);
  const double* av = a.data().data();
  const double* bv = b.data().data();
  for (std::size_t r = 0; r < reps; ++r) {
    const double* A = av + r * rows * k;
    const double* B = bv + (shared_b ? 0 : r * k * m);
    double* C = out.data() + r * rows * m;
    for (std::size_t i = 0; i < rows; ++i) {
      double* ci = C + i * m;
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        if (aip == 0.0) continue;
        const double* bp = B + p * m;
        for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
      }
    }
  }
  return make_result("matmul", std::move(out_shape), std::move(out), {a, b},
                     [rows, reps, k, m, shared_b](Node& self) {
                       double* ga = pgrad(self, 0);
                       double* gb = pgrad(self, 1);
                       const double* av = pvalue(self, 0);
                       const double* bv = pvalue(self, 1);
                       for (std::size_t r = 0; r < reps; ++r) {
                         const double* A = av + r * rows * k;
                         const double* B = bv + (shared_b ? 0 : r * k * m);
                         const double* G = self.grad.data() + r * rows * m;
                         if (ga) {
                           // dA = G B^T, accumulated row by row over a transposed B.
                           std::vector<double> bt(k * m);
                           for (std::size_t p = 0; p < k; ++p)
                             for (std::size_t j = 0; j < m; ++j) bt[j * k + p] = B[p * m + j];
                           double* GA = ga + r * rows * k;
                           for (std::size_t i = 0; i < rows; ++i) {
                             double* gai = GA + i * k;
                             const double* gi = G + i * m;
                             for (std::size_t j = 0; j < m; ++j) {
                               const double gij = gi[j];
                               if (gij == 0.0) continue;
                               const double* btj = bt.data() + j * k;
                               for (std::size_t p = 0; p < k; ++p) gai[p] += gij * btj[p];
                             }
                           }
                         }
                         if (gb) {
                           double* GB = gb + (shared_b ? 0 : r * k * m);
                           for (std::size_t i = 0; i < rows; ++i) {
                             const double* gi = G + i * m;
                             for (std::size_t p = 0; p < k; ++p) {
                               const double aip = A[i * k + p];
                               if (aip == 0.0) continue;
                               double* gbp = GB + p * m;
                               for (std::size_t j = 0; j < m; ++j) gbp[j] += aip * gi[j];
                             }
                           }
                         }
                       }
                     });
}

Tensor transpose(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("transpose needs rank >= 2, got " + shape_string(s));
  const std::size_t r = s[s.size() - 2];
  const std::size_t c = s.back();
  const std::size_t batch = x.numel() / (r * c);
  Shape out_shape = s;
  std::swap(out_shape[s.size() - 2], out_shape[s.size() - 1]);
  auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out[b * r * c + j * r + i] = in[b * r * c + i * c + j];
  return make_result("transpose", std::move(out_shape), std::move(out), {x},
                     [batch, r, c](Node& self) {
                       double* gx = pgrad(self, 0);
                       if (!gx) return;
                       for (std::size_t b = 0; b < batch; ++b)
                         for (std::size_t i = 0; i < r; ++i)
                           for (std::size_t j = 0; j < c; ++j)
                             gx[b * r * c + i * c + j] += self.grad[b * r * c + j * r + i];
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  check_extents(shape);
  if (shape_numel(shape) != x.numel()) mismatch("reshape", x.shape(), shape);
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    double* gx = pgrad(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size()) throw ShapeError("concat axis out of range for " + shape_string(s0));
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != s0.size()) mismatch("concat", s0, s);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != axis && s[i] != s0[i]) mismatch("concat", s0, s);
    total += s[axis];
  }
  Shape out_shape = s0;
  out_shape[axis] = total;
  const AxisSplit outer = split_at(out_shape, axis);
  std::vector<double> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t ext = p.shape()[axis];
    auto in = p.data();
    for (std::size_t o = 0; o < outer.outer; ++o)
      std::copy_n(in.begin() + o * ext * outer.inner, ext * outer.inner,
                  out.begin() + (o * total + offset) * outer.inner);
    offset += ext;
  }
  std::vector<std::size_t> extents;
  for (const auto& p : parts) extents.push_back(p.shape()[axis]);
  return make_result("concat", std::move(out_shape), std::move(out), parts,
                     [outer, total, offsets, extents](Node& self) {
                       for (std::size_t k = 0; k < extents.size(); ++k) {
                         double* g = pgrad(self, k);
                         if (!g) continue;
                         const std::size_t ext = extents[k];
                         for (std::size_t o = 0; o < outer.outer; ++o) {
                           const double* src =
                               self.grad.data() + (o * total + offsets[k]) * outer.inner;
                           double* dst = g + o * ext * outer.inner;
                           for (std::size_t i = 0; i < ext * outer.inner; ++i) dst[i] += src[i];
                         }
                       }
                     });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = x.shape();
  if (axis >= s.size() || begin >= end || end > s[axis])
    throw ShapeError("slice [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                     std::to_string(axis) + " of " + shape_string(s));
  const AxisSplit sp = split_at(s, axis);
  const std::size_t len = end - begin;
  Shape out_shape = s;
  out_shape[axis] = len;
  auto in = x.data();
  std::vector<double> out(sp.outer * len * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    std::copy_n(in.begin() + (o * sp.extent + begin) * sp.inner, len * sp.inner,
                out.begin() + o * len * sp.inner);
  return make_result("slice", std::move(out_shape), std::move(out), {x},
                     [sp, begin, len](Node& self) {
                       double* gx = pgrad(self, 0);
                       if (!gx) return;
                       for (std::size_t o = 0; o < sp.outer; ++o) {
                         const double* src = self.grad.data() + o * len * sp.inner;
                         double* dst = gx + (o * sp.extent + begin) * sp.inner;
                         for (std::size_t i = 0; i < len * sp.inner; ++i) dst[i] += src[i];
                       }
                     });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  const Shape& s = x.shape();
  if (s.empty() || rows.empty()) throw ShapeError("gather_rows on " + shape_string(s));
  const std::size_t width = x.numel() / s[0];
  for (auto r : rows)
    if (r >= s[0]) throw ShapeError("gather_rows index " + std::to_string(r) + " out of range");
  Shape out_shape = s;
  out_shape[0] = rows.size();
  auto in = x.data();
  std::vector<double> out(rows.size() * width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(in.begin() + rows[i] * width, width, out.begin() + i * width);
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result("gather_rows", std::move(out_shape), std::move(out), {x},
                     [idx = std::move(idx), width](Node& self) {
                       double* gx = pgrad(self, 0);
                       if (!gx) return;
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < width; ++j)
                           gx[idx[i] * width + j] += self.grad[i * width + j];
                     });
}

// --- Elementwise -------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) { return binary<BinaryKind::add>("add", a, b); }
Tensor subtract(const Tensor& a, const Tensor& b) {
  return binary<BinaryKind::subtract>("subtract", a, b);
}
Tensor multiply(const Tensor& a, const Tensor& b) {
  return binary<BinaryKind::multiply>("multiply", a, b);
}
Tensor divide(const Tensor& a, const Tensor& b) {
  return binary<BinaryKind::divide>("divide", a, b);
}

Tensor scale(const Tensor& x, double factor) {
  return unary_op(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double offset) {
  return unary_op(
      "add_scalar", x, [offset](double v) { return v + offset; },
      [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary_op(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary_op(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data())
    if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
  return unary_op(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  for (double v : x.data())
    if (v < 0.0) throw DomainError("sqrt of negative value " + std::to_string(v));
  // The derivative at exactly 0 is taken as 0.
  return unary_op(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp with lo > hi");
  return unary_op(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor scale_rows(const Tensor& x, const Tensor& w) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  if (sx.size() < 1 || sw.size() + 1 != sx.size() || !std::equal(sw.begin(), sw.end(), sx.begin()))
    mismatch("scale_rows", sx, sw);
  const std::size_t rows = w.numel();
  const std::size_t width = sx.back();
  auto xv = x.data();
  auto wv = w.data();
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < width; ++j) out[r * width + j] = wv[r] * xv[r * width + j];
  return make_result("scale_rows", sx, std::move(out), {x, w}, [rows, width](Node& self) {
    double* gx = pgrad(self, 0);
    double* gw = pgrad(self, 1);
    const double* xv = pvalue(self, 0);
    const double* wv = pvalue(self, 1);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* g = self.grad.data() + r * width;
      if (gx)
        for (std::size_t j = 0; j < width; ++j) gx[r * width + j] += wv[r] * g[j];
      if (gw) {
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) acc += g[j] * xv[r * width + j];
        gw[r] += acc;
      }
    }
  });
}

// --- Reductions --------------------------------------------------------------

Tensor row_softmax(const Tensor& x) {
  if (x.rank() < 1) throw ShapeError("row_softmax on scalar");
  const std::size_t width = x.shape().back();
  const std::size_t rows = x.numel() / width;
  auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xi = in.data() + r * width;
    double* yi = out.data() + r * width;
    const double mx = *std::max_element(xi, xi + width);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) z += (yi[j] = std::exp(xi[j] - mx));
    for (std::size_t j = 0; j < width; ++j) yi[j] /= z;
  }
  return make_result("row_softmax", x.shape(), std::move(out), {x}, [rows, width](Node& self) {
    double* gx = pgrad(self, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * width;
      const double* g = self.grad.data() + r * width;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < width; ++j) gx[r * width + j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor row_log_softmax(const Tensor& x) {
  if (x.rank() < 1) throw ShapeError("row_log_softmax on scalar");
  const std::size_t width = x.shape().back();
  const std::size_t rows = x.numel() / width;
  auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xi = in.data() + r * width;
    double* yi = out.data() + r * width;
    const double mx = *std::max_element(xi, xi + width);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) z += std::exp(xi[j] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < width; ++j) yi[j] = xi[j] - lz;
  }
  return make_result("row_log_softmax", x.shape(), std::move(out), {x},
                     [rows, width](Node& self) {
                       double* gx = pgrad(self, 0);
                       if (!gx) return;
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* y = self.value.data() + r * width;
                         const double* g = self.grad.data() + r * width;
                         double total = 0.0;
                         for (std::size_t j = 0; j < width; ++j) total += g[j];
                         for (std::size_t j = 0; j < width; ++j)
                           gx[r * width + j] += g[j] - std::exp(y[j]) * total;
                       }
                     });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return make_result("sum", Shape{}, {total}, {x}, [](Node& self) {
    double* gx = pgrad(self, 0);
    if (!gx) return;
    const std::size_t n = self.parents[0]->value.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += self.grad[0];
  });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) throw ShapeError("sum axis out of range for " + shape_string(s));
  const AxisSplit sp = split_at(s, axis);
  Shape out_shape = s;
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  auto in = x.data();
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t e = 0; e < sp.extent; ++e) {
      const double* src = in.data() + (o * sp.extent + e) * sp.inner;
      double* dst = out.data() + o * sp.inner;
      for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
    }
  return make_result("sum_axis", std::move(out_shape), std::move(out), {x}, [sp](Node& self) {
    double* gx = pgrad(self, 0);
    if (!gx) return;
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t e = 0; e < sp.extent; ++e) {
        const double* src = self.grad.data() + o * sp.inner;
        double* dst = gx + (o * sp.extent + e) * sp.inner;
        for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
      }
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean(const Tensor& x, std::size_t axis) {
  return scale(sum(x, axis), 1.0 / static_cast<double>(x.dim(axis)));
}

Tensor dropout(const Tensor& x, double keep_prob, Rng& rng, bool train) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw ContractError("dropout keep probability must lie in (0, 1]");
  if (!train || keep_prob == 1.0) return x;
  std::bernoulli_distribution keep(keep_prob);
  std::vector<double> mask(x.numel());
  for (auto& m : mask) m = keep(rng) ? 1.0 / keep_prob : 0.0;
  return multiply(x, Tensor(x.shape(), std::move(mask)));
}

}  // namespace mre
