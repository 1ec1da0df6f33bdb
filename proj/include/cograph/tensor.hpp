#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cograph/errors.hpp"
#include "cograph/rng.hpp"

namespace cograph {

// Dense shapes up to rank 2; {} is a scalar.
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// One node of the reverse-mode tape. Nodes hold their forward value, a lazily
// allocated gradient buffer of the same element count, edges to the nodes
// they were computed from, and a pull-style backward closure that scatters
// this node's gradient into its parents.
struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first touched
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;
  std::uint64_t id = 0;
  bool requires_grad = false;

  std::size_t size() const { return value.size(); }
  std::vector<double>& ensure_grad();
};

// Value-semantics handle to a tape node. Copies share the node, so a Tensor
// held by a model and the same Tensor inside an optimizer see one buffer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  // Leaf constructors. Parameters take part in gradient computation,
  // constants do not.
  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor scalar(double v);
  static Tensor param(Shape shape, std::vector<double> values);
  static Tensor zeros_param(Shape shape);
  // Seeded uniform(-radius, radius) initialization.
  static Tensor uniform_param(Shape shape, double radius, Rng& rng);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  bool requires_grad() const { return node_->requires_grad; }

  std::vector<double>& values() const { return node_->value; }
  // Allocates (zero-filled) on first access.
  std::vector<double>& grad() const { return node_->ensure_grad(); }
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() const;

  // Value of a single-element tensor.
  double item() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

// ---- differentiable operations ----

// Rank-2 by rank-2 matrix product.
Tensor matmul(const Tensor& a, const Tensor& b);
// Rank-1 vector times rank-2 matrix: v[k] x M[k x n] -> [n].
Tensor vecmat(const Tensor& v, const Tensor& m);

// Elementwise; operand shapes must agree exactly for the binary forms.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // all inputs must be > 0
Tensor softplus(const Tensor& a);

// Rank-1 concatenation, a followed by b. Either side may be empty.
Tensor concat(const Tensor& a, const Tensor& b);
// h[p] (x) g[q] -> [p x q].
Tensor outer_product(const Tensor& h, const Tensor& g);
// Row-major flattening of a rank-2 tensor to rank 1.
Tensor reshape_rowmajor(const Tensor& z);
// General reshape; element count must be preserved.
Tensor reshape(const Tensor& t, Shape target);
// Arithmetic mean across rows of M[k x d] -> [d]; k must be >= 1.
Tensor mean_rows(const Tensor& m);
Tensor sum(const Tensor& a);
Tensor dot(const Tensor& u, const Tensor& v);
// u.v / (|u||v|); both norms must be nonzero.
Tensor cosine_similarity(const Tensor& u, const Tensor& v);
// Stable softmax over a rank-1 tensor.
Tensor softmax(const Tensor& s);
// Stable log(sum(exp(s))) over a rank-1 tensor.
Tensor logsumexp(const Tensor& s);

// Row i of a rank-2 tensor; gradient routes only into that row.
Tensor pick_row(const Tensor& m, std::size_t i);
// Element i of a rank-1 tensor as a scalar.
Tensor pick_index(const Tensor& v, std::size_t i);
// k rank-1 tensors of equal length -> [k x d].
Tensor stack_rows(const std::vector<Tensor>& rows);
// k scalars -> [k].
Tensor stack_scalars(const std::vector<Tensor>& scalars);
// Gather rows of table[V x d] by id; gradient scatter-adds into the table.
Tensor embed_rows(const Tensor& table, const std::vector<std::uint32_t>& ids);
// M[n x d] + b[d] broadcast over rows.
Tensor add_row_bias(const Tensor& m, const Tensor& b);
// w[(p*q)] (or [1 x p*q]) contracted with a[p] (x) b[q] -> scalar,
// without materializing the outer product.
Tensor bilinear_form(const Tensor& w, const Tensor& a, const Tensor& b);

// Numerically stable -(y log sigma(u) + (1-y) log(1-sigma(u))) for a scalar
// logit u and a constant label y.
Tensor binary_cross_entropy_with_logits(const Tensor& u, double y);

// Reverse pass from a single-element loss. Gradients of all reachable
// parameter leaves are accumulated; repeated calls without zero_grad add up.
void backward(const Tensor& loss);

}  // namespace cograph
