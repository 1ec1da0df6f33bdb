#include "cograph/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace cograph {

namespace {

std::atomic<std::uint64_t> g_next_node_id{1};

std::shared_ptr<TensorNode> new_node(
    Shape shape, std::vector<double> value,
    std::vector<std::shared_ptr<TensorNode>> parents = {}) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->parents = std::move(parents);
  node->id = g_next_node_id.fetch_add(1, std::memory_order_relaxed);
  for (const auto& p : node->parents) {
    if (p->requires_grad) {
      node->requires_grad = true;
      break;
    }
  }
  return node;
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

// Elementwise unary op with value-dependent local derivative.
template <typename Fwd, typename Dfn>
Tensor unary_elementwise(const Tensor& a, Fwd fwd, Dfn dfn) {
  const auto& x = a.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  auto node = new_node(a.shape(), std::move(out), {a.node()});
  if (node->requires_grad) {
    node->backprop = [dfn](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      for (std::size_t i = 0; i < self.value.size(); ++i) {
        pg[i] += self.grad[i] * dfn(p.value[i], self.value[i]);
      }
    };
  }
  return Tensor(node);
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<double>& TensorNode::ensure_grad() {
  if (grad.empty() && !value.empty()) grad.assign(value.size(), 0.0);
  if (value.empty()) grad.clear();
  return grad;
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw ShapeError("Tensor::constant: " + shape_str(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  return Tensor(new_node(std::move(shape), std::move(values)));
}

Tensor Tensor::scalar(double v) { return constant({}, {v}); }

Tensor Tensor::param(Shape shape, std::vector<double> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node()->requires_grad = true;
  return t;
}

Tensor Tensor::zeros_param(Shape shape) {
  std::vector<double> values(shape_size(shape), 0.0);
  return param(std::move(shape), std::move(values));
}

Tensor Tensor::uniform_param(Shape shape, double radius, Rng& rng) {
  std::vector<double> values(shape_size(shape));
  for (double& v : values) v = rng.uniform(-radius, radius);
  return param(std::move(shape), std::move(values));
}

std::size_t Tensor::rows() const {
  require_rank(*this, 2, "rows");
  return shape()[0];
}

std::size_t Tensor::cols() const {
  require_rank(*this, 2, "cols");
  return shape()[1];
}

void Tensor::zero_grad() const { node_->grad.clear(); }

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item: tensor of shape " + shape_str(shape()) +
                     " is not a scalar");
  }
  return values()[0];
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul lhs");
  require_rank(b, 2, "matmul rhs");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t n = b.shape()[1];
  if (k != b.shape()[0]) {
    throw ShapeError("matmul: inner dimensions disagree, " +
                     shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  {
    const double* A = a.values().data();
    const double* B = b.values().data();
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = out.data() + i * n;
      for (std::size_t l = 0; l < k; ++l) {
        const double av = A[i * k + l];
        if (av == 0.0) continue;
        const double* brow = B + l * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
  auto node = new_node({m, n}, std::move(out), {a.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [m, k, n](TensorNode& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      const double* G = self.grad.data();
      if (pa.requires_grad) {
        auto& ga = pa.ensure_grad();
        const double* B = pb.value.data();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = G + i * n;
          for (std::size_t l = 0; l < k; ++l) {
            const double* brow = B + l * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
            ga[i * k + l] += s;
          }
        }
      }
      if (pb.requires_grad) {
        auto& gb = pb.ensure_grad();
        const double* A = pa.value.data();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = G + i * n;
          for (std::size_t l = 0; l < k; ++l) {
            const double av = A[i * k + l];
            if (av == 0.0) continue;
            double* gbrow = gb.data() + l * n;
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
          }
        }
      }
    };
  }
  return Tensor(node);
}

Tensor vecmat(const Tensor& v, const Tensor& m) {
  require_rank(v, 1, "vecmat lhs");
  require_rank(m, 2, "vecmat rhs");
  const std::size_t k = v.shape()[0], n = m.shape()[1];
  if (k != m.shape()[0]) {
    throw ShapeError("vecmat: inner dimensions disagree, " +
                     shape_str(v.shape()) + " x " + shape_str(m.shape()));
  }
  std::vector<double> out(n, 0.0);
  {
    const double* V = v.values().data();
    const double* M = m.values().data();
    for (std::size_t l = 0; l < k; ++l) {
      const double vl = V[l];
      if (vl == 0.0) continue;
      const double* mrow = M + l * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += vl * mrow[j];
    }
  }
  auto node = new_node({n}, std::move(out), {v.node(), m.node()});
  if (node->requires_grad) {
    node->backprop = [k, n](TensorNode& self) {
      auto& pv = *self.parents[0];
      auto& pm = *self.parents[1];
      const double* G = self.grad.data();
      if (pv.requires_grad) {
        auto& gv = pv.ensure_grad();
        const double* M = pm.value.data();
        for (std::size_t l = 0; l < k; ++l) {
          const double* mrow = M + l * n;
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G[j] * mrow[j];
          gv[l] += s;
        }
      }
      if (pm.requires_grad) {
        auto& gm = pm.ensure_grad();
        const double* V = pv.value.data();
        for (std::size_t l = 0; l < k; ++l) {
          const double vl = V[l];
          if (vl == 0.0) continue;
          double* gmrow = gm.data() + l * n;
          for (std::size_t j = 0; j < n; ++j) gmrow[j] += vl * G[j];
        }
      }
    };
  }
  return Tensor(node);
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.values()[i] + b.values()[i];
  auto node = new_node(a.shape(), std::move(out), {a.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      for (int side = 0; side < 2; ++side) {
        auto& p = *self.parents[side];
        if (!p.requires_grad) continue;
        auto& pg = p.ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          pg[i] += self.grad[i];
      }
    };
  }
  return Tensor(node);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.values()[i] - b.values()[i];
  auto node = new_node(a.shape(), std::move(out), {a.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        auto& g = pa.ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          g[i] += self.grad[i];
      }
      if (pb.requires_grad) {
        auto& g = pb.ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          g[i] -= self.grad[i];
      }
    };
  }
  return Tensor(node);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.values()[i] * b.values()[i];
  auto node = new_node(a.shape(), std::move(out), {a.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        auto& g = pa.ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          g[i] += self.grad[i] * pb.value[i];
      }
      if (pb.requires_grad) {
        auto& g = pb.ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          g[i] += self.grad[i] * pa.value[i];
      }
    };
  }
  return Tensor(node);
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary_elementwise(
      a, [c](double x) { return x + c; },
      [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double c) {
  return unary_elementwise(
      a, [c](double x) { return x * c; },
      [c](double, double) { return c; });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double x : a.values()) {
    if (!(x > 0.0)) {
      throw DomainError("log: input must be positive, got " +
                        std::to_string(x));
    }
  }
  return unary_elementwise(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor softplus(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return stable_softplus(x); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_rank(a, 1, "concat lhs");
  require_rank(b, 1, "concat rhs");
  const std::size_t p = a.size(), q = b.size();
  std::vector<double> out;
  out.reserve(p + q);
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  auto node = new_node({p + q}, std::move(out), {a.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [p, q](TensorNode& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        auto& g = pa.ensure_grad();
        for (std::size_t i = 0; i < p; ++i) g[i] += self.grad[i];
      }
      if (pb.requires_grad) {
        auto& g = pb.ensure_grad();
        for (std::size_t i = 0; i < q; ++i) g[i] += self.grad[p + i];
      }
    };
  }
  return Tensor(node);
}

Tensor outer_product(const Tensor& h, const Tensor& g) {
  require_rank(h, 1, "outer_product lhs");
  require_rank(g, 1, "outer_product rhs");
  const std::size_t p = h.size(), q = g.size();
  std::vector<double> out(p * q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      out[i * q + j] = h.values()[i] * g.values()[j];
    }
  }
  auto node = new_node({p, q}, std::move(out), {h.node(), g.node()});
  if (node->requires_grad) {
    node->backprop = [p, q](TensorNode& self) {
      auto& ph = *self.parents[0];
      auto& pg = *self.parents[1];
      if (ph.requires_grad) {
        auto& gh = ph.ensure_grad();
        for (std::size_t i = 0; i < p; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < q; ++j)
            s += self.grad[i * q + j] * pg.value[j];
          gh[i] += s;
        }
      }
      if (pg.requires_grad) {
        auto& gg = pg.ensure_grad();
        for (std::size_t j = 0; j < q; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < p; ++i)
            s += self.grad[i * q + j] * ph.value[i];
          gg[j] += s;
        }
      }
    };
  }
  return Tensor(node);
}

Tensor reshape(const Tensor& t, Shape target) {
  if (shape_size(target) != t.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(t.shape()) + " as " +
                     shape_str(target));
  }
  auto node = new_node(std::move(target), t.values(), {t.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      for (std::size_t i = 0; i < self.value.size(); ++i)
        pg[i] += self.grad[i];
    };
  }
  return Tensor(node);
}

Tensor reshape_rowmajor(const Tensor& z) {
  require_rank(z, 2, "reshape_rowmajor");
  return reshape(z, {z.size()});
}

Tensor mean_rows(const Tensor& m) {
  require_rank(m, 2, "mean_rows");
  const std::size_t k = m.shape()[0], d = m.shape()[1];
  if (k == 0) throw DomainError("mean_rows: no rows to average");
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[j] += m.values()[i * d + j];
  }
  for (double& v : out) v /= static_cast<double>(k);
  auto node = new_node({d}, std::move(out), {m.node()});
  if (node->requires_grad) {
    node->backprop = [k, d](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      const double inv = 1.0 / static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < d; ++j)
          pg[i * d + j] += self.grad[j] * inv;
      }
    };
  }
  return Tensor(node);
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  auto node = new_node({}, {s}, {a.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      for (double& g : pg) g += self.grad[0];
    };
  }
  return Tensor(node);
}

Tensor dot(const Tensor& u, const Tensor& v) {
  require_rank(u, 1, "dot lhs");
  require_rank(v, 1, "dot rhs");
  require_same_shape(u, v, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += u.values()[i] * v.values()[i];
  auto node = new_node({}, {s}, {u.node(), v.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      auto& pu = *self.parents[0];
      auto& pv = *self.parents[1];
      const double g = self.grad[0];
      if (pu.requires_grad) {
        auto& gu = pu.ensure_grad();
        for (std::size_t i = 0; i < gu.size(); ++i) gu[i] += g * pv.value[i];
      }
      if (pv.requires_grad) {
        auto& gv = pv.ensure_grad();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g * pu.value[i];
      }
    };
  }
  return Tensor(node);
}

Tensor cosine_similarity(const Tensor& u, const Tensor& v) {
  require_rank(u, 1, "cosine_similarity lhs");
  require_rank(v, 1, "cosine_similarity rhs");
  require_same_shape(u, v, "cosine_similarity");
  double uu = 0.0, vv = 0.0, uv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u.values()[i] * u.values()[i];
    vv += v.values()[i] * v.values()[i];
    uv += u.values()[i] * v.values()[i];
  }
  if (uu == 0.0 || vv == 0.0) {
    throw DomainError("cosine_similarity: zero-norm operand");
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  const double c = uv / (nu * nv);
  auto node = new_node({}, {c}, {u.node(), v.node()});
  if (node->requires_grad) {
    node->backprop = [nu, nv, c](TensorNode& self) {
      auto& pu = *self.parents[0];
      auto& pv = *self.parents[1];
      const double g = self.grad[0];
      const double inv = 1.0 / (nu * nv);
      if (pu.requires_grad) {
        auto& gu = pu.ensure_grad();
        for (std::size_t i = 0; i < gu.size(); ++i) {
          gu[i] += g * (pv.value[i] * inv - c * pu.value[i] / (nu * nu));
        }
      }
      if (pv.requires_grad) {
        auto& gv = pv.ensure_grad();
        for (std::size_t i = 0; i < gv.size(); ++i) {
          gv[i] += g * (pu.value[i] * inv - c * pv.value[i] / (nv * nv));
        }
      }
    };
  }
  return Tensor(node);
}

Tensor softmax(const Tensor& s) {
  require_rank(s, 1, "softmax");
  const std::size_t n = s.size();
  if (n == 0) throw ShapeError("softmax: empty input");
  double m = s.values()[0];
  for (double v : s.values()) m = std::max(m, v);
  std::vector<double> out(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(s.values()[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  auto node = new_node({n}, std::move(out), {s.node()});
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      double inner = 0.0;
      for (std::size_t i = 0; i < self.value.size(); ++i)
        inner += self.grad[i] * self.value[i];
      for (std::size_t i = 0; i < self.value.size(); ++i)
        pg[i] += self.value[i] * (self.grad[i] - inner);
    };
  }
  return Tensor(node);
}

Tensor logsumexp(const Tensor& s) {
  require_rank(s, 1, "logsumexp");
  const std::size_t n = s.size();
  if (n == 0) throw ShapeError("logsumexp: empty input");
  double m = s.values()[0];
  for (double v : s.values()) m = std::max(m, v);
  double z = 0.0;
  for (double v : s.values()) z += std::exp(v - m);
  auto node = new_node({}, {m + std::log(z)}, {s.node()});
  if (node->requires_grad) {
    node->backprop = [m, z](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      const double g = self.grad[0];
      for (std::size_t i = 0; i < pg.size(); ++i) {
        pg[i] += g * std::exp(p.value[i] - m) / z;
      }
    };
  }
  return Tensor(node);
}

Tensor pick_row(const Tensor& m, std::size_t i) {
  require_rank(m, 2, "pick_row");
  const std::size_t rows = m.shape()[0], d = m.shape()[1];
  if (i >= rows) {
    throw ShapeError("pick_row: row " + std::to_string(i) +
                     " out of range for " + shape_str(m.shape()));
  }
  std::vector<double> out(m.values().begin() + i * d,
                          m.values().begin() + (i + 1) * d);
  auto node = new_node({d}, std::move(out), {m.node()});
  if (node->requires_grad) {
    node->backprop = [i, d](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      for (std::size_t j = 0; j < d; ++j) pg[i * d + j] += self.grad[j];
    };
  }
  return Tensor(node);
}

Tensor pick_index(const Tensor& v, std::size_t i) {
  require_rank(v, 1, "pick_index");
  if (i >= v.size()) {
    throw ShapeError("pick_index: index " + std::to_string(i) +
                     " out of range for " + shape_str(v.shape()));
  }
  auto node = new_node({}, {v.values()[i]}, {v.node()});
  if (node->requires_grad) {
    node->backprop = [i](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      p.ensure_grad()[i] += self.grad[0];
    };
  }
  return Tensor(node);
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t d = rows[0].size();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  std::vector<std::shared_ptr<TensorNode>> parents;
  parents.reserve(rows.size());
  for (const auto& r : rows) {
    require_rank(r, 1, "stack_rows");
    if (r.size() != d) throw ShapeError("stack_rows: ragged rows");
    out.insert(out.end(), r.values().begin(), r.values().end());
    parents.push_back(r.node());
  }
  auto node = new_node({rows.size(), d}, std::move(out), std::move(parents));
  if (node->requires_grad) {
    node->backprop = [d](TensorNode& self) {
      for (std::size_t r = 0; r < self.parents.size(); ++r) {
        auto& p = *self.parents[r];
        if (!p.requires_grad) continue;
        auto& pg = p.ensure_grad();
        for (std::size_t j = 0; j < d; ++j) pg[j] += self.grad[r * d + j];
      }
    };
  }
  return Tensor(node);
}

Tensor stack_scalars(const std::vector<Tensor>& scalars) {
  if (scalars.empty()) throw ShapeError("stack_scalars: no inputs");
  std::vector<double> out;
  out.reserve(scalars.size());
  std::vector<std::shared_ptr<TensorNode>> parents;
  parents.reserve(scalars.size());
  for (const auto& s : scalars) {
    if (s.size() != 1) {
      throw ShapeError("stack_scalars: non-scalar input of shape " +
                       shape_str(s.shape()));
    }
    out.push_back(s.values()[0]);
    parents.push_back(s.node());
  }
  auto node =
      new_node({scalars.size()}, std::move(out), std::move(parents));
  if (node->requires_grad) {
    node->backprop = [](TensorNode& self) {
      for (std::size_t i = 0; i < self.parents.size(); ++i) {
        auto& p = *self.parents[i];
        if (!p.requires_grad) continue;
        p.ensure_grad()[0] += self.grad[i];
      }
    };
  }
  return Tensor(node);
}

Tensor embed_rows(const Tensor& table, const std::vector<std::uint32_t>& ids) {
  require_rank(table, 2, "embed_rows");
  const std::size_t v = table.shape()[0], d = table.shape()[1];
  std::vector<double> out(ids.size() * d);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= v) {
      throw ShapeError("embed_rows: feature id " + std::to_string(ids[r]) +
                       " out of range for table " + shape_str(table.shape()));
    }
    std::copy_n(table.values().begin() + ids[r] * d, d, out.begin() + r * d);
  }
  auto node = new_node({ids.size(), d}, std::move(out), {table.node()});
  if (node->requires_grad) {
    node->backprop = [ids, d](TensorNode& self) {
      auto& p = *self.parents[0];
      if (!p.requires_grad) return;
      auto& pg = p.ensure_grad();
      for (std::size_t r = 0; r < ids.size(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
          pg[ids[r] * d + j] += self.grad[r * d + j];
        }
      }
    };
  }
  return Tensor(node);
}

Tensor add_row_bias(const Tensor& m, const Tensor& b) {
  require_rank(m, 2, "add_row_bias lhs");
  require_rank(b, 1, "add_row_bias rhs");
  const std::size_t n = m.shape()[0], d = m.shape()[1];
  if (b.size() != d) {
    throw ShapeError("add_row_bias: bias " + shape_str(b.shape()) +
                     " does not match " + shape_str(m.shape()));
  }
  std::vector<double> out(m.values());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] += b.values()[j];
  }
  auto node = new_node({n, d}, std::move(out), {m.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [n, d](TensorNode& self) {
      auto& pm = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pm.requires_grad) {
        auto& g = pm.ensure_grad();
        for (std::size_t i = 0; i < n * d; ++i) g[i] += self.grad[i];
      }
      if (pb.requires_grad) {
        auto& g = pb.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < d; ++j) g[j] += self.grad[i * d + j];
        }
      }
    };
  }
  return Tensor(node);
}

Tensor bilinear_form(const Tensor& w, const Tensor& a, const Tensor& b) {
  require_rank(a, 1, "bilinear_form mid");
  require_rank(b, 1, "bilinear_form rhs");
  const std::size_t p = a.size(), q = b.size();
  if (w.size() != p * q) {
    throw ShapeError("bilinear_form: weight of " + std::to_string(w.size()) +
                     " entries cannot contract [" + std::to_string(p) +
                     "] with [" + std::to_string(q) + "]");
  }
  const double* W = w.values().data();
  const double* A = a.values().data();
  const double* B = b.values().data();
  double u = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double* wrow = W + i * q;
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) s += wrow[j] * B[j];
    u += A[i] * s;
  }
  auto node = new_node({}, {u}, {w.node(), a.node(), b.node()});
  if (node->requires_grad) {
    node->backprop = [p, q](TensorNode& self) {
      auto& pw = *self.parents[0];
      auto& pa = *self.parents[1];
      auto& pb = *self.parents[2];
      const double g = self.grad[0];
      const double* W = pw.value.data();
      const double* A = pa.value.data();
      const double* B = pb.value.data();
      if (pw.requires_grad) {
        auto& gw = pw.ensure_grad();
        for (std::size_t i = 0; i < p; ++i) {
          const double ga = g * A[i];
          double* grow = gw.data() + i * q;
          for (std::size_t j = 0; j < q; ++j) grow[j] += ga * B[j];
        }
      }
      if (pa.requires_grad) {
        auto& ga = pa.ensure_grad();
        for (std::size_t i = 0; i < p; ++i) {
          const double* wrow = W + i * q;
          double s = 0.0;
          for (std::size_t j = 0; j < q; ++j) s += wrow[j] * B[j];
          ga[i] += g * s;
        }
      }
      if (pb.requires_grad) {
        auto& gb = pb.ensure_grad();
        for (std::size_t j = 0; j < q; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < p; ++i) s += W[i * q + j] * A[i];
          gb[j] += g * s;
        }
      }
    };
  }
  return Tensor(node);
}

Tensor binary_cross_entropy_with_logits(const Tensor& u, double y) {
  if (u.size() != 1) {
    throw ShapeError("binary_cross_entropy_with_logits: logit must be scalar");
  }
  // softplus(u) - y*u, the stable form of -(y log s(u) + (1-y) log(1-s(u))).
  return add(softplus(u), mul_scalar(u, -y));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward: loss must be a single-element tensor");
  }
  TensorNode* root = loss.node().get();
  root->ensure_grad();
  root->grad[0] += 1.0;
  if (!root->requires_grad && !root->backprop) return;

  // Reachable sub-tape, pruned at nodes that do not require gradients.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<TensorNode*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    TensorNode* node = stack.back();
    stack.pop_back();
    order.push_back(node);
    for (const auto& p : node->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) {
        stack.push_back(p.get());
      }
    }
  }
  // Node ids increase on creation, so descending id is a topological order.
  std::sort(order.begin(), order.end(),
            [](const TensorNode* a, const TensorNode* b) { return a->id > b->id; });
  for (TensorNode* node : order) {
    if (node->backprop) {
      node->ensure_grad();
      node->backprop(*node);
    }
  }
}

}  // namespace cograph
