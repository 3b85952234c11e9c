#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locavqg/util/rng.hpp"

namespace locavqg::nn {

using Matrix = Eigen::MatrixXd;

// A named trainable tensor plus its accumulated gradient and Adam state.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;

  explicit Parameter(std::string n, Matrix v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())),
        adam_m(Matrix::Zero(value.rows(), value.cols())),
        adam_v(Matrix::Zero(value.rows(), value.cols())) {}
};

// Reverse-mode autodiff node. `backward` reads `grad` and accumulates into
// the parents' grads. Nodes are created in topological order on a tape.
struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::function<void(Node&)> backward;
  std::vector<std::shared_ptr<Node>> parents;
  Parameter* param = nullptr;  // set for parameter leaves

  void ensure_grad() {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
  }
};

using Var = std::shared_ptr<Node>;

// Dynamic computation graph. One Graph per forward/backward pass.
class Graph {
 public:
  Var constant(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    tape_.push_back(node);
    return node;
  }

  Var param(Parameter& p) {
    auto node = std::make_shared<Node>();
    node->value = p.value;
    node->requires_grad = true;
    node->param = &p;
    tape_.push_back(node);
    return node;
  }

  Var make(Matrix value, std::vector<Var> parents,
           std::function<void(Node&)> backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->parents = std::move(parents);
    for (const auto& p : node->parents)
      if (p->requires_grad) node->requires_grad = true;
    if (node->requires_grad) node->backward = std::move(backward);
    tape_.push_back(node);
    return node;
  }

  // Seeds d(loss)/d(loss) = 1 and walks the tape in reverse. Parameter-leaf
  // grads are flushed into their Parameter at the end.
  void backward(const Var& loss) {
    if (loss->value.rows() != 1 || loss->value.cols() != 1)
      throw std::invalid_argument("backward: loss must be a 1x1 scalar");
    loss->ensure_grad();
    loss->grad(0, 0) = 1.0;
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node& node = **it;
      if (!node.requires_grad || node.grad.size() == 0) continue;
      if (node.backward) node.backward(node);
    }
    for (const auto& node : tape_)
      if (node->param && node->grad.size() != 0) node->param->grad += node->grad;
  }

  size_t size() const { return tape_.size(); }

 private:
  std::vector<Var> tape_;
};

// ---- ops ----

inline Var matmul(Graph& g, const Var& a, const Var& b) {
  return g.make(a->value * b->value, {a, b}, [a, b](Node& out) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += out.grad * b->value.transpose();
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad += a->value.transpose() * out.grad;
    }
  });
}

// A * B^T in one node (saves an explicit transpose in attention).
inline Var matmul_nt(Graph& g, const Var& a, const Var& b) {
  return g.make(a->value * b->value.transpose(), {a, b}, [a, b](Node& out) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += out.grad * b->value;
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad += out.grad.transpose() * a->value;
    }
  });
}

inline Var add(Graph& g, const Var& a, const Var& b) {
  return g.make(a->value + b->value, {a, b}, [a, b](Node& out) {
    if (a->requires_grad) { a->ensure_grad(); a->grad += out.grad; }
    if (b->requires_grad) { b->ensure_grad(); b->grad += out.grad; }
  });
}

// a is R x C, bias is 1 x C, broadcast over rows.
inline Var add_rowvec(Graph& g, const Var& a, const Var& bias) {
  Matrix v = a->value;
  v.rowwise() += bias->value.row(0);
  return g.make(std::move(v), {a, bias}, [a, bias](Node& out) {
    if (a->requires_grad) { a->ensure_grad(); a->grad += out.grad; }
    if (bias->requires_grad) {
      bias->ensure_grad();
      bias->grad.row(0) += out.grad.colwise().sum();
    }
  });
}

inline Var scale(Graph& g, const Var& a, double s) {
  return g.make(a->value * s, {a}, [a, s](Node& out) {
    if (a->requires_grad) { a->ensure_grad(); a->grad += out.grad * s; }
  });
}

inline Var relu(Graph& g, const Var& a) {
  return g.make(a->value.cwiseMax(0.0), {a}, [a](Node& out) {
    if (!a->requires_grad) return;
    a->ensure_grad();
    a->grad += (a->value.array() > 0.0).cast<double>().matrix().cwiseProduct(out.grad);
  });
}

inline Var slice_cols(Graph& g, const Var& a, Eigen::Index start, Eigen::Index n) {
  return g.make(a->value.middleCols(start, n), {a}, [a, start, n](Node& out) {
    if (!a->requires_grad) return;
    a->ensure_grad();
    a->grad.middleCols(start, n) += out.grad;
  });
}

inline Var concat_cols(Graph& g, const std::vector<Var>& parts) {
  Eigen::Index rows = parts.front()->value.rows(), cols = 0;
  for (const auto& p : parts) cols += p->value.cols();
  Matrix v(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p->value.cols()) = p->value;
    at += p->value.cols();
  }
  return g.make(std::move(v), parts, [parts](Node& out) {
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        p->grad += out.grad.middleCols(at, p->value.cols());
      }
      at += p->value.cols();
    }
  });
}

inline Matrix softmax_rows_value(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double mx = m.row(r).maxCoeff();
    Eigen::RowVectorXd e = (m.row(r).array() - mx).exp().matrix();
    out.row(r) = e / e.sum();
  }
  return out;
}

inline Var softmax_rows(Graph& g, const Var& a) {
  Matrix p = softmax_rows_value(a->value);
  return g.make(p, {a}, [a, p](Node& out) {
    if (!a->requires_grad) return;
    a->ensure_grad();
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double dot = out.grad.row(r).dot(p.row(r));
      a->grad.row(r) +=
          ((out.grad.row(r).array() - dot) * p.row(r).array()).matrix();
    }
  });
}

// Row-wise layer norm with learned gain/bias (both 1 x C).
inline Var layer_norm_rows(Graph& g, const Var& a, const Var& gain,
                           const Var& bias, double eps = 1e-5) {
  Eigen::Index rows = a->value.rows(), cols = a->value.cols();
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double mu = a->value.row(r).mean();
    Eigen::RowVectorXd centered = (a->value.row(r).array() - mu).matrix();
    double var = centered.array().square().mean();
    double is = 1.0 / std::sqrt(var + eps);
    inv_std(r) = is;
    xhat.row(r) = centered * is;
  }
  Matrix v(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    v.row(r) = (xhat.row(r).array() * gain->value.row(0).array()).matrix() +
               bias->value.row(0);
  return g.make(std::move(v), {a, gain, bias},
                [a, gain, bias, xhat, inv_std](Node& out) {
    if (gain->requires_grad) {
      gain->ensure_grad();
      gain->grad.row(0) += (out.grad.array() * xhat.array()).colwise().sum().matrix();
    }
    if (bias->requires_grad) {
      bias->ensure_grad();
      bias->grad.row(0) += out.grad.colwise().sum();
    }
    if (a->requires_grad) {
      a->ensure_grad();
      for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
        Eigen::RowVectorXd dxhat =
            (out.grad.row(r).array() * gain->value.row(0).array()).matrix();
        double mean_dxhat = dxhat.mean();
        double mean_dxhat_xhat = (dxhat.array() * xhat.row(r).array()).mean();
        a->grad.row(r) +=
            (inv_std(r) *
             (dxhat.array() - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat))
                .matrix();
      }
    }
  });
}

// Gathers rows of an embedding table (V x D) at the given ids (L x D out).
inline Var embedding_rows(Graph& g, const Var& table, const std::vector<int>& ids) {
  Matrix v(static_cast<Eigen::Index>(ids.size()), table->value.cols());
  for (size_t i = 0; i < ids.size(); ++i)
    v.row(static_cast<Eigen::Index>(i)) = table->value.row(ids[i]);
  return g.make(std::move(v), {table}, [table, ids](Node& out) {
    if (!table->requires_grad) return;
    table->ensure_grad();
    for (size_t i = 0; i < ids.size(); ++i)
      table->grad.row(ids[i]) += out.grad.row(static_cast<Eigen::Index>(i));
  });
}

// Mean over rows -> 1 x C (sequence pooling).
inline Var mean_rows(Graph& g, const Var& a) {
  Matrix v = a->value.colwise().mean();
  Eigen::Index rows = a->value.rows();
  return g.make(std::move(v), {a}, [a, rows](Node& out) {
    if (!a->requires_grad) return;
    a->ensure_grad();
    a->grad += out.grad.replicate(rows, 1) / static_cast<double>(rows);
  });
}

// Mean cross-entropy of row-wise logits against target ids. Rows whose
// target is `ignore_index` are excluded from the mean.
inline Var cross_entropy(Graph& g, const Var& logits,
                         const std::vector<int>& targets, int ignore_index = -1) {
  if (static_cast<Eigen::Index>(targets.size()) != logits->value.rows())
    throw std::invalid_argument("cross_entropy: target length mismatch");
  Matrix probs = softmax_rows_value(logits->value);
  int valid = 0;
  double loss = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == ignore_index) continue;
    ++valid;
    loss -= std::log(std::max(probs(static_cast<Eigen::Index>(i), targets[i]), 1e-300));
  }
  if (valid == 0) throw std::invalid_argument("cross_entropy: no valid targets");
  Matrix v(1, 1);
  v(0, 0) = loss / valid;
  return g.make(std::move(v), {logits}, [logits, probs, targets, valid,
                                         ignore_index](Node& out) {
    if (!logits->requires_grad) return;
    logits->ensure_grad();
    double scale = out.grad(0, 0) / valid;
    for (size_t i = 0; i < targets.size(); ++i) {
      if (targets[i] == ignore_index) continue;
      auto r = static_cast<Eigen::Index>(i);
      logits->grad.row(r) += scale * probs.row(r);
      logits->grad(r, targets[i]) -= scale;
    }
  });
}

// ---- initialization ----

inline Matrix xavier_init(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  double std_dev = std::sqrt(2.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std_dev * rng_normal(rng);
  return m;
}

inline Matrix normal_init(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                          double std_dev) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std_dev * rng_normal(rng);
  return m;
}

}  // namespace locavqg::nn
