#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "locavqg/nn/graph.hpp"

namespace locavqg::qgen {

using nn::Matrix;

namespace detail {

// Row-wise log-softmax of `logits / temperature`, max-subtracted for
// stability.
inline Matrix log_softmax_rows(const Matrix& logits, double temperature) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::RowVectorXd z = logits.row(r) / temperature;
    double m = z.maxCoeff();
    double lse = std::log((z.array() - m).exp().sum()) + m;
    out.row(r) = z.array() - lse;
  }
  return out;
}

}  // namespace detail

struct DistillLoss {
  double value = 0.0;
  double hard = 0.0;  // cross-entropy term
  double soft = 0.0;  // temperature-scaled KL term
  Matrix grad;        // d value / d student_logits
  int valid_positions = 0;
};

// Position-averaged mixture of hard cross-entropy against the reference
// tokens and softened KL(teacher || student), the KL scaled by T^2 so its
// gradient magnitude stays comparable across temperatures:
//
//   value = alpha * CE + (1 - alpha) * T^2 * KL
//
// Positions whose target equals ignore_index (padding) contribute nothing.
// The analytic gradient per valid row is
//
//   [alpha * (softmax(s) - onehot) + (1 - alpha) * T * (softmax(s/T) - softmax(t/T))] / n_valid
inline DistillLoss distillation_loss(const Matrix& student_logits,
                                     const Matrix& teacher_logits,
                                     const std::vector<int>& targets,
                                     double alpha, double temperature,
                                     int ignore_index = -1) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("distillation_loss: alpha must be in [0, 1]");
  if (!(temperature > 0.0))
    throw std::invalid_argument("distillation_loss: temperature must be positive");
  if (student_logits.rows() != teacher_logits.rows() ||
      student_logits.cols() != teacher_logits.cols())
    throw std::invalid_argument("distillation_loss: student/teacher logit shapes differ");
  if (static_cast<Eigen::Index>(targets.size()) != student_logits.rows())
    throw std::invalid_argument("distillation_loss: target length does not match logit rows");

  const Eigen::Index rows = student_logits.rows();
  const Eigen::Index cols = student_logits.cols();
  const double t2 = temperature * temperature;

  int valid = 0;
  for (int t : targets)
    if (t != ignore_index) {
      if (t < 0 || t >= cols)
        throw std::invalid_argument("distillation_loss: target id out of vocabulary range");
      ++valid;
    }
  if (valid == 0)
    throw std::invalid_argument("distillation_loss: no valid (non-ignored) positions");

  Matrix log_q1 = detail::log_softmax_rows(student_logits, 1.0);
  Matrix log_qt = detail::log_softmax_rows(student_logits, temperature);
  Matrix log_pt = detail::log_softmax_rows(teacher_logits, temperature);

  DistillLoss out;
  out.valid_positions = valid;
  out.grad = Matrix::Zero(rows, cols);
  const double inv = 1.0 / valid;

  for (Eigen::Index r = 0; r < rows; ++r) {
    int target = targets[static_cast<size_t>(r)];
    if (target == ignore_index) continue;

    out.hard += -log_q1(r, target) * inv;
    double kl = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      double p = std::exp(log_pt(r, c));
      if (p > 0.0) kl += p * (log_pt(r, c) - log_qt(r, c));
    }
    out.soft += t2 * kl * inv;

    if (alpha > 0.0) {
      for (Eigen::Index c = 0; c < cols; ++c)
        out.grad(r, c) += alpha * std::exp(log_q1(r, c)) * inv;
      out.grad(r, target) -= alpha * inv;
    }
    if (alpha < 1.0) {
      double w = (1.0 - alpha) * temperature * inv;
      for (Eigen::Index c = 0; c < cols; ++c)
        out.grad(r, c) += w * (std::exp(log_qt(r, c)) - std::exp(log_pt(r, c)));
    }
  }

  // alpha == 1 must reproduce plain cross-entropy bit for bit, so the soft
  // term is dropped rather than multiplied by zero.
  out.value = (alpha >= 1.0) ? out.hard
            : (alpha <= 0.0) ? out.soft
                             : alpha * out.hard + (1.0 - alpha) * out.soft;
  return out;
}

// Autodiff wrapper: the loss enters the tape as a scalar node whose backward
// pass injects the analytic gradient into the student logits.
inline nn::Var distillation_loss_node(nn::Graph& g, const nn::Var& student_logits,
                                      const Matrix& teacher_logits,
                                      const std::vector<int>& targets,
                                      double alpha, double temperature,
                                      int ignore_index = -1) {
  DistillLoss dl = distillation_loss(student_logits->value, teacher_logits, targets,
                                     alpha, temperature, ignore_index);
  Matrix grad = dl.grad;
  nn::Var src = student_logits;
  return g.make(Matrix::Constant(1, 1, dl.value), {student_logits},
                [src, grad](nn::Node& self) {
    if (!src->requires_grad) return;
    src->ensure_grad();
    src->grad += self.grad(0, 0) * grad;
  });
}

}  // namespace locavqg::qgen
