#pragma once

// Loss/gradient routines behind the linear and neural models. Exposed so the
// analytic gradients can be checked against finite differences.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "egoadl/matrix.hpp"

namespace egoadl::optim {

/// Weighted multinomial logistic loss
///   sum_i s_i · (−log softmax(W x_i + b)[y_i]) + (l2/2)·‖W‖²
/// with params laid out as W (K x d, row-major) followed by b (K).
/// Writes the gradient into `grad` when it is non-empty.
double logreg_objective(const Matrix& x, std::span<const int> y, std::span<const double> sample_weight,
                        std::size_t num_classes, double l2, std::span<const double> params,
                        std::span<double> grad);

struct GradientDescentResult {
  std::vector<double> params;
  int iterations = 0;
  std::string stop_reason;
  double objective = 0.0;
};

/// Full-batch gradient descent with Armijo backtracking; the trial step
/// starts from the Barzilai-Borwein estimate of the previous iteration.
GradientDescentResult fit_logreg(const Matrix& x, std::span<const int> y, std::span<const double> sample_weight,
                                 std::size_t num_classes, double l2, int max_iter, double grad_tol);

/// One-hidden-layer ReLU network with softmax output.
struct MlpShape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t outputs = 0;

  std::size_t param_count() const { return inputs * hidden + hidden + hidden * outputs + outputs; }
};

/// Mean cross-entropy over `rows` of x; gradient written when non-empty.
double mlp_objective(const MlpShape& shape, std::span<const double> params, const Matrix& x,
                     std::span<const std::size_t> rows, std::span<const int> y, std::span<double> grad);

/// Class probabilities for one input row.
void mlp_forward(const MlpShape& shape, std::span<const double> params, std::span<const double> x,
                 std::span<double> probs);

void softmax_inplace(std::span<double> z);

}  // namespace egoadl::optim
