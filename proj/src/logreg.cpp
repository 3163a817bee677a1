#include <algorithm>
#include <cmath>
#include <limits>

#include "egoadl/optim.hpp"

namespace egoadl::optim {

void softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

double logreg_objective(const Matrix& x, std::span<const int> y, std::span<const double> sample_weight,
                        std::size_t k, double l2, std::span<const double> params, std::span<double> grad) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double* w = params.data();
  const double* b = params.data() + k * d;
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  double* gw = want_grad ? grad.data() : nullptr;
  double* gb = want_grad ? grad.data() + k * d : nullptr;

  std::vector<double> z(k);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      double s = b[c];
      const double* wc = w + c * d;
      for (std::size_t j = 0; j < d; ++j) s += wc[j] * xi[j];
      z[c] = s;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double log_norm = m + std::log(sum);
    const auto yi = static_cast<std::size_t>(y[i]);
    const double si = sample_weight[i];
    loss += si * (log_norm - z[yi]);
    if (want_grad) {
      for (std::size_t c = 0; c < k; ++c) {
        const double coef = si * (std::exp(z[c] - log_norm) - (c == yi ? 1.0 : 0.0));
        if (coef == 0.0) continue;
        double* gc = gw + c * d;
        for (std::size_t j = 0; j < d; ++j) gc[j] += coef * xi[j];
        gb[c] += coef;
      }
    }
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < k * d; ++j) {
    reg += w[j] * w[j];
    if (want_grad) gw[j] += l2 * w[j];
  }
  return loss + 0.5 * l2 * reg;
}

GradientDescentResult fit_logreg(const Matrix& x, std::span<const int> y, std::span<const double> sample_weight,
                                 std::size_t k, double l2, int max_iter, double grad_tol) {
  const std::size_t p = k * x.cols() + k;
  GradientDescentResult res;
  res.params.assign(p, 0.0);
  std::vector<double> grad(p), trial(p), trial_grad(p);

  double f = logreg_objective(x, y, sample_weight, k, l2, res.params, grad);
  auto inf_norm = [](const std::vector<double>& g) {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::abs(v));
    return m;
  };
  double step = 1.0 / std::max(1.0, inf_norm(grad));
  constexpr double kArmijo = 1e-4;

  res.stop_reason = "max-iterations";
  int it = 0;
  for (; it < max_iter; ++it) {
    if (inf_norm(grad) < grad_tol) {
      res.stop_reason = "converged";
      break;
    }
    double g2 = 0.0;
    for (double v : grad) g2 += v * v;

    double t = step;
    double f_new = f;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = res.params[j] - t * grad[j];
      f_new = logreg_objective(x, y, sample_weight, k, l2, trial, trial_grad);
      if (f_new <= f - kArmijo * t * g2) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No representable decrease left along the gradient.
      res.stop_reason = "converged";
      break;
    }
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double s = trial[j] - res.params[j];
      const double yv = trial_grad[j] - grad[j];
      ss += s * s;
      sy += s * yv;
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 2.0 * t;
    res.params.swap(trial);
    grad.swap(trial_grad);
    f = f_new;
  }
  res.iterations = it;
  res.objective = f;
  return res;
}

}  // namespace egoadl::optim
