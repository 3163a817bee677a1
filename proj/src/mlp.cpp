#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "egoadl/optim.hpp"
#include "egoadl/random.hpp"
#include "model_impl.hpp"

namespace egoadl {
namespace optim {

double mlp_objective(const MlpShape& s, std::span<const double> params, const Matrix& x,
                     std::span<const std::size_t> rows, std::span<const int> y, std::span<double> grad) {
  const std::size_t d = s.inputs, h = s.hidden, k = s.outputs;
  const double* w1 = params.data();
  const double* b1 = w1 + d * h;
  const double* w2 = b1 + h;
  const double* b2 = w2 + h * k;
  const bool want_grad = !grad.empty();
  double *gw1 = nullptr, *gb1 = nullptr, *gw2 = nullptr, *gb2 = nullptr;
  if (want_grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    gw1 = grad.data();
    gb1 = gw1 + d * h;
    gw2 = gb1 + h;
    gb2 = gw2 + h * k;
  }

  std::vector<double> a(h), z(k), delta_h(h);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    const auto xi = x.row(r);
    std::copy(b1, b1 + h, a.begin());
    for (std::size_t j = 0; j < d; ++j) {
      const double v = xi[j];
      if (v == 0.0) continue;
      const double* wj = w1 + j * h;
      for (std::size_t u = 0; u < h; ++u) a[u] += v * wj[u];
    }
    for (double& v : a) v = v > 0.0 ? v : 0.0;
    std::copy(b2, b2 + k, z.begin());
    for (std::size_t u = 0; u < h; ++u) {
      if (a[u] == 0.0) continue;
      const double* wu = w2 + u * k;
      for (std::size_t c = 0; c < k; ++c) z[c] += a[u] * wu[c];
    }
    softmax_inplace(z);
    const auto yi = static_cast<std::size_t>(y[r]);
    loss -= std::log(std::max(z[yi], std::numeric_limits<double>::min()));
    if (!want_grad) continue;

    // z now holds probabilities; dL/dlogits = (p - onehot) / n.
    for (std::size_t c = 0; c < k; ++c) z[c] = (z[c] - (c == yi ? 1.0 : 0.0)) * inv_n;
    for (std::size_t c = 0; c < k; ++c) gb2[c] += z[c];
    for (std::size_t u = 0; u < h; ++u) {
      double back = 0.0;
      const double* wu = w2 + u * k;
      double* gu = gw2 + u * k;
      for (std::size_t c = 0; c < k; ++c) {
        gu[c] += a[u] * z[c];
        back += wu[c] * z[c];
      }
      delta_h[u] = a[u] > 0.0 ? back : 0.0;
    }
    for (std::size_t u = 0; u < h; ++u) gb1[u] += delta_h[u];
    for (std::size_t j = 0; j < d; ++j) {
      const double v = xi[j];
      if (v == 0.0) continue;
      double* gj = gw1 + j * h;
      for (std::size_t u = 0; u < h; ++u) gj[u] += v * delta_h[u];
    }
  }
  return loss * inv_n;
}

void mlp_forward(const MlpShape& s, std::span<const double> params, std::span<const double> x,
                 std::span<double> probs) {
  const std::size_t d = s.inputs, h = s.hidden, k = s.outputs;
  const double* w1 = params.data();
  const double* b1 = w1 + d * h;
  const double* w2 = b1 + h;
  const double* b2 = w2 + h * k;
  std::vector<double> a(b1, b1 + h);
  for (std::size_t j = 0; j < d; ++j) {
    const double* wj = w1 + j * h;
    for (std::size_t u = 0; u < h; ++u) a[u] += x[j] * wj[u];
  }
  std::copy(b2, b2 + k, probs.begin());
  for (std::size_t u = 0; u < h; ++u) {
    if (a[u] <= 0.0) continue;
    const double* wu = w2 + u * k;
    for (std::size_t c = 0; c < k; ++c) probs[c] += a[u] * wu[c];
  }
  softmax_inplace(probs);
}

}  // namespace optim

namespace detail {

namespace {

void glorot_init(std::span<double> out, std::size_t fan_in, std::size_t fan_out, CounterRng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : out) v = rng.uniform(-bound, bound);
}

}  // namespace

MlpModel train_mlp(const Matrix& x, std::span<const int> y, std::size_t k, const MlpParams& p, std::uint64_t seed,
                   TrainingMeta& meta) {
  const optim::MlpShape shape{x.cols(), static_cast<std::size_t>(p.hidden), k};
  const std::size_t d = shape.inputs, h = shape.hidden;
  CounterRng rng(seed, 0);

  std::vector<double> params(shape.param_count());
  {
    std::span<double> all(params);
    glorot_init(all.subspan(0, d * h + h), d, h, rng);
    glorot_init(all.subspan(d * h + h), h, k, rng);
  }

  // Stratified validation split: round(fraction * n_c) rows per class,
  // always leaving at least one training row per class.
  std::vector<std::size_t> train_rows, val_rows;
  {
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i = 0; i < x.rows(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);
    for (auto& rows : by_class) {
      std::size_t n_val = 0;
      if (p.early_stopping && rows.size() > 1) {
        n_val = static_cast<std::size_t>(std::llround(p.validation_fraction * static_cast<double>(rows.size())));
        n_val = std::min(n_val, rows.size() - 1);
      }
      rng.shuffle(rows);
      val_rows.insert(val_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
      train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
    }
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
  }
  const bool early = p.early_stopping && !val_rows.empty();

  std::vector<double> grad(params.size()), velocity(params.size(), 0.0), best_params = params;
  double lr = p.learning_rate;
  double best_train = std::numeric_limits<double>::infinity();
  double best_val = std::numeric_limits<double>::infinity();
  int train_stall = 0, val_stall = 0;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, p.batch_size));

  meta.stop_reason = "max-iterations";
  int epoch = 0;
  while (epoch < p.max_epochs) {
    ++epoch;
    rng.shuffle(train_rows);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_rows.size(); start += batch) {
      const std::size_t len = std::min(batch, train_rows.size() - start);
      std::span<const std::size_t> rows(train_rows.data() + start, len);
      epoch_loss += optim::mlp_objective(shape, params, x, rows, y, grad) * static_cast<double>(len);
      // SGD with Nesterov momentum.
      for (std::size_t j = 0; j < params.size(); ++j) {
        velocity[j] = p.momentum * velocity[j] - lr * grad[j];
        params[j] += p.momentum * velocity[j] - lr * grad[j];
      }
    }
    epoch_loss /= static_cast<double>(train_rows.size());

    if (epoch_loss > best_train - p.tol) {
      if (++train_stall >= p.lr_patience) {
        lr /= p.lr_divisor;
        train_stall = 0;
      }
    } else {
      train_stall = 0;
    }
    best_train = std::min(best_train, epoch_loss);

    if (early) {
      const double val_loss = optim::mlp_objective(shape, params, x, val_rows, y, {});
      if (val_loss < best_val - p.tol) {
        best_val = val_loss;
        best_params = params;
        val_stall = 0;
      } else if (++val_stall >= p.patience) {
        meta.stop_reason = "early-stopped";
        break;
      }
    }
    if (lr < 1e-6) {
      meta.stop_reason = "converged";
      break;
    }
  }
  if (early) params = best_params;
  meta.iterations = epoch;
  return MlpModel{h, std::move(params)};
}

void mlp_proba(const MlpModel& m, std::size_t inputs, std::size_t k, std::span<const double> x,
               std::span<double> out) {
  optim::mlp_forward({inputs, m.hidden, k}, m.params, x, out);
}

}  // namespace detail
}  // namespace egoadl
