#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "tcm/classify.hpp"
#include "tcm/rng.hpp"

namespace tcm {

namespace {

constexpr double kTau = 1e-12;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// Lazily computed rows of K(x_i, x_j), FIFO-evicted beyond a row budget.
class KernelCache {
 public:
  KernelCache(const Matrix& x, double gamma, std::size_t max_rows)
      : x_(x), gamma_(gamma), rows_(x.rows()), max_rows_(std::max<std::size_t>(2, max_rows)) {}

  const std::vector<double>& row(std::size_t i) {
    if (rows_[i].empty()) {
      if (order_.size() >= max_rows_) {
        rows_[order_.front()].clear();
        rows_[order_.front()].shrink_to_fit();
        order_.pop_front();
      }
      auto& r = rows_[i];
      r.resize(x_.rows());
      for (std::size_t j = 0; j < x_.rows(); ++j)
        r[j] = std::exp(-gamma_ * sq_dist(x_.row(i), x_.row(j)));
      order_.push_back(i);
    }
    return rows_[i];
  }

 private:
  const Matrix& x_;
  double gamma_;
  std::vector<std::vector<double>> rows_;
  std::deque<std::size_t> order_;
  std::size_t max_rows_;
};

// Soft-margin dual  min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0,
// Q_ij = y_i y_j K_ij, solved by SMO with the second-order working-set
// selection of Fan, Chen and Lin (as in LIBSVM), without shrinking.
SvcModel solve_dual(const Matrix& x, std::span<const int> labels, const SvcConfig& cfg,
                    double gamma, SvcTrainingInfo* info) {
  const std::size_t n = x.rows();
  std::vector<double> y(n);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ParameterError("svc: labels must be 0 or 1");
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    pos += labels[i] == 1 ? 1 : 0;
  }
  if (pos == 0 || pos == n) throw TrainingError("svc: training labels contain a single class");
  const double c = cfg.c;

  std::size_t budget = cfg.cache_rows;
  if (budget == 0) {
    const std::size_t bytes = std::size_t{512} << 20;
    budget = std::max<std::size_t>(2, bytes / (sizeof(double) * std::max<std::size_t>(1, n)));
  }
  KernelCache kernel(x, gamma, std::min(budget, n));

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  std::vector<std::size_t> scan(n);
  std::iota(scan.begin(), scan.end(), 0);
  if (cfg.seed != 0) {
    Rng rng(derive_seed(cfg.seed, "svc.scan"));
    shuffle(scan, rng);
  }

  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
  };
  auto objective = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;  // dual (maximisation) objective
  };

  SvcTrainingInfo local;
  SvcTrainingInfo& out = info ? *info : local;
  out = SvcTrainingInfo{};
  if (cfg.record_objective) out.objective_trace.push_back(0.0);

  std::vector<double> row_i;  // copy: fetching row j may evict row i
  std::size_t iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t : scan) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    if (i < n) row_i = kernel.row(i);
    const std::vector<double>* ki = i < n ? &row_i : nullptr;
    for (std::size_t t : scan) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * grad[t]);
      if (!ki) continue;
      const double b = gmax + y[t] * grad[t];
      if (b > 0.0) {
        double a = 2.0 - 2.0 * (*ki)[t];  // K_ii + K_tt - 2 K_it with K_ii = 1
        if (a <= 0.0) a = kTau;
        const double o = -(b * b) / a;
        if (o < best_obj) {
          best_obj = o;
          j = t;
        }
      }
    }
    violation = gmax + gmax2;
    if (violation < cfg.tolerance || i == n || j == n) break;
    if (iter >= cfg.max_iter) {
      std::ostringstream os;
      os << "svc: no convergence after " << iter << " iterations, KKT violation " << violation;
      throw TrainingError(os.str());
    }
    ++iter;

    const std::vector<double>& rj = kernel.row(j);
    const std::vector<double>& ri = row_i;
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double qij = y[i] * y[j] * ri[j];
    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * ri[t] * dai + y[j] * rj[t] * daj);
    if (cfg.record_objective) out.objective_trace.push_back(objective());
  }

  // rho from free vectors, else midpoint of the feasible interval
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  SvcModel model;
  model.bias = -rho;
  model.gamma = gamma;
  model.c = c;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.emplace_back(x.row(t).begin(), x.row(t).end());
      model.dual_coef.push_back(alpha[t] * y[t]);
      ++out.n_support;
      if (alpha[t] >= c) ++out.n_bounded;
    }
  }
  out.iterations = iter;
  out.kkt_violation = violation;
  out.objective = objective();
  return model;
}

void check_svc_inputs(const Matrix& x, std::span<const int> y, const SvcConfig& cfg) {
  if (x.empty() || x.cols() == 0) throw ParameterError("svc: empty training matrix");
  if (y.size() != x.rows()) throw ShapeError("svc: label count differs from row count");
  if (!(cfg.c > 0.0)) throw ParameterError("svc: C must be > 0");
  if (!(cfg.tolerance > 0.0)) throw ParameterError("svc: tolerance must be > 0");
}

}  // namespace

SvcModel train_svc_raw(const Matrix& x, std::span<const int> y, const SvcConfig& cfg,
                       SvcTrainingInfo* info) {
  check_svc_inputs(x, y, cfg);
  if (!(cfg.gamma > 0.0)) throw ParameterError("svc: train_svc_raw needs an explicit gamma > 0");
  return solve_dual(x, y, cfg, cfg.gamma, info);
}

SvcModel train_svc(const Matrix& x, std::span<const int> y, const SvcConfig& cfg,
                   SvcTrainingInfo* info) {
  check_svc_inputs(x, y, cfg);
  if (x.rows() < 2) throw ParameterError("svc: need at least 2 training rows");
  StandardizationParams sp = fit_standardizer(x);
  const Matrix xs = apply_standardizer(sp, x);
  double gamma = cfg.gamma;
  if (!(gamma > 0.0)) {
    // 1 / (n_features * mean per-feature variance) of the standardized data
    double var_sum = 0.0;
    const double n = static_cast<double>(xs.rows());
    for (std::size_t c = 0; c < xs.cols(); ++c) {
      double m = 0.0;
      for (std::size_t r = 0; r < xs.rows(); ++r) m += xs(r, c);
      m /= n;
      double v = 0.0;
      for (std::size_t r = 0; r < xs.rows(); ++r) v += (xs(r, c) - m) * (xs(r, c) - m);
      var_sum += v / n;
    }
    const double mean_var = var_sum / static_cast<double>(xs.cols());
    gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(xs.cols()) * mean_var) : 1.0;
  }
  SvcModel model = solve_dual(xs, y, cfg, gamma, info);
  model.standardizer = std::move(sp);
  return model;
}

double svc_decision(const SvcModel& model, std::span<const double> x) {
  if (x.size() != model.n_features()) throw ShapeError("svc: feature dimension mismatch");
  std::vector<double> z(x.begin(), x.end());
  if (model.standardizer.dims()) apply_standardizer_row(model.standardizer, x, z);
  double s = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    s += model.dual_coef[i] * std::exp(-model.gamma * sq_dist(model.support_vectors[i], z));
  return s;
}

int predict_one(const SvcModel& model, std::span<const double> x) {
  return svc_decision(model, x) >= 0.0 ? 1 : 0;
}

std::vector<int> predict(const SvcModel& model, const Matrix& x) {
  if (!x.empty() && x.cols() != model.n_features())
    throw ShapeError("svc: feature dimension mismatch");
  std::vector<int> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict_one(model, x.row(r)));
  return out;
}

}  // namespace tcm
