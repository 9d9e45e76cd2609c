#include "enersave/lasso.hpp"

#include <cmath>

#include "enersave/error.hpp"

namespace enersave {

double soft_threshold(double z, double gamma) {
  if (gamma < 0.0) throw Error("soft_threshold: gamma must be >= 0");
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lasso_objective(const Matrix& X, const std::vector<double>& y,
                       const std::vector<double>& beta, double intercept, double lambda) {
  const std::size_t n = X.rows();
  double sse = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double pred = intercept;
    for (std::size_t c = 0; c < X.cols(); ++c) pred += X.at(r, c) * beta[c];
    double res = y[r] - pred;
    sse += res * res;
  }
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return sse / (2.0 * static_cast<double>(n)) + lambda * l1;
}

LassoModel fit_lasso(const Matrix& X, const std::vector<double>& y, double lambda,
                     double tol, std::size_t max_iter) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (n == 0) throw Error("fit_lasso: zero rows");
  if (y.size() != n) throw Error("fit_lasso: X/y length mismatch");
  if (lambda < 0.0) throw Error("fit_lasso: lambda must be >= 0");
  if (tol <= 0.0) throw Error("fit_lasso: tol must be > 0");
  for (double v : X.data())
    if (!std::isfinite(v)) throw Error("fit_lasso: non-finite input");
  for (double v : y)
    if (!std::isfinite(v)) throw Error("fit_lasso: non-finite input");

  LassoModel model;
  model.lambda = lambda;
  model.feature_mean.assign(d, 0.0);
  model.feature_scale.assign(d, 0.0);

  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);

  // Standardized copy: zero mean, unit population variance per column.
  Matrix Z(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += X.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double dx = X.at(r, c) - mean;
      var += dx * dx;
    }
    var /= static_cast<double>(n);
    double scale = std::sqrt(var);
    model.feature_mean[c] = mean;
    model.feature_scale[c] = scale;
    if (scale > 0.0)
      for (std::size_t r = 0; r < n; ++r) Z.at(r, c) = (X.at(r, c) - mean) / scale;
  }

  // In standardized coordinates beta_z[c] = beta[c] * scale[c], so the
  // original-units penalty lambda*|beta[c]| becomes (lambda/scale[c])*|beta_z[c]|.
  std::vector<double> beta_z(d, 0.0);
  std::vector<double> residual(n);
  for (std::size_t r = 0; r < n; ++r) residual[r] = y[r] - y_mean;

  auto standardized_objective = [&]() {
    double sse = 0.0;
    for (double r : residual) sse += r * r;
    double pen = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      if (model.feature_scale[c] > 0.0)
        pen += lambda / model.feature_scale[c] * std::abs(beta_z[c]);
    return sse / (2.0 * static_cast<double>(n)) + pen;
  };

  std::size_t sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      double scale = model.feature_scale[c];
      if (scale == 0.0) continue;  // constant column stays at zero
      double old = beta_z[c];
      // rho = (1/n) * Z_c . (residual + Z_c * old); (1/n)||Z_c||^2 == 1.
      double rho = 0.0;
      for (std::size_t r = 0; r < n; ++r) rho += Z.at(r, c) * residual[r];
      rho = rho / static_cast<double>(n) + old;
      double updated = soft_threshold(rho, lambda / scale);
      if (updated != old) {
        double delta = updated - old;
        for (std::size_t r = 0; r < n; ++r) residual[r] -= delta * Z.at(r, c);
        beta_z[c] = updated;
      }
      max_change = std::max(max_change, std::abs(updated - old));
    }
    model.objective_trace.push_back(standardized_objective());
    if (max_change < tol) {
      ++sweep;
      break;
    }
  }
  model.sweeps = sweep;

  model.coefficients.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c)
    if (model.feature_scale[c] > 0.0) model.coefficients[c] = beta_z[c] / model.feature_scale[c];
  model.intercept = y_mean;
  for (std::size_t c = 0; c < d; ++c)
    model.intercept -= model.coefficients[c] * model.feature_mean[c];
  return model;
}

std::vector<double> lasso_predict(const LassoModel& m, const Matrix& X) {
  if (X.cols() != m.coefficients.size()) throw Error("lasso_predict: dimension mismatch");
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    double pred = m.intercept;
    for (std::size_t c = 0; c < X.cols(); ++c) {
      if (!std::isfinite(X.at(r, c))) throw Error("lasso_predict: non-finite input");
      pred += X.at(r, c) * m.coefficients[c];
    }
    out[r] = pred;
  }
  return out;
}

}  // namespace enersave
