#pragma once

#include <vector>

#include "enersave/matrix.hpp"

namespace enersave {

// L1-penalized least squares fit by cyclic coordinate descent with
// soft-thresholding. The objective is
//
//   (1/(2n)) * ||y - X beta - b||^2 + lambda * ||beta||_1
//
// with beta in original feature units and an unpenalized intercept b.
// Features are centered and scaled to unit variance internally for
// conditioning; coefficients are back-transformed before being stored.
struct LassoModel {
  std::vector<double> coefficients;  // original feature units
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> feature_mean;   // standardization used during fitting
  std::vector<double> feature_scale;  // population std; 0 marks a constant column
  std::size_t sweeps = 0;             // coordinate sweeps until convergence
  std::vector<double> objective_trace;  // objective after each sweep
};

LassoModel fit_lasso(const Matrix& X, const std::vector<double>& y, double lambda,
                     double tol = 1e-6, std::size_t max_iter = 1000);

// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

std::vector<double> lasso_predict(const LassoModel& m, const Matrix& X);

// Objective value at the stored solution for arbitrary (X, y); used by
// tests to check the per-sweep monotone decrease.
double lasso_objective(const Matrix& X, const std::vector<double>& y,
                       const std::vector<double>& beta, double intercept, double lambda);

}  // namespace enersave
