#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stocksent/featurize.hpp"

namespace stocksent {

/// Logistic-regression fit: coefficients, diagnostics and in-sample
/// probabilities.
struct FitResult {
    std::vector<std::string> column_names;
    Eigen::VectorXd coefficients;
    bool converged = false;
    int iterations = 0;
    double final_loglik = 0.0;
    Eigen::VectorXd fitted_probs;  // strictly inside (0, 1)
    bool separation = false;       // a coefficient ran past the magnitude guard
};

double logistic(double eta);

/// Bernoulli log-likelihood sum_i [y_i log p_i + (1-y_i) log(1-p_i)] with
/// p clamped to [1e-12, 1-1e-12] so saturation cannot produce log(0).
double loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
              const Eigen::VectorXd& y);

/// Score vector X' (y - p).
Eigen::VectorXd loglik_gradient(const Eigen::VectorXd& beta,
                                const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y);

/// Fisher scoring (IRLS for the logit link) from beta = 0. Stops when the
/// max-norm coefficient change drops below `tol` or after `max_iter`
/// iterations; the log-likelihood never decreases across accepted steps
/// (step halving). A coefficient passing |beta_j| > 30 flags separation and
/// keeps the last stable iterate. Rank-deficient weighted systems raise
/// NumericError naming the offending columns.
FitResult fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::vector<std::string> column_names = {},
                       double tol = 1e-8, int max_iter = 50);
FitResult fit_logistic(const DesignMatrix& dm, double tol = 1e-8,
                       int max_iter = 50);

/// Class predictions on a new design with the training column layout:
/// 1 iff the fitted probability strictly exceeds 0.5.
std::vector<int> predict(const FitResult& fit, const Eigen::MatrixXd& X_new,
                         const std::vector<std::string>& column_names);
std::vector<int> predict(const FitResult& fit, const DesignMatrix& dm);

std::string fit_to_json(const FitResult& fit);

}  // namespace stocksent
