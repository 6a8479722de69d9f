#include "stocksent/glm.hpp"

#include <cmath>

#include <json.hpp>

#include "stocksent/errors.hpp"

namespace stocksent {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kSeparationGuard = 30.0;
constexpr double kWeightFloor = 1e-10;

Eigen::VectorXd probabilities(const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& X) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = logistic(eta(i));
    return p;
}

void check_shapes(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& y) {
    if (X.cols() != beta.size())
        throw ShapeError("design has " + std::to_string(X.cols()) +
                         " columns but beta has " + std::to_string(beta.size()));
    if (X.rows() != y.size())
        throw ShapeError("design has " + std::to_string(X.rows()) +
                         " rows but labels have " + std::to_string(y.size()));
}

std::vector<std::string> default_names(Eigen::Index k) {
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

}  // namespace

double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

double loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
              const Eigen::VectorXd& y) {
    check_shapes(beta, X, y);
    Eigen::VectorXd p = probabilities(beta, X);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double pi = std::min(std::max(p(i), kProbClamp), 1.0 - kProbClamp);
        ll += y(i) * std::log(pi) + (1.0 - y(i)) * std::log(1.0 - pi);
    }
    return ll;
}

Eigen::VectorXd loglik_gradient(const Eigen::VectorXd& beta,
                                const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y) {
    check_shapes(beta, X, y);
    return X.transpose() * (y - probabilities(beta, X));
}

FitResult fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::vector<std::string> column_names, double tol,
                       int max_iter) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (n < k)
        throw ShapeError("need at least as many observations (" +
                         std::to_string(n) + ") as columns (" + std::to_string(k) +
                         ")");
    if (y.size() != n) throw ShapeError("label length does not match design rows");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) != 0.0 && y(i) != 1.0)
            throw ShapeError("labels must be 0/1");
    }
    if (column_names.empty()) column_names = default_names(k);
    if (static_cast<Eigen::Index>(column_names.size()) != k)
        throw ShapeError("column name count does not match design columns");

    std::vector<std::string> zero_cols;
    for (Eigen::Index c = 0; c < k; ++c) {
        if (X.col(c).cwiseAbs().maxCoeff() == 0.0)
            zero_cols.push_back(column_names[static_cast<size_t>(c)]);
    }
    if (!zero_cols.empty()) {
        std::string msg = "all-zero design column(s):";
        for (const auto& c : zero_cols) msg += " " + c;
        throw NumericError(msg, zero_cols);
    }

    FitResult fit;
    fit.column_names = column_names;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    double ll = loglik(beta, X, y);

    for (int iter = 1; iter <= max_iter; ++iter) {
        fit.iterations = iter;
        Eigen::VectorXd p = probabilities(beta, X);
        Eigen::VectorXd w = (p.array() * (1.0 - p.array())).max(kWeightFloor);
        Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
        Eigen::VectorXd score = X.transpose() * (y - p);

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(info);
        qr.setThreshold(1e-10);
        if (qr.rank() < k) {
            // Columns past the numerical rank in pivot order are the culprits.
            std::vector<std::string> bad;
            const auto& perm = qr.colsPermutation().indices();
            for (Eigen::Index i = qr.rank(); i < k; ++i)
                bad.push_back(column_names[static_cast<size_t>(perm(i))]);
            std::string msg = "weighted information matrix is rank deficient;"
                              " offending column(s):";
            for (const auto& c : bad) msg += " " + c;
            throw NumericError(msg, bad);
        }
        Eigen::VectorXd delta = qr.solve(score);

        // Step halving keeps the log-likelihood nondecreasing.
        double step = 1.0;
        Eigen::VectorXd candidate = beta + delta;
        double cand_ll = loglik(candidate, X, y);
        int halvings = 0;
        while (cand_ll < ll - 1e-12 && halvings < 30) {
            step *= 0.5;
            candidate = beta + step * delta;
            cand_ll = loglik(candidate, X, y);
            ++halvings;
        }

        if (candidate.cwiseAbs().maxCoeff() > kSeparationGuard) {
            fit.separation = true;
            fit.converged = false;
            break;  // keep the last stable iterate in beta
        }

        double change = (candidate - beta).cwiseAbs().maxCoeff();
        beta = candidate;
        ll = cand_ll;
        if (change < tol) {
            fit.converged = true;
            break;
        }
    }

    fit.coefficients = beta;
    fit.final_loglik = ll;
    Eigen::VectorXd p = probabilities(beta, X);
    fit.fitted_probs = p.cwiseMax(kProbClamp).cwiseMin(1.0 - kProbClamp);
    return fit;
}

FitResult fit_logistic(const DesignMatrix& dm, double tol, int max_iter) {
    return fit_logistic(dm.X, dm.y, dm.column_names, tol, max_iter);
}

std::vector<int> predict(const FitResult& fit, const Eigen::MatrixXd& X_new,
                         const std::vector<std::string>& column_names) {
    if (column_names != fit.column_names)
        throw ShapeError("prediction design columns do not match the fit layout");
    if (X_new.cols() != fit.coefficients.size())
        throw ShapeError("prediction design has wrong column count");
    Eigen::VectorXd p = probabilities(fit.coefficients, X_new);
    std::vector<int> out(static_cast<size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i)
        out[static_cast<size_t>(i)] = p(i) > 0.5 ? 1 : 0;
    return out;
}

std::vector<int> predict(const FitResult& fit, const DesignMatrix& dm) {
    return predict(fit, dm.X, dm.column_names);
}

std::string fit_to_json(const FitResult& fit) {
    nlohmann::json j;
    nlohmann::json coef;
    for (size_t i = 0; i < fit.column_names.size(); ++i)
        coef[fit.column_names[i]] = fit.coefficients(static_cast<Eigen::Index>(i));
    j["coefficients"] = coef;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["final_loglik"] = fit.final_loglik;
    j["separation"] = fit.separation;
    j["n_obs"] = fit.fitted_probs.size();
    return j.dump(2);
}

}  // namespace stocksent
