#pragma once

// Small dense Levenberg-Marquardt driver with Marquardt diagonal scaling.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpwres {

struct LmOptions {
    int max_iterations = 200;
    double xtol = 1e-12;   // relative scaled step
    double ftol = 1e-15;   // relative cost decrease
    double initial_lambda = 1e-3;
};

struct LmResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  // sigma^2 (J^T J)^-1 at the solution
    double cost = 0.0;           // sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

/// `model(p, r, J)` fills residuals r (m) and Jacobian J (m x n) at p.
template <class Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd p, const LmOptions& opt = {}) {
    const Eigen::Index n = p.size();
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    model(p, r, jac);
    double cost = r.squaredNorm();
    double lambda = opt.initial_lambda;

    LmResult out;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-300);

        bool accepted = false;
        bool small_step = false;
        for (int inner = 0; inner < 40; ++inner) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag;
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::VectorXd trial = p + step;
            Eigen::VectorXd r_trial;
            Eigen::MatrixXd j_trial;
            model(trial, r_trial, j_trial);
            const double c_trial = r_trial.allFinite() ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();

            const double scaled_step = (diag.cwiseSqrt().cwiseProduct(step)).norm();
            const double scaled_p = (diag.cwiseSqrt().cwiseProduct(p)).norm();
            small_step = scaled_step <= opt.xtol * (scaled_p + 1e-300);

            if (c_trial <= cost) {
                const double decrease = cost - c_trial;
                p = trial;
                r = std::move(r_trial);
                jac = std::move(j_trial);
                const bool tiny_gain = decrease <= opt.ftol * cost;
                cost = c_trial;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                if (small_step || tiny_gain) out.converged = true;
                break;
            }
            if (small_step) {
                out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (out.converged || !accepted) {
            if (!accepted && !out.converged) out.converged = cost == 0.0;
            ++it;
            break;
        }
    }

    out.params = p;
    out.cost = cost;
    out.iterations = it;
    const Eigen::Index m = r.size();
    const double dof = static_cast<double>(std::max<Eigen::Index>(m - n, 1));
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    out.covariance = (cost / dof) * jtj.completeOrthogonalDecomposition().pseudoInverse();
    return out;
}

}  // namespace cpwres
