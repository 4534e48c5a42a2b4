#include "qfilab/bfgs.hpp"

#include <cmath>

namespace qfilab::opt {

namespace {
constexpr double kArmijoSlope = 1e-4;
} // namespace

Eigen::VectorXd finite_difference_gradient(const Objective& objective,
                                           const Eigen::VectorXd& x, double step_scale) {
    Eigen::VectorXd grad(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_scale * (1.0 + std::abs(x(i)));
        probe(i) = x(i) + h;
        const double fp = objective(probe);
        probe(i) = x(i) - h;
        const double fm = objective(probe);
        probe(i) = x(i);
        grad(i) = (fp - fm) / (2.0 * h);
    }
    return grad;
}

BfgsResult minimize(const Objective& objective, const Gradient& gradient,
                    Eigen::VectorXd start, const BfgsOptions& options) {
    const Eigen::Index dim = start.size();

    BfgsResult result;
    result.x = std::move(start);
    result.value = objective(result.x);
    result.gradient = gradient(result.x);
    result.trace.emplace_back(0, result.value);

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);

    for (int it = 1; it <= options.max_iterations; ++it) {
        result.iterations = it;
        if (result.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tol) {
            result.converged = true;
            return result;
        }

        Eigen::VectorXd direction = -(inv_hessian * result.gradient);
        double slope = result.gradient.dot(direction);
        if (!(slope < 0.0)) {
            // Lost positive definiteness; restart from steepest descent.
            inv_hessian.setIdentity();
            direction = -result.gradient;
            slope = result.gradient.dot(direction);
        }

        double alpha = 1.0;
        double trial_value = result.value;
        Eigen::VectorXd trial = result.x;
        bool accepted = false;
        for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
            trial = result.x + alpha * direction;
            trial_value = objective(trial);
            if (trial_value <= result.value + kArmijoSlope * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
            if (alpha < 1e-20) break;
        }
        if (!accepted) {
            // No decrease along the quasi-Newton direction; treat the current
            // iterate as the answer.
            result.converged = result.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tol;
            return result;
        }

        const Eigen::VectorXd step = trial - result.x;
        const Eigen::VectorXd new_gradient = gradient(trial);
        const Eigen::VectorXd y = new_gradient - result.gradient;
        const double improvement = result.value - trial_value;

        result.x = std::move(trial);
        result.value = trial_value;
        result.gradient = new_gradient;
        result.trace.emplace_back(it, result.value);

        const double sy = step.dot(y);
        if (sy > 1e-12 * step.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = inv_hessian * y;
            const double yhy = y.dot(hy);
            // Sherman-Morrison form of the BFGS inverse update.
            inv_hessian.noalias() += (1.0 + rho * yhy) * rho * (step * step.transpose());
            inv_hessian.noalias() -= rho * (hy * step.transpose() + step * hy.transpose());
        } else {
            inv_hessian.setIdentity();
        }

        if (options.value_tol > 0.0 && improvement < options.value_tol) {
            result.converged = true;
            return result;
        }
    }
    result.converged = result.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tol;
    return result;
}

} // namespace qfilab::opt
