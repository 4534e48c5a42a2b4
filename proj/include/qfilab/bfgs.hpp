// bfgs.hpp — dense quasi-Newton minimizer with inverse-Hessian updates and a
// backtracking Armijo line search. Small problems only (hundreds of
// parameters); the inverse Hessian is kept explicitly.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

namespace qfilab::opt {

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-8;   // stop when the gradient inf-norm drops below
    double value_tol = 0.0;       // optional: stop when an accepted step improves less
    int max_line_search_steps = 60;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<int, double>> trace;  // (iteration, value) at accepted steps
};

BfgsResult minimize(const Objective& objective, const Gradient& gradient,
                    Eigen::VectorXd start, const BfgsOptions& options = {});

// Central finite-difference gradient with per-coordinate step
// h_i = step_scale * (1 + |x_i|).
Eigen::VectorXd finite_difference_gradient(const Objective& objective,
                                           const Eigen::VectorXd& x,
                                           double step_scale = 1e-6);

} // namespace qfilab::opt
