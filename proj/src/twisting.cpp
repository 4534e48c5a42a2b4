#include "qfilab/twisting.hpp"

#include "qfilab/bfgs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qfilab::twisting {

namespace {

using fock::CollectiveOperator;
using fock::HermitianPropagator;
using fock::OperatorKind;
using fock::PureState;

OperatorKind twist_generator(TwistKind kind) {
    return kind == TwistKind::OneAxis ? OperatorKind::SzSquared : OperatorKind::TactGenerator;
}

// Shared machinery for repeated twisted-state evaluations at one atom number.
struct TwistEngine {
    PureState coherent;
    HermitianPropagator twist;
    HermitianPropagator rotation;

    TwistEngine(int atom_count, TwistKind kind)
        : coherent(fock::coherent_state(atom_count)),
          twist(fock::collective_operator(twist_generator(kind), atom_count)),
          rotation(fock::collective_operator(OperatorKind::Sx, atom_count)) {}

    PureState state(double chi, double theta) const {
        return rotation.apply(twist.apply(coherent, chi), theta);
    }
};

} // namespace

double TwistObjective::evaluate(const PureState& psi) const {
    if (kind == Kind::PureQfi) {
        return qfi::qfi_pure(psi, fock::collective_operator(OperatorKind::Sz, psi.atom_count));
    }
    return qfi::f2_single(psi, channel, model);
}

fock::PureState twisted_state(int atom_count, const TwistingParams& params) {
    if (atom_count < 2) {
        throw std::invalid_argument("twisted_state: needs at least two atoms");
    }
    if (!std::isfinite(params.chi) || !std::isfinite(params.theta)) {
        throw std::invalid_argument("twisted_state: parameters must be finite");
    }
    return TwistEngine(atom_count, params.kind).state(params.chi, params.theta);
}

TwistingParams optimize_twisting(int atom_count, TwistKind kind,
                                 const TwistObjective& objective, const TwistGrid& grid) {
    if (atom_count < 2) {
        throw std::invalid_argument("optimize_twisting: needs at least two atoms");
    }
    if (grid.chi_points < 2 || grid.theta_points < 1) {
        throw std::invalid_argument("optimize_twisting: degenerate grid");
    }
    const TwistEngine engine(atom_count, kind);
    const auto value_at = [&](double chi, double theta) {
        return objective.evaluate(engine.state(chi, theta));
    };

    constexpr double pi = std::numbers::pi;
    double best_value = -1.0;
    double best_chi = 0.0;
    double best_theta = 0.0;
    for (int i = 0; i < grid.chi_points; ++i) {
        const double chi = (pi / 2.0) * double(i) / double(grid.chi_points - 1);
        for (int j = 0; j < grid.theta_points; ++j) {
            const double theta = pi * double(j) / double(grid.theta_points);
            const double value = value_at(chi, theta);
            if (value > best_value) {
                best_value = value;
                best_chi = chi;
                best_theta = theta;
            }
        }
    }

    // Quasi-Newton polish from the best grid cell; keep it only if it wins.
    const opt::Objective negated = [&](const Eigen::VectorXd& x) {
        return -value_at(x(0), x(1));
    };
    const opt::Gradient gradient = [&](const Eigen::VectorXd& x) {
        return opt::finite_difference_gradient(negated, x, 1e-7);
    };
    opt::BfgsOptions options;
    options.max_iterations = 200;
    options.gradient_tol = 1e-9;
    options.value_tol = grid.refine_tol;
    Eigen::VectorXd start(2);
    start << best_chi, best_theta;
    const opt::BfgsResult refined = opt::minimize(negated, gradient, start, options);
    if (-refined.value > best_value) {
        best_value = -refined.value;
        best_chi = refined.x(0);
        best_theta = refined.x(1);
    }

    TwistingParams params;
    params.kind = kind;
    params.chi = best_chi;
    params.theta = best_theta;
    params.objective = best_value;
    params.grid_chi = grid.chi_points;
    params.grid_theta = grid.theta_points;
    return params;
}

} // namespace qfilab::twisting
