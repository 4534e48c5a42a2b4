#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfilab/twisting.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace qfilab;
using fock::OperatorKind;
using fock::PureState;
using twisting::TwistKind;
using twisting::TwistingParams;

namespace {

double pure_qfi(const PureState& psi) {
    return qfi::qfi_pure(psi,
                         fock::collective_operator(OperatorKind::Sz, psi.atom_count));
}

TwistingParams params_of(TwistKind kind, double chi, double theta) {
    TwistingParams params;
    params.kind = kind;
    params.chi = chi;
    params.theta = theta;
    return params;
}

} // namespace

TEST_CASE("no twist, no rotation gives back the coherent state") {
    const PureState state = twisting::twisted_state(12, params_of(TwistKind::OneAxis, 0.0, 0.0));
    CHECK(fock::fidelity(state, fock::coherent_state(12)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(twisting::twisted_state(1, params_of(TwistKind::OneAxis, 0.1, 0.1)),
                    std::invalid_argument);
}

TEST_CASE("rotation alone cannot beat the standard quantum limit") {
    const int n_atoms = 16;
    for (double theta : {0.3, 1.1, 2.9}) {
        const PureState state =
            twisting::twisted_state(n_atoms, params_of(TwistKind::OneAxis, 0.0, theta));
        const double value = pure_qfi(state);
        CHECK(value <= n_atoms + 1e-9);
        CHECK(value == doctest::Approx(double(n_atoms)).epsilon(1e-9));
    }
}

TEST_CASE("twisted states stay normalized over random parameters") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> chi(-3.0, 3.0);
    std::uniform_real_distribution<double> theta(-7.0, 7.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto kind = trial % 2 == 0 ? TwistKind::OneAxis : TwistKind::TwoAxis;
        const PureState state =
            twisting::twisted_state(14, params_of(kind, chi(rng), theta(rng)));
        CHECK(std::abs(state.amplitudes.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("QFI is invariant under global phase and theta + 2 pi") {
    for (int n_atoms : {8, 9}) {
        const auto params = params_of(TwistKind::TwoAxis, 0.21, 0.9);
        const PureState state = twisting::twisted_state(n_atoms, params);
        const double value = pure_qfi(state);

        PureState phased = state;
        phased.amplitudes *= std::exp(fock::Complex(0.0, 1.234));
        CHECK(pure_qfi(phased) == doctest::Approx(value).epsilon(1e-12));

        auto shifted = params;
        shifted.theta += 2.0 * std::numbers::pi;
        CHECK(pure_qfi(twisting::twisted_state(n_atoms, shifted)) ==
              doctest::Approx(value).epsilon(1e-9));
    }
}

TEST_CASE("optimization dominates the coherent state and the grid") {
    const int n_atoms = 10;
    twisting::TwistGrid grid;
    grid.chi_points = 24;
    grid.theta_points = 24;
    const auto objective = twisting::TwistObjective::pure_qfi();
    const auto params =
        twisting::optimize_twisting(n_atoms, TwistKind::OneAxis, objective, grid);

    CHECK(params.objective >= double(n_atoms)); // value at (0, 0)
    CHECK(params.grid_chi == 24);

    // refinement may only improve on the best grid cell
    double best_grid = -1.0;
    for (int i = 0; i < grid.chi_points; ++i) {
        const double chi = (std::numbers::pi / 2.0) * double(i) / double(grid.chi_points - 1);
        for (int j = 0; j < grid.theta_points; ++j) {
            const double theta = std::numbers::pi * double(j) / double(grid.theta_points);
            best_grid = std::max(best_grid, pure_qfi(twisting::twisted_state(
                                                n_atoms, params_of(TwistKind::OneAxis, chi, theta))));
        }
    }
    CHECK(params.objective >= best_grid - 1e-12);

    // the reported parameters reproduce the reported objective
    CHECK(pure_qfi(twisting::twisted_state(n_atoms, params)) ==
          doctest::Approx(params.objective).epsilon(1e-12));
}

TEST_CASE("optimized two-axis twisting is strongly entangling at N = 20") {
    const auto params = twisting::optimize_twisting(20, TwistKind::TwoAxis,
                                                    twisting::TwistObjective::pure_qfi());
    CHECK(params.objective >= 2.0 * 20.0);
}

TEST_CASE("two-axis beats one-axis head to head at N = 40") {
    const auto objective = twisting::TwistObjective::pure_qfi();
    const auto oat = twisting::optimize_twisting(40, TwistKind::OneAxis, objective);
    const auto tact = twisting::optimize_twisting(40, TwistKind::TwoAxis, objective);
    CHECK(tact.objective > oat.objective);
}

TEST_CASE("lossy objective optimizes the averaged sensitivity") {
    const auto model = qfi::single_channel_model(fock::LossChannel::ModeA, 0.1);
    const auto objective = twisting::TwistObjective::lossy_f2(fock::LossChannel::ModeA, model);
    twisting::TwistGrid grid;
    grid.chi_points = 16;
    grid.theta_points = 16;
    const auto params =
        twisting::optimize_twisting(10, TwistKind::OneAxis, objective, grid);
    const double coherent_f2 =
        qfi::f2_single(fock::coherent_state(10), fock::LossChannel::ModeA, model);
    CHECK(params.objective >= coherent_f2 - 1e-12);
    CHECK(params.objective ==
          doctest::Approx(qfi::f2_single(twisting::twisted_state(10, params),
                                         fock::LossChannel::ModeA, model))
              .epsilon(1e-10));
}
