#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfilab/engineer.hpp"

#include "qfilab/mpinv.hpp"
#include "qfilab/qfi.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace qfilab;
using engineer::ControlSequence;
using engineer::GeneratorSet;
using engineer::GradientMode;
using fock::OperatorKind;
using fock::PureState;

namespace {

ControlSequence make_controls(int segments, double dt,
                              std::vector<std::array<double, 4>> coefficients) {
    ControlSequence controls;
    controls.segment_count = segments;
    controls.dt = dt;
    controls.coefficients = std::move(coefficients);
    return controls;
}

ControlSequence random_controls(int segments, double dt, std::mt19937_64& rng, double range = 1.0) {
    std::uniform_real_distribution<double> draw(-range, range);
    std::vector<std::array<double, 4>> coefficients;
    coefficients.resize(size_t(segments));
    for (auto& segment : coefficients) {
        for (double& c : segment) c = draw(rng);
    }
    return make_controls(segments, dt, std::move(coefficients));
}

Eigen::VectorXd flatten(const ControlSequence& controls) {
    Eigen::VectorXd flat(4 * controls.segment_count);
    for (int j = 0; j < controls.segment_count; ++j) {
        for (int g = 0; g < 4; ++g) flat(4 * j + g) = controls.coefficients[size_t(j)][size_t(g)];
    }
    return flat;
}

ControlSequence unflatten(const ControlSequence& like, const Eigen::VectorXd& flat) {
    ControlSequence controls = like;
    for (int j = 0; j < controls.segment_count; ++j) {
        for (int g = 0; g < 4; ++g) controls.coefficients[size_t(j)][size_t(g)] = flat(4 * j + g);
    }
    return controls;
}

} // namespace

TEST_CASE("zero controls are the identity") {
    const PureState psi = fock::coherent_state(9);
    const auto controls = make_controls(3, 0.25, {{{0, 0, 0, 0}}, {{0, 0, 0, 0}}, {{0, 0, 0, 0}}});
    CHECK(fock::fidelity(engineer::propagate(controls, psi), psi) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single Sx segment matches evolve") {
    const PureState psi = fock::coherent_state(7);
    const double alpha = 0.83;
    const double dt = 0.1;
    const auto controls = make_controls(1, dt, {{{alpha, 0, 0, 0}}});
    const PureState via_controls = engineer::propagate(controls, psi);
    const PureState via_evolve =
        fock::evolve(psi, fock::collective_operator(OperatorKind::Sx, 7), alpha * dt);
    CHECK(fock::fidelity(via_controls, via_evolve) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fock::overlap(via_controls, via_evolve) - fock::Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("splitting a segment in two changes nothing") {
    std::mt19937_64 rng(3);
    const PureState psi = oracle::random_state(8, rng);
    const std::array<double, 4> c = {0.4, -1.2, 0.7, 0.3};
    const auto one = make_controls(1, 0.2, {c});
    const auto two = make_controls(2, 0.1, {c, c});
    CHECK(fock::fidelity(engineer::propagate(one, psi), engineer::propagate(two, psi)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("propagation is unitary for wild coefficients") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const PureState psi = oracle::random_state(11, rng);
        const auto controls = random_controls(6, 0.3, rng, 50.0);
        CHECK(std::abs(engineer::propagate(controls, psi).amplitudes.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("propagate validates its input") {
    const PureState psi = fock::coherent_state(5);
    auto controls = make_controls(1, 0.1, {{{0, 0, 0, 0}}});
    CHECK_THROWS_AS(engineer::propagate(controls, psi, GeneratorSet::standard(6)),
                    std::invalid_argument);
    controls.dt = -1.0;
    CHECK_THROWS_AS(engineer::propagate(controls, psi), std::invalid_argument);
    controls.dt = 0.1;
    controls.coefficients.clear();
    CHECK_THROWS_AS(engineer::propagate(controls, psi), std::invalid_argument);
}

TEST_CASE("infidelity endpoints and invariances") {
    const PureState psi = fock::coherent_state(6);
    const auto zero = make_controls(2, 0.1, {{{0, 0, 0, 0}}, {{0, 0, 0, 0}}});
    CHECK(engineer::infidelity_cost(zero, psi, psi) == doctest::Approx(0.0).epsilon(1e-12));

    const PureState orthogonal = fock::dicke_state(6, 0);
    // <dicke(6,0)|coherent(6)> = 1/8, so the cost is 7/8 for the zero pulse
    CHECK(engineer::infidelity_cost(zero, orthogonal, psi) ==
          doctest::Approx(1.0 - 1.0 / 8.0).epsilon(1e-12));

    std::mt19937_64 rng(9);
    PureState truly_orthogonal = oracle::random_state(6, rng);
    const fock::Complex proj = fock::overlap(psi, truly_orthogonal);
    truly_orthogonal = fock::normalized_state(
        6, (truly_orthogonal.amplitudes - proj * psi.amplitudes).eval());
    CHECK(engineer::infidelity_cost(zero, truly_orthogonal, psi) ==
          doctest::Approx(1.0).epsilon(1e-12));

    PureState phased = truly_orthogonal;
    phased.amplitudes *= std::exp(fock::Complex(0.0, 0.77));
    const auto controls = random_controls(2, 0.1, rng);
    CHECK(engineer::infidelity_cost(controls, phased, psi) ==
          doctest::Approx(engineer::infidelity_cost(controls, truly_orthogonal, psi))
              .epsilon(1e-12));
}

TEST_CASE("gradient against a directional finite difference at the identity") {
    const int n_atoms = 6;
    const PureState psi = fock::coherent_state(n_atoms);
    const auto gens = GeneratorSet::standard(n_atoms);
    const auto zero = make_controls(3, 0.1, {{{0, 0, 0, 0}}, {{0, 0, 0, 0}}, {{0, 0, 0, 0}}});

    const Eigen::VectorXd grad = engineer::gradient(zero, psi, psi, gens);

    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd direction(grad.size());
    for (Eigen::Index i = 0; i < direction.size(); ++i) direction(i) = gauss(rng);
    direction.normalize();

    const double eps = 1e-5;
    const auto at = [&](double t) {
        return engineer::infidelity_cost(unflatten(zero, (t * direction).eval()), psi, psi,
                                         gens);
    };
    const double directional = (at(eps) - at(-eps)) / (2.0 * eps);
    CHECK(grad.dot(direction) == doctest::Approx(directional).epsilon(1e-6));
}

TEST_CASE("exact gradient agrees with finite differences") {
    std::mt19937_64 rng(33);
    const int n_atoms = 10;
    const int segments = 4;
    const auto gens = GeneratorSet::standard(n_atoms);
    const PureState initial = fock::coherent_state(n_atoms);
    for (int trial = 0; trial < 50; ++trial) {
        const PureState target = oracle::random_state(n_atoms, rng);
        const auto controls = random_controls(segments, 0.1, rng);
        const Eigen::VectorXd fd =
            engineer::gradient(controls, target, initial, gens, GradientMode::FiniteDifference);
        const Eigen::VectorXd exact =
            engineer::gradient(controls, target, initial, gens, GradientMode::Exact);
        const double scale = std::max(1e-6, fd.lpNorm<Eigen::Infinity>());
        CHECK((fd - exact).lpNorm<Eigen::Infinity>() / scale < 1e-5);
    }
}

TEST_CASE("trivial target is engineered to machine fidelity") {
    const int n_atoms = 8;
    engineer::OptimizeConfig config;
    config.segment_count = 1;
    config.dt = 0.1;
    config.restarts = 4;
    config.seed = 3;
    config.max_iterations = 400;
    const auto result = engineer::optimize_controls(fock::coherent_state(n_atoms), config);
    CHECK(result.fidelity >= 1.0 - 1e-8);
    CHECK(result.restart_costs.size() == 4);

    // gradient vanishes at a converged optimum
    if (result.converged) {
        const Eigen::VectorXd grad =
            engineer::gradient(result.controls, fock::coherent_state(n_atoms),
                               fock::coherent_state(n_atoms), GeneratorSet::standard(n_atoms));
        CHECK(grad.norm() < 1e-5);
    }
}

TEST_CASE("cost is invariant under appending a zero segment") {
    std::mt19937_64 rng(43);
    const int n_atoms = 7;
    const PureState target = oracle::random_state(n_atoms, rng);
    const PureState initial = fock::coherent_state(n_atoms);
    const auto controls = random_controls(4, 0.1, rng);
    auto extended = controls;
    extended.segment_count += 1;
    extended.coefficients.push_back({0.0, 0.0, 0.0, 0.0});
    CHECK(engineer::infidelity_cost(controls, target, initial) ==
          doctest::Approx(engineer::infidelity_cost(extended, target, initial))
              .epsilon(1e-12));
}

TEST_CASE("optimization is deterministic given the seed") {
    std::mt19937_64 rng(55);
    const PureState target = oracle::random_state(6, rng);
    engineer::OptimizeConfig config;
    config.segment_count = 3;
    config.dt = 0.2;
    config.restarts = 3;
    config.seed = 17;
    config.max_iterations = 150;
    const auto first = engineer::optimize_controls(target, config);
    const auto second = engineer::optimize_controls(target, config);
    CHECK(first.fidelity == second.fidelity);
    for (int j = 0; j < config.segment_count; ++j) {
        for (int g = 0; g < 4; ++g) {
            CHECK(first.controls.coefficients[size_t(j)][size_t(g)] ==
                  second.controls.coefficients[size_t(j)][size_t(g)]);
        }
    }
    CHECK(first.restart_costs == second.restart_costs);
}

TEST_CASE("best cost across restarts never increases with more restarts") {
    std::mt19937_64 rng(77);
    const PureState target = oracle::random_state(6, rng);
    engineer::OptimizeConfig config;
    config.segment_count = 2;
    config.dt = 0.2;
    config.restarts = 6;
    config.seed = 5;
    config.max_iterations = 120;
    const auto result = engineer::optimize_controls(target, config);
    double best = 1.0;
    for (size_t r = 0; r < result.restart_costs.size(); ++r) {
        best = std::min(best, result.restart_costs[r]);
    }
    CHECK(1.0 - result.fidelity == doctest::Approx(best).epsilon(1e-12));

    // the accepted-step trace of the winning restart never increases
    for (size_t i = 1; i < result.cost_trace.size(); ++i) {
        CHECK(result.cost_trace[i].second <= result.cost_trace[i - 1].second + 1e-15);
    }
}

TEST_CASE("restricted generator set still reaches the lifted ghz target") {
    // single-mode-interaction scenario: eta pinned to zero and the quadratic
    // replaced by (a†a)^2, compensated by more segments
    const int n_atoms = 12;
    const int lift = 1;
    const PureState target = mpinv::mp_lift(fock::ghz_state(n_atoms - lift), lift);

    engineer::OptimizeConfig config;
    config.segment_count = 16;
    config.dt = 1.0 / 16.0;
    config.restarts = 10;
    config.seed = 2024;
    config.max_iterations = 3000;
    config.active = {true, true, true, false};
    const auto result = engineer::optimize_controls(
        target, config, GeneratorSet::single_mode_interaction(n_atoms));
    CHECK(result.fidelity >= 0.95);
    for (const auto& segment : result.controls.coefficients) {
        CHECK(segment[3] == 0.0);
    }
}
