// engineer.hpp — piecewise-constant Hamiltonian engineering. A control
// sequence is m segments of coefficients (alpha, beta, gamma, eta) pairing
// with the generator set {Sx, Sz, Sz^2, {Sx,Sz}}; the product unitary is
// optimized so that it maps the coherent state onto a requested target.

#pragma once

#include "qfilab/fock.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace qfilab::engineer {

inline constexpr int kCoefficientsPerSegment = 4;

// m segments of piecewise-constant coefficients with fixed segment duration.
struct ControlSequence {
    int segment_count = 0;
    double dt = 0.0;
    std::vector<std::array<double, 4>> coefficients;  // (alpha, beta, gamma, eta) per segment

    double total_time() const { return segment_count * dt; }
};

// The four control generators at fixed atom number. All are real symmetric in
// this basis. The single-mode-interaction variant swaps the quadratic for
// (a†a)^2, which spans the same algebra as Sz^2 together with Sz.
class GeneratorSet {
public:
    static GeneratorSet standard(int atom_count);
    static GeneratorSet single_mode_interaction(int atom_count);

    int atom_count() const { return atom_count_; }
    const Eigen::MatrixXd& basis(int index) const { return basis_[size_t(index)]; }

    Eigen::MatrixXd hamiltonian(const std::array<double, 4>& coefficients) const;

private:
    GeneratorSet(int atom_count, std::array<Eigen::MatrixXd, 4> basis)
        : atom_count_(atom_count), basis_(std::move(basis)) {}

    int atom_count_;
    std::array<Eigen::MatrixXd, 4> basis_;
};

// Applies the m segment exponentials in order (segment 1 first). Exactly
// unitary regardless of coefficient magnitude.
fock::PureState propagate(const ControlSequence& controls, const fock::PureState& initial,
                          const GeneratorSet& generators);
fock::PureState propagate(const ControlSequence& controls, const fock::PureState& initial);

// 1 - |<target|U|initial>|, in [0, 1]; invariant under global phases.
double infidelity_cost(const ControlSequence& controls, const fock::PureState& target,
                       const fock::PureState& initial, const GeneratorSet& generators);
double infidelity_cost(const ControlSequence& controls, const fock::PureState& target,
                       const fock::PureState& initial);

enum class GradientMode { FiniteDifference, Exact };

// Gradient of the infidelity with respect to all 4m coefficients, flattened
// segment-major. FiniteDifference uses central differences with relative step
// 1e-6; Exact differentiates each segment exponential through its
// eigendecomposition.
Eigen::VectorXd gradient(const ControlSequence& controls, const fock::PureState& target,
                         const fock::PureState& initial, const GeneratorSet& generators,
                         GradientMode mode = GradientMode::FiniteDifference);

struct OptimizeConfig {
    int segment_count = 10;
    double dt = 0.1;  // tau = 1 split over the default ten segments
    int restarts = 8;
    std::uint64_t seed = 0;
    int max_iterations = 2000;
    double gradient_tol = 1e-9;
    double initial_coefficient_range = 1.0;  // restarts draw uniformly from [-range, range]
    GradientMode gradient_mode = GradientMode::FiniteDifference;
    std::array<bool, 4> active = {true, true, true, true};  // inactive coefficients pinned to 0
    int workers = 0;  // 0: hardware concurrency
};

struct EngineeringResult {
    ControlSequence controls;
    int atom_count = 0;
    double fidelity = 0.0;  // |<target|U|coherent>| = 1 - best cost
    std::vector<std::pair<int, double>> cost_trace;  // accepted steps of the best restart
    std::vector<double> restart_costs;               // final cost per restart, restart order
    int restarts_used = 0;
    std::uint64_t seed = 0;
    bool converged = false;  // best restart met the gradient tolerance
    double max_abs_coefficient = 0.0;
};

// Quasi-Newton minimization of the infidelity from `restarts` random starts;
// the initial state is the coherent state of the target's sector. The best
// result wins, ties broken by lowest restart index; deterministic given the
// seed. Non-convergence is reported through the flag, never as a failure.
EngineeringResult optimize_controls(const fock::PureState& target, const OptimizeConfig& config,
                                    const GeneratorSet& generators);
EngineeringResult optimize_controls(const fock::PureState& target, const OptimizeConfig& config);

} // namespace qfilab::engineer
