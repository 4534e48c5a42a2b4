#include "qfilab/engineer.hpp"

#include "qfilab/bfgs.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <thread>

namespace qfilab::engineer {

namespace {

using fock::Complex;
using fock::PureState;

void validate_controls(const ControlSequence& controls) {
    if (controls.segment_count < 1) {
        throw std::invalid_argument("controls: need at least one segment");
    }
    if (!(controls.dt > 0.0)) {
        throw std::invalid_argument("controls: segment duration must be positive");
    }
    if (int(controls.coefficients.size()) != controls.segment_count) {
        throw std::invalid_argument("controls: coefficient count does not match segment count");
    }
    for (const auto& segment : controls.coefficients) {
        for (double c : segment) {
            if (!std::isfinite(c)) {
                throw std::invalid_argument("controls: coefficients must be finite");
            }
        }
    }
}

struct SegmentEigen {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

SegmentEigen decompose_segment(const GeneratorSet& generators,
                               const std::array<double, 4>& coefficients) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(generators.hamiltonian(coefficients));
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("propagate: segment eigendecomposition failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXcd apply_segment(const SegmentEigen& seg, double dt, const Eigen::VectorXcd& psi) {
    Eigen::VectorXcd coeffs = seg.eigenvectors.transpose() * psi;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        coeffs(k) *= std::exp(Complex(0.0, -dt * seg.eigenvalues(k)));
    }
    return seg.eigenvectors * coeffs;
}

Complex propagated_overlap(const ControlSequence& controls, const PureState& target,
                           const PureState& initial, const GeneratorSet& generators) {
    const PureState final_state = propagate(controls, initial, generators);
    return fock::overlap(target, final_state);
}

// Exact gradient of the overlap through the eigendecomposition of each
// segment Hamiltonian: in the segment eigenbasis the derivative of the
// exponential is the divided difference of exp(-i dt lambda).
Eigen::VectorXd exact_gradient(const ControlSequence& controls, const PureState& target,
                               const PureState& initial, const GeneratorSet& generators) {
    const int m = controls.segment_count;
    const double dt = controls.dt;
    const Eigen::Index dim = initial.amplitudes.size();

    std::vector<SegmentEigen> segments(m);
    std::vector<Eigen::VectorXcd> forward(m + 1);  // forward[j] = U_j ... U_1 |init>
    forward[0] = initial.amplitudes;
    for (int j = 0; j < m; ++j) {
        segments[j] = decompose_segment(generators, controls.coefficients[j]);
        forward[j + 1] = apply_segment(segments[j], dt, forward[j]);
    }

    std::vector<Eigen::VectorXcd> backward(m + 1);  // backward[j] = U_{j+1}† ... U_m† |target>
    backward[m] = target.amplitudes;
    for (int j = m; j >= 1; --j) {
        backward[j - 1] = apply_segment(segments[j - 1], -dt, backward[j]);
    }

    const Complex overlap_value = backward[0].dot(forward[0]);
    const double magnitude = std::max(std::abs(overlap_value), 1e-14);

    Eigen::VectorXd grad(4 * m);
    Eigen::MatrixXcd phi(dim, dim);
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd& lambda = segments[j].eigenvalues;
        const Eigen::MatrixXd& vectors = segments[j].eigenvectors;
        for (Eigen::Index k = 0; k < dim; ++k) {
            const Complex ek = std::exp(Complex(0.0, -dt * lambda(k)));
            for (Eigen::Index l = 0; l < dim; ++l) {
                const double delta = lambda(k) - lambda(l);
                if (std::abs(delta) * dt < 1e-7) {
                    // Near-degenerate pair: the divided difference cancels
                    // catastrophically, so use its midpoint limit instead.
                    phi(k, l) = Complex(0.0, -dt) *
                                std::exp(Complex(0.0, -dt * 0.5 * (lambda(k) + lambda(l))));
                } else {
                    phi(k, l) = (ek - std::exp(Complex(0.0, -dt * lambda(l)))) / delta;
                }
            }
        }
        const Eigen::VectorXcd u = vectors.transpose() * backward[j + 1];
        const Eigen::VectorXcd w = vectors.transpose() * forward[j];
        for (int g = 0; g < kCoefficientsPerSegment; ++g) {
            const Eigen::MatrixXd basis_eig =
                vectors.transpose() * generators.basis(g) * vectors;
            Complex d_overlap(0.0, 0.0);
            for (Eigen::Index k = 0; k < dim; ++k) {
                Complex row(0.0, 0.0);
                for (Eigen::Index l = 0; l < dim; ++l) {
                    row += basis_eig(k, l) * phi(k, l) * w(l);
                }
                d_overlap += std::conj(u(k)) * row;
            }
            grad(4 * j + g) = -(std::conj(overlap_value) * d_overlap).real() / magnitude;
        }
    }
    return grad;
}

struct RestartOutcome {
    ControlSequence controls;
    double cost = 1.0;
    std::vector<std::pair<int, double>> trace;
    bool converged = false;
};

} // namespace

GeneratorSet GeneratorSet::standard(int atom_count) {
    const auto real_part = [](fock::OperatorKind kind, int n) {
        return fock::collective_operator(kind, n).matrix.real().eval();
    };
    std::array<Eigen::MatrixXd, 4> basis = {
        real_part(fock::OperatorKind::Sx, atom_count),
        real_part(fock::OperatorKind::Sz, atom_count),
        real_part(fock::OperatorKind::SzSquared, atom_count),
        real_part(fock::OperatorKind::AntiCommSxSz, atom_count),
    };
    return GeneratorSet(atom_count, std::move(basis));
}

GeneratorSet GeneratorSet::single_mode_interaction(int atom_count) {
    const auto real_part = [](fock::OperatorKind kind, int n) {
        return fock::collective_operator(kind, n).matrix.real().eval();
    };
    const Eigen::MatrixXd number_a = real_part(fock::OperatorKind::NumberA, atom_count);
    std::array<Eigen::MatrixXd, 4> basis = {
        real_part(fock::OperatorKind::Sx, atom_count),
        real_part(fock::OperatorKind::Sz, atom_count),
        (number_a * number_a).eval(),
        real_part(fock::OperatorKind::AntiCommSxSz, atom_count),
    };
    return GeneratorSet(atom_count, std::move(basis));
}

Eigen::MatrixXd GeneratorSet::hamiltonian(const std::array<double, 4>& coefficients) const {
    Eigen::MatrixXd h = coefficients[0] * basis_[0];
    for (int g = 1; g < kCoefficientsPerSegment; ++g) {
        if (coefficients[size_t(g)] != 0.0) h.noalias() += coefficients[size_t(g)] * basis_[size_t(g)];
    }
    return h;
}

fock::PureState propagate(const ControlSequence& controls, const PureState& initial,
                          const GeneratorSet& generators) {
    validate_controls(controls);
    if (generators.atom_count() != initial.atom_count) {
        throw std::invalid_argument("propagate: generators and state sectors differ");
    }
    Eigen::VectorXcd psi = initial.amplitudes;
    for (const auto& segment : controls.coefficients) {
        psi = apply_segment(decompose_segment(generators, segment), controls.dt, psi);
    }
    psi /= psi.norm();
    return PureState{initial.atom_count, std::move(psi)};
}

fock::PureState propagate(const ControlSequence& controls, const PureState& initial) {
    return propagate(controls, initial, GeneratorSet::standard(initial.atom_count));
}

double infidelity_cost(const ControlSequence& controls, const PureState& target,
                       const PureState& initial, const GeneratorSet& generators) {
    if (target.atom_count != initial.atom_count) {
        throw std::invalid_argument("infidelity_cost: target and initial sectors differ");
    }
    const double overlap_mag = std::abs(propagated_overlap(controls, target, initial, generators));
    return std::clamp(1.0 - overlap_mag, 0.0, 1.0);
}

double infidelity_cost(const ControlSequence& controls, const PureState& target,
                       const PureState& initial) {
    return infidelity_cost(controls, target, initial,
                           GeneratorSet::standard(initial.atom_count));
}

Eigen::VectorXd gradient(const ControlSequence& controls, const PureState& target,
                         const PureState& initial, const GeneratorSet& generators,
                         GradientMode mode) {
    validate_controls(controls);
    if (mode == GradientMode::Exact) {
        return exact_gradient(controls, target, initial, generators);
    }
    const int m = controls.segment_count;
    Eigen::VectorXd flat(4 * m);
    for (int j = 0; j < m; ++j) {
        for (int g = 0; g < kCoefficientsPerSegment; ++g) {
            flat(4 * j + g) = controls.coefficients[size_t(j)][size_t(g)];
        }
    }
    const auto cost_of_flat = [&](const Eigen::VectorXd& x) {
        ControlSequence c = controls;
        for (int j = 0; j < m; ++j) {
            for (int g = 0; g < kCoefficientsPerSegment; ++g) {
                c.coefficients[size_t(j)][size_t(g)] = x(4 * j + g);
            }
        }
        return infidelity_cost(c, target, initial, generators);
    };
    return opt::finite_difference_gradient(cost_of_flat, flat, 1e-6);
}

EngineeringResult optimize_controls(const PureState& target, const OptimizeConfig& config,
                                    const GeneratorSet& generators) {
    if (config.segment_count < 1 || !(config.dt > 0.0)) {
        throw std::invalid_argument("optimize_controls: bad segment configuration");
    }
    if (config.restarts < 1) {
        throw std::invalid_argument("optimize_controls: need at least one restart");
    }
    if (generators.atom_count() != target.atom_count) {
        throw std::invalid_argument("optimize_controls: generators and target sectors differ");
    }
    const PureState initial = fock::coherent_state(target.atom_count);
    const int m = config.segment_count;

    std::vector<int> active_indices;
    for (int g = 0; g < kCoefficientsPerSegment; ++g) {
        if (config.active[size_t(g)]) active_indices.push_back(g);
    }
    if (active_indices.empty()) {
        throw std::invalid_argument("optimize_controls: all coefficients inactive");
    }
    const int dim = m * int(active_indices.size());

    const auto expand = [&](const Eigen::VectorXd& x) {
        ControlSequence controls;
        controls.segment_count = m;
        controls.dt = config.dt;
        controls.coefficients.assign(size_t(m), {0.0, 0.0, 0.0, 0.0});
        for (int j = 0; j < m; ++j) {
            for (size_t a = 0; a < active_indices.size(); ++a) {
                controls.coefficients[size_t(j)][size_t(active_indices[a])] =
                    x(j * Eigen::Index(active_indices.size()) + Eigen::Index(a));
            }
        }
        return controls;
    };
    const auto restrict_gradient = [&](const Eigen::VectorXd& full) {
        Eigen::VectorXd g(dim);
        for (int j = 0; j < m; ++j) {
            for (size_t a = 0; a < active_indices.size(); ++a) {
                g(j * Eigen::Index(active_indices.size()) + Eigen::Index(a)) =
                    full(4 * j + active_indices[a]);
            }
        }
        return g;
    };

    const opt::Objective objective = [&](const Eigen::VectorXd& x) {
        return infidelity_cost(expand(x), target, initial, generators);
    };
    const opt::Gradient grad = [&](const Eigen::VectorXd& x) {
        return restrict_gradient(
            gradient(expand(x), target, initial, generators, config.gradient_mode));
    };

    const auto run_restart = [&](int restart_index) {
        // Independent stream per restart so parallel execution stays
        // deterministic.
        std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ull * (uint64_t(restart_index) + 1));
        std::uniform_real_distribution<double> draw(-config.initial_coefficient_range,
                                                    config.initial_coefficient_range);
        Eigen::VectorXd start(dim);
        for (Eigen::Index i = 0; i < dim; ++i) start(i) = draw(rng);

        opt::BfgsOptions options;
        options.max_iterations = config.max_iterations;
        options.gradient_tol = config.gradient_tol;
        const opt::BfgsResult best = opt::minimize(objective, grad, start, options);

        RestartOutcome outcome;
        outcome.controls = expand(best.x);
        outcome.cost = best.value;
        outcome.trace = best.trace;
        outcome.converged = best.converged;
        return outcome;
    };

    std::vector<RestartOutcome> outcomes(size_t(config.restarts));
    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const int workers = config.workers > 0
                            ? config.workers
                            : int(std::min<unsigned>(hardware, unsigned(config.restarts)));
    if (workers <= 1 || config.restarts == 1) {
        for (int r = 0; r < config.restarts; ++r) outcomes[size_t(r)] = run_restart(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(size_t(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= config.restarts) return;
                    outcomes[size_t(r)] = run_restart(r);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    size_t best_index = 0;
    for (size_t r = 1; r < outcomes.size(); ++r) {
        if (outcomes[r].cost < outcomes[best_index].cost) best_index = r;
    }

    EngineeringResult result;
    result.controls = outcomes[best_index].controls;
    result.atom_count = target.atom_count;
    result.fidelity = std::clamp(1.0 - outcomes[best_index].cost, 0.0, 1.0);
    result.cost_trace = outcomes[best_index].trace;
    result.restarts_used = config.restarts;
    result.seed = config.seed;
    result.converged = outcomes[best_index].converged;
    for (const auto& outcome : outcomes) result.restart_costs.push_back(outcome.cost);
    for (const auto& segment : result.controls.coefficients) {
        for (double c : segment) {
            result.max_abs_coefficient = std::max(result.max_abs_coefficient, std::abs(c));
        }
    }
    return result;
}

EngineeringResult optimize_controls(const PureState& target, const OptimizeConfig& config) {
    return optimize_controls(target, config, GeneratorSet::standard(target.atom_count));
}

} // namespace qfilab::engineer
