#include "qfilab/qfi.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfilab::qfi {

namespace {

using fock::CollectiveOperator;
using fock::LossChannel;
using fock::LossOutcome;
using fock::OperatorKind;
using fock::PureState;

void require_probability(double p, const char* where) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(where) + ": probability outside [0,1]");
    }
}

double binomial_weight(int trials, int k, double p) {
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == trials ? 1.0 : 0.0;
    return std::exp(fock::log_binomial(trials, k) + k * std::log(p) +
                    (trials - k) * std::log1p(-p));
}

double effective_cutoff(int trials, const LossModel& model) {
    return trials <= kExactSumLimit ? 0.0 : model.tail_mass_cutoff;
}

// QFI of a sector state with respect to its S_z; since S_z is diagonal with
// entries n - N/2, this is 4 Var(n) over |C_n|^2.
double qfi_sz(const PureState& psi) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (int n = 0; n <= psi.atom_count; ++n) {
        const double mu = std::norm(psi.amplitudes(n));
        m1 += mu * n;
        m2 += mu * double(n) * double(n);
    }
    return std::max(0.0, 4.0 * (m2 - m1 * m1));
}

} // namespace

LossModel single_channel_model(LossChannel channel, double p, double tail_mass_cutoff) {
    require_probability(p, "single_channel_model");
    LossModel model;
    model.tail_mass_cutoff = tail_mass_cutoff;
    (channel == LossChannel::ModeA ? model.p_a : model.p_b) = p;
    return model;
}

BinomialWindow truncated_binomial(int trials, double p, double tail_mass_cutoff) {
    require_probability(p, "truncated_binomial");
    if (trials < 0) {
        throw std::invalid_argument("truncated_binomial: negative trial count");
    }
    std::vector<double> pmf(trials + 1);
    for (int k = 0; k <= trials; ++k) pmf[k] = binomial_weight(trials, k, p);

    int lo = 0;
    int hi = trials;
    double dropped = 0.0;
    while (lo < hi) {
        const bool drop_low = pmf[lo] <= pmf[hi];
        const double candidate = drop_low ? pmf[lo] : pmf[hi];
        if (dropped + candidate >= tail_mass_cutoff) break;
        dropped += candidate;
        if (drop_low) {
            ++lo;
        } else {
            --hi;
        }
    }

    BinomialWindow window;
    window.first = lo;
    window.weights.assign(pmf.begin() + lo, pmf.begin() + hi + 1);
    double kept = 0.0;
    for (double w : window.weights) kept += w;
    if (kept <= 0.0) {
        throw std::runtime_error("truncated_binomial: window carries no mass");
    }
    for (double& w : window.weights) w /= kept;
    return window;
}

void SectoredMixedState::add_pure(const PureState& psi, double weight) {
    if (weight < 0.0) {
        throw std::invalid_argument("SectoredMixedState::add_pure: negative weight");
    }
    auto [it, inserted] = blocks.try_emplace(
        psi.atom_count, Eigen::MatrixXcd::Zero(psi.atom_count + 1, psi.atom_count + 1));
    it->second.noalias() += weight * (psi.amplitudes * psi.amplitudes.adjoint());
    total_weight += weight;
}

double qfi_pure(const PureState& psi, const CollectiveOperator& generator) {
    if (generator.atom_count != psi.atom_count) {
        throw std::invalid_argument("qfi_pure: generator and state sectors differ");
    }
    if (!fock::is_hermitian(generator.matrix)) {
        throw std::invalid_argument("qfi_pure: generator is not Hermitian");
    }
    const Eigen::VectorXcd g_psi = generator.matrix * psi.amplitudes;
    const double mean = psi.amplitudes.dot(g_psi).real();
    const double mean_sq = g_psi.squaredNorm();
    return std::max(0.0, 4.0 * (mean_sq - mean * mean));
}

double qfi_mixed(const SectoredMixedState& rho,
                 const std::function<CollectiveOperator(int)>& generator_family) {
    double total = 0.0;
    for (const auto& [sector, block] : rho.blocks) {
        if (block.rows() != sector + 1 || block.cols() != sector + 1) {
            throw std::invalid_argument("qfi_mixed: block dimension does not match its sector");
        }
        if (!fock::is_hermitian(block, 1e-10)) {
            throw std::invalid_argument("qfi_mixed: density block is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("qfi_mixed: eigendecomposition failed");
        }
        const Eigen::VectorXd& lambda = solver.eigenvalues();
        if (lambda.minCoeff() < -1e-10) {
            throw std::invalid_argument("qfi_mixed: density block is not positive semidefinite");
        }
        const CollectiveOperator generator = generator_family(sector);
        if (generator.atom_count != sector || !fock::is_hermitian(generator.matrix)) {
            throw std::invalid_argument("qfi_mixed: bad generator for sector " +
                                        std::to_string(sector));
        }
        // Generator matrix elements in the block eigenbasis. Other sectors do
        // not contribute: the generator family is atom-number conserving.
        const Eigen::MatrixXcd g = solver.eigenvectors().adjoint() * generator.matrix *
                                   solver.eigenvectors();
        const Eigen::Index dim = lambda.size();
        for (Eigen::Index i = 0; i < dim; ++i) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                const double sum = lambda(i) + lambda(j);
                if (sum < kEigenvalueFloor) continue;
                const double diff = lambda(i) - lambda(j);
                total += 2.0 * diff * diff / sum * std::norm(g(i, j));
            }
        }
    }
    return total;
}

double qfi_mixed(const SectoredMixedState& rho) {
    return qfi_mixed(rho, [](int sector) {
        return fock::collective_operator(OperatorKind::Sz, sector);
    });
}

double f2_single(const PureState& psi, LossChannel channel, const LossModel& model) {
    require_probability(model.p_a, "f2_single");
    require_probability(model.p_b, "f2_single");
    const double other = channel == LossChannel::ModeA ? model.p_b : model.p_a;
    if (other != 0.0) {
        throw std::invalid_argument("f2_single: model has both channels active");
    }
    const double p = channel == LossChannel::ModeA ? model.p_a : model.p_b;
    const int n_atoms = psi.atom_count;
    const BinomialWindow window = truncated_binomial(n_atoms, p, effective_cutoff(n_atoms, model));

    double total = 0.0;
    PureState current = psi;
    bool alive = true;
    for (int k = 0; k <= window.last() && alive; ++k) {
        if (k > 0) {
            LossOutcome outcome = apply_loss(current, channel);
            if (outcome.annihilated()) {
                alive = false;
                break;
            }
            current = std::move(*outcome.state);
        }
        if (k >= window.first) {
            total += window.weights[k - window.first] * qfi_sz(current);
        }
    }
    return total;
}

double f2_dual(const PureState& psi, const LossModel& model) {
    require_probability(model.p_a, "f2_dual");
    require_probability(model.p_b, "f2_dual");
    const int n_atoms = psi.atom_count;
    const double cutoff = effective_cutoff(n_atoms, model);
    const BinomialWindow wa = truncated_binomial(n_atoms, model.p_a, cutoff);
    const BinomialWindow wb = truncated_binomial(n_atoms, model.p_b, cutoff);

    double total = 0.0;
    PureState row_state = psi;
    bool row_alive = true;
    for (int ka = 0; ka <= wa.last() && row_alive; ++ka) {
        if (ka > 0) {
            LossOutcome outcome = apply_loss(row_state, LossChannel::ModeA);
            if (outcome.annihilated()) {
                row_alive = false;
                break;
            }
            row_state = std::move(*outcome.state);
        }
        if (ka < wa.first) continue;

        PureState cell_state = row_state;
        bool cell_alive = true;
        for (int kb = 0; kb <= wb.last() && cell_alive; ++kb) {
            if (ka + kb > n_atoms) break; // infeasible terms carry no state
            if (kb > 0) {
                LossOutcome outcome = apply_loss(cell_state, LossChannel::ModeB);
                if (outcome.annihilated()) {
                    cell_alive = false;
                    break;
                }
                cell_state = std::move(*outcome.state);
            }
            if (kb >= wb.first) {
                total += wa.weights[ka - wa.first] * wb.weights[kb - wb.first] *
                         qfi_sz(cell_state);
            }
        }
    }
    return total;
}

SectoredMixedState loss_averaged_state(const PureState& psi, const LossModel& model) {
    require_probability(model.p_a, "loss_averaged_state");
    require_probability(model.p_b, "loss_averaged_state");
    const int n_atoms = psi.atom_count;
    const double cutoff = effective_cutoff(n_atoms, model);
    const BinomialWindow wa = truncated_binomial(n_atoms, model.p_a, cutoff);
    const BinomialWindow wb = truncated_binomial(n_atoms, model.p_b, cutoff);

    SectoredMixedState rho;
    PureState row_state = psi;
    bool row_alive = true;
    for (int ka = 0; ka <= wa.last() && row_alive; ++ka) {
        if (ka > 0) {
            LossOutcome outcome = apply_loss(row_state, LossChannel::ModeA);
            if (outcome.annihilated()) {
                row_alive = false;
                break;
            }
            row_state = std::move(*outcome.state);
        }
        if (ka < wa.first) continue;

        PureState cell_state = row_state;
        bool cell_alive = true;
        for (int kb = 0; kb <= wb.last() && cell_alive; ++kb) {
            if (ka + kb > n_atoms) break;
            if (kb > 0) {
                LossOutcome outcome = apply_loss(cell_state, LossChannel::ModeB);
                if (outcome.annihilated()) {
                    cell_alive = false;
                    break;
                }
                cell_state = std::move(*outcome.state);
            }
            if (kb >= wb.first) {
                rho.add_pure(cell_state,
                             wa.weights[ka - wa.first] * wb.weights[kb - wb.first]);
            }
        }
    }
    return rho;
}

double f1(const PureState& psi, const LossModel& model) {
    return qfi_mixed(loss_averaged_state(psi, model));
}

double noisy_hl(int atom_count, double p) {
    require_probability(p, "noisy_hl");
    const double n = atom_count;
    const double q = 1.0 - p;
    return q * q * n * n + q * n - q * q * n;
}

double noisy_sql(int atom_count, double p) {
    require_probability(p, "noisy_sql");
    return (1.0 - p) * atom_count;
}

double lower_bound_n32(int atom_count, double p) {
    require_probability(p, "lower_bound_n32");
    const double n = atom_count;
    const double q = 1.0 - p;
    return q * q * n * n / (1.0 + std::sqrt(p * q * n));
}

MomentDiagnostic moment_diagnostic(const PureState& psi, int order) {
    if (order < 0 || order > psi.atom_count) {
        throw std::invalid_argument("moment_diagnostic: order must be in [0, atom_count]");
    }
    MomentDiagnostic diag;
    diag.order = order;
    diag.moments.assign(order + 3, 0.0);
    for (int n = 0; n <= psi.atom_count; ++n) {
        const double mu = std::norm(psi.amplitudes(n));
        double power = 1.0;
        for (int j = 0; j <= order + 2; ++j) {
            diag.moments[j] += mu * power;
            power *= n;
        }
    }
    const double mq = diag.moments[order];
    const double mq1 = diag.moments[order + 1];
    const double mq2 = diag.moments[order + 2];
    diag.moment_approx = mq > 0.0 ? 4.0 * (mq2 * mq - mq1 * mq1) / (mq * mq) : 0.0;

    const LossOutcome outcome = apply_loss_sequence(psi, order, 0);
    diag.exact_qfi = outcome.annihilated() ? 0.0 : qfi_sz(*outcome.state);
    return diag;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_scaling: need at least 3 points");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [n, value] : points) {
        if (!(n > 0.0) || !(value > 0.0)) {
            throw std::invalid_argument("fit_scaling: points must be positive");
        }
        const double x = std::log(n);
        const double y = std::log(value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double count = double(points.size());
    const double denom = count * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) {
        throw std::invalid_argument("fit_scaling: abscissas are degenerate");
    }
    ScalingFit fit;
    fit.points = points;
    fit.exponent = (count * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.exponent * sx) / count;
    double ss = 0.0;
    for (const auto& [n, value] : points) {
        const double r = std::log(value) - (fit.exponent * std::log(n) + fit.intercept);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / count);
    return fit;
}

} // namespace qfilab::qfi
