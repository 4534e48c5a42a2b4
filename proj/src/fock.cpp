#include "qfilab/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfilab::fock {

namespace {

void require_sector_match(const PureState& psi, const PureState& phi, const char* where) {
    if (psi.atom_count != phi.atom_count) {
        throw std::invalid_argument(std::string(where) + ": states live in different sectors (" +
                                    std::to_string(psi.atom_count) + " vs " +
                                    std::to_string(phi.atom_count) + " atoms)");
    }
}

// S+ = a†b maps |n> to sqrt((n+1)(N-n)) |n+1>.
Eigen::MatrixXcd raising_operator(int n_atoms) {
    const int dim = n_atoms + 1;
    Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < n_atoms; ++n) {
        sp(n + 1, n) = std::sqrt(double(n + 1) * double(n_atoms - n));
    }
    return sp;
}

Eigen::MatrixXcd diagonal_sz(int n_atoms) {
    const int dim = n_atoms + 1;
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        sz(n, n) = double(n) - double(n_atoms) / 2.0;
    }
    return sz;
}

} // namespace

double log_binomial(int n, int k) {
    if (k < 0 || k > n) {
        throw std::invalid_argument("log_binomial: k out of range");
    }
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

PureState make_state(int atom_count, Eigen::VectorXcd amplitudes) {
    if (atom_count < 0) {
        throw std::invalid_argument("make_state: negative atom count");
    }
    if (amplitudes.size() != atom_count + 1) {
        throw std::invalid_argument("make_state: amplitude vector has length " +
                                    std::to_string(amplitudes.size()) + ", expected " +
                                    std::to_string(atom_count + 1));
    }
    const double norm = amplitudes.norm();
    if (std::abs(norm - 1.0) > kNormTolerance) {
        throw std::invalid_argument("make_state: vector is not normalized (|norm-1| = " +
                                    std::to_string(std::abs(norm - 1.0)) + ")");
    }
    return PureState{atom_count, std::move(amplitudes)};
}

PureState normalized_state(int atom_count, Eigen::VectorXcd amplitudes) {
    if (atom_count < 0 || amplitudes.size() != atom_count + 1) {
        throw std::invalid_argument("normalized_state: bad sector or vector length");
    }
    const double norm = amplitudes.norm();
    if (norm * norm < kAnnihilatedThreshold) {
        throw std::invalid_argument("normalized_state: vector is numerically zero");
    }
    return PureState{atom_count, amplitudes / norm};
}

PureState coherent_state(int atom_count) {
    if (atom_count < 0) {
        throw std::invalid_argument("coherent_state: negative atom count");
    }
    Eigen::VectorXcd amps(atom_count + 1);
    const double half_log2 = 0.5 * std::log(2.0);
    for (int n = 0; n <= atom_count; ++n) {
        amps(n) = std::exp(0.5 * log_binomial(atom_count, n) - atom_count * half_log2);
    }
    amps /= amps.norm(); // remove lgamma round-off
    return PureState{atom_count, std::move(amps)};
}

PureState ghz_state(int atom_count) {
    if (atom_count < 1) {
        throw std::invalid_argument("ghz_state: needs at least one atom");
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(atom_count + 1);
    amps(0) = amps(atom_count) = 1.0 / std::sqrt(2.0);
    return PureState{atom_count, std::move(amps)};
}

PureState dicke_state(int atom_count, int atoms_in_a) {
    if (atom_count < 0 || atoms_in_a < 0 || atoms_in_a > atom_count) {
        throw std::invalid_argument("dicke_state: occupation out of range");
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(atom_count + 1);
    amps(atoms_in_a) = 1.0;
    return PureState{atom_count, std::move(amps)};
}

Complex overlap(const PureState& psi, const PureState& phi) {
    require_sector_match(psi, phi, "overlap");
    return psi.amplitudes.dot(phi.amplitudes);
}

double fidelity(const PureState& psi, const PureState& phi) {
    return std::abs(overlap(psi, phi));
}

double fubini_study_distance(const PureState& psi, const PureState& phi) {
    require_sector_match(psi, phi, "fubini_study_distance");
    const double f = std::clamp(std::abs(overlap(psi, phi)), 0.0, 1.0);
    return std::acos(f);
}

CollectiveOperator collective_operator(OperatorKind kind, int atom_count) {
    if (atom_count < 0) {
        throw std::invalid_argument("collective_operator: negative atom count");
    }
    const int dim = atom_count + 1;
    Eigen::MatrixXcd m;
    switch (kind) {
    case OperatorKind::Sz:
        m = diagonal_sz(atom_count);
        break;
    case OperatorKind::Sx: {
        const Eigen::MatrixXcd sp = raising_operator(atom_count);
        m = (sp + sp.adjoint()) / 2.0;
        break;
    }
    case OperatorKind::Sy: {
        const Eigen::MatrixXcd sp = raising_operator(atom_count);
        m = (sp - sp.adjoint()) / Complex(0.0, 2.0);
        break;
    }
    case OperatorKind::SzSquared: {
        const Eigen::MatrixXcd sz = diagonal_sz(atom_count);
        m = sz * sz;
        break;
    }
    case OperatorKind::AntiCommSxSz: {
        const Eigen::MatrixXcd sp = raising_operator(atom_count);
        const Eigen::MatrixXcd sx = (sp + sp.adjoint()) / 2.0;
        const Eigen::MatrixXcd sz = diagonal_sz(atom_count);
        m = sx * sz + sz * sx;
        break;
    }
    case OperatorKind::NumberA:
        m = Eigen::MatrixXcd::Zero(dim, dim);
        for (int n = 0; n < dim; ++n) m(n, n) = double(n);
        break;
    case OperatorKind::TactGenerator: {
        const Eigen::MatrixXcd sp = raising_operator(atom_count);
        const Eigen::MatrixXcd sy = (sp - sp.adjoint()) / Complex(0.0, 2.0);
        const Eigen::MatrixXcd sz = diagonal_sz(atom_count);
        m = sy * sy - sz * sz;
        break;
    }
    default:
        throw std::invalid_argument("collective_operator: unknown operator kind");
    }
    return CollectiveOperator{kind, atom_count, std::move(m)};
}

double expectation(const PureState& psi, const CollectiveOperator& op) {
    if (op.atom_count != psi.atom_count) {
        throw std::invalid_argument("expectation: operator and state sectors differ");
    }
    return (psi.amplitudes.adjoint() * (op.matrix * psi.amplitudes))(0).real();
}

SectorChangingOperator annihilation_operator(LossChannel channel, int atom_count) {
    if (atom_count < 1) {
        throw std::invalid_argument("annihilation_operator: sector has no atoms to lose");
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(atom_count, atom_count + 1);
    if (channel == LossChannel::ModeA) {
        for (int n = 1; n <= atom_count; ++n) m(n - 1, n) = std::sqrt(double(n));
        return {SectorChangingKind::AnnihilateA, atom_count, std::move(m)};
    }
    for (int n = 0; n < atom_count; ++n) m(n, n) = std::sqrt(double(atom_count - n));
    return {SectorChangingKind::AnnihilateB, atom_count, std::move(m)};
}

LossOutcome apply_loss(const PureState& psi, LossChannel channel) {
    const int n_atoms = psi.atom_count;
    if (n_atoms < 1) {
        throw std::invalid_argument("apply_loss: cannot lose an atom from the empty sector");
    }
    Eigen::VectorXcd out(n_atoms);
    if (channel == LossChannel::ModeA) {
        for (int n = 1; n <= n_atoms; ++n) out(n - 1) = std::sqrt(double(n)) * psi.amplitudes(n);
    } else {
        for (int n = 0; n < n_atoms; ++n) {
            out(n) = std::sqrt(double(n_atoms - n)) * psi.amplitudes(n);
        }
    }
    const double weight = out.squaredNorm();
    if (weight < kAnnihilatedThreshold) {
        return LossOutcome{std::nullopt, weight};
    }
    return LossOutcome{PureState{n_atoms - 1, out / std::sqrt(weight)}, weight};
}

LossOutcome apply_loss_sequence(const PureState& psi, int losses_a, int losses_b) {
    if (losses_a < 0 || losses_b < 0) {
        throw std::invalid_argument("apply_loss_sequence: negative loss count");
    }
    if (losses_a + losses_b > psi.atom_count) {
        throw std::invalid_argument("apply_loss_sequence: more losses than atoms");
    }
    PureState current = psi;
    double weight = 1.0;
    for (int step = 0; step < losses_a + losses_b; ++step) {
        const LossChannel channel = step < losses_a ? LossChannel::ModeA : LossChannel::ModeB;
        LossOutcome outcome = apply_loss(current, channel);
        weight *= outcome.weight;
        if (outcome.annihilated()) {
            return LossOutcome{std::nullopt, weight};
        }
        current = std::move(*outcome.state);
    }
    return LossOutcome{std::move(current), weight};
}

HermitianPropagator::HermitianPropagator(const CollectiveOperator& generator)
    : atom_count_(generator.atom_count) {
    if (!is_hermitian(generator.matrix)) {
        throw std::invalid_argument("HermitianPropagator: generator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(generator.matrix);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("HermitianPropagator: eigendecomposition failed");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

PureState HermitianPropagator::apply(const PureState& psi, double angle) const {
    if (psi.atom_count != atom_count_) {
        throw std::invalid_argument("HermitianPropagator::apply: sector mismatch");
    }
    Eigen::VectorXcd coeffs = eigenvectors_.adjoint() * psi.amplitudes;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        coeffs(k) *= std::exp(Complex(0.0, -angle * eigenvalues_(k)));
    }
    Eigen::VectorXcd out = eigenvectors_ * coeffs;
    out /= out.norm();
    return PureState{atom_count_, std::move(out)};
}

PureState evolve(const PureState& psi, const CollectiveOperator& generator, double angle) {
    if (generator.atom_count != psi.atom_count) {
        throw std::invalid_argument("evolve: generator and state sectors differ");
    }
    return HermitianPropagator(generator).apply(psi, angle);
}

} // namespace qfilab::fock
