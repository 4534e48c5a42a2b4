#include "qfilab/mpinv.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace qfilab::mpinv {

using fock::LossChannel;
using fock::PureState;
using fock::SectorChangingKind;
using fock::SectorChangingOperator;

fock::SectorChangingOperator mp_inverse_annihilator(int source_atom_count, LossChannel mode) {
    if (source_atom_count < 0) {
        throw std::invalid_argument("mp_inverse_annihilator: negative atom count");
    }
    const int source_dim = source_atom_count + 1;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(source_dim + 1, source_dim);
    if (mode == LossChannel::ModeA) {
        for (int n = 0; n < source_dim; ++n) m(n + 1, n) = 1.0 / std::sqrt(double(n + 1));
        return {SectorChangingKind::MpInverseA, source_atom_count, std::move(m)};
    }
    for (int n = 0; n < source_dim; ++n) {
        m(n, n) = 1.0 / std::sqrt(double(source_atom_count + 1 - n));
    }
    return {SectorChangingKind::MpInverseB, source_atom_count, std::move(m)};
}

fock::SectorChangingOperator mp_inverse_svd(const SectorChangingOperator& op) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op.matrix,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = sigma.size() > 0 ? kSingularValueCutoff * sigma.maxCoeff() : 0.0;
    Eigen::VectorXd inverted(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        inverted(i) = sigma(i) > cutoff ? 1.0 / sigma(i) : 0.0;
    }
    Eigen::MatrixXcd m = svd.matrixV() * inverted.asDiagonal() * svd.matrixU().adjoint();

    SectorChangingKind kind{};
    int source = 0;
    switch (op.kind) {
    case SectorChangingKind::AnnihilateA:
        kind = SectorChangingKind::MpInverseA;
        source = op.source_atom_count - 1;
        break;
    case SectorChangingKind::AnnihilateB:
        kind = SectorChangingKind::MpInverseB;
        source = op.source_atom_count - 1;
        break;
    case SectorChangingKind::MpInverseA:
        kind = SectorChangingKind::AnnihilateA;
        source = op.source_atom_count + 1;
        break;
    case SectorChangingKind::MpInverseB:
        kind = SectorChangingKind::AnnihilateB;
        source = op.source_atom_count + 1;
        break;
    }
    return {kind, source, std::move(m)};
}

fock::PureState mp_lift(const PureState& target, int lift_count, LossChannel mode) {
    if (lift_count < 0) {
        throw std::invalid_argument("mp_lift: negative lift count");
    }
    PureState current = target;
    for (int step = 0; step < lift_count; ++step) {
        const int sector = current.atom_count;
        Eigen::VectorXcd out(sector + 2);
        if (mode == LossChannel::ModeA) {
            out(0) = 0.0;
            for (int n = 0; n <= sector; ++n) {
                out(n + 1) = current.amplitudes(n) / std::sqrt(double(n + 1));
            }
        } else {
            for (int n = 0; n <= sector; ++n) {
                out(n) = current.amplitudes(n) / std::sqrt(double(sector + 1 - n));
            }
            out(sector + 1) = 0.0;
        }
        current = fock::normalized_state(sector + 1, std::move(out));
    }
    return current;
}

double mp_ghz_qfi_closed_form(int base_atom_count, int inverse_count) {
    if (base_atom_count < 1) {
        throw std::invalid_argument("mp_ghz_qfi_closed_form: base state needs atoms");
    }
    if (inverse_count < 0) {
        throw std::invalid_argument("mp_ghz_qfi_closed_form: negative inverse count");
    }
    const double n0 = base_atom_count;
    const double b =
        std::exp(fock::log_binomial(base_atom_count + inverse_count, inverse_count));
    return 4.0 * n0 * n0 * b / ((1.0 + b) * (1.0 + b));
}

} // namespace qfilab::mpinv
