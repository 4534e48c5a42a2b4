// fock.hpp — two-mode bosonic Fock sectors: states, collective operators,
// loss jumps, and exact unitary evolution.
//
// A sector with N atoms is the (N+1)-dimensional span of the basis vectors
// |n> = |n atoms in mode a, N-n atoms in mode b>, n = 0..N. All operators
// here are dense; sector dimensions stay at desk scale (<= ~10^3).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>

namespace qfilab::fock {

using Complex = std::complex<double>;

// Squared-norm threshold below which a jump outcome counts as annihilated.
inline constexpr double kAnnihilatedThreshold = 1e-14;

// Tolerance used for normalization and hermiticity validation.
inline constexpr double kNormTolerance = 1e-12;

// ------------------------------- states -------------------------------------

// Normalized pure state of a fixed atom-number sector. Entry n of
// `amplitudes` is the coefficient C_n of the basis vector with n atoms in
// mode a and atom_count - n atoms in mode b.
struct PureState {
    int atom_count = 0;
    Eigen::VectorXcd amplitudes;
};

// Validating constructor: length must be atom_count+1 and the vector must be
// unit-norm within kNormTolerance.
PureState make_state(int atom_count, Eigen::VectorXcd amplitudes);

// Scales an arbitrary nonzero vector to unit norm.
PureState normalized_state(int atom_count, Eigen::VectorXcd amplitudes);

// C_n = sqrt(binom(N,n)) / 2^(N/2): all atoms in the symmetric (a+b) mode.
PureState coherent_state(int atom_count);

// C_0 = C_N = 1/sqrt(2). Rejects N = 0 (single basis vector, no superposition).
PureState ghz_state(int atom_count);

// Basis vector with exactly n atoms in mode a.
PureState dicke_state(int atom_count, int atoms_in_a);

Complex overlap(const PureState& psi, const PureState& phi);
double fidelity(const PureState& psi, const PureState& phi);

// arccos(clamp(|<psi|phi>|, 0, 1)). Rejects sector mismatch.
double fubini_study_distance(const PureState& psi, const PureState& phi);

// --------------------------- collective operators ---------------------------

// Schwinger convention: Sx = (a†b + b†a)/2, Sy = (a†b - b†a)/(2i),
// Sz = (a†a - b†b)/2, so that [Sx,Sy] = iSz.
enum class OperatorKind {
    Sx,
    Sy,
    Sz,
    SzSquared,
    AntiCommSxSz,  // SxSz + SzSx
    NumberA,       // a†a
    TactGenerator, // Sy^2 - Sz^2
};

// Dense Hermitian matrix of a collective generator at fixed atom number.
struct CollectiveOperator {
    OperatorKind kind{};
    int atom_count = 0;
    Eigen::MatrixXcd matrix;
};

CollectiveOperator collective_operator(OperatorKind kind, int atom_count);

double expectation(const PureState& psi, const CollectiveOperator& op);

// ---------------------------- sector-changing ops ---------------------------

enum class LossChannel { ModeA, ModeB };

enum class SectorChangingKind { AnnihilateA, AnnihilateB, MpInverseA, MpInverseB };

// Rectangular map between adjacent sectors; matrix is target_dim x source_dim.
// AnnihilateA at N maps |n> to sqrt(n)|n-1>, AnnihilateB maps |n> to
// sqrt(N-n)|n> of the (N-1)-sector. The MpInverse kinds are built by module
// mpinv.
struct SectorChangingOperator {
    SectorChangingKind kind{};
    int source_atom_count = 0;
    Eigen::MatrixXcd matrix;
};

SectorChangingOperator annihilation_operator(LossChannel channel, int atom_count);

// ------------------------------- loss jumps ---------------------------------

// Outcome of applying a jump operator: the renormalized survivor together
// with the pre-normalization weight |L psi|^2, or annihilated when that
// weight falls below kAnnihilatedThreshold. Annihilated is a value, not an
// error.
struct LossOutcome {
    std::optional<PureState> state;
    double weight = 0.0;

    bool annihilated() const { return !state.has_value(); }
};

// Single jump psi -> L psi / |L psi|. Rejects the empty sector.
LossOutcome apply_loss(const PureState& psi, LossChannel channel);

// Normalized a^ka b^kb psi with the accumulated weight |a^ka b^kb psi|^2.
// The two channels commute, so the application order does not matter.
LossOutcome apply_loss_sequence(const PureState& psi, int losses_a, int losses_b);

// ------------------------------- evolution ----------------------------------

// exp(-i angle G)|psi> through the Hermitian eigendecomposition of G.
// Rejects non-Hermitian generators and sector mismatch.
PureState evolve(const PureState& psi, const CollectiveOperator& generator, double angle);

// Eigendecomposition of a Hermitian generator, built once and reused across
// angles. Immutable after construction; safe to share between threads.
class HermitianPropagator {
public:
    explicit HermitianPropagator(const CollectiveOperator& generator);

    PureState apply(const PureState& psi, double angle) const;
    int atom_count() const { return atom_count_; }

private:
    int atom_count_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
};

// ------------------------------- helpers ------------------------------------

// log binom(n, k) via lgamma; stable at any sector size used here.
double log_binomial(int n, int k);

// Entrywise hermiticity check with absolute tolerance scaled by the largest
// entry magnitude.
bool is_hermitian(const Eigen::MatrixXcd& m, double tol = kNormTolerance);

} // namespace qfilab::fock
