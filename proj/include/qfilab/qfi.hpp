// qfi.hpp — quantum Fisher information figures of merit: pure and mixed QFI,
// loss-averaged sensitivities for one and two loss channels, analytic bounds,
// and scaling diagnostics.

#pragma once

#include "qfilab/fock.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace qfilab::qfi {

// Denominator floor for the spectral QFI formula.
inline constexpr double kEigenvalueFloor = 1e-14;

// ------------------------------- loss model ---------------------------------

// Per-channel loss probabilities plus the binomial tail-truncation policy.
// Truncation drops tail terms while the cumulative dropped mass stays below
// tail_mass_cutoff, then renormalizes the kept weights to sum to one. It only
// engages above kExactSumLimit atoms; below that the full sum is cheap and is
// evaluated exactly.
struct LossModel {
    double p_a = 0.0;
    double p_b = 0.0;
    double tail_mass_cutoff = 1e-10;
};

LossModel single_channel_model(fock::LossChannel channel, double p,
                               double tail_mass_cutoff = 1e-10);

// Sector size beyond which binomial tail truncation engages.
inline constexpr int kExactSumLimit = 128;

// Contiguous window of a binomial distribution; weights renormalized to 1.
// weights[i] is the weight of k = first + i.
struct BinomialWindow {
    int first = 0;
    std::vector<double> weights;

    int last() const { return first + int(weights.size()) - 1; }
};

// Window rule: repeatedly drop the lighter of the two tail ends while the
// cumulative dropped mass stays below the cutoff. cutoff <= 0 keeps all terms.
BinomialWindow truncated_binomial(int trials, double p, double tail_mass_cutoff);

// ------------------------------ mixed states ---------------------------------

// Weighted density blocks indexed by remaining atom number. Each block is an
// (M+1)-dimensional Hermitian PSD matrix whose trace equals the probability
// mass routed into that sector; total_weight accumulates the routed mass.
struct SectoredMixedState {
    std::map<int, Eigen::MatrixXcd> blocks;
    double total_weight = 0.0;

    void add_pure(const fock::PureState& psi, double weight);
};

// ------------------------------- figures ------------------------------------

// 4 (<G^2> - <G>^2) >= 0. Rejects non-Hermitian generators and sector
// mismatch.
double qfi_pure(const fock::PureState& psi, const fock::CollectiveOperator& generator);

// Spectral formula 2 sum_{ij} (l_i-l_j)^2/(l_i+l_j) |<i|G|j>|^2, evaluated
// block by block with the generator supplied per sector. Pairs below
// kEigenvalueFloor are skipped; blocks with an eigenvalue < -1e-10 are
// rejected.
double qfi_mixed(const SectoredMixedState& rho,
                 const std::function<fock::CollectiveOperator(int)>& generator_family);

// Same with the S_z family.
double qfi_mixed(const SectoredMixedState& rho);

// Known-loss-count sensitivity for a single channel:
// sum_k binom(N,k) p^k (1-p)^(N-k) * qfi_pure(normalized L^k psi). Annihilated
// terms contribute zero. The model must have exactly one nonzero channel.
double f2_single(const fock::PureState& psi, fock::LossChannel channel,
                 const LossModel& model);

// Two-channel generalization over (k_a, k_b) with independent binomial
// weights; infeasible terms (k_a + k_b > N) and annihilated terms contribute
// zero.
double f2_dual(const fock::PureState& psi, const LossModel& model);

// Loss-averaged density matrix: all (k_a, k_b) routes pooled per remaining
// atom sector. Annihilated routes carry no mass.
SectoredMixedState loss_averaged_state(const fock::PureState& psi, const LossModel& model);

// Unknown-loss-count sensitivity: QFI of the loss-averaged state.
double f1(const fock::PureState& psi, const LossModel& model);

// (1-p)^2 N^2 + (1-p) N - (1-p)^2 N.
double noisy_hl(int atom_count, double p);

// (1-p) N.
double noisy_sql(int atom_count, double p);

// (1-p)^2 N^2 / (1 + sqrt(p (1-p) N)).
double lower_bound_n32(int atom_count, double p);

// ------------------------------ diagnostics ---------------------------------

// Moment-based approximation of the QFI after `order` jumps of mode a,
// against the exactly computed value. M_j = sum_n |C_n|^2 n^j.
struct MomentDiagnostic {
    int order = 0;                 // q
    double exact_qfi = 0.0;        // qfi_pure(normalized a^q psi, S_z); 0 if annihilated
    double moment_approx = 0.0;    // 4 (M_{q+2} M_q - M_{q+1}^2) / M_q^2
    std::vector<double> moments;   // M_0 .. M_{q+2}
};

MomentDiagnostic moment_diagnostic(const fock::PureState& psi, int order);

// Least-squares power-law fit on (log N, log value).
struct ScalingFit {
    std::vector<std::pair<double, double>> points;
    double exponent = 0.0;
    double intercept = 0.0;   // in log space
    double residual = 0.0;    // RMS of log-space residuals
};

// Requires at least 3 points with positive abscissas and values.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

} // namespace qfilab::qfi
