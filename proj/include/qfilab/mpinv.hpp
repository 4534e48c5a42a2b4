// mpinv.hpp — Moore-Penrose inversion of the loss operators and synthesis of
// lifted target states. Two construction routes are shipped: the analytic
// shift matrix, exact and cheap, and a generic SVD route that works for any
// rectangular operator. They are cross-checked in the tests.

#pragma once

#include "qfilab/fock.hpp"

namespace qfilab::mpinv {

// Relative singular-value threshold below which the SVD route treats a value
// as zero.
inline constexpr double kSingularValueCutoff = 1e-12;

// Pseudo-inverse of the annihilator, mapping the M-atom sector into M+1.
// Mode a: |n> -> |n+1>/sqrt(n+1). Mode b: |n> -> |n>/sqrt(M+1-n).
fock::SectorChangingOperator mp_inverse_annihilator(int source_atom_count,
                                                    fock::LossChannel mode);

// V D~ U† from the singular value decomposition of the input, with singular
// values below kSingularValueCutoff * max inverted to zero.
fock::SectorChangingOperator mp_inverse_svd(const fock::SectorChangingOperator& op);

// Normalized (L^-MP)^k applied to the target; lands in the sector
// target.atom_count + k. The lift is injective and never annihilates.
fock::PureState mp_lift(const fock::PureState& target, int lift_count,
                        fock::LossChannel mode = fock::LossChannel::ModeA);

// QFI of the normalized (a^-MP)^q GHZ(N0):
// 4 N0^2 binom(N0+q, q) / (1 + binom(N0+q, q))^2.
double mp_ghz_qfi_closed_form(int base_atom_count, int inverse_count);

} // namespace qfilab::mpinv
