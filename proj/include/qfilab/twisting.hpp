// twisting.hpp — one-axis-twisted and two-axis-counter-twisted state
// preparation with parameter optimization over the twisting angle chi and the
// follow-up rotation theta about S_x.

#pragma once

#include "qfilab/fock.hpp"
#include "qfilab/qfi.hpp"

namespace qfilab::twisting {

enum class TwistKind { OneAxis, TwoAxis };

// Twisting parameters together with the objective value they achieved.
// grid_chi/grid_theta record the resolution used by optimize_twisting; zero
// means the parameters were set by hand.
struct TwistingParams {
    TwistKind kind = TwistKind::OneAxis;
    double chi = 0.0;
    double theta = 0.0;
    double objective = 0.0;
    int grid_chi = 0;
    int grid_theta = 0;
};

// Figure of merit maximized by optimize_twisting: noiseless QFI with respect
// to S_z, or the lossy single-channel sensitivity under a given model.
struct TwistObjective {
    enum class Kind { PureQfi, LossyF2 };

    Kind kind = Kind::PureQfi;
    fock::LossChannel channel = fock::LossChannel::ModeA;
    qfi::LossModel model;

    static TwistObjective pure_qfi() { return {}; }
    static TwistObjective lossy_f2(fock::LossChannel channel, const qfi::LossModel& model) {
        return {Kind::LossyF2, channel, model};
    }

    double evaluate(const fock::PureState& psi) const;
};

// Grid-then-polish search configuration. The QFI landscape oscillates in chi
// at large N; the coarse grid keeps the local refinement out of side valleys.
struct TwistGrid {
    int chi_points = 64;    // over [0, pi/2]
    int theta_points = 64;  // over [0, pi)
    double refine_tol = 1e-10;
};

// e^{-i theta Sx} e^{-i chi G} |coherent>, G = Sz^2 (one-axis) or Sy^2 - Sz^2
// (two-axis). Requires at least two atoms.
fock::PureState twisted_state(int atom_count, const TwistingParams& params);

TwistingParams optimize_twisting(int atom_count, TwistKind kind,
                                 const TwistObjective& objective,
                                 const TwistGrid& grid = {});

} // namespace qfilab::twisting
