// scan.hpp — scan driver behind the command-line tool: resolves a request
// into a grid, evaluates figures of merit per grid point on a worker pool,
// and emits a self-describing comma-separated table. Identical requests with
// identical seeds produce identical numbers; only the wall_time column varies
// between runs.

#pragma once

#include "qfilab/engineer.hpp"
#include "qfilab/qfi.hpp"
#include "qfilab/twisting.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qfilab::io {

enum class ScanKind { ScanN, ScanP, Bounds, Engineer, StateReport };

enum class StateFamily { Coherent, Ghz, Oat, Tact, MpGhz, MpTact };

StateFamily parse_family(const std::string& name);
std::string family_name(StateFamily family);

struct ScanRequest {
    ScanKind kind = ScanKind::ScanN;
    StateFamily family = StateFamily::Coherent;

    // Grid. ScanN iterates atom_counts at fixed (p_a, p_b); ScanP and Bounds
    // iterate p_values for atom_counts.front().
    std::vector<int> atom_counts;
    std::vector<double> p_values;
    double p_a = 0.1;
    double p_b = 0.0;
    double tail_mass_cutoff = 1e-10;

    bool with_f1 = false;
    bool with_f2 = true;
    bool with_bounds = true;

    std::uint64_t seed = 0;
    int workers = 0;           // 0: hardware concurrency
    int twist_grid = 64;       // chi/theta grid resolution for oat/tact families

    engineer::OptimizeConfig engineer_config;  // used by ScanKind::Engineer
    std::string pulse_out;                     // pulse path for ScanKind::Engineer
};

struct ScanRow {
    int atom_count = 0;
    double p_a = 0.0;
    double p_b = 0.0;
    std::string family;
    std::optional<double> chi;
    std::optional<double> theta;
    std::optional<double> f2;
    std::optional<double> f1;
    std::optional<double> noisy_sql;
    std::optional<double> noisy_hl;
    std::optional<double> lower_bound;
    double wall_time_ms = 0.0;
    std::string note;  // row-level issues; empty on success
};

struct ScanTable {
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::string> header;
    std::vector<ScanRow> rows;
    // Extra rows for non-scan kinds (engineer cost trace, state report),
    // already formatted.
    std::vector<std::vector<std::string>> aux_rows;
};

ScanTable run_scan(const ScanRequest& request);

void write_table(const ScanTable& table, std::ostream& out);
void write_table(const ScanTable& table, const std::string& path);

// Formats a double with enough digits to round-trip exactly.
std::string format_double(double value);

// Builds the state a scan row evaluates: the family member at the given atom
// count under the request's loss probabilities. For twisting families the
// parameters are optimized for noiseless QFI and reported through `params`.
fock::PureState scan_state(StateFamily family, int atom_count, double p_a, int twist_grid,
                           std::optional<twisting::TwistingParams>* params);

} // namespace qfilab::io
