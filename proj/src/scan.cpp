#include "qfilab/scan.hpp"

#include "qfilab/mpinv.hpp"
#include "qfilab/pulse_io.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qfilab::io {

namespace {

using fock::LossChannel;
using fock::PureState;

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) line += ',';
        line += cells[i];
    }
    return line;
}

std::string format_cell(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string();
}

std::string format_grid(const std::vector<int>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string format_grid(const std::vector<double>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

int accumulation_point(double p, int atom_count) {
    return int(std::floor(p * atom_count));
}

// One scan-n / scan-p grid point.
ScanRow compute_row(const ScanRequest& request, int atom_count, double p_a) {
    const auto start = std::chrono::steady_clock::now();
    ScanRow row;
    row.atom_count = atom_count;
    row.p_a = p_a;
    row.p_b = request.p_b;
    row.family = family_name(request.family);
    try {
        std::optional<twisting::TwistingParams> params;
        const PureState state =
            scan_state(request.family, atom_count, p_a, request.twist_grid, &params);
        if (params) {
            row.chi = params->chi;
            row.theta = params->theta;
        }
        qfi::LossModel model;
        model.p_a = p_a;
        model.p_b = request.p_b;
        model.tail_mass_cutoff = request.tail_mass_cutoff;
        if (request.with_f2) row.f2 = qfi::f2_dual(state, model);
        if (request.with_f1) row.f1 = qfi::f1(state, model);
        if (request.with_bounds) {
            row.noisy_sql = qfi::noisy_sql(atom_count, p_a);
            row.noisy_hl = qfi::noisy_hl(atom_count, p_a);
            row.lower_bound = qfi::lower_bound_n32(atom_count, p_a);
        }
    } catch (const std::exception& e) {
        row.note = e.what();
    }
    row.wall_time_ms = elapsed_ms(start);
    return row;
}

std::vector<std::string> scan_header(const ScanRequest& request) {
    std::vector<std::string> header = {"N", "p_a", "p_b", "family", "chi", "theta"};
    if (request.with_f2) header.push_back("f2");
    if (request.with_f1) header.push_back("f1");
    if (request.with_bounds) {
        header.push_back("noisy_sql");
        header.push_back("noisy_hl");
        header.push_back("lower_bound");
    }
    header.push_back("wall_time_ms");
    header.push_back("note");
    return header;
}

std::vector<std::string> row_cells(const ScanRequest& request, const ScanRow& row) {
    std::vector<std::string> cells = {std::to_string(row.atom_count), format_double(row.p_a),
                                      format_double(row.p_b), row.family, format_cell(row.chi),
                                      format_cell(row.theta)};
    if (request.with_f2) cells.push_back(format_cell(row.f2));
    if (request.with_f1) cells.push_back(format_cell(row.f1));
    if (request.with_bounds) {
        cells.push_back(format_cell(row.noisy_sql));
        cells.push_back(format_cell(row.noisy_hl));
        cells.push_back(format_cell(row.lower_bound));
    }
    cells.push_back(format_double(row.wall_time_ms));
    cells.push_back(row.note);
    return cells;
}

void run_rows_parallel(const ScanRequest& request, const std::vector<std::pair<int, double>>& grid,
                       std::vector<ScanRow>& rows) {
    rows.resize(grid.size());
    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const int workers =
        request.workers > 0 ? request.workers : int(std::min<size_t>(hardware, grid.size()));
    if (workers <= 1 || grid.size() <= 1) {
        for (size_t i = 0; i < grid.size(); ++i) {
            rows[i] = compute_row(request, grid[i].first, grid[i].second);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= grid.size()) return;
                rows[i] = compute_row(request, grid[i].first, grid[i].second);
            }
        });
    }
    for (auto& t : pool) t.join();
}

void echo_common(const ScanRequest& request, ScanTable& table) {
    const auto put = [&](const std::string& key, const std::string& value) {
        table.config_echo.emplace_back(key, value);
    };
    put("tool", "qfilab");
    switch (request.kind) {
    case ScanKind::ScanN: put("kind", "scan-n"); break;
    case ScanKind::ScanP: put("kind", "scan-p"); break;
    case ScanKind::Bounds: put("kind", "bounds"); break;
    case ScanKind::Engineer: put("kind", "engineer"); break;
    case ScanKind::StateReport: put("kind", "state-report"); break;
    }
    put("family", family_name(request.family));
    put("atom_counts", format_grid(request.atom_counts));
    if (!request.p_values.empty()) put("p_values", format_grid(request.p_values));
    put("pa", format_double(request.p_a));
    put("pb", format_double(request.p_b));
    put("tail_mass_cutoff", format_double(request.tail_mass_cutoff));
    std::string fom;
    if (request.with_f1) fom += "f1";
    if (request.with_f2) fom += fom.empty() ? "f2" : ",f2";
    if (request.with_bounds) fom += fom.empty() ? "bounds" : ",bounds";
    put("fom", fom);
    put("seed", std::to_string(request.seed));
    put("workers", std::to_string(request.workers));
    put("twist_grid", std::to_string(request.twist_grid));
}

ScanTable run_bounds(const ScanRequest& request) {
    if (request.atom_counts.empty()) {
        throw std::invalid_argument("bounds: need an atom count");
    }
    if (request.p_values.empty()) {
        throw std::invalid_argument("bounds: need a probability grid");
    }
    ScanTable table;
    echo_common(request, table);
    table.header = {"N", "p", "noisy_sql", "noisy_hl", "lower_bound", "wall_time_ms", "note"};
    const int atom_count = request.atom_counts.front();
    for (double p : request.p_values) {
        const auto start = std::chrono::steady_clock::now();
        ScanRow row;
        row.atom_count = atom_count;
        row.p_a = p;
        try {
            row.noisy_sql = qfi::noisy_sql(atom_count, p);
            row.noisy_hl = qfi::noisy_hl(atom_count, p);
            row.lower_bound = qfi::lower_bound_n32(atom_count, p);
        } catch (const std::exception& e) {
            row.note = e.what();
        }
        row.wall_time_ms = elapsed_ms(start);
        table.rows.push_back(row);
        table.aux_rows.push_back({std::to_string(atom_count), format_double(p),
                                  format_cell(row.noisy_sql), format_cell(row.noisy_hl),
                                  format_cell(row.lower_bound), format_double(row.wall_time_ms),
                                  row.note});
    }
    return table;
}

ScanTable run_engineer(const ScanRequest& request) {
    if (request.atom_counts.empty()) {
        throw std::invalid_argument("engineer: need an atom count");
    }
    const int atom_count = request.atom_counts.front();
    std::optional<twisting::TwistingParams> params;
    const PureState target =
        scan_state(request.family, atom_count, request.p_a, request.twist_grid, &params);

    engineer::OptimizeConfig config = request.engineer_config;
    config.seed = request.seed;
    config.workers = request.workers;
    const engineer::EngineeringResult result =
        engineer::optimize_controls(target, config);

    ScanTable table;
    echo_common(request, table);
    table.config_echo.emplace_back("segment_count", std::to_string(config.segment_count));
    table.config_echo.emplace_back("dt", format_double(config.dt));
    table.config_echo.emplace_back("restarts", std::to_string(config.restarts));
    table.config_echo.emplace_back("max_iterations", std::to_string(config.max_iterations));
    table.config_echo.emplace_back("fidelity", format_double(result.fidelity));
    table.config_echo.emplace_back("converged", result.converged ? "1" : "0");
    table.config_echo.emplace_back("max_abs_coefficient",
                                   format_double(result.max_abs_coefficient));
    if (params) {
        table.config_echo.emplace_back("target_chi", format_double(params->chi));
        table.config_echo.emplace_back("target_theta", format_double(params->theta));
    }

    if (!request.pulse_out.empty()) {
        PulseFile pulse;
        pulse.result = result;
        for (const auto& [key, value] : table.config_echo) pulse.config_echo[key] = value;
        pulse.target_amplitudes = target.amplitudes;
        save_pulse(pulse, request.pulse_out);
        table.config_echo.emplace_back("pulse_out", request.pulse_out);
    }

    table.header = {"iteration", "cost"};
    for (const auto& [iteration, cost] : result.cost_trace) {
        table.aux_rows.push_back({std::to_string(iteration), format_double(cost)});
    }
    return table;
}

ScanTable run_state_report(const ScanRequest& request) {
    if (request.atom_counts.empty()) {
        throw std::invalid_argument("state-report: need an atom count");
    }
    const int atom_count = request.atom_counts.front();
    std::optional<twisting::TwistingParams> params;
    const PureState state =
        scan_state(request.family, atom_count, request.p_a, request.twist_grid, &params);

    ScanTable table;
    echo_common(request, table);
    qfi::LossModel model;
    model.p_a = request.p_a;
    model.p_b = request.p_b;
    model.tail_mass_cutoff = request.tail_mass_cutoff;
    const auto sz = fock::collective_operator(fock::OperatorKind::Sz, state.atom_count);
    table.config_echo.emplace_back("state_atom_count", std::to_string(state.atom_count));
    table.config_echo.emplace_back("qfi_pure", format_double(qfi::qfi_pure(state, sz)));
    table.config_echo.emplace_back("f2", format_double(qfi::f2_dual(state, model)));
    if (params) {
        table.config_echo.emplace_back("chi", format_double(params->chi));
        table.config_echo.emplace_back("theta", format_double(params->theta));
    }

    table.header = {"n", "re", "im", "prob"};
    for (int n = 0; n <= state.atom_count; ++n) {
        const fock::Complex c = state.amplitudes(n);
        table.aux_rows.push_back({std::to_string(n), format_double(c.real()),
                                  format_double(c.imag()), format_double(std::norm(c))});
    }
    return table;
}

} // namespace

StateFamily parse_family(const std::string& name) {
    if (name == "coherent") return StateFamily::Coherent;
    if (name == "ghz") return StateFamily::Ghz;
    if (name == "oat") return StateFamily::Oat;
    if (name == "tact") return StateFamily::Tact;
    if (name == "mp-ghz") return StateFamily::MpGhz;
    if (name == "mp-tact") return StateFamily::MpTact;
    throw std::invalid_argument("unknown state family: " + name);
}

std::string family_name(StateFamily family) {
    switch (family) {
    case StateFamily::Coherent: return "coherent";
    case StateFamily::Ghz: return "ghz";
    case StateFamily::Oat: return "oat";
    case StateFamily::Tact: return "tact";
    case StateFamily::MpGhz: return "mp-ghz";
    case StateFamily::MpTact: return "mp-tact";
    }
    return "?";
}

std::string format_double(double value) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buffer, end);
}

fock::PureState scan_state(StateFamily family, int atom_count, double p_a, int twist_grid,
                           std::optional<twisting::TwistingParams>* params) {
    if (params) params->reset();
    twisting::TwistGrid grid;
    grid.chi_points = twist_grid;
    grid.theta_points = twist_grid;
    const auto optimized = [&](int n, twisting::TwistKind kind) {
        const twisting::TwistingParams p = twisting::optimize_twisting(
            n, kind, twisting::TwistObjective::pure_qfi(), grid);
        if (params) *params = p;
        return twisting::twisted_state(n, p);
    };
    switch (family) {
    case StateFamily::Coherent:
        return fock::coherent_state(atom_count);
    case StateFamily::Ghz:
        return fock::ghz_state(atom_count);
    case StateFamily::Oat:
        return optimized(atom_count, twisting::TwistKind::OneAxis);
    case StateFamily::Tact:
        return optimized(atom_count, twisting::TwistKind::TwoAxis);
    case StateFamily::MpGhz: {
        const int lift = accumulation_point(p_a, atom_count);
        const int base = atom_count - lift;
        if (base < 1) {
            throw std::invalid_argument("mp-ghz: no atoms left at the accumulation point");
        }
        return mpinv::mp_lift(fock::ghz_state(base), lift, LossChannel::ModeA);
    }
    case StateFamily::MpTact: {
        const int lift = accumulation_point(p_a, atom_count);
        const int base = atom_count - lift;
        if (base < 2) {
            throw std::invalid_argument("mp-tact: accumulation point below two atoms");
        }
        return mpinv::mp_lift(optimized(base, twisting::TwistKind::TwoAxis), lift,
                              LossChannel::ModeA);
    }
    }
    throw std::invalid_argument("scan_state: unknown family");
}

ScanTable run_scan(const ScanRequest& request) {
    switch (request.kind) {
    case ScanKind::Bounds:
        return run_bounds(request);
    case ScanKind::Engineer:
        return run_engineer(request);
    case ScanKind::StateReport:
        return run_state_report(request);
    case ScanKind::ScanN:
    case ScanKind::ScanP:
        break;
    }

    std::vector<std::pair<int, double>> grid;
    if (request.kind == ScanKind::ScanN) {
        if (request.atom_counts.empty()) {
            throw std::invalid_argument("scan-n: empty atom-count grid");
        }
        for (int n : request.atom_counts) grid.emplace_back(n, request.p_a);
    } else {
        if (request.atom_counts.empty()) {
            throw std::invalid_argument("scan-p: need an atom count");
        }
        if (request.p_values.empty()) {
            throw std::invalid_argument("scan-p: empty probability grid");
        }
        for (double p : request.p_values) grid.emplace_back(request.atom_counts.front(), p);
    }

    ScanTable table;
    echo_common(request, table);
    table.header = scan_header(request);
    run_rows_parallel(request, grid, table.rows);
    for (const ScanRow& row : table.rows) table.aux_rows.push_back(row_cells(request, row));
    return table;
}

void write_table(const ScanTable& table, std::ostream& out) {
    for (const auto& [key, value] : table.config_echo) {
        out << "# " << key << " = " << value << '\n';
    }
    out << join(table.header) << '\n';
    for (const auto& cells : table.aux_rows) {
        out << join(cells) << '\n';
    }
}

void write_table(const ScanTable& table, const std::string& path) {
    if (path.empty() || path == "-") {
        write_table(table, std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_table: cannot open " + path + " for writing");
    }
    write_table(table, out);
}

} // namespace qfilab::io
