#include "qfilab/pulse_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qfilab::io {

namespace {

using nlohmann::json;

json payload_json(const PulseFile& pulse) {
    const engineer::EngineeringResult& result = pulse.result;
    json j;
    j["format"] = "qfilab-pulse";
    j["version"] = kPulseFormatVersion;
    j["atom_count"] = result.atom_count;
    j["segment_count"] = result.controls.segment_count;
    j["dt"] = result.controls.dt;
    j["coefficients"] = result.controls.coefficients;
    j["fidelity"] = result.fidelity;
    j["seed"] = result.seed;
    j["restarts_used"] = result.restarts_used;
    j["converged"] = result.converged;
    j["cost_trace"] = result.cost_trace;
    j["config"] = pulse.config_echo;
    if (pulse.has_target()) {
        std::vector<std::array<double, 2>> target;
        target.reserve(size_t(pulse.target_amplitudes.size()));
        for (Eigen::Index i = 0; i < pulse.target_amplitudes.size(); ++i) {
            target.push_back({pulse.target_amplitudes(i).real(),
                              pulse.target_amplitudes(i).imag()});
        }
        j["target_amplitudes"] = target;
    }
    return j;
}

std::string checksum_string(const json& payload) {
    std::ostringstream hex;
    hex << std::hex << fnv1a64(payload.dump());
    return hex.str();
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

void save_pulse(const PulseFile& pulse, const std::string& path) {
    json j = payload_json(pulse);
    j["checksum"] = checksum_string(j);
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_pulse: cannot open " + path + " for writing");
    }
    out << j.dump(2) << '\n';
}

PulseFile load_pulse(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_pulse: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_pulse: " + path + " is not a valid pulse file (" +
                                 e.what() + ")");
    }
    if (j.value("format", "") != "qfilab-pulse") {
        throw std::runtime_error("load_pulse: " + path + " is not a pulse file");
    }
    if (j.value("version", -1) != kPulseFormatVersion) {
        throw std::runtime_error("load_pulse: unsupported pulse file version " +
                                 j.value("version", json()).dump());
    }
    const std::string stored_checksum = j.value("checksum", "");
    json payload = j;
    payload.erase("checksum");
    if (checksum_string(payload) != stored_checksum) {
        throw std::runtime_error("load_pulse: checksum mismatch, " + path +
                                 " is corrupted or was edited");
    }

    PulseFile pulse;
    engineer::EngineeringResult& result = pulse.result;
    result.atom_count = j.at("atom_count").get<int>();
    result.controls.segment_count = j.at("segment_count").get<int>();
    result.controls.dt = j.at("dt").get<double>();
    result.controls.coefficients =
        j.at("coefficients").get<std::vector<std::array<double, 4>>>();
    result.fidelity = j.at("fidelity").get<double>();
    result.seed = j.at("seed").get<std::uint64_t>();
    result.restarts_used = j.value("restarts_used", 0);
    result.converged = j.value("converged", false);
    result.cost_trace = j.value("cost_trace", std::vector<std::pair<int, double>>{});
    for (const auto& segment : result.controls.coefficients) {
        for (double c : segment) {
            result.max_abs_coefficient = std::max(result.max_abs_coefficient, std::abs(c));
        }
    }
    pulse.config_echo = j.value("config", std::map<std::string, std::string>{});
    if (j.contains("target_amplitudes")) {
        const auto target = j.at("target_amplitudes").get<std::vector<std::array<double, 2>>>();
        pulse.target_amplitudes.resize(Eigen::Index(target.size()));
        for (size_t i = 0; i < target.size(); ++i) {
            pulse.target_amplitudes(Eigen::Index(i)) = {target[i][0], target[i][1]};
        }
    }
    return pulse;
}

} // namespace qfilab::io
