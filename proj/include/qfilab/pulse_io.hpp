// pulse_io.hpp — persistence for engineered pulses. Pulses are the expensive
// artifact, so the file format carries a version tag, a config echo, the
// coefficient array, the achieved fidelity, the seed, and a content checksum
// that is verified on load.

#pragma once

#include "qfilab/engineer.hpp"

#include <map>
#include <string>

namespace qfilab::io {

inline constexpr int kPulseFormatVersion = 1;

struct PulseFile {
    engineer::EngineeringResult result;
    std::map<std::string, std::string> config_echo;
    // Optional copy of the target amplitudes so a pulse can be re-verified
    // without rebuilding the target; empty when not stored.
    Eigen::VectorXcd target_amplitudes;

    bool has_target() const { return target_amplitudes.size() > 0; }
};

void save_pulse(const PulseFile& pulse, const std::string& path);

// Rejects unknown format versions and checksum mismatches.
PulseFile load_pulse(const std::string& path);

// FNV-1a 64-bit hash, used as the pulse content checksum.
std::uint64_t fnv1a64(const std::string& bytes);

} // namespace qfilab::io
