#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "slicing/simulator.hpp"

namespace slicing {

/// Reads a JSON scenario file. Demands are given in kHz and converted to allocation
/// blocks (block_khz defaults to the gcd of all demands); capacity comes from the radio
/// section. Unknown keys are rejected. Throws ValidationError with line or key context.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");

/// Canonical JSON form of a scenario (blocks, not kHz), used for hashing and metadata.
nlohmann::ordered_json scenario_to_json(const Scenario& scenario);

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

} // namespace slicing
