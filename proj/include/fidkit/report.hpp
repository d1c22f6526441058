#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace fidkit {

using json = nlohmann::json;

// FNV-1a 64-bit over raw file bytes, rendered as "fnv1a64:<16 hex>".
std::uint64_t fnv1a64_file(const std::string& path);
std::string file_digest(const std::string& path);

// Report envelope shared by every subcommand:
//   { schema: 1, tool, version, subcommand, config, inputs, metrics, meta }
// Everything outside "meta" is covered by the determinism contract;
// meta.duration_ms is wall-clock and excluded.
json make_report(const std::string& subcommand, json config, json inputs,
                 json metrics, double duration_ms);

// Serialized with 2-space indentation and a trailing newline; doubles
// round-trip bit-exactly through this formatting.
void write_report(const std::string& path, const json& report);

json read_json(const std::string& path);

}  // namespace fidkit
