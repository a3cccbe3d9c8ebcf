#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "oplearn/nn/mlp.hpp"

namespace oplearn::nn {

inline constexpr int kCheckpointSchemaVersion = 1;

/// Manifest entry for one network whose parameters start at `byte_offset` in the blob.
/// Lists layer dims, activation, and each tensor's byte offset.
nlohmann::json network_manifest(const Mlp& net, const std::string& name, std::size_t byte_offset);

/// Rebuilds the network shape from a manifest entry (parameters zero).
Mlp network_from_manifest(const nlohmann::json& entry);

/// Writes `dir/manifest.json` and `dir/params.bin`.
void save_mlp_checkpoint(const Mlp& net, const std::filesystem::path& dir);
Mlp load_mlp_checkpoint(const std::filesystem::path& dir);

}  // namespace oplearn::nn
