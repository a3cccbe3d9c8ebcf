#include "oplearn/nn/checkpoint.hpp"

#include <stdexcept>

#include "oplearn/binary_io.hpp"

namespace oplearn::nn {

using nlohmann::json;

json network_manifest(const Mlp& net, const std::string& name, std::size_t byte_offset) {
  json tensors = json::array();
  for (const auto& slot : net.layout(name)) {
    tensors.push_back({{"name", slot.name},
                       {"shape", {slot.rows, slot.cols}},
                       {"byte_offset", byte_offset + slot.offset * sizeof(double)}});
  }
  return {{"name", name},
          {"layer_dims", net.layer_dims()},
          {"activation", "tanh"},
          {"output_activation", "identity"},
          {"byte_offset", byte_offset},
          {"parameter_count", net.parameter_count()},
          {"tensors", tensors}};
}

Mlp network_from_manifest(const json& entry) {
  if (entry.at("activation").get<std::string>() != "tanh") {
    throw std::runtime_error("checkpoint: unsupported activation '" +
                             entry.at("activation").get<std::string>() + "'");
  }
  Mlp net(entry.at("layer_dims").get<std::vector<int>>());
  if (entry.at("parameter_count").get<Eigen::Index>() != net.parameter_count()) {
    throw std::runtime_error("checkpoint: parameter count disagrees with layer dims");
  }
  return net;
}

void save_mlp_checkpoint(const Mlp& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<double> blob(static_cast<std::size_t>(net.parameter_count()));
  net.pack(blob);
  json manifest = {{"format", "oplearn-mlp"},
                   {"schema_version", kCheckpointSchemaVersion},
                   {"dtype", "float64-le"},
                   {"blob", "params.bin"},
                   {"checksum", fnv1a_hex(std::span<const double>(blob))},
                   {"network", network_manifest(net, "mlp", 0)}};
  write_f64_blob(dir / "params.bin", blob);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Mlp load_mlp_checkpoint(const std::filesystem::path& dir) {
  const json manifest = json::parse(read_text(dir / "manifest.json"));
  if (manifest.at("schema_version").get<int>() != kCheckpointSchemaVersion) {
    throw std::runtime_error("checkpoint: unsupported schema_version " +
                             manifest.at("schema_version").dump());
  }
  Mlp net = network_from_manifest(manifest.at("network"));
  const auto blob = read_f64_blob(dir / manifest.at("blob").get<std::string>());
  if (static_cast<Eigen::Index>(blob.size()) != net.parameter_count()) {
    throw std::runtime_error("checkpoint: blob is truncated");
  }
  if (fnv1a_hex(std::span<const double>(blob)) != manifest.at("checksum").get<std::string>()) {
    throw std::runtime_error("checkpoint: checksum mismatch");
  }
  net.unpack(blob);
  return net;
}

}  // namespace oplearn::nn
