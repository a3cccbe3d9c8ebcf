#include <stdexcept>

#include <json.hpp>

#include "oplearn/binary_io.hpp"
#include "oplearn/dataset.hpp"

namespace oplearn {

using nlohmann::json;

namespace {

json grid_json(const SpaceTimeGrid& g) {
  json space = json::array();
  for (const auto& a : g.space) space.push_back({a.lo, a.hi, a.count});
  return {{"space", space}, {"time", {g.time.lo, g.time.hi, g.time.count}}};
}

SpaceTimeGrid grid_from_json(const json& j) {
  SpaceTimeGrid g;
  for (const auto& a : j.at("space")) g.space.push_back(Axis{a[0].get<double>(), a[1].get<double>(), a[2].get<int>()});
  const auto& t = j.at("time");
  g.time = Axis{t[0].get<double>(), t[1].get<double>(), t[2].get<int>()};
  return g;
}

json blob_entry(const std::string& file, Eigen::Index rows, Eigen::Index cols, std::span<const double> data) {
  return {{"file", file}, {"rows", rows}, {"cols", cols}, {"checksum", fnv1a_hex(data)}};
}

void write_matrix(const std::filesystem::path& dir, const std::string& file, const RowMatrix& m, json& blobs,
                  const std::string& key) {
  const std::span<const double> data(m.data(), static_cast<std::size_t>(m.size()));
  write_f64_blob(dir / file, data);
  blobs[key] = blob_entry(file, m.rows(), m.cols(), data);
}

RowMatrix read_matrix(const std::filesystem::path& dir, const json& entry, const std::string& key) {
  const auto file = entry.at("file").get<std::string>();
  const auto rows = entry.at("rows").get<Eigen::Index>();
  const auto cols = entry.at("cols").get<Eigen::Index>();
  const auto data = read_f64_blob(dir / file);
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("dataset: blob '" + file + "' is truncated (expected " + std::to_string(rows * cols) +
                             " values, found " + std::to_string(data.size()) + ")");
  }
  if (fnv1a_hex(std::span<const double>(data)) != entry.at("checksum").get<std::string>()) {
    throw std::runtime_error("dataset: checksum mismatch in '" + file + "' (" + key + ")");
  }
  RowMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

}  // namespace

void save_dataset(const OperatorDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json blobs = json::object();
  write_matrix(dir, "phi.bin", ds.phi, blobs, "phi");
  write_matrix(dir, "f.bin", ds.f, blobs, "f");
  write_matrix(dir, "u.bin", ds.u, blobs, "u");
  const RowMatrix locations = ds.layout.outputs.transpose();
  write_matrix(dir, "locations.bin", locations, blobs, "locations");
  write_matrix(dir, "acceptance_errors.bin", ds.acceptance_errors, blobs, "acceptance_errors");

  json params = json::array();
  for (const auto& p : ds.params) {
    json entry = json::object();
    for (const auto& [name, values] : named_values(p)) entry[name] = values;
    params.push_back(entry);
  }
  const json manifest = {
      {"format", "oplearn-dataset"},
      {"schema_version", kDatasetSchemaVersion},
      {"dtype", "float64-le"},
      {"case", case_name(ds.config.case_id)},
      {"family", family_name(case_family(ds.config.case_id))},
      {"K", ds.config.laws.K},
      {"complex", ds.is_complex()},
      {"counts",
       {{"N", ds.size()},
        {"m_initial", ds.layout.initial.size()},
        {"m_source", ds.layout.source.size()},
        {"P", ds.layout.P()},
        {"p_initial", ds.layout.p_initial}}},
      {"seeds", {{"seed", ds.config.seed}}},
      {"layout", {{"initial", grid_json(ds.layout.initial)}, {"source", grid_json(ds.layout.source)}}},
      {"generation",
       {{"candidates", ds.stats.candidates},
        {"accepted", ds.stats.accepted},
        {"rejections", ds.stats.rejections},
        {"acceptance_rate", ds.stats.acceptance_rate()}}},
      {"candidate_index", ds.candidate_index},
      {"params", params},
      {"blobs", blobs},
      {"config", config_to_json(ds.config)},
  };
  write_text(dir / "manifest.json", manifest.dump(1) + "\n");
}

OperatorDataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.json")) {
    throw std::runtime_error("no dataset at " + dir.string() + " (manifest.json missing)");
  }
  const json m = json::parse(read_text(dir / "manifest.json"));
  if (m.value("format", "") != "oplearn-dataset") throw std::runtime_error("dataset: not an oplearn dataset manifest");
  const int version = m.at("schema_version").get<int>();
  if (version != kDatasetSchemaVersion) {
    throw std::runtime_error("dataset: unsupported schema_version " + std::to_string(version) + " (expected " +
                             std::to_string(kDatasetSchemaVersion) + ")");
  }
  OperatorDataset ds;
  ds.config = config_from_json(m.at("config"));
  const auto& blobs = m.at("blobs");
  ds.phi = read_matrix(dir, blobs.at("phi"), "phi");
  ds.f = read_matrix(dir, blobs.at("f"), "f");
  ds.u = read_matrix(dir, blobs.at("u"), "u");
  ds.acceptance_errors = read_matrix(dir, blobs.at("acceptance_errors"), "acceptance_errors");
  const RowMatrix locations = read_matrix(dir, blobs.at("locations"), "locations");
  ds.layout.outputs = locations.transpose();
  ds.layout.initial = grid_from_json(m.at("layout").at("initial"));
  ds.layout.source = grid_from_json(m.at("layout").at("source"));
  ds.layout.p_initial = m.at("counts").at("p_initial").get<int>();
  const auto& gen = m.at("generation");
  ds.stats.candidates = gen.at("candidates").get<std::int64_t>();
  ds.stats.accepted = gen.at("accepted").get<std::int64_t>();
  ds.stats.rejections = gen.at("rejections").get<std::vector<std::int64_t>>();
  ds.candidate_index = m.at("candidate_index").get<std::vector<std::int64_t>>();
  const FamilyId family = family_from_name(m.at("family").get<std::string>());
  const int K = m.at("K").get<int>();
  for (const auto& entry : m.at("params")) {
    std::vector<std::pair<std::string, std::vector<double>>> named;
    for (const auto& s : family_symbols(family)) named.emplace_back(s, entry.at(s).get<std::vector<double>>());
    ds.params.push_back(params_from_named(family, family_uses_k(family) ? K : 0, named));
  }
  if (static_cast<Eigen::Index>(ds.params.size()) != ds.size() || ds.phi.rows() != ds.size() ||
      ds.f.rows() != ds.size()) {
    throw std::runtime_error("dataset: sample counts disagree between blobs and manifest");
  }
  return ds;
}

}  // namespace oplearn
