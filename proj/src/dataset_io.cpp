#include "astcost/dataset_io.hpp"

#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "astcost/errors.hpp"

namespace astcost {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::array<int, 2> read_pair(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw DataError(std::string("manifest field ") + key + " must be a pair");
  return {v[0].get<int>(), v[1].get<int>()};
}

WorkloadMeta read_workload(const ordered_json& j) {
  WorkloadMeta w;
  w.id = j.at("id").get<std::string>();
  w.height = j.at("H").get<int>();
  w.width = j.at("W").get<int>();
  w.c_in = j.at("c_in").get<int>();
  w.c_out = j.at("c_out").get<int>();
  w.kernel = read_pair(j, "kernel");
  w.stride = read_pair(j, "stride");
  w.padding = read_pair(j, "padding");
  w.dilation = read_pair(j, "dilation");
  w.config_count = j.at("config_count").get<std::size_t>();
  return w;
}

ordered_json write_workload(const WorkloadMeta& w, const std::string& file) {
  ordered_json j;
  j["id"] = w.id;
  j["H"] = w.height;
  j["W"] = w.width;
  j["c_in"] = w.c_in;
  j["c_out"] = w.c_out;
  j["kernel"] = w.kernel;
  j["stride"] = w.stride;
  j["padding"] = w.padding;
  j["dilation"] = w.dilation;
  j["config_count"] = w.config_count;
  j["file"] = file;
  return j;
}

AstGraph read_record(const ordered_json& j, std::size_t feature_dim) {
  const auto n = j.at("n").get<std::size_t>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw DataError("edge must be a [parent, child] pair");
    edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }
  const auto& rows = j.at("features");
  if (rows.size() != n) {
    throw DataError("features has " + std::to_string(rows.size()) + " rows for n=" + std::to_string(n));
  }
  std::vector<double> features;
  features.reserve(n * feature_dim);
  for (const auto& row : rows) {
    if (row.size() != feature_dim) {
      throw DataError("feature row width " + std::to_string(row.size()) + " does not match manifest feature_dim " +
                      std::to_string(feature_dim));
    }
    for (const auto& v : row) features.push_back(v.get<double>());
  }
  auto types = j.at("types").get<std::vector<std::uint32_t>>();
  return AstGraph(n, std::move(edges), feature_dim, std::move(features), std::move(types),
                  j.at("runtime").get<double>(), j.at("root").get<std::size_t>());
}

ordered_json write_record(const AstGraph& g) {
  ordered_json j;
  j["n"] = g.node_count();
  ordered_json edges = ordered_json::array();
  for (const auto& [p, c] : g.edges()) edges.push_back({p, c});
  j["edges"] = std::move(edges);
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    auto r = g.feature_row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["features"] = std::move(rows);
  j["types"] = g.node_types();
  j["runtime"] = g.runtime();
  j["root"] = g.root();
  return j;
}

std::string record_file_name(const std::string& workload_id) { return workload_id + ".jsonl"; }

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("missing manifest: " + manifest_path.string());

  Dataset ds;
  std::vector<std::string> files;
  try {
    ordered_json manifest = ordered_json::parse(in);
    ds.feature_dim = manifest.at("feature_dim").get<std::size_t>();
    ds.type_vocab_size = manifest.at("type_vocab_size").get<std::size_t>();
    for (const auto& w : manifest.at("workloads")) {
      ds.workloads.push_back(read_workload(w));
      files.push_back(w.at("file").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (ds.feature_dim == 0) throw DataError("manifest feature_dim must be positive");

  for (std::size_t w = 0; w < ds.workloads.size(); ++w) {
    const fs::path path = dir / files[w];
    std::ifstream records(path);
    if (!records) throw DataError("missing record file: " + path.string());
    std::string line;
    std::size_t index = 0;
    while (std::getline(records, line)) {
      if (line.empty()) continue;
      try {
        ds.graphs.push_back({ds.workloads[w].id, read_record(ordered_json::parse(line), ds.feature_dim)});
      } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + " record " + std::to_string(index) + ": " + e.what());
      } catch (const DataError& e) {
        throw DataError(path.string() + " record " + std::to_string(index) + ": " + e.what());
      }
      ++index;
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  ordered_json manifest;
  manifest["feature_dim"] = dataset.feature_dim;
  manifest["type_vocab_size"] = dataset.type_vocab_size;
  manifest["workloads"] = ordered_json::array();
  for (const auto& w : dataset.workloads) manifest["workloads"].push_back(write_workload(w, record_file_name(w.id)));

  auto open = [](const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
  };

  {
    auto out = open(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  std::map<std::string, std::vector<const AstGraph*>> by_workload;
  for (const auto& g : dataset.graphs) by_workload[g.workload_id].push_back(&g.graph);
  for (const auto& w : dataset.workloads) {
    auto out = open(dir / record_file_name(w.id));
    for (const AstGraph* g : by_workload[w.id]) out << write_record(*g).dump() << '\n';
    if (!out) throw DataError("write failed for workload " + w.id);
  }
}

}  // namespace astcost
