#include "astcost/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "astcost/errors.hpp"

namespace astcost::models {

using ordered_json = nlohmann::ordered_json;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const Surrogate& m = ckpt.model;
  ordered_json header;
  header["label"] = m.spec().label;
  header["encoder_widths"] = m.spec().encoder_widths;
  header["propagation_widths"] = m.spec().propagation_widths;
  header["head_widths"] = m.spec().head_widths;
  header["embedding_dim"] = m.spec().embedding_dim;
  header["input"] = m.spec().input == InputKind::kGraph ? "graph" : "curve";
  header["aggregation"] = ModelSpec::kAggregation;
  header["message_pool"] = ModelSpec::kMessagePool;
  header["message_direction"] = ModelSpec::kMessageDirection;
  header["feature_dim"] = m.dims().feature_dim;
  header["type_vocab_size"] = m.dims().type_vocab_size;
  header["curve_samples"] = m.dims().curve_samples;
  header["seed"] = ckpt.seed;
  header["epoch"] = ckpt.epoch;
  header["log_target"] = ckpt.log_target;

  ordered_json shapes = ordered_json::array();
  std::vector<double> values;
  for (const nn::Parameter* p : m.parameters()) {
    shapes.push_back({{"name", p->name}, {"shape", p->value.shape()}});
    values.insert(values.end(), p->value.values().begin(), p->value.values().end());
  }
  header["parameters"] = std::move(shapes);

  ordered_json doc;
  doc["header"] = std::move(header);
  doc["values"] = std::move(values);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing checkpoint " + path.string());
  try {
    const ordered_json doc = ordered_json::parse(in);
    const auto& h = doc.at("header");
    ModelSpec spec;
    spec.label = h.at("label").get<std::string>();
    spec.encoder_widths = h.at("encoder_widths").get<std::vector<std::size_t>>();
    spec.propagation_widths = h.at("propagation_widths").get<std::vector<std::size_t>>();
    spec.head_widths = h.at("head_widths").get<std::vector<std::size_t>>();
    spec.embedding_dim = h.at("embedding_dim").get<std::size_t>();
    spec.input = h.at("input").get<std::string>() == "curve" ? InputKind::kCurve : InputKind::kGraph;
    InputDims dims{h.at("feature_dim").get<std::size_t>(), h.at("type_vocab_size").get<std::size_t>(),
                   h.at("curve_samples").get<std::size_t>()};
    Checkpoint ckpt{Surrogate(spec, dims, 0), h.at("seed").get<std::uint64_t>(), h.at("epoch").get<std::size_t>(),
                    h.value("log_target", false)};

    const auto values = doc.at("values").get<std::vector<double>>();
    const auto& shapes = h.at("parameters");
    auto params = ckpt.model.parameters();
    if (shapes.size() != params.size()) throw DataError("checkpoint parameter list does not match its spec");
    std::size_t offset = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      nn::Parameter& p = *params[i];
      if (shapes[i].at("shape").get<std::vector<std::size_t>>() != p.value.shape()) {
        throw DataError("checkpoint shape mismatch for " + p.name);
      }
      if (offset + p.value.size() > values.size()) throw DataError("checkpoint truncated at " + p.name);
      std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), p.value.size(), p.value.data());
      offset += p.value.size();
    }
    if (offset != values.size()) throw DataError("checkpoint has trailing values");
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("invalid checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace astcost::models
