#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "redge/allocator.hpp"

namespace redge {

namespace {

constexpr const char* kFormatName = "redge-allocator";

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr, Eigen::Index expected, const char* what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != expected) {
    throw StructuralError(std::string("checkpoint field '") + what + "' has the wrong length");
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

const char* mode_name(InputMode mode) {
  return mode == InputMode::kEffectiveChannels ? "effective" : "raw";
}

InputMode mode_from_name(const std::string& name) {
  if (name == "effective") return InputMode::kEffectiveChannels;
  if (name == "raw") return InputMode::kRawChannels;
  throw StructuralError("unknown input mode '" + name + "' in checkpoint");
}

}  // namespace

std::string checkpoint_to_string(const AllocatorModel& model) {
  json doc;
  doc["format"] = kFormatName;
  doc["version"] = kCheckpointVersion;
  doc["devices"] = model.devices();
  doc["antennas"] = model.antennas();
  doc["input_mode"] = mode_name(model.shape().input_mode);
  doc["hidden_depth"] = model.shape().hidden_depth;
  doc["hidden_width"] = model.shape().hidden_width;
  doc["feature_shift"] = vector_to_json(model.feature_shift());
  doc["feature_scale"] = vector_to_json(model.feature_scale());
  json layers = json::array();
  for (const auto& layer : model.layers()) {
    json l;
    l["rows"] = layer.weight.rows();
    l["cols"] = layer.weight.cols();
    json w = json::array();
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
    }
    l["weight"] = std::move(w);
    l["bias"] = vector_to_json(layer.bias);
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1);
}

AllocatorModel checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (doc.value("format", std::string{}) != kFormatName) {
    throw StructuralError("not an allocator checkpoint");
  }
  if (!doc.contains("version")) throw StructuralError("checkpoint has no version field");
  const int version = doc["version"].get<int>();
  if (version != kCheckpointVersion) {
    throw StructuralError("unsupported checkpoint version " + std::to_string(version));
  }
  NetworkShape shape;
  shape.hidden_depth = doc.at("hidden_depth").get<int>();
  shape.hidden_width = doc.at("hidden_width").get<int>();
  shape.input_mode = mode_from_name(doc.at("input_mode").get<std::string>());
  const int devices = doc.at("devices").get<int>();
  const int antennas = doc.at("antennas").get<int>();
  const Eigen::Index dim = feature_count(shape.input_mode, devices, antennas);

  LayerStack layers;
  for (const auto& l : doc.at("layers")) {
    const Eigen::Index rows = l.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = l.at("cols").get<Eigen::Index>();
    const auto& w = l.at("weight");
    if (static_cast<Eigen::Index>(w.size()) != rows * cols) {
      throw StructuralError("checkpoint weight array has the wrong size");
    }
    DenseLayer d;
    d.weight.resize(rows, cols);
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) d.weight(r, c) = w[idx++].get<double>();
    }
    d.bias = vector_from_json(l.at("bias"), rows, "bias");
    layers.push_back(std::move(d));
  }
  return AllocatorModel::from_parts(devices, antennas, shape, std::move(layers),
                                    vector_from_json(doc.at("feature_shift"), dim, "feature_shift"),
                                    vector_from_json(doc.at("feature_scale"), dim, "feature_scale"));
}

void save_checkpoint(const AllocatorModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out << checkpoint_to_string(model) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AllocatorModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace redge
