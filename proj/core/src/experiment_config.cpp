#include "redge/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "redge/units.hpp"

namespace redge {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "system.antennas", "system.devices", "system.p_max_dbm", "system.bandwidth_hz",
      "system.noise_psd_dbm_per_hz", "system.f_max_cycles", "system.d_in_bits",
      "system.d_out_bits", "system.rzf_alpha", "system.cpu_tau", "system.cpu_mu",
      "system.gamma_shape", "system.gamma_scale", "system.sigma_h_sq", "system.sigma_w_sq",
      "model.hidden_depth", "model.hidden_width", "model.input_mode",
      "model.normalization_draws", "training.epochs", "training.minibatches_per_epoch",
      "training.realizations_per_minibatch", "training.samples", "training.gamma",
      "training.learning_rate", "training.beta1", "training.beta2", "training.epsilon",
      "training.validation_size", "training.test_size", "training.workers", "sweep.axis",
      "sweep.values", "sweep.schemes", "sweep.seeds", "sweep.test_seed", "sweep.desk_scale"};
  return keys;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", "), boost::token_compress_on);
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "': cannot parse number '" + text + "'");
  }
}

long long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v)) throw ParameterError("config key '" + key + "' must be an integer");
  return static_cast<long long>(v);
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParameterError("config key '" + key + "': cannot parse seed '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ParameterError("config key '" + key + "' must be a boolean");
}

const char* input_mode_key(InputMode m) {
  return m == InputMode::kEffectiveChannels ? "effective" : "raw";
}

}  // namespace

std::string_view axis_key(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kSigmaHSq: return "sigma_h_sq";
    case SweepAxis::kSigmaWSq: return "sigma_w_sq";
    case SweepAxis::kPMaxDbm: return "p_max_dbm";
  }
  return "none";
}

SweepAxis parse_axis(std::string_view text) {
  if (text == "none" || text.empty()) return SweepAxis::kNone;
  if (text == "sigma_h_sq") return SweepAxis::kSigmaHSq;
  if (text == "sigma_w_sq") return SweepAxis::kSigmaWSq;
  if (text == "p_max_dbm") return SweepAxis::kPMaxDbm;
  throw ParameterError("unknown sweep axis '" + std::string(text) + "'");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ExperimentConfig ExperimentConfig::full_profile() {
  ExperimentConfig c;
  c.training.epochs = 500;
  c.training.minibatches_per_epoch = 50;
  c.training.realizations_per_minibatch = 1000;
  c.training.samples = 1000;
  c.training.gamma = 0.05;
  c.training.validation_size = 2000;
  c.training.test_size = 2000;
  return c;
}

void ExperimentConfig::apply_desk_profile() {
  desk_scale = true;
  devices = 4;
  antennas = 6;
  shape.hidden_depth = 4;
  shape.hidden_width = 128;
  training.epochs = 50;
  training.minibatches_per_epoch = 10;
  training.realizations_per_minibatch = 100;
  training.samples = 200;
  training.validation_size = 200;
  training.test_size = 200;
  training.adam.learning_rate = 1e-3;
}

SystemParams ExperimentConfig::system(std::optional<double> axis_value) const {
  SystemParams p;
  p.antennas = antennas;
  p.devices = devices;
  p.p_max_mw = dbm_to_mw(p_max_dbm);
  p.bandwidth_hz = bandwidth_hz;
  p.noise_psd_mw_per_hz = dbm_to_mw(noise_psd_dbm_per_hz);
  p.task_sizes = {d_in_bits, d_out_bits};
  p.rzf_alpha = rzf_alpha;
  p.cpu = {cpu_tau, cpu_mu, f_max_cycles};
  p.gamma_shape = gamma_shape;
  p.gamma_scale = gamma_scale;
  p.sigma_h_sq = sigma_h_sq;
  p.sigma_w_sq = sigma_w_sq;
  if (axis_value) {
    switch (axis) {
      case SweepAxis::kNone: break;
      case SweepAxis::kSigmaHSq: p.sigma_h_sq = *axis_value; break;
      case SweepAxis::kSigmaWSq: p.sigma_w_sq = *axis_value; break;
      case SweepAxis::kPMaxDbm: p.p_max_mw = dbm_to_mw(*axis_value); break;
    }
  }
  return p;
}

std::vector<std::optional<double>> ExperimentConfig::grid_points() const {
  if (axis == SweepAxis::kNone) return {std::nullopt};
  std::vector<std::optional<double>> out;
  for (double g : grid) out.emplace_back(g);
  return out;
}

void ExperimentConfig::validate() const {
  if (shape.hidden_depth < 1 || shape.hidden_width < 1) {
    throw ParameterError("hidden depth and width must be >= 1");
  }
  if (normalization_draws < 2) throw ParameterError("normalization_draws must be >= 2");
  if (schemes.empty()) throw ParameterError("at least one scheme is required");
  if (seeds.empty()) throw ParameterError("at least one seed is required");
  if (axis != SweepAxis::kNone && grid.empty()) {
    throw ParameterError("sweep axis set but no grid values given");
  }
  training.validate();
  for (const auto& g : grid_points()) system(g).validate();
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  o << "[system]\n"
    << "antennas = " << antennas << '\n'
    << "devices = " << devices << '\n'
    << "p_max_dbm = " << num(p_max_dbm) << '\n'
    << "bandwidth_hz = " << num(bandwidth_hz) << '\n'
    << "noise_psd_dbm_per_hz = " << num(noise_psd_dbm_per_hz) << '\n'
    << "f_max_cycles = " << num(f_max_cycles) << '\n'
    << "d_in_bits = " << num(d_in_bits) << '\n'
    << "d_out_bits = " << num(d_out_bits) << '\n'
    << "rzf_alpha = " << num(rzf_alpha) << '\n'
    << "cpu_tau = " << num(cpu_tau) << '\n'
    << "cpu_mu = " << num(cpu_mu) << '\n'
    << "gamma_shape = " << num(gamma_shape) << '\n'
    << "gamma_scale = " << num(gamma_scale) << '\n'
    << "sigma_h_sq = " << num(sigma_h_sq) << '\n'
    << "sigma_w_sq = " << num(sigma_w_sq) << "\n\n";
  o << "[model]\n"
    << "hidden_depth = " << shape.hidden_depth << '\n'
    << "hidden_width = " << shape.hidden_width << '\n'
    << "input_mode = " << input_mode_key(shape.input_mode) << '\n'
    << "normalization_draws = " << normalization_draws << "\n\n";
  o << "[training]\n"
    << "epochs = " << training.epochs << '\n'
    << "minibatches_per_epoch = " << training.minibatches_per_epoch << '\n'
    << "realizations_per_minibatch = " << training.realizations_per_minibatch << '\n'
    << "samples = " << training.samples << '\n'
    << "gamma = " << num(training.gamma) << '\n'
    << "learning_rate = " << num(training.adam.learning_rate) << '\n'
    << "beta1 = " << num(training.adam.beta1) << '\n'
    << "beta2 = " << num(training.adam.beta2) << '\n'
    << "epsilon = " << num(training.adam.epsilon) << '\n'
    << "validation_size = " << training.validation_size << '\n'
    << "test_size = " << training.test_size << '\n'
    << "workers = " << training.workers << "\n\n";
  o << "[sweep]\n"
    << "axis = " << axis_key(axis) << '\n'
    << "values =";
  for (std::size_t i = 0; i < grid.size(); ++i) o << (i ? ", " : " ") << num(grid[i]);
  o << "\nschemes =";
  for (std::size_t i = 0; i < schemes.size(); ++i) o << (i ? ", " : " ") << scheme_key(schemes[i]);
  o << "\nseeds =";
  for (std::size_t i = 0; i < seeds.size(); ++i) o << (i ? ", " : " ") << seeds[i];
  o << "\ntest_seed = " << test_seed << '\n'
    << "desk_scale = " << (desk_scale ? "true" : "false") << '\n';
  return o.str();
}

ExperimentConfig parse_experiment_config(const std::string& ini_text) {
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParameterError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ParameterError("config key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!known_keys().count(full)) throw ParameterError("unknown config key '" + full + "'");
    }
  }
  auto get = [&tree](const std::string& key) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return boost::trim_copy(*v);
  };

  ExperimentConfig c = ExperimentConfig::full_profile();
  if (auto v = get("sweep.desk_scale"); v && parse_bool("sweep.desk_scale", *v)) {
    c.apply_desk_profile();
  }
  auto set_num = [&](const char* key, double& field) {
    if (auto v = get(key)) field = parse_number(key, *v);
  };
  auto set_int = [&](const char* key, int& field) {
    if (auto v = get(key)) field = static_cast<int>(parse_integer(key, *v));
  };

  set_int("system.antennas", c.antennas);
  set_int("system.devices", c.devices);
  set_num("system.p_max_dbm", c.p_max_dbm);
  set_num("system.bandwidth_hz", c.bandwidth_hz);
  set_num("system.noise_psd_dbm_per_hz", c.noise_psd_dbm_per_hz);
  set_num("system.f_max_cycles", c.f_max_cycles);
  set_num("system.d_in_bits", c.d_in_bits);
  set_num("system.d_out_bits", c.d_out_bits);
  set_num("system.rzf_alpha", c.rzf_alpha);
  set_num("system.cpu_tau", c.cpu_tau);
  set_num("system.cpu_mu", c.cpu_mu);
  set_num("system.gamma_shape", c.gamma_shape);
  set_num("system.gamma_scale", c.gamma_scale);
  set_num("system.sigma_h_sq", c.sigma_h_sq);
  set_num("system.sigma_w_sq", c.sigma_w_sq);

  set_int("model.hidden_depth", c.shape.hidden_depth);
  set_int("model.hidden_width", c.shape.hidden_width);
  if (auto v = get("model.input_mode")) {
    if (*v == "effective") {
      c.shape.input_mode = InputMode::kEffectiveChannels;
    } else if (*v == "raw") {
      c.shape.input_mode = InputMode::kRawChannels;
    } else {
      throw ParameterError("model.input_mode must be 'effective' or 'raw'");
    }
  }
  set_int("model.normalization_draws", c.normalization_draws);

  set_int("training.epochs", c.training.epochs);
  set_int("training.minibatches_per_epoch", c.training.minibatches_per_epoch);
  set_int("training.realizations_per_minibatch", c.training.realizations_per_minibatch);
  set_int("training.samples", c.training.samples);
  set_num("training.gamma", c.training.gamma);
  set_num("training.learning_rate", c.training.adam.learning_rate);
  set_num("training.beta1", c.training.adam.beta1);
  set_num("training.beta2", c.training.adam.beta2);
  set_num("training.epsilon", c.training.adam.epsilon);
  set_int("training.validation_size", c.training.validation_size);
  set_int("training.test_size", c.training.test_size);
  set_int("training.workers", c.training.workers);

  if (auto v = get("sweep.axis")) c.axis = parse_axis(*v);
  if (auto v = get("sweep.values")) {
    c.grid.clear();
    for (const auto& item : split_list(*v)) c.grid.push_back(parse_number("sweep.values", item));
  }
  if (auto v = get("sweep.schemes")) {
    c.schemes.clear();
    for (const auto& item : split_list(*v)) c.schemes.push_back(parse_scheme(item));
  }
  if (auto v = get("sweep.seeds")) {
    c.seeds.clear();
    for (const auto& item : split_list(*v)) {
      c.seeds.push_back(parse_seed("sweep.seeds", item));
    }
  }
  if (auto v = get("sweep.test_seed")) {
    c.test_seed = parse_seed("sweep.test_seed", *v);
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace redge
