#include "giuda/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace giuda {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "': " + v);
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::string format_double_list(const std::vector<double>& v) {
  std::string out;
  char buf[48];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    if (i) out += ",";
    out += buf;
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  weights.validate();
  spst.validate();
  pipeline.mask.validate();
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (num_classes < 2 || num_classes > 10)
    throw std::invalid_argument("config: num_classes must be in [2, 10]");
  if (input_points < 8)
    throw std::invalid_argument("config: input_points must be >= 8");
  if (latent_dim < 1)
    throw std::invalid_argument("config: latent_dim must be >= 1");
  if (pipeline.neighbor_count < 1)
    throw std::invalid_argument("config: neighbor_count must be >= 1");
  if (pipeline.queries_per_step < 1)
    throw std::invalid_argument("config: queries_per_step must be >= 1");
  if (pipeline.cube_half_width <= 0.0)
    throw std::invalid_argument("config: cube_half_width must be > 0");
  if (source_occlusion < 0.0 || source_occlusion >= 1.0 ||
      target_occlusion < 0.0 || target_occlusion >= 1.0)
    throw std::invalid_argument("config: occlusion fractions must be in [0,1)");
  if (per_class_count < 1)
    throw std::invalid_argument("config: per_class_count must be >= 1");
  if (source_points < 32 || target_points < 32)
    throw std::invalid_argument("config: domain point counts must be >= 32");
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open '" + path + "'");
  RunConfig cfg;
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = std::stoul(v); }},
      {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"data_root", [](RunConfig& c, const std::string& v) { c.data_root = v; }},
      {"source_manifest", [](RunConfig& c, const std::string& v) { c.source_manifest = v; }},
      {"target_manifest", [](RunConfig& c, const std::string& v) { c.target_manifest = v; }},
      {"num_classes", [](RunConfig& c, const std::string& v) { c.num_classes = std::stoul(v); }},
      {"input_points", [](RunConfig& c, const std::string& v) { c.input_points = std::stoul(v); }},
      {"latent_dim", [](RunConfig& c, const std::string& v) { c.latent_dim = std::stoul(v); }},
      {"neighbor_count", [](RunConfig& c, const std::string& v) { c.pipeline.neighbor_count = std::stoul(v); }},
      {"queries_per_step", [](RunConfig& c, const std::string& v) { c.pipeline.queries_per_step = std::stoul(v); }},
      {"cube_half_width", [](RunConfig& c, const std::string& v) { c.pipeline.cube_half_width = std::stod(v); }},
      {"mask_radius_min", [](RunConfig& c, const std::string& v) { c.pipeline.mask.radius_min = std::stod(v); }},
      {"mask_radius_max", [](RunConfig& c, const std::string& v) { c.pipeline.mask.radius_max = std::stod(v); }},
      {"rotate_augment", [](RunConfig& c, const std::string& v) { c.pipeline.rotate_augment = parse_bool(v, "rotate_augment"); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.weights.alpha = std::stod(v); }},
      {"beta", [](RunConfig& c, const std::string& v) { c.weights.beta = std::stod(v); }},
      {"mu", [](RunConfig& c, const std::string& v) { c.weights.mu = std::stod(v); }},
      {"learning_rate", [](RunConfig& c, const std::string& v) { c.train.learning_rate = std::stod(v); }},
      {"weight_decay", [](RunConfig& c, const std::string& v) { c.train.weight_decay = std::stod(v); }},
      {"min_learning_rate", [](RunConfig& c, const std::string& v) { c.train.min_learning_rate = std::stod(v); }},
      {"epochs", [](RunConfig& c, const std::string& v) { c.train.total_epochs = std::stoul(v); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = std::stoul(v); }},
      {"spst_gamma", [](RunConfig& c, const std::string& v) { c.spst.gamma = std::stod(v); }},
      {"spst_rounds", [](RunConfig& c, const std::string& v) { c.spst.rounds = std::stoul(v); }},
      {"spst_epochs_per_round", [](RunConfig& c, const std::string& v) { c.spst.epochs_per_round = std::stoul(v); }},
      {"spst_target_fractions", [](RunConfig& c, const std::string& v) { c.spst.target_fractions = parse_double_list(v); }},
      {"per_class_count", [](RunConfig& c, const std::string& v) { c.per_class_count = std::stoul(v); }},
      {"source_points", [](RunConfig& c, const std::string& v) { c.source_points = std::stoul(v); }},
      {"target_points", [](RunConfig& c, const std::string& v) { c.target_points = std::stoul(v); }},
      {"source_noise", [](RunConfig& c, const std::string& v) { c.source_noise = std::stod(v); }},
      {"target_noise", [](RunConfig& c, const std::string& v) { c.target_noise = std::stod(v); }},
      {"source_occlusion", [](RunConfig& c, const std::string& v) { c.source_occlusion = std::stod(v); }},
      {"target_occlusion", [](RunConfig& c, const std::string& v) { c.target_occlusion = std::stod(v); }},
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: missing '=' at line " +
                               std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end())
      throw std::runtime_error("config: unknown key '" + key + "' at line " +
                               std::to_string(line_no));
    it->second(cfg, value);
  }
  cfg.validate();
  return cfg;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot open '" + path + "'");
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "seed = " << seed << "\n";
  out << "threads = " << threads << "\n";
  out << "out_dir = " << out_dir << "\n";
  out << "data_root = " << data_root << "\n";
  out << "source_manifest = " << source_manifest << "\n";
  out << "target_manifest = " << target_manifest << "\n";
  out << "num_classes = " << num_classes << "\n";
  out << "input_points = " << input_points << "\n";
  out << "latent_dim = " << latent_dim << "\n";
  out << "neighbor_count = " << pipeline.neighbor_count << "\n";
  out << "queries_per_step = " << pipeline.queries_per_step << "\n";
  out << "cube_half_width = " << num(pipeline.cube_half_width) << "\n";
  out << "mask_radius_min = " << num(pipeline.mask.radius_min) << "\n";
  out << "mask_radius_max = " << num(pipeline.mask.radius_max) << "\n";
  out << "rotate_augment = " << (pipeline.rotate_augment ? "true" : "false")
      << "\n";
  out << "alpha = " << num(weights.alpha) << "\n";
  out << "beta = " << num(weights.beta) << "\n";
  out << "mu = " << num(weights.mu) << "\n";
  out << "learning_rate = " << num(train.learning_rate) << "\n";
  out << "weight_decay = " << num(train.weight_decay) << "\n";
  out << "min_learning_rate = " << num(train.min_learning_rate) << "\n";
  out << "epochs = " << train.total_epochs << "\n";
  out << "batch_size = " << train.batch_size << "\n";
  out << "spst_gamma = " << num(spst.gamma) << "\n";
  out << "spst_rounds = " << spst.rounds << "\n";
  out << "spst_epochs_per_round = " << spst.epochs_per_round << "\n";
  out << "spst_target_fractions = " << format_double_list(spst.target_fractions)
      << "\n";
  out << "per_class_count = " << per_class_count << "\n";
  out << "source_points = " << source_points << "\n";
  out << "target_points = " << target_points << "\n";
  out << "source_noise = " << num(source_noise) << "\n";
  out << "target_noise = " << num(target_noise) << "\n";
  out << "source_occlusion = " << num(source_occlusion) << "\n";
  out << "target_occlusion = " << num(target_occlusion) << "\n";
  if (!out) throw std::runtime_error("config: write failed '" + path + "'");
}

}  // namespace giuda
