#include "giuda/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace giuda {

namespace {

Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros({fan_in, fan_out});
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

std::vector<ModelStack::Layer> ModelStack::make_mlp(
    const std::string& prefix, std::size_t in_dim,
    const std::vector<std::size_t>& hidden, std::size_t out_dim, Rng& rng) {
  std::vector<std::size_t> widths;
  widths.push_back(in_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out_dim);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Layer l;
    const std::string base = prefix + "." + std::to_string(i);
    l.weight = std::make_unique<Parameter>(
        base + ".weight", init_weight(widths[i], widths[i + 1], rng));
    l.bias = std::make_unique<Parameter>(base + ".bias",
                                         Tensor::zeros({widths[i + 1]}));
    layers.push_back(std::move(l));
  }
  return layers;
}

ModelStack::ModelStack(const ModelConfig& config, Rng& init_rng) : cfg_(config) {
  encoder_ = make_mlp("encoder", 3, cfg_.encoder_hidden, cfg_.latent_dim,
                      init_rng);
  decoder_ = make_mlp("decoder", cfg_.latent_dim + 3, cfg_.decoder_hidden, 1,
                      init_rng);
  classifier_ = make_mlp("classifier", cfg_.latent_dim, cfg_.classifier_hidden,
                         cfg_.num_classes, init_rng);
}

std::vector<Parameter*> ModelStack::parameters() {
  std::vector<Parameter*> out;
  for (auto* group : {&encoder_, &decoder_, &classifier_})
    for (Layer& l : *group) {
      out.push_back(l.weight.get());
      out.push_back(l.bias.get());
    }
  return out;
}

Tape::Var ModelStack::run_mlp(Tape& tape, const std::vector<Layer>& layers,
                              Tape::Var input, bool relu_last) const {
  Tape::Var x = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = tape.linear(x, tape.param(*layers[i].weight),
                    tape.param(*layers[i].bias));
    if (relu_last || i + 1 < layers.size()) x = tape.relu(x);
  }
  return x;
}

Tape::Var ModelStack::encode(Tape& tape, const PointCloud& cloud) const {
  if (cloud.points.size() != cfg_.input_points)
    throw std::invalid_argument(
        "encode: expected " + std::to_string(cfg_.input_points) +
        " points, got " + std::to_string(cloud.points.size()));
  Tensor in = Tensor::zeros({cloud.points.size(), 3});
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    for (int a = 0; a < 3; ++a) in.at(i, a) = cloud.points[i][a];
  Tape::Var x = run_mlp(tape, encoder_, tape.leaf(std::move(in)),
                        /*relu_last=*/false);
  return tape.max_pool_rows(x);
}

Tape::Var ModelStack::decode(Tape& tape, const std::vector<Point3>& queries,
                             Tape::Var latent) const {
  if (tape.value(latent).size() != cfg_.latent_dim)
    throw std::invalid_argument("decode: latent dimension mismatch");
  Tensor q = Tensor::zeros({queries.size(), 3});
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (int a = 0; a < 3; ++a) q.at(i, a) = queries[i][a];
  // Concatenation order (q, c).
  Tape::Var in = tape.concat_rows_broadcast(tape.leaf(std::move(q)), latent);
  return run_mlp(tape, decoder_, in, /*relu_last=*/true);
}

Tape::Var ModelStack::classify(Tape& tape, Tape::Var latent) const {
  if (tape.value(latent).size() != cfg_.latent_dim)
    throw std::invalid_argument("classify: latent dimension mismatch");
  return run_mlp(tape, classifier_, latent, /*relu_last=*/false);
}

Tensor ModelStack::encode_value(const PointCloud& cloud) const {
  Tape tape;
  return tape.value(encode(tape, cloud));
}

std::vector<double> ModelStack::decode_value(const std::vector<Point3>& queries,
                                             const Tensor& latent) const {
  Tape tape;
  Tensor l = latent;
  l.shape = {1, cfg_.latent_dim};
  return tape.value(decode(tape, queries, tape.leaf(std::move(l)))).data;
}

Tensor ModelStack::classify_value(const Tensor& latent) const {
  Tape tape;
  Tensor l = latent;
  l.shape = {1, cfg_.latent_dim};
  return tape.value(classify(tape, tape.leaf(std::move(l))));
}

void ModelStack::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("save_checkpoint: cannot open '" + path + "'");
  out.write("GIUDA1", 6);
  std::vector<const Parameter*> params;
  for (auto* group : {&encoder_, &decoder_, &classifier_})
    for (const Layer& l : *group) {
      params.push_back(l.weight.get());
      params.push_back(l.bias.get());
    }
  const std::uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const Parameter* p : params) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(p->name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(p->name.data(), name_len);
    const std::uint32_t ndim = static_cast<std::uint32_t>(p->value.shape.size());
    out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
    for (std::size_t d : p->value.shape) {
      const std::uint64_t e = d;
      out.write(reinterpret_cast<const char*>(&e), sizeof(e));
    }
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out)
    throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

void ModelStack::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, "GIUDA1", 6) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in '" + path + "'");
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  std::vector<Parameter*> params = parameters();
  if (count != params.size())
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  for (Parameter* p : params) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (name != p->name)
      throw std::runtime_error("load_checkpoint: expected parameter '" +
                               p->name + "', found '" + name + "'");
    std::uint32_t ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
    std::vector<std::size_t> shape(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) {
      std::uint64_t e = 0;
      in.read(reinterpret_cast<char*>(&e), sizeof(e));
      shape[d] = static_cast<std::size_t>(e);
    }
    if (shape != p->value.shape)
      throw std::runtime_error("load_checkpoint: shape mismatch for '" +
                               p->name + "'");
    in.read(reinterpret_cast<char*>(p->value.data.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!in)
      throw std::runtime_error("load_checkpoint: truncated file '" + path + "'");
    // Checkpoints carry values only; optimizer state restarts.
    p->zero_grad();
    std::fill(p->m.data.begin(), p->m.data.end(), 0.0);
    std::fill(p->v.data.begin(), p->v.data.end(), 0.0);
    p->step_count = 0;
  }
}

}  // namespace giuda
