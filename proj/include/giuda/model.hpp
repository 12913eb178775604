#pragma once

#include <memory>
#include <string>
#include <vector>

#include "giuda/autodiff.hpp"
#include "giuda/field.hpp"
#include "giuda/pointcloud.hpp"

namespace giuda {

struct ModelConfig {
  std::size_t input_points = 1024;
  std::size_t latent_dim = 1024;
  std::size_t num_classes = 10;
  std::vector<std::size_t> encoder_hidden{64, 128};
  std::vector<std::size_t> decoder_hidden{512, 256, 128};
  std::vector<std::size_t> classifier_hidden{512, 256};
};

// Shared encoder (per-point MLP + max pool), implicit decoder conditioned on
// (query, latent), and latent classifier. All parameters are named and
// checkpointable.
class ModelStack {
 public:
  ModelStack(const ModelConfig& config, Rng& init_rng);

  const ModelConfig& config() const { return cfg_; }
  std::vector<Parameter*> parameters();

  // Tape-building forward passes. encode yields a [1, latent] var.
  Tape::Var encode(Tape& tape, const PointCloud& cloud) const;
  // decode yields [K, 1] non-negative predicted distances.
  Tape::Var decode(Tape& tape, const std::vector<Point3>& queries,
                   Tape::Var latent) const;
  // classify yields [1, J] raw logits.
  Tape::Var classify(Tape& tape, Tape::Var latent) const;

  // Forward-only conveniences.
  Tensor encode_value(const PointCloud& cloud) const;
  std::vector<double> decode_value(const std::vector<Point3>& queries,
                                   const Tensor& latent) const;
  Tensor classify_value(const Tensor& latent) const;

  // "GIUDA1" binary checkpoint of all named parameter values.
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  struct Layer {
    std::unique_ptr<Parameter> weight;
    std::unique_ptr<Parameter> bias;
  };

  static std::vector<Layer> make_mlp(const std::string& prefix,
                                     std::size_t in_dim,
                                     const std::vector<std::size_t>& hidden,
                                     std::size_t out_dim, Rng& rng);
  Tape::Var run_mlp(Tape& tape, const std::vector<Layer>& layers,
                    Tape::Var input, bool relu_last) const;

  ModelConfig cfg_;
  std::vector<Layer> encoder_;
  std::vector<Layer> decoder_;
  std::vector<Layer> classifier_;
};

}  // namespace giuda
