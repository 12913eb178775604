#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "giuda/model.hpp"
#include "giuda/tensor.hpp"
#include "giuda/training.hpp"

namespace giuda {

// Flat key=value run configuration ('#' comments). Unknown keys are
// rejected; values are validated against the owning types on load.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir = "runs/default";
  std::string data_root = "data";
  std::string source_manifest;
  std::string target_manifest;

  std::size_t num_classes = 3;
  std::size_t input_points = 1024;
  std::size_t latent_dim = 1024;

  PipelineConfig pipeline;
  LossWeights weights;
  TrainConfig train;
  SpstConfig spst;

  // datagen
  std::size_t per_class_count = 100;
  std::size_t source_points = 1024;
  std::size_t target_points = 256;
  double source_noise = 0.005;
  double target_noise = 0.02;
  double source_occlusion = 0.0;
  double target_occlusion = 0.3;

  void validate() const;

  ModelConfig model_config() const {
    ModelConfig mc;
    mc.input_points = input_points;
    mc.latent_dim = latent_dim;
    mc.num_classes = num_classes;
    return mc;
  }

  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace giuda
