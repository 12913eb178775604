#pragma once

#include <stdexcept>
#include <cstdint>
#include <string>
#include <vector>

#include "giuda/augment.hpp"
#include "giuda/model.hpp"
#include "giuda/tensor.hpp"

namespace giuda {

struct LossWeights {
  double alpha = 100.0;  // masking consistency
  double beta = 1.0;     // source classification
  double mu = 1.0;       // self-paced target classification

  void validate() const {
    if (alpha < 0.0 || beta < 0.0 || mu < 0.0)
      throw std::invalid_argument("LossWeights: weights must be >= 0");
  }
};

struct SpstConfig {
  double gamma = 0.1;  // selection reward; used when target_fractions is empty
  std::size_t rounds = 3;
  std::size_t epochs_per_round = 1;
  // Per-round selected-fraction targets; gamma is then derived from the
  // sorted confidence values.
  std::vector<double> target_fractions{0.6, 0.7, 0.8};

  void validate() const {
    if (gamma <= 0.0) throw std::invalid_argument("SpstConfig: gamma must be > 0");
  }
};

struct PseudoLabel {
  bool selected = false;
  int label = 0;
};
using PseudoLabelSet = std::vector<PseudoLabel>;

// Everything the training loops need besides the optimizer settings.
struct PipelineConfig {
  std::size_t neighbor_count = 3;      // M
  std::size_t queries_per_step = 512;  // K
  double cube_half_width = 0.55;
  MaskSpec mask;
  bool rotate_augment = true;
  // When set, classification terms are also evaluated on the masked variant's
  // latent (mean of full and masked cross entropies). Off by default: the
  // supervised pathway then sees only the full cloud. Useful when the target
  // domain is occluded and the consistency weight alone cannot enforce
  // occlusion-invariant latents.
  bool classify_masked = false;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss_implicit = 0.0;
  double loss_mask = 0.0;
  double loss_cls_source = 0.0;
  double loss_cls_target = 0.0;
  double source_acc = 0.0;
  double target_acc = 0.0;
};

struct SelectionStats {
  std::size_t round = 0;
  double gamma = 0.0;
  double selected_fraction = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

// ---- loss terms ----

// Mean absolute error between predicted and reference distances (Eq-style
// implicit supervision).
double loss_implicit(const std::vector<double>& predicted,
                     const std::vector<double>& target);

// Euclidean distance between the two latents.
double loss_mask(const Tensor& latent_full, const Tensor& latent_masked);

// Mean softmax cross entropy of logits [B,J] against integer labels.
double loss_cls_source(const Tensor& logits, const std::vector<int>& labels);

// Closed-form per-sample minimizer of the self-paced objective over
// {unselected} + one-hot labels: pick argmax p iff p_max > exp(-gamma).
PseudoLabelSet spst_select(const std::vector<std::vector<double>>& probabilities,
                           double gamma);

// -(1/total_count) * sum over selected samples of (log p_label + gamma).
// selected_probabilities holds the softmax rows of the selected clouds only.
double loss_cls_target(const std::vector<std::vector<double>>& selected_probabilities,
                       const std::vector<int>& pseudo_labels, double gamma,
                       std::size_t total_count);

double total_loss(double l_implicit, double l_mask, double l_cls_source,
                  double l_cls_target, const LossWeights& weights);

// ---- data preparation ----

// Brings a cloud to exactly n points: uniform subsample when larger,
// affinity-aware jitter padding when smaller.
PointCloud prepare_input(const PointCloud& cloud, std::size_t n,
                         std::size_t neighbor_count, Rng& rng);

// ---- loops ----

std::vector<EpochMetrics> pretrain_implicits(
    ModelStack& stack, const std::vector<PointCloud>& source,
    const std::vector<PointCloud>& target, const TrainConfig& train,
    const PipelineConfig& pipeline, double alpha, std::uint64_t seed);

// Joint adaptation. When pseudo_labels is non-null it must have one entry
// per target cloud and the mu-weighted self-training term is active.
std::vector<EpochMetrics> adapt(ModelStack& stack,
                                const std::vector<PointCloud>& source,
                                const std::vector<PointCloud>& target,
                                const LossWeights& weights,
                                const TrainConfig& train,
                                const PipelineConfig& pipeline,
                                std::uint64_t seed,
                                const PseudoLabelSet* pseudo_labels = nullptr,
                                double spst_gamma = 0.0);

struct SpstResult {
  std::vector<EpochMetrics> metrics;
  std::vector<SelectionStats> selection;
};

// Alternates pseudo-label selection over the whole target set with
// adaptation epochs that include the self-training term.
SpstResult spst_rounds(ModelStack& stack, const std::vector<PointCloud>& source,
                       const std::vector<PointCloud>& target,
                       const LossWeights& weights, const SpstConfig& spst,
                       const TrainConfig& train, const PipelineConfig& pipeline,
                       std::uint64_t seed);

// Source-only reference: classification loss only, no implicit supervision.
std::vector<EpochMetrics> train_source_only(ModelStack& stack,
                                            const std::vector<PointCloud>& source,
                                            const TrainConfig& train,
                                            const PipelineConfig& pipeline,
                                            std::uint64_t seed);

EvalResult evaluate(const ModelStack& stack,
                    const std::vector<PointCloud>& clouds,
                    const PipelineConfig& pipeline, std::uint64_t seed);

// Softmax class probabilities for every cloud (deterministic preparation).
std::vector<std::vector<double>> predict_probabilities(
    const ModelStack& stack, const std::vector<PointCloud>& clouds,
    const PipelineConfig& pipeline, std::uint64_t seed);

// ---- artifacts ----

// Header "epoch,lr,L_I,L_M,L_cls_s,L_cls_t,source_acc,target_acc".
void write_metrics_csv(const std::vector<EpochMetrics>& metrics,
                       const std::string& path);
// Header "round,gamma,selected_fraction".
void write_selection_csv(const std::vector<SelectionStats>& stats,
                         const std::string& path);

}  // namespace giuda
