#include "giuda/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace giuda {

namespace {

constexpr double kPi = 3.14159265358979323846;

Tensor one_hot_row(int label, std::size_t classes) {
  Tensor t = Tensor::zeros({1, classes});
  t.data[static_cast<std::size_t>(label)] = 1.0;
  return t;
}

std::vector<double> softmax_row(const Tensor& logits) {
  std::vector<double> p(logits.size());
  double zmax = logits.data[0];
  for (double v : logits.data) zmax = std::max(zmax, v);
  double denom = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = std::exp(logits.data[j] - zmax);
    denom += p[j];
  }
  for (double& v : p) v /= denom;
  return p;
}

int argmax_class(const std::vector<double>& p) {
  int best = 0;
  for (std::size_t j = 1; j < p.size(); ++j)
    if (p[j] > p[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
  return best;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.index(i)]);
}

struct CloudTerms {
  double li = 0.0;
  double lm = 0.0;
  double ce = 0.0;
  bool has_ce = false;
};

// One cloud's forward/backward contribution. cls_label drives the
// beta/mu-weighted cross-entropy term; gamma_const is subtracted from the
// cross entropy (self-training reward), zero for source clouds.
CloudTerms process_cloud(ModelStack& stack, const PointCloud& cloud,
                         const PipelineConfig& pipeline, double alpha,
                         double cls_weight, const int* cls_label,
                         double gamma_const, double backward_scale,
                         std::uint64_t slot_seed) {
  Rng rng_prep(Rng::derive(slot_seed, 1));
  Rng rng_mask(Rng::derive(slot_seed, 2));
  Rng rng_query(Rng::derive(slot_seed, 3));

  PointCloud base = cloud;
  if (pipeline.rotate_augment)
    base = rotate_z(base, rng_prep.uniform(0.0, 2.0 * kPi));
  PointCloud prepared = prepare_input(base, stack.config().input_points,
                                      pipeline.neighbor_count, rng_prep);
  AffinityProfile profile =
      local_affinity(prepared, pipeline.neighbor_count);

  Tape tape;
  Tape::Var latent = stack.encode(tape, prepared);

  std::vector<Tape::Var> terms;
  std::vector<double> weights;
  double constant = 0.0;

  QuerySet queries =
      sample_queries(pipeline.queries_per_step, pipeline.cube_half_width,
                     rng_query);
  std::vector<double> targets = aud(prepared, profile, queries);
  Tape::Var pred = stack.decode(tape, queries.points, latent);
  Tape::Var li = tape.mean_abs_error(pred, Tensor({targets.size()}, targets));
  terms.push_back(li);
  weights.push_back(1.0);

  CloudTerms out;
  bool have_masked = false;
  Tape::Var latent_masked{};
  if (alpha > 0.0 || (pipeline.classify_masked && cls_label != nullptr &&
                      cls_weight > 0.0)) {
    PointCloud masked = random_mask(prepared, pipeline.mask, rng_mask);
    PointCloud masked_padded = prepare_input(
        masked, stack.config().input_points, pipeline.neighbor_count, rng_mask);
    latent_masked = stack.encode(tape, masked_padded);
    have_masked = true;
  }
  if (alpha > 0.0) {
    Tape::Var lm = tape.l2_distance(latent, latent_masked);
    terms.push_back(lm);
    weights.push_back(alpha);
    out.lm = tape.value(lm).data[0];
  }
  if (cls_label != nullptr && cls_weight > 0.0) {
    const Tensor label_row =
        one_hot_row(*cls_label, stack.config().num_classes);
    Tape::Var logits = stack.classify(tape, latent);
    Tape::Var ce = tape.softmax_cross_entropy(logits, label_row);
    if (pipeline.classify_masked && have_masked) {
      Tape::Var logits_masked = stack.classify(tape, latent_masked);
      Tape::Var ce_masked = tape.softmax_cross_entropy(logits_masked, label_row);
      terms.push_back(ce);
      weights.push_back(0.5 * cls_weight);
      terms.push_back(ce_masked);
      weights.push_back(0.5 * cls_weight);
      out.ce = 0.5 * (tape.value(ce).data[0] + tape.value(ce_masked).data[0]);
    } else {
      terms.push_back(ce);
      weights.push_back(cls_weight);
      out.ce = tape.value(ce).data[0];
    }
    constant -= cls_weight * gamma_const;
    out.has_ce = true;
  }
  Tape::Var loss = tape.weighted_sum(terms, weights, constant);
  tape.backward(loss, backward_scale);
  tape.accumulate_param_grads();
  out.li = tape.value(li).data[0];
  return out;
}

double gamma_for_fraction(const std::vector<std::vector<double>>& probs,
                          double fraction) {
  std::vector<double> pmax;
  pmax.reserve(probs.size());
  for (const auto& p : probs)
    pmax.push_back(*std::max_element(p.begin(), p.end()));
  std::sort(pmax.begin(), pmax.end(), std::greater<>());
  std::size_t k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(pmax.size())));
  k = std::clamp<std::size_t>(k, 1, pmax.size());
  const double threshold = pmax[k - 1];
  // p_max > exp(-gamma) must hold for the top-k values.
  const double gamma = -std::log(std::min(threshold, 1.0 - 1e-12)) + 1e-9;
  return std::max(gamma, 1e-9);
}

}  // namespace

double loss_implicit(const std::vector<double>& predicted,
                     const std::vector<double>& target) {
  if (predicted.size() != target.size())
    throw std::invalid_argument("loss_implicit: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    sum += std::abs(predicted[i] - target[i]);
  return sum / static_cast<double>(predicted.size());
}

double loss_mask(const Tensor& latent_full, const Tensor& latent_masked) {
  if (latent_full.size() != latent_masked.size())
    throw std::invalid_argument("loss_mask: dimension mismatch");
  double ss = 0.0;
  for (std::size_t i = 0; i < latent_full.size(); ++i) {
    const double d = latent_full.data[i] - latent_masked.data[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

double loss_cls_source(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.rows() != labels.size())
    throw std::invalid_argument("loss_cls_source: batch size mismatch");
  Tape tape;
  Tensor one_hot = Tensor::zeros(logits.shape);
  for (std::size_t i = 0; i < labels.size(); ++i)
    one_hot.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  return tape.value(tape.softmax_cross_entropy(tape.leaf(logits), one_hot))
      .data[0];
}

PseudoLabelSet spst_select(const std::vector<std::vector<double>>& probabilities,
                           double gamma) {
  const double threshold = std::exp(-gamma);
  PseudoLabelSet out;
  out.reserve(probabilities.size());
  for (const auto& p : probabilities) {
    double sum = 0.0;
    for (double v : p) sum += v;
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("spst_select: probabilities not normalized");
    PseudoLabel pl;
    const int best = argmax_class(p);
    if (p[static_cast<std::size_t>(best)] > threshold) {
      pl.selected = true;
      pl.label = best;
    }
    out.push_back(pl);
  }
  return out;
}

double loss_cls_target(
    const std::vector<std::vector<double>>& selected_probabilities,
    const std::vector<int>& pseudo_labels, double gamma,
    std::size_t total_count) {
  if (selected_probabilities.size() != pseudo_labels.size())
    throw std::invalid_argument("loss_cls_target: size mismatch");
  if (total_count == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pseudo_labels.size(); ++i) {
    const double p =
        selected_probabilities[i][static_cast<std::size_t>(pseudo_labels[i])];
    sum += std::log(p) + gamma;
  }
  return -sum / static_cast<double>(total_count);
}

double total_loss(double l_implicit, double l_mask, double l_cls_source,
                  double l_cls_target, const LossWeights& weights) {
  weights.validate();
  return l_implicit + weights.alpha * l_mask + weights.beta * l_cls_source +
         weights.mu * l_cls_target;
}

PointCloud prepare_input(const PointCloud& cloud, std::size_t n,
                         std::size_t neighbor_count, Rng& rng) {
  if (cloud.points.size() == n) return cloud;
  if (cloud.points.size() > n) return pad_duplicative(cloud, n, rng);
  if (cloud.points.size() > neighbor_count) {
    AffinityProfile profile = local_affinity(cloud, neighbor_count);
    return affinity_jitter(cloud, profile, n, rng);
  }
  return pad_duplicative(cloud, n, rng);  // too few points for affinities
}

std::vector<EpochMetrics> pretrain_implicits(
    ModelStack& stack, const std::vector<PointCloud>& source,
    const std::vector<PointCloud>& target, const TrainConfig& train,
    const PipelineConfig& pipeline, double alpha, std::uint64_t seed) {
  train.validate();
  if (source.empty() || target.empty())
    throw std::invalid_argument("pretrain_implicits: empty dataset");
  std::vector<const PointCloud*> all;
  for (const auto& c : source) all.push_back(&c);
  for (const auto& c : target) all.push_back(&c);
  std::vector<Parameter*> params = stack.parameters();
  std::vector<EpochMetrics> metrics;

  for (std::size_t epoch = 0; epoch < train.total_epochs; ++epoch) {
    const double lr = cosine_lr(epoch, train);
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(Rng::derive(seed, 11, epoch));
    shuffle_indices(order, shuffle_rng);

    EpochMetrics em;
    em.epoch = epoch;
    em.lr = lr;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += train.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + train.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const std::uint64_t slot_seed =
            Rng::derive(seed, 13, epoch, order[i]);
        CloudTerms t =
            process_cloud(stack, *all[order[i]], pipeline, alpha,
                          /*cls_weight=*/0.0, nullptr, 0.0, scale, slot_seed);
        em.loss_implicit += t.li;
        em.loss_mask += t.lm;
        ++seen;
      }
      adam_step(params, train, lr);
    }
    em.loss_implicit /= static_cast<double>(seen);
    em.loss_mask /= static_cast<double>(seen);
    metrics.push_back(em);
  }
  return metrics;
}

std::vector<EpochMetrics> adapt(ModelStack& stack,
                                const std::vector<PointCloud>& source,
                                const std::vector<PointCloud>& target,
                                const LossWeights& weights,
                                const TrainConfig& train,
                                const PipelineConfig& pipeline,
                                std::uint64_t seed,
                                const PseudoLabelSet* pseudo_labels,
                                double spst_gamma) {
  train.validate();
  weights.validate();
  if (source.empty() || target.empty())
    throw std::invalid_argument("adapt: empty dataset");
  for (const PointCloud& c : source)
    if (!c.label)
      throw std::invalid_argument("adapt: source cloud without label");
  if (pseudo_labels && pseudo_labels->size() != target.size())
    throw std::invalid_argument("adapt: pseudo label set size mismatch");

  std::vector<Parameter*> params = stack.parameters();
  std::vector<EpochMetrics> metrics;

  for (std::size_t epoch = 0; epoch < train.total_epochs; ++epoch) {
    const double lr = cosine_lr(epoch, train);
    std::vector<std::size_t> src_order(source.size());
    std::iota(src_order.begin(), src_order.end(), 0);
    Rng src_rng(Rng::derive(seed, 21, epoch));
    shuffle_indices(src_order, src_rng);
    std::vector<std::size_t> tgt_order(target.size());
    std::iota(tgt_order.begin(), tgt_order.end(), 0);
    Rng tgt_rng(Rng::derive(seed, 22, epoch));
    shuffle_indices(tgt_order, tgt_rng);

    EpochMetrics em;
    em.epoch = epoch;
    em.lr = lr;
    std::size_t clouds_seen = 0, src_seen = 0, steps = 0, tgt_cursor = 0;
    for (std::size_t start = 0; start < src_order.size();
         start += train.batch_size) {
      const std::size_t src_end =
          std::min(src_order.size(), start + train.batch_size);
      const std::size_t n_src = src_end - start;
      const std::size_t n_tgt = std::min(target.size(), train.batch_size);
      // Source pathway: implicit + masking + supervised classification.
      for (std::size_t i = start; i < src_end; ++i) {
        const std::size_t ci = src_order[i];
        const std::uint64_t slot_seed = Rng::derive(seed, 23, epoch, ci);
        const int label = *source[ci].label;
        CloudTerms t = process_cloud(stack, source[ci], pipeline,
                                     weights.alpha, weights.beta, &label, 0.0,
                                     1.0 / static_cast<double>(n_src),
                                     slot_seed);
        em.loss_implicit += t.li;
        em.loss_mask += t.lm;
        em.loss_cls_source += t.ce;
        ++clouds_seen;
        ++src_seen;
      }
      // Target pathway: implicit + masking (+ self-training when selected).
      double lt_batch = 0.0;
      for (std::size_t i = 0; i < n_tgt; ++i, ++tgt_cursor) {
        const std::size_t ci = tgt_order[tgt_cursor % tgt_order.size()];
        const std::uint64_t slot_seed = Rng::derive(seed, 24, epoch, ci);
        const int* label = nullptr;
        int pseudo = 0;
        double gamma_const = 0.0;
        if (pseudo_labels && (*pseudo_labels)[ci].selected) {
          pseudo = (*pseudo_labels)[ci].label;
          label = &pseudo;
          gamma_const = spst_gamma;
        }
        CloudTerms t = process_cloud(stack, target[ci], pipeline,
                                     weights.alpha, weights.mu, label,
                                     gamma_const,
                                     1.0 / static_cast<double>(n_tgt),
                                     slot_seed);
        em.loss_implicit += t.li;
        em.loss_mask += t.lm;
        if (t.has_ce) lt_batch += t.ce - gamma_const;
        ++clouds_seen;
      }
      em.loss_cls_target += lt_batch / static_cast<double>(n_tgt);
      adam_step(params, train, lr);
      ++steps;
    }
    em.loss_implicit /= static_cast<double>(clouds_seen);
    em.loss_mask /= static_cast<double>(clouds_seen);
    em.loss_cls_source /= static_cast<double>(src_seen);
    em.loss_cls_target /= static_cast<double>(steps);
    em.source_acc = evaluate(stack, source, pipeline, seed).accuracy;
    em.target_acc = evaluate(stack, target, pipeline, seed).accuracy;
    metrics.push_back(em);
  }
  return metrics;
}

SpstResult spst_rounds(ModelStack& stack, const std::vector<PointCloud>& source,
                       const std::vector<PointCloud>& target,
                       const LossWeights& weights, const SpstConfig& spst,
                       const TrainConfig& train, const PipelineConfig& pipeline,
                       std::uint64_t seed) {
  spst.validate();
  SpstResult result;
  for (std::size_t round = 0; round < spst.rounds; ++round) {
    auto probs =
        predict_probabilities(stack, target, pipeline, Rng::derive(seed, 31));
    double gamma = spst.gamma;
    if (!spst.target_fractions.empty()) {
      const double fraction = spst.target_fractions[std::min(
          round, spst.target_fractions.size() - 1)];
      gamma = gamma_for_fraction(probs, fraction);
    }
    PseudoLabelSet selection = spst_select(probs, gamma);
    const std::size_t selected = static_cast<std::size_t>(std::count_if(
        selection.begin(), selection.end(),
        [](const PseudoLabel& p) { return p.selected; }));
    const double fraction =
        static_cast<double>(selected) / static_cast<double>(target.size());
    result.selection.push_back({round, gamma, fraction});

    TrainConfig round_cfg = train;
    round_cfg.total_epochs = spst.epochs_per_round;
    const PseudoLabelSet* labels = selected > 0 ? &selection : nullptr;
    auto metrics = adapt(stack, source, target, weights, round_cfg, pipeline,
                         Rng::derive(seed, 32, round), labels, gamma);
    for (EpochMetrics& em : metrics) {
      em.epoch += round * spst.epochs_per_round;
      result.metrics.push_back(em);
    }
  }
  return result;
}

std::vector<EpochMetrics> train_source_only(
    ModelStack& stack, const std::vector<PointCloud>& source,
    const TrainConfig& train, const PipelineConfig& pipeline,
    std::uint64_t seed) {
  train.validate();
  if (source.empty())
    throw std::invalid_argument("train_source_only: empty dataset");
  std::vector<Parameter*> params = stack.parameters();
  std::vector<EpochMetrics> metrics;
  for (std::size_t epoch = 0; epoch < train.total_epochs; ++epoch) {
    const double lr = cosine_lr(epoch, train);
    std::vector<std::size_t> order(source.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(Rng::derive(seed, 41, epoch));
    shuffle_indices(order, shuffle_rng);
    EpochMetrics em;
    em.epoch = epoch;
    em.lr = lr;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += train.batch_size) {
      const std::size_t end = std::min(order.size(), start + train.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t ci = order[i];
        const std::uint64_t slot_seed = Rng::derive(seed, 42, epoch, ci);
        Rng rng_prep(Rng::derive(slot_seed, 1));
        PointCloud base = source[ci];
        if (pipeline.rotate_augment)
          base = rotate_z(base, rng_prep.uniform(0.0, 2.0 * kPi));
        PointCloud prepared =
            prepare_input(base, stack.config().input_points,
                          pipeline.neighbor_count, rng_prep);
        Tape tape;
        Tape::Var latent = stack.encode(tape, prepared);
        Tape::Var logits = stack.classify(tape, latent);
        Tape::Var ce = tape.softmax_cross_entropy(
            logits, one_hot_row(*source[ci].label, stack.config().num_classes));
        tape.backward(ce, scale);
        tape.accumulate_param_grads();
        em.loss_cls_source += tape.value(ce).data[0];
        ++seen;
      }
      adam_step(params, train, lr);
    }
    em.loss_cls_source /= static_cast<double>(seen);
    em.source_acc = evaluate(stack, source, pipeline, seed).accuracy;
    metrics.push_back(em);
  }
  return metrics;
}

std::vector<std::vector<double>> predict_probabilities(
    const ModelStack& stack, const std::vector<PointCloud>& clouds,
    const PipelineConfig& pipeline, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  out.reserve(clouds.size());
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    Rng rng(Rng::derive(seed, 51, i));
    PointCloud prepared = prepare_input(
        clouds[i], stack.config().input_points, pipeline.neighbor_count, rng);
    const Tensor latent = stack.encode_value(prepared);
    out.push_back(softmax_row(stack.classify_value(latent)));
  }
  return out;
}

EvalResult evaluate(const ModelStack& stack,
                    const std::vector<PointCloud>& clouds,
                    const PipelineConfig& pipeline, std::uint64_t seed) {
  const std::size_t classes = stack.config().num_classes;
  EvalResult result;
  result.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  const auto probs = predict_probabilities(stack, clouds, pipeline, seed);
  std::size_t correct = 0, labeled = 0;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    if (!clouds[i].label) continue;
    const int truth = *clouds[i].label;
    const int pred = argmax_class(probs[i]);
    result.confusion[static_cast<std::size_t>(truth)]
                    [static_cast<std::size_t>(pred)] += 1;
    if (pred == truth) ++correct;
    ++labeled;
  }
  result.accuracy =
      labeled == 0 ? 0.0
                   : static_cast<double>(correct) / static_cast<double>(labeled);
  return result;
}

void write_metrics_csv(const std::vector<EpochMetrics>& metrics,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_metrics_csv: cannot open '" + path + "'");
  out << "epoch,lr,L_I,L_M,L_cls_s,L_cls_t,source_acc,target_acc\n";
  char buf[320];
  for (const EpochMetrics& em : metrics) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", em.epoch,
                  em.lr, em.loss_implicit, em.loss_mask, em.loss_cls_source,
                  em.loss_cls_target, em.source_acc, em.target_acc);
    out << buf;
  }
}

void write_selection_csv(const std::vector<SelectionStats>& stats,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_selection_csv: cannot open '" + path + "'");
  out << "round,gamma,selected_fraction\n";
  char buf[128];
  for (const SelectionStats& s : stats) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", s.round, s.gamma,
                  s.selected_fraction);
    out << buf;
  }
}

}  // namespace giuda
