#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "giuda/config.hpp"
#include "giuda/datagen.hpp"
#include "giuda/field.hpp"
#include "giuda/model.hpp"
#include "giuda/training.hpp"

namespace fs = std::filesystem;
using namespace giuda;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
};

RunConfig resolve_config(const GlobalOpts& g) {
  RunConfig cfg =
      g.config_path.empty() ? RunConfig{} : RunConfig::load(g.config_path);
  if (g.seed_override) cfg.seed = *g.seed_override;
  if (g.out_override) cfg.out_dir = *g.out_override;
  if (const char* env = std::getenv("GIUDA_THREADS"))
    cfg.threads = std::max<std::size_t>(1, std::stoul(env));
  if (cfg.source_manifest.empty())
    cfg.source_manifest = (fs::path(cfg.data_root) / "source" / "manifest.csv").string();
  if (cfg.target_manifest.empty())
    cfg.target_manifest = (fs::path(cfg.data_root) / "target" / "manifest.csv").string();
  cfg.validate();
  return cfg;
}

void prepare_run_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  cfg.save((fs::path(cfg.out_dir) / "config.resolved").string());
}

std::vector<PointCloud> load_clouds(const std::string& manifest_path,
                                    std::size_t threads) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  if (threads <= 1) return load_dataset(manifest);
  // Deterministic parallel load: clouds land at their manifest index.
  std::vector<PointCloud> clouds(manifest.entries.size());
  std::vector<std::thread> pool;
  const std::size_t n = clouds.size();
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        PointCloud c = load_xyz(
            (fs::path(manifest.root) / manifest.entries[i].path).string());
        c.label = manifest.entries[i].label;
        clouds[i] = std::move(c);
      }
    });
  }
  for (auto& th : pool) th.join();
  return clouds;
}

ModelStack make_model(const RunConfig& cfg) {
  Rng init_rng(Rng::derive(cfg.seed, 7));
  return ModelStack(cfg.model_config(), init_rng);
}

DomainProfile source_profile(const RunConfig& cfg) {
  DomainProfile p;
  p.points_per_cloud = cfg.source_points;
  p.noise_sigma = cfg.source_noise;
  if (cfg.source_occlusion > 0.0) p.occlusion = OcclusionSpec{cfg.source_occlusion};
  return p;
}

DomainProfile target_profile(const RunConfig& cfg) {
  DomainProfile p;
  p.points_per_cloud = cfg.target_points;
  p.noise_sigma = cfg.target_noise;
  if (cfg.target_occlusion > 0.0) p.occlusion = OcclusionSpec{cfg.target_occlusion};
  return p;
}

int cmd_datagen(const GlobalOpts& g) {
  const RunConfig cfg = resolve_config(g);
  fs::create_directories(cfg.data_root);
  gen_dataset(cfg.num_classes, cfg.per_class_count, source_profile(cfg),
              target_profile(cfg), cfg.seed, cfg.data_root);
  std::cout << "wrote datasets under " << cfg.data_root << "\n";
  return 0;
}

int cmd_pretrain(const GlobalOpts& g) {
  const RunConfig cfg = resolve_config(g);
  prepare_run_dir(cfg);
  auto source = load_clouds(cfg.source_manifest, cfg.threads);
  auto target = load_clouds(cfg.target_manifest, cfg.threads);
  ModelStack stack = make_model(cfg);
  auto metrics = pretrain_implicits(stack, source, target, cfg.train,
                                    cfg.pipeline, cfg.weights.alpha, cfg.seed);
  stack.save_checkpoint((fs::path(cfg.out_dir) / "pretrain.ckpt").string());
  write_metrics_csv(metrics,
                    (fs::path(cfg.out_dir) / "pretrain_metrics.csv").string());
  std::printf("pretrain done: %zu epochs, final L_I %.6f, final L_M %.6f\n",
              metrics.size(), metrics.back().loss_implicit,
              metrics.back().loss_mask);
  return 0;
}

int cmd_adapt(const GlobalOpts& g, const std::string& init_ckpt) {
  const RunConfig cfg = resolve_config(g);
  prepare_run_dir(cfg);
  auto source = load_clouds(cfg.source_manifest, cfg.threads);
  auto target = load_clouds(cfg.target_manifest, cfg.threads);
  ModelStack stack = make_model(cfg);
  if (!init_ckpt.empty()) stack.load_checkpoint(init_ckpt);
  auto metrics = adapt(stack, source, target, cfg.weights, cfg.train,
                       cfg.pipeline, cfg.seed);
  stack.save_checkpoint((fs::path(cfg.out_dir) / "adapt.ckpt").string());
  write_metrics_csv(metrics,
                    (fs::path(cfg.out_dir) / "adapt_metrics.csv").string());
  std::printf("adapt done: source acc %.4f, target acc %.4f\n",
              metrics.back().source_acc, metrics.back().target_acc);
  return 0;
}

int cmd_spst(const GlobalOpts& g, const std::string& init_ckpt) {
  const RunConfig cfg = resolve_config(g);
  prepare_run_dir(cfg);
  auto source = load_clouds(cfg.source_manifest, cfg.threads);
  auto target = load_clouds(cfg.target_manifest, cfg.threads);
  ModelStack stack = make_model(cfg);
  stack.load_checkpoint(init_ckpt);
  SpstResult result = spst_rounds(stack, source, target, cfg.weights, cfg.spst,
                                  cfg.train, cfg.pipeline, cfg.seed);
  stack.save_checkpoint((fs::path(cfg.out_dir) / "spst.ckpt").string());
  write_metrics_csv(result.metrics,
                    (fs::path(cfg.out_dir) / "spst_metrics.csv").string());
  write_selection_csv(result.selection,
                      (fs::path(cfg.out_dir) / "selection.csv").string());
  std::printf("spst done: %zu rounds, final target acc %.4f\n",
              result.selection.size(),
              result.metrics.empty() ? 0.0 : result.metrics.back().target_acc);
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& checkpoint,
             const std::string& manifest_path) {
  const RunConfig cfg = resolve_config(g);
  auto clouds = load_clouds(manifest_path, cfg.threads);
  ModelStack stack = make_model(cfg);
  stack.load_checkpoint(checkpoint);
  const EvalResult r = evaluate(stack, clouds, cfg.pipeline, cfg.seed);
  std::printf("accuracy %.4f\n", r.accuracy);
  std::printf("confusion (rows = true class):\n");
  for (const auto& row : r.confusion) {
    for (std::size_t j = 0; j < row.size(); ++j)
      std::printf("%s%6zu", j ? " " : "", row[j]);
    std::printf("\n");
  }
  return 0;
}

int cmd_resample(const GlobalOpts& g, const std::string& checkpoint,
                 const std::string& cloud_path, const std::string& out_path,
                 std::size_t n_samples, double epsilon) {
  const RunConfig cfg = resolve_config(g);
  ModelStack stack = make_model(cfg);
  stack.load_checkpoint(checkpoint);
  PointCloud cloud = load_xyz(cloud_path);
  Rng prep_rng(Rng::derive(cfg.seed, 61));
  PointCloud prepared = prepare_input(cloud, cfg.input_points,
                                      cfg.pipeline.neighbor_count, prep_rng);
  const Tensor latent = stack.encode_value(prepared);
  FieldEvaluator evaluate_field =
      [&](const std::vector<Point3>& queries) {
        return stack.decode_value(queries, latent);
      };
  Rng rng(Rng::derive(cfg.seed, 62));
  PointCloud resampled = resample_from_implicit(
      evaluate_field, n_samples, epsilon, cfg.pipeline.cube_half_width, rng);
  if (resampled.points.empty()) {
    std::printf("resample kept 0 of %zu samples (epsilon %.6g too small)\n",
                n_samples, epsilon);
    return 0;
  }
  save_xyz(resampled, out_path);
  std::printf("kept %zu of %zu samples, chamfer to input %.8g\n",
              resampled.points.size(), n_samples, chamfer(resampled, cloud));
  return 0;
}

int cmd_field_dump(const GlobalOpts& g, const std::string& model_spec,
                   const std::string& cloud_path, const std::string& out_path,
                   std::size_t grid) {
  const RunConfig cfg = resolve_config(g);
  PointCloud cloud = load_xyz(cloud_path);
  const double hw = cfg.pipeline.cube_half_width;
  std::vector<Point3> queries;
  queries.reserve(grid * grid * grid);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j)
      for (std::size_t k = 0; k < grid; ++k) {
        auto coord = [&](std::size_t t) {
          return grid == 1 ? 0.0
                           : -hw + 2.0 * hw * static_cast<double>(t) /
                                       static_cast<double>(grid - 1);
        };
        queries.push_back({coord(i), coord(j), coord(k)});
      }
  std::vector<double> values;
  if (model_spec == "aud") {
    AffinityProfile profile =
        local_affinity(cloud, cfg.pipeline.neighbor_count);
    QuerySet qs;
    qs.points = queries;
    values = aud(cloud, profile, qs);
  } else {
    ModelStack stack = make_model(cfg);
    stack.load_checkpoint(model_spec);
    Rng prep_rng(Rng::derive(cfg.seed, 61));
    PointCloud prepared = prepare_input(cloud, cfg.input_points,
                                        cfg.pipeline.neighbor_count, prep_rng);
    const Tensor latent = stack.encode_value(prepared);
    values = stack.decode_value(queries, latent);
  }
  save_field_dump(queries, values, out_path);
  std::printf("wrote %zu field samples to %s\n", values.size(),
              out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry-aware implicit domain adaptation for point clouds"};
  app.require_subcommand(1);
  // let --config/--seed/--out be given after the subcommand as well
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Run configuration file");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "Seed override");
  std::string out_val;
  auto* out_opt = app.add_option("--out", out_val, "Output directory override");

  auto* sc_datagen = app.add_subcommand("datagen", "Generate the two-domain benchmark");
  auto* sc_pretrain = app.add_subcommand("pretrain", "Self-supervised implicit pretraining");
  auto* sc_adapt = app.add_subcommand("adapt", "Joint domain adaptation");
  std::string adapt_init;
  sc_adapt->add_option("--init", adapt_init, "Checkpoint to resume from");
  auto* sc_spst = app.add_subcommand("spst", "Self-paced self-training rounds");
  std::string spst_init;
  sc_spst->add_option("--init", spst_init, "Adapted checkpoint")->required();
  auto* sc_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  std::string eval_ckpt, eval_manifest;
  sc_eval->add_option("checkpoint", eval_ckpt)->required();
  sc_eval->add_option("manifest", eval_manifest)->required();
  auto* sc_resample = app.add_subcommand("resample", "Resample a cloud from its learned implicit");
  std::string rs_ckpt, rs_cloud, rs_out;
  std::size_t rs_n = 200000;
  double rs_eps = 0.03;
  sc_resample->add_option("checkpoint", rs_ckpt)->required();
  sc_resample->add_option("cloud", rs_cloud)->required();
  sc_resample->add_option("output", rs_out)->required();
  sc_resample->add_option("--n-samples", rs_n, "Uniform samples to draw");
  sc_resample->add_option("--epsilon", rs_eps, "Distance threshold");
  auto* sc_field = app.add_subcommand("field-dump", "Dump a distance field on a grid");
  std::string fd_model, fd_cloud, fd_out;
  std::size_t fd_grid = 16;
  sc_field->add_option("model", fd_model, "Checkpoint path or 'aud'")->required();
  sc_field->add_option("cloud", fd_cloud)->required();
  sc_field->add_option("output", fd_out)->required();
  sc_field->add_option("--grid", fd_grid, "Grid resolution per axis");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed_override = seed_val;
  if (*out_opt) g.out_override = out_val;

  try {
    if (sc_datagen->parsed()) return cmd_datagen(g);
    if (sc_pretrain->parsed()) return cmd_pretrain(g);
    if (sc_adapt->parsed()) return cmd_adapt(g, adapt_init);
    if (sc_spst->parsed()) return cmd_spst(g, spst_init);
    if (sc_eval->parsed()) return cmd_eval(g, eval_ckpt, eval_manifest);
    if (sc_resample->parsed())
      return cmd_resample(g, rs_ckpt, rs_cloud, rs_out, rs_n, rs_eps);
    if (sc_field->parsed())
      return cmd_field_dump(g, fd_model, fd_cloud, fd_out, fd_grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
