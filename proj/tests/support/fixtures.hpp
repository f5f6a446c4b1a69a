#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "nsm/nsm.hpp"

namespace nsm::fixtures {

inline std::vector<Point> random_points(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<Point> out(n);
  for (auto& p : out) p = {uniform_real(rng, lo, hi), uniform_real(rng, lo, hi), uniform_real(rng, lo, hi)};
  return out;
}

inline RigidTransform random_transform(Rng& rng, double max_translation = 10.0) {
  Eigen::Quaterniond q(uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, -1, 1));
  return RigidTransform::from_quaternion(q, {uniform_real(rng, -max_translation, max_translation),
                                             uniform_real(rng, -max_translation, max_translation),
                                             uniform_real(rng, -max_translation, max_translation)});
}

/// Gravity-aligned planted pose: random yaw plus a 3-D offset.
inline RigidTransform random_planted(Rng& rng) {
  return RigidTransform::from_yaw(uniform_real(rng, -std::numbers::pi, std::numbers::pi),
                                  {uniform_real(rng, -10.0, 10.0), uniform_real(rng, -10.0, 10.0), uniform_real(rng, -1.0, 1.0)});
}

/// Resampling, 3 cm noise, 90 degree occlusion, light canopy jitter.
inline Perturbation standard_perturbation() { return {0.85, 0.03, 90.0, 0.03}; }

inline SceneSpec forest_spec(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.trees = 18;
  s.bushes = 12;
  return s;
}

struct Scenario {
  LabeledScene scene;
  SegmentMap map;
  DerivedSource source;
};

inline Scenario make_scenario(const SceneSpec& spec, const RigidTransform& gt, const Perturbation& p, std::uint64_t source_seed,
                              const PipelineConfig& cfg = PipelineConfig{}) {
  Scenario s;
  s.scene = generate_scene(spec, cfg.threads);
  s.map = build_map(s.scene.cloud, cfg);
  s.source = derive_source(s.scene, gt, p, source_seed);
  return s;
}

/// Light resampling only; nearly identical observations.
inline Perturbation mild_perturbation() { return {0.97, 0.01, 20.0, 0.01}; }

/// Labelled k-NN pairs, one scenario per seed and perturbation.
inline TrainingSet training_pairs(const std::vector<std::uint64_t>& seeds, const PipelineConfig& cfg = PipelineConfig{},
                                  const std::vector<Perturbation>& perturbations = {standard_perturbation()}) {
  TrainingSet out(kPairFeatureSize);
  const auto params = PipelineParams::from(cfg);
  for (auto seed : seeds) {
    Rng rng = make_rng(seed, {0x7a11ULL});
    for (const auto& p : perturbations) {
      const Scenario s = make_scenario(forest_spec(seed), random_planted(rng), p, seed ^ 0x55ULL, cfg);
      const auto f = extract_features(s.source.cloud, params);
      const TrainingSet rows = make_training_pairs(f.described, s.map, s.source.gt, cfg.matching.k_neighbours);
      for (std::size_t i = 0; i < rows.rows(); ++i) out.add(rows.row(i), rows.labels[i] != 0);
    }
  }
  return out;
}

/// Small forest shared by unit tests; trained once per process. Mild scenes are
/// mixed in because a forest fit only to heavy perturbation rejects exact copies.
inline const ForestModel& small_model() {
  static const ForestModel model = [] {
    RfParams p;
    p.n_trees = 60;
    p.seed = 3;
    return rf_train(training_pairs({9001, 9002, 9003, 9004, 9005, 9006}, PipelineConfig{}, {standard_perturbation(), mild_perturbation()}), p);
  }();
  return model;
}

/// Fresh scratch directory, unique per process and name.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("nsm_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace nsm::fixtures
