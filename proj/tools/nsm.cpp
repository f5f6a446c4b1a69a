// nsm: command-line front end for the segment-matching localization pipeline.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nsm/nsm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitPipeline = 4;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> log_level;
  std::vector<std::string> overrides;  ///< key=value
};

nsm::PipelineConfig resolve_config(const GlobalOptions& g) {
  nsm::PipelineConfig cfg;
  cfg.log_level = "info";
  if (!g.config_path.empty()) cfg.merge_file(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw nsm::ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1), nsm::Provenance::flag);
  }
  if (g.seed) cfg.set("run.seed", std::to_string(*g.seed), nsm::Provenance::flag);
  if (g.threads) cfg.set("run.threads", std::to_string(*g.threads), nsm::Provenance::flag);
  if (g.log_level) cfg.set("run.log_level", *g.log_level, nsm::Provenance::flag);
  cfg.validate();
  cfg.rf.seed = cfg.seed;
  cfg.rf.threads = cfg.threads;
  nsm::Log::set_level(nsm::parse_log_level(cfg.log_level));
  nsm::log_info("resolved config " + cfg.to_json_with_provenance().dump());
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw nsm::IoError("cannot open file for writing: " + path.string());
  out << text;
  if (!out) throw nsm::IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw nsm::IoError("file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw nsm::IoError("cannot open file for reading: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw nsm::ParseError(path.string() + ": " + e.what());
  }
}

nsm::PointCloud load_input_cloud(const fs::path& path) {
  auto loaded = nsm::load_cloud(path);
  if (loaded.dropped > 0) {
    nsm::log_warn(path.string() + ": dropped " + std::to_string(loaded.dropped) + " non-finite points");
  }
  return std::move(loaded.cloud);
}

/// Map with the fingerprint check; a model trained under other settings is also refused.
nsm::SegmentMap load_checked_map(const fs::path& path, const nsm::PipelineConfig& cfg) {
  return nsm::load_map(path, cfg.fingerprint());
}

nsm::ForestModel load_checked_model(const fs::path& path, const nsm::SegmentMap& map) {
  nsm::ForestModel model = nsm::rf_load(path);
  if (!model.fingerprint.empty() && model.fingerprint != map.fingerprint) {
    throw nsm::FingerprintMismatch("model " + path.string() + " was trained with fingerprint " + model.fingerprint +
                                   " but the map has " + map.fingerprint);
  }
  return model;
}

json key_pose_json(const nsm::KeyPose& k) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) r.push_back({k.orientation(i, 0), k.orientation(i, 1), k.orientation(i, 2)});
  return {{"position", {k.position.x(), k.position.y(), k.position.z()}}, {"orientation", r}, {"isotropic", k.isotropic}};
}

// ----------------------------------------------------------------------------
// Subcommands
// ----------------------------------------------------------------------------

struct GenSceneArgs {
  std::string spec, out, labels, source_out, gt_out;
};

int run_gen_scene(const GenSceneArgs& a, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  const json doc = read_json(a.spec);
  nsm::SceneSpec spec = nsm::scene_spec_from_json(doc);
  if (g.seed) spec.seed = *g.seed;
  const nsm::LabeledScene scene = nsm::generate_scene(spec, cfg.threads);
  nsm::PointCloud cloud = scene.cloud;
  cloud.frame_id = fs::path(a.out).stem().string();
  nsm::save_cloud(cloud, a.out);
  if (!a.labels.empty()) write_text(a.labels, nsm::labels_to_json(scene).dump() + "\n");
  std::cout << "scene: " << scene.cloud.size() << " points, " << scene.objects.size() << " objects -> " << a.out << "\n";

  if (!a.source_out.empty()) {
    const nsm::SourceSpec src = nsm::source_spec_from_json(doc.value("source", json::object()), spec.seed + 1);
    const nsm::DerivedSource derived = nsm::derive_source(scene, src.gt, src.perturbation, src.seed);
    nsm::PointCloud out = derived.cloud;
    out.frame_id = fs::path(a.source_out).stem().string();
    nsm::save_cloud(out, a.source_out);
    if (!a.gt_out.empty()) nsm::save_trajectory({{out.frame_id, derived.gt}}, a.gt_out);
    std::cout << "source: " << out.size() << " points -> " << a.source_out << "\n";
  } else if (!a.gt_out.empty()) {
    throw nsm::ValidationError("--gt requires --source-out");
  }
  return kExitOk;
}

int run_filter_ground(const std::string& in, const std::string& out, const std::string& ground_out, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  const nsm::PointCloud cloud = load_input_cloud(in);
  const nsm::GroundLabeling labels = nsm::filter_ground(cloud, cfg.pmf);
  nsm::save_cloud(labels.non_ground, out);
  if (!ground_out.empty()) nsm::save_cloud(labels.ground, ground_out);
  std::cout << "ground " << labels.ground.size() << ", non-ground " << labels.non_ground.size() << "\n";
  return kExitOk;
}

int run_segment(const std::string& in, const std::string& out_dir, bool remove_ground, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  nsm::PointCloud cloud = load_input_cloud(in);
  if (remove_ground) cloud = nsm::filter_ground(cloud, cfg.pmf).non_ground;
  const auto segments = nsm::euclidean_cluster(cloud, cfg.segmentation);
  fs::create_directories(out_dir);
  json index = json::array();
  for (const auto& s : segments) {
    const std::string name = "segment_" + std::to_string(s.id) + ".ply";
    nsm::PointCloud pts = s.points;
    pts.frame_id = cloud.frame_id;
    nsm::save_cloud(pts, fs::path(out_dir) / name);
    index.push_back({{"id", s.id}, {"file", name}, {"points", s.size()}});
  }
  write_text(fs::path(out_dir) / "index.json",
             json{{"frame_id", cloud.frame_id}, {"fingerprint", cfg.fingerprint()}, {"segments", index}}.dump(2) + "\n");
  std::cout << segments.size() << " segments -> " << out_dir << "\n";
  return kExitOk;
}

/// Segments written by `segment`, in index order.
nsm::FeatureExtraction load_segment_dir(const std::string& dir, const nsm::PipelineConfig& cfg, std::string& frame_id) {
  const json index = read_json(fs::path(dir) / "index.json");
  nsm::FeatureExtraction f;
  try {
    frame_id = index.value("frame_id", std::string());
    for (const auto& e : index.at("segments")) {
      nsm::Segment s;
      s.id = e.at("id").get<std::uint32_t>();
      s.points = load_input_cloud(fs::path(dir) / e.at("file").get<std::string>());
      f.segments.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw nsm::ParseError(dir + "/index.json: " + e.what());
  }
  f.described = nsm::describe_segments(f.segments, cfg.gestalt, cfg.threads);
  return f;
}

int run_describe(const std::string& segments_dir, const std::string& out, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  std::string frame_id;
  const auto features = load_segment_dir(segments_dir, cfg, frame_id);
  if (fs::path(out).extension() == ".nsm") {
    nsm::save_map(nsm::make_map(features, frame_id, cfg), out);
  } else {
    json arr = json::array();
    for (const auto& d : features.described) {
      arr.push_back({{"id", d.id}, {"key_pose", key_pose_json(d.key_pose)}, {"descriptor", d.descriptor.values}});
    }
    write_text(out, json{{"fingerprint", cfg.fingerprint()}, {"segments", arr}}.dump() + "\n");
  }
  std::cout << features.described.size() << " descriptors -> " << out << "\n";
  return kExitOk;
}

int run_build_map(const std::string& in, const std::string& out, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  const nsm::PointCloud cloud = load_input_cloud(in);
  const nsm::SegmentMap map = nsm::build_map(cloud, cfg);
  nsm::save_map(map, out);
  std::cout << "map: " << map.size() << " segments, fingerprint " << map.fingerprint << " -> " << out << "\n";
  return kExitOk;
}

/// Labelled pair rows from a map, a source cloud and its ground-truth pose.
nsm::TrainingSet pairs_from_scenario(const std::string& map_path, const std::string& source, const std::string& gt_path,
                                     const nsm::PipelineConfig& cfg) {
  const nsm::SegmentMap map = load_checked_map(map_path, cfg);
  const nsm::PointCloud cloud = load_input_cloud(source);
  const auto traj = nsm::load_trajectory(gt_path);
  if (traj.empty()) throw nsm::ValidationError(gt_path + ": no poses");
  const auto it = std::find_if(traj.begin(), traj.end(), [&](const auto& e) { return e.frame_id == cloud.frame_id; });
  const nsm::RigidTransform gt = it != traj.end() ? it->pose : traj.front().pose;
  const auto features = nsm::extract_features(cloud, nsm::PipelineParams::from(cfg));
  return nsm::make_training_pairs(features.described, map, gt, cfg.matching.k_neighbours);
}

int run_label_pairs(const std::string& map, const std::string& source, const std::string& gt, const std::string& out,
                    const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  const auto set = pairs_from_scenario(map, source, gt, cfg);
  nsm::write_pairs_csv(set, out);
  std::cout << set.rows() << " pairs (" << set.positives() << " positive) -> " << out << "\n";
  return kExitOk;
}

int run_train_rf(const std::vector<std::string>& pair_files, const std::string& map, const std::string& source,
                 const std::string& gt, const std::string& out, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  nsm::TrainingSet data(nsm::kPairFeatureSize);
  auto append = [&](const nsm::TrainingSet& more) {
    if (more.width != data.width) {
      throw nsm::ValidationError("training rows have width " + std::to_string(more.width) + ", expected " +
                                 std::to_string(data.width));
    }
    for (std::size_t i = 0; i < more.rows(); ++i) data.add(more.row(i), more.labels[i] != 0);
  };
  for (const auto& f : pair_files) append(nsm::read_pairs_csv(f));
  if (!map.empty() || !source.empty() || !gt.empty()) {
    if (map.empty() || source.empty() || gt.empty()) throw nsm::ValidationError("--map, --source and --gt go together");
    append(pairs_from_scenario(map, source, gt, cfg));
  }
  if (data.rows() == 0) throw nsm::ValidationError("train-rf: no training rows (give --pairs or --map/--source/--gt)");
  nsm::TrainStats stats;
  nsm::ForestModel model = nsm::rf_train(data, cfg.rf, &stats);
  model.fingerprint = cfg.fingerprint();
  nsm::rf_save(model, out);
  std::cout << "forest: " << model.trees.size() << " trees on " << stats.rows_used << " rows (" << stats.positives
            << " positive), OOB accuracy " << stats.oob_accuracy << " -> " << out << "\n";
  return kExitOk;
}

int run_match(const std::string& map_path, const std::string& source, const std::string& model_path, const std::string& out,
              const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  const nsm::SegmentMap map = load_checked_map(map_path, cfg);
  const nsm::ForestModel model = load_checked_model(model_path, map);
  // A segment directory or a raw cloud.
  std::string frame_id;
  const auto features = fs::is_directory(source) ? load_segment_dir(source, cfg, frame_id)
                                                 : nsm::extract_features(load_input_cloud(source), nsm::PipelineParams::from(cfg));
  const auto candidates = features.described.empty()
                              ? std::vector<nsm::MatchCandidate>{}
                              : nsm::match_segments(features.described, map, model, nsm::PipelineParams::from(cfg).matching);
  const std::size_t accepted =
      static_cast<std::size_t>(std::count_if(candidates.begin(), candidates.end(), [](const auto& c) { return c.accepted; }));
  if (fs::path(out).extension() == ".json") {
    json arr = json::array();
    for (const auto& c : candidates) {
      arr.push_back({{"source_id", c.source_segment_id},
                     {"target_id", c.target_segment_id},
                     {"l2_distance", c.l2_distance},
                     {"rf_score", c.rf_score},
                     {"accepted", c.accepted}});
    }
    write_text(out, json{{"threshold", cfg.matching.rf_threshold}, {"k", cfg.matching.k_neighbours}, {"candidates", arr}}.dump(2) + "\n");
  } else {
    std::string csv = "source_id,target_id,l2_distance,rf_score,accepted\n";
    for (const auto& c : candidates) {
      csv += std::to_string(c.source_segment_id) + ',' + std::to_string(c.target_segment_id) + ',' +
             nsm::detail::format_double(c.l2_distance) + ',' + nsm::detail::format_double(c.rf_score) + ',' +
             (c.accepted ? "1" : "0") + '\n';
    }
    write_text(out, csv);
  }
  std::cout << candidates.size() << " candidates, " << accepted << " accepted -> " << out << "\n";
  return kExitOk;
}

int run_localize(const std::string& map_path, const std::string& source, const std::string& model_path,
                 const std::string& out, const GlobalOptions& g) {
  const auto cfg = resolve_config(g);
  const nsm::SegmentMap map = load_checked_map(map_path, cfg);
  const nsm::ForestModel model = load_checked_model(model_path, map);
  const nsm::PointCloud cloud = load_input_cloud(source);
  const nsm::LocalizationResult r = nsm::localize(cloud, map, model, nsm::PipelineParams::from(cfg));
  json doc = nsm::to_json(r, cloud.frame_id);
  doc["map_fingerprint"] = map.fingerprint;
  doc["config"] = cfg.to_json();
  write_text(out, doc.dump(2) + "\n");
  std::cout << "status " << nsm::to_string(r.status) << ", " << r.inliers.size() << " inliers -> " << out << "\n";
  return kExitOk;
}

std::vector<nsm::ScoredPair> read_scores_csv(const fs::path& path) {
  if (!fs::exists(path)) throw nsm::IoError("file not found: " + path.string());
  std::ifstream in(path);
  std::vector<nsm::ScoredPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    double score = 0.0, label = 0.0;
    if (comma == std::string::npos || !nsm::detail::parse_double(std::string_view(line).substr(0, comma), score) ||
        !nsm::detail::parse_double(std::string_view(line).substr(comma + 1), label)) {
      if (line_no == 1) continue;  // header
      throw nsm::ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'score,label'");
    }
    out.push_back({score, label != 0.0});
  }
  return out;
}

int run_eval(const std::string& results_dir, const std::string& gt_path, const std::string& out, const std::string& roc_out,
             const std::string& scores, double target_fpr, const GlobalOptions& g) {
  resolve_config(g);
  if (!fs::is_directory(results_dir)) throw nsm::IoError("results directory not found: " + results_dir);
  const auto gt = nsm::load_trajectory(gt_path);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(results_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<nsm::FrameResult> results;
  for (const auto& f : files) {
    const json doc = read_json(f);
    const auto [status, transform] = nsm::result_from_json(doc);
    results.push_back({doc.value("frame_id", f.stem().string()), status, transform});
  }
  const nsm::RunReport report = nsm::run_report(results, gt);
  json doc = nsm::to_json(report);
  if (!scores.empty()) {
    const nsm::RocCurve curve = nsm::roc(read_scores_csv(scores), target_fpr);
    doc["roc"] = nsm::to_json(curve);
    if (!roc_out.empty()) write_text(roc_out, nsm::roc_to_csv(curve));
  } else if (!roc_out.empty()) {
    throw nsm::ValidationError("--roc needs --scores (score,label rows)");
  }
  write_text(out, doc.dump(2) + "\n");
  std::cout << report.localized << "/" << report.frames << " localized -> " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nsm: localize point clouds against a segment map"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  // Stage shorthands (e.g. segment --min-points) are recorded as flag overrides.
  auto shorthand = [&g](CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(flag, [&g, key](const std::string& v) { g.overrides.push_back(key + "=" + v); }, help);
  };
  app.add_option("--config", g.config_path, "TOML-like config file");
  app.add_option("--seed", g.seed, "seed for every randomized stage");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "debug|info|warn|error|off");
  app.add_option("--set", g.overrides, "override a config value, section.key=value (repeatable)");

  std::function<int()> action;

  GenSceneArgs gen;
  auto* c_gen = app.add_subcommand("gen-scene", "generate a labeled synthetic scene (and optionally a source view)");
  c_gen->add_option("--spec", gen.spec, "scene spec JSON")->required();
  c_gen->add_option("--out", gen.out, "scene cloud (.ply/.pcd/.xyz)")->required();
  c_gen->add_option("--labels", gen.labels, "per-point labels and object registry JSON");
  c_gen->add_option("--source-out", gen.source_out, "derived source cloud");
  c_gen->add_option("--gt", gen.gt_out, "ground-truth trajectory for the source cloud");
  c_gen->callback([&] { action = [&] { return run_gen_scene(gen, g); }; });

  std::string fg_in, fg_out, fg_ground;
  auto* c_fg = app.add_subcommand("filter-ground", "remove ground points");
  c_fg->add_option("--in", fg_in)->required();
  c_fg->add_option("--out", fg_out, "non-ground points")->required();
  c_fg->add_option("--ground-out", fg_ground, "ground points");
  c_fg->callback([&] { action = [&] { return run_filter_ground(fg_in, fg_out, fg_ground, g); }; });

  std::string seg_in, seg_out;
  bool seg_ground = false;
  auto* c_seg = app.add_subcommand("segment", "Euclidean clustering into segment files");
  c_seg->add_option("--in", seg_in)->required();
  c_seg->add_option("--out-dir", seg_out)->required();
  c_seg->add_flag("--filter-ground", seg_ground, "run the ground filter first");
  shorthand(c_seg, "--min-points", "segmentation.min_points", "smallest segment kept");
  shorthand(c_seg, "--max-points", "segmentation.max_points", "largest segment kept");
  shorthand(c_seg, "--max-dist", "segmentation.max_distance", "linkage distance, meters");
  c_seg->callback([&] { action = [&] { return run_segment(seg_in, seg_out, seg_ground, g); }; });

  std::string desc_in, desc_out;
  auto* c_desc = app.add_subcommand("describe", "key poses and descriptors for a segment directory");
  c_desc->add_option("--segments", desc_in, "directory written by 'segment'")->required();
  c_desc->add_option("--out", desc_out, ".nsm map container, or .json for a plain listing")->required();
  c_desc->callback([&] { action = [&] { return run_describe(desc_in, desc_out, g); }; });

  std::string bm_in, bm_out;
  auto* c_bm = app.add_subcommand("build-map", "filter-ground + segment + describe + persist");
  c_bm->add_option("--in", bm_in)->required();
  c_bm->add_option("--out", bm_out, ".nsm map")->required();
  c_bm->callback([&] { action = [&] { return run_build_map(bm_in, bm_out, g); }; });

  std::string lp_map, lp_source, lp_gt, lp_out;
  auto* c_lp = app.add_subcommand("label-pairs", "labelled k-NN pair rows for classifier training");
  c_lp->add_option("--map", lp_map)->required();
  c_lp->add_option("--source", lp_source)->required();
  c_lp->add_option("--gt", lp_gt, "trajectory holding the source pose")->required();
  c_lp->add_option("--out", lp_out, "pairs CSV")->required();
  c_lp->callback([&] { action = [&] { return run_label_pairs(lp_map, lp_source, lp_gt, lp_out, g); }; });

  std::vector<std::string> tr_pairs;
  std::string tr_map, tr_source, tr_gt, tr_out;
  auto* c_tr = app.add_subcommand("train-rf", "train the match classifier");
  c_tr->add_option("--pairs", tr_pairs, "pairs CSV (repeatable)");
  c_tr->add_option("--map", tr_map);
  c_tr->add_option("--source", tr_source);
  c_tr->add_option("--gt", tr_gt);
  c_tr->add_option("--out", tr_out, "model file")->required();
  shorthand(c_tr, "--trees", "rf.trees", "number of trees");
  shorthand(c_tr, "--depth", "rf.depth", "maximum tree depth");
  c_tr->callback([&] { action = [&] { return run_train_rf(tr_pairs, tr_map, tr_source, tr_gt, tr_out, g); }; });

  std::string m_map, m_source, m_model, m_out;
  auto* c_m = app.add_subcommand("match", "score k-NN candidates with the classifier");
  c_m->add_option("--map", m_map)->required();
  c_m->add_option("--source", m_source, "segment directory or cloud file")->required();
  c_m->add_option("--model", m_model)->required();
  c_m->add_option("--out", m_out, "candidates, .json or CSV")->required();
  shorthand(c_m, "--k", "matching.k_neighbours", "candidates per source segment");
  shorthand(c_m, "--threshold", "matching.rf_threshold", "classifier acceptance threshold");
  c_m->callback([&] { action = [&] { return run_match(m_map, m_source, m_model, m_out, g); }; });

  std::string l_map, l_source, l_model, l_out;
  auto* c_l = app.add_subcommand("localize", "estimate the source -> map transform");
  c_l->add_option("--map", l_map)->required();
  c_l->add_option("--source", l_source)->required();
  c_l->add_option("--model", l_model)->required();
  c_l->add_option("--out", l_out, "result JSON")->required();
  c_l->callback([&] { action = [&] { return run_localize(l_map, l_source, l_model, l_out, g); }; });

  std::string e_results, e_gt, e_out, e_roc, e_scores;
  double e_fpr = 0.1;
  auto* c_e = app.add_subcommand("eval", "pose error summary and ROC");
  c_e->add_option("--results", e_results, "directory of result JSON files")->required();
  c_e->add_option("--gt", e_gt, "ground-truth trajectory")->required();
  c_e->add_option("--out", e_out, "report JSON")->required();
  c_e->add_option("--roc", e_roc, "ROC curve CSV");
  c_e->add_option("--scores", e_scores, "score,label CSV for the ROC");
  c_e->add_option("--target-fpr", e_fpr, "operating point FPR")->check(CLI::Range(0.0, 1.0));
  c_e->callback([&] { action = [&] { return run_eval(e_results, e_gt, e_out, e_roc, e_scores, e_fpr, g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const nsm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const nsm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nsm::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
