#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenegrasp/contact_eval.hpp"
#include "scenegrasp/floor_refine.hpp"
#include "scenegrasp/penetration.hpp"
#include "scenegrasp/scene_synth.hpp"

namespace scenegrasp {

struct PipelineConfig {
  RefineConfig refine;
  PenConfig penetration;
  AugmentConfig augment;
  WalkSearchConfig walk;
  PlacementConfig placement;
  double contact_threshold = kContactThreshold;
  std::string floor_label = "floor";
  int jobs = 1;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  /// Snapshot embedded in outputs: to_json() minus `jobs`, which never
  /// changes results.
  nlohmann::json snapshot() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
};

/// One row of a dataset manifest. Paths are resolved against the
/// manifest's directory.
struct SampleSpec {
  std::string id;
  std::filesystem::path scene;
  std::filesystem::path labels;
  std::string receptacle_label = "table";
  std::filesystem::path object;
  std::optional<RigidTransform> object_pose;  ///< eval: pose as given
  std::filesystem::path trajectory;
  std::vector<std::filesystem::path> body_frames;
  std::filesystem::path part_map;
  std::vector<std::filesystem::path> gt_contacts;  ///< empty or one per frame
  std::optional<std::filesystem::path> grid;       ///< precomputed filled grid

  nlohmann::json to_json(const std::filesystem::path& base) const;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<SampleSpec> samples;

  /// Accepts {"samples": [...]} or a bare array. Ids must be unique. Referenced
  /// files are opened per sample, so a missing one fails only its sample.
  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

nlohmann::json pose_to_json(const RigidTransform& t);
RigidTransform pose_from_json(const nlohmann::json& j);

struct RunSummary {
  std::size_t processed = 0;
  std::size_t skipped = 0;  ///< already complete from an earlier run
  std::size_t failed = 0;
  std::vector<std::string> failed_ids;
  int exit_code() const { return failed > 0 ? 1 : 0; }
};

/// refine-floor → align-walk → place-object → augment-pelvis → evaluate,
/// per sample. Each completed sample is committed by atomically writing
/// <out>/samples/<id>.json; samples already committed are skipped. Ends by
/// rewriting <out>/reports.jsonl, aggregate.csv and aggregate.txt from all
/// committed samples.
RunSummary run_pipeline(const DatasetManifest& dataset, const PipelineConfig& cfg,
                        const std::filesystem::path& out_dir);

/// Per-sample processing used by run_pipeline; returns the sample manifest.
nlohmann::json process_sample(const SampleSpec& spec, const PipelineConfig& cfg,
                              const std::filesystem::path& out_dir);

struct EvalSummary {
  std::vector<MetricsReport> reports;
  std::vector<std::pair<std::string, std::string>> failures;  ///< (id, reason)
  std::optional<AggregateRow> row;
  int exit_code() const { return failures.empty() ? 0 : 1; }
};

/// Scores each sample's body frames against its scene and posed object.
/// Writes <out>/reports.jsonl, aggregate.csv, aggregate.txt.
EvalSummary evaluate_dataset(const DatasetManifest& dataset, const PipelineConfig& cfg,
                             const std::filesystem::path& out_dir,
                             const std::string& method = "method");

}  // namespace scenegrasp
