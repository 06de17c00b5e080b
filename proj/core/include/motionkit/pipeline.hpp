#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <shared_mutex>
#include <utility>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motionkit/filter.hpp"
#include "motionkit/kinematics.hpp"
#include "motionkit/optimizer.hpp"
#include "motionkit/retarget.hpp"
#include "motionkit/smoothing.hpp"
#include "motionkit/table.hpp"

namespace motionkit {

// The body actually optimized when retargeting from `source` to `target`:
// source rest offsets (so fitted bone scales carry the proportions) with the
// target's names, limits and feet. Topologies must match.
Skeleton bridge_skeleton(const Skeleton& source, const Skeleton& target);

// Per-frame weighted objective terms: frame,total,laplacian,temporal,jlimit,vlimit,slide.
Table losses_table(const RetargetResult& result);

struct PipelineEntry {
  std::string id;
  std::filesystem::path motion;
  std::optional<std::filesystem::path> second_motion;
  std::filesystem::path source_skeleton;
  std::filesystem::path target_skeleton;
  std::filesystem::path object;
};

// Batch description. Relative paths are resolved against the manifest's
// directory when loaded from a file.
struct PipelineManifest {
  std::filesystem::path output_dir = "out";
  std::vector<PipelineEntry> entries;
  RetargetConfig retarget;
  SmoothConfig smooth;
  OptimizerConfig shape_fit;
  std::optional<std::filesystem::path> clip_stats;

  static PipelineManifest parse(const std::string& json_text, const std::filesystem::path& base_dir = {});
  static PipelineManifest load(const std::filesystem::path& path);
};

// Applies the keys of a JSON object ("w-laplacian", "iters", "temporal", ...)
// on top of `base`. Unknown keys raise ValidationError.
RetargetConfig parse_retarget_config(const std::string& json_text, RetargetConfig base = {});

struct EntryCheck {
  std::string id;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Loads and cross-checks every input without optimizing anything.
std::vector<EntryCheck> validate_manifest(const PipelineManifest& manifest);

struct EntrySummary {
  std::string id;
  bool ok = false;
  std::string error;
  std::size_t frames = 0;
  double fit_residual = 0.0;
  ObjectiveTerms loss_sums;  // summed over frames
  int iterations = 0;
  bool converged = false;
  std::size_t empty_mesh_frames = 0;
  Eigen::Vector3d energy_before = Eigen::Vector3d::Zero();  // root second differences
  Eigen::Vector3d energy_after = Eigen::Vector3d::Zero();
  bool filtered_out = false;
  std::vector<std::filesystem::path> outputs;
};

struct PipelineSummary {
  std::vector<EntrySummary> entries;  // manifest order
  std::optional<FilterState> filter;
  std::size_t failures() const;
  std::string to_csv() const;
  std::string to_json() const;
};

// Fitted bone scales per (source, target) skeleton pair, keyed by a hash of
// the two files' contents. Safe to share between threads.
class ShapeFitCache {
 public:
  ShapeFitResult get(const std::string& source_text, const Skeleton& source, const std::string& target_text,
                     const Skeleton& target, const OptimizerConfig& cfg);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, ShapeFitResult> fits_;
};

// Fits the source body to the target, retargets the entry's motion(s),
// optionally smooths them, and writes <motion filename> (plus the second
// agent's file) and <motion stem>.losses.csv under `output_dir`. Throws on
// failure.
EntrySummary process_entry(const PipelineEntry& entry, const std::filesystem::path& output_dir,
                           const RetargetConfig& retarget, const std::optional<SmoothConfig>& smooth,
                           const OptimizerConfig& shape_fit, ShapeFitCache* cache = nullptr);

// Runs shape fitting, retargeting and smoothing for every entry on up to
// `jobs` worker threads, then the clip filter when statistics are given.
// A failing entry is reported in the summary without stopping the others;
// outputs do not depend on `jobs`.
PipelineSummary run_pipeline(const PipelineManifest& manifest, int jobs = 1);

}  // namespace motionkit
