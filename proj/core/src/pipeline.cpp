#include "motionkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <utility>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "motionkit/error.hpp"
#include "motionkit/table.hpp"

namespace motionkit {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ShapeFitResult ShapeFitCache::get(const std::string& source_text, const Skeleton& source,
                                  const std::string& target_text, const Skeleton& target,
                                  const OptimizerConfig& cfg) {
  const auto key = std::make_pair(fnv1a(source_text), fnv1a(target_text));
  {
    std::shared_lock lock(mutex_);
    auto it = fits_.find(key);
    if (it != fits_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  auto it = fits_.find(key);
  if (it != fits_.end()) return it->second;
  const JointPositions goal = fk(target, ShapeParams::ones(target.size()), Pose::tpose(target));
  ShapeFitResult fit = fit_shape(source, goal, cfg);
  fits_.emplace(key, fit);
  return fit;
}

std::size_t ShapeFitCache::size() const {
  std::shared_lock lock(mutex_);
  return fits_.size();
}

EntrySummary process_entry(const PipelineEntry& entry, const fs::path& output_dir, const RetargetConfig& retarget,
                           const std::optional<SmoothConfig>& smooth, const OptimizerConfig& shape_fit,
                           ShapeFitCache* cache) {
  ShapeFitCache local;
  if (cache == nullptr) cache = &local;
  EntrySummary summary;
  summary.id = entry.id;

  const std::string source_text = read_text_file(entry.source_skeleton);
  const std::string target_text = read_text_file(entry.target_skeleton);
  const Skeleton source_skeleton = parse_skeleton(source_text);
  const Skeleton target_skeleton = parse_skeleton(target_text);
  const Skeleton bridge = bridge_skeleton(source_skeleton, target_skeleton);
  const MotionSequence source = load_motion(entry.motion, source_skeleton);
  std::optional<MotionSequence> second;
  if (entry.second_motion) second = load_motion(*entry.second_motion, source_skeleton);
  const ObjectMesh object = load_obj(entry.object);

  const ShapeFitResult fit = cache->get(source_text, source_skeleton, target_text, target_skeleton, shape_fit);
  summary.fit_residual = fit.residual;

  RetargetProblem problem;
  problem.source_skeleton = &source_skeleton;
  problem.source_shape = ShapeParams::ones(source_skeleton.size());
  problem.target_skeleton = &bridge;
  problem.target_shape = fit.shape;
  problem.source = &source;
  problem.second_source = second ? &*second : nullptr;
  problem.object = &object;
  const RetargetResult result = retarget_sequence(problem, retarget);

  summary.frames = result.sequence.size();
  summary.iterations = result.total_iterations;
  summary.converged = result.converged;
  summary.empty_mesh_frames = result.empty_mesh_frames;
  for (const ObjectiveTerms& l : result.per_frame_losses) {
    summary.loss_sums.laplacian += l.laplacian;
    summary.loss_sums.temporal += l.temporal;
    summary.loss_sums.joint_limit += l.joint_limit;
    summary.loss_sums.velocity_limit += l.velocity_limit;
    summary.loss_sums.foot_slide += l.foot_slide;
    summary.loss_sums.total += l.total;
  }

  const MotionSequence smoothed = smooth ? smooth_motion(result.sequence, *smooth) : result.sequence;
  summary.energy_before = second_difference_energy(root_trajectory(result.sequence));
  summary.energy_after = second_difference_energy(root_trajectory(smoothed));

  std::filesystem::create_directories(output_dir);
  const fs::path motion_out = output_dir / entry.motion.filename();
  save_motion(smoothed, motion_out);
  summary.outputs.push_back(motion_out);
  if (result.second_sequence) {
    const fs::path second_out = output_dir / entry.second_motion->filename();
    save_motion(smooth ? smooth_motion(*result.second_sequence, *smooth) : *result.second_sequence, second_out);
    summary.outputs.push_back(second_out);
  }
  const fs::path losses_out = output_dir / (entry.motion.stem().string() + ".losses.csv");
  write_text_file(losses_out, losses_table(result).to_csv());
  summary.outputs.push_back(losses_out);
  summary.ok = true;
  return summary;
}

Skeleton bridge_skeleton(const Skeleton& source, const Skeleton& target) {
  if (source.size() != target.size()) {
    throw ValidationError("source skeleton has " + std::to_string(source.size()) + " joints, target has " +
                          std::to_string(target.size()));
  }
  Skeleton bridge = source;
  for (std::size_t j = 0; j < source.size(); ++j) {
    if (source.joints[j].parent != target.joints[j].parent) {
      throw ValidationError("joint '" + target.joints[j].name + "' has a different parent in the source skeleton");
    }
    bridge.joints[j].name = target.joints[j].name;
    bridge.joints[j].q_min = target.joints[j].q_min;
    bridge.joints[j].q_max = target.joints[j].q_max;
    bridge.joints[j].v_min = target.joints[j].v_min;
    bridge.joints[j].v_max = target.joints[j].v_max;
  }
  bridge.foot_joints = target.foot_joints;
  return bridge;
}

Table losses_table(const RetargetResult& result) {
  Table table({"frame", "total", "laplacian", "temporal", "jlimit", "vlimit", "slide"});
  for (std::size_t t = 0; t < result.per_frame_losses.size(); ++t) {
    const ObjectiveTerms& l = result.per_frame_losses[t];
    table.add_row({static_cast<std::int64_t>(t), l.total, l.laplacian, l.temporal, l.joint_limit, l.velocity_limit,
                   l.foot_slide});
  }
  return table;
}

RetargetConfig parse_retarget_config(const std::string& json_text, RetargetConfig cfg) {
  const json j = parse_json(json_text, "retarget config");
  if (!j.is_object()) throw ValidationError("retarget config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "w-laplacian") cfg.weights.laplacian = get_as<double>(j, key);
    else if (key == "w-temporal") cfg.weights.temporal = get_as<double>(j, key);
    else if (key == "w-joint-limit") cfg.weights.joint_limit = get_as<double>(j, key);
    else if (key == "w-velocity-limit") cfg.weights.velocity_limit = get_as<double>(j, key);
    else if (key == "w-foot-slide") cfg.weights.foot_slide = get_as<double>(j, key);
    else if (key == "foot-speed") cfg.foot_speed_threshold = get_as<double>(j, key);
    else if (key == "lr") cfg.optimizer.learning_rate = get_as<double>(j, key);
    else if (key == "iters") cfg.optimizer.max_iterations = get_as<int>(j, key);
    else if (key == "tol") cfg.optimizer.tolerance = get_as<double>(j, key);
    else if (key == "patience") cfg.optimizer.patience = get_as<int>(j, key);
    else if (key == "subsample") cfg.mesh.max_object_vertices = get_as<std::size_t>(j, key);
    else if (key == "proximity-gate") {
      if (value.is_null() || (value.is_number() && value.get<double>() == 0.0)) cfg.mesh.proximity_gate.reset();
      else cfg.mesh.proximity_gate = get_as<double>(j, key);
    } else if (key == "temporal") {
      const auto s = get_as<std::string>(j, key);
      if (s == "source-relative") cfg.temporal = TemporalMode::SourceRelative;
      else if (s == "literal") cfg.temporal = TemporalMode::Literal;
      else throw ValidationError("temporal must be 'source-relative' or 'literal', got '" + s + "'");
    } else if (key == "retention") {
      const auto s = get_as<std::string>(j, key);
      if (s == "pattern") cfg.mesh.rule = RetentionRule::Pattern;
      else if (s == "loose") cfg.mesh.rule = RetentionRule::Loose;
      else throw ValidationError("retention must be 'pattern' or 'loose', got '" + s + "'");
    } else if (key == "mesh-rebuild") {
      const auto s = get_as<std::string>(j, key);
      if (s == "per-frame") cfg.mesh_rebuild = MeshRebuild::PerFrame;
      else if (s == "first-frame") cfg.mesh_rebuild = MeshRebuild::FirstFrame;
      else throw ValidationError("mesh-rebuild must be 'per-frame' or 'first-frame', got '" + s + "'");
    } else {
      throw ValidationError("unknown retarget config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PipelineManifest PipelineManifest::parse(const std::string& json_text, const fs::path& base_dir) {
  const json j = parse_json(json_text, "manifest");
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  PipelineManifest m;
  if (j.contains("output_dir")) m.output_dir = get_as<std::string>(j, "output_dir");
  m.output_dir = resolve(base_dir, m.output_dir);
  if (j.contains("clip_stats") && !j["clip_stats"].is_null()) {
    m.clip_stats = resolve(base_dir, get_as<std::string>(j, "clip_stats"));
  }
  if (j.contains("retarget")) m.retarget = parse_retarget_config(j["retarget"].dump());
  if (j.contains("smooth")) {
    const json& s = j["smooth"];
    if (s.contains("alpha")) m.smooth.alpha = get_as<double>(s, "alpha");
    if (s.contains("window")) m.smooth.window = get_as<int>(s, "window");
  }
  if (!j.contains("entries") || !j["entries"].is_array()) throw ValidationError("manifest needs an 'entries' array");
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < j["entries"].size(); ++i) {
    const json& e = j["entries"][i];
    const std::string where = "entries[" + std::to_string(i) + "]";
    for (const char* key : {"id", "motion", "source_skeleton", "target_skeleton", "object"}) {
      if (!e.contains(key) || !e[key].is_string()) throw ValidationError(where + " needs a string '" + key + "'");
    }
    PipelineEntry entry;
    entry.id = e["id"].get<std::string>();
    if (!seen.emplace(entry.id, i).second) throw ValidationError(where + " repeats id '" + entry.id + "'");
    entry.motion = resolve(base_dir, e["motion"].get<std::string>());
    entry.source_skeleton = resolve(base_dir, e["source_skeleton"].get<std::string>());
    entry.target_skeleton = resolve(base_dir, e["target_skeleton"].get<std::string>());
    entry.object = resolve(base_dir, e["object"].get<std::string>());
    if (e.contains("second_motion") && !e["second_motion"].is_null()) {
      entry.second_motion = resolve(base_dir, get_as<std::string>(e, "second_motion"));
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

PipelineManifest PipelineManifest::load(const fs::path& path) {
  return parse(read_text_file(path), path.parent_path());
}

std::vector<EntryCheck> validate_manifest(const PipelineManifest& manifest) {
  std::vector<EntryCheck> checks;
  for (const PipelineEntry& entry : manifest.entries) {
    EntryCheck check{entry.id, {}};
    auto attempt = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        check.problems.emplace_back(e.what());
      }
    };
    std::optional<Skeleton> source, target;
    attempt([&] { source = load_skeleton(entry.source_skeleton); });
    attempt([&] { target = load_skeleton(entry.target_skeleton); });
    if (source && target) attempt([&] { bridge_skeleton(*source, *target); });
    std::optional<MotionSequence> a, b;
    if (source) {
      attempt([&] { a = load_motion(entry.motion, *source); });
      if (entry.second_motion) attempt([&] { b = load_motion(*entry.second_motion, *source); });
    }
    if (a && b && a->size() != b->size()) {
      check.problems.push_back("motions have " + std::to_string(a->size()) + " and " + std::to_string(b->size()) +
                               " frames");
    }
    attempt([&] { load_obj(entry.object); });
    if (a) attempt([&] { manifest.smooth.validate(a->size()); });
    checks.push_back(std::move(check));
  }
  return checks;
}

std::size_t PipelineSummary::failures() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.ok; }));
}

std::string PipelineSummary::to_csv() const {
  Table table({"id", "status", "frames", "fit_residual", "laplacian", "temporal", "joint_limit", "velocity_limit",
               "foot_slide", "total", "iterations", "empty_mesh_frames", "energy_before", "energy_after",
               "filtered_out", "error"});
  for (const EntrySummary& e : entries) {
    table.add_row({e.id, e.ok ? "ok" : "failed", std::to_string(e.frames), format_number(e.fit_residual),
                   format_number(e.loss_sums.laplacian), format_number(e.loss_sums.temporal),
                   format_number(e.loss_sums.joint_limit), format_number(e.loss_sums.velocity_limit),
                   format_number(e.loss_sums.foot_slide), format_number(e.loss_sums.total),
                   std::to_string(e.iterations), std::to_string(e.empty_mesh_frames),
                   format_number(e.energy_before.sum()), format_number(e.energy_after.sum()),
                   e.filtered_out ? "1" : "0", e.error});
  }
  return table.to_csv();
}

std::string PipelineSummary::to_json() const {
  ordered_json j;
  j["entries"] = ordered_json::array();
  for (const EntrySummary& e : entries) {
    ordered_json r;
    r["id"] = e.id;
    r["status"] = e.ok ? "ok" : "failed";
    if (!e.ok) r["error"] = e.error;
    r["frames"] = e.frames;
    r["fit_residual"] = e.fit_residual;
    r["losses"] = {{"laplacian", e.loss_sums.laplacian},
                   {"temporal", e.loss_sums.temporal},
                   {"joint_limit", e.loss_sums.joint_limit},
                   {"velocity_limit", e.loss_sums.velocity_limit},
                   {"foot_slide", e.loss_sums.foot_slide},
                   {"total", e.loss_sums.total}};
    r["iterations"] = e.iterations;
    r["converged"] = e.converged;
    r["empty_mesh_frames"] = e.empty_mesh_frames;
    r["energy_before"] = {e.energy_before.x(), e.energy_before.y(), e.energy_before.z()};
    r["energy_after"] = {e.energy_after.x(), e.energy_after.y(), e.energy_after.z()};
    r["filtered_out"] = e.filtered_out;
    ordered_json outs = ordered_json::array();
    for (const auto& p : e.outputs) outs.push_back(p.filename().string());
    r["outputs"] = outs;
    j["entries"].push_back(r);
  }
  j["failures"] = failures();
  if (filter) j["filter"] = ordered_json::parse(filter_report_json(*filter));
  return j.dump(2) + "\n";
}

PipelineSummary run_pipeline(const PipelineManifest& manifest, int jobs) {
  if (jobs < 1) throw ValidationError("jobs must be >= 1, got " + std::to_string(jobs));
  manifest.retarget.validate();
  std::filesystem::create_directories(manifest.output_dir);

  PipelineSummary summary;
  summary.entries.resize(manifest.entries.size());
  ShapeFitCache cache;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.entries.size(); i = next++) {
      const PipelineEntry& entry = manifest.entries[i];
      try {
        summary.entries[i] = process_entry(entry, manifest.output_dir, manifest.retarget, manifest.smooth,
                                           manifest.shape_fit, &cache);
      } catch (const std::exception& e) {
        // anything escaping a worker thread would terminate the process
        spdlog::warn("entry '{}' failed: {}", entry.id, e.what());
        summary.entries[i].id = entry.id;
        summary.entries[i].ok = false;
        summary.entries[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), manifest.entries.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (manifest.clip_stats) {
    FilterState state = filter_until_converged(FilterState::from_clips(parse_clip_stats(read_text_file(*manifest.clip_stats))));
    const auto kept = state.retained_ids();
    for (EntrySummary& e : summary.entries) {
      const bool known = std::any_of(state.clips.begin(), state.clips.end(), [&](const Clip& c) { return c.id == e.id; });
      e.filtered_out = known && std::find(kept.begin(), kept.end(), e.id) == kept.end();
    }
    write_text_file(manifest.output_dir / "filter.json", filter_report_json(state));
    summary.filter = std::move(state);
  }

  write_text_file(manifest.output_dir / "summary.csv", summary.to_csv());
  write_text_file(manifest.output_dir / "summary.json", summary.to_json());
  return summary;
}

}  // namespace motionkit
