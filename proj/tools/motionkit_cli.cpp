#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "json_config.hpp"
#include "motionkit/error.hpp"
#include "motionkit/filter.hpp"
#include "motionkit/interactmesh.hpp"
#include "motionkit/kinematics.hpp"
#include "motionkit/motionio.hpp"
#include "motionkit/pipeline.hpp"
#include "motionkit/retarget.hpp"
#include "motionkit/rewards.hpp"
#include "motionkit/schedule.hpp"
#include "motionkit/smoothing.hpp"
#include "motionkit/table.hpp"

namespace fs = std::filesystem;
using namespace motionkit;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  int verbose = 0;
  std::string format = "csv";
  bool json() const { return format == "json"; }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text_file(path, text);
  }
}

void add_optimizer_options(CLI::App* sub, OptimizerConfig& cfg) {
  sub->add_option("--lr", cfg.learning_rate, "Adam step size")->check(CLI::PositiveNumber)->group("Optimizer");
  sub->add_option("--iters", cfg.max_iterations, "Maximum iterations per solve")
      ->check(CLI::PositiveNumber)
      ->group("Optimizer");
  sub->add_option("--tol", cfg.tolerance, "Relative-improvement threshold for early stopping")
      ->check(CLI::NonNegativeNumber)
      ->group("Optimizer");
  sub->add_option("--patience", cfg.patience, "Iterations below --tol before stopping")
      ->check(CLI::PositiveNumber)
      ->group("Optimizer");
}

struct MeshFlags {
  std::string retention = "pattern";
  double proximity_gate = 0.5;
  std::size_t subsample = 64;
  std::string mesh_rebuild = "per-frame";

  void add(CLI::App* sub) {
    sub->add_option("--retention", retention, "Tetrahedron retention rule")
        ->check(CLI::IsMember({"pattern", "loose"}))
        ->group("Interact mesh");
    sub->add_option("--proximity-gate", proximity_gate, "Joints farther than this from the object are left out (m); 0 disables")
        ->check(CLI::NonNegativeNumber)
        ->group("Interact mesh");
    sub->add_option("--subsample", subsample, "Maximum object vertices kept by farthest-point sampling")
        ->check(CLI::PositiveNumber)
        ->group("Interact mesh");
    sub->add_option("--mesh-rebuild", mesh_rebuild, "Rebuild the mesh every frame or keep frame 0's topology")
        ->check(CLI::IsMember({"per-frame", "first-frame"}))
        ->group("Interact mesh");
  }

  void apply(RetargetConfig& cfg) const {
    cfg.mesh.rule = retention == "loose" ? RetentionRule::Loose : RetentionRule::Pattern;
    if (proximity_gate > 0.0) {
      cfg.mesh.proximity_gate = proximity_gate;
    } else {
      cfg.mesh.proximity_gate.reset();
    }
    cfg.mesh.max_object_vertices = subsample;
    cfg.mesh_rebuild = mesh_rebuild == "first-frame" ? MeshRebuild::FirstFrame : MeshRebuild::PerFrame;
  }
};

// ---------------------------------------------------------------- fit-shape

struct FitShapeCommand {
  std::string skeleton;
  std::string target;
  std::string shape_out;
  std::string output;
  OptimizerConfig optimizer;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "fit-shape", "Fit bone scales so a skeleton's T-pose matches another's.\nCSV columns: joint,name,scale,error");
    sub->add_option("--skel", skeleton, "Skeleton JSON whose bone scales are fitted")->required();
    sub->add_option("--target-skel", target, "Skeleton JSON providing the T-pose joint positions")->required();
    sub->add_option("--shape-out", shape_out, "Also write the fitted scales as JSON here");
    sub->add_option("-o,--output", output, "Write the table here instead of standard output");
    add_optimizer_options(sub, optimizer);
    sub->callback([&run, this, &g] { run = [this, &g] { return execute(g); }; });
  }

  int execute(const GlobalOptions& g) const {
    const Skeleton skel = load_skeleton(skeleton);
    const Skeleton tgt = load_skeleton(target);
    if (skel.size() != tgt.size()) {
      throw ValidationError("--skel has " + std::to_string(skel.size()) + " joints, --target-skel has " +
                            std::to_string(tgt.size()));
    }
    const JointPositions goal = fk(tgt, ShapeParams::ones(tgt.size()), Pose::tpose(tgt));
    const ShapeFitResult fit = fit_shape(skel, goal, optimizer);
    const JointPositions fitted = fk(skel, fit.shape, Pose::tpose(skel));
    spdlog::info("fit-shape: residual {} m after {} iterations", fit.residual, fit.iterations);

    Table table({"joint", "name", "scale", "error"});
    for (std::size_t j = 0; j < skel.size(); ++j) {
      table.add_row({static_cast<std::int64_t>(j), skel.joints[j].name, fit.shape.bone_scales[j],
                     (fitted[j] - goal[j]).norm()});
    }
    if (!shape_out.empty()) {
      nlohmann::ordered_json j;
      j["bone_scales"] = fit.shape.bone_scales;
      j["residual"] = fit.residual;
      j["iterations"] = fit.iterations;
      j["converged"] = fit.converged;
      write_text_file(shape_out, j.dump(2) + "\n");
    }
    emit(table.render(g.json()), output);
    return 0;
  }
};

// ----------------------------------------------------------------- retarget

struct RetargetCommand {
  std::string source;
  std::string second;
  std::string source_skeleton;
  std::string target_skeleton;
  std::string object;
  std::string output = ".";
  std::string temporal = "source-relative";
  RetargetConfig cfg;
  MeshFlags mesh;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "retarget",
        "Retarget a motion (and an optional partner) onto the target skeleton.\n"
        "Writes <output>/<motion file> and <output>/<motion stem>.losses.csv\n"
        "(columns: frame,total,laplacian,temporal,jlimit,vlimit,slide).");
    sub->add_option("--src", source, "Source motion JSON")->required();
    sub->add_option("--src2", second, "Second agent's source motion JSON (same skeleton, same length)");
    sub->add_option("--src-skel", source_skeleton, "Skeleton JSON the source motion was recorded on")->required();
    sub->add_option("--tgt-skel", target_skeleton, "Target skeleton JSON")->required();
    sub->add_option("--obj", object, "Object mesh (OBJ)")->required();
    sub->add_option("-o,--output", output, "Output directory");
    sub->add_option("--w-laplacian", cfg.weights.laplacian, "Weight of the Laplacian term")
        ->check(CLI::NonNegativeNumber)
        ->group("Objective");
    sub->add_option("--w-temporal", cfg.weights.temporal, "Weight of the temporal term")
        ->check(CLI::NonNegativeNumber)
        ->group("Objective");
    sub->add_option("--w-joint-limit", cfg.weights.joint_limit, "Weight of the joint-limit hinge")
        ->check(CLI::NonNegativeNumber)
        ->group("Objective");
    sub->add_option("--w-velocity-limit", cfg.weights.velocity_limit, "Weight of the velocity-limit hinge")
        ->check(CLI::NonNegativeNumber)
        ->group("Objective");
    sub->add_option("--w-foot-slide", cfg.weights.foot_slide, "Weight of the foot-slide term")
        ->check(CLI::NonNegativeNumber)
        ->group("Objective");
    sub->add_option("--foot-speed", cfg.foot_speed_threshold, "Source foot speed below which a foot is planted (m/s)")
        ->check(CLI::PositiveNumber)
        ->group("Objective");
    sub->add_option("--temporal", temporal,
                    "Temporal term: change relative to the source's own change, or raw change")
        ->check(CLI::IsMember({"source-relative", "literal"}))
        ->group("Objective");
    mesh.add(sub);
    add_optimizer_options(sub, cfg.optimizer);
    sub->callback([&run, this] { run = [this] { return execute(); }; });
    (void)g;
  }

  int execute() {
    cfg.temporal = temporal == "literal" ? TemporalMode::Literal : TemporalMode::SourceRelative;
    mesh.apply(cfg);
    PipelineEntry entry;
    entry.id = fs::path(source).stem().string();
    entry.motion = source;
    if (!second.empty()) entry.second_motion = second;
    entry.source_skeleton = source_skeleton;
    entry.target_skeleton = target_skeleton;
    entry.object = object;
    const EntrySummary s = process_entry(entry, output, cfg, std::nullopt, OptimizerConfig{});
    spdlog::info("retarget: {} frames, {} iterations, total loss {}", s.frames, s.iterations, s.loss_sums.total);
    for (const auto& p : s.outputs) spdlog::info("wrote {}", p.string());
    return 0;
  }
};

// ------------------------------------------------------------------- smooth

struct SmoothCommand {
  std::string motion;
  std::string skeleton;
  std::string out_motion;
  std::string output;
  std::string rot_filter = "window";
  SmoothConfig cfg;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "smooth",
        "Sobolev-smooth the root trajectory and window-filter rotations.\n"
        "CSV columns: frame,before_x,before_y,before_z,after_x,after_y,after_z\n"
        "(absolute second difference of the root position centered on each frame).");
    sub->add_option("--motion", motion, "Motion JSON to smooth")->required();
    sub->add_option("--skel", skeleton, "Skeleton JSON the motion is bound to")->required();
    sub->add_option("--out-motion", out_motion, "Where to write the smoothed motion")->required();
    sub->add_option("-o,--output", output, "Write the energy table here instead of standard output");
    sub->add_option("--alpha", cfg.alpha, "Second-difference regularization weight")->check(CLI::NonNegativeNumber);
    sub->add_option("--window", cfg.window, "Rotation filter window (odd, frames)")->check(CLI::PositiveNumber);
    sub->add_option("--rot-filter", rot_filter, "Rotation filter")->check(CLI::IsMember({"window"}));
    sub->callback([&run, this, &g] { run = [this, &g] { return execute(g); }; });
  }

  int execute(const GlobalOptions& g) const {
    const Skeleton skel = load_skeleton(skeleton);
    const MotionSequence seq = load_motion(motion, skel);
    cfg.validate(seq.size());
    const MotionSequence out = smooth_motion(seq, cfg);
    save_motion(out, out_motion);

    const Trajectory before = root_trajectory(seq);
    const Trajectory after = root_trajectory(out);
    Table table({"frame", "before_x", "before_y", "before_z", "after_x", "after_y", "after_z"});
    for (Eigen::Index k = 1; k + 1 < before.rows(); ++k) {
      const Eigen::Vector3d b = (before.row(k - 1) - 2.0 * before.row(k) + before.row(k + 1)).cwiseAbs();
      const Eigen::Vector3d a = (after.row(k - 1) - 2.0 * after.row(k) + after.row(k + 1)).cwiseAbs();
      table.add_row({static_cast<std::int64_t>(k), b.x(), b.y(), b.z(), a.x(), a.y(), a.z()});
    }
    emit(table.render(g.json()), output);
    return 0;
  }
};

// -------------------------------------------------------------- reward-eval

struct RewardEvalCommand {
  std::string motion;
  std::string reference;
  std::string skeleton;
  std::string object;
  std::string output;
  std::string velocity = "angular";
  std::vector<double> omega = std::vector<double>(kDeltaComponents, 1.0);
  RewardConfig cfg;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "reward-eval",
        "Evaluate the composite tracking reward of a motion against a reference.\n"
        "CSV columns: frame,reward,imitation,contact,energy");
    sub->add_option("--motion", motion, "Motion JSON being scored")->required();
    sub->add_option("--reference", reference, "Reference motion JSON (labels in it are the reference contacts)")
        ->required();
    sub->add_option("--skel", skeleton, "Skeleton JSON both motions are bound to")->required();
    sub->add_option("--obj", object, "Object mesh (OBJ)")->required();
    sub->add_option("-o,--output", output, "Write the table here instead of standard output");
    sub->add_option("--lambda-delta", cfg.lambda_delta, "Imitation exponent scale")->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda-c", cfg.lambda_c, "Contact exponent scale")->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda-v", cfg.lambda_v, "Velocity exponent scale")->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda-f", cfg.lambda_f, "Force exponent scale")->check(CLI::NonNegativeNumber);
    sub->add_option("--omega", omega,
                    "Weights of the ten deviation components: joint_pos joint_rot joint_lin_vel joint_ang_vel "
                    "contact obj_pos obj_rot obj_lin_vel obj_ang_vel interaction_graph")
        ->expected(static_cast<int>(kDeltaComponents))
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--contact-near", cfg.zones.near, "Upper bound of the contact zone (m)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--contact-far", cfg.zones.far, "Upper bound of the buffer zone (m)")->check(CLI::PositiveNumber);
    sub->add_option("--velocity", velocity, "Speeds penalized by the energy factor")
        ->check(CLI::IsMember({"angular", "linear", "both"}));
    sub->callback([&run, this, &g] { run = [this, &g] { return execute(g); }; });
  }

  int execute(const GlobalOptions& g) {
    std::copy(omega.begin(), omega.end(), cfg.omega.begin());
    cfg.velocity = velocity == "linear" ? VelocityTerm::Linear
                   : velocity == "both" ? VelocityTerm::Both
                                        : VelocityTerm::Angular;
    cfg.validate();
    const Skeleton skel = load_skeleton(skeleton);
    const MotionSequence sim = load_motion(motion, skel);
    const MotionSequence ref = load_motion(reference, skel);
    const ObjectMesh mesh = load_obj(object);
    const auto frames = observe_sequence(skel, ShapeParams::ones(skel.size()), sim, ref, mesh, cfg.zones);

    Table table({"frame", "reward", "imitation", "contact", "energy"});
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const Reward r = compute_reward(frames[t].obs, frames[t].reference_contacts, {}, cfg);
      table.add_row({static_cast<std::int64_t>(t), r.value, r.factors.imitation, r.factors.contact, r.factors.energy});
    }
    emit(table.render(g.json()), output);
    return 0;
  }
};

// ------------------------------------------------------------- schedule-sim

struct ScheduleSimCommand {
  ScheduleConfig cfg;
  double goal = 1.0;
  std::string output;
  std::string transitions;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "schedule-sim",
        "Simulate the teacher/student distillation schedule on point-mass stubs.\n"
        "CSV columns: round,gate,w,teacher_fraction,reward_mode,action_loss,ppo_objective,blended\n"
        "(first line is a comment naming the random generator and seed).");
    sub->add_option("--epsilon", cfg.epsilon, "Annealing span (rounds)")->check(CLI::PositiveNumber);
    sub->add_option("--kappa", cfg.kappa, "Pure-teacher span (rounds)")->check(CLI::NonNegativeNumber);
    sub->add_option("--t-imit", cfg.t_imit, "Round at which the reward switches to trajectory mode")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--horizon", cfg.horizon, "Steps per round")->check(CLI::PositiveNumber);
    sub->add_option("--rounds", cfg.rounds, "Number of rounds")->check(CLI::NonNegativeNumber);
    sub->add_option("--goal", goal, "Target position of the point mass");
    sub->add_option("-o,--output", output, "Write the round table here instead of standard output");
    sub->add_option("--transitions", transitions, "Write every transition as JSON lines here");
    sub->callback([&run, this, &g] { run = [this, &g] { return execute(g); }; });
  }

  int execute(const GlobalOptions& g) {
    cfg.seed = g.seed;
    const ScheduleLog log = run_schedule(point_mass_stubs(goal), cfg);
    if (!transitions.empty()) write_text_file(transitions, log.transitions_jsonl());
    if (!g.json()) {
      emit(log.rounds_csv(), output);
      return 0;
    }
    nlohmann::ordered_json j;
    j["rng"] = log.rng_algorithm;
    j["seed"] = log.seed;
    j["rounds"] = nlohmann::ordered_json::array();
    for (const RoundLog& r : log.rounds) {
      j["rounds"].push_back({{"round", r.round},
                             {"gate", r.gate},
                             {"w", r.weight},
                             {"teacher_fraction", r.teacher_fraction},
                             {"reward_mode", to_string(r.mode)},
                             {"action_loss", r.action_loss},
                             {"ppo_objective", r.ppo_objective},
                             {"blended", r.blended}});
    }
    emit(j.dump(2) + "\n", output);
    return 0;
  }
};

// ------------------------------------------------------------------- filter

struct FilterCommand {
  std::string stats;
  std::string output;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "filter",
        "Drop clips whose mean episode length stays below the corpus mean.\n"
        "CSV columns: iteration,sigma,retained,removed (ids separated by ';').");
    sub->add_option("--stats", stats, "Clip statistics JSON: {\"clip_id\": [episode lengths], ...}")->required();
    sub->add_option("-o,--output", output, "Write the report here instead of standard output");
    sub->callback([&run, this, &g] { run = [this, &g] { return execute(g); }; });
  }

  static std::string join(const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ";") + id;
    return s;
  }

  int execute(const GlobalOptions& g) const {
    FilterState state = FilterState::from_clips(parse_clip_stats(read_text_file(stats)));
    if (g.json()) {
      emit(filter_report_json(filter_until_converged(state)), output);
      return 0;
    }
    Table table({"iteration", "sigma", "retained", "removed"});
    table.add_row({static_cast<std::int64_t>(state.iteration), state.sigma, join(state.retained_ids()),
                   join(state.removal_order)});
    const std::size_t limit = state.clips.size() + 1;
    for (std::size_t k = 0; k < limit && !state.converged; ++k) {
      state = filter_step(std::move(state));
      table.add_row({static_cast<std::int64_t>(state.iteration), state.sigma, join(state.retained_ids()),
                     join(state.removal_order)});
    }
    emit(table.to_csv(), output);
    return 0;
  }
};

// ----------------------------------------------------------------- pipeline

struct PipelineCommand {
  std::string manifest;
  int jobs = 1;
  bool validate_only = false;
  std::string output;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "pipeline",
        "Fit, retarget, smooth and filter every entry of a manifest.\n"
        "Writes outputs, summary.csv and summary.json under the manifest's output_dir.\n"
        "CSV columns: id,status,frames,fit_residual,laplacian,temporal,joint_limit,velocity_limit,\n"
        "foot_slide,total,iterations,empty_mesh_frames,energy_before,energy_after,filtered_out,error");
    sub->add_option("--manifest", manifest, "Pipeline manifest JSON")->required();
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--validate-only", validate_only, "Check every entry's inputs and stop");
    sub->add_option("-o,--output", output, "Write the summary here instead of standard output");
    sub->callback([&run, this, &g] { run = [this, &g] { return execute(g); }; });
  }

  int execute(const GlobalOptions& g) const {
    const PipelineManifest m = PipelineManifest::load(manifest);
    if (validate_only) {
      const auto checks = validate_manifest(m);
      Table table({"id", "status", "problems"});
      bool ok = true;
      for (const EntryCheck& c : checks) {
        std::string problems;
        for (const auto& p : c.problems) problems += (problems.empty() ? "" : "; ") + p;
        table.add_row({c.id, c.ok() ? "ok" : "invalid", problems});
        ok = ok && c.ok();
      }
      emit(table.render(g.json()), output);
      return ok ? 0 : 2;
    }
    const PipelineSummary summary = run_pipeline(m, jobs);
    emit(g.json() ? summary.to_json() : summary.to_csv(), output);
    if (!summary.entries.empty() && summary.failures() == summary.entries.size()) {
      spdlog::error("pipeline: every entry failed");
      return 2;
    }
    return 0;
  }
};

// ------------------------------------------------------------- mesh-inspect

struct MeshInspectCommand {
  std::string motion;
  std::string second;
  std::string skeleton;
  std::string object;
  std::size_t frame = 0;
  std::string output;
  MeshFlags mesh;

  void add(CLI::App& app, std::function<int()>& run, const GlobalOptions& g) {
    CLI::App* sub = app.add_subcommand(
        "mesh-inspect",
        "Dump one frame's interact mesh as JSON (points, tetrahedra, reference Laplacians).");
    sub->add_option("--motion", motion, "Motion JSON")->required();
    sub->add_option("--motion2", second, "Second agent's motion JSON");
    sub->add_option("--skel", skeleton, "Skeleton JSON both motions are bound to")->required();
    sub->add_option("--obj", object, "Object mesh (OBJ)")->required();
    sub->add_option("--frame", frame, "Frame index");
    sub->add_option("-o,--output", output, "Write the JSON here instead of standard output");
    mesh.add(sub);
    sub->callback([&run, this] { run = [this] { return execute(); }; });
    (void)g;
  }

  int execute() const {
    const Skeleton skel = load_skeleton(skeleton);
    const MotionSequence a = load_motion(motion, skel);
    std::optional<MotionSequence> b;
    if (!second.empty()) b = load_motion(second, skel);
    const ObjectMesh obj = load_obj(object);
    if (frame >= a.size()) {
      throw ValidationError("--frame " + std::to_string(frame) + " is out of range for " + std::to_string(a.size()) +
                            " frames");
    }
    RetargetConfig cfg;
    mesh.apply(cfg);
    RetargetProblem problem;
    problem.source_skeleton = &skel;
    problem.source_shape = ShapeParams::ones(skel.size());
    problem.target_skeleton = &skel;
    problem.target_shape = problem.source_shape;
    problem.source = &a;
    problem.second_source = b ? &*b : nullptr;
    problem.object = &obj;
    const SceneFrames scene = prepare_scene(problem, cfg);
    emit(scene.meshes[frame].to_json(), output);
    return 0;
  }
};

void configure_logging(int verbose) {
  auto logger = spdlog::stderr_color_mt("motionkit");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose >= 2 ? spdlog::level::debug : verbose == 1 ? spdlog::level::info : spdlog::level::warn);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion retargeting, smoothing and data-curation toolkit.", "motionkit"};
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file whose keys mirror flag names; a nested object per subcommand");
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1, 1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random stream");
  app.add_flag("--verbose", g.verbose, "More log output on standard error (repeat for debug)");
  app.add_option("--format", g.format, "Machine output format")->check(CLI::IsMember({"csv", "json"}));

  std::function<int()> run;
  FitShapeCommand fit_shape_cmd;
  RetargetCommand retarget_cmd;
  SmoothCommand smooth_cmd;
  RewardEvalCommand reward_cmd;
  ScheduleSimCommand schedule_cmd;
  FilterCommand filter_cmd;
  PipelineCommand pipeline_cmd;
  MeshInspectCommand mesh_cmd;
  fit_shape_cmd.add(app, run, g);
  retarget_cmd.add(app, run, g);
  smooth_cmd.add(app, run, g);
  reward_cmd.add(app, run, g);
  schedule_cmd.add(app, run, g);
  filter_cmd.add(app, run, g);
  pipeline_cmd.add(app, run, g);
  mesh_cmd.add(app, run, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  configure_logging(g.verbose);
  try {
    return run ? run() : 1;
  } catch (const NumericalError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
