#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "motionkit/interactmesh.hpp"
#include "motionkit/kinematics.hpp"
#include "motionkit/motionio.hpp"
#include "motionkit/optimizer.hpp"

namespace motionkit {

struct TermWeights {
  double laplacian = 1.0;
  double temporal = 1.0;
  double joint_limit = 1.0;
  double velocity_limit = 1.0;
  double foot_slide = 1.0;
};

// Reference for the temporal smoothness term.
enum class TemporalMode {
  // ||(q_t - q_{t-1}) - (s_t - s_{t-1})||^2: penalizes deviation from the
  // source's own frame-to-frame change, so a moving source is a minimizer.
  SourceRelative,
  // ||q_t - q_{t-1}||^2 exactly.
  Literal,
};

enum class MeshRebuild { PerFrame, FirstFrame };

struct RetargetConfig {
  TermWeights weights;
  double foot_speed_threshold = 0.01;  // m/s, evaluated on the source motion
  TemporalMode temporal = TemporalMode::SourceRelative;
  OptimizerConfig optimizer;
  MeshOptions mesh;
  MeshRebuild mesh_rebuild = MeshRebuild::PerFrame;

  void validate() const;
};

// Weighted per-term values of the per-frame objective.
struct ObjectiveTerms {
  double laplacian = 0.0;
  double temporal = 0.0;
  double joint_limit = 0.0;
  double velocity_limit = 0.0;
  double foot_slide = 0.0;
  double total = 0.0;
  bool mesh_empty = false;
};

struct AgentFrameContext {
  // q_{t-1}; empty on the first frame, which zeroes the temporal,
  // velocity-limit and foot-slide terms.
  std::optional<Pose> previous;
  Pose source;
  std::optional<Pose> source_previous;
  // target-body joint positions of `previous`
  JointPositions previous_positions;
  // foot joints whose source horizontal speed is below the threshold
  std::vector<std::size_t> planted_feet;
};

struct FrameContext {
  const Skeleton* skeleton = nullptr;
  const ShapeParams* shape = nullptr;
  double dt = 1.0 / 30.0;
  std::vector<AgentFrameContext> agents;  // one or two
  const InteractMesh* mesh = nullptr;
  const Points* object_vertices = nullptr;
};

ObjectiveTerms eval_objective(std::span<const Pose> poses, const FrameContext& ctx, const RetargetConfig& cfg);

// Gradient of the weighted total over the stacked pose parameters of all
// agents (see pack_pose). Hinges use subgradient 0 at the kink.
Eigen::VectorXd objective_gradient(std::span<const Pose> poses, const FrameContext& ctx,
                                   const RetargetConfig& cfg);

struct RetargetProblem {
  const Skeleton* source_skeleton = nullptr;
  ShapeParams source_shape;
  const Skeleton* target_skeleton = nullptr;
  ShapeParams target_shape;
  const MotionSequence* source = nullptr;
  // Optional second agent, time-aligned with `source`, sharing both bodies.
  const MotionSequence* second_source = nullptr;
  const ObjectMesh* object = nullptr;
};

// Source-side geometry of every frame: joint positions, subsampled world
// object vertices and the interact mesh built from them.
struct SceneFrames {
  std::vector<JointPositions> source_a;
  std::vector<JointPositions> source_b;
  std::vector<Points> object_vertices;
  std::vector<InteractMesh> meshes;
  std::size_t empty_meshes = 0;
};

SceneFrames prepare_scene(const RetargetProblem& problem, const RetargetConfig& cfg);

struct RetargetResult {
  MotionSequence sequence;
  std::optional<MotionSequence> second_sequence;
  std::vector<ObjectiveTerms> per_frame_losses;
  std::vector<int> iterations;
  int total_iterations = 0;
  bool converged = true;
  std::size_t empty_mesh_frames = 0;
};

RetargetResult retarget_sequence(const RetargetProblem& problem, const RetargetConfig& cfg);

// Mean Frobenius norm of L(source) - L(target) over every retained
// tetrahedron of every frame; frames with an empty mesh are skipped.
double mean_laplacian_residual(const SceneFrames& scene, const std::vector<JointPositions>& target_a,
                               const std::vector<JointPositions>& target_b);

// Target-body joint positions of a sequence.
std::vector<JointPositions> sequence_positions(const Skeleton& skeleton, const ShapeParams& shape,
                                               const MotionSequence& motion);

}  // namespace motionkit
