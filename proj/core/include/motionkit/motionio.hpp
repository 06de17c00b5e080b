#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motionkit/types.hpp"

namespace motionkit {

struct Joint {
  std::string name;
  std::optional<std::size_t> parent;
  Vec3 rest_offset = Vec3::Zero();
  // per rotational axis of the joint's exponential map (radians)
  Vec3 q_min = Vec3::Constant(-3.141592653589793);
  Vec3 q_max = Vec3::Constant(3.141592653589793);
  // angular speed bounds (radians / second)
  double v_min = -100.0;
  double v_max = 100.0;
};

// Rooted joint tree in topological order (parent index < child index).
struct Skeleton {
  std::vector<Joint> joints;
  std::vector<std::size_t> foot_joints;

  std::size_t size() const { return joints.size(); }
  bool is_foot(std::size_t j) const;
  // Throws ValidationError naming the offending joint.
  void validate() const;
};

// Per-bone length multipliers, one per joint. The root entry is carried for
// shape symmetry but has no effect on forward kinematics.
struct ShapeParams {
  std::vector<double> bone_scales;

  static ShapeParams ones(std::size_t joint_count) {
    return ShapeParams{std::vector<double>(joint_count, 1.0)};
  }
};

struct MotionFrame {
  Vec3 root_pos = Vec3::Zero();
  Quat root_rot = Quat::Identity();
  std::vector<Vec3> joint_rots;  // one per non-root joint
  Vec3 obj_pos = Vec3::Zero();
  Quat obj_rot = Quat::Identity();
  std::optional<std::vector<int>> contacts;  // per joint, in {-1, 0, 1}
};

struct MotionSequence {
  double fps = 30.0;
  std::vector<MotionFrame> frames;

  double dt() const { return 1.0 / fps; }
  std::size_t size() const { return frames.size(); }
};

struct ObjectMesh {
  Points vertices;
  std::vector<std::array<std::size_t, 3>> faces;
};

Skeleton parse_skeleton(const std::string& json_text);
Skeleton load_skeleton(const std::filesystem::path& path);
std::string dump_skeleton(const Skeleton& skeleton);
void save_skeleton(const Skeleton& skeleton, const std::filesystem::path& path);

// Binds the parsed frames to `skeleton`: joint counts must match and
// quaternions are renormalized when within 1e-3 of unit length.
MotionSequence parse_motion(const std::string& json_text, const Skeleton& skeleton);
MotionSequence load_motion(const std::filesystem::path& path, const Skeleton& skeleton);
// Parse without binding to a skeleton; checks frame-to-frame consistency only.
MotionSequence parse_motion_unbound(const std::string& json_text);
std::string dump_motion(const MotionSequence& motion);
void save_motion(const MotionSequence& motion, const std::filesystem::path& path);

ObjectMesh parse_obj(const std::string& text);
ObjectMesh load_obj(const std::filesystem::path& path);
std::string dump_obj(const ObjectMesh& mesh);
void save_obj(const ObjectMesh& mesh, const std::filesystem::path& path);

// Vertices in world frame for the given object pose.
Points transform_vertices(const Points& object_frame, const Vec3& pos, const Quat& rot);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace motionkit
