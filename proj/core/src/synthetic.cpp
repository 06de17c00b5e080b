#include "motionkit/synthetic.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "motionkit/kinematics.hpp"

namespace motionkit::synthetic {

namespace {

Joint make_joint(const char* name, std::optional<std::size_t> parent, Vec3 offset) {
  Joint j;
  j.name = name;
  j.parent = parent;
  j.rest_offset = offset;
  j.q_min = Vec3::Constant(-2.5);
  j.q_max = Vec3::Constant(2.5);
  j.v_min = -20.0;
  j.v_max = 20.0;
  return j;
}

Quat yaw(double angle) { return Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())); }

}  // namespace

Skeleton humanoid(double scale) {
  Skeleton s;
  auto add = [&](const char* name, std::optional<std::size_t> parent, double x, double y, double z) {
    s.joints.push_back(make_joint(name, parent, scale * Vec3(x, y, z)));
  };
  add("pelvis", std::nullopt, 0, 0, 0);
  add("spine1", 0, 0, 0, 0.10);
  add("spine2", 1, 0, 0, 0.12);
  add("chest", 2, 0, 0, 0.12);
  add("neck", 3, 0, 0, 0.15);
  add("head", 4, 0, 0, 0.10);
  add("l_shoulder", 3, 0, 0.18, 0.10);
  add("l_elbow", 6, 0, 0.28, 0);
  add("l_wrist", 7, 0, 0.25, 0);
  add("l_hand", 8, 0, 0.08, 0);
  add("r_shoulder", 3, 0, -0.18, 0.10);
  add("r_elbow", 10, 0, -0.28, 0);
  add("r_wrist", 11, 0, -0.25, 0);
  add("r_hand", 12, 0, -0.08, 0);
  add("l_hip", 0, 0, 0.10, -0.05);
  add("l_knee", 14, 0, 0, -0.42);
  add("l_ankle", 15, 0, 0, -0.40);
  add("r_hip", 0, 0, -0.10, -0.05);
  add("r_knee", 17, 0, 0, -0.42);
  add("r_ankle", 18, 0, 0, -0.40);
  s.foot_joints = {16, 19};
  return s;
}

Skeleton chain(std::size_t joints, const Vec3& offset) {
  Skeleton s;
  for (std::size_t i = 0; i < joints; ++i) {
    Joint j;
    j.name = "j" + std::to_string(i);
    if (i > 0) {
      j.parent = i - 1;
      j.rest_offset = offset;
    }
    s.joints.push_back(j);
  }
  return s;
}

ObjectMesh box(const Vec3& size, int subdivisions) {
  ObjectMesh mesh;
  std::map<std::tuple<long, long, long>, std::size_t> index;
  const int n = std::max(1, subdivisions);
  auto vertex = [&](const Vec3& unit) {
    // grid coordinates in [-n, n] keep deduplication exact
    const auto key = std::make_tuple(std::lround(unit.x() * n), std::lround(unit.y() * n), std::lround(unit.z() * n));
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    mesh.vertices.push_back(0.5 * unit.cwiseProduct(size));
    index.emplace(key, mesh.vertices.size() - 1);
    return mesh.vertices.size() - 1;
  };
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-1.0, 1.0}) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          auto corner = [&](int da, int db) {
            Vec3 p;
            p[axis] = side;
            p[u] = -1.0 + 2.0 * (a + da) / n;
            p[v] = -1.0 + 2.0 * (b + db) / n;
            return vertex(p);
          };
          const std::size_t c00 = corner(0, 0), c10 = corner(1, 0), c11 = corner(1, 1), c01 = corner(0, 1);
          if (side > 0) {
            mesh.faces.push_back({c00, c10, c11});
            mesh.faces.push_back({c00, c11, c01});
          } else {
            mesh.faces.push_back({c00, c11, c10});
            mesh.faces.push_back({c00, c01, c11});
          }
        }
      }
    }
  }
  return mesh;
}

HeldBoxScene held_box_scene(std::size_t frames, bool two_agents, double fps) {
  HeldBoxScene scene;
  scene.skeleton = humanoid();
  const Vec3 box_size(0.6, 0.64, 0.3);
  scene.object = box(box_size, 4);
  const ShapeParams ones = ShapeParams::ones(scene.skeleton.size());
  const double pi = std::numbers::pi;

  MotionSequence a;
  a.fps = fps;
  std::vector<Vec3> box_centers;
  for (std::size_t t = 0; t < frames; ++t) {
    const double time = static_cast<double>(t) / fps;
    const double phase = 2.0 * pi * 0.8 * time;
    MotionFrame f;
    const double heading = 0.08 * std::sin(0.5 * phase);
    f.root_rot = yaw(heading);
    f.root_pos = Vec3(0.25 * time, 0.0, 0.87 + 0.01 * std::sin(2.0 * phase));
    f.joint_rots.assign(scene.skeleton.size() - 1, Vec3::Zero());
    auto rot = [&](std::size_t joint) -> Vec3& { return f.joint_rots[joint - 1]; };
    rot(1) = Vec3(0.0, 0.03 * std::sin(phase), 0.0);
    rot(3) = Vec3(0.0, 0.0, -0.5 * heading);
    rot(5) = Vec3(0.0, 0.05 * std::sin(0.5 * phase), 0.0);
    // arms reach forward around the box
    rot(6) = Vec3(0.0, 0.25, -1.45 + 0.03 * std::sin(phase));
    rot(7) = Vec3(0.0, 0.0, 0.25);
    rot(10) = Vec3(0.0, 0.25, 1.45 - 0.03 * std::sin(phase));
    rot(11) = Vec3(0.0, 0.0, -0.25);
    // legs swing in antiphase
    rot(14) = Vec3(0.0, -0.3 * std::sin(phase), 0.0);
    rot(15) = Vec3(0.0, 0.3 * (1.0 + std::sin(phase + 0.5 * pi)), 0.0);
    rot(17) = Vec3(0.0, 0.3 * std::sin(phase), 0.0);
    rot(18) = Vec3(0.0, 0.3 * (1.0 - std::sin(phase + 0.5 * pi)), 0.0);

    const JointPositions p = fk(scene.skeleton, ones, Pose::from_frame(f));
    const Vec3 hands = 0.5 * (p[9] + p[13]);
    const Mat3 r = f.root_rot.toRotationMatrix();
    f.obj_rot = f.root_rot;
    f.obj_pos = two_agents ? Vec3(hands + r * Vec3(0.15, 0.0, 0.0)) : Vec3(hands + r * Vec3(0.05, 0.0, 0.0));
    box_centers.push_back(f.obj_pos);
    a.frames.push_back(std::move(f));
  }
  scene.agent_a = a;

  if (two_agents) {
    MotionSequence b = a;
    for (std::size_t t = 0; t < frames; ++t) {
      MotionFrame& f = b.frames[t];
      const MotionFrame& fa = a.frames[t];
      // mirror agent A through the box center about the vertical axis
      const Vec3 c = box_centers[t];
      Vec3 root = 2.0 * c - fa.root_pos;
      root.z() = fa.root_pos.z();
      f.root_pos = root;
      f.root_rot = (yaw(pi) * fa.root_rot).normalized();
      f.contacts.reset();
    }
    scene.agent_b = b;
  }
  return scene;
}

void write_demo_corpus(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const HeldBoxScene solo = held_box_scene(60, false);
  const HeldBoxScene duo = held_box_scene(60, true);
  save_skeleton(solo.skeleton, dir / "source_skeleton.json");
  Skeleton tall = humanoid(1.15);
  save_skeleton(tall, dir / "target_skeleton.json");
  save_obj(solo.object, dir / "box.obj");
  save_motion(solo.agent_a, dir / "carry_solo.json");
  save_motion(duo.agent_a, dir / "carry_duo_a.json");
  save_motion(*duo.agent_b, dir / "carry_duo_b.json");

  write_text_file(dir / "clip_stats.json",
                  "{\n  \"carry_solo\": [120, 118, 131],\n  \"carry_duo\": [64, 59, 71],\n"
                  "  \"external_clip\": [110, 118, 116]\n}\n");

  write_text_file(dir / "manifest.json", R"({
  "output_dir": "out",
  "clip_stats": "clip_stats.json",
  "entries": [
    {
      "id": "carry_solo",
      "motion": "carry_solo.json",
      "source_skeleton": "source_skeleton.json",
      "target_skeleton": "target_skeleton.json",
      "object": "box.obj"
    },
    {
      "id": "carry_duo",
      "motion": "carry_duo_a.json",
      "second_motion": "carry_duo_b.json",
      "source_skeleton": "source_skeleton.json",
      "target_skeleton": "target_skeleton.json",
      "object": "box.obj"
    }
  ],
  "retarget": {
    "iters": 200
  },
  "smooth": {
    "alpha": 10,
    "window": 5
  }
}
)");
}

}  // namespace motionkit::synthetic
