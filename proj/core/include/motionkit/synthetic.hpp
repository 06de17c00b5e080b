#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "motionkit/motionio.hpp"

namespace motionkit::synthetic {

// 20-joint humanoid, z up, facing +x, feet at joints 16 and 19.
// `scale` multiplies every rest offset.
Skeleton humanoid(double scale = 1.0);

// Two-joint chain: root at the origin, child offset (0, 1, 0).
Skeleton chain(std::size_t joints, const Vec3& offset = Vec3(0.0, 1.0, 0.0));

// Axis-aligned box centered at the origin, each face split into a
// `subdivisions` x `subdivisions` grid of triangle pairs.
ObjectMesh box(const Vec3& size, int subdivisions = 1);

struct HeldBoxScene {
  Skeleton skeleton;
  ObjectMesh object;
  MotionSequence agent_a;
  std::optional<MotionSequence> agent_b;
};

// A walking humanoid carrying a box in front of it; with `two_agents` a
// second humanoid faces it and holds the far side of the same box.
HeldBoxScene held_box_scene(std::size_t frames, bool two_agents, double fps = 30.0);

// Writes a small self-contained corpus (skeletons, motions, box, clip
// statistics and a pipeline manifest) into `dir`.
void write_demo_corpus(const std::filesystem::path& dir);

}  // namespace motionkit::synthetic
