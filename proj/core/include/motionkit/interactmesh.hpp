#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motionkit/delaunay.hpp"
#include "motionkit/types.hpp"

namespace motionkit {

using Laplacian = Eigen::Matrix<double, 4, 3>;

// Row i = sum_{j != i} (p_i - p_j) = 4 p_i - sum_k p_k.
Laplacian laplacian(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);
Laplacian laplacian(const Eigen::Matrix<double, 4, 3>& rows);

enum class PointSource { AgentA, AgentB, Object };

struct PointRef {
  PointSource source = PointSource::AgentA;
  std::size_t index = 0;  // joint index, or index into the object vertex list
};

enum class RetentionRule {
  // {2 x AgentA, 1 x Object, 1 x AgentB} or the mirrored multiset; with no
  // second agent: at least one agent joint and one object vertex.
  Pattern,
  // Any tetrahedron mixing at least two provenances.
  Loose,
};

struct MeshOptions {
  RetentionRule rule = RetentionRule::Pattern;
  // Joints farther than this from every object vertex are left out.
  std::optional<double> proximity_gate = 0.5;
  std::size_t max_object_vertices = 64;
};

constexpr double kMinTetVolume = 1e-9;

struct InteractMesh {
  std::vector<PointRef> points;
  Points source_positions;
  std::vector<Tet> tetrahedra;
  std::vector<Laplacian> reference_laplacians;

  bool empty() const { return tetrahedra.empty(); }
  std::string to_json() const;
};

// Farthest-point sampling starting at vertex 0; returns at most
// `max_count` vertex indices in ascending order (all of them when the mesh
// is small enough).
std::vector<std::size_t> farthest_point_sample(const Points& vertices, std::size_t max_count);

bool retained(const std::array<PointSource, 4>& provenance, bool two_agents, RetentionRule rule);

// Tetrahedralizes the combined cloud and keeps the tetrahedra allowed by the
// retention rule. An empty result means no interaction structure this frame.
InteractMesh build_interact_mesh(const JointPositions& joints_a, const JointPositions& joints_b,
                                 const Points& object_vertices, const MeshOptions& options = {});

// Keeps the topology and recomputes source positions and reference
// Laplacians for a new frame.
void refresh_reference(InteractMesh& mesh, const JointPositions& joints_a, const JointPositions& joints_b,
                       const Points& object_vertices);

Vec3 resolve_point(const PointRef& ref, const JointPositions& joints_a, const JointPositions& joints_b,
                   const Points& object_vertices);

}  // namespace motionkit
