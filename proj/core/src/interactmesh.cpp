#include "motionkit/interactmesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "motionkit/error.hpp"

namespace motionkit {

Laplacian laplacian(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  Laplacian l;
  l.row(0) = ((p0 - p1) + (p0 - p2) + (p0 - p3)).transpose();
  l.row(1) = ((p1 - p0) + (p1 - p2) + (p1 - p3)).transpose();
  l.row(2) = ((p2 - p0) + (p2 - p1) + (p2 - p3)).transpose();
  l.row(3) = ((p3 - p0) + (p3 - p1) + (p3 - p2)).transpose();
  return l;
}

Laplacian laplacian(const Eigen::Matrix<double, 4, 3>& rows) {
  return laplacian(rows.row(0).transpose(), rows.row(1).transpose(), rows.row(2).transpose(),
                   rows.row(3).transpose());
}

std::vector<std::size_t> farthest_point_sample(const Points& vertices, std::size_t max_count) {
  std::vector<std::size_t> out;
  if (vertices.empty() || max_count == 0) return out;
  if (vertices.size() <= max_count) {
    out.resize(vertices.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  std::vector<double> dist(vertices.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (out.size() < max_count) {
    out.push_back(next);
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      dist[i] = std::min(dist[i], (vertices[i] - vertices[next]).squaredNorm());
      if (dist[i] > far_d) {
        far_d = dist[i];
        far = i;
      }
    }
    next = far;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool retained(const std::array<PointSource, 4>& provenance, bool two_agents, RetentionRule rule) {
  int a = 0, b = 0, o = 0;
  for (PointSource s : provenance) {
    switch (s) {
      case PointSource::AgentA: ++a; break;
      case PointSource::AgentB: ++b; break;
      case PointSource::Object: ++o; break;
    }
  }
  const int kinds = (a > 0) + (b > 0) + (o > 0);
  if (rule == RetentionRule::Loose) return kinds >= 2;
  if (!two_agents) return o >= 1 && (a + b) >= 1;
  return o == 1 && ((a == 2 && b == 1) || (a == 1 && b == 2));
}

Vec3 resolve_point(const PointRef& ref, const JointPositions& joints_a, const JointPositions& joints_b,
                   const Points& object_vertices) {
  switch (ref.source) {
    case PointSource::AgentA: return joints_a[ref.index];
    case PointSource::AgentB: return joints_b[ref.index];
    case PointSource::Object: return object_vertices[ref.index];
  }
  return Vec3::Zero();
}

namespace {

bool near_object(const Vec3& joint, const Points& object_vertices, double gate) {
  for (const Vec3& v : object_vertices) {
    if ((v - joint).norm() <= gate) return true;
  }
  return false;
}

}  // namespace

InteractMesh build_interact_mesh(const JointPositions& joints_a, const JointPositions& joints_b,
                                 const Points& object_vertices, const MeshOptions& options) {
  InteractMesh mesh;
  auto add_agent = [&](const JointPositions& joints, PointSource src) {
    for (std::size_t j = 0; j < joints.size(); ++j) {
      if (options.proximity_gate && !near_object(joints[j], object_vertices, *options.proximity_gate)) continue;
      mesh.points.push_back({src, j});
      mesh.source_positions.push_back(joints[j]);
    }
  };
  add_agent(joints_a, PointSource::AgentA);
  add_agent(joints_b, PointSource::AgentB);
  for (std::size_t v = 0; v < object_vertices.size(); ++v) {
    mesh.points.push_back({PointSource::Object, v});
    mesh.source_positions.push_back(object_vertices[v]);
  }

  if (mesh.source_positions.size() < 4) return mesh;
  Tetrahedralization tri;
  try {
    tri = delaunay3d(mesh.source_positions);
  } catch (const DegenerateInputError&) {
    return mesh;
  }

  const bool two_agents = !joints_b.empty();
  for (const Tet& t : tri.tets) {
    const std::array<PointSource, 4> prov{mesh.points[t[0]].source, mesh.points[t[1]].source,
                                          mesh.points[t[2]].source, mesh.points[t[3]].source};
    if (!retained(prov, two_agents, options.rule)) continue;
    const auto& p = mesh.source_positions;
    if (std::abs(signed_volume(p[t[0]], p[t[1]], p[t[2]], p[t[3]])) <= kMinTetVolume) continue;
    mesh.tetrahedra.push_back(t);
    mesh.reference_laplacians.push_back(laplacian(p[t[0]], p[t[1]], p[t[2]], p[t[3]]));
  }
  return mesh;
}

void refresh_reference(InteractMesh& mesh, const JointPositions& joints_a, const JointPositions& joints_b,
                       const Points& object_vertices) {
  for (std::size_t k = 0; k < mesh.points.size(); ++k) {
    mesh.source_positions[k] = resolve_point(mesh.points[k], joints_a, joints_b, object_vertices);
  }
  const auto& p = mesh.source_positions;
  for (std::size_t k = 0; k < mesh.tetrahedra.size(); ++k) {
    const Tet& t = mesh.tetrahedra[k];
    mesh.reference_laplacians[k] = laplacian(p[t[0]], p[t[1]], p[t[2]], p[t[3]]);
  }
}

std::string InteractMesh::to_json() const {
  using nlohmann::json;
  static constexpr const char* kNames[] = {"agent_a", "agent_b", "object"};
  json pts = json::array();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3& p = source_positions[k];
    pts.push_back({{"source", kNames[static_cast<int>(points[k].source)]},
                   {"index", points[k].index},
                   {"position", {p.x(), p.y(), p.z()}}});
  }
  json tets = json::array();
  for (std::size_t k = 0; k < tetrahedra.size(); ++k) {
    json lap = json::array();
    for (int r = 0; r < 4; ++r) {
      lap.push_back({reference_laplacians[k](r, 0), reference_laplacians[k](r, 1), reference_laplacians[k](r, 2)});
    }
    tets.push_back({{"vertices", tetrahedra[k]}, {"laplacian", std::move(lap)}});
  }
  json doc;
  doc["points"] = std::move(pts);
  doc["tetrahedra"] = std::move(tets);
  return doc.dump(2) + "\n";
}

}  // namespace motionkit
