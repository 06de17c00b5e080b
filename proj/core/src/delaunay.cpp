#include "motionkit/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "motionkit/error.hpp"

namespace motionkit {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

Sphere circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Mat3 m;
  m.row(0) = (b - a).transpose();
  m.row(1) = (c - a).transpose();
  m.row(2) = (d - a).transpose();
  const Vec3 rhs(0.5 * m.row(0).squaredNorm(), 0.5 * m.row(1).squaredNorm(), 0.5 * m.row(2).squaredNorm());
  Sphere s;
  if (m.determinant() == 0.0) return s;
  const Vec3 x = m.partialPivLu().solve(rhs);
  if (!x.allFinite()) return s;
  s.center = a + x;
  s.radius_sq = x.squaredNorm();
  s.valid = true;
  return s;
}

bool strictly_inside(const Sphere& s, const Vec3& p, double rel_tol) {
  if (!s.valid) return false;
  return (p - s.center).squaredNorm() < s.radius_sq * (1.0 - rel_tol);
}

namespace {

constexpr int kInf = -1;

struct Cell {
  std::array<int, 4> v{};
  std::array<int, 4> nb{-1, -1, -1, -1};  // neighbor opposite v[i]
  bool alive = true;
  Sphere sphere;

  int infinite_slot() const {
    for (int i = 0; i < 4; ++i)
      if (v[i] == kInf) return i;
    return -1;
  }
};

class Triangulator {
 public:
  Triangulator(const Points& pts, double scale) : pts_(pts), scale_(scale) {}

  void init(std::array<int, 4> s) {
    if (orient(s[0], s[1], s[2], s[3]) < 0.0) std::swap(s[2], s[3]);
    add_cell({s[0], s[1], s[2], s[3]});
    // One infinite cell per hull face; the face is flipped so the infinite
    // vertex sits on the positive side.
    for (int i = 0; i < 4; ++i) {
      std::array<int, 4> v = cells_[0].v;
      v[i] = kInf;
      std::swap(v[(i + 1) % 4], v[(i + 2) % 4]);
      add_cell(v);
    }
    link_all();
  }

  void insert(int p) {
    const int seed = locate(p);
    std::vector<char> in_cavity(cells_.size(), 0);
    std::vector<int> cavity{seed};
    in_cavity[seed] = 1;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      for (int nb : cells_[cavity[k]].nb) {
        if (nb >= 0 && !in_cavity[nb] && conflicts(nb, p)) {
          in_cavity[nb] = 1;
          cavity.push_back(nb);
        }
      }
    }
    // Grow the cavity until every new finite cell is positively oriented,
    // i.e. the cavity is star-shaped from p.
    for (bool grown = true; grown;) {
      grown = false;
      for (std::size_t k = 0; k < cavity.size(); ++k) {
        const Cell& c = cells_[cavity[k]];
        for (int i = 0; i < 4; ++i) {
          const int nb = c.nb[i];
          if (nb < 0 || in_cavity[nb]) continue;
          std::array<int, 4> v = c.v;
          v[i] = p;
          if (std::find(v.begin(), v.end(), kInf) != v.end()) continue;
          if (orient(v[0], v[1], v[2], v[3]) <= 0.0) {
            in_cavity[nb] = 1;
            cavity.push_back(nb);
            grown = true;
          }
        }
      }
    }

    // Retriangulate: one new cell per boundary face.
    std::map<std::pair<int, int>, std::pair<int, int>> open_edges;
    const std::size_t first_new = cells_.size();
    for (int ci : cavity) {
      const Cell c = cells_[ci];
      for (int i = 0; i < 4; ++i) {
        const int outside = c.nb[i];
        if (outside >= 0 && in_cavity[outside]) continue;
        std::array<int, 4> v = c.v;
        v[i] = p;
        const int nc = add_cell(v);
        cells_[nc].nb[i] = outside;
        if (outside >= 0) {
          for (int& back : cells_[outside].nb)
            if (back == ci) back = nc;
        }
        // faces of the new cell that contain p pair up across shared edges
        for (int j = 0; j < 4; ++j) {
          if (j == i) continue;
          int a = -2, b = -2;
          for (int k = 0; k < 4; ++k) {
            if (k == i || k == j) continue;
            (a == -2 ? a : b) = v[k];
          }
          const auto key = std::minmax(a, b);
          auto it = open_edges.find(key);
          if (it == open_edges.end()) {
            open_edges.emplace(key, std::make_pair(nc, j));
          } else {
            cells_[nc].nb[j] = it->second.first;
            cells_[it->second.first].nb[it->second.second] = nc;
            open_edges.erase(it);
          }
        }
      }
    }
    (void)first_new;
    for (int ci : cavity) cells_[ci].alive = false;
  }

  std::vector<Tet> finite_cells() const {
    std::vector<Tet> out;
    for (const Cell& c : cells_) {
      if (!c.alive || c.infinite_slot() >= 0) continue;
      out.push_back({static_cast<std::size_t>(c.v[0]), static_cast<std::size_t>(c.v[1]),
                     static_cast<std::size_t>(c.v[2]), static_cast<std::size_t>(c.v[3])});
    }
    return out;
  }

 private:
  double orient(int a, int b, int c, int d) const {
    return (pts_[b] - pts_[a]).dot((pts_[c] - pts_[a]).cross(pts_[d] - pts_[a]));
  }

  double orient_tol() const { return 1e-12 * scale_ * scale_ * scale_; }

  int add_cell(const std::array<int, 4>& v) {
    Cell c;
    c.v = v;
    if (c.infinite_slot() < 0) c.sphere = circumsphere(pts_[v[0]], pts_[v[1]], pts_[v[2]], pts_[v[3]]);
    cells_.push_back(c);
    return static_cast<int>(cells_.size()) - 1;
  }

  void link_all() {
    std::map<std::array<int, 3>, std::pair<int, int>> faces;
    for (int ci = 0; ci < static_cast<int>(cells_.size()); ++ci) {
      for (int i = 0; i < 4; ++i) {
        std::array<int, 3> f{};
        int k = 0;
        for (int j = 0; j < 4; ++j)
          if (j != i) f[k++] = cells_[ci].v[j];
        std::sort(f.begin(), f.end());
        auto it = faces.find(f);
        if (it == faces.end()) {
          faces.emplace(f, std::make_pair(ci, i));
        } else {
          cells_[ci].nb[i] = it->second.first;
          cells_[it->second.first].nb[it->second.second] = ci;
        }
      }
    }
  }

  // The finite face of an infinite cell, with p substituted for the
  // infinite vertex: positive orientation means p sees the face from outside.
  double hull_side(const Cell& c, int p) const {
    std::array<int, 4> v = c.v;
    v[c.infinite_slot()] = p;
    return orient(v[0], v[1], v[2], v[3]);
  }

  bool conflicts(int ci, int p) const {
    const Cell& c = cells_[ci];
    const int inf = c.infinite_slot();
    if (inf < 0) return strictly_inside(c.sphere, pts_[p]);
    const double side = hull_side(c, p);
    if (side > orient_tol()) return true;
    if (side < -orient_tol()) return false;
    // p on the hull plane: in conflict when inside the face's circumcircle
    std::array<int, 3> f{};
    int k = 0;
    for (int j = 0; j < 4; ++j)
      if (j != inf) f[k++] = c.v[j];
    const Vec3& a = pts_[f[0]];
    const Vec3 ab = pts_[f[1]] - a, ac = pts_[f[2]] - a;
    const Vec3 n = ab.cross(ac);
    const double denom = 2.0 * n.squaredNorm();
    if (denom == 0.0) return false;
    const Vec3 center = a + (ac.squaredNorm() * n.cross(ab) + ab.squaredNorm() * ac.cross(n)) / denom;
    return (pts_[p] - center).squaredNorm() < (a - center).squaredNorm() * (1.0 - kInSphereTolerance);
  }

  int locate(int p) const {
    int best_outside = -1;
    double best_side = 0.0;
    for (int ci = 0; ci < static_cast<int>(cells_.size()); ++ci) {
      const Cell& c = cells_[ci];
      if (!c.alive) continue;
      if (c.infinite_slot() >= 0) {
        const double side = hull_side(c, p);
        if (side > best_side) {
          best_side = side;
          best_outside = ci;
        }
        continue;
      }
      bool inside = true;
      for (int i = 0; i < 4 && inside; ++i) {
        std::array<int, 4> v = c.v;
        v[i] = p;
        inside = orient(v[0], v[1], v[2], v[3]) >= 0.0;
      }
      if (inside) return ci;
    }
    if (best_outside >= 0) return best_outside;
    // numerically on the hull boundary: fall back to any conflicting cell
    for (int ci = 0; ci < static_cast<int>(cells_.size()); ++ci) {
      if (cells_[ci].alive && conflicts(ci, p)) return ci;
    }
    throw NumericalError("delaunay3d: could not locate point " + std::to_string(p));
  }

  const Points& pts_;
  double scale_;
  std::vector<Cell> cells_;
};

}  // namespace

Tetrahedralization delaunay3d(const Points& points) {
  Tetrahedralization out;
  if (points.size() < 4) {
    throw DegenerateInputError("delaunay3d: need at least 4 points, got " + std::to_string(points.size()));
  }
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw ValidationError("delaunay3d: non-finite point");
  }

  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = std::max((hi - lo).norm(), std::numeric_limits<double>::min());

  std::vector<int> unique;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dup = false;
    for (int u : unique) {
      if ((points[i] - points[u]).norm() <= 1e-12) {
        dup = true;
        break;
      }
    }
    if (dup) {
      out.merged.push_back(i);
    } else {
      unique.push_back(static_cast<int>(i));
    }
  }
  if (!out.merged.empty()) {
    spdlog::warn("delaunay3d: merged {} duplicate point(s)", out.merged.size());
  }
  if (unique.size() < 4) {
    throw DegenerateInputError("delaunay3d: fewer than 4 distinct points");
  }

  // Initial simplex: spread-out, non-coplanar seed points.
  const int s0 = unique[0];
  int s1 = s0, s2 = s0, s3 = s0;
  double best = -1.0;
  for (int u : unique) {
    const double d = (points[u] - points[s0]).squaredNorm();
    if (d > best) { best = d; s1 = u; }
  }
  best = -1.0;
  const Vec3 axis = (points[s1] - points[s0]).normalized();
  for (int u : unique) {
    const Vec3 r = points[u] - points[s0];
    const double d = (r - r.dot(axis) * axis).squaredNorm();
    if (d > best) { best = d; s2 = u; }
  }
  const Vec3 normal = (points[s1] - points[s0]).cross(points[s2] - points[s0]);
  best = -1.0;
  if (normal.norm() > 0.0) {
    const Vec3 unit_normal = normal.normalized();
    for (int u : unique) {
      const double d = std::abs((points[u] - points[s0]).dot(unit_normal));
      if (d > best) { best = d; s3 = u; }
    }
  }
  if (!(best > 1e-9 * scale)) {
    throw DegenerateInputError("delaunay3d: points are coplanar (within 1e-9 relative)");
  }

  Triangulator tri(points, scale);
  tri.init({s0, s1, s2, s3});
  for (int u : unique) {
    if (u == s0 || u == s1 || u == s2 || u == s3) continue;
    tri.insert(u);
  }
  out.tets = tri.finite_cells();
  return out;
}

}  // namespace motionkit
