#include "motionkit/motionio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "motionkit/error.hpp"

namespace motionkit {

using nlohmann::json;

namespace {

constexpr double kQuatRenormTolerance = 1e-3;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

const json& field(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(ctx + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

double number(const json& v, const std::string& ctx) {
  if (!v.is_number()) throw ParseError(ctx + ": expected a number");
  return v.get<double>();
}

Vec3 vec3(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 3) throw ParseError(ctx + ": expected an array of 3 numbers");
  return {number(v[0], ctx), number(v[1], ctx), number(v[2], ctx)};
}

Quat quat(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 4) throw ParseError(ctx + ": expected an array of 4 numbers (w,x,y,z)");
  Quat q(number(v[0], ctx), number(v[1], ctx), number(v[2], ctx), number(v[3], ctx));
  const double norm = q.norm();
  const double deviation = std::abs(norm - 1.0);
  if (!(deviation <= kQuatRenormTolerance)) {
    std::ostringstream msg;
    msg << ctx << ": quaternion norm " << norm << " deviates from 1 by " << deviation
        << " (tolerance " << kQuatRenormTolerance << ")";
    throw ValidationError(msg.str());
  }
  // already-unit values are kept bit-exact so canonical files round-trip
  if (deviation > 1e-12) q.normalize();
  return q;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

}  // namespace

bool Skeleton::is_foot(std::size_t j) const {
  return std::find(foot_joints.begin(), foot_joints.end(), j) != foot_joints.end();
}

void Skeleton::validate() const {
  if (joints.empty()) throw ValidationError("skeleton has no joints");
  std::size_t roots = 0;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const Joint& j = joints[i];
    if (!j.parent) {
      ++roots;
      if (i != 0) throw ValidationError("joint '" + j.name + "': root must be the first joint");
    } else if (*j.parent >= i) {
      throw ValidationError("joint '" + j.name + "': parent index " + std::to_string(*j.parent) +
                            " is not before the joint (skeleton must be topologically ordered)");
    }
    for (int a = 0; a < 3; ++a) {
      if (!(j.q_min[a] <= j.q_max[a])) {
        throw ValidationError("joint '" + j.name + "': q_min > q_max on axis " + std::to_string(a));
      }
    }
    if (!(j.v_min <= j.v_max)) throw ValidationError("joint '" + j.name + "': v_min > v_max");
  }
  if (roots != 1) throw ValidationError("skeleton must have exactly one root joint");
  for (std::size_t f : foot_joints) {
    if (f >= joints.size()) throw ValidationError("foot joint index " + std::to_string(f) + " out of range");
  }
}

Skeleton parse_skeleton(const std::string& text) {
  const json doc = parse_json(text, "skeleton");
  Skeleton skel;
  const json& joints = field(doc, "joints", "skeleton");
  if (!joints.is_array()) throw ParseError("skeleton: 'joints' must be an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const json& jj = joints[i];
    const std::string ctx = "skeleton.joints[" + std::to_string(i) + "]";
    Joint j;
    const json& name = field(jj, "name", ctx);
    if (!name.is_string()) throw ParseError(ctx + ".name: expected a string");
    j.name = name.get<std::string>();
    const json& parent = field(jj, "parent", ctx);
    if (parent.is_null()) {
      j.parent.reset();
    } else if (parent.is_number_integer() && parent.get<long long>() >= 0) {
      j.parent = parent.get<std::size_t>();
    } else {
      throw ParseError(ctx + ".parent: expected a non-negative integer or null");
    }
    j.rest_offset = vec3(field(jj, "offset", ctx), ctx + ".offset");
    if (jj.contains("q_min")) j.q_min = vec3(jj["q_min"], ctx + ".q_min");
    if (jj.contains("q_max")) j.q_max = vec3(jj["q_max"], ctx + ".q_max");
    if (jj.contains("v_min")) j.v_min = number(jj["v_min"], ctx + ".v_min");
    if (jj.contains("v_max")) j.v_max = number(jj["v_max"], ctx + ".v_max");
    skel.joints.push_back(std::move(j));
  }
  if (doc.contains("foot_joints")) {
    const json& feet = doc["foot_joints"];
    if (!feet.is_array()) throw ParseError("skeleton.foot_joints: expected an array");
    for (const json& f : feet) {
      if (!f.is_number_integer() || f.get<long long>() < 0) {
        throw ParseError("skeleton.foot_joints: expected non-negative integers");
      }
      skel.foot_joints.push_back(f.get<std::size_t>());
    }
  }
  skel.validate();
  return skel;
}

Skeleton load_skeleton(const std::filesystem::path& path) {
  return parse_skeleton(read_text_file(path));
}

std::string dump_skeleton(const Skeleton& skel) {
  json joints = json::array();
  for (const Joint& j : skel.joints) {
    json jj;
    jj["name"] = j.name;
    jj["parent"] = j.parent ? json(*j.parent) : json(nullptr);
    jj["offset"] = to_json(j.rest_offset);
    jj["q_min"] = to_json(j.q_min);
    jj["q_max"] = to_json(j.q_max);
    jj["v_min"] = j.v_min;
    jj["v_max"] = j.v_max;
    joints.push_back(std::move(jj));
  }
  json doc;
  doc["joints"] = std::move(joints);
  doc["foot_joints"] = skel.foot_joints;
  return doc.dump(2) + "\n";
}

void save_skeleton(const Skeleton& skeleton, const std::filesystem::path& path) {
  write_text_file(path, dump_skeleton(skeleton));
}

MotionSequence parse_motion_unbound(const std::string& text) {
  const json doc = parse_json(text, "motion");
  MotionSequence seq;
  seq.fps = number(field(doc, "fps", "motion"), "motion.fps");
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) {
    throw ValidationError("motion.fps: must be positive, got " + std::to_string(seq.fps));
  }
  const json& frames = field(doc, "frames", "motion");
  if (!frames.is_array()) throw ParseError("motion.frames: expected an array");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& ff = frames[t];
    const std::string ctx = "motion.frames[" + std::to_string(t) + "]";
    MotionFrame f;
    f.root_pos = vec3(field(ff, "root_pos", ctx), ctx + ".root_pos");
    f.root_rot = quat(field(ff, "root_rot", ctx), ctx + ".root_rot");
    const json& rots = field(ff, "joint_rots", ctx);
    if (!rots.is_array()) throw ParseError(ctx + ".joint_rots: expected an array");
    for (std::size_t j = 0; j < rots.size(); ++j) {
      f.joint_rots.push_back(vec3(rots[j], ctx + ".joint_rots[" + std::to_string(j) + "]"));
    }
    f.obj_pos = vec3(field(ff, "obj_pos", ctx), ctx + ".obj_pos");
    f.obj_rot = quat(field(ff, "obj_rot", ctx), ctx + ".obj_rot");
    if (ff.contains("contacts") && !ff["contacts"].is_null()) {
      std::vector<int> contacts;
      for (const json& c : ff["contacts"]) {
        if (!c.is_number_integer() || c.get<int>() < -1 || c.get<int>() > 1) {
          throw ParseError(ctx + ".contacts: labels must be integers in {-1, 0, 1}");
        }
        contacts.push_back(c.get<int>());
      }
      f.contacts = std::move(contacts);
    }
    if (!seq.frames.empty() && f.joint_rots.size() != seq.frames.front().joint_rots.size()) {
      throw ValidationError(ctx + ": joint count " + std::to_string(f.joint_rots.size()) +
                            " differs from frame 0 (" +
                            std::to_string(seq.frames.front().joint_rots.size()) + ")");
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

MotionSequence parse_motion(const std::string& text, const Skeleton& skeleton) {
  MotionSequence seq = parse_motion_unbound(text);
  const std::size_t expected = skeleton.size() - 1;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const MotionFrame& f = seq.frames[t];
    if (f.joint_rots.size() != expected) {
      throw ValidationError("motion.frames[" + std::to_string(t) + "]: " +
                            std::to_string(f.joint_rots.size()) + " joint_rots but skeleton has " +
                            std::to_string(skeleton.size()) + " joints (" + std::to_string(expected) +
                            " non-root)");
    }
    if (f.contacts && f.contacts->size() != skeleton.size()) {
      throw ValidationError("motion.frames[" + std::to_string(t) + "]: " +
                            std::to_string(f.contacts->size()) + " contact labels but skeleton has " +
                            std::to_string(skeleton.size()) + " joints");
    }
  }
  return seq;
}

MotionSequence load_motion(const std::filesystem::path& path, const Skeleton& skeleton) {
  return parse_motion(read_text_file(path), skeleton);
}

std::string dump_motion(const MotionSequence& motion) {
  json frames = json::array();
  for (const MotionFrame& f : motion.frames) {
    json ff;
    ff["root_pos"] = to_json(f.root_pos);
    ff["root_rot"] = to_json(f.root_rot);
    json rots = json::array();
    for (const Vec3& r : f.joint_rots) rots.push_back(to_json(r));
    ff["joint_rots"] = std::move(rots);
    ff["obj_pos"] = to_json(f.obj_pos);
    ff["obj_rot"] = to_json(f.obj_rot);
    if (f.contacts) ff["contacts"] = *f.contacts;
    frames.push_back(std::move(ff));
  }
  json doc;
  doc["fps"] = motion.fps;
  doc["frames"] = std::move(frames);
  return doc.dump(2) + "\n";
}

void save_motion(const MotionSequence& motion, const std::filesystem::path& path) {
  write_text_file(path, dump_motion(motion));
}

ObjectMesh parse_obj(const std::string& text) {
  ObjectMesh mesh;
  std::vector<std::array<long long, 3>> raw_faces;
  std::vector<std::size_t> face_lines;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError("obj line " + std::to_string(line_no) + ": malformed vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<long long, 3> idx{};
      for (auto& i : idx) {
        std::string tok;
        if (!(ls >> tok)) throw ParseError("obj line " + std::to_string(line_no) + ": face needs 3 indices");
        // accept "i", "i/t", "i/t/n", "i//n"
        try {
          i = std::stoll(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          throw ParseError("obj line " + std::to_string(line_no) + ": bad face index '" + tok + "'");
        }
      }
      raw_faces.push_back(idx);
      face_lines.push_back(line_no);
    }
  }
  const auto n = static_cast<long long>(mesh.vertices.size());
  for (std::size_t k = 0; k < raw_faces.size(); ++k) {
    std::array<std::size_t, 3> face{};
    for (int c = 0; c < 3; ++c) {
      const long long i = raw_faces[k][c];
      if (i < 1 || i > n) {
        throw ValidationError("obj line " + std::to_string(face_lines[k]) + ": face references vertex " +
                              std::to_string(i) + " but only " + std::to_string(n) + " vertices exist");
      }
      face[c] = static_cast<std::size_t>(i - 1);
    }
    mesh.faces.push_back(face);
  }
  return mesh;
}

ObjectMesh load_obj(const std::filesystem::path& path) { return parse_obj(read_text_file(path)); }

std::string dump_obj(const ObjectMesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  return out.str();
}

void save_obj(const ObjectMesh& mesh, const std::filesystem::path& path) {
  write_text_file(path, dump_obj(mesh));
}

Points transform_vertices(const Points& object_frame, const Vec3& pos, const Quat& rot) {
  const Mat3 r = rot.normalized().toRotationMatrix();
  Points out;
  out.reserve(object_frame.size());
  for (const Vec3& v : object_frame) out.push_back(r * v + pos);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace motionkit
