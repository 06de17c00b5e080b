#include "motionkit/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "motionkit/error.hpp"
#include "motionkit/rotation.hpp"

namespace motionkit {

Points interaction_graph(const JointPositions& joints, const Points& object_vertices) {
  if (object_vertices.empty()) throw ValidationError("interaction_graph: object has no vertices");
  Points out;
  out.reserve(joints.size());
  for (const Vec3& j : joints) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < object_vertices.size(); ++v) {
      const double d = (object_vertices[v] - j).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    out.push_back(object_vertices[best] - j);
  }
  return out;
}

int contact_label(double distance, const ContactZones& zones) {
  if (!(distance >= 0.0)) throw ValidationError("contact_label: distance must be non-negative");
  if (distance < zones.near) return 1;
  if (distance > zones.far) return -1;
  return 0;
}

const char* delta_component_name(DeltaComponent c) {
  switch (c) {
    case DeltaComponent::JointPos: return "joint_pos";
    case DeltaComponent::JointRot: return "joint_rot";
    case DeltaComponent::JointLinVel: return "joint_lin_vel";
    case DeltaComponent::JointAngVel: return "joint_ang_vel";
    case DeltaComponent::Contact: return "contact";
    case DeltaComponent::ObjPos: return "obj_pos";
    case DeltaComponent::ObjRot: return "obj_rot";
    case DeltaComponent::ObjLinVel: return "obj_lin_vel";
    case DeltaComponent::ObjAngVel: return "obj_ang_vel";
    case DeltaComponent::InteractionGraph: return "ig";
    case DeltaComponent::Count: break;
  }
  return "?";
}

void RewardConfig::validate() const {
  for (double l : {lambda_delta, lambda_c, lambda_v, lambda_f}) {
    if (!(l >= 0.0)) throw ValidationError("reward: lambda values must be non-negative");
  }
  for (double w : omega) {
    if (!(w >= 0.0)) throw ValidationError("reward: omega weights must be non-negative");
  }
  if (!(zones.near > 0.0 && zones.near < zones.far)) {
    throw ValidationError("reward: contact zones need 0 < near < far");
  }
}

double contact_mismatch(int reference_label, int contact) {
  switch (reference_label) {
    case 1: return std::abs(1.0 - contact);
    case -1: return static_cast<double>(contact);
    default: return 0.0;
  }
}

Reward compute_reward(const ObservationFrame& obs, std::span<const int> reference_contacts,
                      std::span<const double> contact_forces, const RewardConfig& cfg) {
  cfg.validate();
  const AgentObservation& agent = obs.agent;
  if (reference_contacts.size() != agent.c.size()) {
    throw ValidationError("reward: " + std::to_string(reference_contacts.size()) + " reference contacts for " +
                          std::to_string(agent.c.size()) + " joints");
  }

  double imitation = 0.0;
  for (std::size_t k = 0; k < kDeltaComponents; ++k) {
    const Eigen::VectorXd& d = obs.deltas[k];
    if (d.size() == 0) continue;
    if (!d.allFinite()) throw ValidationError(std::string("reward: non-finite delta ") +
                                              delta_component_name(static_cast<DeltaComponent>(k)));
    imitation += cfg.omega[k] * d.norm();
  }

  double mismatch = 0.0;
  for (std::size_t j = 0; j < agent.c.size(); ++j) {
    if (agent.c[j] != 0 && agent.c[j] != 1) throw ValidationError("reward: contact indicators must be 0 or 1");
    if (reference_contacts[j] < -1 || reference_contacts[j] > 1) {
      throw ValidationError("reward: reference contact labels must lie in {-1, 0, 1}");
    }
    mismatch += contact_mismatch(reference_contacts[j], agent.c[j]);
  }

  double speed = 0.0;
  auto add_speeds = [&](const Points& v) {
    for (const Vec3& x : v) {
      if (!x.allFinite()) throw ValidationError("reward: non-finite velocity");
      speed += x.norm();
    }
  };
  if (cfg.velocity != VelocityTerm::Linear) add_speeds(agent.q_dot);
  if (cfg.velocity != VelocityTerm::Angular) add_speeds(agent.p_dot);

  double max_force = 0.0;
  for (double f : contact_forces) {
    if (!std::isfinite(f)) throw ValidationError("reward: non-finite contact force");
    max_force = std::max(max_force, std::abs(f));
  }

  Reward r;
  r.factors.imitation = std::exp(-cfg.lambda_delta * imitation);
  r.factors.contact = std::exp(-cfg.lambda_c * mismatch);
  r.factors.energy = std::exp(-cfg.lambda_v * speed - cfg.lambda_f * max_force);
  r.value = r.factors.imitation * r.factors.contact * r.factors.energy;
  return r;
}

namespace {

struct FrameState {
  Points p, q, p_dot, q_dot, ig;
  std::vector<double> distance;  // joint to nearest object vertex
  Vec3 obj_p, obj_p_dot, obj_q_dot;
  Quat obj_q;
};

std::vector<FrameState> states_of(const Skeleton& skel, const ShapeParams& shape, const MotionSequence& m,
                                  const ObjectMesh& object) {
  std::vector<FrameState> out;
  const double dt = m.dt();
  for (std::size_t t = 0; t < m.size(); ++t) {
    const MotionFrame& f = m.frames[t];
    FrameState s;
    s.p = fk(skel, shape, Pose::from_frame(f));
    s.q.push_back(log_map(f.root_rot));
    s.q.insert(s.q.end(), f.joint_rots.begin(), f.joint_rots.end());
    const Points verts = transform_vertices(object.vertices, f.obj_pos, f.obj_rot);
    s.ig = interaction_graph(s.p, verts);
    for (const Vec3& v : s.ig) s.distance.push_back(v.norm());
    s.obj_p = f.obj_pos;
    s.obj_q = f.obj_rot;
    if (t == 0) {
      s.p_dot.assign(s.p.size(), Vec3::Zero());
      s.q_dot.assign(s.q.size(), Vec3::Zero());
      s.obj_p_dot.setZero();
      s.obj_q_dot.setZero();
    } else {
      const FrameState& prev = out.back();
      for (std::size_t j = 0; j < s.p.size(); ++j) s.p_dot.push_back((s.p[j] - prev.p[j]) / dt);
      s.q_dot.push_back(log_map(m.frames[t - 1].root_rot.conjugate() * f.root_rot) / dt);
      for (std::size_t j = 1; j < s.q.size(); ++j) s.q_dot.push_back((s.q[j] - prev.q[j]) / dt);
      s.obj_p_dot = (s.obj_p - prev.obj_p) / dt;
      s.obj_q_dot = log_map(prev.obj_q.conjugate() * s.obj_q) / dt;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::VectorXd stack_diff(const Points& a, const Points& b) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(3 * a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) d.segment<3>(static_cast<Eigen::Index>(3 * i)) = a[i] - b[i];
  return d;
}

}  // namespace

std::vector<ObservedFrame> observe_sequence(const Skeleton& skeleton, const ShapeParams& shape,
                                            const MotionSequence& simulated, const MotionSequence& reference,
                                            const ObjectMesh& object, const ContactZones& zones) {
  if (simulated.size() != reference.size()) {
    throw ValidationError("observe: simulated has " + std::to_string(simulated.size()) +
                          " frames, reference has " + std::to_string(reference.size()));
  }
  const auto sim = states_of(skeleton, shape, simulated, object);
  const auto ref = states_of(skeleton, shape, reference, object);
  std::vector<ObservedFrame> out;
  for (std::size_t t = 0; t < sim.size(); ++t) {
    const FrameState& s = sim[t];
    const FrameState& r = ref[t];
    const std::size_t n = s.p.size();
    ObservedFrame of;

    of.reference_contacts.resize(n);
    std::vector<int> ref_indicator(n);
    const auto& ref_labels = reference.frames[t].contacts;
    const auto& sim_labels = simulated.frames[t].contacts;
    AgentObservation& agent = of.obs.agent;
    agent.c.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      of.reference_contacts[j] = ref_labels ? (*ref_labels)[j] : contact_label(r.distance[j], zones);
      ref_indicator[j] = of.reference_contacts[j] == 1 ? 1 : 0;
      agent.c[j] = sim_labels ? ((*sim_labels)[j] == 1 ? 1 : 0) : (s.distance[j] < zones.near ? 1 : 0);
    }
    agent.p = s.p;
    agent.q = s.q;
    agent.p_dot = s.p_dot;
    agent.q_dot = s.q_dot;
    of.obs.object = ObjectObservation{s.obj_p, s.obj_q, s.obj_p_dot, s.obj_q_dot};
    of.obs.ig = s.ig;

    auto& d = of.obs.deltas;
    auto slot = [&](DeltaComponent c) -> Eigen::VectorXd& { return d[static_cast<std::size_t>(c)]; };
    slot(DeltaComponent::JointPos) = stack_diff(s.p, r.p);
    slot(DeltaComponent::JointRot) = stack_diff(s.q, r.q);
    slot(DeltaComponent::JointLinVel) = stack_diff(s.p_dot, r.p_dot);
    slot(DeltaComponent::JointAngVel) = stack_diff(s.q_dot, r.q_dot);
    Eigen::VectorXd dc(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) dc[static_cast<Eigen::Index>(j)] = agent.c[j] - ref_indicator[j];
    slot(DeltaComponent::Contact) = dc;
    slot(DeltaComponent::ObjPos) = s.obj_p - r.obj_p;
    slot(DeltaComponent::ObjRot) = log_map(r.obj_q.conjugate() * s.obj_q);
    slot(DeltaComponent::ObjLinVel) = s.obj_p_dot - r.obj_p_dot;
    slot(DeltaComponent::ObjAngVel) = s.obj_q_dot - r.obj_q_dot;
    slot(DeltaComponent::InteractionGraph) = stack_diff(s.ig, r.ig);
    out.push_back(std::move(of));
  }
  return out;
}

double critic_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& rewards) {
  if (predictions.rows() != rewards.rows() || predictions.cols() != rewards.cols()) {
    throw ValidationError("critic_loss: predictions are " + std::to_string(predictions.rows()) + "x" +
                          std::to_string(predictions.cols()) + " but rewards are " +
                          std::to_string(rewards.rows()) + "x" + std::to_string(rewards.cols()));
  }
  if (predictions.size() == 0) throw ValidationError("critic_loss: need at least one agent and one step");
  return (predictions - rewards).squaredNorm() / static_cast<double>(predictions.size());
}

}  // namespace motionkit
