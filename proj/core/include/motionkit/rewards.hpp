#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motionkit/kinematics.hpp"
#include "motionkit/motionio.hpp"
#include "motionkit/types.hpp"

namespace motionkit {

// Vectors from each joint to its nearest object vertex (ties -> lowest index).
Points interaction_graph(const JointPositions& joints, const Points& object_vertices);

struct ContactZones {
  double near = 0.07;  // m
  double far = 0.2;    // m
};

// 1 inside the contact zone (d < near), -1 in the penalty zone (d > far),
// 0 in the buffer zone including both boundaries.
int contact_label(double distance, const ContactZones& zones = {});

// Which velocity feeds the energy factor.
enum class VelocityTerm { Angular, Linear, Both };

// Names of the deviation components, in ObservationFrame::deltas order.
enum class DeltaComponent : std::size_t {
  JointPos, JointRot, JointLinVel, JointAngVel, Contact,
  ObjPos, ObjRot, ObjLinVel, ObjAngVel, InteractionGraph,
  Count
};
constexpr std::size_t kDeltaComponents = static_cast<std::size_t>(DeltaComponent::Count);
const char* delta_component_name(DeltaComponent c);

struct AgentObservation {
  Points p;       // joint positions, m
  Points q;       // joint rotations (exp-map), rad
  Points p_dot;   // m/s
  Points q_dot;   // rad/s
  std::vector<int> c;  // contact indicator per joint, {0, 1}
};

struct ObjectObservation {
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();
  Vec3 p_dot = Vec3::Zero();
  Vec3 q_dot = Vec3::Zero();
};

struct ObservationFrame {
  AgentObservation agent;
  ObjectObservation object;
  Points ig;
  // Deviation from the reference, one stacked vector per DeltaComponent.
  std::array<Eigen::VectorXd, kDeltaComponents> deltas;
};

struct RewardConfig {
  double lambda_delta = 1.0;
  double lambda_c = 1.0;
  double lambda_v = 1.0;
  double lambda_f = 1.0;
  std::array<double, kDeltaComponents> omega;
  ContactZones zones;
  VelocityTerm velocity = VelocityTerm::Angular;

  RewardConfig() { omega.fill(1.0); }
  void validate() const;
};

struct RewardFactors {
  double imitation = 1.0;
  double contact = 1.0;
  double energy = 1.0;
};

struct Reward {
  double value = 1.0;
  RewardFactors factors;
};

// Contact mismatch of one joint: |c_ref - c| for a required contact,
// c for a forbidden contact, 0 in the buffer zone.
double contact_mismatch(int reference_label, int contact);

// R = imitation * contact * energy with
//   imitation = exp(-lambda_delta * sum_k omega_k ||delta_k||)
//   contact   = exp(-lambda_c * sum_j mismatch_j)
//   energy    = exp(-lambda_v * sum_j ||v_j|| - lambda_f * max |f|)
Reward compute_reward(const ObservationFrame& obs, std::span<const int> reference_contacts,
                      std::span<const double> contact_forces, const RewardConfig& cfg);

struct ObservedFrame {
  ObservationFrame obs;
  std::vector<int> reference_contacts;  // c-hat, per joint
};

// Observations of `simulated` against `reference` (same skeleton and
// length). Velocities are backward differences (zero on frame 0). Contact
// indicators come from the motion's labels when present, otherwise from
// joint-to-object distance against the contact zones.
std::vector<ObservedFrame> observe_sequence(const Skeleton& skeleton, const ShapeParams& shape,
                                            const MotionSequence& simulated, const MotionSequence& reference,
                                            const ObjectMesh& object, const ContactZones& zones = {});

// Mean over agents (rows) and steps (columns) of the squared residual.
double critic_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& rewards);

}  // namespace motionkit
