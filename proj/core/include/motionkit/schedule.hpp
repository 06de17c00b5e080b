#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace motionkit {

struct ScheduleConfig {
  double epsilon = 10.0;  // annealing span, rounds
  double kappa = 5.0;     // pure-teacher span, rounds
  int t_imit = 10;        // reward-switch round
  int horizon = 32;       // steps per round
  int rounds = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// max(1 - max((t - kappa) / epsilon, 0), 0)
double dagger_gate(double t, const ScheduleConfig& cfg);
// min(dagger_gate(t), 1), written out literally.
double loss_weight(double t, const ScheduleConfig& cfg);

enum class ActionSource { Teacher, Student };
// Teacher iff u <= gate.
ActionSource select_source(double u, double gate);

enum class RewardMode { Imitation, Trajectory };
// Imitation iff t < t_imit.
RewardMode reward_mode(double t, const ScheduleConfig& cfg);

const char* to_string(ActionSource s);
const char* to_string(RewardMode m);

// Uniform [0, 1) draws from std::mt19937_64: the top 53 bits of each output
// scaled by 2^-53, so the stream is reproducible across standard libraries.
class UniformStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64:top53";
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct StubState {
  double position = 0.0;
  double velocity = 0.0;
};

struct TransitionRecord {
  int round = 0;
  int step = 0;
  double u = 0.0;
  ActionSource executed = ActionSource::Teacher;
  StubState state;
  StubState next_state;
  double action = 0.0;          // student a
  double teacher_action = 0.0;  // a^e
};

using StubPolicy = std::function<double(const StubState&)>;
using StubTransition = std::function<StubState(const StubState&, double action)>;
// Scalar objective over one round's transitions.
using StubObjective = std::function<double(const std::vector<TransitionRecord>&)>;

struct StubSuite {
  StubPolicy teacher;
  StubPolicy student;
  StubTransition env;
  StubObjective imitation_objective;   // L_imit
  StubObjective trajectory_objective;  // L_traj
  StubState initial;
};

// 1-D point mass pushed toward `goal`: a PD teacher, a weaker proportional
// student, imitation objective mean (a - a^e)^2, trajectory objective mean
// squared distance of the next state to the goal.
StubSuite point_mass_stubs(double goal = 1.0);

struct RoundLog {
  int round = 0;
  double gate = 0.0;
  double weight = 0.0;
  double teacher_fraction = 0.0;
  RewardMode mode = RewardMode::Imitation;
  double action_loss = 0.0;  // J = mean |a - a^e|
  double ppo_objective = 0.0;
  double blended = 0.0;      // w L + (1 - w) J
};

struct ScheduleLog {
  std::string rng_algorithm;
  std::uint64_t seed = 0;
  std::vector<RoundLog> rounds;
  std::vector<TransitionRecord> transitions;

  // columns: round,gate,w,teacher_fraction,reward_mode,action_loss,ppo_objective,blended
  std::string rounds_csv() const;
  std::string transitions_jsonl() const;
};

// Runs the progressive-distillation loop with stub policies. No parameters
// are updated; objectives are evaluated and logged per round.
ScheduleLog run_schedule(const StubSuite& stubs, const ScheduleConfig& cfg);

}  // namespace motionkit
