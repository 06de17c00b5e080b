#include "motionkit/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "motionkit/error.hpp"
#include "motionkit/table.hpp"

namespace motionkit {

void ScheduleConfig::validate() const {
  if (!(epsilon > 0.0)) throw ValidationError("schedule: epsilon must be > 0");
  if (!(kappa >= 0.0)) throw ValidationError("schedule: kappa must be >= 0");
  if (t_imit < 0) throw ValidationError("schedule: t_imit must be >= 0");
  if (horizon < 1) throw ValidationError("schedule: horizon must be >= 1");
  if (rounds < 0) throw ValidationError("schedule: rounds must be >= 0");
}

double dagger_gate(double t, const ScheduleConfig& cfg) {
  return std::max(1.0 - std::max((t - cfg.kappa) / cfg.epsilon, 0.0), 0.0);
}

double loss_weight(double t, const ScheduleConfig& cfg) {
  return std::min(std::max(1.0 - std::max((t - cfg.kappa) / cfg.epsilon, 0.0), 0.0), 1.0);
}

ActionSource select_source(double u, double gate) {
  return u <= gate ? ActionSource::Teacher : ActionSource::Student;
}

RewardMode reward_mode(double t, const ScheduleConfig& cfg) {
  return t < cfg.t_imit ? RewardMode::Imitation : RewardMode::Trajectory;
}

const char* to_string(ActionSource s) { return s == ActionSource::Teacher ? "teacher" : "student"; }
const char* to_string(RewardMode m) { return m == RewardMode::Imitation ? "imitation" : "trajectory"; }

StubSuite point_mass_stubs(double goal) {
  constexpr double dt = 0.05;
  StubSuite s;
  s.teacher = [goal](const StubState& x) { return 4.0 * (goal - x.position) - 2.0 * x.velocity; };
  s.student = [goal](const StubState& x) { return 0.5 * (goal - x.position); };
  s.env = [](const StubState& x, double a) {
    StubState n;
    n.velocity = 0.98 * x.velocity + a * dt;
    n.position = x.position + n.velocity * dt;
    return n;
  };
  s.imitation_objective = [](const std::vector<TransitionRecord>& tr) {
    double sum = 0.0;
    for (const auto& r : tr) sum += (r.action - r.teacher_action) * (r.action - r.teacher_action);
    return tr.empty() ? 0.0 : sum / static_cast<double>(tr.size());
  };
  s.trajectory_objective = [goal](const std::vector<TransitionRecord>& tr) {
    double sum = 0.0;
    for (const auto& r : tr) sum += (goal - r.next_state.position) * (goal - r.next_state.position);
    return tr.empty() ? 0.0 : sum / static_cast<double>(tr.size());
  };
  return s;
}

ScheduleLog run_schedule(const StubSuite& stubs, const ScheduleConfig& cfg) {
  cfg.validate();
  ScheduleLog log;
  log.rng_algorithm = UniformStream::kAlgorithm;
  log.seed = cfg.seed;
  UniformStream rng(cfg.seed);

  for (int t = 0; t < cfg.rounds; ++t) {
    const double gate = dagger_gate(t, cfg);
    std::vector<TransitionRecord> round;
    round.reserve(static_cast<std::size_t>(cfg.horizon));
    StubState s = stubs.initial;
    int teacher_steps = 0;
    for (int h = 0; h < cfg.horizon; ++h) {
      TransitionRecord r;
      r.round = t;
      r.step = h;
      r.u = rng.next();
      r.state = s;
      r.teacher_action = stubs.teacher(s);
      r.action = stubs.student(s);
      r.executed = select_source(r.u, gate);
      if (r.executed == ActionSource::Teacher) ++teacher_steps;
      r.next_state = stubs.env(s, r.executed == ActionSource::Teacher ? r.teacher_action : r.action);
      s = r.next_state;
      round.push_back(r);
    }

    RoundLog rl;
    rl.round = t;
    rl.gate = gate;
    rl.weight = loss_weight(t, cfg);
    rl.teacher_fraction = static_cast<double>(teacher_steps) / static_cast<double>(cfg.horizon);
    rl.mode = reward_mode(t, cfg);
    double j = 0.0;
    for (const auto& r : round) j += std::abs(r.action - r.teacher_action);
    rl.action_loss = j / static_cast<double>(round.size());
    rl.ppo_objective = rl.mode == RewardMode::Imitation ? stubs.imitation_objective(round)
                                                        : stubs.trajectory_objective(round);
    rl.blended = rl.weight * rl.ppo_objective + (1.0 - rl.weight) * rl.action_loss;
    log.rounds.push_back(rl);
    log.transitions.insert(log.transitions.end(), round.begin(), round.end());
  }
  return log;
}

std::string ScheduleLog::rounds_csv() const {
  std::ostringstream out;
  out << "# rng=" << rng_algorithm << " seed=" << seed << '\n';
  out << "round,gate,w,teacher_fraction,reward_mode,action_loss,ppo_objective,blended\n";
  for (const RoundLog& r : rounds) {
    out << r.round << ',' << format_number(r.gate) << ',' << format_number(r.weight) << ','
        << format_number(r.teacher_fraction) << ',' << to_string(r.mode) << ',' << format_number(r.action_loss)
        << ',' << format_number(r.ppo_objective) << ',' << format_number(r.blended) << '\n';
  }
  return out.str();
}

std::string ScheduleLog::transitions_jsonl() const {
  using nlohmann::json;
  std::ostringstream out;
  for (const TransitionRecord& r : transitions) {
    json j;
    j["round"] = r.round;
    j["step"] = r.step;
    j["u"] = r.u;
    j["executed"] = to_string(r.executed);
    j["s"] = {r.state.position, r.state.velocity};
    j["s_next"] = {r.next_state.position, r.next_state.velocity};
    j["a"] = r.action;
    j["a_teacher"] = r.teacher_action;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace motionkit
