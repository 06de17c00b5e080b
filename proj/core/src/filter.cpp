#include "motionkit/filter.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "motionkit/error.hpp"

namespace motionkit {

double Clip::mean_length() const {
  if (episode_lengths.empty()) throw ValidationError("clip '" + id + "' has no episode lengths");
  return std::accumulate(episode_lengths.begin(), episode_lengths.end(), 0.0) /
         static_cast<double>(episode_lengths.size());
}

FilterState FilterState::from_clips(std::vector<Clip> clips) {
  if (clips.empty()) throw ValidationError("filter: no clips");
  std::set<std::string> ids;
  for (const Clip& c : clips) {
    if (!ids.insert(c.id).second) throw ValidationError("filter: duplicate clip id '" + c.id + "'");
    (void)c.mean_length();
  }
  FilterState s;
  s.clips = std::move(clips);
  s.removed.assign(s.clips.size(), false);
  s.sigma = retained_sigma(s);
  s.sigma_trace.push_back(s.sigma);
  return s;
}

std::vector<std::string> FilterState::retained_ids() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < clips.size(); ++i)
    if (!removed[i]) out.push_back(clips[i].id);
  return out;
}

std::size_t FilterState::retained_count() const {
  return static_cast<std::size_t>(std::count(removed.begin(), removed.end(), false));
}

double retained_sigma(const FilterState& state) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < state.clips.size(); ++i) {
    if (state.removed[i]) continue;
    sum += state.clips[i].mean_length();
    ++n;
  }
  if (n == 0) throw ValidationError("filter: no retained clips");
  return sum / static_cast<double>(n);
}

FilterState filter_step(FilterState state) {
  const double sigma = retained_sigma(state);
  std::vector<std::size_t> drop;
  for (std::size_t i = 0; i < state.clips.size(); ++i) {
    if (!state.removed[i] && state.clips[i].mean_length() < sigma) drop.push_back(i);
  }
  // the longest clip is never below the mean
  if (drop.size() == state.retained_count()) throw Error("filter: step would remove every clip");
  for (std::size_t i : drop) {
    state.removed[i] = true;
    state.removal_order.push_back(state.clips[i].id);
  }
  state.sigma = retained_sigma(state);
  ++state.iteration;
  if (drop.empty()) {
    state.converged = true;
  } else {
    state.sigma_trace.push_back(state.sigma);
  }
  return state;
}

FilterState filter_until_converged(FilterState state) {
  const std::size_t limit = state.clips.size() + 1;
  for (std::size_t k = 0; !state.converged; ++k) {
    if (k >= limit) throw Error("filter: failed to converge");
    state = filter_step(std::move(state));
  }
  return state;
}

std::vector<Clip> parse_clip_stats(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("clip stats: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("clip stats: expected an object {id: [lengths]}");
  std::vector<Clip> clips;
  for (const auto& [id, lengths] : doc.items()) {
    if (!lengths.is_array()) throw ParseError("clip stats['" + id + "']: expected an array of lengths");
    Clip c{id, {}};
    for (const auto& l : lengths) {
      if (!l.is_number() || l.get<double>() < 0.0) {
        throw ParseError("clip stats['" + id + "']: lengths must be non-negative numbers");
      }
      c.episode_lengths.push_back(l.get<double>());
    }
    clips.push_back(std::move(c));
  }
  return clips;
}

std::string filter_report_json(const FilterState& state) {
  nlohmann::ordered_json doc;
  doc["retained"] = state.retained_ids();
  doc["removed"] = state.removal_order;
  doc["sigma_trace"] = state.sigma_trace;
  doc["sigma"] = state.sigma;
  doc["iterations"] = state.iteration;
  doc["converged"] = state.converged;
  return doc.dump(2) + "\n";
}

}  // namespace motionkit
