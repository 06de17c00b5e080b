#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace motionkit {

struct Clip {
  std::string id;
  std::vector<double> episode_lengths;  // frames

  double mean_length() const;
};

// Train-to-filter curation state. Clips whose mean episode length falls
// strictly below sigma (the mean over retained clips) are removed; removal
// is permanent.
struct FilterState {
  std::vector<Clip> clips;
  std::vector<bool> removed;              // parallel to clips
  std::vector<std::string> removal_order;  // ids, in the order they were dropped
  double sigma = 0.0;
  int iteration = 0;
  bool converged = false;
  // sigma of the initial corpus, then sigma after every step that removed clips
  std::vector<double> sigma_trace;

  static FilterState from_clips(std::vector<Clip> clips);
  std::vector<std::string> retained_ids() const;
  std::size_t retained_count() const;
};

// Mean over retained clips of their mean episode length.
double retained_sigma(const FilterState& state);

FilterState filter_step(FilterState state);

// Repeats filter_step until a step removes nothing. A state that is already
// converged is returned as is.
FilterState filter_until_converged(FilterState state);

// {"clip_id": [lengths, ...], ...}
std::vector<Clip> parse_clip_stats(const std::string& json_text);
std::string filter_report_json(const FilterState& state);

}  // namespace motionkit
