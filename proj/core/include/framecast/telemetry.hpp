#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace framecast::telemetry {

// FPS histogram layout, closed below and open above:
//   bin 0      [0, 10)
//   bin i      [10 + 5(i-1), 10 + 5i)   for 1 <= i <= 38
//   bin 39     [200, 300)
//   bin 40     [300, 400)
//   bin 41     [400, inf)
inline constexpr int kBinCount = 42;

// Coarse playability classes split at these rates (Hz). Each threshold lands
// exactly on a bin edge, so aggregation never splits a bin.
inline constexpr int kClassCount = 5;
inline constexpr std::array<double, 4> kClassThresholdsHz = {25.0, 45.0, 60.0, 145.0};

double bin_lower_edge(int index);   // inclusive
double bin_upper_edge(int index);   // exclusive; +inf for the last bin
int bin_index(double fps);          // fps must be finite and >= 0

struct FpsHistogram42 {
  std::array<std::int64_t, kBinCount> counts{};

  std::int64_t total() const;
  void add_sample(double fps) { ++counts[static_cast<std::size_t>(bin_index(fps))]; }
  void add(const FpsHistogram42& other);
};

// Bin count sums per class; lossless (total mass preserved).
std::array<std::int64_t, kClassCount> aggregate_to_classes(const FpsHistogram42& h);

// Which class a given bin belongs to.
int class_of_bin(int bin);

// Lower edge of the first bin where the cumulative count fraction reaches
// 0.05; by construction 95% of samples fall at or above the returned rate.
// Representative values: 5.0 for bin 0 (its midpoint), 400.0 for bin 41.
// Empty histogram is an error (code empty_histogram).
double fps_floor_95(const FpsHistogram42& h);

// Probability vector over k outcomes. Sum is 1 within 1e-9; entries >= 0.
struct ClassDistribution {
  std::vector<double> probs;

  int k() const { return static_cast<int>(probs.size()); }
  void validate() const;
  static ClassDistribution from_counts(const std::vector<std::int64_t>& counts);
  static ClassDistribution uniform(int k);
};

// One telemetry session. windowed_mode is one of Window/Full/Unknown;
// game_mode_on is "true"/"false"/"unknown".
struct SessionRecord {
  std::string player_guid;
  std::string game_id;
  double duration_s = 0.0;
  std::string windowed_mode = "Unknown";
  std::string game_mode_on = "unknown";
  FpsHistogram42 hist;
  double avg_fps = 0.0;
};

inline constexpr double kMinSessionDurationS = 300.0;
inline constexpr int kMinSessionsPerPlayer = 18;

// Drops sessions shorter than 5 minutes, then drops every session of any
// player left with fewer than 18 sessions (18 itself survives). Relative
// order is preserved. Both passes in one call; the player threshold is
// applied to the post-duration-filter counts.
std::vector<SessionRecord> filter_sessions(std::vector<SessionRecord> sessions);

// Session-derived slice of a player-game pair: histograms are summed,
// avg_fps is the unweighted mean over sessions, categorical settings take
// the mode with ties broken toward the lexicographically smallest value.
struct PairSessions {
  std::string player_guid;
  std::string game_id;
  std::string windowed_mode;
  std::string game_mode_on;
  double avg_fps = 0.0;
  FpsHistogram42 hist;
  std::int64_t session_count = 0;
};

PairSessions merge_to_pair(const std::vector<SessionRecord>& sessions);

// Mode with lexicographic tie-break; exposed for reuse and direct testing.
std::string categorical_mode(const std::vector<std::string>& values);

}  // namespace framecast::telemetry
