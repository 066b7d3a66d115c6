#include "framecast/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "framecast/error.hpp"

namespace framecast::telemetry {

double bin_lower_edge(int index) {
  require(index >= 0 && index < kBinCount, "invalid_input",
          "bin_lower_edge: index out of range");
  if (index == 0) return 0.0;
  if (index <= 38) return 10.0 + 5.0 * (index - 1);
  if (index == 39) return 200.0;
  if (index == 40) return 300.0;
  return 400.0;
}

double bin_upper_edge(int index) {
  require(index >= 0 && index < kBinCount, "invalid_input",
          "bin_upper_edge: index out of range");
  if (index == kBinCount - 1) return std::numeric_limits<double>::infinity();
  return bin_lower_edge(index + 1);
}

int bin_index(double fps) {
  require(std::isfinite(fps) && fps >= 0.0, "invalid_input",
          "bin_index: fps must be finite and non-negative");
  if (fps < 10.0) return 0;
  if (fps < 200.0) return 1 + static_cast<int>((fps - 10.0) / 5.0);
  if (fps < 300.0) return 39;
  if (fps < 400.0) return 40;
  return 41;
}

std::int64_t FpsHistogram42::total() const {
  std::int64_t t = 0;
  for (std::int64_t c : counts) t += c;
  return t;
}

void FpsHistogram42::add(const FpsHistogram42& other) {
  for (int i = 0; i < kBinCount; ++i) counts[i] += other.counts[i];
}

int class_of_bin(int bin) {
  require(bin >= 0 && bin < kBinCount, "invalid_input", "class_of_bin: bad bin");
  double lo = bin_lower_edge(bin);
  int c = 0;
  for (double t : kClassThresholdsHz) {
    if (lo >= t) ++c;
  }
  return c;
}

std::array<std::int64_t, kClassCount> aggregate_to_classes(const FpsHistogram42& h) {
  std::array<std::int64_t, kClassCount> out{};
  for (int i = 0; i < kBinCount; ++i) out[class_of_bin(i)] += h.counts[i];
  return out;
}

double fps_floor_95(const FpsHistogram42& h) {
  for (std::int64_t c : h.counts) {
    require(c >= 0, "invalid_input", "fps_floor_95: negative bin count");
  }
  std::int64_t total = h.total();
  require(total > 0, "empty_histogram", "fps_floor_95: empty histogram");
  std::int64_t cum = 0;
  for (int i = 0; i < kBinCount; ++i) {
    cum += h.counts[i];
    // cum/total >= 0.05 without division: 20*cum >= total.
    if (20 * cum >= total) {
      if (i == 0) return 5.0;
      return bin_lower_edge(i);
    }
  }
  return bin_lower_edge(kBinCount - 1);  // unreachable with total > 0
}

void ClassDistribution::validate() const {
  require(!probs.empty(), "invalid_input", "distribution: empty");
  double sum = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, "invalid_input",
            "distribution: entries must be finite and non-negative");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "invalid_input",
          "distribution: probabilities must sum to 1");
}

ClassDistribution ClassDistribution::from_counts(const std::vector<std::int64_t>& counts) {
  require(!counts.empty(), "invalid_input", "from_counts: empty");
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    require(c >= 0, "invalid_input", "from_counts: negative count");
    total += c;
  }
  require(total > 0, "empty_histogram", "from_counts: zero total");
  ClassDistribution d;
  d.probs.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    d.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return d;
}

ClassDistribution ClassDistribution::uniform(int k) {
  require(k > 0, "invalid_input", "uniform: k must be positive");
  ClassDistribution d;
  d.probs.assign(static_cast<std::size_t>(k), 1.0 / k);
  return d;
}

std::vector<SessionRecord> filter_sessions(std::vector<SessionRecord> sessions) {
  std::vector<SessionRecord> kept;
  kept.reserve(sessions.size());
  for (auto& s : sessions) {
    require(std::isfinite(s.duration_s) && s.duration_s >= 0.0, "invalid_input",
            "filter_sessions: bad duration");
    if (s.duration_s >= kMinSessionDurationS) kept.push_back(std::move(s));
  }
  std::unordered_map<std::string, int> per_player;
  for (const auto& s : kept) ++per_player[s.player_guid];
  std::vector<SessionRecord> out;
  out.reserve(kept.size());
  for (auto& s : kept) {
    if (per_player[s.player_guid] >= kMinSessionsPerPlayer) out.push_back(std::move(s));
  }
  return out;
}

std::string categorical_mode(const std::vector<std::string>& values) {
  require(!values.empty(), "invalid_input", "categorical_mode: empty");
  // std::map keeps candidates ordered, which gives the lexicographic tie-break.
  std::map<std::string, int> freq;
  for (const auto& v : values) ++freq[v];
  const std::string* best = nullptr;
  int best_n = 0;
  for (const auto& [v, n] : freq) {
    if (n > best_n) {
      best = &v;
      best_n = n;
    }
  }
  return *best;
}

PairSessions merge_to_pair(const std::vector<SessionRecord>& sessions) {
  require(!sessions.empty(), "invalid_input", "merge_to_pair: no sessions");
  const std::string& guid = sessions.front().player_guid;
  const std::string& game = sessions.front().game_id;
  for (const auto& s : sessions) {
    require(s.player_guid == guid && s.game_id == game, "key_mismatch",
            "merge_to_pair: sessions span multiple player-game pairs");
  }
  PairSessions p;
  p.player_guid = guid;
  p.game_id = game;
  p.session_count = static_cast<std::int64_t>(sessions.size());
  std::vector<std::string> wm, gm;
  wm.reserve(sessions.size());
  gm.reserve(sessions.size());
  double fps_sum = 0.0;
  for (const auto& s : sessions) {
    p.hist.add(s.hist);
    fps_sum += s.avg_fps;
    wm.push_back(s.windowed_mode);
    gm.push_back(s.game_mode_on);
  }
  p.avg_fps = fps_sum / static_cast<double>(sessions.size());
  p.windowed_mode = categorical_mode(wm);
  p.game_mode_on = categorical_mode(gm);
  return p;
}

}  // namespace framecast::telemetry
