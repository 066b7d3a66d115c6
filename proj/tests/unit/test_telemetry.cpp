#include <doctest.h>

#include <cmath>
#include <limits>

#include <framecast/error.hpp>
#include <framecast/telemetry.hpp>

using namespace framecast;
using telemetry::FpsHistogram42;

TEST_SUITE("telemetry") {

TEST_CASE("bin_index pinned values") {
  CHECK(telemetry::bin_index(0.0) == 0);
  CHECK(telemetry::bin_index(7.0) == 0);
  CHECK(telemetry::bin_index(9.999) == 0);
  CHECK(telemetry::bin_index(10.0) == 1);
  CHECK(telemetry::bin_index(14.999) == 1);
  CHECK(telemetry::bin_index(15.0) == 2);
  CHECK(telemetry::bin_index(62.5) == 11);   // [60, 65)
  CHECK(telemetry::bin_index(199.999) == 38);
  CHECK(telemetry::bin_index(200.0) == 39);
  CHECK(telemetry::bin_index(299.9) == 39);
  CHECK(telemetry::bin_index(300.0) == 40);
  CHECK(telemetry::bin_index(399.9) == 40);
  CHECK(telemetry::bin_index(400.0) == 41);
  CHECK(telemetry::bin_index(450.0) == 41);
  CHECK(telemetry::bin_index(1e9) == 41);
}

TEST_CASE("bin_index rejects bad input") {
  CHECK_THROWS_AS(telemetry::bin_index(-1.0), Error);
  CHECK_THROWS_AS(telemetry::bin_index(std::numeric_limits<double>::quiet_NaN()), Error);
  CHECK_THROWS_AS(telemetry::bin_index(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("bin edges partition the axis") {
  // Every bin's upper edge is the next bin's lower edge, no gaps or overlap.
  CHECK(telemetry::bin_lower_edge(0) == 0.0);
  for (int i = 0; i + 1 < telemetry::kBinCount; ++i) {
    CHECK(telemetry::bin_upper_edge(i) == telemetry::bin_lower_edge(i + 1));
    CHECK(telemetry::bin_lower_edge(i) < telemetry::bin_upper_edge(i));
  }
  CHECK(telemetry::bin_lower_edge(39) == 200.0);
  CHECK(telemetry::bin_lower_edge(40) == 300.0);
  CHECK(telemetry::bin_lower_edge(41) == 400.0);
  CHECK(std::isinf(telemetry::bin_upper_edge(41)));
}

TEST_CASE("sweep: every rate lands in exactly the bin whose range contains it") {
  for (double fps = 0.0; fps <= 500.0; fps += 0.5) {
    int b = telemetry::bin_index(fps);
    CHECK(telemetry::bin_lower_edge(b) <= fps);
    CHECK(fps < telemetry::bin_upper_edge(b));
  }
}

TEST_CASE("class layout: 4+4+3+17+14 bins, thresholds on edges") {
  std::array<int, telemetry::kClassCount> per_class{};
  for (int b = 0; b < telemetry::kBinCount; ++b) {
    int c = telemetry::class_of_bin(b);
    REQUIRE(c >= 0);
    REQUIRE(c < telemetry::kClassCount);
    ++per_class[static_cast<std::size_t>(c)];
    // Classes are contiguous and ordered.
    if (b > 0) CHECK(telemetry::class_of_bin(b - 1) <= c);
  }
  CHECK(per_class[0] == 4);
  CHECK(per_class[1] == 4);
  CHECK(per_class[2] == 3);
  CHECK(per_class[3] == 17);
  CHECK(per_class[4] == 14);
  // Each split rate is itself some bin's lower edge.
  for (double t : telemetry::kClassThresholdsHz) {
    int b = telemetry::bin_index(t);
    CHECK(telemetry::bin_lower_edge(b) == t);
    // And the bin right below belongs to the previous class.
    CHECK(telemetry::class_of_bin(b) == telemetry::class_of_bin(b - 1) + 1);
  }
}

TEST_CASE("aggregate_to_classes conserves mass") {
  FpsHistogram42 h;
  // Spread arbitrary counts.
  for (int b = 0; b < telemetry::kBinCount; ++b)
    h.counts[static_cast<std::size_t>(b)] = 3 * b + 1;
  auto classes = telemetry::aggregate_to_classes(h);
  std::int64_t total = 0;
  for (auto c : classes) total += c;
  CHECK(total == h.total());
  // Spot value: class 0 sums bins 0..3.
  CHECK(classes[0] == 1 + 4 + 7 + 10);
}

TEST_CASE("fps_floor_95 pinned examples") {
  // 5 samples in bin 1, 95 in bin 10: the first 5% of mass already sits in
  // bin 1, so the floor is bin 1's lower edge.
  FpsHistogram42 a;
  a.counts[1] = 5;
  a.counts[10] = 95;
  CHECK(telemetry::fps_floor_95(a) == 10.0);

  // 4 in bin 1, 96 in bin 10: bin 1 holds only 4% of the mass; the 5th
  // percentile falls inside bin 10 ([55, 60)).
  FpsHistogram42 b;
  b.counts[1] = 4;
  b.counts[10] = 96;
  CHECK(telemetry::fps_floor_95(b) == 55.0);

  // All mass in the catch-all bins.
  FpsHistogram42 c;
  c.counts[0] = 7;
  CHECK(telemetry::fps_floor_95(c) == 5.0);  // bin 0 reports its midpoint
  FpsHistogram42 d;
  d.counts[41] = 12;
  CHECK(telemetry::fps_floor_95(d) == 400.0);
}

TEST_CASE("fps_floor_95 single sample and empty") {
  FpsHistogram42 h;
  h.add_sample(72.0);
  CHECK(telemetry::fps_floor_95(h) == 70.0);  // bin [70, 75)
  FpsHistogram42 empty;
  CHECK_THROWS_AS(telemetry::fps_floor_95(empty), Error);
}

TEST_CASE("fps_floor_95 exact 5% boundary uses that bin") {
  // 1 of 20 samples = exactly 5% cumulative in the first occupied bin.
  FpsHistogram42 h;
  h.counts[3] = 1;
  h.counts[20] = 19;
  CHECK(telemetry::fps_floor_95(h) == 20.0);  // bin 3 = [20, 25)
}

static telemetry::SessionRecord make_session(const std::string& player,
                                             const std::string& game,
                                             double duration, double fps) {
  telemetry::SessionRecord s;
  s.player_guid = player;
  s.game_id = game;
  s.duration_s = duration;
  s.hist.add_sample(fps);
  s.avg_fps = fps;
  return s;
}

TEST_CASE("filter_sessions drops short sessions then thin players") {
  std::vector<telemetry::SessionRecord> sessions;
  // Player A: 18 long sessions plus one short -> short dropped, rest kept.
  for (int i = 0; i < 18; ++i) sessions.push_back(make_session("A", "g", 400.0, 60.0));
  sessions.push_back(make_session("A", "g", 299.9, 60.0));
  // Player B: 18 sessions but one is short, leaving 17 -> all of B dropped.
  for (int i = 0; i < 17; ++i) sessions.push_back(make_session("B", "g", 400.0, 60.0));
  sessions.push_back(make_session("B", "g", 100.0, 60.0));
  // Player C: exactly 18 sessions at exactly the duration cut -> kept.
  for (int i = 0; i < 18; ++i) sessions.push_back(make_session("C", "g", 300.0, 60.0));

  auto kept = telemetry::filter_sessions(sessions);
  std::size_t a = 0, b = 0, c = 0;
  for (const auto& s : kept) {
    if (s.player_guid == "A") ++a;
    if (s.player_guid == "B") ++b;
    if (s.player_guid == "C") ++c;
  }
  CHECK(a == 18);
  CHECK(b == 0);
  CHECK(c == 18);
  CHECK(kept.size() == 36);
}

TEST_CASE("filter_sessions preserves relative order") {
  std::vector<telemetry::SessionRecord> sessions;
  for (int i = 0; i < 20; ++i) {
    auto s = make_session("A", "g", 400.0, 30.0 + i);
    sessions.push_back(s);
  }
  auto kept = telemetry::filter_sessions(sessions);
  REQUIRE(kept.size() == 20);
  for (int i = 1; i < 20; ++i) CHECK(kept[size_t(i)].avg_fps > kept[size_t(i - 1)].avg_fps);
}

TEST_CASE("merge_to_pair sums hists, averages avg_fps, takes the mode") {
  std::vector<telemetry::SessionRecord> sessions;
  auto s1 = make_session("p", "g", 400.0, 40.0);
  s1.windowed_mode = "Full";
  s1.game_mode_on = "true";
  auto s2 = make_session("p", "g", 500.0, 60.0);
  s2.windowed_mode = "Window";
  s2.game_mode_on = "false";
  auto s3 = make_session("p", "g", 600.0, 50.0);
  s3.windowed_mode = "Full";
  s3.game_mode_on = "unknown";
  sessions = {s1, s2, s3};

  auto pair = telemetry::merge_to_pair(sessions);
  CHECK(pair.player_guid == "p");
  CHECK(pair.game_id == "g");
  CHECK(pair.session_count == 3);
  CHECK(pair.hist.total() == 3);
  CHECK(pair.avg_fps == doctest::Approx(50.0));  // unweighted mean of 40/60/50
  CHECK(pair.windowed_mode == "Full");           // 2 of 3
  // game_mode_on is a three-way tie -> lexicographically smallest.
  CHECK(pair.game_mode_on == "false");
}

TEST_CASE("categorical_mode tie-break is lexicographic") {
  CHECK(telemetry::categorical_mode({"b", "a"}) == "a");
  CHECK(telemetry::categorical_mode({"b", "b", "a"}) == "b");
  CHECK(telemetry::categorical_mode({"Window", "Full"}) == "Full");
  CHECK_THROWS_AS(telemetry::categorical_mode({}), Error);
}

TEST_CASE("merge_to_pair rejects mixed pairs") {
  auto s1 = make_session("p", "g1", 400.0, 40.0);
  auto s2 = make_session("p", "g2", 400.0, 40.0);
  CHECK_THROWS_AS(telemetry::merge_to_pair({s1, s2}), Error);
  CHECK_THROWS_AS(telemetry::merge_to_pair({}), Error);
}

TEST_CASE("ClassDistribution validate and from_counts") {
  auto u = telemetry::ClassDistribution::uniform(5);
  u.validate();
  CHECK(u.k() == 5);
  CHECK(u.probs[0] == doctest::Approx(0.2));

  auto d = telemetry::ClassDistribution::from_counts({1, 3, 0, 0, 0});
  CHECK(d.probs[0] == doctest::Approx(0.25));
  CHECK(d.probs[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(telemetry::ClassDistribution::from_counts({0, 0}), Error);

  telemetry::ClassDistribution bad;
  bad.probs = {0.5, 0.6};
  CHECK_THROWS_AS(bad.validate(), Error);
}

}  // TEST_SUITE
