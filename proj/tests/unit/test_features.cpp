#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include <framecast/error.hpp>
#include <framecast/features.hpp>
#include <framecast/rng.hpp>

using namespace framecast;
using features::RawPair;
using features::Value;
namespace fs = std::filesystem;

// Rows only need the fields a test cares about; everything else counts as
// missing and is either dropped (numeric never observed) or skipped (empty
// vocabulary).
static RawPair make_row(double ram, const std::string& os,
                        const std::vector<std::string>& genres) {
  RawPair r;
  r.player_guid = "p";
  r.game_id = "g";
  r.fields["ram_gb"] = ram;
  if (!os.empty()) r.fields["os"] = os;
  if (!genres.empty()) r.fields["genres"] = genres;
  r.class_counts = {1, 0, 0, 0, 0};
  r.bins[0] = 1;
  r.floor_hz = 5.0;
  return r;
}

static const features::FieldEncoding& field_of(const features::EncodingSchema& s,
                                               const std::string& name) {
  for (const auto& f : s.fields)
    if (f.name == name) return f;
  REQUIRE(false);
  static features::FieldEncoding dummy;
  return dummy;
}

TEST_SUITE("features") {

TEST_CASE("median fill uses observed values only") {
  std::vector<RawPair> rows = {
      make_row(1.0, "", {}), make_row(2.0, "", {}), make_row(100.0, "", {})};
  RawPair missing;
  missing.player_guid = "p4";
  missing.game_id = "g";
  rows.push_back(missing);

  auto schema = features::fit_schema(rows);
  const auto& f = field_of(schema, "ram_gb");
  CHECK(f.num.median == doctest::Approx(2.0));

  // The missing row encodes at the median, which z-scores near zero (the
  // median pulls the post-fill mean toward itself).
  auto enc = features::encode(rows[3], schema);
  double filled = enc[f.offset];
  auto enc1 = features::encode(rows[0], schema);
  CHECK(filled * (1.0 - 2.0 - f.num.mean) <= 0.0);  // fill sits between observations
  CHECK(std::isfinite(enc1[f.offset]));
}

TEST_CASE("constant numeric feature is dropped and listed") {
  std::vector<RawPair> rows = {make_row(8.0, "", {}), make_row(8.0, "", {}),
                               make_row(8.0, "", {})};
  auto schema = features::fit_schema(rows);
  const auto& f = field_of(schema, "ram_gb");
  CHECK(f.dropped);
  CHECK(f.width == 0);
  bool listed = false;
  for (const auto& name : schema.dropped) listed |= name == "ram_gb";
  CHECK(listed);
  auto enc = features::encode(rows[0], schema);
  CHECK(enc.size() == schema.width);
}

TEST_CASE("categorical vocabulary keeps first-observed order") {
  std::vector<RawPair> rows = {make_row(1, "beta", {}), make_row(2, "alpha", {}),
                               make_row(3, "beta", {})};
  auto schema = features::fit_schema(rows);
  const auto& f = field_of(schema, "os");
  REQUIRE(f.vocab.size() == 2);
  CHECK(f.vocab[0] == "beta");
  CHECK(f.vocab[1] == "alpha");

  auto enc = features::encode(rows[1], schema);
  CHECK(enc[f.offset] == 0.0);
  CHECK(enc[f.offset + 1] == 1.0);
}

TEST_CASE("missing categorical encodes as 0.5 per slot, unseen as zeros") {
  std::vector<RawPair> rows = {make_row(1, "win", {}), make_row(2, "mac", {}),
                               make_row(3, "linux", {})};
  auto schema = features::fit_schema(rows);
  const auto& f = field_of(schema, "os");
  REQUIRE(f.width == 3);

  RawPair miss = make_row(1.5, "", {});
  auto enc_miss = features::encode(miss, schema);
  for (std::size_t i = 0; i < 3; ++i) CHECK(enc_miss[f.offset + i] == 0.5);

  RawPair unseen = make_row(1.5, "beos", {});
  auto enc_unseen = features::encode(unseen, schema);
  for (std::size_t i = 0; i < 3; ++i) CHECK(enc_unseen[f.offset + i] == 0.0);

  // Observed one-hot sums to exactly 1.
  auto enc_hit = features::encode(rows[0], schema);
  double sum = enc_hit[f.offset] + enc_hit[f.offset + 1] + enc_hit[f.offset + 2];
  CHECK(sum == 1.0);
}

TEST_CASE("tag lists multi-hot with the same missing and unseen rules") {
  std::vector<RawPair> rows = {make_row(1, "", {"rpg", "shooter"}),
                               make_row(2, "", {"puzzle"}),
                               make_row(3, "", {"rpg"})};
  auto schema = features::fit_schema(rows);
  const auto& f = field_of(schema, "genres");
  REQUIRE(f.vocab.size() == 3);  // rpg, shooter, puzzle in first-observed order
  CHECK(f.vocab[0] == "rpg");
  CHECK(f.vocab[1] == "shooter");
  CHECK(f.vocab[2] == "puzzle");

  auto enc = features::encode(rows[0], schema);
  CHECK(enc[f.offset] == 1.0);
  CHECK(enc[f.offset + 1] == 1.0);
  CHECK(enc[f.offset + 2] == 0.0);

  RawPair miss = make_row(1, "", {});
  auto enc_miss = features::encode(miss, schema);
  for (std::size_t i = 0; i < 3; ++i) CHECK(enc_miss[f.offset + i] == 0.5);

  RawPair unseen = make_row(1, "", {"sandbox"});
  auto enc_unseen = features::encode(unseen, schema);
  for (std::size_t i = 0; i < 3; ++i) CHECK(enc_unseen[f.offset + i] == 0.0);
}

TEST_CASE("value equal to the training mean encodes to zero") {
  std::vector<RawPair> rows = {make_row(4, "", {}), make_row(8, "", {}),
                               make_row(12, "", {})};
  auto schema = features::fit_schema(rows);
  const auto& f = field_of(schema, "ram_gb");
  RawPair at_mean = make_row(f.num.mean, "", {});
  auto enc = features::encode(at_mean, schema);
  CHECK(enc[f.offset] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("re-encoded training split has zero mean and unit stddev") {
  // Mixed observed/missing numerics: the invariant holds because moments are
  // taken over the median-filled column.
  RandomStream rng(17, "feat");
  std::vector<RawPair> rows;
  for (int i = 0; i < 40; ++i) {
    RawPair r;
    r.player_guid = "p" + std::to_string(i);
    r.game_id = "g";
    if (i % 5 != 0) r.fields["ram_gb"] = rng.uniform(2.0, 64.0);
    r.fields["cpu_cores"] = double(2 + (i % 7) * 2);
    if (i % 3 != 0) r.fields["rating"] = rng.uniform(50.0, 95.0);
    r.fields["os"] = i % 2 == 0 ? "win" : "mac";
    rows.push_back(r);
  }
  auto schema = features::fit_schema(rows);
  for (const char* name : {"ram_gb", "cpu_cores", "rating"}) {
    const auto& f = field_of(schema, name);
    REQUIRE(!f.dropped);
    double sum = 0.0, sq = 0.0;
    for (const auto& r : rows) {
      double v = features::encode(r, schema)[f.offset];
      sum += v;
      sq += v * v;
    }
    double mean = sum / double(rows.size());
    double var = sq / double(rows.size()) - mean * mean;
    CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("fit_schema needs two rows; encode rejects non-finite numerics") {
  CHECK_THROWS_AS(features::fit_schema({make_row(1, "", {})}), Error);
  std::vector<RawPair> rows = {make_row(1, "", {}), make_row(2, "", {})};
  auto schema = features::fit_schema(rows);
  RawPair bad = make_row(std::nan(""), "", {});
  CHECK_THROWS_AS(features::encode(bad, schema), Error);
}

TEST_CASE("schema JSON round-trip preserves the encoding and the hash") {
  std::vector<RawPair> rows = {make_row(1, "win", {"rpg"}),
                               make_row(2, "mac", {"puzzle"}),
                               make_row(4, "win", {})};
  auto schema = features::fit_schema(rows);
  auto text = schema.to_json();
  auto back = features::EncodingSchema::from_json(text);
  CHECK(back.width == schema.width);
  CHECK(back.hash_hex() == schema.hash_hex());
  auto e1 = features::encode(rows[0], schema);
  auto e2 = features::encode(rows[0], back);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i] == e2[i]);

  // The hash tracks content.
  auto other = features::fit_schema({make_row(10, "win", {}), make_row(20, "mac", {})});
  CHECK(other.hash_hex() != schema.hash_hex());
}

TEST_CASE("split_pairs arithmetic, determinism, and errors") {
  auto s = features::split_pairs(10, 0.8, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.val.size() == 2);

  auto s2 = features::split_pairs(10, 0.8, 1);
  CHECK(s.train == s2.train);
  CHECK(s.val == s2.val);

  auto s3 = features::split_pairs(10, 0.8, 2);
  CHECK(s.train != s3.train);

  // Disjoint and exhaustive.
  std::set<std::size_t> seen;
  for (auto i : s.train) seen.insert(i);
  for (auto i : s.val) seen.insert(i);
  CHECK(seen.size() == 10);

  // Extreme ratios still leave at least one row on each side.
  auto s4 = features::split_pairs(10, 0.999, 1);
  CHECK(s4.val.size() == 1);
  auto s5 = features::split_pairs(10, 0.001, 1);
  CHECK(s5.train.size() == 1);

  CHECK_THROWS_AS(features::split_pairs(1, 0.8, 1), Error);
  CHECK_THROWS_AS(features::split_pairs(10, 1.0, 1), Error);
  CHECK_THROWS_AS(features::split_pairs(10, 0.0, 1), Error);
}

TEST_CASE("EncodedPair target for 5 classes and 42 bins") {
  features::EncodedPair p;
  p.class_counts = {1, 1, 0, 2, 0};
  p.bins[0] = 1;
  p.bins[5] = 1;
  p.bins[20] = 2;
  auto t5 = p.target(5);
  CHECK(t5.k() == 5);
  CHECK(t5.probs[0] == doctest::Approx(0.25));
  CHECK(t5.probs[3] == doctest::Approx(0.5));
  auto t42 = p.target(42);
  CHECK(t42.k() == 42);
  CHECK(t42.probs[20] == doctest::Approx(0.5));
  CHECK_THROWS_AS(p.target(7), Error);
}

TEST_CASE("pairs jsonl round-trip") {
  fs::path dir = fs::temp_directory_path() / "framecast_feat_jsonl";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::vector<features::EncodedPair> pairs(2);
  pairs[0].player_guid = "p1";
  pairs[0].game_id = "g1";
  pairs[0].session_count = 3;
  pairs[0].avg_fps = 58.25;
  pairs[0].windowed_mode = "Full";
  pairs[0].game_mode_on = "true";
  pairs[0].bins[7] = 2;
  pairs[0].class_counts = {0, 2, 0, 0, 0};
  pairs[0].floor_hz = 40.0;
  pairs[0].features = {0.25, -1.5, 0.0};
  pairs[1] = pairs[0];
  pairs[1].player_guid = "p2";
  pairs[1].features = {1.0, 2.0, 3.0};

  features::write_pairs_jsonl(dir / "pairs.jsonl", pairs);
  auto back = features::load_pairs_jsonl(dir / "pairs.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].player_guid == "p1");
  CHECK(back[0].avg_fps == pairs[0].avg_fps);
  CHECK(back[0].features == pairs[0].features);
  CHECK(back[0].bins == pairs[0].bins);
  CHECK(back[0].class_counts == pairs[0].class_counts);
  CHECK(back[1].features == pairs[1].features);
  fs::remove_all(dir);
}

TEST_CASE("build_raw_pairs filters, merges, and joins") {
  // Two players on one game; one too-short session must vanish, and player
  // "b" has too few sessions overall so the whole player drops out.
  std::vector<telemetry::SessionRecord> sessions;
  for (int i = 0; i < 18; ++i) {
    telemetry::SessionRecord s;
    s.player_guid = "a";
    s.game_id = "g1";
    s.duration_s = 1000.0;
    s.hist.add_sample(60.0);
    s.avg_fps = 60.0;
    sessions.push_back(s);
  }
  telemetry::SessionRecord shorty = sessions.front();
  shorty.duration_s = 10.0;
  sessions.push_back(shorty);
  telemetry::SessionRecord b;
  b.player_guid = "b";
  b.game_id = "g1";
  b.duration_s = 1000.0;
  b.hist.add_sample(30.0);
  sessions.push_back(b);

  features::Record player_a;
  player_a.id = "a";
  player_a.fields["ram_gb"] = 16.0;
  features::Record player_b;
  player_b.id = "b";
  features::Record game;
  game.id = "g1";
  game.fields["rating"] = 80.0;

  features::RawBuildStats stats;
  auto pairs = features::build_raw_pairs(sessions, {player_a, player_b}, {game}, &stats);
  REQUIRE(pairs.size() == 1);
  CHECK(stats.sessions_in == 20);
  CHECK(stats.sessions_kept == 18);
  CHECK(stats.pairs_built == 1);
  CHECK(pairs[0].player_guid == "a");
  CHECK(pairs[0].session_count == 18);
  CHECK(std::get<double>(pairs[0].fields.at("ram_gb")) == 16.0);
  CHECK(std::get<double>(pairs[0].fields.at("rating")) == 80.0);
  CHECK(pairs[0].floor_hz == 60.0);
  CHECK(pairs[0].class_counts[2] == 18);  // 60 Hz sits in the third class

  // Sessions referencing an absent player or game are an error.
  telemetry::SessionRecord ghost = sessions.front();
  ghost.player_guid = "zzz";
  std::vector<telemetry::SessionRecord> bad(18, ghost);
  CHECK_THROWS_AS(features::build_raw_pairs(bad, {player_a}, {game}, nullptr), Error);
}

}  // TEST_SUITE
