#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "framecast/telemetry.hpp"

namespace framecast::features {

enum class FieldKind { Numeric, Categorical, Tags };

struct FieldDef {
  std::string name;
  FieldKind kind;
};

// Canonical encoding order is player fields, then game fields, then the
// pair's merged session settings. Names are globally unique.
const std::vector<FieldDef>& player_fields();
const std::vector<FieldDef>& game_fields();
const std::vector<FieldDef>& pair_fields();

// A field value: missing, a number, a category label, or a tag list.
using Value = std::variant<std::monostate, double, std::string, std::vector<std::string>>;

inline bool is_missing(const Value& v) {
  return std::holds_alternative<std::monostate>(v);
}

// One player or game row: id plus field values keyed by field name.
struct Record {
  std::string id;
  std::map<std::string, Value> fields;
};

struct CountryRow {
  std::string country;
  double gdp_per_capita_usd = 0.0;
  double gini = 0.0;
};

std::vector<Record> load_players_csv(const std::filesystem::path& path);
std::vector<Record> load_games_csv(const std::filesystem::path& path);
std::vector<CountryRow> load_countries_csv(const std::filesystem::path& path);

std::vector<telemetry::SessionRecord> load_sessions_jsonl(const std::filesystem::path& path);
void write_sessions_jsonl(const std::filesystem::path& path,
                          const std::vector<telemetry::SessionRecord>& sessions);

// Fully assembled (still unencoded) player-game pair: merged session slice,
// joined feature values, and the derived targets.
struct RawPair {
  std::string player_guid;
  std::string game_id;
  std::int64_t session_count = 0;
  double avg_fps = 0.0;
  std::string windowed_mode;
  std::string game_mode_on;
  std::array<std::int64_t, telemetry::kBinCount> bins{};
  std::array<std::int64_t, telemetry::kClassCount> class_counts{};
  double floor_hz = 0.0;
  std::map<std::string, Value> fields;  // every encodable field by name
};

RawPair assemble_pair(const telemetry::PairSessions& sessions,
                      const Record& player, const Record& game);

struct NumericStats {
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population (1/n), over median-filled values
};

struct FieldEncoding {
  std::string name;
  FieldKind kind = FieldKind::Numeric;
  NumericStats num;                 // numeric fields only
  std::vector<std::string> vocab;   // categorical/tags, first-observed order
  std::size_t offset = 0;
  std::size_t width = 0;            // 0 when dropped
  bool dropped = false;             // zero-variance numeric
};

// Encoding layout fitted on the training split only. Numerics are
// median-filled then z-scored with moments computed over the filled column;
// categoricals one-hot in first-observed vocabulary order. Missing
// categorical or tag values encode as 0.5 across the group, vocabulary
// misses as all zeros. avg_fps never enters the encoding: the pair's own
// observed rate is the quantity being predicted.
struct EncodingSchema {
  std::vector<FieldEncoding> fields;
  std::size_t width = 0;
  std::vector<std::string> dropped;
  std::vector<std::string> excluded = {"avg_fps"};

  std::string to_json() const;
  static EncodingSchema from_json(const std::string& text);
  std::string hash_hex() const;  // FNV-1a of the canonical JSON
};

EncodingSchema fit_schema(const std::vector<RawPair>& train_rows);
std::vector<double> encode(const RawPair& row, const EncodingSchema& schema);

// Deterministic pair-level split: shuffled by seed, round(n * ratio) rows to
// train, remainder to validation, both at least 1.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
SplitIndices split_pairs(std::size_t n, double ratio, std::uint64_t seed);

// Encoded pair as written to pairs jsonl.
struct EncodedPair {
  std::string player_guid;
  std::string game_id;
  std::int64_t session_count = 0;
  double avg_fps = 0.0;
  std::string windowed_mode;
  std::string game_mode_on;
  std::array<std::int64_t, telemetry::kBinCount> bins{};
  std::array<std::int64_t, telemetry::kClassCount> class_counts{};
  double floor_hz = 0.0;
  std::vector<double> features;

  // Soft target over k = 5 classes or k = 42 bins.
  telemetry::ClassDistribution target(int k) const;
};

void write_pairs_jsonl(const std::filesystem::path& path,
                       const std::vector<EncodedPair>& pairs);
std::vector<EncodedPair> load_pairs_jsonl(const std::filesystem::path& path);

struct RawBuildStats {
  std::size_t sessions_in = 0;
  std::size_t sessions_kept = 0;
  std::size_t pairs_built = 0;
  std::size_t pairs_dropped_empty = 0;  // merged histogram had no samples
};

// filter -> group by (player, game) -> merge -> join. The unencoded front of
// the prep pipeline, also used stand-alone by the statistical analyses.
std::vector<RawPair> build_raw_pairs(std::vector<telemetry::SessionRecord> sessions,
                                     const std::vector<Record>& players,
                                     const std::vector<Record>& games,
                                     RawBuildStats* stats = nullptr);

struct PrepOptions {
  double ratio = 0.8;
  std::uint64_t seed = 1;
};

struct PrepResult {
  EncodingSchema schema;
  std::vector<EncodedPair> train;
  std::vector<EncodedPair> val;
  std::size_t sessions_in = 0;
  std::size_t sessions_kept = 0;
  std::size_t pairs_built = 0;
  std::size_t pairs_dropped_empty = 0;  // merged histogram had no samples
};

// filter -> group -> merge -> join -> split -> fit -> encode.
PrepResult prep_pipeline(std::vector<telemetry::SessionRecord> sessions,
                         const std::vector<Record>& players,
                         const std::vector<Record>& games,
                         const PrepOptions& options);

}  // namespace framecast::features
