#include "framecast/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "framecast/error.hpp"
#include "framecast/io.hpp"
#include "framecast/rng.hpp"

using nlohmann::json;

namespace framecast::features {

const std::vector<FieldDef>& player_fields() {
  static const std::vector<FieldDef> defs = {
      {"avg_sessions_per_month", FieldKind::Numeric},
      {"avg_duration_per_session", FieldKind::Numeric},
      {"game_portion", FieldKind::Numeric},
      {"distinct_game_count", FieldKind::Numeric},
      {"ram_gb", FieldKind::Numeric},
      {"cpu_cores", FieldKind::Numeric},
      {"cpu_process_node_nm", FieldKind::Numeric},
      {"screen_size_in", FieldKind::Numeric},
      {"chassis_type", FieldKind::Categorical},
      {"cpu_vendor", FieldKind::Categorical},
      {"cpu_family", FieldKind::Categorical},
      {"gpu_class", FieldKind::Categorical},
      {"gpu_category", FieldKind::Categorical},
      {"discrete_graphics", FieldKind::Categorical},
      {"os", FieldKind::Categorical},
      {"country", FieldKind::Categorical},
      {"device_age_category", FieldKind::Categorical},
  };
  return defs;
}

const std::vector<FieldDef>& game_fields() {
  static const std::vector<FieldDef> defs = {
      {"platform_count", FieldKind::Numeric},
      {"language_support_count", FieldKind::Numeric},
      {"follows", FieldKind::Numeric},
      {"rating", FieldKind::Numeric},
      {"rating_count", FieldKind::Numeric},
      {"aggregated_rating", FieldKind::Numeric},
      {"aggregated_rating_count", FieldKind::Numeric},
      {"total_rating", FieldKind::Numeric},
      {"total_rating_count", FieldKind::Numeric},
      {"release_year", FieldKind::Numeric},
      {"release_month", FieldKind::Numeric},
      {"category", FieldKind::Categorical},
      {"age_rating", FieldKind::Categorical},
      {"dlc_available", FieldKind::Categorical},
      {"genres", FieldKind::Tags},
      {"game_modes", FieldKind::Tags},
      {"player_perspectives", FieldKind::Tags},
      {"themes", FieldKind::Tags},
  };
  return defs;
}

const std::vector<FieldDef>& pair_fields() {
  static const std::vector<FieldDef> defs = {
      {"windowed_mode", FieldKind::Categorical},
      {"game_mode_on", FieldKind::Categorical},
  };
  return defs;
}

namespace {

std::vector<FieldDef> all_fields() {
  std::vector<FieldDef> defs = player_fields();
  const auto& g = game_fields();
  defs.insert(defs.end(), g.begin(), g.end());
  const auto& p = pair_fields();
  defs.insert(defs.end(), p.begin(), p.end());
  return defs;
}

double parse_double_cell(const std::string& cell, const std::string& context) {
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  require(end == cell.c_str() + cell.size() && std::isfinite(v), "invalid_input",
          "bad numeric value '" + cell + "' in " + context);
  return v;
}

std::vector<std::string> split_tags(const std::string& cell) {
  std::vector<std::string> tags;
  std::string cur;
  for (char c : cell) {
    if (c == ';') {
      if (!cur.empty()) tags.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tags.push_back(std::move(cur));
  return tags;
}

void check_positive(const Record& r, const char* field) {
  auto it = r.fields.find(field);
  if (it == r.fields.end() || is_missing(it->second)) return;
  double v = std::get<double>(it->second);
  require(v > 0.0, "invalid_input",
          std::string(field) + " must be positive (id " + r.id + ")");
}

std::vector<Record> load_records_csv(const std::filesystem::path& path,
                                     const std::string& id_column,
                                     const std::vector<FieldDef>& defs) {
  io::CsvTable t = io::read_csv(path);
  std::size_t id_idx = t.column_index(id_column);
  std::vector<Record> records;
  records.reserve(t.rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& row : t.rows) {
    Record r;
    r.id = row[id_idx];
    require(!r.id.empty(), "invalid_input", "empty " + id_column + " in " + path.string());
    require(seen.insert(r.id).second, "invalid_input",
            "duplicate " + id_column + " '" + r.id + "' in " + path.string());
    for (const auto& def : defs) {
      auto col = t.find_column(def.name);
      if (!col) continue;  // release_year/month are derived, not stored
      const std::string& cell = row[*col];
      if (cell.empty()) {
        r.fields[def.name] = std::monostate{};
      } else if (def.kind == FieldKind::Numeric) {
        r.fields[def.name] = parse_double_cell(cell, def.name + " of " + r.id);
      } else if (def.kind == FieldKind::Tags) {
        r.fields[def.name] = split_tags(cell);
      } else {
        r.fields[def.name] = cell;
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

void derive_release_fields(Record& r, const std::string& date_cell) {
  if (date_cell.empty()) {
    r.fields["release_year"] = std::monostate{};
    r.fields["release_month"] = std::monostate{};
    return;
  }
  int year = 0, month = 0;
  int got = std::sscanf(date_cell.c_str(), "%d-%d", &year, &month);
  require(got == 2 && year >= 1950 && year <= 2100 && month >= 1 && month <= 12,
          "invalid_input", "bad first_release_date '" + date_cell + "'");
  r.fields["release_year"] = static_cast<double>(year);
  r.fields["release_month"] = static_cast<double>(month);
}

}  // namespace

std::vector<Record> load_players_csv(const std::filesystem::path& path) {
  auto records = load_records_csv(path, "guid", player_fields());
  for (const auto& r : records) {
    check_positive(r, "ram_gb");
    check_positive(r, "cpu_cores");
    check_positive(r, "cpu_process_node_nm");
    check_positive(r, "screen_size_in");
  }
  return records;
}

std::vector<Record> load_games_csv(const std::filesystem::path& path) {
  io::CsvTable t = io::read_csv(path);
  std::size_t date_idx = t.column_index("first_release_date");
  auto records = load_records_csv(path, "id", game_fields());
  require(records.size() == t.rows.size(), "invalid_input", "games row mismatch");
  for (std::size_t i = 0; i < records.size(); ++i) {
    derive_release_fields(records[i], t.rows[i][date_idx]);
  }
  return records;
}

std::vector<CountryRow> load_countries_csv(const std::filesystem::path& path) {
  io::CsvTable t = io::read_csv(path);
  std::size_t name_idx = t.column_index("country");
  std::size_t gdp_idx = t.column_index("gdp_per_capita_usd");
  std::size_t gini_idx = t.column_index("gini");
  std::vector<CountryRow> rows;
  rows.reserve(t.rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& row : t.rows) {
    CountryRow c;
    c.country = row[name_idx];
    require(!c.country.empty(), "invalid_input", "empty country name");
    require(seen.insert(c.country).second, "invalid_input",
            "duplicate country '" + c.country + "'");
    c.gdp_per_capita_usd = parse_double_cell(row[gdp_idx], "gdp_per_capita_usd");
    c.gini = parse_double_cell(row[gini_idx], "gini");
    require(c.gdp_per_capita_usd > 0.0, "invalid_input",
            "gdp_per_capita_usd must be positive for " + c.country);
    rows.push_back(std::move(c));
  }
  return rows;
}

namespace {

const std::vector<std::string> kWindowedModes = {"Full", "Unknown", "Window"};
const std::vector<std::string> kGameModes = {"false", "true", "unknown"};

void validate_enum(const std::string& v, const std::vector<std::string>& allowed,
                   const char* field) {
  for (const auto& a : allowed) {
    if (v == a) return;
  }
  fail("invalid_input", std::string("bad ") + field + " value '" + v + "'");
}

}  // namespace

std::vector<telemetry::SessionRecord> load_sessions_jsonl(
    const std::filesystem::path& path) {
  std::string text = io::read_file(path);
  std::vector<telemetry::SessionRecord> sessions;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    if (eol > pos) {
      json j;
      try {
        j = json::parse(text.substr(pos, eol - pos));
      } catch (const json::exception& e) {
        fail("invalid_input", "sessions line " + std::to_string(line_no) + ": " + e.what());
      }
      telemetry::SessionRecord s;
      s.player_guid = j.at("player_guid").get<std::string>();
      s.game_id = j.at("game_id").get<std::string>();
      s.duration_s = j.at("duration_s").get<double>();
      s.windowed_mode = j.at("windowed_mode").get<std::string>();
      validate_enum(s.windowed_mode, kWindowedModes, "windowed_mode");
      const auto& gm = j.at("game_mode_on");
      s.game_mode_on = gm.is_null() ? "unknown" : (gm.get<bool>() ? "true" : "false");
      const auto& bins = j.at("bins");
      require(bins.is_array() && bins.size() == telemetry::kBinCount, "invalid_input",
              "sessions line " + std::to_string(line_no) + ": bins must have 42 entries");
      for (int i = 0; i < telemetry::kBinCount; ++i) {
        std::int64_t c = bins[i].get<std::int64_t>();
        require(c >= 0, "invalid_input", "negative bin count");
        s.hist.counts[i] = c;
      }
      s.avg_fps = j.at("avg_fps").get<double>();
      require(std::isfinite(s.avg_fps) && s.avg_fps >= 0.0, "invalid_input",
              "avg_fps must be finite and non-negative");
      sessions.push_back(std::move(s));
    }
    pos = eol + 1;
  }
  return sessions;
}

void write_sessions_jsonl(const std::filesystem::path& path,
                          const std::vector<telemetry::SessionRecord>& sessions) {
  std::string out;
  for (const auto& s : sessions) {
    json j;
    j["player_guid"] = s.player_guid;
    j["game_id"] = s.game_id;
    j["duration_s"] = s.duration_s;
    j["windowed_mode"] = s.windowed_mode;
    if (s.game_mode_on == "unknown") {
      j["game_mode_on"] = nullptr;
    } else {
      j["game_mode_on"] = s.game_mode_on == "true";
    }
    j["bins"] = s.hist.counts;
    j["avg_fps"] = s.avg_fps;
    io::append_line(out, j.dump());
  }
  io::write_file(path, out);
}

RawPair assemble_pair(const telemetry::PairSessions& sessions,
                      const Record& player, const Record& game) {
  require(sessions.player_guid == player.id, "key_mismatch",
          "assemble_pair: player record does not match pair");
  require(sessions.game_id == game.id, "key_mismatch",
          "assemble_pair: game record does not match pair");
  RawPair r;
  r.player_guid = sessions.player_guid;
  r.game_id = sessions.game_id;
  r.session_count = sessions.session_count;
  r.avg_fps = sessions.avg_fps;
  r.windowed_mode = sessions.windowed_mode;
  r.game_mode_on = sessions.game_mode_on;
  r.bins = sessions.hist.counts;
  r.class_counts = telemetry::aggregate_to_classes(sessions.hist);
  r.floor_hz = telemetry::fps_floor_95(sessions.hist);
  for (const auto& def : player_fields()) {
    auto it = player.fields.find(def.name);
    r.fields[def.name] = it != player.fields.end() ? it->second : Value{};
  }
  for (const auto& def : game_fields()) {
    auto it = game.fields.find(def.name);
    r.fields[def.name] = it != game.fields.end() ? it->second : Value{};
  }
  r.fields["windowed_mode"] = r.windowed_mode;
  r.fields["game_mode_on"] = r.game_mode_on;
  return r;
}

namespace {

const Value& field_value(const RawPair& row, const std::string& name) {
  static const Value kMissing{};
  auto it = row.fields.find(name);
  return it != row.fields.end() ? it->second : kMissing;
}

double numeric_or_throw(const Value& v, const std::string& name) {
  require(std::holds_alternative<double>(v), "invalid_input",
          "field '" + name + "' must be numeric");
  double x = std::get<double>(v);
  require(std::isfinite(x), "invalid_input", "field '" + name + "' is non-finite");
  return x;
}

}  // namespace

EncodingSchema fit_schema(const std::vector<RawPair>& train_rows) {
  require(train_rows.size() >= 2, "degenerate_input",
          "fit_schema: needs at least 2 training pairs");
  EncodingSchema schema;
  std::size_t offset = 0;
  for (const auto& def : all_fields()) {
    FieldEncoding fe;
    fe.name = def.name;
    fe.kind = def.kind;
    if (def.kind == FieldKind::Numeric) {
      std::vector<double> observed;
      observed.reserve(train_rows.size());
      for (const auto& row : train_rows) {
        const Value& v = field_value(row, def.name);
        if (!is_missing(v)) observed.push_back(numeric_or_throw(v, def.name));
      }
      if (observed.empty()) {
        fe.dropped = true;
      } else {
        std::sort(observed.begin(), observed.end());
        std::size_t n = observed.size();
        fe.num.median = n % 2 == 1 ? observed[n / 2]
                                   : 0.5 * (observed[n / 2 - 1] + observed[n / 2]);
        // Moments over the median-filled column, so the re-encoded training
        // split has exactly zero mean and unit (population) variance.
        double filled_n = static_cast<double>(train_rows.size());
        double sum = fe.num.median * (filled_n - static_cast<double>(n));
        for (double v : observed) sum += v;
        fe.num.mean = sum / filled_n;
        double ss = (fe.num.median - fe.num.mean) * (fe.num.median - fe.num.mean) *
                    (filled_n - static_cast<double>(n));
        for (double v : observed) ss += (v - fe.num.mean) * (v - fe.num.mean);
        fe.num.stddev = std::sqrt(ss / filled_n);
        fe.dropped = fe.num.stddev == 0.0;
      }
      fe.width = fe.dropped ? 0 : 1;
      if (fe.dropped) schema.dropped.push_back(def.name);
    } else {
      // Vocabulary in first-observed order; stable given identical input order.
      std::unordered_set<std::string> known;
      for (const auto& row : train_rows) {
        const Value& v = field_value(row, def.name);
        if (is_missing(v)) continue;
        if (def.kind == FieldKind::Categorical) {
          require(std::holds_alternative<std::string>(v), "invalid_input",
                  "field '" + def.name + "' must be categorical");
          const auto& s = std::get<std::string>(v);
          if (known.insert(s).second) fe.vocab.push_back(s);
        } else {
          require(std::holds_alternative<std::vector<std::string>>(v), "invalid_input",
                  "field '" + def.name + "' must be a tag list");
          for (const auto& tag : std::get<std::vector<std::string>>(v)) {
            if (known.insert(tag).second) fe.vocab.push_back(tag);
          }
        }
      }
      fe.width = fe.vocab.size();
      fe.dropped = fe.width == 0;
      if (fe.dropped) schema.dropped.push_back(def.name);
    }
    fe.offset = offset;
    offset += fe.width;
    schema.fields.push_back(std::move(fe));
  }
  schema.width = offset;
  require(schema.width > 0, "degenerate_input", "fit_schema: no usable features");
  return schema;
}

std::vector<double> encode(const RawPair& row, const EncodingSchema& schema) {
  require(schema.width > 0, "invalid_input", "encode: empty schema");
  std::vector<double> out(schema.width, 0.0);
  for (const auto& fe : schema.fields) {
    if (fe.dropped) continue;
    const Value& v = field_value(row, fe.name);
    if (fe.kind == FieldKind::Numeric) {
      double x = is_missing(v) ? fe.num.median : numeric_or_throw(v, fe.name);
      out[fe.offset] = (x - fe.num.mean) / fe.num.stddev;
    } else if (fe.kind == FieldKind::Categorical) {
      if (is_missing(v)) {
        std::fill_n(out.begin() + fe.offset, fe.width, 0.5);
      } else {
        require(std::holds_alternative<std::string>(v), "invalid_input",
                "field '" + fe.name + "' must be categorical");
        const auto& s = std::get<std::string>(v);
        for (std::size_t i = 0; i < fe.vocab.size(); ++i) {
          if (fe.vocab[i] == s) {
            out[fe.offset + i] = 1.0;  // unseen values leave the group at zero
            break;
          }
        }
      }
    } else {
      if (is_missing(v)) {
        std::fill_n(out.begin() + fe.offset, fe.width, 0.5);
      } else {
        require(std::holds_alternative<std::vector<std::string>>(v), "invalid_input",
                "field '" + fe.name + "' must be a tag list");
        for (const auto& tag : std::get<std::vector<std::string>>(v)) {
          for (std::size_t i = 0; i < fe.vocab.size(); ++i) {
            if (fe.vocab[i] == tag) {
              out[fe.offset + i] = 1.0;
              break;
            }
          }
        }
      }
    }
  }
  return out;
}

std::string EncodingSchema::to_json() const {
  json j;
  j["version"] = 1;
  j["width"] = width;
  j["dropped"] = dropped;
  j["excluded"] = excluded;
  json fields_json = json::array();
  for (const auto& fe : fields) {
    json f;
    f["name"] = fe.name;
    f["kind"] = fe.kind == FieldKind::Numeric
                    ? "numeric"
                    : (fe.kind == FieldKind::Categorical ? "categorical" : "tags");
    f["offset"] = fe.offset;
    f["width"] = fe.width;
    f["dropped"] = fe.dropped;
    if (fe.kind == FieldKind::Numeric) {
      f["median"] = fe.num.median;
      f["mean"] = fe.num.mean;
      f["std"] = fe.num.stddev;
    } else {
      f["vocab"] = fe.vocab;
    }
    fields_json.push_back(std::move(f));
  }
  j["fields"] = std::move(fields_json);
  return j.dump(2) + "\n";
}

EncodingSchema EncodingSchema::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("invalid_input", std::string("schema parse error: ") + e.what());
  }
  require(j.at("version").get<int>() == 1, "invalid_input", "unsupported schema version");
  EncodingSchema s;
  s.width = j.at("width").get<std::size_t>();
  s.dropped = j.at("dropped").get<std::vector<std::string>>();
  s.excluded = j.at("excluded").get<std::vector<std::string>>();
  for (const auto& f : j.at("fields")) {
    FieldEncoding fe;
    fe.name = f.at("name").get<std::string>();
    std::string kind = f.at("kind").get<std::string>();
    fe.kind = kind == "numeric"
                  ? FieldKind::Numeric
                  : (kind == "categorical" ? FieldKind::Categorical : FieldKind::Tags);
    fe.offset = f.at("offset").get<std::size_t>();
    fe.width = f.at("width").get<std::size_t>();
    fe.dropped = f.at("dropped").get<bool>();
    if (fe.kind == FieldKind::Numeric) {
      fe.num.median = f.at("median").get<double>();
      fe.num.mean = f.at("mean").get<double>();
      fe.num.stddev = f.at("std").get<double>();
    } else {
      fe.vocab = f.at("vocab").get<std::vector<std::string>>();
    }
    s.fields.push_back(std::move(fe));
  }
  return s;
}

std::string EncodingSchema::hash_hex() const {
  std::uint64_t h = fnv1a64(to_json());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

SplitIndices split_pairs(std::size_t n, double ratio, std::uint64_t seed) {
  require(n >= 2, "degenerate_input", "split_pairs: needs at least 2 pairs");
  require(ratio > 0.0 && ratio < 1.0, "invalid_input", "split_pairs: ratio outside (0, 1)");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  RandomStream rng(seed, "split");
  rng.shuffle(idx);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return s;
}

telemetry::ClassDistribution EncodedPair::target(int k) const {
  if (k == telemetry::kClassCount) {
    return telemetry::ClassDistribution::from_counts(
        std::vector<std::int64_t>(class_counts.begin(), class_counts.end()));
  }
  if (k == telemetry::kBinCount) {
    return telemetry::ClassDistribution::from_counts(
        std::vector<std::int64_t>(bins.begin(), bins.end()));
  }
  fail("invalid_input", "target: k must be 5 or 42");
}

void write_pairs_jsonl(const std::filesystem::path& path,
                       const std::vector<EncodedPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json j;
    j["player_guid"] = p.player_guid;
    j["game_id"] = p.game_id;
    j["session_count"] = p.session_count;
    j["avg_fps"] = p.avg_fps;
    j["windowed_mode"] = p.windowed_mode;
    j["game_mode_on"] = p.game_mode_on;
    j["bins"] = p.bins;
    j["class_counts"] = p.class_counts;
    j["floor_hz"] = p.floor_hz;
    j["features"] = p.features;
    io::append_line(out, j.dump());
  }
  io::write_file(path, out);
}

std::vector<EncodedPair> load_pairs_jsonl(const std::filesystem::path& path) {
  std::string text = io::read_file(path);
  std::vector<EncodedPair> pairs;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    if (eol > pos) {
      json j;
      try {
        j = json::parse(text.substr(pos, eol - pos));
      } catch (const json::exception& e) {
        fail("invalid_input", "pairs line " + std::to_string(line_no) + ": " + e.what());
      }
      EncodedPair p;
      p.player_guid = j.at("player_guid").get<std::string>();
      p.game_id = j.at("game_id").get<std::string>();
      p.session_count = j.at("session_count").get<std::int64_t>();
      p.avg_fps = j.at("avg_fps").get<double>();
      p.windowed_mode = j.at("windowed_mode").get<std::string>();
      p.game_mode_on = j.at("game_mode_on").get<std::string>();
      const auto& bins = j.at("bins");
      const auto& classes = j.at("class_counts");
      require(bins.size() == telemetry::kBinCount &&
                  classes.size() == telemetry::kClassCount,
              "invalid_input", "pairs line " + std::to_string(line_no) + ": bad counts");
      for (int i = 0; i < telemetry::kBinCount; ++i) p.bins[i] = bins[i].get<std::int64_t>();
      for (int i = 0; i < telemetry::kClassCount; ++i) {
        p.class_counts[i] = classes[i].get<std::int64_t>();
      }
      p.floor_hz = j.at("floor_hz").get<double>();
      p.features = j.at("features").get<std::vector<double>>();
      pairs.push_back(std::move(p));
    }
    pos = eol + 1;
  }
  return pairs;
}

std::vector<RawPair> build_raw_pairs(std::vector<telemetry::SessionRecord> sessions,
                                     const std::vector<Record>& players,
                                     const std::vector<Record>& games,
                                     RawBuildStats* stats) {
  RawBuildStats local;
  local.sessions_in = sessions.size();
  auto kept = telemetry::filter_sessions(std::move(sessions));
  local.sessions_kept = kept.size();

  std::unordered_map<std::string, const Record*> player_by_id;
  for (const auto& p : players) player_by_id[p.id] = &p;
  std::unordered_map<std::string, const Record*> game_by_id;
  for (const auto& g : games) game_by_id[g.id] = &g;

  // Group by (player, game), preserving first-appearance order.
  std::vector<std::vector<telemetry::SessionRecord>> groups;
  std::unordered_map<std::string, std::size_t> group_index;
  for (auto& s : kept) {
    std::string key = s.player_guid + '\x1f' + s.game_id;
    auto [it, inserted] = group_index.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(std::move(s));
  }

  std::vector<RawPair> raws;
  raws.reserve(groups.size());
  for (const auto& g : groups) {
    auto merged = telemetry::merge_to_pair(g);
    ++local.pairs_built;
    if (merged.hist.total() == 0) {
      ++local.pairs_dropped_empty;
      continue;
    }
    auto pit = player_by_id.find(merged.player_guid);
    require(pit != player_by_id.end(), "unknown_id",
            "sessions reference unknown player '" + merged.player_guid + "'");
    auto git = game_by_id.find(merged.game_id);
    require(git != game_by_id.end(), "unknown_id",
            "sessions reference unknown game '" + merged.game_id + "'");
    raws.push_back(assemble_pair(merged, *pit->second, *git->second));
  }
  if (stats) *stats = local;
  return raws;
}

PrepResult prep_pipeline(std::vector<telemetry::SessionRecord> sessions,
                         const std::vector<Record>& players,
                         const std::vector<Record>& games,
                         const PrepOptions& options) {
  PrepResult result;
  RawBuildStats stats;
  std::vector<RawPair> raws = build_raw_pairs(std::move(sessions), players, games, &stats);
  result.sessions_in = stats.sessions_in;
  result.sessions_kept = stats.sessions_kept;
  result.pairs_built = stats.pairs_built;
  result.pairs_dropped_empty = stats.pairs_dropped_empty;

  SplitIndices split = split_pairs(raws.size(), options.ratio, options.seed);
  std::vector<RawPair> train_raws;
  train_raws.reserve(split.train.size());
  for (std::size_t i : split.train) train_raws.push_back(raws[i]);
  result.schema = fit_schema(train_raws);

  auto encode_rows = [&](const std::vector<std::size_t>& idx,
                         std::vector<EncodedPair>& out) {
    out.reserve(idx.size());
    for (std::size_t i : idx) {
      const RawPair& r = raws[i];
      EncodedPair e;
      e.player_guid = r.player_guid;
      e.game_id = r.game_id;
      e.session_count = r.session_count;
      e.avg_fps = r.avg_fps;
      e.windowed_mode = r.windowed_mode;
      e.game_mode_on = r.game_mode_on;
      e.bins = r.bins;
      e.class_counts = r.class_counts;
      e.floor_hz = r.floor_hz;
      e.features = encode(r, result.schema);
      out.push_back(std::move(e));
    }
  };
  encode_rows(split.train, result.train);
  encode_rows(split.val, result.val);
  return result;
}

}  // namespace framecast::features
