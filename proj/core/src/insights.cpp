#include "framecast/insights.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "framecast/error.hpp"
#include "framecast/io.hpp"

namespace framecast::insights {

namespace {

std::optional<double> numeric_field(const std::map<std::string, features::Value>& fields,
                                    const std::string& name) {
  auto it = fields.find(name);
  if (it == fields.end() || features::is_missing(it->second)) return std::nullopt;
  return std::get<double>(it->second);
}

std::optional<std::string> categorical_field(
    const std::map<std::string, features::Value>& fields, const std::string& name) {
  auto it = fields.find(name);
  if (it == fields.end() || features::is_missing(it->second)) return std::nullopt;
  return std::get<std::string>(it->second);
}

const std::vector<std::string>* tags_field(
    const std::map<std::string, features::Value>& fields, const std::string& name) {
  auto it = fields.find(name);
  if (it == fields.end() || features::is_missing(it->second)) return nullptr;
  return &std::get<std::vector<std::string>>(it->second);
}

std::vector<UnitRow> unit_rows(const std::vector<features::RawPair>& pairs,
                               bool by_player) {
  std::vector<UnitRow> rows;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> sums;
  for (const auto& pair : pairs) {
    const std::string& id = by_player ? pair.player_guid : pair.game_id;
    auto [it, inserted] = index.try_emplace(id, rows.size());
    if (inserted) {
      UnitRow r;
      r.id = id;
      r.fields = &pair.fields;
      rows.push_back(r);
      sums.push_back(0.0);
    }
    sums[it->second] += pair.floor_hz;
    rows[it->second].pair_count += 1;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].mean_floor_hz = sums[i] / static_cast<double>(rows[i].pair_count);
  }
  return rows;
}

AnovaRow anova_over_groups(const std::string& feature, const std::string& unit,
                           const std::map<std::string, std::vector<double>>& groups) {
  AnovaRow row;
  row.feature = feature;
  row.unit = unit;
  row.groups = static_cast<int>(groups.size());
  for (const auto& [label, values] : groups) {
    row.n += static_cast<std::int64_t>(values.size());
  }
  if (groups.size() < 2 || row.n < static_cast<std::int64_t>(groups.size()) + 1) {
    row.note = "degenerate";
    return row;
  }
  std::vector<std::vector<double>> g;
  g.reserve(groups.size());
  for (const auto& [label, values] : groups) g.push_back(values);
  try {
    stats::AnovaResult r = stats::one_way_anova(g);
    row.df_between = r.df_between;
    row.df_within = r.df_within;
    row.f = r.f;
    row.p = r.p;
    row.eta_squared = r.eta_squared;
  } catch (const Error&) {
    row.note = "degenerate";
  }
  return row;
}

AnovaRow categorical_anova(const std::vector<UnitRow>& units, const std::string& feature,
                           const std::string& unit) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& u : units) {
    auto value = categorical_field(*u.fields, feature);
    if (!value) continue;
    groups[*value].push_back(u.mean_floor_hz);
  }
  return anova_over_groups(feature, unit, groups);
}

AnovaRow tag_anova(const std::vector<UnitRow>& units, const std::string& field,
                   const std::string& tag, const std::string& unit) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& u : units) {
    const auto* tags = tags_field(*u.fields, field);
    if (!tags) continue;
    bool has = std::find(tags->begin(), tags->end(), tag) != tags->end();
    groups[has ? "with" : "without"].push_back(u.mean_floor_hz);
  }
  return anova_over_groups(field + ":" + tag, unit, groups);
}

OlsBlock ols_block(const std::vector<UnitRow>& units, const std::string& unit,
                   const std::vector<std::string>& regressors) {
  OlsBlock block;
  block.unit = unit;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& u : units) {
    std::vector<double> row;
    row.reserve(regressors.size() + 1);
    bool complete = true;
    for (const auto& name : regressors) {
      auto value = numeric_field(*u.fields, name);
      if (!value) {
        complete = false;
        break;
      }
      row.push_back(*value);
    }
    if (!complete) continue;
    row.push_back(1.0);
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(u.mean_floor_hz);
  }
  std::vector<std::string> names = regressors;
  names.push_back("intercept");
  require(y.size() > names.size(), "invalid_input",
          "ols over " + unit + " units: not enough complete rows");
  stats::OlsResult r = stats::ols(x, y.size(), names.size(), y, names);
  block.n = static_cast<std::int64_t>(r.n);
  block.r_squared = r.r_squared;
  for (std::size_t j = 0; j < names.size(); ++j) {
    OlsRow row;
    row.term = r.names[j];
    row.coef = r.coef[j];
    row.p = r.p[j];
    row.r_squared = r.r_squared;
    row.ci_low = r.ci_low[j];
    row.ci_high = r.ci_high[j];
    block.rows.push_back(row);
  }
  return block;
}

}  // namespace

InsightsReport analyze(const std::vector<features::RawPair>& pairs,
                       const std::vector<features::CountryRow>& countries) {
  require(!pairs.empty(), "invalid_input", "insights: no pairs");
  InsightsReport report;

  std::vector<UnitRow> players = unit_rows(pairs, true);
  std::vector<UnitRow> games = unit_rows(pairs, false);

  for (const auto& def : features::player_fields()) {
    if (def.kind != features::FieldKind::Categorical) continue;
    report.player_anova.push_back(categorical_anova(players, def.name, "player"));
  }

  for (const auto& def : features::game_fields()) {
    if (def.kind == features::FieldKind::Categorical) {
      report.game_anova.push_back(categorical_anova(games, def.name, "game"));
    } else if (def.kind == features::FieldKind::Tags) {
      std::set<std::string> observed;
      for (const auto& g : games) {
        if (const auto* tags = tags_field(*g.fields, def.name)) {
          observed.insert(tags->begin(), tags->end());
        }
      }
      for (const auto& tag : observed) {
        report.game_anova.push_back(tag_anova(games, def.name, tag, "game"));
      }
    }
  }

  report.player_ols = ols_block(
      players, "player",
      {"ram_gb", "cpu_cores", "cpu_process_node_nm", "screen_size_in"});
  report.game_ols = ols_block(
      games, "game", {"platform_count", "rating", "follows", "release_year"});

  if (!countries.empty()) {
    std::map<std::string, const features::CountryRow*> by_name;
    for (const auto& c : countries) by_name[c.country] = &c;
    std::map<std::string, std::pair<double, std::int64_t>> sums;
    for (const auto& p : players) {
      auto country = categorical_field(*p.fields, "country");
      if (!country) continue;
      auto it = by_name.find(*country);
      require(it != by_name.end(), "unknown_id",
              "insights: country '" + *country + "' not in the countries table");
      auto& slot = sums[*country];
      slot.first += p.mean_floor_hz;
      slot.second += 1;
    }
    std::vector<stats::MacroRow> macro_rows;
    for (const auto& [name, sum] : sums) {
      CountryEffect eff;
      eff.country = name;
      eff.n_players = sum.second;
      eff.mean_floor_hz = sum.first / static_cast<double>(sum.second);
      eff.gdp_per_capita_usd = by_name.at(name)->gdp_per_capita_usd;
      eff.gini = by_name.at(name)->gini;
      report.country_effects.push_back(eff);
      macro_rows.push_back(
          {name, eff.gdp_per_capita_usd, eff.gini, eff.mean_floor_hz});
    }
    if (macro_rows.size() >= 4) {
      report.macro = stats::macro_fit(macro_rows);
      report.has_macro = true;
    }
  }
  return report;
}

stats::TukeyResult tukey_for_feature(const std::vector<features::RawPair>& pairs,
                                     const std::string& feature,
                                     std::vector<std::string>* group_names,
                                     double alpha) {
  bool is_player = false, found = false;
  for (const auto& def : features::player_fields()) {
    if (def.name == feature && def.kind == features::FieldKind::Categorical) {
      is_player = true;
      found = true;
    }
  }
  if (!found) {
    for (const auto& def : features::game_fields()) {
      if (def.name == feature && def.kind == features::FieldKind::Categorical) {
        found = true;
      }
    }
  }
  require(found, "invalid_input",
          "tukey: '" + feature + "' is not a categorical player or game field");

  std::vector<UnitRow> units = unit_rows(pairs, is_player);
  std::map<std::string, std::vector<double>> groups;
  for (const auto& u : units) {
    auto value = categorical_field(*u.fields, feature);
    if (!value) continue;
    groups[*value].push_back(u.mean_floor_hz);
  }
  require(groups.size() >= 2, "degenerate_input",
          "tukey: fewer than two groups for '" + feature + "'");
  std::vector<std::vector<double>> g;
  if (group_names) group_names->clear();
  for (const auto& [label, values] : groups) {
    if (group_names) group_names->push_back(label);
    g.push_back(values);
  }
  return stats::tukey_hsd(g, alpha);
}

std::string anova_csv(const std::vector<AnovaRow>& rows) {
  io::CsvTable t;
  t.columns = {"feature", "df_between", "df_within", "f", "p", "eta_squared"};
  for (const auto& r : rows) {
    if (!r.note.empty()) {
      t.rows.push_back({r.feature, "", "", "", "", ""});
      continue;
    }
    t.rows.push_back({r.feature, std::to_string(r.df_between),
                      std::to_string(r.df_within), io::format_double(r.f),
                      io::format_double(r.p), io::format_double(r.eta_squared)});
  }
  return io::format_csv(t);
}

std::string ols_csv(const OlsBlock& block) {
  io::CsvTable t;
  t.columns = {"feature", "coef", "p", "r_squared", "ci_low", "ci_high"};
  for (const auto& r : block.rows) {
    t.rows.push_back({r.term, io::format_double(r.coef), io::format_double(r.p),
                      io::format_double(r.r_squared), io::format_double(r.ci_low),
                      io::format_double(r.ci_high)});
  }
  return io::format_csv(t);
}

std::string country_csv(const std::vector<CountryEffect>& rows) {
  io::CsvTable t;
  t.columns = {"country", "n_players", "mean_floor_hz", "gdp_per_capita_usd", "gini"};
  for (const auto& r : rows) {
    t.rows.push_back({r.country, std::to_string(r.n_players),
                      io::format_double(r.mean_floor_hz),
                      io::format_double(r.gdp_per_capita_usd),
                      io::format_double(r.gini)});
  }
  return io::format_csv(t);
}

std::string macro_csv(const stats::OlsResult& macro) {
  io::CsvTable t;
  t.columns = {"feature", "coef", "p", "r_squared", "ci_low", "ci_high"};
  for (std::size_t j = 0; j < macro.names.size(); ++j) {
    t.rows.push_back({macro.names[j], io::format_double(macro.coef[j]),
                      io::format_double(macro.p[j]), io::format_double(macro.r_squared),
                      io::format_double(macro.ci_low[j]),
                      io::format_double(macro.ci_high[j])});
  }
  return io::format_csv(t);
}

std::string tukey_csv(const stats::TukeyResult& result,
                      const std::vector<std::string>& group_names) {
  io::CsvTable t;
  t.columns = {"group_a", "group_b", "diff", "se", "q", "p", "ci_low", "ci_high"};
  for (const auto& pair : result.pairs) {
    t.rows.push_back({group_names[static_cast<std::size_t>(pair.group_a)],
                      group_names[static_cast<std::size_t>(pair.group_b)],
                      io::format_double(pair.diff), io::format_double(pair.se),
                      io::format_double(pair.q), io::format_double(pair.p),
                      io::format_double(pair.ci_low), io::format_double(pair.ci_high)});
  }
  return io::format_csv(t);
}

}  // namespace framecast::insights
