#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "framecast/features.hpp"
#include "framecast/stats.hpp"

namespace framecast::insights {

// One ANOVA line: floor rates grouped by one categorical feature (or by the
// presence of one tag value, written as "field:tag"). To avoid counting the
// same player or game many times, tests run on per-unit mean floors.
struct AnovaRow {
  std::string feature;
  std::string unit;  // "player" or "game"
  int groups = 0;
  std::int64_t n = 0;
  std::int64_t df_between = 0;
  std::int64_t df_within = 0;
  double f = 0.0;
  double p = 1.0;
  double eta_squared = 0.0;
  std::string note;  // "degenerate" when the test cannot run, else empty
};

struct OlsRow {
  std::string term;
  double coef = 0.0;
  double p = 1.0;
  double r_squared = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct OlsBlock {
  std::string unit;
  std::int64_t n = 0;
  double r_squared = 0.0;
  std::vector<OlsRow> rows;
};

struct CountryEffect {
  std::string country;
  std::int64_t n_players = 0;
  double mean_floor_hz = 0.0;
  double gdp_per_capita_usd = 0.0;
  double gini = 0.0;
};

struct InsightsReport {
  std::vector<AnovaRow> player_anova;
  std::vector<AnovaRow> game_anova;
  OlsBlock player_ols;
  OlsBlock game_ols;
  std::vector<CountryEffect> country_effects;
  bool has_macro = false;
  stats::OlsResult macro;  // country mean floor ~ log10(GDP) + Gini
};

// Per-player and per-game mean floors with the unit's field values attached.
struct UnitRow {
  std::string id;
  double mean_floor_hz = 0.0;
  std::int64_t pair_count = 0;
  const std::map<std::string, features::Value>* fields = nullptr;
};

// Runs every analysis over assembled pairs. Countries may be empty, which
// skips the country-level block.
InsightsReport analyze(const std::vector<features::RawPair>& pairs,
                       const std::vector<features::CountryRow>& countries);

// Pairwise comparisons for one categorical feature on the matching unit
// ("player" or "game" picked by where the field is defined).
stats::TukeyResult tukey_for_feature(const std::vector<features::RawPair>& pairs,
                                     const std::string& feature,
                                     std::vector<std::string>* group_names,
                                     double alpha = 0.05);

std::string anova_csv(const std::vector<AnovaRow>& rows);
std::string ols_csv(const OlsBlock& block);
std::string country_csv(const std::vector<CountryEffect>& rows);
std::string macro_csv(const stats::OlsResult& macro);
std::string tukey_csv(const stats::TukeyResult& result,
                      const std::vector<std::string>& group_names);

}  // namespace framecast::insights
