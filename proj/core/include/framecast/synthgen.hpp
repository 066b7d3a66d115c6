#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "framecast/features.hpp"
#include "framecast/telemetry.hpp"

namespace framecast::synthgen {

// Per-player hardware contribution to the planted frame-rate level, in Hz.
struct HardwareCoefficients {
  double intercept = -2.0675;
  double cpu_cores = 6.878;
  double ram_gb = 0.2843;
  double process_node_nm = -0.5165;
  double screen_in = 1.8697;

  double eval(double cores, double ram, double node, double screen) const {
    return intercept + cpu_cores * cores + ram_gb * ram + process_node_nm * node +
           screen_in * screen;
  }
};

// Country-level contribution, evaluated on GDP per capita (log10) and Gini.
struct WealthCoefficients {
  double log10_gdp = 12.84;
  double gini = -0.42;
  double intercept = 6.84;

  double eval(double gdp_per_capita_usd, double gini_index) const;
};

struct GeneratorConfig {
  std::uint64_t seed = 7;
  int players = 1000;
  int games = 50;
  int pairs_per_player_min = 3;
  int pairs_per_player_max = 6;
  int sessions_per_pair_min = 6;
  int sessions_per_pair_max = 14;
  int fps_samples_per_session = 120;

  // Level structure, all in Hz unless noted.
  double country_mix = 0.3;        // weight on the centered country term
  double player_latent_std = 6.0;  // exactly centered after drawing
  double game_latent_std = 5.0;    // exactly centered after drawing
  double pair_noise_std = 3.0;
  double sigma_log = 0.25;  // log-space spread of per-session fps samples

  // 0 = hardware draws independent of country wealth; positive values shift
  // richer countries toward better catalog entries.
  double hardware_wealth_tilt = 0.25;

  // Session durations (seconds, log-normal around exp(mu)).
  double duration_mu_log = 7.4955;  // ~1800 s median
  double duration_sigma_log = 0.8;

  double missing_rate = 0.02;  // applied to non-planted fields only

  HardwareCoefficients hardware;
  WealthCoefficients wealth;

  std::string to_json() const;
  static GeneratorConfig from_json(const std::string& text);
};

struct CountrySpec {
  std::string name;
  double gdp_per_capita_usd = 0.0;
  double gini = 0.0;
  double population_weight = 0.0;
};

const std::vector<CountrySpec>& default_countries();

// Fixed per-genre shifts; a game's offset is the mean over its genres.
const std::map<std::string, double>& genre_offsets();

struct GeneratedSummary {
  int players = 0;
  int games = 0;
  std::int64_t sessions = 0;
  std::int64_t pairs = 0;
  std::vector<std::string> files;
};

// Writes players.csv, games.csv, countries.csv, sessions.jsonl, and
// truth.json into out_dir. Byte-identical for a given config.
GeneratedSummary generate(const GeneratorConfig& config,
                          const std::filesystem::path& out_dir);

// The planted quantities, as recorded in truth.json.
struct PlantedTruth {
  GeneratorConfig config;
  double mean_eq2 = 0.0;
  std::map<std::string, double> player_latents;     // guid -> u
  std::map<std::string, double> player_hardware;    // guid -> eq1 value
  std::map<std::string, double> player_country_term;  // guid -> mixed, centered
  std::map<std::string, double> game_latents;       // game id -> v
  std::map<std::string, double> game_genre_offset;  // game id -> offset
  std::map<std::string, double> pair_mu;            // "guid|game" -> floor level
};

PlantedTruth load_truth(const std::filesystem::path& path);

// Analytic class/bin distribution implied by a planted level: fps samples are
// log-normal with the 5th percentile anchored at mu, so each bin's mass is a
// difference of normal CDFs in log space.
telemetry::ClassDistribution truth_distribution(double mu, double sigma_log, int k);

}  // namespace framecast::synthgen
