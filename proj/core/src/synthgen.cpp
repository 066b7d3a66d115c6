#include "framecast/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "framecast/error.hpp"
#include "framecast/io.hpp"
#include "framecast/rng.hpp"
#include "framecast/stats.hpp"

namespace framecast::synthgen {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// z with standard normal CDF 0.95: the sampled rate distribution is anchored
// so that exactly 5% of its mass sits below the planted level.
constexpr double kZ95 = 1.6448536269514722;

struct CpuSpec {
  const char* vendor;
  const char* family;
  double cores;
  double node_nm;
};

// Catalogs are ordered worst to best so a wealth tilt can shift draws.
const std::vector<CpuSpec>& cpu_catalog() {
  static const std::vector<CpuSpec> c = {
      {"coppertail", "ct-100", 2, 22}, {"coppertail", "ct-200", 4, 14},
      {"silverline", "sl-300", 4, 14}, {"coppertail", "ct-400", 6, 12},
      {"silverline", "sl-500", 6, 10}, {"silverline", "sl-700", 8, 10},
      {"coppertail", "ct-800", 8, 7},  {"silverline", "sl-900", 12, 7},
      {"coppertail", "ct-950", 16, 5},
  };
  return c;
}

const std::vector<double>& ram_catalog() {
  static const std::vector<double> r = {4, 8, 8, 16, 16, 32, 64};
  return r;
}

const std::vector<std::string>& gpu_classes() {
  static const std::vector<std::string> g = {"integrated", "entry", "mid", "high",
                                             "flagship"};
  return g;
}

const std::vector<double>& laptop_screens() {
  static const std::vector<double> s = {11.6, 13.3, 14.0, 15.6, 17.3};
  return s;
}

const std::vector<double>& desktop_screens() {
  static const std::vector<double> s = {21.5, 24.0, 27.0, 31.5};
  return s;
}

const std::vector<std::string>& genre_list() {
  static const std::vector<std::string> g = {"adventure", "puzzle",     "racing",
                                             "rpg",       "shooter",    "simulation",
                                             "sports",    "strategy"};
  return g;
}

std::size_t tilted_index(RandomStream& rng, std::size_t n, double wealth01,
                         double tilt) {
  double u = rng.uniform() + tilt * (wealth01 - 0.5);
  u = std::clamp(u, 0.0, 1.0 - 1e-12);
  return static_cast<std::size_t>(u * static_cast<double>(n));
}

std::vector<std::string> pick_distinct(RandomStream& rng,
                                       const std::vector<std::string>& options,
                                       int count) {
  std::vector<std::string> pool = options;
  rng.shuffle(pool);
  pool.resize(static_cast<std::size_t>(
      std::min<std::size_t>(pool.size(), static_cast<std::size_t>(count))));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::string player_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%05d", i + 1);
  return buf;
}

std::string game_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "g%03d", i + 1);
  return buf;
}

void center_exactly(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

void validate(const GeneratorConfig& c) {
  require(c.players >= 2, "invalid_input", "generator: need at least 2 players");
  require(c.games >= 2, "invalid_input", "generator: need at least 2 games");
  require(c.pairs_per_player_min >= 1 &&
              c.pairs_per_player_max >= c.pairs_per_player_min,
          "invalid_input", "generator: bad pairs_per_player range");
  require(c.sessions_per_pair_min >= 1 &&
              c.sessions_per_pair_max >= c.sessions_per_pair_min,
          "invalid_input", "generator: bad sessions_per_pair range");
  require(c.fps_samples_per_session >= 1, "invalid_input",
          "generator: fps_samples_per_session must be >= 1");
  require(c.sigma_log > 0.0 && c.duration_sigma_log > 0.0, "invalid_input",
          "generator: log-space spreads must be positive");
  require(c.player_latent_std >= 0.0 && c.game_latent_std >= 0.0 &&
              c.pair_noise_std >= 0.0,
          "invalid_input", "generator: level stddevs must be non-negative");
  require(c.missing_rate >= 0.0 && c.missing_rate < 1.0, "invalid_input",
          "generator: missing_rate must be in [0, 1)");
}

}  // namespace

double WealthCoefficients::eval(double gdp_per_capita_usd, double gini_index) const {
  require(gdp_per_capita_usd > 0.0, "invalid_input",
          "wealth term needs positive GDP per capita");
  return log10_gdp * std::log10(gdp_per_capita_usd) + gini * gini_index + intercept;
}

const std::vector<CountrySpec>& default_countries() {
  static const std::vector<CountrySpec> t = {
      {"arvenia", 52000, 31, 8},  {"bellmare", 41000, 34, 7},
      {"cordia", 65000, 28, 4},   {"drellin", 23000, 38, 9},
      {"elvast", 31000, 33, 6},   {"feryn", 12000, 42, 12},
      {"galorne", 8500, 45, 14},  {"hystra", 18500, 40, 8},
      {"ilvek", 72000, 26, 2},    {"jorwick", 27500, 36, 6},
      {"kestrel_isles", 58000, 29, 3}, {"lumara", 15800, 41, 10},
      {"morvayne", 35500, 32, 5}, {"nerith", 9800, 47, 11},
      {"ostrava_del", 46500, 30, 4}, {"pellagio", 20500, 39, 7},
  };
  return t;
}

const std::map<std::string, double>& genre_offsets() {
  static const std::map<std::string, double> g = {
      {"adventure", 0.0}, {"puzzle", 3.5},     {"racing", -2.5}, {"rpg", -1.0},
      {"shooter", -4.0},  {"simulation", 1.0}, {"sports", 1.5},  {"strategy", 2.5},
  };
  return g;
}

std::string GeneratorConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["players"] = players;
  j["games"] = games;
  j["pairs_per_player_min"] = pairs_per_player_min;
  j["pairs_per_player_max"] = pairs_per_player_max;
  j["sessions_per_pair_min"] = sessions_per_pair_min;
  j["sessions_per_pair_max"] = sessions_per_pair_max;
  j["fps_samples_per_session"] = fps_samples_per_session;
  j["country_mix"] = country_mix;
  j["player_latent_std"] = player_latent_std;
  j["game_latent_std"] = game_latent_std;
  j["pair_noise_std"] = pair_noise_std;
  j["sigma_log"] = sigma_log;
  j["hardware_wealth_tilt"] = hardware_wealth_tilt;
  j["duration_mu_log"] = duration_mu_log;
  j["duration_sigma_log"] = duration_sigma_log;
  j["missing_rate"] = missing_rate;
  j["hardware"] = {{"intercept", hardware.intercept},
                   {"cpu_cores", hardware.cpu_cores},
                   {"ram_gb", hardware.ram_gb},
                   {"process_node_nm", hardware.process_node_nm},
                   {"screen_in", hardware.screen_in}};
  j["wealth"] = {{"log10_gdp", wealth.log10_gdp},
                 {"gini", wealth.gini},
                 {"intercept", wealth.intercept}};
  return j.dump(2) + "\n";
}

GeneratorConfig GeneratorConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("invalid_input", std::string("generator config: ") + e.what());
  }
  GeneratorConfig c;
  c.seed = j.value("seed", c.seed);
  c.players = j.value("players", c.players);
  c.games = j.value("games", c.games);
  c.pairs_per_player_min = j.value("pairs_per_player_min", c.pairs_per_player_min);
  c.pairs_per_player_max = j.value("pairs_per_player_max", c.pairs_per_player_max);
  c.sessions_per_pair_min = j.value("sessions_per_pair_min", c.sessions_per_pair_min);
  c.sessions_per_pair_max = j.value("sessions_per_pair_max", c.sessions_per_pair_max);
  c.fps_samples_per_session =
      j.value("fps_samples_per_session", c.fps_samples_per_session);
  c.country_mix = j.value("country_mix", c.country_mix);
  c.player_latent_std = j.value("player_latent_std", c.player_latent_std);
  c.game_latent_std = j.value("game_latent_std", c.game_latent_std);
  c.pair_noise_std = j.value("pair_noise_std", c.pair_noise_std);
  c.sigma_log = j.value("sigma_log", c.sigma_log);
  c.hardware_wealth_tilt = j.value("hardware_wealth_tilt", c.hardware_wealth_tilt);
  c.duration_mu_log = j.value("duration_mu_log", c.duration_mu_log);
  c.duration_sigma_log = j.value("duration_sigma_log", c.duration_sigma_log);
  c.missing_rate = j.value("missing_rate", c.missing_rate);
  if (j.contains("hardware")) {
    const auto& h = j.at("hardware");
    c.hardware.intercept = h.value("intercept", c.hardware.intercept);
    c.hardware.cpu_cores = h.value("cpu_cores", c.hardware.cpu_cores);
    c.hardware.ram_gb = h.value("ram_gb", c.hardware.ram_gb);
    c.hardware.process_node_nm = h.value("process_node_nm", c.hardware.process_node_nm);
    c.hardware.screen_in = h.value("screen_in", c.hardware.screen_in);
  }
  if (j.contains("wealth")) {
    const auto& w = j.at("wealth");
    c.wealth.log10_gdp = w.value("log10_gdp", c.wealth.log10_gdp);
    c.wealth.gini = w.value("gini", c.wealth.gini);
    c.wealth.intercept = w.value("intercept", c.wealth.intercept);
  }
  return c;
}

GeneratedSummary generate(const GeneratorConfig& config,
                          const std::filesystem::path& out_dir) {
  validate(config);
  const auto& countries = default_countries();

  // Wealth rank in [0, 1] for the hardware tilt, from the country term.
  std::vector<double> eq2(countries.size());
  for (std::size_t i = 0; i < countries.size(); ++i) {
    eq2[i] = config.wealth.eval(countries[i].gdp_per_capita_usd, countries[i].gini);
  }
  double eq2_lo = *std::min_element(eq2.begin(), eq2.end());
  double eq2_hi = *std::max_element(eq2.begin(), eq2.end());
  std::vector<double> wealth01(countries.size(), 0.5);
  if (eq2_hi > eq2_lo) {
    for (std::size_t i = 0; i < countries.size(); ++i) {
      wealth01[i] = (eq2[i] - eq2_lo) / (eq2_hi - eq2_lo);
    }
  }
  std::vector<double> pop_weights(countries.size());
  for (std::size_t i = 0; i < countries.size(); ++i) {
    pop_weights[i] = countries[i].population_weight;
  }

  struct PlayerDraw {
    std::string guid;
    std::size_t country = 0;
    bool laptop = false;
    std::size_t cpu = 0;
    double ram = 0.0;
    double screen = 0.0;
    std::string gpu_class;
    std::string os;
    std::string age;
    double eq1 = 0.0;
    // Filled from the session loop.
    std::int64_t sessions = 0;
    double duration_sum = 0.0;
    int n_pairs = 0;
  };

  RandomStream player_rng(config.seed, "gen.players");
  std::vector<PlayerDraw> players(static_cast<std::size_t>(config.players));
  const std::vector<std::string> os_options = {"win10", "win11", "linux"};
  const std::vector<double> os_weights = {0.35, 0.55, 0.10};
  const std::vector<std::string> age_options = {"lt_1y", "1_2y", "2_4y", "gt_4y"};
  const std::vector<double> age_weights = {0.2, 0.35, 0.3, 0.15};
  for (int i = 0; i < config.players; ++i) {
    PlayerDraw& p = players[static_cast<std::size_t>(i)];
    p.guid = player_id(i);
    p.country = player_rng.weighted_index(pop_weights);
    double w = wealth01[p.country];
    p.laptop = player_rng.uniform() < 0.45;
    p.cpu = tilted_index(player_rng, cpu_catalog().size(), w, config.hardware_wealth_tilt);
    p.ram = ram_catalog()[tilted_index(player_rng, ram_catalog().size(), w,
                                       config.hardware_wealth_tilt)];
    const auto& screens = p.laptop ? laptop_screens() : desktop_screens();
    p.screen = screens[tilted_index(player_rng, screens.size(), w,
                                    config.hardware_wealth_tilt)];
    p.gpu_class = gpu_classes()[tilted_index(player_rng, gpu_classes().size(), w,
                                             config.hardware_wealth_tilt)];
    p.os = os_options[player_rng.weighted_index(os_weights)];
    p.age = age_options[player_rng.weighted_index(age_weights)];
    const CpuSpec& cpu = cpu_catalog()[p.cpu];
    p.eq1 = config.hardware.eval(cpu.cores, p.ram, cpu.node_nm, p.screen);
  }

  double mean_eq2 = 0.0;
  for (const auto& p : players) mean_eq2 += eq2[p.country];
  mean_eq2 /= static_cast<double>(players.size());

  RandomStream player_latent_rng(config.seed, "gen.player_latents");
  std::vector<double> u(players.size());
  for (double& v : u) v = player_latent_rng.normal(0.0, config.player_latent_std);
  center_exactly(u);

  struct GameDraw {
    std::string id;
    std::vector<std::string> genres, modes, perspectives, themes;
    std::string category, age_rating, dlc;
    double platform_count = 0, languages = 0, follows = 0;
    double rating = 0, rating_count = 0;
    double agg_rating = 0, agg_rating_count = 0;
    double total_rating = 0, total_rating_count = 0;
    int year = 0, month = 0;
    double genre_offset = 0.0;
  };

  RandomStream game_rng(config.seed, "gen.games");
  std::vector<GameDraw> games(static_cast<std::size_t>(config.games));
  const std::vector<std::string> mode_list = {"single_player", "multiplayer", "coop"};
  const std::vector<std::string> perspective_list = {"first_person", "third_person",
                                                     "top_down"};
  const std::vector<std::string> theme_list = {"fantasy", "scifi", "horror",
                                               "historical", "modern"};
  const std::vector<std::string> category_options = {"main_game", "expansion",
                                                     "remaster"};
  const std::vector<double> category_weights = {0.75, 0.15, 0.10};
  const std::vector<std::string> age_ratings = {"E", "E10", "T", "M"};
  for (int g = 0; g < config.games; ++g) {
    GameDraw& gd = games[static_cast<std::size_t>(g)];
    gd.id = game_id(g);
    gd.genres = pick_distinct(game_rng, genre_list(),
                              static_cast<int>(game_rng.uniform_int(1, 3)));
    gd.modes = pick_distinct(game_rng, mode_list,
                             static_cast<int>(game_rng.uniform_int(1, 2)));
    gd.perspectives = pick_distinct(game_rng, perspective_list,
                                    static_cast<int>(game_rng.uniform_int(1, 2)));
    gd.themes = pick_distinct(game_rng, theme_list,
                              static_cast<int>(game_rng.uniform_int(1, 2)));
    gd.category = category_options[game_rng.weighted_index(category_weights)];
    gd.age_rating = age_ratings[static_cast<std::size_t>(game_rng.uniform_int(0, 3))];
    gd.dlc = game_rng.uniform() < 0.35 ? "true" : "false";
    gd.platform_count = static_cast<double>(game_rng.uniform_int(1, 5));
    gd.languages = static_cast<double>(game_rng.uniform_int(1, 25));
    gd.follows = static_cast<double>(
        std::llround(game_rng.lognormal(std::log(800.0), 1.2)));
    gd.rating = round1(game_rng.uniform(55.0, 92.0));
    gd.rating_count = static_cast<double>(game_rng.uniform_int(10, 3000));
    gd.agg_rating = round1(game_rng.uniform(50.0, 95.0));
    gd.agg_rating_count = static_cast<double>(game_rng.uniform_int(3, 150));
    gd.total_rating = round1(0.5 * (gd.rating + gd.agg_rating));
    gd.total_rating_count = gd.rating_count + gd.agg_rating_count;
    gd.year = static_cast<int>(game_rng.uniform_int(2004, 2024));
    gd.month = static_cast<int>(game_rng.uniform_int(1, 12));
    double off = 0.0;
    for (const auto& genre : gd.genres) off += genre_offsets().at(genre);
    gd.genre_offset = off / static_cast<double>(gd.genres.size());
  }

  RandomStream game_latent_rng(config.seed, "gen.game_latents");
  std::vector<double> v(games.size());
  for (double& x : v) x = game_latent_rng.normal(0.0, config.game_latent_std);
  center_exactly(v);

  // Pair assembly: which games each player plays, and each pair's level.
  RandomStream pair_rng(config.seed, "gen.pairs");
  struct PairDraw {
    std::size_t player = 0;
    std::size_t game = 0;
    double mu = 0.0;
  };
  std::vector<PairDraw> pairs;
  std::map<std::string, double> pair_mu;
  for (std::size_t pi = 0; pi < players.size(); ++pi) {
    PlayerDraw& p = players[pi];
    int want = static_cast<int>(pair_rng.uniform_int(config.pairs_per_player_min,
                                                     config.pairs_per_player_max));
    want = std::min(want, config.games);
    std::vector<std::size_t> game_order(games.size());
    std::iota(game_order.begin(), game_order.end(), 0);
    pair_rng.shuffle(game_order);
    p.n_pairs = want;
    for (int j = 0; j < want; ++j) {
      std::size_t gi = game_order[static_cast<std::size_t>(j)];
      double noise = pair_rng.normal(0.0, config.pair_noise_std);
      double mu = p.eq1 + config.country_mix * (eq2[p.country] - mean_eq2) + u[pi] +
                  v[gi] + games[gi].genre_offset + noise;
      mu = std::max(mu, 5.0);
      pairs.push_back({pi, gi, mu});
      pair_mu[p.guid + "|" + games[gi].id] = mu;
    }
  }

  // Sessions: durations, display settings, and the sampled rate histograms.
  RandomStream session_rng(config.seed, "gen.sessions");
  std::vector<telemetry::SessionRecord> sessions;
  const std::vector<std::string> windowed_options = {"Full", "Window", "Unknown"};
  const std::vector<double> windowed_weights = {0.7, 0.2, 0.1};
  const std::vector<std::string> gm_options = {"true", "false", "unknown"};
  const std::vector<double> gm_weights = {0.45, 0.45, 0.1};
  for (const PairDraw& pd : pairs) {
    PlayerDraw& p = players[pd.player];
    int n_sessions = static_cast<int>(session_rng.uniform_int(
        config.sessions_per_pair_min, config.sessions_per_pair_max));
    double mu_log = std::log(pd.mu) + kZ95 * config.sigma_log;
    for (int s = 0; s < n_sessions; ++s) {
      telemetry::SessionRecord rec;
      rec.player_guid = p.guid;
      rec.game_id = games[pd.game].id;
      rec.duration_s =
          session_rng.lognormal(config.duration_mu_log, config.duration_sigma_log);
      rec.windowed_mode = windowed_options[session_rng.weighted_index(windowed_weights)];
      rec.game_mode_on = gm_options[session_rng.weighted_index(gm_weights)];
      double sum = 0.0;
      for (int f = 0; f < config.fps_samples_per_session; ++f) {
        double fps = session_rng.lognormal(mu_log, config.sigma_log);
        rec.hist.add_sample(fps);
        sum += fps;
      }
      rec.avg_fps = sum / static_cast<double>(config.fps_samples_per_session);
      p.sessions += 1;
      p.duration_sum += rec.duration_s;
      sessions.push_back(std::move(rec));
    }
  }

  // File assembly. Missing cells are drawn per row in fixed field order and
  // only ever hit fields outside the planted level equation.
  RandomStream missing_rng(config.seed, "gen.missing");
  io::OutputDir out(out_dir);

  io::CsvTable countries_csv;
  countries_csv.columns = {"country", "gdp_per_capita_usd", "gini"};
  for (const auto& c : countries) {
    countries_csv.rows.push_back({c.name, io::format_double(c.gdp_per_capita_usd),
                                  io::format_double(c.gini)});
  }
  io::write_csv(out.file("countries.csv"), countries_csv);

  io::CsvTable players_csv;
  players_csv.columns = {"guid",
                         "avg_sessions_per_month",
                         "avg_duration_per_session",
                         "game_portion",
                         "distinct_game_count",
                         "ram_gb",
                         "cpu_cores",
                         "cpu_process_node_nm",
                         "screen_size_in",
                         "chassis_type",
                         "cpu_vendor",
                         "cpu_family",
                         "gpu_class",
                         "gpu_category",
                         "discrete_graphics",
                         "os",
                         "country",
                         "device_age_category"};
  for (const auto& p : players) {
    const CpuSpec& cpu = cpu_catalog()[p.cpu];
    bool integrated = p.gpu_class == "integrated";
    std::string gpu_category =
        integrated ? "igpu" : (p.laptop ? "dgpu_mobile" : "dgpu_desktop");
    std::string os = p.os;
    std::string age = p.age;
    if (missing_rng.uniform() < config.missing_rate) gpu_category.clear();
    if (missing_rng.uniform() < config.missing_rate) os.clear();
    if (missing_rng.uniform() < config.missing_rate) age.clear();
    double avg_duration =
        p.sessions > 0 ? p.duration_sum / static_cast<double>(p.sessions) : 0.0;
    players_csv.rows.push_back(
        {p.guid,
         io::format_double(static_cast<double>(p.sessions) / 3.0),
         io::format_double(avg_duration),
         io::format_double(static_cast<double>(p.n_pairs) /
                           static_cast<double>(config.games)),
         io::format_double(static_cast<double>(p.n_pairs)),
         io::format_double(p.ram),
         io::format_double(cpu.cores),
         io::format_double(cpu.node_nm),
         io::format_double(p.screen),
         p.laptop ? "laptop" : "desktop",
         cpu.vendor,
         cpu.family,
         p.gpu_class,
         gpu_category,
         integrated ? "false" : "true",
         os,
         countries[p.country].name,
         age});
  }
  io::write_csv(out.file("players.csv"), players_csv);

  io::CsvTable games_csv;
  games_csv.columns = {"id",
                       "platform_count",
                       "language_support_count",
                       "follows",
                       "rating",
                       "rating_count",
                       "aggregated_rating",
                       "aggregated_rating_count",
                       "total_rating",
                       "total_rating_count",
                       "first_release_date",
                       "category",
                       "age_rating",
                       "dlc_available",
                       "genres",
                       "game_modes",
                       "player_perspectives",
                       "themes"};
  auto join_tags = [](const std::vector<std::string>& tags) {
    std::string out_cell;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (i) out_cell += ';';
      out_cell += tags[i];
    }
    return out_cell;
  };
  for (const auto& g : games) {
    std::vector<std::string> row = {
        g.id,
        io::format_double(g.platform_count),
        io::format_double(g.languages),
        io::format_double(g.follows),
        io::format_double(g.rating),
        io::format_double(g.rating_count),
        io::format_double(g.agg_rating),
        io::format_double(g.agg_rating_count),
        io::format_double(g.total_rating),
        io::format_double(g.total_rating_count),
        std::to_string(g.year) + "-" + std::to_string(g.month),
        g.category,
        g.age_rating,
        g.dlc,
        join_tags(g.genres),
        join_tags(g.modes),
        join_tags(g.perspectives),
        join_tags(g.themes)};
    // Columns 2..10 (the optional metadata numerics) and the release date can
    // be blank; ids, category fields, and tags always survive.
    for (std::size_t col = 2; col <= 10; ++col) {
      if (missing_rng.uniform() < config.missing_rate) row[col].clear();
    }
    games_csv.rows.push_back(std::move(row));
  }
  io::write_csv(out.file("games.csv"), games_csv);

  features::write_sessions_jsonl(out.file("sessions.jsonl"), sessions);

  json truth;
  truth["config"] = json::parse(config.to_json());
  truth["mean_eq2"] = mean_eq2;
  json genre_j;
  for (const auto& [name, off] : genre_offsets()) genre_j[name] = off;
  truth["genre_offsets"] = genre_j;
  json players_j;
  for (std::size_t i = 0; i < players.size(); ++i) {
    json pj;
    pj["u"] = u[i];
    pj["eq1"] = players[i].eq1;
    pj["country_term"] =
        config.country_mix * (eq2[players[i].country] - mean_eq2);
    players_j[players[i].guid] = pj;
  }
  truth["players"] = players_j;
  json games_j;
  for (std::size_t i = 0; i < games.size(); ++i) {
    json gj;
    gj["v"] = v[i];
    gj["genre_offset"] = games[i].genre_offset;
    games_j[games[i].id] = gj;
  }
  truth["games"] = games_j;
  json mu_j;
  for (const auto& [key, mu] : pair_mu) mu_j[key] = mu;
  truth["pair_mu"] = mu_j;
  io::write_file(out.file("truth.json"), truth.dump(2) + "\n");

  GeneratedSummary summary;
  summary.players = config.players;
  summary.games = config.games;
  summary.sessions = static_cast<std::int64_t>(sessions.size());
  summary.pairs = static_cast<std::int64_t>(pairs.size());
  summary.files = {"countries.csv", "players.csv", "games.csv", "sessions.jsonl",
                   "truth.json"};
  out.commit();
  return summary;
}

PlantedTruth load_truth(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail("invalid_input", std::string("truth file: ") + e.what());
  }
  PlantedTruth t;
  t.config = GeneratorConfig::from_json(j.at("config").dump());
  t.mean_eq2 = j.at("mean_eq2").get<double>();
  for (const auto& [guid, pj] : j.at("players").items()) {
    t.player_latents[guid] = pj.at("u").get<double>();
    t.player_hardware[guid] = pj.at("eq1").get<double>();
    t.player_country_term[guid] = pj.at("country_term").get<double>();
  }
  for (const auto& [id, gj] : j.at("games").items()) {
    t.game_latents[id] = gj.at("v").get<double>();
    t.game_genre_offset[id] = gj.at("genre_offset").get<double>();
  }
  for (const auto& [key, mu] : j.at("pair_mu").items()) {
    t.pair_mu[key] = mu.get<double>();
  }
  return t;
}

telemetry::ClassDistribution truth_distribution(double mu, double sigma_log, int k) {
  require(mu > 0.0 && sigma_log > 0.0, "invalid_input",
          "truth_distribution: mu and sigma_log must be positive");
  require(k == telemetry::kClassCount || k == telemetry::kBinCount, "invalid_input",
          "truth_distribution: k must be 5 or 42");
  double mu_log = std::log(mu) + kZ95 * sigma_log;
  auto log_cdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    return stats::normal_cdf((std::log(x) - mu_log) / sigma_log);
  };
  telemetry::ClassDistribution dist;
  dist.probs.resize(static_cast<std::size_t>(k));
  if (k == telemetry::kBinCount) {
    for (int b = 0; b < k; ++b) {
      dist.probs[static_cast<std::size_t>(b)] =
          log_cdf(telemetry::bin_upper_edge(b)) - log_cdf(telemetry::bin_lower_edge(b));
    }
  } else {
    std::array<double, 6> edges = {0.0, telemetry::kClassThresholdsHz[0],
                                   telemetry::kClassThresholdsHz[1],
                                   telemetry::kClassThresholdsHz[2],
                                   telemetry::kClassThresholdsHz[3],
                                   std::numeric_limits<double>::infinity()};
    for (int c = 0; c < k; ++c) {
      dist.probs[static_cast<std::size_t>(c)] =
          log_cdf(edges[static_cast<std::size_t>(c + 1)]) -
          log_cdf(edges[static_cast<std::size_t>(c)]);
    }
  }
  // Normalize away the last-ulp drift so the result validates as a distribution.
  double sum = std::accumulate(dist.probs.begin(), dist.probs.end(), 0.0);
  require(sum > 0.0, "degenerate_input", "truth_distribution: zero mass");
  for (double& p : dist.probs) p /= sum;
  dist.validate();
  return dist;
}

}  // namespace framecast::synthgen
