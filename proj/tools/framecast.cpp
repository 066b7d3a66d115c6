// Command-line front end: synthetic data generation, dataset preparation,
// training (centralized or simulated federated), evaluation, path ablation,
// statistical insights, single-pair prediction, and a gradient self-check.
//
// Every command that produces files takes --out and either writes all of its
// outputs or removes what it partially wrote and exits nonzero with a single
// machine-parsable JSON error line on stderr.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "framecast/baseline.hpp"
#include "framecast/error.hpp"
#include "framecast/features.hpp"
#include "framecast/fedsim.hpp"
#include "framecast/insights.hpp"
#include "framecast/io.hpp"
#include "framecast/lkk.hpp"
#include "framecast/metrics.hpp"
#include "framecast/nn.hpp"
#include "framecast/rng.hpp"
#include "framecast/synthgen.hpp"
#include "framecast/telemetry.hpp"

namespace fc = framecast;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct RunConfig {
  std::uint64_t seed = 1;
  int k = 5;
  std::string mode = "centralized";  // or "federated"
  fc::lkk::LkkDims dims;             // input_width filled from the data
  fc::nn::AdamConfig optimizer;
  double l1_lambda = 1e-9;
  std::int64_t gate_player_min = 3;
  std::int64_t gate_game_min = 10;
  bool timing = false;

  int epochs = 100;      // centralized
  int batch_size = 256;  // centralized; 0 = full batch

  int rounds = 150;  // federated
  int clients_per_round = 0;
  int local_steps = 1;
  int fed_batch_size = 0;
  double local_lr = 1e-3;
  int aggregation_min_clients = 1;
};

RunConfig load_run_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  json j;
  try {
    j = json::parse(fc::io::read_file(path));
  } catch (const json::exception& e) {
    fc::fail("config", std::string("run config: ") + e.what());
  }
  c.seed = j.value("seed", c.seed);
  c.k = j.value("k", c.k);
  c.mode = j.value("mode", c.mode);
  if (c.mode != "centralized" && c.mode != "federated") {
    fc::fail("config", "mode must be 'centralized' or 'federated'");
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    c.dims.enc_hidden = m.value("enc_hidden", c.dims.enc_hidden);
    c.dims.latent = m.value("latent", c.dims.latent);
    c.dims.dec_hidden = m.value("dec_hidden", c.dims.dec_hidden);
    c.dims.kernel_dim = m.value("kernel_dim", c.dims.kernel_dim);
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    c.optimizer.lr = o.value("lr", c.optimizer.lr);
    c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
    c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
    c.optimizer.eps = o.value("eps", c.optimizer.eps);
    c.l1_lambda = o.value("l1_lambda", c.l1_lambda);
  }
  if (j.contains("gate")) {
    const auto& g = j.at("gate");
    c.gate_player_min = g.value("player_min_records", c.gate_player_min);
    c.gate_game_min = g.value("game_min_records", c.gate_game_min);
  }
  c.timing = j.value("timing", c.timing);
  if (j.contains("centralized")) {
    const auto& t = j.at("centralized");
    c.epochs = t.value("epochs", c.epochs);
    c.batch_size = t.value("batch_size", c.batch_size);
  }
  if (j.contains("federated")) {
    const auto& f = j.at("federated");
    c.rounds = f.value("rounds", c.rounds);
    c.clients_per_round = f.value("clients_per_round", c.clients_per_round);
    c.local_steps = f.value("local_steps", c.local_steps);
    c.fed_batch_size = f.value("batch_size", c.fed_batch_size);
    c.local_lr = f.value("local_lr", c.local_lr);
    c.aggregation_min_clients =
        f.value("aggregation_min_clients", c.aggregation_min_clients);
  }
  return c;
}

std::vector<std::string> distinct_ids(const std::vector<fc::features::EncodedPair>& pairs,
                                      bool players) {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs) {
    const std::string& id = players ? p.player_guid : p.game_id;
    if (seen.insert(id).second) ids.push_back(id);
  }
  return ids;
}

std::string schema_hash_from_file(const std::string& path) {
  if (path.empty()) return "";
  auto schema = fc::features::EncodingSchema::from_json(fc::io::read_file(path));
  return schema.hash_hex();
}

struct TrainedModel {
  fc::lkk::LkkModel model;
  fc::lkk::GatePolicy gate;
  std::vector<fc::fedsim::RoundLog> logs;
};

TrainedModel train_with_config(const RunConfig& cfg,
                               const std::vector<fc::features::EncodedPair>& train,
                               const std::vector<fc::features::EncodedPair>& val) {
  fc::require(!train.empty(), "invalid_input", "train: empty training set");
  fc::lkk::LkkDims dims = cfg.dims;
  dims.input_width = static_cast<int>(train.front().features.size());
  dims.k_classes = cfg.k;
  TrainedModel out{
      fc::lkk::LkkModel(dims, cfg.seed, distinct_ids(train, true),
                        distinct_ids(train, false)),
      fc::lkk::GatePolicy{},
      {}};
  out.gate.player_min_records = cfg.gate_player_min;
  out.gate.game_min_records = cfg.gate_game_min;

  if (cfg.mode == "federated") {
    fc::fedsim::FederatedConfig fedcfg;
    fedcfg.k = cfg.k;
    fedcfg.rounds = cfg.rounds;
    fedcfg.clients_per_round = cfg.clients_per_round;
    fedcfg.local_steps = cfg.local_steps;
    fedcfg.batch_size = cfg.fed_batch_size;
    fedcfg.local_lr = cfg.local_lr;
    fedcfg.aggregation_min_clients = cfg.aggregation_min_clients;
    fedcfg.optimizer = cfg.optimizer;
    fedcfg.l1_lambda = cfg.l1_lambda;
    fedcfg.seed = cfg.seed;
    fedcfg.timing = cfg.timing;
    out.logs = fc::fedsim::run_federated(out.model, out.gate, train, val, fedcfg);
  } else {
    fc::fedsim::CentralizedConfig ccfg;
    ccfg.k = cfg.k;
    ccfg.epochs = cfg.epochs;
    ccfg.batch_size = cfg.batch_size;
    ccfg.optimizer = cfg.optimizer;
    ccfg.l1_lambda = cfg.l1_lambda;
    ccfg.seed = cfg.seed;
    ccfg.timing = cfg.timing;
    out.logs = fc::fedsim::run_centralized(out.model, out.gate, train, val, ccfg);
  }
  return out;
}

void write_logs(const std::filesystem::path& path,
                const std::vector<fc::fedsim::RoundLog>& logs) {
  std::string text;
  for (const auto& log : logs) fc::io::append_line(text, log.to_json_line());
  fc::io::write_file(path, text);
}

ordered_json report_row(const std::string& variant,
                        const fc::metrics::MetricsReport& rep) {
  ordered_json j;
  j["variant"] = variant;
  j["wd"] = rep.wd;
  j["ce"] = rep.ce;
  j["kl"] = rep.kl;
  j["mae"] = rep.mae;
  j["top1_acc"] = rep.top1_acc;
  j["top2_acc"] = rep.top2_acc;
  j["adjacent_acc"] = rep.adjacent_acc;
  j["macro_f1"] = rep.macro_f1;
  return j;
}

// ---- commands ----

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            std::uint64_t* seed, int* players, int* games) {
  fc::synthgen::GeneratorConfig cfg;
  if (!config_path.empty()) {
    cfg = fc::synthgen::GeneratorConfig::from_json(fc::io::read_file(config_path));
  }
  if (seed) cfg.seed = *seed;
  if (players) cfg.players = *players;
  if (games) cfg.games = *games;
  fc::synthgen::GeneratedSummary s = fc::synthgen::generate(cfg, out_dir);
  ordered_json j;
  j["players"] = s.players;
  j["games"] = s.games;
  j["sessions"] = s.sessions;
  j["pairs"] = s.pairs;
  j["out"] = out_dir;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_prep(const std::string& sessions_path, const std::string& players_path,
             const std::string& games_path, const std::string& out_dir,
             double ratio, std::uint64_t seed) {
  auto sessions = fc::features::load_sessions_jsonl(sessions_path);
  auto players = fc::features::load_players_csv(players_path);
  auto games = fc::features::load_games_csv(games_path);
  fc::features::PrepOptions opt;
  opt.ratio = ratio;
  opt.seed = seed;
  fc::features::PrepResult r =
      fc::features::prep_pipeline(std::move(sessions), players, games, opt);

  fc::io::OutputDir out(out_dir);
  fc::io::write_file(out.file("schema.json"), r.schema.to_json());
  fc::features::write_pairs_jsonl(out.file("train.jsonl"), r.train);
  fc::features::write_pairs_jsonl(out.file("val.jsonl"), r.val);
  ordered_json j;
  j["sessions_in"] = r.sessions_in;
  j["sessions_kept"] = r.sessions_kept;
  j["pairs_built"] = r.pairs_built;
  j["pairs_dropped_empty"] = r.pairs_dropped_empty;
  j["train_pairs"] = r.train.size();
  j["val_pairs"] = r.val.size();
  j["feature_width"] = r.schema.width;
  j["schema_hash"] = r.schema.hash_hex();
  fc::io::write_file(out.file("prep_summary.json"), j.dump(2) + "\n");
  out.commit();
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_train(const std::string& train_path, const std::string& val_path,
              const std::string& config_path, const std::string& schema_path,
              const std::string& out_dir) {
  RunConfig cfg = load_run_config(config_path);
  auto train = fc::features::load_pairs_jsonl(train_path);
  std::vector<fc::features::EncodedPair> val;
  if (!val_path.empty()) val = fc::features::load_pairs_jsonl(val_path);
  std::string schema_hash = schema_hash_from_file(schema_path);

  TrainedModel t = train_with_config(cfg, train, val);

  fc::io::OutputDir out(out_dir);
  fc::lkk::save_checkpoint(out.file("model.fckp"), t.model, t.gate, schema_hash);
  write_logs(out.file("train_log.jsonl"), t.logs);
  ordered_json j;
  j["mode"] = cfg.mode;
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  j["n_train"] = train.size();
  j["n_val"] = val.size();
  j["input_width"] = t.model.dims().input_width;
  j["parameters"] = t.model.params().total_size();
  j["steps"] = t.logs.size();
  j["final_train_loss"] = t.logs.empty() ? 0.0 : t.logs.back().train_loss;
  if (!t.logs.empty() && t.logs.back().has_val) {
    j["final_val_wd"] = t.logs.back().val_wd;
    j["final_val_ce"] = t.logs.back().val_ce;
  }
  fc::io::write_file(out.file("train_summary.json"), j.dump(2) + "\n");
  out.commit();
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& pairs_path,
             const std::string& schema_path, const std::string& forced_path,
             const std::string& out_dir) {
  fc::lkk::LoadedCheckpoint loaded = fc::lkk::load_checkpoint(model_path);
  auto pairs = fc::features::load_pairs_jsonl(pairs_path);
  if (!schema_path.empty()) {
    std::string hash = schema_hash_from_file(schema_path);
    fc::require(loaded.schema_hash.empty() || loaded.schema_hash == hash,
                "key_mismatch",
                "eval: schema hash does not match the one recorded in the model");
  }
  int k = loaded.model.dims().k_classes;
  fc::metrics::Predictor predictor;
  if (forced_path.empty()) {
    predictor = fc::metrics::gated_predictor(loaded.model, loaded.gate);
  } else {
    predictor = fc::metrics::forced_path_predictor(
        loaded.model, fc::lkk::path_from_string(forced_path));
  }
  fc::metrics::MetricsReport rep = fc::metrics::evaluate(predictor, pairs, k);

  fc::io::OutputDir out(out_dir);
  fc::io::write_file(out.file("eval_report.json"), rep.to_json());
  fc::io::write_file(out.file("confusion.csv"), rep.confusion_csv());
  out.commit();
  ordered_json j = report_row(forced_path.empty() ? "gated" : forced_path, rep);
  j["n_pairs"] = rep.n_pairs;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_ablate(const std::string& train_path, const std::string& val_path,
               const std::string& config_path, const std::string& schema_path,
               const std::string& out_dir) {
  RunConfig cfg = load_run_config(config_path);
  auto train = fc::features::load_pairs_jsonl(train_path);
  auto val = fc::features::load_pairs_jsonl(val_path);
  fc::require(!val.empty(), "invalid_input", "ablate: empty validation set");
  std::string schema_hash = schema_hash_from_file(schema_path);

  TrainedModel t = train_with_config(cfg, train, val);

  std::vector<std::pair<std::string, fc::metrics::Predictor>> variants;
  variants.emplace_back("gated", fc::metrics::gated_predictor(t.model, t.gate));
  for (auto path : {fc::lkk::Path::WithoutKernels, fc::lkk::Path::WithPlayer,
                    fc::lkk::Path::WithGame, fc::lkk::Path::WithBoth}) {
    variants.emplace_back(fc::lkk::to_string(path),
                          fc::metrics::forced_path_predictor(t.model, path));
  }
  variants.emplace_back("uniform", fc::baseline::uniform_predictor(cfg.k));
  variants.emplace_back("train_prior", fc::baseline::prior_predictor(train, cfg.k));

  fc::baseline::BaselineConfig bcfg;
  bcfg.epochs = cfg.epochs;
  bcfg.batch_size = cfg.batch_size == 0 ? train.size() : cfg.batch_size;
  bcfg.seed = cfg.seed;
  auto regressor = std::make_shared<fc::baseline::SoftmaxRegressor>(
      train.front().features.size(), cfg.k, cfg.seed);
  regressor->fit(train, bcfg);
  variants.emplace_back("softmax_regression",
                        [regressor](const fc::features::EncodedPair& pair) {
                          fc::lkk::Prediction pred;
                          pred.path = fc::lkk::Path::WithoutKernels;
                          pred.dist.probs = regressor->predict_probs(pair.features);
                          pred.dist.validate();
                          return pred;
                        });

  ordered_json rows = ordered_json::array();
  fc::io::CsvTable csv;
  csv.columns = {"variant", "wd",       "ce",       "kl",      "mae",
                 "top1_acc", "top2_acc", "adjacent_acc", "macro_f1"};
  for (const auto& [name, predictor] : variants) {
    fc::metrics::MetricsReport rep = fc::metrics::evaluate(predictor, val, cfg.k);
    rows.push_back(report_row(name, rep));
    csv.rows.push_back({name, fc::io::format_double(rep.wd),
                        fc::io::format_double(rep.ce), fc::io::format_double(rep.kl),
                        fc::io::format_double(rep.mae),
                        fc::io::format_double(rep.top1_acc),
                        fc::io::format_double(rep.top2_acc),
                        fc::io::format_double(rep.adjacent_acc),
                        fc::io::format_double(rep.macro_f1)});
  }

  fc::io::OutputDir out(out_dir);
  fc::lkk::save_checkpoint(out.file("model.fckp"), t.model, t.gate, schema_hash);
  ordered_json j;
  j["k"] = cfg.k;
  j["mode"] = cfg.mode;
  j["n_train"] = train.size();
  j["n_val"] = val.size();
  j["variants"] = rows;
  fc::io::write_file(out.file("ablation.json"), j.dump(2) + "\n");
  fc::io::write_file(out.file("ablation.csv"), fc::io::format_csv(csv));
  out.commit();
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_insights(const std::string& sessions_path, const std::string& players_path,
                 const std::string& games_path, const std::string& countries_path,
                 const std::string& tukey_feature, const std::string& out_dir) {
  auto sessions = fc::features::load_sessions_jsonl(sessions_path);
  auto players = fc::features::load_players_csv(players_path);
  auto games = fc::features::load_games_csv(games_path);
  std::vector<fc::features::CountryRow> countries;
  if (!countries_path.empty()) {
    countries = fc::features::load_countries_csv(countries_path);
  }
  auto raws = fc::features::build_raw_pairs(std::move(sessions), players, games);
  fc::insights::InsightsReport rep = fc::insights::analyze(raws, countries);

  fc::io::OutputDir out(out_dir);
  fc::io::write_file(out.file("player_anova.csv"),
                     fc::insights::anova_csv(rep.player_anova));
  fc::io::write_file(out.file("game_anova.csv"),
                     fc::insights::anova_csv(rep.game_anova));
  fc::io::write_file(out.file("player_ols.csv"), fc::insights::ols_csv(rep.player_ols));
  fc::io::write_file(out.file("game_ols.csv"), fc::insights::ols_csv(rep.game_ols));
  if (!rep.country_effects.empty()) {
    fc::io::write_file(out.file("country_effects.csv"),
                       fc::insights::country_csv(rep.country_effects));
  }
  if (rep.has_macro) {
    fc::io::write_file(out.file("macro_ols.csv"), fc::insights::macro_csv(rep.macro));
  }
  if (!tukey_feature.empty()) {
    std::vector<std::string> names;
    fc::stats::TukeyResult tk = fc::insights::tukey_for_feature(raws, tukey_feature, &names);
    fc::io::write_file(out.file("tukey_" + tukey_feature + ".csv"),
                       fc::insights::tukey_csv(tk, names));
  }
  ordered_json j;
  j["pairs"] = raws.size();
  j["player_anova_rows"] = rep.player_anova.size();
  j["game_anova_rows"] = rep.game_anova.size();
  j["player_ols_r2"] = rep.player_ols.r_squared;
  j["countries"] = rep.country_effects.size();
  j["has_macro"] = rep.has_macro;
  fc::io::write_file(out.file("insights_summary.json"), j.dump(2) + "\n");
  out.commit();
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& players_path,
                const std::string& games_path, const std::string& schema_path,
                const std::string& player_guid, const std::string& game_id) {
  fc::lkk::LoadedCheckpoint loaded = fc::lkk::load_checkpoint(model_path);
  auto schema = fc::features::EncodingSchema::from_json(fc::io::read_file(schema_path));
  fc::require(loaded.schema_hash.empty() || loaded.schema_hash == schema.hash_hex(),
              "key_mismatch",
              "predict: schema hash does not match the one recorded in the model");
  auto players = fc::features::load_players_csv(players_path);
  auto games = fc::features::load_games_csv(games_path);

  const fc::features::Record* player = nullptr;
  for (const auto& p : players) {
    if (p.id == player_guid) player = &p;
  }
  fc::require(player != nullptr, "unknown_id", "predict: unknown player " + player_guid);
  const fc::features::Record* game = nullptr;
  for (const auto& g : games) {
    if (g.id == game_id) game = &g;
  }
  fc::require(game != nullptr, "unknown_id", "predict: unknown game " + game_id);

  // No observed sessions for the queried pair: the session settings stay
  // missing and encode as the indifferent 0.5 block.
  fc::features::RawPair raw;
  raw.player_guid = player_guid;
  raw.game_id = game_id;
  raw.fields = player->fields;
  for (const auto& [name, value] : game->fields) raw.fields[name] = value;

  std::vector<double> x = fc::features::encode(raw, schema);
  fc::require(static_cast<int>(x.size()) == loaded.model.dims().input_width,
              "shape_mismatch", "predict: schema width does not match the model");
  fc::lkk::Prediction pred =
      fc::lkk::predict(loaded.model, x, player_guid, game_id, loaded.gate);

  ordered_json j;
  j["player_guid"] = player_guid;
  j["game_id"] = game_id;
  j["path"] = fc::lkk::to_string(pred.path);
  j["k"] = pred.dist.k();
  j["probs"] = pred.dist.probs;
  j["argmax_class"] = fc::metrics::argmax_lowest(pred.dist.probs);
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int k, int samples, double tolerance) {
  fc::require(k == fc::telemetry::kClassCount || k == fc::telemetry::kBinCount,
              "invalid_input", "gradcheck: k must be 5 or 42");
  fc::lkk::LkkDims dims;
  dims.input_width = 17;
  dims.enc_hidden = 24;
  dims.latent = 12;
  dims.dec_hidden = 14;
  dims.kernel_dim = 6;
  dims.k_classes = k;

  fc::RandomStream rng(seed, "gradcheck.data");
  std::vector<std::string> player_ids = {"pa", "pb"};
  std::vector<std::string> game_ids = {"ga", "gb", "gc"};
  fc::lkk::LkkModel model(dims, seed, player_ids, game_ids);

  std::vector<fc::features::EncodedPair> pairs;
  for (int i = 0; i < samples; ++i) {
    fc::features::EncodedPair p;
    p.player_guid = player_ids[static_cast<std::size_t>(i) % player_ids.size()];
    p.game_id = game_ids[static_cast<std::size_t>(i) % game_ids.size()];
    p.features.resize(static_cast<std::size_t>(dims.input_width));
    for (double& v : p.features) v = rng.normal();
    std::int64_t total = 0;
    for (int b = 0; b < fc::telemetry::kBinCount; ++b) {
      p.bins[static_cast<std::size_t>(b)] = rng.uniform_int(0, 4);
      total += p.bins[static_cast<std::size_t>(b)];
    }
    if (total == 0) p.bins[10] = 1;
    auto classes = fc::telemetry::aggregate_to_classes({p.bins});
    for (int c = 0; c < fc::telemetry::kClassCount; ++c) {
      p.class_counts[static_cast<std::size_t>(c)] = classes[static_cast<std::size_t>(c)];
    }
    pairs.push_back(std::move(p));
  }

  fc::nn::GradCheckReport rep = fc::lkk::check_gradients(model, pairs, k, 6);
  ordered_json groups = ordered_json::array();
  double worst = 0.0;
  for (const auto& g : rep.groups) {
    ordered_json gj;
    gj["name"] = g.name;
    gj["max_rel_err"] = g.max_rel_err;
    gj["checked"] = g.checked;
    groups.push_back(gj);
    worst = std::max(worst, g.max_rel_err);
  }
  ordered_json j;
  j["k"] = k;
  j["samples"] = pairs.size();
  j["max_rel_err"] = worst;
  j["tolerance"] = tolerance;
  j["ok"] = worst <= tolerance;
  j["groups"] = groups;
  std::cout << j.dump(2) << "\n";
  return worst <= tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame-rate distribution modeling toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  int gen_players = 0, gen_games = 0;
  gen->add_option("--config", gen_config, "generator config JSON");
  gen->add_option("--out", gen_out, "output directory")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "override seed");
  auto* gen_players_opt = gen->add_option("--players", gen_players, "override player count");
  auto* gen_games_opt = gen->add_option("--games", gen_games, "override game count");

  // prep
  auto* prep = app.add_subcommand("prep", "build encoded train/val pairs");
  std::string prep_sessions, prep_players, prep_games, prep_out;
  double prep_ratio = 0.8;
  std::uint64_t prep_seed = 1;
  prep->add_option("--sessions", prep_sessions, "sessions jsonl")->required();
  prep->add_option("--players", prep_players, "players csv")->required();
  prep->add_option("--games", prep_games, "games csv")->required();
  prep->add_option("--out", prep_out, "output directory")->required();
  prep->add_option("--ratio", prep_ratio, "train fraction");
  prep->add_option("--seed", prep_seed, "split seed");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string train_train, train_val, train_config, train_schema, train_out;
  train->add_option("--train", train_train, "train pairs jsonl")->required();
  train->add_option("--val", train_val, "validation pairs jsonl");
  train->add_option("--config", train_config, "run config JSON");
  train->add_option("--schema", train_schema, "schema JSON (hash recorded)");
  train->add_option("--out", train_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a trained model");
  std::string eval_model, eval_pairs, eval_schema, eval_path, eval_out;
  eval->add_option("--model", eval_model, "model checkpoint")->required();
  eval->add_option("--pairs", eval_pairs, "pairs jsonl")->required();
  eval->add_option("--schema", eval_schema, "schema JSON (hash verified)");
  eval->add_option("--path", eval_path, "force one path: wo|wp|wg|wb");
  eval->add_option("--out", eval_out, "output directory")->required();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train once, compare all paths");
  std::string ab_train, ab_val, ab_config, ab_schema, ab_out;
  ablate->add_option("--train", ab_train, "train pairs jsonl")->required();
  ablate->add_option("--val", ab_val, "validation pairs jsonl")->required();
  ablate->add_option("--config", ab_config, "run config JSON");
  ablate->add_option("--schema", ab_schema, "schema JSON (hash recorded)");
  ablate->add_option("--out", ab_out, "output directory")->required();

  // insights
  auto* ins = app.add_subcommand("insights", "statistical analyses of floors");
  std::string ins_sessions, ins_players, ins_games, ins_countries, ins_tukey, ins_out;
  ins->add_option("--sessions", ins_sessions, "sessions jsonl")->required();
  ins->add_option("--players", ins_players, "players csv")->required();
  ins->add_option("--games", ins_games, "games csv")->required();
  ins->add_option("--countries", ins_countries, "countries csv");
  ins->add_option("--tukey", ins_tukey, "categorical feature for pairwise comparisons");
  ins->add_option("--out", ins_out, "output directory")->required();

  // predict
  auto* pred = app.add_subcommand("predict", "predict one player-game pair");
  std::string pr_model, pr_players, pr_games, pr_schema, pr_player, pr_game;
  pred->add_option("--model", pr_model, "model checkpoint")->required();
  pred->add_option("--players", pr_players, "players csv")->required();
  pred->add_option("--games", pr_games, "games csv")->required();
  pred->add_option("--schema", pr_schema, "schema JSON")->required();
  pred->add_option("--player", pr_player, "player guid")->required();
  pred->add_option("--game", pr_game, "game id")->required();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
  std::uint64_t gc_seed = 11;
  int gc_k = 5, gc_samples = 8;
  double gc_tol = 1e-5;
  gc->add_option("--seed", gc_seed, "seed");
  gc->add_option("--k", gc_k, "class count (5 or 42)");
  gc->add_option("--samples", gc_samples, "synthetic sample count");
  gc->add_option("--tolerance", gc_tol, "max relative error allowed");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) {
      return cmd_gen(gen_config, gen_out, gen_seed_opt->count() ? &gen_seed : nullptr,
                     gen_players_opt->count() ? &gen_players : nullptr,
                     gen_games_opt->count() ? &gen_games : nullptr);
    }
    if (prep->parsed()) {
      return cmd_prep(prep_sessions, prep_players, prep_games, prep_out, prep_ratio,
                      prep_seed);
    }
    if (train->parsed()) {
      return cmd_train(train_train, train_val, train_config, train_schema, train_out);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_model, eval_pairs, eval_schema, eval_path, eval_out);
    }
    if (ablate->parsed()) {
      return cmd_ablate(ab_train, ab_val, ab_config, ab_schema, ab_out);
    }
    if (ins->parsed()) {
      return cmd_insights(ins_sessions, ins_players, ins_games, ins_countries,
                          ins_tukey, ins_out);
    }
    if (pred->parsed()) {
      return cmd_predict(pr_model, pr_players, pr_games, pr_schema, pr_player, pr_game);
    }
    if (gc->parsed()) {
      return cmd_gradcheck(gc_seed, gc_k, gc_samples, gc_tol);
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const fc::Error& e) {
    json err;
    err["error"] = e.code();
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = "internal";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
