#include "framecast/fedsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "framecast/error.hpp"
#include "framecast/metrics.hpp"
#include "framecast/parallel.hpp"
#include "framecast/rng.hpp"

namespace framecast::fedsim {

std::vector<ClientShard> partition_by_player(
    const std::vector<features::EncodedPair>& train) {
  require(!train.empty(), "invalid_input", "partition_by_player: empty train set");
  std::vector<ClientShard> shards;
  std::unordered_map<std::string, std::size_t> by_player;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto [it, inserted] = by_player.try_emplace(train[i].player_guid, shards.size());
    if (inserted) shards.push_back({train[i].player_guid, {}});
    shards[it->second].indices.push_back(i);
  }
  return shards;
}

ClientResult client_round(const lkk::LkkModel& global_model,
                          const std::vector<features::EncodedPair>& train,
                          const ClientShard& shard,
                          const std::vector<std::size_t>& batch_indices, int k,
                          double l1_lambda, int local_steps, double local_lr,
                          int round) {
  require(!batch_indices.empty(), "invalid_input",
          "client_round: empty batch for client " + shard.player_guid);
  require(local_steps >= 1, "invalid_input", "client_round: local_steps must be >= 1");

  lkk::LkkModel local = global_model;
  std::size_t n_params = local.params().total_size();
  std::vector<double> mean_grad(n_params, 0.0);
  double first_loss = 0.0;

  for (int step = 0; step < local_steps; ++step) {
    local.params().zero_grads();
    double loss = local.batch_loss_and_grad(train, batch_indices, k);
    loss += nn::l1_penalty(local.params(), l1_lambda);
    if (step == 0) first_loss = loss;
    std::vector<double> g = local.params().flatten_grads();
    for (std::size_t j = 0; j < n_params; ++j) mean_grad[j] += g[j];
    if (step + 1 < local_steps) {
      std::vector<double> values = local.params().flatten_values();
      for (std::size_t j = 0; j < n_params; ++j) values[j] -= local_lr * g[j];
      local.params().load_values(values);
    }
  }
  if (local_steps > 1) {
    double inv = 1.0 / static_cast<double>(local_steps);
    for (double& v : mean_grad) v *= inv;
  }

  ClientResult result;
  result.packet.client_id = shard.player_guid;
  result.packet.round = round;
  result.packet.sample_count = static_cast<std::int64_t>(batch_indices.size());
  result.packet.gradient = std::move(mean_grad);
  result.local_loss = first_loss;
  return result;
}

std::vector<double> aggregate_packets(const std::vector<GradientPacket>& packets,
                                      int min_clients) {
  require(min_clients >= 1, "invalid_input", "aggregate_packets: min_clients must be >= 1");
  require(static_cast<int>(packets.size()) >= min_clients, "invalid_input",
          "aggregate_packets: fewer packets than the aggregation threshold");
  std::size_t n_params = packets.front().gradient.size();
  double total = 0.0;
  for (const auto& p : packets) {
    require(p.gradient.size() == n_params, "shape_mismatch",
            "aggregate_packets: packet gradient sizes differ");
    require(p.sample_count > 0, "invalid_input",
            "aggregate_packets: packet with no samples");
    total += static_cast<double>(p.sample_count);
  }
  std::vector<double> sum(n_params, 0.0);
  std::vector<double> comp(n_params, 0.0);
  for (const auto& p : packets) {
    double w = static_cast<double>(p.sample_count) / total;
    for (std::size_t j = 0; j < n_params; ++j) {
      double term = w * p.gradient[j] - comp[j];
      double t = sum[j] + term;
      comp[j] = (t - sum[j]) - term;
      sum[j] = t;
    }
  }
  return sum;
}

std::string RoundLog::to_json_line() const {
  nlohmann::ordered_json j;
  j["round"] = round;
  j["clients"] = participants;
  j["train_loss"] = train_loss;
  if (has_val) {
    j["val_WD"] = val_wd;
    j["val_CE"] = val_ce;
  }
  if (wall_ms >= 0.0) j["wall_ms"] = wall_ms;
  return j.dump();
}

namespace {

void fill_val_metrics(RoundLog& log, const lkk::LkkModel& model,
                      const lkk::GatePolicy& gate,
                      const std::vector<features::EncodedPair>& val, int k) {
  if (val.empty()) return;
  metrics::MetricsReport rep =
      metrics::evaluate(metrics::gated_predictor(model, gate), val, k);
  log.has_val = true;
  log.val_wd = rep.wd;
  log.val_ce = rep.ce;
}

}  // namespace

std::vector<RoundLog> run_centralized(lkk::LkkModel& model, lkk::GatePolicy& gate,
                                      const std::vector<features::EncodedPair>& train,
                                      const std::vector<features::EncodedPair>& val,
                                      const CentralizedConfig& config) {
  require(!train.empty(), "invalid_input", "run_centralized: empty train set");
  require(config.epochs >= 1, "invalid_input", "run_centralized: epochs must be >= 1");
  require(config.batch_size >= 0, "invalid_input",
          "run_centralized: batch_size must be >= 0");

  nn::Adam opt(config.optimizer);
  RandomStream rng(config.seed, "central.shuffle");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t batch = config.batch_size == 0
                          ? train.size()
                          : static_cast<std::size_t>(config.batch_size);

  std::vector<RoundLog> logs;
  logs.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto started = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t stop = std::min(order.size(), start + batch);
      std::span<const std::size_t> slice(order.data() + start, stop - start);
      lkk::TrainStepResult step =
          lkk::train_step(model, train, slice, config.k, gate, config.l1_lambda);
      std::vector<double> values = model.params().flatten_values();
      opt.step(values, step.gradient);
      model.params().load_values(values);
      epoch_loss += step.loss * static_cast<double>(stop - start);
      ++batches;
    }
    RoundLog log;
    log.round = epoch;
    log.participants = batches;
    log.train_loss = epoch_loss / static_cast<double>(train.size());
    fill_val_metrics(log, model, gate, val, config.k);
    if (config.timing) {
      log.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

std::vector<RoundLog> run_federated(lkk::LkkModel& model, lkk::GatePolicy& gate,
                                    const std::vector<features::EncodedPair>& train,
                                    const std::vector<features::EncodedPair>& val,
                                    const FederatedConfig& config) {
  require(config.rounds >= 1, "invalid_input", "run_federated: rounds must be >= 1");
  require(config.clients_per_round >= 0, "invalid_input",
          "run_federated: clients_per_round must be >= 0");
  require(config.batch_size >= 0, "invalid_input",
          "run_federated: batch_size must be >= 0");

  std::vector<ClientShard> shards = partition_by_player(train);
  nn::Adam opt(config.optimizer);
  RandomStream select_rng(config.seed, "fed.select");
  RandomStream batch_rng(config.seed, "fed.batch");

  std::vector<RoundLog> logs;
  logs.reserve(static_cast<std::size_t>(config.rounds));
  for (int round = 0; round < config.rounds; ++round) {
    auto started = std::chrono::steady_clock::now();

    // Client selection: all of them, or a seeded sample without replacement,
    // processed in shard order either way.
    std::vector<std::size_t> selected(shards.size());
    std::iota(selected.begin(), selected.end(), 0);
    if (config.clients_per_round > 0 &&
        static_cast<std::size_t>(config.clients_per_round) < shards.size()) {
      select_rng.shuffle(selected);
      selected.resize(static_cast<std::size_t>(config.clients_per_round));
      std::sort(selected.begin(), selected.end());
    }

    // Per-client batches are drawn up front on one stream so the concurrent
    // section stays free of shared RNG state.
    std::vector<std::vector<std::size_t>> batches(selected.size());
    for (std::size_t c = 0; c < selected.size(); ++c) {
      const auto& all = shards[selected[c]].indices;
      if (config.batch_size == 0 ||
          static_cast<std::size_t>(config.batch_size) >= all.size()) {
        batches[c] = all;
      } else {
        std::vector<std::size_t> pool = all;
        batch_rng.shuffle(pool);
        pool.resize(static_cast<std::size_t>(config.batch_size));
        std::sort(pool.begin(), pool.end());
        batches[c] = std::move(pool);
      }
    }

    std::vector<ClientResult> results(selected.size());
    parallel_for(selected.size(), [&](std::size_t c) {
      results[c] = client_round(model, train, shards[selected[c]], batches[c],
                                config.k, config.l1_lambda, config.local_steps,
                                config.local_lr, round);
    });

    std::vector<GradientPacket> packets;
    packets.reserve(results.size());
    double weighted_loss = 0.0;
    double total_samples = 0.0;
    for (auto& r : results) {
      total_samples += static_cast<double>(r.packet.sample_count);
      packets.push_back(std::move(r.packet));
    }
    for (std::size_t c = 0; c < results.size(); ++c) {
      weighted_loss += results[c].local_loss *
                       static_cast<double>(packets[c].sample_count) / total_samples;
    }

    std::vector<double> grad = aggregate_packets(packets, config.aggregation_min_clients);
    std::vector<double> values = model.params().flatten_values();
    opt.step(values, grad);
    model.params().load_values(values);

    // The server credits consumed samples to the gate in shard order.
    for (std::size_t c = 0; c < selected.size(); ++c) {
      for (std::size_t idx : batches[c]) {
        gate.record_sample(train[idx].player_guid, train[idx].game_id);
      }
    }

    RoundLog log;
    log.round = round;
    log.participants = static_cast<int>(packets.size());
    log.train_loss = weighted_loss;
    fill_val_metrics(log, model, gate, val, config.k);
    if (config.timing) {
      log.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

}  // namespace framecast::fedsim
