#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "framecast/features.hpp"
#include "framecast/lkk.hpp"
#include "framecast/nn.hpp"

namespace framecast::fedsim {

// One client's shard: all train pairs belonging to one player. Shards are
// ordered by first appearance in the train set.
struct ClientShard {
  std::string player_guid;
  std::vector<std::size_t> indices;
};

std::vector<ClientShard> partition_by_player(
    const std::vector<features::EncodedPair>& train);

// What a client uploads: mean gradient over the samples it consumed this
// round, plus the sample count used as the aggregation weight. No raw
// features or targets leave the client.
struct GradientPacket {
  std::string client_id;
  int round = 0;
  std::int64_t sample_count = 0;
  std::vector<double> gradient;
};

struct ClientResult {
  GradientPacket packet;
  double local_loss = 0.0;  // simulator-side logging only, not uploaded
};

// Runs one client round against a copy of the global model. With
// local_steps == 1 the packet holds the plain mean batch gradient (with the
// L1 term); with more steps the client refines a local copy by plain SGD at
// local_lr and uploads the mean of the per-step gradients.
ClientResult client_round(const lkk::LkkModel& global_model,
                          const std::vector<features::EncodedPair>& train,
                          const ClientShard& shard,
                          const std::vector<std::size_t>& batch_indices, int k,
                          double l1_lambda, int local_steps, double local_lr,
                          int round);

// Sample-count-weighted mean of the packet gradients, reduced in packet
// order with compensated summation so the result is stable and independent
// of worker scheduling. Requires at least min_clients packets.
std::vector<double> aggregate_packets(const std::vector<GradientPacket>& packets,
                                      int min_clients);

struct RoundLog {
  int round = 0;
  int participants = 0;  // packets this round; batches per epoch when centralized
  double train_loss = 0.0;
  bool has_val = false;
  double val_wd = 0.0;
  double val_ce = 0.0;
  double wall_ms = -1.0;  // negative = omitted from the log line
  std::string to_json_line() const;
};

struct CentralizedConfig {
  int k = 5;
  int epochs = 100;
  int batch_size = 256;  // 0 = one full-dataset batch per epoch
  nn::AdamConfig optimizer;
  double l1_lambda = 1e-9;
  std::uint64_t seed = 1;
  bool timing = false;  // when false, wall_ms stays omitted and logs are reproducible
};

struct FederatedConfig {
  int k = 5;
  int rounds = 150;
  int clients_per_round = 0;  // 0 = every client participates every round
  int local_steps = 1;
  int batch_size = 0;  // per-client samples per round; 0 = the whole shard
  double local_lr = 1e-3;
  int aggregation_min_clients = 1;
  nn::AdamConfig optimizer;
  double l1_lambda = 1e-9;
  std::uint64_t seed = 1;
  bool timing = false;
};

// Plain minibatch training on the pooled train set. The gate records every
// consumed sample; logs are one entry per epoch.
std::vector<RoundLog> run_centralized(lkk::LkkModel& model, lkk::GatePolicy& gate,
                                      const std::vector<features::EncodedPair>& train,
                                      const std::vector<features::EncodedPair>& val,
                                      const CentralizedConfig& config);

// Simulated federated loop: select clients, compute packets concurrently,
// aggregate, take one server optimizer step. With full participation, one
// local step, and full batches this is numerically the same trajectory as
// centralized full-batch training.
std::vector<RoundLog> run_federated(lkk::LkkModel& model, lkk::GatePolicy& gate,
                                    const std::vector<features::EncodedPair>& train,
                                    const std::vector<features::EncodedPair>& val,
                                    const FederatedConfig& config);

}  // namespace framecast::fedsim
