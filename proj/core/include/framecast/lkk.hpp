#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "framecast/features.hpp"
#include "framecast/nn.hpp"
#include "framecast/telemetry.hpp"

namespace framecast::lkk {

// The four prediction paths: no kernels, player kernel only, game kernel
// only, both kernels chained (the game merge consumes the player merge's
// output rather than the raw latent).
enum class Path { WithoutKernels, WithPlayer, WithGame, WithBoth };

const char* to_string(Path p);
Path path_from_string(const std::string& s);

struct LkkDims {
  std::size_t input_width = 0;
  std::size_t enc_hidden = 128;
  std::size_t latent = 64;
  std::size_t dec_hidden = 64;
  std::size_t kernel_dim = 16;
  int k_classes = telemetry::kClassCount;
};

// Latent outputs plus per-path probabilities, in Path order.
struct PathOutputs {
  std::array<std::vector<double>, 4> probs;

  const std::vector<double>& for_path(Path p) const {
    return probs[static_cast<std::size_t>(p)];
  }
};

// Cold-start gate: a kernel participates in prediction only once its id has
// consumed enough training samples. Counters increment once per
// (player, game) sample each time it is consumed, so a pair revisited in a
// later epoch (or round) counts again. Unknown ids count as zero.
struct GatePolicy {
  std::int64_t player_min_records = 3;
  std::int64_t game_min_records = 10;
  std::unordered_map<std::string, std::int64_t> player_counts;
  std::unordered_map<std::string, std::int64_t> game_counts;

  std::int64_t player_count(const std::string& id) const;
  std::int64_t game_count(const std::string& id) const;
  void record_sample(const std::string& player, const std::string& game);
  Path choose(const std::string& player, const std::string& game) const;
};

// Encoder-decoder with learnable per-id kernels. All ids that should train
// must be passed at construction; lookups of other ids yield that id's
// deterministic initial kernel (seed-and-id keyed), so forward passes never
// fail and never mutate the model.
class LkkModel {
 public:
  LkkModel(const LkkDims& dims, std::uint64_t seed,
           const std::vector<std::string>& player_ids = {},
           const std::vector<std::string>& game_ids = {});

  const LkkDims& dims() const { return dims_; }
  std::uint64_t seed() const { return seed_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  const std::vector<std::string>& player_ids() const { return player_ids_; }
  const std::vector<std::string>& game_ids() const { return game_ids_; }

  // Stored row for registered ids, the would-be initial row otherwise.
  std::vector<double> player_kernel(const std::string& id) const;
  std::vector<double> game_kernel(const std::string& id) const;

  PathOutputs forward_paths(std::span<const double> x, const std::string& player,
                            const std::string& game) const;

  // Mean four-case loss over the batch without the L1 term; gradients are
  // accumulated into the store (call zero_grads first for a fresh batch).
  double batch_loss_and_grad(const std::vector<features::EncodedPair>& pairs,
                             std::span<const std::size_t> indices, int k);

  // Loss only, same objective, no gradient work; used by finite differences.
  double batch_loss(const std::vector<features::EncodedPair>& pairs,
                    std::span<const std::size_t> indices, int k) const;

 private:
  struct Workspace;
  void forward_into(std::span<const double> x, const std::string& player,
                    const std::string& game, Workspace& ws) const;
  double sample_backward(std::span<const double> x, const std::string& player,
                         const std::string& game, std::span<const double> target,
                         double scale, Workspace& ws);

  LkkDims dims_;
  std::uint64_t seed_ = 0;
  nn::ParamStore store_;
  std::vector<std::string> player_ids_;
  std::vector<std::string> game_ids_;
  std::unordered_map<std::string, std::size_t> player_index_;
  std::unordered_map<std::string, std::size_t> game_index_;
  // Store handles, fixed at construction.
  std::size_t enc_w1_, enc_b1_, enc_w2_, enc_b2_;
  std::size_t dec_w1_, dec_b1_, dec_w2_, dec_b2_;
  std::size_t mp_w_, mp_b_, mg_w_, mg_b_;
  std::size_t kp_ = SIZE_MAX, kg_ = SIZE_MAX;  // absent when no ids registered
};

struct Prediction {
  telemetry::ClassDistribution dist;
  Path path = Path::WithoutKernels;
};

Prediction predict(const LkkModel& model, std::span<const double> x,
                   const std::string& player, const std::string& game,
                   const GatePolicy& gate);

struct TrainStepResult {
  double loss = 0.0;                 // mean four-case loss + L1 penalty
  std::vector<double> gradient;      // flattened, store order
  std::int64_t sample_count = 0;
};

// One full gradient computation over the given samples: zeroes grads, runs
// the batch, adds the L1 term, records every sample in the gate.
TrainStepResult train_step(LkkModel& model,
                           const std::vector<features::EncodedPair>& pairs,
                           std::span<const std::size_t> indices, int k,
                           GatePolicy& gate, double l1_lambda);

// Checkpoint: JSON manifest (dims, parameter shapes, id tables, gate state,
// schema hash) plus the flattened parameters as little-endian float32.
void save_checkpoint(const std::filesystem::path& path, const LkkModel& model,
                     const GatePolicy& gate, const std::string& schema_hash);

struct LoadedCheckpoint {
  LkkModel model;
  GatePolicy gate;
  std::string schema_hash;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Finite-difference check of the four-path objective (without the L1 term,
// which is not differentiable at zero) over every parameter group.
nn::GradCheckReport check_gradients(LkkModel& model,
                                    const std::vector<features::EncodedPair>& pairs,
                                    int k, int indices_per_group);

}  // namespace framecast::lkk
