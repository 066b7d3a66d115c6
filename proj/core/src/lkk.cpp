#include "framecast/lkk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "framecast/error.hpp"
#include "framecast/io.hpp"
#include "framecast/rng.hpp"

using nlohmann::json;

namespace framecast::lkk {

const char* to_string(Path p) {
  switch (p) {
    case Path::WithoutKernels: return "wo";
    case Path::WithPlayer: return "wp";
    case Path::WithGame: return "wg";
    case Path::WithBoth: return "wb";
  }
  return "wo";
}

Path path_from_string(const std::string& s) {
  if (s == "wo") return Path::WithoutKernels;
  if (s == "wp") return Path::WithPlayer;
  if (s == "wg") return Path::WithGame;
  if (s == "wb") return Path::WithBoth;
  fail("invalid_input", "unknown path '" + s + "' (expected wo|wp|wg|wb)");
}

std::int64_t GatePolicy::player_count(const std::string& id) const {
  auto it = player_counts.find(id);
  return it == player_counts.end() ? 0 : it->second;
}

std::int64_t GatePolicy::game_count(const std::string& id) const {
  auto it = game_counts.find(id);
  return it == game_counts.end() ? 0 : it->second;
}

void GatePolicy::record_sample(const std::string& player, const std::string& game) {
  ++player_counts[player];
  ++game_counts[game];
}

Path GatePolicy::choose(const std::string& player, const std::string& game) const {
  bool p_ok = player_count(player) >= player_min_records;
  bool g_ok = game_count(game) >= game_min_records;
  if (p_ok && g_ok) return Path::WithBoth;
  if (p_ok) return Path::WithPlayer;
  if (g_ok) return Path::WithGame;
  return Path::WithoutKernels;
}

namespace {

// Kernel rows are keyed by seed and id, never by registration order, so the
// same id always starts from the same values regardless of dataset order.
std::vector<double> initial_kernel(std::uint64_t seed, const char* table,
                                   const std::string& id, std::size_t dim) {
  RandomStream rng(seed, std::string(table) + ":" + id);
  std::vector<double> row(dim);
  for (double& v : row) v = rng.uniform(-0.01, 0.01);
  return row;
}

}  // namespace

LkkModel::LkkModel(const LkkDims& dims, std::uint64_t seed,
                   const std::vector<std::string>& player_ids,
                   const std::vector<std::string>& game_ids)
    : dims_(dims), seed_(seed) {
  require(dims.input_width > 0, "invalid_input", "model: input_width must be > 0");
  require(dims.enc_hidden > 0 && dims.latent > 0 && dims.dec_hidden > 0 &&
              dims.kernel_dim > 0,
          "invalid_input", "model: layer sizes must be > 0");
  require(dims.k_classes == telemetry::kClassCount ||
              dims.k_classes == telemetry::kBinCount,
          "invalid_input", "model: k must be 5 or 42");

  std::size_t in = dims.input_width, eh = dims.enc_hidden, lat = dims.latent;
  std::size_t dh = dims.dec_hidden, kd = dims.kernel_dim;
  auto k = static_cast<std::size_t>(dims.k_classes);

  enc_w1_ = store_.add("encoder.w1", eh, in, true);
  enc_b1_ = store_.add("encoder.b1", eh, 1, false);
  enc_w2_ = store_.add("encoder.w2", lat, eh, true);
  enc_b2_ = store_.add("encoder.b2", lat, 1, false);
  dec_w1_ = store_.add("decoder.w1", dh, lat, true);
  dec_b1_ = store_.add("decoder.b1", dh, 1, false);
  dec_w2_ = store_.add("decoder.w2", k, dh, true);
  dec_b2_ = store_.add("decoder.b2", k, 1, false);
  mp_w_ = store_.add("merge_player.w", lat, lat + kd, true);
  mp_b_ = store_.add("merge_player.b", lat, 1, false);
  mg_w_ = store_.add("merge_game.w", lat, lat + kd, true);
  mg_b_ = store_.add("merge_game.b", lat, 1, false);

  for (std::size_t h : {enc_w1_, enc_w2_, dec_w1_, dec_w2_}) {
    auto& e = store_.entry(h);
    RandomStream rng(seed, "init:" + e.name);
    nn::glorot_init(e.value, e.rows, e.cols, rng);
  }
  // Merge layers start at zero so training begins at the kernel-free model;
  // biases everywhere start at zero.

  player_ids_ = player_ids;
  game_ids_ = game_ids;
  for (std::size_t i = 0; i < player_ids_.size(); ++i) {
    require(player_index_.emplace(player_ids_[i], i).second, "invalid_input",
            "model: duplicate player id " + player_ids_[i]);
  }
  for (std::size_t i = 0; i < game_ids_.size(); ++i) {
    require(game_index_.emplace(game_ids_[i], i).second, "invalid_input",
            "model: duplicate game id " + game_ids_[i]);
  }
  if (!player_ids_.empty()) {
    kp_ = store_.add("kernels.player", player_ids_.size(), kd, false);
    auto& e = store_.entry(kp_);
    for (std::size_t i = 0; i < player_ids_.size(); ++i) {
      auto row = initial_kernel(seed, "kernel.player", player_ids_[i], kd);
      std::copy(row.begin(), row.end(), e.value.begin() + i * kd);
    }
  }
  if (!game_ids_.empty()) {
    kg_ = store_.add("kernels.game", game_ids_.size(), kd, false);
    auto& e = store_.entry(kg_);
    for (std::size_t i = 0; i < game_ids_.size(); ++i) {
      auto row = initial_kernel(seed, "kernel.game", game_ids_[i], kd);
      std::copy(row.begin(), row.end(), e.value.begin() + i * kd);
    }
  }
}

std::vector<double> LkkModel::player_kernel(const std::string& id) const {
  auto it = player_index_.find(id);
  if (it == player_index_.end()) {
    return initial_kernel(seed_, "kernel.player", id, dims_.kernel_dim);
  }
  const auto& e = store_.entry(kp_);
  auto begin = e.value.begin() + it->second * dims_.kernel_dim;
  return std::vector<double>(begin, begin + dims_.kernel_dim);
}

std::vector<double> LkkModel::game_kernel(const std::string& id) const {
  auto it = game_index_.find(id);
  if (it == game_index_.end()) {
    return initial_kernel(seed_, "kernel.game", id, dims_.kernel_dim);
  }
  const auto& e = store_.entry(kg_);
  auto begin = e.value.begin() + it->second * dims_.kernel_dim;
  return std::vector<double>(begin, begin + dims_.kernel_dim);
}

struct LkkModel::Workspace {
  std::vector<double> e1, h;
  std::vector<double> kp, kg;
  std::vector<double> mp_in, ap;
  std::vector<double> mg_in_g, ag;
  std::vector<double> mg_in_b, bg;
  std::array<std::vector<double>, 4> u, d1, logits, probs;
  // backward scratch
  std::vector<double> dh, dap, dag, dbg, du, dd1, dmp_in, dmg_in, de1, dx_unused;
};

void LkkModel::forward_into(std::span<const double> x, const std::string& player,
                            const std::string& game, Workspace& ws) const {
  require(x.size() == dims_.input_width, "shape_mismatch",
          "forward: input width mismatch");
  std::size_t lat = dims_.latent, kd = dims_.kernel_dim;
  const auto& ew1 = store_.entry(enc_w1_);
  const auto& eb1 = store_.entry(enc_b1_);
  const auto& ew2 = store_.entry(enc_w2_);
  const auto& eb2 = store_.entry(enc_b2_);

  ws.e1.assign(dims_.enc_hidden, 0.0);
  nn::dense_forward(ew1.value, eb1.value, dims_.input_width, dims_.enc_hidden, x, ws.e1);
  nn::relu_inplace(ws.e1);
  ws.h.assign(lat, 0.0);
  nn::dense_forward(ew2.value, eb2.value, dims_.enc_hidden, lat, ws.e1, ws.h);
  nn::relu_inplace(ws.h);

  ws.kp = player_kernel(player);
  ws.kg = game_kernel(game);

  auto concat = [](const std::vector<double>& a, const std::vector<double>& b,
                   std::vector<double>& out) {
    out.resize(a.size() + b.size());
    std::copy(a.begin(), a.end(), out.begin());
    std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(a.size()));
  };

  const auto& mpw = store_.entry(mp_w_);
  const auto& mpb = store_.entry(mp_b_);
  const auto& mgw = store_.entry(mg_w_);
  const auto& mgb = store_.entry(mg_b_);

  concat(ws.h, ws.kp, ws.mp_in);
  ws.ap.assign(lat, 0.0);
  nn::dense_forward(mpw.value, mpb.value, lat + kd, lat, ws.mp_in, ws.ap);

  concat(ws.h, ws.kg, ws.mg_in_g);
  ws.ag.assign(lat, 0.0);
  nn::dense_forward(mgw.value, mgb.value, lat + kd, lat, ws.mg_in_g, ws.ag);

  // The chained path feeds the player merge output into the game merge.
  concat(ws.ap, ws.kg, ws.mg_in_b);
  ws.bg.assign(lat, 0.0);
  nn::dense_forward(mgw.value, mgb.value, lat + kd, lat, ws.mg_in_b, ws.bg);

  for (int p = 0; p < 4; ++p) ws.u[p].assign(lat, 0.0);
  ws.u[0] = ws.h;
  for (std::size_t i = 0; i < lat; ++i) {
    ws.u[1][i] = ws.h[i] + ws.ap[i];
    ws.u[2][i] = ws.h[i] + ws.ag[i];
    ws.u[3][i] = ws.h[i] + ws.ap[i] + ws.bg[i];
  }

  const auto& dw1 = store_.entry(dec_w1_);
  const auto& db1 = store_.entry(dec_b1_);
  const auto& dw2 = store_.entry(dec_w2_);
  const auto& db2 = store_.entry(dec_b2_);
  auto k = static_cast<std::size_t>(dims_.k_classes);
  for (int p = 0; p < 4; ++p) {
    ws.d1[p].assign(dims_.dec_hidden, 0.0);
    nn::dense_forward(dw1.value, db1.value, lat, dims_.dec_hidden, ws.u[p], ws.d1[p]);
    nn::relu_inplace(ws.d1[p]);
    ws.logits[p].assign(k, 0.0);
    nn::dense_forward(dw2.value, db2.value, dims_.dec_hidden, k, ws.d1[p], ws.logits[p]);
    ws.probs[p] = nn::softmax(ws.logits[p]);
  }
}

PathOutputs LkkModel::forward_paths(std::span<const double> x,
                                    const std::string& player,
                                    const std::string& game) const {
  Workspace ws;
  forward_into(x, player, game, ws);
  PathOutputs out;
  out.probs = ws.probs;
  return out;
}

double LkkModel::sample_backward(std::span<const double> x, const std::string& player,
                                 const std::string& game,
                                 std::span<const double> target, double scale,
                                 Workspace& ws) {
  forward_into(x, player, game, ws);
  std::size_t lat = dims_.latent, kd = dims_.kernel_dim;
  auto k = static_cast<std::size_t>(dims_.k_classes);

  auto& ew1 = store_.entry(enc_w1_);
  auto& eb1 = store_.entry(enc_b1_);
  auto& ew2 = store_.entry(enc_w2_);
  auto& eb2 = store_.entry(enc_b2_);
  auto& dw1 = store_.entry(dec_w1_);
  auto& db1 = store_.entry(dec_b1_);
  auto& dw2 = store_.entry(dec_w2_);
  auto& db2 = store_.entry(dec_b2_);
  auto& mpw = store_.entry(mp_w_);
  auto& mpb = store_.entry(mp_b_);
  auto& mgw = store_.entry(mg_w_);
  auto& mgb = store_.entry(mg_b_);

  ws.dh.assign(lat, 0.0);
  ws.dap.assign(lat, 0.0);
  ws.dag.assign(lat, 0.0);
  ws.dbg.assign(lat, 0.0);

  // Equal-weight average over the four paths.
  double loss = 0.0;
  std::vector<double> dlogits(k);
  for (int p = 0; p < 4; ++p) {
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
    loss += 0.25 * nn::softce_loss(ws.logits[p], target, dlogits, 0.25);

    ws.dd1.assign(dims_.dec_hidden, 0.0);
    nn::dense_backward(dw2.value, dims_.dec_hidden, k, ws.d1[p], dlogits, dw2.grad,
                       db2.grad, ws.dd1, scale);
    nn::relu_backward_inplace(ws.d1[p], ws.dd1);
    ws.du.assign(lat, 0.0);
    nn::dense_backward(dw1.value, lat, dims_.dec_hidden, ws.u[p], ws.dd1, dw1.grad,
                       db1.grad, ws.du, scale);
    for (std::size_t i = 0; i < lat; ++i) {
      ws.dh[i] += ws.du[i];  // every u contains h
      if (p == 1 || p == 3) ws.dap[i] += ws.du[i];
      if (p == 2) ws.dag[i] += ws.du[i];
      if (p == 3) ws.dbg[i] += ws.du[i];
    }
  }

  auto kernel_grad = [&](std::size_t handle,
                         const std::unordered_map<std::string, std::size_t>& index,
                         const std::string& id, const std::vector<double>& dk) {
    auto it = index.find(id);
    if (it == index.end()) return;  // unregistered id: kernel is not a parameter
    auto& e = store_.entry(handle);
    for (std::size_t i = 0; i < kd; ++i) {
      e.grad[it->second * kd + i] += scale * dk[i];
    }
  };

  std::vector<double> dkp(kd, 0.0), dkg(kd, 0.0);

  // Chained game merge first: it feeds dap.
  ws.dmg_in.assign(lat + kd, 0.0);
  nn::dense_backward(mgw.value, lat + kd, lat, ws.mg_in_b, ws.dbg, mgw.grad, mgb.grad,
                     ws.dmg_in, scale);
  for (std::size_t i = 0; i < lat; ++i) ws.dap[i] += ws.dmg_in[i];
  for (std::size_t i = 0; i < kd; ++i) dkg[i] += ws.dmg_in[lat + i];

  ws.dmg_in.assign(lat + kd, 0.0);
  nn::dense_backward(mgw.value, lat + kd, lat, ws.mg_in_g, ws.dag, mgw.grad, mgb.grad,
                     ws.dmg_in, scale);
  for (std::size_t i = 0; i < lat; ++i) ws.dh[i] += ws.dmg_in[i];
  for (std::size_t i = 0; i < kd; ++i) dkg[i] += ws.dmg_in[lat + i];

  ws.dmp_in.assign(lat + kd, 0.0);
  nn::dense_backward(mpw.value, lat + kd, lat, ws.mp_in, ws.dap, mpw.grad, mpb.grad,
                     ws.dmp_in, scale);
  for (std::size_t i = 0; i < lat; ++i) ws.dh[i] += ws.dmp_in[i];
  for (std::size_t i = 0; i < kd; ++i) dkp[i] += ws.dmp_in[lat + i];

  kernel_grad(kp_, player_index_, player, dkp);
  kernel_grad(kg_, game_index_, game, dkg);

  nn::relu_backward_inplace(ws.h, ws.dh);
  ws.de1.assign(dims_.enc_hidden, 0.0);
  nn::dense_backward(ew2.value, dims_.enc_hidden, lat, ws.e1, ws.dh, ew2.grad,
                     eb2.grad, ws.de1, scale);
  nn::relu_backward_inplace(ws.e1, ws.de1);
  nn::dense_backward(ew1.value, dims_.input_width, dims_.enc_hidden, x, ws.de1,
                     ew1.grad, eb1.grad, {}, scale);
  return loss;
}

double LkkModel::batch_loss_and_grad(const std::vector<features::EncodedPair>& pairs,
                                     std::span<const std::size_t> indices, int k) {
  require(!indices.empty(), "invalid_input", "batch: empty");
  require(k == dims_.k_classes, "invalid_input", "batch: k mismatch with model");
  Workspace ws;
  double scale = 1.0 / static_cast<double>(indices.size());
  double loss = 0.0;
  for (std::size_t idx : indices) {
    const auto& p = pairs.at(idx);
    auto target = p.target(k);
    loss += sample_backward(p.features, p.player_guid, p.game_id, target.probs,
                            scale, ws);
  }
  return loss * scale;
}

double LkkModel::batch_loss(const std::vector<features::EncodedPair>& pairs,
                            std::span<const std::size_t> indices, int k) const {
  require(!indices.empty(), "invalid_input", "batch: empty");
  require(k == dims_.k_classes, "invalid_input", "batch: k mismatch with model");
  Workspace ws;
  double loss = 0.0;
  for (std::size_t idx : indices) {
    const auto& p = pairs.at(idx);
    auto target = p.target(k);
    forward_into(p.features, p.player_guid, p.game_id, ws);
    double sample = 0.0;
    for (int path = 0; path < 4; ++path) {
      sample += 0.25 * nn::softce_loss(ws.logits[path], target.probs, {}, 0.0);
    }
    loss += sample;
  }
  return loss / static_cast<double>(indices.size());
}

Prediction predict(const LkkModel& model, std::span<const double> x,
                   const std::string& player, const std::string& game,
                   const GatePolicy& gate) {
  Prediction out;
  out.path = gate.choose(player, game);
  auto paths = model.forward_paths(x, player, game);
  out.dist.probs = paths.for_path(out.path);
  out.dist.validate();
  return out;
}

TrainStepResult train_step(LkkModel& model,
                           const std::vector<features::EncodedPair>& pairs,
                           std::span<const std::size_t> indices, int k,
                           GatePolicy& gate, double l1_lambda) {
  model.params().zero_grads();
  TrainStepResult r;
  r.loss = model.batch_loss_and_grad(pairs, indices, k);
  r.loss += nn::l1_penalty(model.params(), l1_lambda);
  for (std::size_t idx : indices) {
    const auto& p = pairs.at(idx);
    gate.record_sample(p.player_guid, p.game_id);
  }
  r.gradient = model.params().flatten_grads();
  r.sample_count = static_cast<std::int64_t>(indices.size());
  return r;
}

namespace {

json gate_to_json(const GatePolicy& gate) {
  json counts_p = json::object();
  json counts_g = json::object();
  for (const auto& [id, n] : gate.player_counts) counts_p[id] = n;
  for (const auto& [id, n] : gate.game_counts) counts_g[id] = n;
  return json{{"player_min_records", gate.player_min_records},
              {"game_min_records", gate.game_min_records},
              {"player_counts", counts_p},
              {"game_counts", counts_g}};
}

GatePolicy gate_from_json(const json& j) {
  GatePolicy g;
  g.player_min_records = j.at("player_min_records").get<std::int64_t>();
  g.game_min_records = j.at("game_min_records").get<std::int64_t>();
  for (const auto& [id, n] : j.at("player_counts").items()) {
    g.player_counts[id] = n.get<std::int64_t>();
  }
  for (const auto& [id, n] : j.at("game_counts").items()) {
    g.game_counts[id] = n.get<std::int64_t>();
  }
  return g;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LkkModel& model,
                     const GatePolicy& gate, const std::string& schema_hash) {
  json manifest;
  manifest["version"] = 1;
  manifest["k"] = model.dims().k_classes;
  manifest["dims"] = {{"input_width", model.dims().input_width},
                      {"enc_hidden", model.dims().enc_hidden},
                      {"latent", model.dims().latent},
                      {"dec_hidden", model.dims().dec_hidden},
                      {"kernel_dim", model.dims().kernel_dim}};
  manifest["seed"] = model.seed();
  json params = json::array();
  for (const auto& e : model.params()) {
    params.push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}});
  }
  manifest["params"] = std::move(params);
  manifest["player_ids"] = model.player_ids();
  manifest["game_ids"] = model.game_ids();
  manifest["gate"] = gate_to_json(gate);
  manifest["schema_hash"] = schema_hash;

  auto flat = model.params().flatten_values();
  std::vector<float> data(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) data[i] = static_cast<float>(flat[i]);
  io::write_checkpoint_file(path, manifest.dump(), data);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  auto blob = io::read_checkpoint_file(path);
  json manifest;
  try {
    manifest = json::parse(blob.manifest_json);
  } catch (const json::exception& e) {
    fail("io", std::string("checkpoint manifest parse error: ") + e.what());
  }
  require(manifest.at("version").get<int>() == 1, "io",
          "unsupported checkpoint version");
  LkkDims dims;
  const auto& dj = manifest.at("dims");
  dims.input_width = dj.at("input_width").get<std::size_t>();
  dims.enc_hidden = dj.at("enc_hidden").get<std::size_t>();
  dims.latent = dj.at("latent").get<std::size_t>();
  dims.dec_hidden = dj.at("dec_hidden").get<std::size_t>();
  dims.kernel_dim = dj.at("kernel_dim").get<std::size_t>();
  dims.k_classes = manifest.at("k").get<int>();

  LoadedCheckpoint out{
      LkkModel(dims, manifest.at("seed").get<std::uint64_t>(),
               manifest.at("player_ids").get<std::vector<std::string>>(),
               manifest.at("game_ids").get<std::vector<std::string>>()),
      gate_from_json(manifest.at("gate")),
      manifest.at("schema_hash").get<std::string>()};

  const auto& params = manifest.at("params");
  require(params.size() == out.model.params().count(), "io",
          "checkpoint parameter list mismatch");
  std::size_t i = 0;
  for (const auto& e : out.model.params()) {
    require(params[i].at("name").get<std::string>() == e.name &&
                params[i].at("rows").get<std::size_t>() == e.rows &&
                params[i].at("cols").get<std::size_t>() == e.cols,
            "io", "checkpoint parameter shape mismatch at " + e.name);
    ++i;
  }
  require(blob.data.size() == out.model.params().total_size(), "io",
          "checkpoint payload size mismatch");
  std::vector<double> flat(blob.data.size());
  for (std::size_t j2 = 0; j2 < blob.data.size(); ++j2) {
    flat[j2] = static_cast<double>(blob.data[j2]);
  }
  out.model.params().load_values(flat);
  return out;
}

nn::GradCheckReport check_gradients(LkkModel& model,
                                    const std::vector<features::EncodedPair>& pairs,
                                    int k, int indices_per_group) {
  require(!pairs.empty(), "invalid_input", "check_gradients: no samples");
  std::vector<std::size_t> indices(pairs.size());
  std::iota(indices.begin(), indices.end(), 0);
  RandomStream rng(model.seed(), "gradcheck.coords");
  return nn::grad_check(
      model.params(),
      [&] { return model.batch_loss(pairs, indices, k); },
      [&] {
        model.params().zero_grads();
        model.batch_loss_and_grad(pairs, indices, k);
      },
      rng, indices_per_group);
}

}  // namespace framecast::lkk
