#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/drift.hpp"
#include "d2d/matrix.hpp"
#include "d2d/random.hpp"

namespace d2d {

// Layer widths of the message (phi), update (psi) and readout (omega) MLPs. The message
// input is [neighbor embedding, neighbor node feature, edge feature]; the update input is
// [own embedding, own node feature, aggregated message].
struct MpnnArchitecture {
  static constexpr std::size_t node_features = 2;
  static constexpr std::size_t edge_features = 1;

  std::size_t embedding = 8;
  std::size_t message_hidden = 32;
  std::size_t message_out = 32;
  std::size_t update_hidden = 16;
  std::size_t readout_hidden = 16;
  std::size_t propagation_layers = 3;

  std::size_t message_in() const noexcept { return embedding + node_features + edge_features; }
  std::size_t update_in() const noexcept { return embedding + node_features + message_out; }

  // Throws ConfigError on zero widths or zero propagation layers.
  void validate() const;
  friend bool operator==(const MpnnArchitecture&, const MpnnArchitecture&) = default;
};

enum class MpnnLayer : std::size_t { message0, message1, update0, update1, readout0, readout1 };
inline constexpr std::size_t kMpnnLayerCount = 6;

std::string_view layer_name(MpnnLayer layer) noexcept;

// Weights are stored in x out row-major, followed by the bias, inside one flat vector.
struct DenseShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  friend bool operator==(const DenseShape&, const DenseShape&) = default;
};

class MpnnParams {
 public:
  MpnnParams() : MpnnParams(MpnnArchitecture{}) {}
  // All-zero parameters.
  explicit MpnnParams(const MpnnArchitecture& arch);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static MpnnParams glorot(const MpnnArchitecture& arch, Rng& rng);

  const MpnnArchitecture& architecture() const noexcept { return arch_; }
  const DenseShape& shape(MpnnLayer layer) const noexcept {
    return shapes_[static_cast<std::size_t>(layer)];
  }
  std::span<double> weights(MpnnLayer layer);
  std::span<const double> weights(MpnnLayer layer) const;
  std::span<double> bias(MpnnLayer layer);
  std::span<const double> bias(MpnnLayer layer) const;

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  friend bool operator==(const MpnnParams&, const MpnnParams&) = default;

 private:
  MpnnArchitecture arch_;
  std::array<DenseShape, kMpnnLayerCount> shapes_{};
  std::vector<double> values_;
};

// z-score statistics of the dB gains, fit on a training corpus.
struct Normalizer {
  double node_mean_db = 0.0;
  double node_std_db = 1.0;
  double edge_mean_db = 0.0;
  double edge_std_db = 1.0;
  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

struct GraphSample {
  // Row i = [w_i, h_ii in dB]; w is max-normalized so its largest entry is 1.
  Matrix z;
  // a(j, i) = h_ji in dB for an edge j -> i (interference from tx j at rx i), else 0.
  Matrix a;
  // edge[j * M + i] marks edge j -> i. Kept apart from `a` because a normalized edge
  // feature may legitimately be 0.
  std::vector<std::uint8_t> edge;
  // In-neighbors of each node in ascending order.
  std::vector<std::vector<std::uint32_t>> in_neighbors;
  // Unnormalized weights W_i and linear-unit constants.
  SlotProblem raw;
  bool normalized = false;

  std::size_t size() const noexcept { return z.rows(); }
  bool has_edge(std::size_t from, std::size_t to) const noexcept { return edge[from * size() + to] != 0; }
};

// Edge i -> j (i != j) iff tx_i and rx_j are within the cutoff distance.
std::vector<std::uint8_t> edge_mask_from_layout(const Layout& layout, double cutoff_m);
// Same edges recovered from gains alone: path loss is monotone in distance, so
// distance <= cutoff iff h_ij >= gain at the cutoff.
std::vector<std::uint8_t> edge_mask_from_gains(const GainMatrix& gains, const RadioConfig& cfg);

GraphSample build_graph(std::span<const double> raw_weights, const GainMatrix& gains,
                        std::span<const std::uint8_t> edge_mask, const RadioConfig& cfg,
                        double offset = 0.0);
// W_i from the AoI vector; edges from the layout and cfg.interference_cutoff_m.
GraphSample build_graph(const NetworkState& state, const Layout& layout);

Normalizer fit_normalizer(std::span<const GraphSample> corpus);

// z-scores the dB node and edge features; absent edges stay exactly 0 and w is untouched.
GraphSample normalize(const GraphSample& sample, const Normalizer& norm);

// The graph objective f-hat: weights are z(:, 0), constants are the raw linear ones.
SlotProblem graph_problem(const GraphSample& sample);

// Activations retained for backpropagation.
struct ForwardCache {
  std::vector<std::size_t> edge_src;    // global edge id -> source node
  std::vector<std::size_t> edge_dst;    // global edge id -> destination node
  std::vector<Matrix> embeddings;       // layers + 1 entries of M x E; entry 0 is zero
  std::vector<Matrix> message_hidden;   // per layer: edges x H1 (post-ReLU)
  std::vector<Matrix> messages;         // per layer: edges x H2 (post-ReLU)
  std::vector<Matrix> aggregates;       // per layer: M x H2
  std::vector<std::vector<std::int64_t>> argmax;  // per layer: M x H2 edge ids, -1 if none
  std::vector<Matrix> update_inputs;    // per layer: M x (E + 2 + H2)
  std::vector<Matrix> update_hidden;    // per layer: M x U1 (post-ReLU)
  Matrix readout_hidden;                // M x R1 (post-ReLU)
  std::vector<double> mu;
};

// Scheduling probabilities mu in (0, 1)^M. Throws std::invalid_argument for an
// unnormalized sample and ConfigError when the sample does not match the architecture.
std::vector<double> forward(const GraphSample& sample, const MpnnParams& params,
                            ForwardCache* cache = nullptr);

// Hash of every ReLU on/off state and MAX winner in a cached forward pass. Equal
// signatures mean two parameter points lie in the same smooth piece of the network.
std::uint64_t activation_signature(const ForwardCache& cache);

// f-hat of one normalized sample at the network output.
double sample_loss(const GraphSample& sample, const MpnnParams& params);
// Batch mean of sample_loss.
double loss(std::span<const GraphSample> batch, const MpnnParams& params);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as MpnnParams::values()
};

// Exact reverse-mode gradient of the batch-mean loss. MAX routes each component's
// gradient to its winning message only (ties resolved to the lowest neighbor index).
LossGradient gradients(std::span<const GraphSample> batch, const MpnnParams& params);
LossGradient gradients(std::span<const GraphSample* const> batch, const MpnnParams& params);

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 50;
  double learning_rate = 0.002;
  double decay_factor = 0.9;
  int decay_interval_epochs = 10;
  std::size_t dataset_size = 10000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
  // learning_rate * decay_factor^(epoch / decay_interval_epochs), epochs counted from 0.
  double learning_rate_at(int epoch) const;
};

struct MpnnModel {
  MpnnParams params;
  Normalizer normalizer;

  // Normalizes a raw sample and runs the forward pass.
  std::vector<double> predict(const GraphSample& raw_sample) const;
  friend bool operator==(const MpnnModel&, const MpnnModel&) = default;
};

struct TrainResult {
  MpnnModel model;
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Fits the normalizer on `raw_dataset`, initializes parameters from `seed`, then runs
// Adam over shuffled mini-batches. Throws TrainingError if the loss becomes non-finite.
TrainResult train(std::span<const GraphSample> raw_dataset, const TrainConfig& cfg,
                  std::uint64_t seed, const MpnnArchitecture& arch = {},
                  const EpochCallback& on_epoch = {});

// Random corpus of graph samples: layouts of `pairs` links on the square with weights
// drawn Uniform[0, 1] per link. Sample k uses derive_seed(seed, layout/weights, k).
std::vector<GraphSample> generate_corpus(std::size_t count, std::size_t pairs,
                                         double area_length_m, const RadioConfig& cfg,
                                         std::uint64_t seed);

// Checkpoint: JSON with format tag, version, architecture, normalizer, and every layer's
// widths, weights and biases.
inline constexpr int kCheckpointVersion = 1;
void write_model(std::ostream& out, const MpnnModel& model);
MpnnModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const MpnnModel& model);
MpnnModel load_model(const std::filesystem::path& path);

// Binary corpus file: "D2DGRAPH", u32 version, u64 count, then per record u32 M, z, a,
// edge mask, raw weights, rho, D, offset. All numbers little-endian IEEE-754.
inline constexpr std::uint32_t kDatasetVersion = 1;
void write_dataset(std::ostream& out, std::span<const GraphSample> samples);
std::vector<GraphSample> read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, std::span<const GraphSample> samples);
std::vector<GraphSample> load_dataset(const std::filesystem::path& path);

}  // namespace d2d
