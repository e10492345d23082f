#include <cmath>
#include <numeric>

#include "d2d/errors.hpp"
#include "d2d/mpnn.hpp"

namespace d2d {

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size == 0 || decay_interval_epochs <= 0 || dataset_size == 0) {
    throw ConfigError("training counts must be positive");
  }
  if (!(learning_rate > 0.0) || !(decay_factor > 0.0)) {
    throw ConfigError("learning rate and decay factor must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw ConfigError("Adam constants out of range");
  }
}

double TrainConfig::learning_rate_at(int epoch) const {
  return learning_rate * std::pow(decay_factor, epoch / decay_interval_epochs);
}

std::vector<double> MpnnModel::predict(const GraphSample& raw_sample) const {
  return forward(normalize(raw_sample, normalizer), params);
}

TrainResult train(std::span<const GraphSample> raw_dataset, const TrainConfig& cfg,
                  std::uint64_t seed, const MpnnArchitecture& arch, const EpochCallback& on_epoch) {
  cfg.validate();
  if (raw_dataset.empty()) throw std::invalid_argument("training needs a nonempty dataset");

  TrainResult result;
  result.model.normalizer = fit_normalizer(raw_dataset);
  std::vector<GraphSample> data;
  data.reserve(raw_dataset.size());
  for (const GraphSample& s : raw_dataset) data.push_back(normalize(s, result.model.normalizer));

  Rng init_rng(derive_seed(seed, stream::training, 0));
  result.model.params = MpnnParams::glorot(arch, init_rng);
  MpnnParams& params = result.model.params;
  std::vector<double>& theta = params.values();
  std::vector<double> first(theta.size(), 0.0), second(theta.size(), 0.0);

  Rng shuffle_rng(derive_seed(seed, stream::training, 1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const GraphSample*> batch;
  long long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t b = start; b < stop; ++b) batch.push_back(&data[order[b]]);
      const LossGradient lg = gradients(std::span<const GraphSample* const>(batch), params);
      if (!std::isfinite(lg.loss)) throw TrainingError("training loss became non-finite", epoch);
      epoch_total += lg.loss * static_cast<double>(batch.size());

      ++step;
      const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < theta.size(); ++p) {
        const double g = lg.gradient[p];
        first[p] = cfg.adam_beta1 * first[p] + (1.0 - cfg.adam_beta1) * g;
        second[p] = cfg.adam_beta2 * second[p] + (1.0 - cfg.adam_beta2) * g * g;
        theta[p] -= lr * (first[p] / bias1) / (std::sqrt(second[p] / bias2) + cfg.adam_epsilon);
      }
    }
    const double epoch_loss = epoch_total / static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) throw TrainingError("training loss became non-finite", epoch);
    for (double v : theta) {
      if (!std::isfinite(v)) throw TrainingError("parameters became non-finite", epoch);
    }
    result.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return result;
}

std::vector<GraphSample> generate_corpus(std::size_t count, std::size_t pairs,
                                         double area_length_m, const RadioConfig& cfg,
                                         std::uint64_t seed) {
  std::vector<GraphSample> corpus;
  corpus.reserve(count);
  std::vector<double> weights(pairs);
  for (std::size_t k = 0; k < count; ++k) {
    Rng layout_rng(derive_seed(seed, stream::layout, k));
    const Layout layout = sample_layout(pairs, area_length_m, layout_rng);
    Rng weight_rng(derive_seed(seed, stream::weights, k));
    for (double& w : weights) w = weight_rng.uniform();
    corpus.push_back(build_graph(weights, gain_matrix(layout, cfg),
                                 edge_mask_from_layout(layout, cfg.interference_cutoff_m), cfg));
  }
  return corpus;
}

}  // namespace d2d
