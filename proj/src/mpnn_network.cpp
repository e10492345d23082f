#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/kernels.hpp"
#include "d2d/mpnn.hpp"

namespace d2d {

void MpnnArchitecture::validate() const {
  if (embedding == 0 || message_hidden == 0 || message_out == 0 || update_hidden == 0 ||
      readout_hidden == 0) {
    throw ConfigError("MPNN layer widths must be positive");
  }
  if (propagation_layers == 0) throw ConfigError("MPNN needs at least one propagation layer");
}

std::string_view layer_name(MpnnLayer layer) noexcept {
  switch (layer) {
    case MpnnLayer::message0:
      return "message.0";
    case MpnnLayer::message1:
      return "message.1";
    case MpnnLayer::update0:
      return "update.0";
    case MpnnLayer::update1:
      return "update.1";
    case MpnnLayer::readout0:
      return "readout.0";
    case MpnnLayer::readout1:
      return "readout.1";
  }
  return "unknown";
}

MpnnParams::MpnnParams(const MpnnArchitecture& arch) : arch_(arch) {
  arch_.validate();
  const std::array<std::pair<std::size_t, std::size_t>, kMpnnLayerCount> dims{{
      {arch.message_in(), arch.message_hidden},
      {arch.message_hidden, arch.message_out},
      {arch.update_in(), arch.update_hidden},
      {arch.update_hidden, arch.embedding},
      {arch.embedding, arch.readout_hidden},
      {arch.readout_hidden, 1},
  }};
  std::size_t offset = 0;
  for (std::size_t l = 0; l < kMpnnLayerCount; ++l) {
    auto [in, out] = dims[l];
    shapes_[l] = DenseShape{in, out, offset, offset + in * out};
    offset += in * out + out;
  }
  values_.assign(offset, 0.0);
}

MpnnParams MpnnParams::glorot(const MpnnArchitecture& arch, Rng& rng) {
  MpnnParams p(arch);
  for (std::size_t l = 0; l < kMpnnLayerCount; ++l) {
    const DenseShape& s = p.shapes_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    for (std::size_t k = 0; k < s.in * s.out; ++k) {
      p.values_[s.weight_offset + k] = rng.uniform(-limit, limit);
    }
  }
  return p;
}

std::span<double> MpnnParams::weights(MpnnLayer layer) {
  const DenseShape& s = shape(layer);
  return {values_.data() + s.weight_offset, s.in * s.out};
}
std::span<const double> MpnnParams::weights(MpnnLayer layer) const {
  const DenseShape& s = shape(layer);
  return {values_.data() + s.weight_offset, s.in * s.out};
}
std::span<double> MpnnParams::bias(MpnnLayer layer) {
  const DenseShape& s = shape(layer);
  return {values_.data() + s.bias_offset, s.out};
}
std::span<const double> MpnnParams::bias(MpnnLayer layer) const {
  const DenseShape& s = shape(layer);
  return {values_.data() + s.bias_offset, s.out};
}

namespace {

void reshape(Matrix& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) m = Matrix(rows, cols);
}

double sigmoid(double x) {
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1).
  if (y >= 1.0) return 1.0 - 0x1.0p-53;
  if (y <= 0.0) return std::numeric_limits<double>::denorm_min();
  return y;
}

void check_sample(const GraphSample& s, const MpnnArchitecture& arch) {
  if (!s.normalized) throw std::invalid_argument("MPNN forward needs a normalized sample");
  const std::size_t m = s.size();
  if (s.z.cols() != MpnnArchitecture::node_features || s.a.rows() != m || s.a.cols() != m ||
      s.in_neighbors.size() != m) {
    throw ConfigError("graph sample does not match the MPNN input widths");
  }
  (void)arch;
}

struct Weights {
  const double* w;
  const double* b;
  std::size_t in;
  std::size_t out;
};

Weights layer(const MpnnParams& p, MpnnLayer l) {
  const DenseShape& s = p.shape(l);
  return {p.values().data() + s.weight_offset, p.values().data() + s.bias_offset, s.in, s.out};
}

}  // namespace

std::vector<double> forward(const GraphSample& s, const MpnnParams& params, ForwardCache* cache) {
  const MpnnArchitecture& arch = params.architecture();
  check_sample(s, arch);
  const auto& k = kernels::active();
  const std::size_t m = s.size();
  const std::size_t e_dim = arch.embedding;
  const std::size_t h1 = arch.message_hidden;
  const std::size_t h2 = arch.message_out;
  const std::size_t u_in = arch.update_in();
  const std::size_t u1 = arch.update_hidden;
  const std::size_t r1 = arch.readout_hidden;
  const std::size_t layers = arch.propagation_layers;
  const std::size_t nf = MpnnArchitecture::node_features;

  const Weights m0 = layer(params, MpnnLayer::message0);
  const Weights m1 = layer(params, MpnnLayer::message1);
  const Weights up0 = layer(params, MpnnLayer::update0);
  const Weights up1 = layer(params, MpnnLayer::update1);
  const Weights ro0 = layer(params, MpnnLayer::readout0);
  const Weights ro1 = layer(params, MpnnLayer::readout1);
  const double* edge_row = m0.w + (e_dim + nf) * h1;  // weights of the edge feature input

  std::vector<std::size_t> edge_offset(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) edge_offset[i + 1] = edge_offset[i] + s.in_neighbors[i].size();
  const std::size_t edges = edge_offset[m];

  if (cache) {
    cache->edge_src.resize(edges);
    cache->edge_dst.resize(edges);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t n = 0; n < s.in_neighbors[i].size(); ++n) {
        cache->edge_src[edge_offset[i] + n] = s.in_neighbors[i][n];
        cache->edge_dst[edge_offset[i] + n] = i;
      }
    }
    cache->embeddings.resize(layers + 1);
    cache->message_hidden.resize(layers);
    cache->messages.resize(layers);
    cache->aggregates.resize(layers);
    cache->argmax.resize(layers);
    cache->update_inputs.resize(layers);
    cache->update_hidden.resize(layers);
  }

  Matrix emb(m, e_dim), next(m, e_dim), node_proj(m, h1), agg(m, h2), upd_in(m, u_in), upd_h(m, u1);
  std::vector<std::int64_t> arg(m * h2);
  std::vector<double> x(e_dim + nf), hidden(h1), msg(h2);
  if (cache) {
    reshape(cache->embeddings[0], m, e_dim);
    std::fill(cache->embeddings[0].values().begin(), cache->embeddings[0].values().end(), 0.0);
  }

  for (std::size_t n = 0; n < layers; ++n) {
    double* hid_store = nullptr;
    double* msg_store = nullptr;
    if (cache) {
      reshape(cache->message_hidden[n], edges, h1);
      reshape(cache->messages[n], edges, h2);
      hid_store = cache->message_hidden[n].data();
      msg_store = cache->messages[n].data();
    }
    // The node part of the first message layer depends only on the source node.
    for (std::size_t j = 0; j < m; ++j) {
      std::copy_n(emb.row(j).data(), e_dim, x.data());
      x[e_dim] = s.z(j, 0);
      x[e_dim + 1] = s.z(j, 1);
      k.dense(m0.w, m0.b, x.data(), e_dim + nf, h1, node_proj.row(j).data());
    }
    for (std::size_t i = 0; i < m; ++i) {
      double* acc = agg.row(i).data();
      std::int64_t* win = arg.data() + i * h2;
      std::fill_n(acc, h2, -std::numeric_limits<double>::infinity());
      std::fill_n(win, h2, std::int64_t{-1});
      const auto& nbrs = s.in_neighbors[i];
      for (std::size_t idx = 0; idx < nbrs.size(); ++idx) {
        const std::size_t j = nbrs[idx];
        const std::size_t e = edge_offset[i] + idx;
        double* h = hid_store ? hid_store + e * h1 : hidden.data();
        double* out = msg_store ? msg_store + e * h2 : msg.data();
        std::copy_n(node_proj.row(j).data(), h1, h);
        k.axpy(h, edge_row, s.a(j, i), h1);
        k.relu(h, h1);
        k.dense(m1.w, m1.b, h, h1, h2, out);
        k.relu(out, h2);
        k.max_accumulate(acc, win, out, static_cast<std::int64_t>(e), h2);
      }
      if (nbrs.empty()) std::fill_n(acc, h2, 0.0);
    }
    for (std::size_t i = 0; i < m; ++i) {
      double* in = upd_in.row(i).data();
      std::copy_n(emb.row(i).data(), e_dim, in);
      in[e_dim] = s.z(i, 0);
      in[e_dim + 1] = s.z(i, 1);
      std::copy_n(agg.row(i).data(), h2, in + e_dim + nf);
      double* uh = upd_h.row(i).data();
      k.dense(up0.w, up0.b, in, u_in, u1, uh);
      k.relu(uh, u1);
      double* e_out = next.row(i).data();
      k.dense(up1.w, up1.b, uh, u1, e_dim, e_out);
      k.relu(e_out, e_dim);
    }
    if (cache) {
      cache->aggregates[n] = agg;
      cache->argmax[n] = arg;
      cache->update_inputs[n] = upd_in;
      cache->update_hidden[n] = upd_h;
      cache->embeddings[n + 1] = next;
    }
    std::swap(emb, next);
  }

  std::vector<double> mu(m);
  Matrix ro_h(m, r1);
  for (std::size_t i = 0; i < m; ++i) {
    double* rh = ro_h.row(i).data();
    k.dense(ro0.w, ro0.b, emb.row(i).data(), e_dim, r1, rh);
    k.relu(rh, r1);
    double logit;
    k.dense(ro1.w, ro1.b, rh, r1, 1, &logit);
    mu[i] = sigmoid(logit);
  }
  if (cache) {
    cache->readout_hidden = std::move(ro_h);
    cache->mu = mu;
  }
  return mu;
}

std::uint64_t activation_signature(const ForwardCache& cache) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  std::uint64_t word = 0;
  int bits = 0;
  auto push_bit = [&](bool b) {
    word = (word << 1) | (b ? 1u : 0u);
    if (++bits == 64) {
      h = splitmix64(h ^ word);
      word = 0;
      bits = 0;
    }
  };
  auto push_matrix = [&](const Matrix& mat) {
    for (double v : mat.values()) push_bit(v > 0.0);
  };
  for (const auto& mat : cache.message_hidden) push_matrix(mat);
  for (const auto& mat : cache.messages) push_matrix(mat);
  for (const auto& mat : cache.update_hidden) push_matrix(mat);
  for (const auto& mat : cache.embeddings) push_matrix(mat);
  push_matrix(cache.readout_hidden);
  for (const auto& winners : cache.argmax) {
    for (std::int64_t e : winners) h = splitmix64(h ^ static_cast<std::uint64_t>(e + 1));
  }
  return splitmix64(h ^ word ^ static_cast<std::uint64_t>(bits));
}

namespace {

// Accumulates scale * d(loss)/d(params) given d(loss)/d(mu) for one sample.
void backward(const GraphSample& s, const MpnnParams& params, const ForwardCache& c,
              std::span<const double> dmu, double scale, std::vector<double>& grad) {
  const MpnnArchitecture& arch = params.architecture();
  const auto& k = kernels::active();
  const std::size_t m = s.size();
  const std::size_t e_dim = arch.embedding;
  const std::size_t h1 = arch.message_hidden;
  const std::size_t h2 = arch.message_out;
  const std::size_t u_in = arch.update_in();
  const std::size_t u1 = arch.update_hidden;
  const std::size_t r1 = arch.readout_hidden;
  const std::size_t layers = arch.propagation_layers;
  const std::size_t nf = MpnnArchitecture::node_features;

  auto gw = [&](MpnnLayer l) { return grad.data() + params.shape(l).weight_offset; };
  auto gb = [&](MpnnLayer l) { return grad.data() + params.shape(l).bias_offset; };
  const Weights m0 = layer(params, MpnnLayer::message0);
  const Weights m1 = layer(params, MpnnLayer::message1);
  const Weights up0 = layer(params, MpnnLayer::update0);
  const Weights up1 = layer(params, MpnnLayer::update1);
  const Weights ro0 = layer(params, MpnnLayer::readout0);
  const Weights ro1 = layer(params, MpnnLayer::readout1);

  Matrix de(m, e_dim);
  std::vector<double> dr(r1);
  for (std::size_t i = 0; i < m; ++i) {
    const double mu = c.mu[i];
    double dlogit = scale * dmu[i] * mu * (1.0 - mu);
    if (dlogit == 0.0) continue;
    const double* rh = c.readout_hidden.row(i).data();
    k.outer_accumulate(gw(MpnnLayer::readout1), rh, &dlogit, r1, 1);
    gb(MpnnLayer::readout1)[0] += dlogit;
    for (std::size_t q = 0; q < r1; ++q) dr[q] = rh[q] > 0.0 ? ro1.w[q] * dlogit : 0.0;
    const double* e_last = c.embeddings[layers].row(i).data();
    k.outer_accumulate(gw(MpnnLayer::readout0), e_last, dr.data(), e_dim, r1);
    k.axpy(gb(MpnnLayer::readout0), dr.data(), 1.0, r1);
    k.dense_backward_input(ro0.w, dr.data(), e_dim, r1, de.row(i).data());
  }

  const std::size_t edges = c.edge_src.size();
  Matrix de_prev(m, e_dim);
  Matrix dmsg(edges, h2);
  std::vector<std::uint8_t> touched(edges);
  std::vector<double> dpre(std::max(e_dim, h2)), du(u1), dx(u_in), dh(h1), x_edge(e_dim + nf + 1);
  for (std::size_t n = layers; n-- > 0;) {
    std::fill(de_prev.values().begin(), de_prev.values().end(), 0.0);
    std::fill(dmsg.values().begin(), dmsg.values().end(), 0.0);
    std::fill(touched.begin(), touched.end(), 0);
    const Matrix& e_out = c.embeddings[n + 1];
    for (std::size_t i = 0; i < m; ++i) {
      bool any = false;
      for (std::size_t q = 0; q < e_dim; ++q) {
        dpre[q] = e_out(i, q) > 0.0 ? de(i, q) : 0.0;
        any = any || dpre[q] != 0.0;
      }
      if (!any) continue;
      const double* uh = c.update_hidden[n].row(i).data();
      k.outer_accumulate(gw(MpnnLayer::update1), uh, dpre.data(), u1, e_dim);
      k.axpy(gb(MpnnLayer::update1), dpre.data(), 1.0, e_dim);
      std::fill(du.begin(), du.end(), 0.0);
      k.dense_backward_input(up1.w, dpre.data(), u1, e_dim, du.data());
      for (std::size_t q = 0; q < u1; ++q) du[q] = uh[q] > 0.0 ? du[q] : 0.0;
      const double* in = c.update_inputs[n].row(i).data();
      k.outer_accumulate(gw(MpnnLayer::update0), in, du.data(), u_in, u1);
      k.axpy(gb(MpnnLayer::update0), du.data(), 1.0, u1);
      std::fill(dx.begin(), dx.end(), 0.0);
      k.dense_backward_input(up0.w, du.data(), u_in, u1, dx.data());
      k.axpy(de_prev.row(i).data(), dx.data(), 1.0, e_dim);
      const double* dagg = dx.data() + e_dim + nf;
      const std::int64_t* win = c.argmax[n].data() + i * h2;
      for (std::size_t q = 0; q < h2; ++q) {
        if (win[q] < 0 || dagg[q] == 0.0) continue;
        dmsg(static_cast<std::size_t>(win[q]), q) += dagg[q];
        touched[static_cast<std::size_t>(win[q])] = 1;
      }
    }
    for (std::size_t e = 0; e < edges; ++e) {
      if (!touched[e]) continue;
      const double* out = c.messages[n].row(e).data();
      bool any = false;
      for (std::size_t q = 0; q < h2; ++q) {
        dpre[q] = out[q] > 0.0 ? dmsg(e, q) : 0.0;
        any = any || dpre[q] != 0.0;
      }
      if (!any) continue;
      const double* h = c.message_hidden[n].row(e).data();
      k.outer_accumulate(gw(MpnnLayer::message1), h, dpre.data(), h1, h2);
      k.axpy(gb(MpnnLayer::message1), dpre.data(), 1.0, h2);
      std::fill(dh.begin(), dh.end(), 0.0);
      k.dense_backward_input(m1.w, dpre.data(), h1, h2, dh.data());
      for (std::size_t q = 0; q < h1; ++q) dh[q] = h[q] > 0.0 ? dh[q] : 0.0;
      const std::size_t j = c.edge_src[e];
      const std::size_t i = c.edge_dst[e];
      std::copy_n(c.embeddings[n].row(j).data(), e_dim, x_edge.data());
      x_edge[e_dim] = s.z(j, 0);
      x_edge[e_dim + 1] = s.z(j, 1);
      x_edge[e_dim + 2] = s.a(j, i);
      k.outer_accumulate(gw(MpnnLayer::message0), x_edge.data(), dh.data(), e_dim + nf + 1, h1);
      k.axpy(gb(MpnnLayer::message0), dh.data(), 1.0, h1);
      if (n > 0) k.dense_backward_input(m0.w, dh.data(), e_dim, h1, de_prev.row(j).data());
    }
    std::swap(de, de_prev);
  }
}

}  // namespace

double sample_loss(const GraphSample& sample, const MpnnParams& params) {
  const std::vector<double> mu = forward(sample, params);
  return objective_f(mu, graph_problem(sample));
}

double loss(std::span<const GraphSample> batch, const MpnnParams& params) {
  if (batch.empty()) throw std::invalid_argument("loss needs a nonempty batch");
  double total = 0.0;
  for (const GraphSample& s : batch) total += sample_loss(s, params);
  return total / static_cast<double>(batch.size());
}

LossGradient gradients(std::span<const GraphSample* const> batch, const MpnnParams& params) {
  if (batch.empty()) throw std::invalid_argument("gradients need a nonempty batch");
  LossGradient out{0.0, std::vector<double>(params.size(), 0.0)};
  const double scale = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  for (const GraphSample* s : batch) {
    const std::vector<double> mu = forward(*s, params, &cache);
    const SlotProblem prob = graph_problem(*s);
    out.loss += objective_f(mu, prob);
    const std::vector<double> dmu = objective_gradient(mu, prob);
    backward(*s, params, cache, dmu, scale, out.gradient);
  }
  out.loss *= scale;
  return out;
}

LossGradient gradients(std::span<const GraphSample> batch, const MpnnParams& params) {
  std::vector<const GraphSample*> ptrs;
  ptrs.reserve(batch.size());
  for (const GraphSample& s : batch) ptrs.push_back(&s);
  return gradients(std::span<const GraphSample* const>(ptrs), params);
}

}  // namespace d2d
