#include "core/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sfuda {

namespace {

std::vector<int> layer_widths(const ModelConfig& c) {
  std::vector<int> widths;
  widths.push_back(c.input_dim);
  for (int h : c.hidden) widths.push_back(h);
  widths.push_back(c.bottleneck_dim);
  return widths;
}

Layer init_layer(int fan_in, int fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Layer layer;
  layer.weight.assign(fan_out, RealVector(fan_in));
  layer.bias.assign(fan_out, 0.0);
  for (auto& row : layer.weight) {
    for (double& w : row) w = dist(rng);
  }
  return layer;
}

RealVector affine(const Layer& layer, const RealVector& x) {
  RealVector out(layer.bias);
  for (std::size_t o = 0; o < layer.weight.size(); ++o) {
    const RealVector& row = layer.weight[o];
    double s = out[o];
    for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * x[i];
    out[o] = s;
  }
  return out;
}

Layer zero_like(const Layer& layer) {
  Layer z;
  z.weight.assign(layer.weight.size(), RealVector(layer.weight.front().size(), 0.0));
  z.bias.assign(layer.bias.size(), 0.0);
  return z;
}

template <typename Fn>
void for_each_array(ModelParams& p, Fn&& fn) {
  for (Layer& l : p.encoder) {
    for (RealVector& row : l.weight) fn(row);
    fn(l.bias);
  }
  for (RealVector& row : p.classifier.weight) fn(row);
  fn(p.classifier.bias);
}

template <typename Fn>
void for_each_array(const ModelParams& p, Fn&& fn) {
  for (const Layer& l : p.encoder) {
    for (const RealVector& row : l.weight) fn(row);
    fn(l.bias);
  }
  for (const RealVector& row : p.classifier.weight) fn(row);
  fn(p.classifier.bias);
}

}  // namespace

ModelParams init_model(const ModelConfig& config, std::mt19937_64& rng) {
  if (config.input_dim < 1 || config.bottleneck_dim < 1) throw Error("zero-width layer");
  for (int h : config.hidden) {
    if (h < 1) throw Error("zero-width layer");
  }
  if (config.num_classes < 2) throw Error("need at least two classes");
  ModelParams params;
  params.config = config;
  const std::vector<int> widths = layer_widths(config);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    params.encoder.push_back(init_layer(widths[i], widths[i + 1], rng));
  }
  params.classifier = init_layer(config.bottleneck_dim, config.num_classes, rng);
  return params;
}

ForwardCache forward(const ModelParams& params, const RealVector& x) {
  if (static_cast<int>(x.size()) != params.config.input_dim) throw Error("dimension mismatch");
  ForwardCache cache;
  cache.input = x;
  RealVector h = x;
  const std::size_t n_layers = params.encoder.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    h = affine(params.encoder[l], h);
    if (l + 1 < n_layers) {
      for (double& v : h) v = std::tanh(v);  // bottleneck stays linear
    }
    cache.activations.push_back(h);
  }
  cache.z = h;
  cache.logits = affine(params.classifier, h);
  cache.probs = softmax(cache.logits);
  return cache;
}

std::vector<std::pair<RealVector, RealVector>> predict_batch(
    const ModelParams& params, const std::vector<RealVector>& xs) {
  if (xs.empty()) throw Error("empty batch");
  std::vector<std::pair<RealVector, RealVector>> out;
  out.reserve(xs.size());
  for (const RealVector& x : xs) {
    ForwardCache c = forward(params, x);
    out.emplace_back(std::move(c.z), std::move(c.probs));
  }
  return out;
}

ParamGrads zero_grads(const ModelParams& params) {
  ParamGrads g;
  for (const Layer& l : params.encoder) g.encoder.push_back(zero_like(l));
  g.classifier = zero_like(params.classifier);
  return g;
}

void accumulate_backward(const ModelParams& params, const ForwardCache& cache,
                         const RealVector& dlogits, const RealVector& dz,
                         ParamGrads& out) {
  const std::size_t n_layers = params.encoder.size();
  // Classifier.
  RealVector d = dz.empty() ? RealVector(cache.z.size(), 0.0) : dz;
  if (!dlogits.empty()) {
    if (dlogits.size() != cache.logits.size()) throw Error("shape mismatch");
    for (std::size_t o = 0; o < dlogits.size(); ++o) {
      for (std::size_t i = 0; i < cache.z.size(); ++i)
        out.classifier.weight[o][i] += dlogits[o] * cache.z[i];
      out.classifier.bias[o] += dlogits[o];
    }
    for (std::size_t i = 0; i < cache.z.size(); ++i) {
      double s = d[i];
      for (std::size_t o = 0; o < dlogits.size(); ++o)
        s += params.classifier.weight[o][i] * dlogits[o];
      d[i] = s;
    }
  }
  // Encoder, back to front. Hidden layers are tanh, bottleneck is linear.
  for (std::size_t l = n_layers; l-- > 0;) {
    if (l + 1 < n_layers) {
      const RealVector& act = cache.activations[l];
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - act[i] * act[i];
    }
    const RealVector& in = (l == 0) ? cache.input : cache.activations[l - 1];
    Layer& g = out.encoder[l];
    for (std::size_t o = 0; o < d.size(); ++o) {
      for (std::size_t i = 0; i < in.size(); ++i) g.weight[o][i] += d[o] * in[i];
      g.bias[o] += d[o];
    }
    if (l > 0) {
      RealVector dprev(in.size(), 0.0);
      for (std::size_t i = 0; i < in.size(); ++i) {
        double s = 0.0;
        for (std::size_t o = 0; o < d.size(); ++o)
          s += params.encoder[l].weight[o][i] * d[o];
        dprev[i] = s;
      }
      d = std::move(dprev);
    }
  }
}

void ema_update(ModelParams& momentum_params, const ModelParams& online_params, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw Error("ema coefficient out of [0, 1]");
  RealVector online_flat = flatten_params(online_params);
  RealVector mom_flat = flatten_params(momentum_params);
  if (online_flat.size() != mom_flat.size()) throw Error("shape mismatch");
  for (std::size_t i = 0; i < mom_flat.size(); ++i)
    mom_flat[i] = m * mom_flat[i] + (1.0 - m) * online_flat[i];
  unflatten_params(momentum_params, mom_flat);
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for_each_array(params, [&](const RealVector& a) { n += a.size(); });
  return n;
}

RealVector flatten_params(const ModelParams& params) {
  RealVector flat;
  flat.reserve(parameter_count(params));
  for_each_array(params, [&](const RealVector& a) { flat.insert(flat.end(), a.begin(), a.end()); });
  return flat;
}

void unflatten_params(ModelParams& params, const RealVector& flat) {
  std::size_t pos = 0;
  for_each_array(params, [&](RealVector& a) {
    if (pos + a.size() > flat.size()) throw Error("shape mismatch");
    std::copy(flat.begin() + pos, flat.begin() + pos + a.size(), a.begin());
    pos += a.size();
  });
  if (pos != flat.size()) throw Error("shape mismatch");
}

RealVector flatten_grads(const ParamGrads& grads) {
  RealVector flat;
  for (const Layer& l : grads.encoder) {
    for (const RealVector& row : l.weight) flat.insert(flat.end(), row.begin(), row.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  for (const RealVector& row : grads.classifier.weight)
    flat.insert(flat.end(), row.begin(), row.end());
  flat.insert(flat.end(), grads.classifier.bias.begin(), grads.classifier.bias.end());
  return flat;
}

void apply_sgd(ModelParams& params, const ParamGrads& grads, double learning_rate,
               ParamGrads& momentum_buffers, double momentum) {
  RealVector p = flatten_params(params);
  RealVector g = flatten_grads(grads);
  RealVector b = flatten_grads(momentum_buffers);
  sgd_step(p, g, learning_rate, b, momentum);
  unflatten_params(params, p);
  // Write buffers back through the same flat ordering.
  std::size_t pos = 0;
  auto restore = [&](RealVector& a) {
    std::copy(b.begin() + pos, b.begin() + pos + a.size(), a.begin());
    pos += a.size();
  };
  for (Layer& l : momentum_buffers.encoder) {
    for (RealVector& row : l.weight) restore(row);
    restore(l.bias);
  }
  for (RealVector& row : momentum_buffers.classifier.weight) restore(row);
  restore(momentum_buffers.classifier.bias);
}

void save_model(const ModelParams& params, std::uint64_t seed, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << "sfuda-model v1\n";
  out << "input_dim " << params.config.input_dim << "\n";
  out << "hidden";
  for (int h : params.config.hidden) out << " " << h;
  out << "\n";
  out << "bottleneck_dim " << params.config.bottleneck_dim << "\n";
  out << "num_classes " << params.config.num_classes << "\n";
  out << "seed " << seed << "\n";
  const RealVector flat = flatten_params(params);
  out << "params " << flat.size() << "\n";
  char buf[32];
  for (double v : flat) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << "\n";
  }
  if (!out) throw Error("write failure: " + path);
}

ModelParams load_model(const std::string& path, std::uint64_t* seed_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string line;
  std::getline(in, line);
  if (line != "sfuda-model v1") throw Error("bad model file header");
  ModelConfig config;
  config.hidden.clear();
  std::uint64_t seed = 0;
  std::size_t n_params = 0;
  std::string key;
  while (in >> key) {
    if (key == "input_dim") in >> config.input_dim;
    else if (key == "hidden") {
      std::getline(in, line);
      std::istringstream hs(line);
      int h;
      while (hs >> h) config.hidden.push_back(h);
    } else if (key == "bottleneck_dim") in >> config.bottleneck_dim;
    else if (key == "num_classes") in >> config.num_classes;
    else if (key == "seed") in >> seed;
    else if (key == "params") { in >> n_params; break; }
    else throw Error("unknown model file key: " + key);
  }
  std::mt19937_64 rng(0);
  ModelParams params = init_model(config, rng);
  RealVector flat(n_params);
  for (double& v : flat) {
    if (!(in >> v)) throw Error("truncated model file");
  }
  unflatten_params(params, flat);
  if (seed_out) *seed_out = seed;
  return params;
}

}  // namespace sfuda
