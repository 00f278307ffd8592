#include "core/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/rng.hpp"

namespace sfuda {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate(const DataConfig& c) {
  if (c.classes < 2 || c.classes > 8) throw Error("classes must be in [2, 8]");
  if (c.n_source < c.classes * 10 || c.n_target < c.classes * 10)
    throw Error("need at least 10 samples per class");
  if (!(c.rotation >= 0.0 && c.rotation < kPi)) throw Error("rotation out of [0, pi)");
  if (!(c.scale_min > 0.0 && c.scale_max >= c.scale_min)) throw Error("bad scale range");
  if (!(c.drop_prob >= 0.0 && c.drop_prob <= 1.0)) throw Error("bad drop probability");
  if (c.sigma_weak < 0.0 || c.sigma_strong < 0.0 || c.noise_scale < 0.0 ||
      c.moon_noise < 0.0 || c.blob_noise < 0.0)
    throw Error("negative noise scale");
}

// One base-distribution draw for a given class. Two-moons for C=2, Gaussian
// blobs on a circle otherwise.
RealVector draw_base(const DataConfig& c, int label, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kPi);
  std::normal_distribution<double> jitter(0.0, 1.0);
  if (c.classes == 2) {
    const double t = angle(rng);
    double x, y;
    if (label == 0) {
      x = std::cos(t);
      y = std::sin(t);
    } else {
      x = 1.0 - std::cos(t);
      y = 0.5 - c.moon_sep - std::sin(t);
    }
    return {x + c.moon_noise * jitter(rng), y + c.moon_noise * jitter(rng)};
  }
  const double theta = 2.0 * kPi * label / c.classes;
  return {c.blob_radius * std::cos(theta) + c.blob_noise * jitter(rng),
          c.blob_radius * std::sin(theta) + c.blob_noise * jitter(rng)};
}

RealVector apply_shift(const DataConfig& c, const RealVector& p, std::mt19937_64& rng) {
  const double ca = std::cos(c.rotation);
  const double sa = std::sin(c.rotation);
  // Rotate about the base distribution's centre so the rotation shifts the
  // structure in place instead of also displacing it.
  const double cx = c.classes == 2 ? 0.5 : 0.0;
  const double cy = c.classes == 2 ? 0.5 * (0.5 - c.moon_sep) : 0.0;
  std::normal_distribution<double> noise(0.0, 1.0);
  RealVector out(2);
  out[0] = ca * (p[0] - cx) - sa * (p[1] - cy) + cx + c.translation_x;
  out[1] = sa * (p[0] - cx) + ca * (p[1] - cy) + cy + c.translation_y;
  if (c.noise_scale > 0.0) {
    out[0] += c.noise_scale * noise(rng);
    out[1] += c.noise_scale * noise(rng);
  }
  return out;
}

}  // namespace

DomainPair generate_domain_pair(const DataConfig& config, std::uint64_t seed) {
  validate(config);
  DomainPair pair;
  pair.config = config;
  std::mt19937_64 rng = make_stream(seed, Stream::kData);
  std::int64_t next_id = 0;
  for (int i = 0; i < config.n_source; ++i) {
    const int label = i % config.classes;
    pair.source.push_back({draw_base(config, label, rng), label, next_id++});
  }
  for (int i = 0; i < config.n_target; ++i) {
    const int label = i % config.classes;
    RealVector base = draw_base(config, label, rng);
    pair.target.push_back({apply_shift(config, base, rng), label, next_id++});
  }
  return pair;
}

RealVector weak_augment(const RealVector& x, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  RealVector out(x);
  for (double& v : out) v += sigma * noise(rng);
  return out;
}

RealVector strong_augment(const RealVector& x, const DataConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale(config.scale_min, config.scale_max);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = scale(rng);
  RealVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i] + config.sigma_strong * noise(rng);
  // Draw both decisions unconditionally so call cost in the stream is fixed.
  const double u = unit(rng);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  const std::size_t coord = pick(rng);
  if (u < config.drop_prob) out[coord] = 0.0;
  return out;
}

void write_dataset_csv(const DomainPair& pair, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  out << "# sfuda-dataset v1\n";
  out << "sample_id,x0,x1,true_label,split\n";
  char buf[64];
  auto write_split = [&](const std::vector<Sample>& samples, const char* split) {
    for (const Sample& s : samples) {
      std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%d,%s",
                    static_cast<long long>(s.sample_id), s.x[0], s.x[1], s.true_label, split);
      out << buf << "\n";
    }
  };
  write_split(pair.source, "source");
  write_split(pair.target, "target");
  if (!out) throw Error("write failure: " + path);
}

}  // namespace sfuda
