#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/numerics.hpp"

namespace sfuda {

struct DataConfig {
  int n_source = 500;
  int n_target = 500;
  int classes = 2;
  // Target shift: rotation about the base distribution's centre, then
  // translation, then additive noise.
  double rotation = 0.7853981633974483;  // radians
  double translation_x = 0.0;
  double translation_y = 0.0;
  double noise_scale = 0.0;
  // Base generators.
  double moon_noise = 0.1;   // two-moons jitter (C = 2)
  double moon_sep = 0.8;     // extra vertical gap between the moons
  double blob_radius = 3.0;  // Gaussian blobs on a circle (C > 2)
  double blob_noise = 0.3;
  // Augmentation families. Pilot-tuned: the strong family relies on noise and
  // mild rescaling; coordinate drops are off by default because zeroing one of
  // two input coordinates destroys class information at this scale.
  double sigma_weak = 0.02;
  double sigma_strong = 0.3;
  double scale_min = 0.9;
  double scale_max = 1.1;
  double drop_prob = 0.0;
};

struct Sample {
  RealVector x;
  int true_label = 0;  // evaluation only for target samples
  std::int64_t sample_id = 0;
};

struct DomainPair {
  std::vector<Sample> source;
  std::vector<Sample> target;
  DataConfig config;
};

DomainPair generate_domain_pair(const DataConfig& config, std::uint64_t seed);

/// x + Gaussian(0, sigma^2 I).
RealVector weak_augment(const RealVector& x, double sigma, std::mt19937_64& rng);

/// Random global scale, stronger Gaussian noise, occasional coordinate drop.
RealVector strong_augment(const RealVector& x, const DataConfig& config, std::mt19937_64& rng);

void write_dataset_csv(const DomainPair& pair, const std::string& path);

}  // namespace sfuda
