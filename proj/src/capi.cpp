#include "sfuda/sfuda.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/adapt.hpp"
#include "core/config.hpp"
#include "core/gradcheck.hpp"

namespace fs = std::filesystem;

namespace {

thread_local std::string g_last_error;

struct sfuda_config_impl {
  sfuda::AdaptationConfig config;
};

sfuda_status fail(sfuda_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
sfuda_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const sfuda::IoError& e) {
    return fail(SFUDA_ERR_IO, e.what());
  } catch (const sfuda::Error& e) {
    return fail(SFUDA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(SFUDA_ERR_INTERNAL, e.what());
  }
}

const sfuda::AdaptationConfig& cfg(const sfuda_config* handle) {
  return reinterpret_cast<const sfuda_config_impl*>(handle)->config;
}

void write_run_outputs(const sfuda::AdaptationConfig& config, std::uint64_t seed,
                       const sfuda::RunResult& result, const fs::path& out_dir) {
  const std::string tag = std::to_string(seed);
  sfuda::write_metrics_csv(result.metrics, (out_dir / ("metrics_" + tag + ".csv")).string());
  sfuda::write_summary(config, seed, result, (out_dir / ("summary_" + tag + ".txt")).string());
  if (config.save_models) {
    sfuda::save_model(result.final_online, seed, (out_dir / ("model_" + tag + ".txt")).string());
  }
  if (config.dump_data) {
    sfuda::write_dataset_csv(sfuda::generate_domain_pair(config.data, seed),
                             (out_dir / ("dataset_" + tag + ".csv")).string());
  }
  if (config.dump_diagnostics) {
    sfuda::write_diagnostics_csv(result.diagnostics,
                                 (out_dir / ("diag_" + tag + ".csv")).string());
  }
}

bool verbose() {
  const char* level = std::getenv("SFUDA_LOG");
  return level && (std::strcmp(level, "info") == 0 || std::strcmp(level, "debug") == 0);
}

}  // namespace

extern "C" {

const char* sfuda_version(void) { return "0.1.0"; }

const char* sfuda_last_error(void) { return g_last_error.c_str(); }

sfuda_status sfuda_config_create(sfuda_config** out) {
  if (!out) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = reinterpret_cast<sfuda_config*>(new sfuda_config_impl());
    return SFUDA_OK;
  });
}

sfuda_status sfuda_config_load(const char* path, sfuda_config** out) {
  if (!path || !out) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  try {
    auto* impl = new sfuda_config_impl();
    impl->config = sfuda::load_config(path);
    *out = reinterpret_cast<sfuda_config*>(impl);
    return SFUDA_OK;
  } catch (const std::exception& e) {
    return fail(SFUDA_ERR_CONFIG, e.what());
  }
}

sfuda_status sfuda_config_save(const sfuda_config* config, const char* path) {
  if (!config || !path) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  try {
    sfuda::save_config(cfg(config), path);
    return SFUDA_OK;
  } catch (const std::exception& e) {
    return fail(SFUDA_ERR_IO, e.what());
  }
}

void sfuda_config_destroy(sfuda_config* config) {
  delete reinterpret_cast<sfuda_config_impl*>(config);
}

sfuda_status sfuda_config_set(sfuda_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  try {
    sfuda::set_config_value(reinterpret_cast<sfuda_config_impl*>(config)->config, key, value);
    return SFUDA_OK;
  } catch (const std::exception& e) {
    return fail(SFUDA_ERR_CONFIG, e.what());
  }
}

sfuda_status sfuda_config_get(const sfuda_config* config, const char* key, char* buffer,
                              size_t buffer_len) {
  if (!config || !key || !buffer || buffer_len == 0)
    return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const std::string value = sfuda::get_config_value(cfg(config), key);
    if (value.size() + 1 > buffer_len) return fail(SFUDA_ERR_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(buffer, value.c_str(), value.size() + 1);
    return SFUDA_OK;
  } catch (const std::exception& e) {
    return fail(SFUDA_ERR_CONFIG, e.what());
  }
}

sfuda_status sfuda_gen_data(const sfuda_config* config, uint64_t seed, const char* out_path) {
  if (!config || !out_path) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    sfuda::write_dataset_csv(sfuda::generate_domain_pair(cfg(config).data, seed), out_path);
    return SFUDA_OK;
  });
}

sfuda_status sfuda_run_adapt(const sfuda_config* config, uint64_t seed, const char* out_dir) {
  if (!config || !out_dir) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() -> sfuda_status {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) return fail(SFUDA_ERR_IO, "cannot create output dir: " + dir.string());
    if (verbose()) std::fprintf(stderr, "[sfuda] adapt seed=%llu\n", (unsigned long long)seed);
    const sfuda::RunResult result = sfuda::run_adaptation(cfg(config), seed);
    write_run_outputs(cfg(config), seed, result, dir);
    return SFUDA_OK;
  });
}

sfuda_status sfuda_run_ablation(const sfuda_config* config, const uint64_t* seeds,
                                size_t n_seeds, const char* out_dir) {
  if (!config || !seeds || n_seeds == 0 || !out_dir)
    return fail(SFUDA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() -> sfuda_status {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) return fail(SFUDA_ERR_IO, "cannot create output dir: " + dir.string());

    std::ofstream summary(dir / "ablation_summary.csv");
    if (!summary) return fail(SFUDA_ERR_IO, "cannot write ablation summary");
    summary << "# sfuda-ablation v1\n";
    summary << "cell,seed,source_only_target_acc,final_target_acc,final_pl_acc\n";
    char buf[256];
    for (const sfuda::AblationCell& cell : sfuda::ablation_grid(cfg(config))) {
      for (size_t i = 0; i < n_seeds; ++i) {
        if (verbose())
          std::fprintf(stderr, "[sfuda] ablate cell=%s seed=%llu\n", cell.name.c_str(),
                       (unsigned long long)seeds[i]);
        const sfuda::RunResult result = sfuda::run_adaptation(cell.config, seeds[i]);
        const std::string tag = cell.name + "_" + std::to_string(seeds[i]);
        sfuda::write_metrics_csv(result.metrics, (dir / ("metrics_" + tag + ".csv")).string());
        std::snprintf(buf, sizeof(buf), "%s,%llu,%.17g,%.17g,%.17g", cell.name.c_str(),
                      (unsigned long long)seeds[i], result.source_only_target_accuracy,
                      result.metrics.back().target_accuracy,
                      result.metrics.back().pseudo_label_accuracy);
        summary << buf << "\n";
      }
    }
    return SFUDA_OK;
  });
}

sfuda_status sfuda_grad_check(int trials, double tolerance, int corrupt,
                              double* max_relative_error) {
  if (trials < 1) return fail(SFUDA_ERR_INVALID_ARGUMENT, "trials must be positive");
  if (!max_relative_error) return fail(SFUDA_ERR_INVALID_ARGUMENT, "null output pointer");
  return guarded([&]() -> sfuda_status {
    double worst = 0.0;
    bool all_passed = true;
    for (const sfuda::GradCheckResult& r :
         sfuda::run_gradient_checks(trials, tolerance, corrupt != 0)) {
      worst = std::max(worst, r.max_relative_error);
      all_passed = all_passed && r.passed;
      if (verbose())
        std::fprintf(stderr, "[sfuda] grad-check %s: max_rel_err=%.3g %s\n", r.name.c_str(),
                     r.max_relative_error, r.passed ? "ok" : "FAILED");
    }
    *max_relative_error = worst;
    if (!all_passed) return fail(SFUDA_ERR_GRADCHECK, "gradient check exceeded tolerance");
    return SFUDA_OK;
  });
}

}  // extern "C"
