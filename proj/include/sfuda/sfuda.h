/* C API for the source-free domain adaptation library.
 *
 * All functions return sfuda_status; on failure a human-readable message is
 * available from sfuda_last_error() (thread-local). Handles are opaque and
 * must be released with their destroy function.
 */
#ifndef SFUDA_SFUDA_H_
#define SFUDA_SFUDA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SFUDA_API __declspec(dllexport)
#else
#define SFUDA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sfuda_status {
  SFUDA_OK = 0,
  SFUDA_ERR_INVALID_ARGUMENT = 1,
  SFUDA_ERR_IO = 2,
  SFUDA_ERR_CONFIG = 3,
  SFUDA_ERR_GRADCHECK = 4,
  SFUDA_ERR_INTERNAL = 5,
} sfuda_status;

typedef struct sfuda_config sfuda_config;

SFUDA_API const char* sfuda_version(void);
SFUDA_API const char* sfuda_last_error(void);

/* Configuration handle (all defaults populated). */
SFUDA_API sfuda_status sfuda_config_create(sfuda_config** out);
SFUDA_API sfuda_status sfuda_config_load(const char* path, sfuda_config** out);
SFUDA_API sfuda_status sfuda_config_save(const sfuda_config* config, const char* path);
SFUDA_API void sfuda_config_destroy(sfuda_config* config);

/* key is "section.key", e.g. "adapt.epochs". */
SFUDA_API sfuda_status sfuda_config_set(sfuda_config* config, const char* key,
                                        const char* value);
SFUDA_API sfuda_status sfuda_config_get(const sfuda_config* config, const char* key,
                                        char* buffer, size_t buffer_len);

/* Writes the synthetic source/target dataset CSV. */
SFUDA_API sfuda_status sfuda_gen_data(const sfuda_config* config, uint64_t seed,
                                      const char* out_path);

/* Full run: source training, pseudo-label init, adaptation epochs. Writes
 * metrics_<seed>.csv and summary_<seed>.txt into out_dir (plus optional
 * model/data/diagnostics files when enabled in the config). */
SFUDA_API sfuda_status sfuda_run_adapt(const sfuda_config* config, uint64_t seed,
                                       const char* out_dir);

/* Ablation grid over component toggles, loss/weighting variants and the
 * history-length sweep; one metrics file per (cell, seed) plus a merged
 * ablation_summary.csv. */
SFUDA_API sfuda_status sfuda_run_ablation(const sfuda_config* config, const uint64_t* seeds,
                                          size_t n_seeds, const char* out_dir);

/* Finite-difference verification of all analytic loss gradients. Returns
 * SFUDA_ERR_GRADCHECK if any check exceeds the tolerance. corrupt != 0
 * deliberately breaks the analytic gradients (test fixture). */
SFUDA_API sfuda_status sfuda_grad_check(int trials, double tolerance, int corrupt,
                                        double* max_relative_error);

#ifdef __cplusplus
}
#endif

#endif /* SFUDA_SFUDA_H_ */
