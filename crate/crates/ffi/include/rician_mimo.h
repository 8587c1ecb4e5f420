/* C ABI for the rician-mimo uplink spectral-efficiency calculator. */

#ifndef RICIAN_MIMO_H
#define RICIAN_MIMO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum RmimoStatus {
  RMIMO_OK = 0,
  RMIMO_NULL_POINTER = 1,
  RMIMO_INVALID_ARGUMENT = 2,
  RMIMO_INVALID_CONFIGURATION = 3,
  RMIMO_VALIDATION_FAILED = 4,
  RMIMO_INTERNAL_ERROR = 5,
  RMIMO_IO_ERROR = 6,
  RMIMO_BUFFER_TOO_SMALL = 7,
} RmimoStatus;

/**
 * Fading mode selector.
 */
typedef enum RmimoFading {
  RMIMO_FADING_RICIAN = 0,
  RMIMO_FADING_RAYLEIGH = 1,
} RmimoFading;

/**
 * Channel estimator selector for MR combining.
 */
typedef enum RmimoEstimator {
  RMIMO_ESTIMATOR_MMSE = 0,
  RMIMO_ESTIMATOR_LS = 1,
} RmimoEstimator;

/**
 * Opaque system configuration handle.
 */
typedef struct RmimoConfig RmimoConfig;

/**
 * Opaque realized-network handle.
 */
typedef struct RmimoNetwork RmimoNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmimo_version(void);

/**
 * Human-readable name of a status code (static string).
 */
const char *rmimo_status_name(enum RmimoStatus status);

/**
 * Configuration with the 16-cell baseline parameters. Never fails.
 * Release with [`rmimo_config_free`].
 */
struct RmimoConfig *rmimo_config_paper_default(void);

/**
 * Validated configuration from explicit parameters. On success writes the
 * handle to `out`; release with [`rmimo_config_free`].
 *
 * # Safety
 * `out` must be a valid pointer to writable memory.
 */
enum RmimoStatus rmimo_config_new(uint32_t antennas,
                                  uint32_t ues_per_cell,
                                  uint32_t cells,
                                  uint32_t coherence_len,
                                  uint32_t pilot_len,
                                  double ul_power_mw,
                                  double noise_mw,
                                  double asd_deg,
                                  struct RmimoConfig **out);

/**
 * Releases a configuration handle; a null pointer is a no-op.
 *
 * # Safety
 * `cfg` must be null or a pointer obtained from this library and not yet
 * freed.
 */
void rmimo_config_free(struct RmimoConfig *cfg);

/**
 * Realizes one network drop (geometry, shadowing, pilots and the full
 * link-statistics table) for a seed and drop index. Release with
 * [`rmimo_network_free`].
 *
 * # Safety
 * `cfg` must be a live configuration handle and `out` writable.
 */
enum RmimoStatus rmimo_network_realize(const struct RmimoConfig *cfg,
                                       enum RmimoFading fading,
                                       uint64_t seed,
                                       uint32_t drop_index,
                                       struct RmimoNetwork **out);

/**
 * Releases a network handle; a null pointer is a no-op.
 *
 * # Safety
 * `net` must be null or a pointer obtained from this library and not yet
 * freed.
 */
void rmimo_network_free(struct RmimoNetwork *net);

/**
 * Number of UEs in the network (the required length of result buffers).
 *
 * # Safety
 * `net` must be a live network handle.
 */
uint32_t rmimo_network_ue_count(const struct RmimoNetwork *net);

/**
 * Per-UE closed-form SE (bit/s/Hz) under MR combining with the chosen
 * estimator, written to `out[0..len]`; `len` must be at least the UE
 * count. Entry order is `cell * ues_per_cell + k`.
 *
 * # Safety
 * `net` must be a live network handle and `out` must point to `len`
 * writable doubles.
 */
enum RmimoStatus rmimo_network_se(const struct RmimoNetwork *net,
                                  enum RmimoEstimator estimator,
                                  double *out,
                                  size_t len);

/**
 * Per-UE closed-form effective SINR (linear), same contract as
 * [`rmimo_network_se`].
 *
 * # Safety
 * `net` must be a live network handle and `out` must point to `len`
 * writable doubles.
 */
enum RmimoStatus rmimo_network_sinr(const struct RmimoNetwork *net,
                                    enum RmimoEstimator estimator,
                                    double *out,
                                    size_t len);

/**
 * Writes the network geometry dump (UTF-8 text records) to `path`.
 *
 * # Safety
 * `net` must be a live network handle and `path` a NUL-terminated UTF-8
 * string.
 */
enum RmimoStatus rmimo_network_dump(const struct RmimoNetwork *net, const char *path);

/**
 * SE from a linear SINR for a coherence block split: the pre-log factor
 * `(tau_c - tau_p)/tau_c` times `log2(1+sinr)`. Returns NaN for invalid
 * block lengths or a negative SINR.
 */
double rmimo_se_from_sinr(double sinr, uint32_t coherence_len, uint32_t pilot_len);

/**
 * LoS path loss in dB for a distance in meters plus a shadow term.
 * Writes the result to `out`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RmimoStatus rmimo_pathloss_los_db(double distance_m, double shadow_db, double *out);

/**
 * NLoS path loss in dB, same contract as [`rmimo_pathloss_los_db`].
 *
 * # Safety
 * `out` must be writable.
 */
enum RmimoStatus rmimo_pathloss_nlos_db(double distance_m, double shadow_db, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RICIAN_MIMO_H */
