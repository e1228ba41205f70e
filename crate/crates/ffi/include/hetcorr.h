#ifndef HETCORR_H
#define HETCORR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HetcorrStatus {
  HETCORR_STATUS_OK = 0,
  HETCORR_STATUS_NULL_POINTER = 1,
  HETCORR_STATUS_INVALID_ARGUMENT = 2,
  HETCORR_STATUS_VALIDATION = 3,
  HETCORR_STATUS_UNDEFINED = 4,
  HETCORR_STATUS_INCONSISTENT_DATA = 5,
  HETCORR_STATUS_FIT_FAILURE = 6,
  HETCORR_STATUS_PARSE = 7,
  HETCORR_STATUS_IO = 8,
  HETCORR_STATUS_BUFFER_TOO_SMALL = 9,
  HETCORR_STATUS_PANIC = 10,
} HetcorrStatus;

// Opaque two-input FX correlator.
typedef struct HetcorrCorrelator HetcorrCorrelator;

// Opaque result of a scenario run.
typedef struct HetcorrResult HetcorrResult;

// Opaque scenario configuration.
typedef struct HetcorrScenario HetcorrScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t hetcorr_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *hetcorr_version(void);

// Quantum temperature `h nu / k_B` in kelvin.
double hetcorr_quantum_temperature(double frequency_hz);

// Balanced-output Fano factor for efficiency `eta`, splitter reflectance
// `r` and LO Fano factor `fano_lo`.
double hetcorr_fano_balanced(double eta, double r, double fano_lo);

// Zero-signal LO correlation between two balanced pairs.
double hetcorr_lo_correlation(double eta, double r_a, double r_b, double fano_lo);

// # Safety
// `out` must be a valid pointer.
enum HetcorrStatus hetcorr_optimum_gain_db(double target_rms,
                                           double z_load,
                                           double responsivity,
                                           double optical_frequency,
                                           double bandwidth,
                                           double p_lo,
                                           double *out);

// # Safety
// `out` must be a valid pointer.
enum HetcorrStatus hetcorr_clip_probability(double ratio, double *out);

// # Safety
// `out` must be a valid pointer.
enum HetcorrStatus hetcorr_t_rec_from_power(double p_s_at_y,
                                            double y,
                                            double channel_bw,
                                            double *out);

// Allan variance at octave-spaced averaging times. Writes up to `capacity`
// points and the number available to `written`; returns
// `BUFFER_TOO_SMALL` if `capacity` is short.
//
// # Safety
// `series` must point to `n` doubles; `taus` and `variances` to `capacity`
// doubles; `written` must be valid.
enum HetcorrStatus hetcorr_allan_variance(const double *series,
                                          size_t n,
                                          double interval,
                                          bool overlapping,
                                          double *taus,
                                          double *variances,
                                          size_t capacity,
                                          size_t *written);

// Parse a scenario from TOML text.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` a valid pointer.
enum HetcorrStatus hetcorr_scenario_from_toml(const char *toml, struct HetcorrScenario **out);

// Scenario of a named preset.
//
// # Safety
// `name` must be a NUL-terminated string; `out` a valid pointer.
enum HetcorrStatus hetcorr_scenario_from_preset(const char *name, struct HetcorrScenario **out);

// # Safety
// `scenario` must be a live handle.
enum HetcorrStatus hetcorr_scenario_set_seed(struct HetcorrScenario *scenario, uint64_t seed);

// Set simulated time per sweep point.
//
// # Safety
// `scenario` must be a live handle.
enum HetcorrStatus hetcorr_scenario_set_duration(struct HetcorrScenario *scenario,
                                                 double duration_s);

// Simulate and write products to `out_dir`. `workers = 0` uses every core.
//
// # Safety
// `scenario` must be a live handle, `out_dir` a NUL-terminated string and
// `out` a valid pointer.
enum HetcorrStatus hetcorr_scenario_run(const struct HetcorrScenario *scenario,
                                        const char *out_dir,
                                        size_t workers,
                                        struct HetcorrResult **out);

// # Safety
// `scenario` must be null or a handle not yet freed.
void hetcorr_scenario_free(struct HetcorrScenario *scenario);

// Receiver temperatures from the response fit; fails with `UNDEFINED` when
// the run had fewer than two sweep points.
//
// # Safety
// `result` must be a live handle; outputs valid pointers.
enum HetcorrStatus hetcorr_result_t_rec(const struct HetcorrResult *result,
                                        double *t_rec_ac,
                                        double *t_rec_cc);

// Zero-signal c_LO; `UNDEFINED` when no sweep point has zero source power.
//
// # Safety
// `result` must be a live handle; `out` a valid pointer.
enum HetcorrStatus hetcorr_result_zero_signal_c_lo(const struct HetcorrResult *result, double *out);

// Copy the run summary as JSON into `buf` (NUL-terminated). `needed`
// receives the buffer size required, including the terminator.
//
// # Safety
// `result` must be a live handle; `buf` null or `len` writable bytes;
// `needed` valid.
enum HetcorrStatus hetcorr_result_summary_json(const struct HetcorrResult *result,
                                               char *buf,
                                               size_t len,
                                               size_t *needed);

// # Safety
// `result` must be null or a handle not yet freed.
void hetcorr_result_free(struct HetcorrResult *result);

// New correlator with `fft_length`-point chunks (a power of two).
//
// # Safety
// `out` must be a valid pointer.
enum HetcorrStatus hetcorr_correlator_new(size_t fft_length,
                                          double sample_rate,
                                          struct HetcorrCorrelator **out);

// Feed `n` samples of each input. Samples that do not complete a chunk
// are kept for the next call.
//
// # Safety
// `c` must be a live handle; `a` and `b` must each point to `n` doubles.
enum HetcorrStatus hetcorr_correlator_push(struct HetcorrCorrelator *c,
                                           const double *a,
                                           const double *b,
                                           size_t n);

// # Safety
// `c` must be a live handle.
size_t hetcorr_correlator_channels(const struct HetcorrCorrelator *c);

// # Safety
// `c` must be a live handle.
uint64_t hetcorr_correlator_chunks(const struct HetcorrCorrelator *c);

// Copy mean auto and cross spectra; each output holds `capacity` doubles.
//
// # Safety
// `c` must be a live handle; each output must point to `capacity` doubles.
enum HetcorrStatus hetcorr_correlator_read(const struct HetcorrCorrelator *c,
                                           double *auto_a,
                                           double *auto_b,
                                           double *cross_re,
                                           double *cross_im,
                                           size_t capacity);

// # Safety
// `c` must be null or a handle not yet freed.
void hetcorr_correlator_free(struct HetcorrCorrelator *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HETCORR_H */
