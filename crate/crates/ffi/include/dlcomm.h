#ifndef DLCOMM_H
#define DLCOMM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every `dlc_*` call.
typedef enum DlcStatus {
  DLC_STATUS_OK = 0,
  DLC_STATUS_NULL_POINTER = 1,
  DLC_STATUS_SHAPE = 2,
  DLC_STATUS_DOMAIN = 3,
  DLC_STATUS_DEGENERATE = 4,
  DLC_STATUS_SINGULAR = 5,
  DLC_STATUS_DIVERGED = 6,
  DLC_STATUS_CHECKPOINT = 7,
  DLC_STATUS_CONFIG = 8,
  DLC_STATUS_UNKNOWN_RECIPE = 9,
  DLC_STATUS_IO = 10,
  DLC_STATUS_INVALID_STRING = 11,
  DLC_STATUS_PANIC = 12,
} DlcStatus;

// Noise axis for evaluation calls.
typedef enum DlcAxis {
  DLC_AXIS_EB_N0_DB = 0,
  DLC_AXIS_SNR_DB = 1,
} DlcAxis;

// Conventional schemes for [`dlc_baseline_estimate`].
typedef enum DlcBaseline {
  DLC_BASELINE_HAMMING_HD = 0,
  DLC_BASELINE_HAMMING_ML = 1,
  DLC_BASELINE_UNCODED_BPSK = 2,
} DlcBaseline;

// Opaque codebook handle.
typedef struct DlcCodebook DlcCodebook;

// Opaque autoencoder handle.
typedef struct DlcModel DlcModel;

typedef struct DlcParamCounts {
  size_t dense;
  size_t normalization;
  size_t relu;
  size_t softmax;
  size_t total;
} DlcParamCounts;

// Training options. `snr_set` may be null, in which case `snr_db` is used
// for every sample.
typedef struct DlcTrainOptions {
  size_t epochs;
  size_t batch_size;
  size_t train_samples;
  double learning_rate;
  double snr_db;
  const double *snr_set;
  size_t snr_set_len;
  uint64_t seed;
} DlcTrainOptions;

// Error-rate estimate with 95% half-widths.
typedef struct DlcMetrics {
  double sigma2;
  double rate;
  uint64_t blocks;
  uint64_t block_errors;
  uint64_t bit_errors;
  double bler;
  double bler_ci95;
  double ber;
  double ber_ci95;
  // Nonzero when fewer than 100 block errors were observed.
  int32_t low_confidence;
} DlcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failing call on this thread, or an empty
// string. Valid until the next `dlc_*` call on the same thread.
const char *dlc_last_error(void);

// Library version as a static NUL-terminated string.
const char *dlc_version(void);

// Codebook of vector size `size`; `order == 1` gives one-hot, larger
// orders give a GDR codebook.
//
// # Safety
// `out` must be a valid pointer.
enum DlcStatus dlc_codebook_new(size_t size, size_t order, struct DlcCodebook **out);

// # Safety
// `codebook` must come from [`dlc_codebook_new`] or be null.
void dlc_codebook_free(struct DlcCodebook *codebook);

// # Safety
// Pointers must be valid.
enum DlcStatus dlc_codebook_len(const struct DlcCodebook *codebook, size_t *out);

// # Safety
// Pointers must be valid.
enum DlcStatus dlc_codebook_bits(const struct DlcCodebook *codebook, uint32_t *out);

// Copies entry `index` into `out`, which must hold `size` values.
//
// # Safety
// `out` must point to `len` writable doubles.
enum DlcStatus dlc_codebook_entry(const struct DlcCodebook *codebook,
                                  size_t index,
                                  double *out,
                                  size_t len);

// Top-m decision on a probability vector of length `size`.
//
// # Safety
// `p` must point to `len` readable doubles.
enum DlcStatus dlc_codebook_decode(const struct DlcCodebook *codebook,
                                   const double *p,
                                   size_t len,
                                   size_t *out_index);

// Bits per channel use of a codebook over `channel_uses` uses.
//
// # Safety
// Pointers must be valid.
enum DlcStatus dlc_data_rate(const struct DlcCodebook *codebook, size_t channel_uses, double *out);

// # Safety
// `out` must be valid.
enum DlcStatus dlc_sigma2_from_ebn0(double rate, double ebn0_db, double *out);

double dlc_sigma2_from_snr_db(double snr_db);

struct DlcParamCounts dlc_param_counts(size_t size, size_t channel_uses);

// # Safety
// `out` must be valid.
enum DlcStatus dlc_achievable_rate(size_t size,
                                   size_t order,
                                   size_t channel_uses,
                                   double ebn0_db,
                                   double *out);

// Untrained model with Glorot-initialized weights.
//
// # Safety
// `out` must be valid.
enum DlcStatus dlc_model_new(size_t size,
                             size_t order,
                             size_t channel_uses,
                             uint64_t seed,
                             struct DlcModel **out);

// # Safety
// `model` must come from this library or be null.
void dlc_model_free(struct DlcModel *model);

// Options matching the library defaults, at a fixed 10 dB training SNR.
struct DlcTrainOptions dlc_train_options_default(void);

// Trains in place. `final_loss` receives the last epoch's mean loss and
// may be null.
//
// # Safety
// `model` and `options` must be valid; `options.snr_set` must point to
// `snr_set_len` doubles when non-null.
enum DlcStatus dlc_model_train(struct DlcModel *model,
                               const struct DlcTrainOptions *options,
                               double *final_loss);

// # Safety
// `model` and `path` must be valid; `path` is NUL-terminated UTF-8.
enum DlcStatus dlc_model_save(const struct DlcModel *model, const char *path);

// # Safety
// `path` is NUL-terminated UTF-8; `out` must be valid.
enum DlcStatus dlc_model_load(const char *path, struct DlcModel **out);

// # Safety
// Pointers must be valid.
enum DlcStatus dlc_model_channel_uses(const struct DlcModel *model, size_t *out);

// # Safety
// Pointers must be valid.
enum DlcStatus dlc_model_rate(const struct DlcModel *model, double *out);

// Transmit block for message `index`; `out` holds `channel_uses` values.
//
// # Safety
// `out` must point to `len` writable doubles.
enum DlcStatus dlc_model_transmit(const struct DlcModel *model,
                                  size_t index,
                                  double *out,
                                  size_t len);

// Receiver probabilities for a channel output `y`; `out` holds `size`
// values.
//
// # Safety
// `y` must point to `y_len` doubles and `out` to `out_len` doubles.
enum DlcStatus dlc_model_receive(const struct DlcModel *model,
                                 const double *y,
                                 size_t y_len,
                                 double *out,
                                 size_t out_len);

// Full receive-and-decide for a channel output `y`.
//
// # Safety
// `y` must point to `y_len` doubles.
enum DlcStatus dlc_model_decode(const struct DlcModel *model,
                                const double *y,
                                size_t y_len,
                                size_t *out_index);

// Monte-Carlo block and bit error rates over `blocks` uniform messages.
//
// # Safety
// Pointers must be valid.
enum DlcStatus dlc_model_estimate(const struct DlcModel *model,
                                  enum DlcAxis axis,
                                  double point,
                                  uint64_t blocks,
                                  uint64_t seed,
                                  struct DlcMetrics *out);

// # Safety
// `out` must be valid.
enum DlcStatus dlc_baseline_estimate(enum DlcBaseline scheme,
                                     enum DlcAxis axis,
                                     double point,
                                     uint64_t blocks,
                                     uint64_t seed,
                                     struct DlcMetrics *out);

// Hamming(7,4) encoding of 4 data bits into 7 code bits.
//
// # Safety
// `data` must hold 4 bytes and `code` 7 bytes.
enum DlcStatus dlc_hamming_encode(const uint8_t *data, uint8_t *code);

// Hard-decision syndrome decoding of 7 received bits.
//
// # Safety
// `code` must hold 7 bytes and `data` 4 bytes.
enum DlcStatus dlc_hamming_decode_hd(const uint8_t *code, uint8_t *data);

// Maximum-likelihood decoding of 7 received BPSK samples.
//
// # Safety
// `y` must hold 7 doubles and `data` 4 bytes.
enum DlcStatus dlc_hamming_decode_ml(const double *y, uint8_t *data);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DLCOMM_H */
