/* C interface for the rstreg registration library. */

#ifndef RSTREG_H
#define RSTREG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
enum RstregStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  RSTREG_STATUS_OK = 0,
  // A required pointer was null.
  RSTREG_STATUS_NULL_POINTER = 1,
  // Arguments or configuration were invalid.
  RSTREG_STATUS_INVALID_ARGUMENT = 2,
  // Input bytes were not a decodable PNM image.
  RSTREG_STATUS_CODEC_ERROR = 3,
  // An image had no ink at the configured threshold.
  RSTREG_STATUS_BLANK_IMAGE = 4,
  // Every candidate angle produced the same correlation.
  RSTREG_STATUS_NO_SIGNAL = 5,
  // Transformed content exceeded its canvas.
  RSTREG_STATUS_CONTENT_OVERFLOW = 6,
  // A resize would have produced an empty image.
  RSTREG_STATUS_DEGENERATE_SIZE = 7,
  // An unexpected internal failure (a bug, not bad input).
  RSTREG_STATUS_INTERNAL_ERROR = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum RstregStatus RstregStatus;
#else
typedef int32_t RstregStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Opaque grayscale image handle.
typedef struct RstregImage RstregImage;

// Opaque registration report handle.
typedef struct RstregReport RstregReport;

// Run configuration, plain-old-data so bindings can fill it directly.
typedef struct RstregConfig {
  // Binarization threshold, strictly inside (0, 1).
  double threshold;
  // Lower end of the rotation search range, degrees.
  double range_min_deg;
  // Upper end of the rotation search range, degrees.
  double range_max_deg;
  // Coarse sweep step, degrees.
  double coarse_step_deg;
  // Fine sweep step, degrees.
  double fine_step_deg;
  // Fine window half-width around the coarse peak, degrees.
  double fine_halfwidth_deg;
  // Background luminance for exposed canvas, in [0, 1].
  double fill;
} RstregConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default configuration (threshold 0.5, range -60..60, steps 5/1,
// half-width 3, white fill).
struct RstregConfig rstreg_config_default(void);

// Decodes a PNM (P2/P3/P5/P6) byte buffer into an image handle; color
// input is converted to grayscale.
//
// # Safety
// `data` must point to `len` readable bytes; `out_image` must be a valid
// pointer. The handle must be released with [`rstreg_image_free`].
RstregStatus rstreg_image_load_pnm(const uint8_t *data, size_t len, struct RstregImage **out_image);

// Builds an image handle from `width * height` row-major luminance
// samples in [0, 1].
//
// # Safety
// `pixels` must point to `width * height` readable doubles; `out_image`
// must be valid. The handle must be released with [`rstreg_image_free`].
RstregStatus rstreg_image_from_pixels(size_t width,
                                      size_t height,
                                      const double *pixels,
                                      struct RstregImage **out_image);

// Width in pixels; 0 for a null handle.
//
// # Safety
// `image` must be null or a live handle from this library.
size_t rstreg_image_width(const struct RstregImage *image);

// Height in pixels; 0 for a null handle.
//
// # Safety
// `image` must be null or a live handle from this library.
size_t rstreg_image_height(const struct RstregImage *image);

// Copies the image's row-major luminance samples into `out_pixels`.
//
// # Safety
// `out_pixels` must have room for `rstreg_image_width() *
// rstreg_image_height()` doubles.
RstregStatus rstreg_image_copy_pixels(const struct RstregImage *image,
                                      double *out_pixels,
                                      size_t capacity);

// Encodes the image as binary PGM. The buffer is allocated by the
// library and must be released with [`rstreg_buffer_free`].
//
// # Safety
// `out_data` and `out_len` must be valid pointers.
RstregStatus rstreg_image_save_pgm(const struct RstregImage *image,
                                   uint32_t maxval,
                                   uint8_t **out_data,
                                   size_t *out_len);

// Releases a buffer returned by [`rstreg_image_save_pgm`].
//
// # Safety
// `data`/`len` must come from a single prior save call, unreleased.
void rstreg_buffer_free(uint8_t *data, size_t len);

// Releases an image handle.
//
// # Safety
// `image` must come from this library and not have been freed already.
void rstreg_image_free(struct RstregImage *image);

// Detects the RST parameters of `user` against `reference`. A null
// `config` means defaults.
//
// # Safety
// Handles must be valid; `out_report` must be a valid pointer. The
// report must be released with [`rstreg_report_free`].
RstregStatus rstreg_detect(const struct RstregImage *reference,
                           const struct RstregImage *user,
                           const struct RstregConfig *config,
                           struct RstregReport **out_report);

// Corrects `user` against `reference`, producing the corrected image and
// the report. A null `config` means defaults.
//
// # Safety
// Handles must be valid; `out_image` and `out_report` must be valid
// pointers; release the results with [`rstreg_image_free`] and
// [`rstreg_report_free`].
RstregStatus rstreg_correct(const struct RstregImage *reference,
                            const struct RstregImage *user,
                            const struct RstregConfig *config,
                            struct RstregImage **out_image,
                            struct RstregReport **out_report);

// Detected rotation in degrees; NaN for a null handle.
//
// # Safety
// `report` must be null or a live handle from this library.
double rstreg_report_rotation_deg(const struct RstregReport *report);

// Detected scale ratio (reference size over test size); NaN for a null
// handle.
//
// # Safety
// `report` must be null or a live handle from this library.
double rstreg_report_scale(const struct RstregReport *report);

// Detected translation margins in the bottom-left frame.
//
// # Safety
// `out_dx` and `out_dy` must be valid pointers.
RstregStatus rstreg_report_translation(const struct RstregReport *report,
                                       size_t *out_dx,
                                       size_t *out_dy);

// Full report as a JSON string (traces, crop sizes, timings). Release
// with [`rstreg_string_free`]. Null on a null handle.
//
// # Safety
// `report` must be null or a live handle from this library.
char *rstreg_report_json(const struct RstregReport *report);

// Releases a string returned by [`rstreg_report_json`].
//
// # Safety
// `s` must come from [`rstreg_report_json`] and not have been freed.
void rstreg_string_free(char *s);

// Releases a report handle.
//
// # Safety
// `report` must come from this library and not have been freed already.
void rstreg_report_free(struct RstregReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSTREG_H */
