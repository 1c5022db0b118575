#ifndef SURFACEGRID_H
#define SURFACEGRID_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgPattern {
  SG_PATTERN_GRID = 0,
  SG_PATTERN_LINES_U = 1,
  SG_PATTERN_LINES_V = 2,
} SgPattern;

// Result code of every fallible call.
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_OUT_OF_RANGE = 3,
  SG_STATUS_IO = 4,
  SG_STATUS_IMAGE = 5,
  SG_STATUS_PARSE = 6,
  SG_STATUS_DIMENSION_MISMATCH = 7,
  SG_STATUS_UNDEFINED_METRIC = 8,
  SG_STATUS_NO_STRUCTURE = 9,
  SG_STATUS_BUFFER_TOO_SMALL = 10,
  SG_STATUS_INTERNAL = 99,
} SgStatus;

typedef struct SgDepthMap SgDepthMap;

typedef struct SgField SgField;

typedef struct SgFunction SgFunction;

typedef struct SgSurfaceImage SgSurfaceImage;

// Marking parameters; see [`sg_grid_spec_default`].
typedef struct SgGridSpec {
  enum SgPattern pattern;
  double spacing_u;
  double spacing_v;
  double line_width;
  double grid_angle_deg;
  bool draw_boundary;
} SgGridSpec;

// Early-stop verdict.
typedef struct SgStopDecision {
  bool stop;
  size_t rollback_epoch;
} SgStopDecision;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *sg_last_error(void);

// Library version as a static NUL-terminated string.
const char *sg_version(void);

// Square grid with period `spacing`, 3 px lines, no rotation, boundary band on.
struct SgGridSpec sg_grid_spec_default(double spacing);

// Random surface function `id` of the stream seeded by `master_seed`.
enum SgStatus sg_function_synth(uint64_t master_seed, uint64_t id, struct SgFunction **out);

enum SgStatus sg_function_load(const char *path, struct SgFunction **out);

enum SgStatus sg_function_save(const struct SgFunction *f, const char *path);

// Number of Gaussian components, 0 for a null handle.
size_t sg_function_component_count(const struct SgFunction *f);

// Height at world `(x, y)`; NaN for a null handle.
double sg_function_value_at(const struct SgFunction *f, double x, double y);

void sg_function_free(struct SgFunction *f);

// Samples `f` on a `width`×`height` grid over the 512×512 domain.
enum SgStatus sg_field_eval(const struct SgFunction *f,
                            size_t width,
                            size_t height,
                            struct SgField **out);

// Field from `width·height` row-major heights.
enum SgStatus sg_field_from_values(const double *values,
                                   size_t width,
                                   size_t height,
                                   struct SgField **out);

void sg_field_free(struct SgField *f);

enum SgStatus sg_render_depth(const struct SgField *field,
                              double azimuth_deg,
                              double elevation_deg,
                              struct SgDepthMap **out);

enum SgStatus sg_render_surface(const struct SgField *field,
                                double azimuth_deg,
                                double elevation_deg,
                                const struct SgGridSpec *spec,
                                struct SgSurfaceImage **out);

uint32_t sg_depth_width(const struct SgDepthMap *d);

uint32_t sg_depth_height(const struct SgDepthMap *d);

// Copies the row-major values (0 = background) into `out[0..len]`.
enum SgStatus sg_depth_copy(const struct SgDepthMap *d, double *out, size_t len);

// Writes a 16-bit grayscale PNG.
enum SgStatus sg_depth_save(const struct SgDepthMap *d, const char *path);

enum SgStatus sg_depth_load(const char *path, struct SgDepthMap **out);

void sg_depth_free(struct SgDepthMap *d);

uint32_t sg_surface_width(const struct SgSurfaceImage *s);

uint32_t sg_surface_height(const struct SgSurfaceImage *s);

// Copies the row-major pixels as 0/1 bytes into `out[0..len]`.
enum SgStatus sg_surface_copy(const struct SgSurfaceImage *s, uint8_t *out, size_t len);

// Writes an 8-bit PNG with values {0, 255}.
enum SgStatus sg_surface_save(const struct SgSurfaceImage *s, const char *path);

enum SgStatus sg_surface_load(const char *path, struct SgSurfaceImage **out);

void sg_surface_free(struct SgSurfaceImage *s);

// Binarizes an 8-bit grayscale scan to a 512×512 white-on-black image.
// `threshold` < 0 selects the level automatically; 0..=255 fixes it.
enum SgStatus sg_binarize(const uint8_t *gray,
                          uint32_t width,
                          uint32_t height,
                          int32_t threshold,
                          struct SgSurfaceImage **out);

enum SgStatus sg_msre(const struct SgDepthMap *pred, const struct SgDepthMap *truth, double *out);

enum SgStatus sg_mae(const struct SgDepthMap *pred, const struct SgDepthMap *truth, double *out);

// Early-stop rule over `len` per-epoch validation errors.
enum SgStatus sg_early_stop(const double *history,
                            size_t len,
                            size_t patience,
                            struct SgStopDecision *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFACEGRID_H */
