#ifndef LDG_COLLOID_H
#define LDG_COLLOID_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum LdgStatus {
  LDG_STATUS_OK = 0,
  LDG_STATUS_INVALID_INPUT = 1,
  LDG_STATUS_SOLVER_FAILURE = 2,
  LDG_STATUS_NUMERIC_FAILURE = 3,
  LDG_STATUS_FORMAT = 4,
  LDG_STATUS_UNSUPPORTED_VERSION = 5,
  LDG_STATUS_CONFIG = 6,
  LDG_STATUS_IO = 7,
  LDG_STATUS_NOT_APPLICABLE = 8,
  LDG_STATUS_RESOLUTION = 9,
  LDG_STATUS_PROJECTION_UNDEFINED = 10,
  LDG_STATUS_BAD_LOOP = 11,
  LDG_STATUS_NULL_POINTER = 12,
  LDG_STATUS_BUFFER_TOO_SMALL = 13,
  LDG_STATUS_PANIC = 14,
} LdgStatus;

// Initial configuration of a new field.
typedef enum LdgSeed {
  // Uniform far-field alignment.
  LDG_SEED_CONSTANT = 0,
  // Director with a hyperbolic point defect below the particle.
  LDG_SEED_HYPERBOLIC = 1,
  // Explicit comparison configuration for the given ξ.
  LDG_SEED_COMPARISON = 2,
} LdgSeed;

// Opaque field handle.
typedef struct LdgField LdgField;

// Parameters of a new field. With `graded_h_min > 0` the node counts are
// derived from a grading around the particle and `n_rho`, `n_z` are ignored.
typedef struct LdgGridParams {
  double rho_max;
  double z_max;
  uint32_t n_rho;
  uint32_t n_z;
  bool half_plane;
  double graded_h_min;
} LdgGridParams;

typedef struct LdgSolveReport {
  uint64_t steps;
  uint64_t rejected;
  double final_residual;
  bool converged;
} LdgSolveReport;

typedef struct LdgEnergy {
  double e_grad;
  double e_phi;
  double e_pot;
  double total;
  // `total − π ln(1/ξ) − π ln ln(1/ξ)`.
  double remainder;
} LdgEnergy;

// One defect cluster. `orientability` is 1 orientable, 0 nonorientable,
// −1 unknown; `axis_point` is true for a cluster on the symmetry axis.
typedef struct LdgDefect {
  double rho;
  double z;
  double radius;
  double mass;
  int32_t orientability;
  bool axis_point;
} LdgDefect;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t ldg_last_error_message(char *buf, size_t len);

// Builds a grid and seeds a field on it. `seed` takes an `LdgSeed` value;
// `xi` is used by the comparison seed only.
//
// # Safety
// `out_field` must be valid for writes.
enum LdgStatus ldg_field_new(struct LdgGridParams params,
                             uint32_t seed,
                             double xi,
                             struct LdgField **out_field);

// Reads a checkpoint into a new field; its ξ goes to `out_xi` if non-null.
//
// # Safety
// `path` must be a NUL-terminated string and `out_field` valid for writes.
enum LdgStatus ldg_field_read_checkpoint(const char *path,
                                         struct LdgField **out_field,
                                         double *out_xi);

// # Safety
// `field` must be a live handle and `path` a NUL-terminated string.
enum LdgStatus ldg_field_write_checkpoint(const struct LdgField *field,
                                          double xi,
                                          const char *path);

// Releases a handle; null is ignored.
//
// # Safety
// `field` must be null or a handle not yet freed.
void ldg_field_free(struct LdgField *field);

// # Safety
// `field` must be a live handle; outputs must be valid for writes.
enum LdgStatus ldg_field_dims(const struct LdgField *field, uint32_t *n_rho, uint32_t *n_z);

// Copies node coordinates and the five components of every node, z outer and
// ρ inner. `rho_z` receives 2 values per node and `values` 5; either may be
// null. `len` is the node capacity of both buffers.
//
// # Safety
// Non-null buffers must be valid for the stated number of `f64`.
enum LdgStatus ldg_field_copy(const struct LdgField *field,
                              double *rho_z,
                              double *values,
                              size_t len);

// Relaxes the field in place with the implicit scheme. On solver failure the
// field keeps its last accepted state.
//
// # Safety
// `field` must be a live handle; `report` null or valid for writes.
enum LdgStatus ldg_relax(struct LdgField *field,
                         double xi,
                         uint64_t max_steps,
                         double tol_residual,
                         struct LdgSolveReport *report);

// # Safety
// `field` must be a live handle and `energy` valid for writes.
enum LdgStatus ldg_energy(const struct LdgField *field, double xi, struct LdgEnergy *energy);

// Locates defect clusters, most massive first. Writes up to `cap` entries
// and the total count to `count`; a short buffer yields
// `LDG_STATUS_BUFFER_TOO_SMALL` with `count` still set.
//
// # Safety
// `field` must be a live handle, `out_defects` valid for `cap` entries (or
// null with `cap` 0) and `count` valid for writes.
enum LdgStatus ldg_locate_defects(const struct LdgField *field,
                                  double xi,
                                  double eta,
                                  double r0,
                                  struct LdgDefect *out_defects,
                                  size_t cap,
                                  size_t *count);

// Energy of the explicit comparison configuration. Energies and remainder
// refer to the quarter plane ρ > 0, z > 0, whose leading terms are
// `(π/2) ln(1/ξ) + (π/2) ln ln(1/ξ)`.
//
// # Safety
// `energy` must be valid for writes.
enum LdgStatus ldg_comparison_energy(double xi, struct LdgEnergy *energy);

// Minimal phase energies for both ring charges outside a disc of radius
// `delta`, and their difference.
//
// # Safety
// Outputs must be valid for writes.
enum LdgStatus ldg_phase_difference(double delta,
                                    double r_out,
                                    double refine,
                                    double *e_plus,
                                    double *e_minus,
                                    double *diff);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LDG_COLLOID_H */
