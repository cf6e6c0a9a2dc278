/* C ABI of the stormgrid typhoon-resilience toolkit. */

#ifndef STORMGRID_H
#define STORMGRID_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible functions.
 */
enum SgStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  SG_STATUS_OK = 0,
  /**
   * A pointer argument was NULL or an index was out of range.
   */
  SG_STATUS_INVALID_ARGUMENT = -1,
  /**
   * Configuration or input files failed to load or validate.
   */
  SG_STATUS_VALIDATION = -2,
  /**
   * The numeric pipeline failed (reported with its stage).
   */
  SG_STATUS_NUMERIC = -3,
  /**
   * A string was not valid UTF-8.
   */
  SG_STATUS_UTF8 = -4,
  /**
   * An internal panic was caught at the boundary.
   */
  SG_STATUS_PANIC = -5,
};
#ifndef __cplusplus
typedef int32_t SgStatus;
#endif // __cplusplus

/**
 * Completed resilience assessment. Opaque; query through the accessors.
 */
typedef struct SgAssessment SgAssessment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Toolkit version as a static NUL-terminated string; do not free.
 */
const char *sg_version(void);

/**
 * Last error message of the calling thread as a heap string, or NULL when
 * no error was recorded. Free with [`sg_string_free`].
 */
char *sg_last_error(void);

/**
 * Free a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a function of this library and not freed
 * before.
 */
void sg_string_free(char *s);

/**
 * Run the full resilience assessment described by a run-configuration
 * file. Blocking; returns NULL on failure (see [`sg_last_error`]). The
 * result must be freed with [`sg_assessment_free`].
 *
 * # Safety
 * `config_path` must be a NUL-terminated string valid for the call.
 */
struct SgAssessment *sg_assess_run(const char *config_path);

/**
 * Free an assessment handle. NULL is ignored.
 *
 * # Safety
 * `assessment` must come from [`sg_assess_run`] and not be freed twice.
 */
void sg_assessment_free(struct SgAssessment *assessment);

/**
 * System resilience index in MW, or NaN for a NULL handle.
 *
 * # Safety
 * `assessment` must be a live handle from [`sg_assess_run`] or NULL.
 */
double sg_assessment_r_sys_mw(const struct SgAssessment *assessment);

/**
 * 1 when the index meets the configured target, 0 when it does not, -1
 * for a NULL handle.
 *
 * # Safety
 * `assessment` must be a live handle from [`sg_assess_run`] or NULL.
 */
int32_t sg_assessment_meets_target(const struct SgAssessment *assessment);

/**
 * Number of scenarios the assessment aggregated; 0 for NULL.
 *
 * # Safety
 * `assessment` must be a live handle from [`sg_assess_run`] or NULL.
 */
uintptr_t sg_assessment_scenario_count(const struct SgAssessment *assessment);

/**
 * Enumeration order the assessment used; 0 for NULL.
 *
 * # Safety
 * `assessment` must be a live handle from [`sg_assess_run`] or NULL.
 */
uintptr_t sg_assessment_j_max(const struct SgAssessment *assessment);

/**
 * Number of corridor index entries; 0 for NULL.
 *
 * # Safety
 * `assessment` must be a live handle from [`sg_assess_run`] or NULL.
 */
uintptr_t sg_assessment_corridor_count(const struct SgAssessment *assessment);

/**
 * Corridor index entry `index` (sorted by descending R_m): writes the
 * corridor id and its index in MW through the out pointers.
 *
 * # Safety
 * `assessment` must be a live handle; `id_out` and `r_m_out` must be valid
 * for writes or NULL (in which case that field is skipped).
 */
SgStatus sg_assessment_corridor(const struct SgAssessment *assessment,
                                uintptr_t index,
                                uint32_t *id_out,
                                double *r_m_out);

/**
 * Stateless wind-field sample: evolve a storm from the given parameters to
 * `t_hours` and write wind speed (m/s) and flow bearing (degrees from
 * north) at the query point.
 *
 * # Safety
 * `speed_out` and `direction_out` must be valid for writes or NULL.
 */
SgStatus sg_wind_at(double delta_p0_hpa,
                    double heading_deg,
                    double vt_kmh,
                    double landfall_lat,
                    double landfall_lon,
                    double k_coeff,
                    double t_hours,
                    double lat,
                    double lon,
                    double *speed_out,
                    double *direction_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* STORMGRID_H */
