#ifndef HEPP_HEPP_H
#define HEPP_HEPP_H

#include <stddef.h>
#include <stdint.h>

#if defined(HEPP_BUILDING_LIBRARY)
#define HEPP_API __attribute__((visibility("default")))
#else
#define HEPP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hepp_status {
  HEPP_OK = 0,
  HEPP_ERR_INVALID_ARGUMENT = 1,
  HEPP_ERR_PARSE = 2,
  HEPP_ERR_CONFIG = 3,
  HEPP_ERR_NOT_SYMMETRIC = 4,
  HEPP_ERR_INFEASIBLE = 5,
  HEPP_ERR_NUMERICAL = 6,
  HEPP_ERR_ASSUMPTION = 7,
  HEPP_ERR_IO = 8,
  HEPP_ERR_INTERNAL = 9
} hepp_status;

typedef struct hepp_poly hepp_poly;
typedef struct hepp_config hepp_config;
typedef struct hepp_report hepp_report;

/* Message for the most recent failing call on this thread; "" if none. */
HEPP_API const char* hepp_last_error(void);
HEPP_API const char* hepp_status_name(hepp_status s);

HEPP_API hepp_status hepp_poly_parse(const char* text, hepp_poly** out);
HEPP_API void hepp_poly_free(hepp_poly* p);
/* Canonical form. Writes at most cap bytes including the terminator; *needed gets the full size. */
HEPP_API hepp_status hepp_poly_to_string(const hepp_poly* p, char* buf, size_t cap, size_t* needed);
HEPP_API hepp_status hepp_poly_degree(const hepp_poly* p, int* out);
HEPP_API hepp_status hepp_poly_is_symmetric(const hepp_poly* p, double tol, int* out);
HEPP_API hepp_status hepp_poly_normal_order(const hepp_poly* p, double hbar, hepp_poly** out);

HEPP_API hepp_status hepp_config_load(const char* path, hepp_config** out);
HEPP_API hepp_status hepp_config_parse(const char* text, hepp_config** out);
HEPP_API void hepp_config_free(hepp_config* c);

/* Classical trajectory sampled at 0 and the configured times. */
HEPP_API hepp_status hepp_simulate(const hepp_config* c, hepp_report** out);
/* study: "w_distance", "correlator" or "static". */
HEPP_API hepp_status hepp_converge(const hepp_config* c, const char* study, hepp_report** out);
HEPP_API hepp_status hepp_assumptions(const hepp_config* c, hepp_report** out);
HEPP_API hepp_status hepp_check_invariants(uint64_t seed, const int* sizes, size_t n_sizes, int fault_injection,
                                           hepp_report** out);

/* 1 when the report carries no failure verdict. */
HEPP_API int hepp_report_passed(const hepp_report* r);
/* Human-readable summary; valid until hepp_report_free. */
HEPP_API const char* hepp_report_summary(const hepp_report* r);
HEPP_API hepp_status hepp_report_csv(const hepp_report* r, char* buf, size_t cap, size_t* needed);
HEPP_API hepp_status hepp_report_write(const hepp_report* r, const char* path);
HEPP_API void hepp_report_free(hepp_report* r);

#ifdef __cplusplus
}
#endif

#endif
