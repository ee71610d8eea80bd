/* Copyright 2026 The qlsm Authors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef QLSM_QLSM_H_
#define QLSM_QLSM_H_

#include <stdint.h>

#if defined(QLSM_BUILDING_LIBRARY)
#define QLSM_API __attribute__((visibility("default")))
#else
#define QLSM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qlsm_status {
  QLSM_OK = 0,
  QLSM_INVALID_ARGUMENT = 1,
  QLSM_CONFIG_ERROR = 2,
  QLSM_CAP_EXCEEDED = 3,
  QLSM_SINGULAR_GRAM = 4,
  QLSM_SCHEDULE_VIOLATION = 5,
  QLSM_OVERFLOW = 6,
  QLSM_VARIANCE_EXCEEDED = 7,
  QLSM_DIRTY_ANCILLA = 8,
  QLSM_MISSING_ANNOTATION = 9,
  QLSM_INCONSISTENT = 10,
  QLSM_IO_ERROR = 11,
  QLSM_INTERNAL_ERROR = 99
} qlsm_status;

typedef struct qlsm_config qlsm_config;
typedef struct qlsm_report qlsm_report;

/* Configs. Parsing validates every field. */
QLSM_API qlsm_status qlsm_config_parse(const char* json_text, qlsm_config** out);
QLSM_API qlsm_status qlsm_config_load(const char* path, qlsm_config** out);
QLSM_API qlsm_status qlsm_config_set_seed(qlsm_config* config, uint64_t seed);
QLSM_API qlsm_status qlsm_config_set_trials(qlsm_config* config, int trials);
/* Canonical JSON; the string is owned by the config until the next call. */
QLSM_API const char* qlsm_config_json(qlsm_config* config);
QLSM_API void qlsm_config_destroy(qlsm_config* config);

/* Commands. */
QLSM_API qlsm_status qlsm_run_price(const qlsm_config* config, qlsm_report** out);
QLSM_API qlsm_status qlsm_run_scaling(const qlsm_config* config, qlsm_report** out);
QLSM_API qlsm_status qlsm_run_validate_bounds(const qlsm_config* config, qlsm_report** out);
QLSM_API qlsm_status qlsm_run_dump_oracle(const qlsm_config* config, qlsm_report** out);

/* Reports. Strings are owned by the report. */
QLSM_API const char* qlsm_report_json(const qlsm_report* report);
QLSM_API const char* qlsm_report_csv(const qlsm_report* report);
QLSM_API int qlsm_report_all_passed(const qlsm_report* report);
QLSM_API qlsm_status qlsm_report_write(const qlsm_report* report, const char* out_dir);
QLSM_API void qlsm_report_destroy(qlsm_report* report);

/* Message of the last failed call on this thread, or "". */
QLSM_API const char* qlsm_last_error(void);
QLSM_API const char* qlsm_status_string(qlsm_status status);

#ifdef __cplusplus
}
#endif

#endif /* QLSM_QLSM_H_ */
