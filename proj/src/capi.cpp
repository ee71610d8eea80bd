// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/qlsm.h"

#include <string>

#include "qlsm/error.hpp"
#include "qlsm/harness.hpp"

struct qlsm_config {
  qlsm::ExperimentConfig config;
  std::string json;
};

struct qlsm_report {
  qlsm::ExperimentReport report;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

qlsm_status to_status(qlsm::ErrorCode code) {
  using qlsm::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return QLSM_INVALID_ARGUMENT;
    case ErrorCode::kConfig: return QLSM_CONFIG_ERROR;
    case ErrorCode::kCapExceeded: return QLSM_CAP_EXCEEDED;
    case ErrorCode::kSingularGram: return QLSM_SINGULAR_GRAM;
    case ErrorCode::kScheduleViolation: return QLSM_SCHEDULE_VIOLATION;
    case ErrorCode::kOverflow: return QLSM_OVERFLOW;
    case ErrorCode::kVarianceExceeded: return QLSM_VARIANCE_EXCEEDED;
    case ErrorCode::kDirtyAncilla: return QLSM_DIRTY_ANCILLA;
    case ErrorCode::kMissingAnnotation: return QLSM_MISSING_ANNOTATION;
    case ErrorCode::kInconsistent: return QLSM_INCONSISTENT;
    case ErrorCode::kIo: return QLSM_IO_ERROR;
  }
  return QLSM_INTERNAL_ERROR;
}

template <typename F>
qlsm_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return QLSM_OK;
  } catch (const qlsm::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QLSM_INTERNAL_ERROR;
  }
}

qlsm_status null_arg(const char* what) {
  g_last_error = std::string(what) + " is null";
  return QLSM_INVALID_ARGUMENT;
}

using Command = qlsm::ExperimentReport (*)(const qlsm::ExperimentConfig&);

qlsm_status run(Command cmd, const qlsm_config* config, qlsm_report** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto* r = new qlsm_report{cmd(config->config), {}};
    r->json = r->report.json.dump(2);
    *out = r;
  });
}

}  // namespace

extern "C" {

qlsm_status qlsm_config_parse(const char* json_text, qlsm_config** out) {
  if (!json_text) return null_arg("json_text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new qlsm_config{qlsm::parse_config(json_text), {}}; });
}

qlsm_status qlsm_config_load(const char* path, qlsm_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new qlsm_config{qlsm::load_config(path), {}}; });
}

qlsm_status qlsm_config_set_seed(qlsm_config* config, uint64_t seed) {
  if (!config) return null_arg("config");
  config->config.seed = seed;
  return QLSM_OK;
}

qlsm_status qlsm_config_set_trials(qlsm_config* config, int trials) {
  if (!config) return null_arg("config");
  return guarded([&] {
    qlsm::ExperimentConfig c = config->config;
    c.trials = trials;
    qlsm::validate_config(c);
    config->config = c;
  });
}

const char* qlsm_config_json(qlsm_config* config) {
  if (!config) return "";
  config->json = qlsm::config_to_json(config->config).dump(2);
  return config->json.c_str();
}

void qlsm_config_destroy(qlsm_config* config) { delete config; }

qlsm_status qlsm_run_price(const qlsm_config* config, qlsm_report** out) { return run(qlsm::cmd_price, config, out); }
qlsm_status qlsm_run_scaling(const qlsm_config* config, qlsm_report** out) {
  return run(qlsm::cmd_scaling, config, out);
}
qlsm_status qlsm_run_validate_bounds(const qlsm_config* config, qlsm_report** out) {
  return run(qlsm::cmd_validate_bounds, config, out);
}
qlsm_status qlsm_run_dump_oracle(const qlsm_config* config, qlsm_report** out) {
  return run(qlsm::cmd_dump_oracle, config, out);
}

const char* qlsm_report_json(const qlsm_report* report) { return report ? report->json.c_str() : ""; }
const char* qlsm_report_csv(const qlsm_report* report) { return report ? report->report.csv.c_str() : ""; }
int qlsm_report_all_passed(const qlsm_report* report) { return report && report->report.all_passed ? 1 : 0; }

qlsm_status qlsm_report_write(const qlsm_report* report, const char* out_dir) {
  if (!report) return null_arg("report");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] { qlsm::write_report(report->report, out_dir); });
}

void qlsm_report_destroy(qlsm_report* report) { delete report; }

const char* qlsm_last_error(void) { return g_last_error.c_str(); }

const char* qlsm_status_string(qlsm_status status) {
  switch (status) {
    case QLSM_OK: return "ok";
    case QLSM_INVALID_ARGUMENT: return "invalid argument";
    case QLSM_CONFIG_ERROR: return "config error";
    case QLSM_CAP_EXCEEDED: return "enumeration cap exceeded";
    case QLSM_SINGULAR_GRAM: return "singular Gram matrix";
    case QLSM_SCHEDULE_VIOLATION: return "schedule violation";
    case QLSM_OVERFLOW: return "fixed-point overflow";
    case QLSM_VARIANCE_EXCEEDED: return "variance exceeded";
    case QLSM_DIRTY_ANCILLA: return "dirty ancilla";
    case QLSM_MISSING_ANNOTATION: return "missing annotation";
    case QLSM_INCONSISTENT: return "inconsistent parameters";
    case QLSM_IO_ERROR: return "i/o error";
    case QLSM_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

}  // extern "C"
