// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <string>

#include "qlsm/qlsm.h"

namespace {

const char* kConfig = R"({"T": 2, "grid": {"size": 3, "radius": 2.0}, "algorithm": "oracle", "seed": 1})";

TEST(CApi, ParseRunAndDestroy) {
  qlsm_config* cfg = nullptr;
  ASSERT_EQ(qlsm_config_parse(kConfig, &cfg), QLSM_OK);
  ASSERT_NE(cfg, nullptr);
  EXPECT_EQ(qlsm_config_set_seed(cfg, 9), QLSM_OK);
  const std::string json = qlsm_config_json(cfg);
  EXPECT_NE(json.find("\"seed\""), std::string::npos);
  EXPECT_NE(json.find('9', json.find("\"seed\"")), std::string::npos);
  qlsm_report* rep = nullptr;
  ASSERT_EQ(qlsm_run_dump_oracle(cfg, &rep), QLSM_OK);
  EXPECT_NE(std::string(qlsm_report_json(rep)).find("u0"), std::string::npos);
  EXPECT_EQ(qlsm_report_all_passed(rep), 1);
  qlsm_report_destroy(rep);
  qlsm_config_destroy(cfg);
}

TEST(CApi, ErrorsAreReported) {
  qlsm_config* cfg = nullptr;
  EXPECT_EQ(qlsm_config_parse("{\"bogus\": 1}", &cfg), QLSM_CONFIG_ERROR);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(qlsm_last_error()).find("bogus"), std::string::npos);
  EXPECT_EQ(qlsm_config_parse(nullptr, &cfg), QLSM_INVALID_ARGUMENT);
  EXPECT_EQ(qlsm_config_load("/nonexistent/qlsm.json", &cfg), QLSM_IO_ERROR);
  EXPECT_STREQ(qlsm_status_string(QLSM_OK), "ok");
  qlsm_config_destroy(nullptr);
  qlsm_report_destroy(nullptr);
}

TEST(CApi, CapExceededMapsToStatus) {
  qlsm_config* cfg = nullptr;
  ASSERT_EQ(qlsm_config_parse(R"({"T": 12, "grid": {"size": 8, "radius": 2.0}, "algorithm": "oracle"})", &cfg), QLSM_OK);
  qlsm_report* rep = nullptr;
  EXPECT_EQ(qlsm_run_dump_oracle(cfg, &rep), QLSM_CAP_EXCEEDED);
  EXPECT_EQ(rep, nullptr);
  qlsm_config_destroy(cfg);
}

}  // namespace
