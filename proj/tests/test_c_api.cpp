#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hcc/hcc.h"

namespace {

std::string fixture(const char* name) { return std::string(HCC_FIXTURE_DIR) + "/" + name; }

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  hcc_string_free(s);
  return out;
}

struct Fixture {
  hcc_taxonomy* t = nullptr;
  hcc_covers* c = nullptr;
  hcc_dataset* data = nullptr;
  hcc_dataset* cal = nullptr;
  hcc_dataset* test = nullptr;
  hcc_model* m = nullptr;

  Fixture() {
    REQUIRE(hcc_taxonomy_load(fixture("dish.json").c_str(), &t) == HCC_OK);
    REQUIRE(hcc_covers_build(t, "auto", 0, &c) == HCC_OK);
    REQUIRE(hcc_dataset_synth(t, 500, 2.0, 1.0, 3, &data) == HCC_OK);
    REQUIRE(hcc_dataset_split(data, .8, 1, &cal, &test) == HCC_OK);
    hcc_calibrate_options o;
    hcc_calibrate_options_init(&o);
    o.with_risk_control = 1;
    REQUIRE(hcc_model_calibrate(t, c, cal, &o, &m) == HCC_OK);
  }
  ~Fixture() {
    hcc_model_free(m);
    hcc_dataset_free(test);
    hcc_dataset_free(cal);
    hcc_dataset_free(data);
    hcc_covers_free(c);
    hcc_taxonomy_free(t);
  }
};

}  // namespace

TEST_CASE("status helpers") {
  CHECK(std::string(hcc_version()) == "0.1.0");
  CHECK(std::string(hcc_status_name(HCC_ERR_HASH_MISMATCH)) == "hash_mismatch");
  CHECK(hcc_status_is_validation(HCC_ERR_PARSE) == 1);
  CHECK(hcc_status_is_validation(HCC_ERR_IO) == 0);
  hcc_string_free(nullptr);
  hcc_taxonomy_free(nullptr);
}

TEST_CASE("taxonomy handles") {
  hcc_taxonomy* t = nullptr;
  CHECK(hcc_taxonomy_parse("{\"nodes\": [\"a\", \"a\"], \"edges\": []}", &t) == HCC_ERR_VALIDATION);
  CHECK(t == nullptr);
  CHECK(std::string(hcc_last_error()).find("a") != std::string::npos);
  CHECK(hcc_taxonomy_parse("{oops", &t) == HCC_ERR_PARSE);
  CHECK(hcc_taxonomy_load("/nonexistent.json", &t) == HCC_ERR_NOT_FOUND);
  CHECK(hcc_taxonomy_parse(nullptr, &t) == HCC_ERR_NULL_POINTER);
  CHECK(hcc_taxonomy_parse("{}", nullptr) == HCC_ERR_NULL_POINTER);

  REQUIRE(hcc_taxonomy_load(fixture("dish.json").c_str(), &t) == HCC_OK);
  char* desc = nullptr;
  REQUIRE(hcc_taxonomy_describe(t, &desc) == HCC_OK);
  CHECK(nlohmann::json::parse(take(desc))["leaves"] == 7);
  double beta = 0.0;
  REQUIRE(hcc_taxonomy_default_beta(t, &beta) == HCC_OK);
  CHECK(beta == doctest::Approx(1.0 / 3));

  hcc_covers* c = nullptr;
  REQUIRE(hcc_covers_build(t, "exhaustive", 0, &c) == HCC_OK);
  size_t n = 0;
  REQUIRE(hcc_covers_count(c, &n) == HCC_OK);
  CHECK(n == 11);
  char* text = nullptr;
  REQUIRE(hcc_covers_describe(t, c, 1, &text) == HCC_OK);
  CHECK(take(text).find("0: dish") != std::string::npos);
  hcc_covers_free(c);
  CHECK(hcc_covers_build(t, "sideways", 0, &c) == HCC_ERR_INVALID_ARGUMENT);
  hcc_taxonomy_free(t);
}

TEST_CASE("datasets") {
  hcc_taxonomy* t = nullptr;
  REQUIRE(hcc_taxonomy_load(fixture("dish.json").c_str(), &t) == HCC_OK);
  hcc_dataset* d = nullptr;
  REQUIRE(hcc_dataset_load(t, fixture("dish_scores.csv").c_str(), 0, &d) == HCC_OK);
  size_t n = 0;
  REQUIRE(hcc_dataset_size(d, &n) == HCC_OK);
  CHECK(n == 3);
  char* csv = nullptr;
  REQUIRE(hcc_dataset_to_csv(t, d, &csv) == HCC_OK);
  CHECK(take(csv).find("\"r,3\"") != std::string::npos);

  hcc_taxonomy* other = nullptr;
  REQUIRE(hcc_taxonomy_load(fixture("diamond.json").c_str(), &other) == HCC_OK);
  CHECK(hcc_dataset_to_csv(other, d, &csv) == HCC_ERR_HASH_MISMATCH);
  hcc_dataset* bad = nullptr;
  CHECK(hcc_dataset_load(other, fixture("dish_scores.csv").c_str(), 0, &bad) ==
        HCC_ERR_VALIDATION);
  hcc_dataset* a = nullptr;
  hcc_dataset* b = nullptr;
  CHECK(hcc_dataset_split(d, 1.5, 0, &a, &b) == HCC_ERR_INVALID_ARGUMENT);
  CHECK(a == nullptr);
  hcc_taxonomy_free(other);
  hcc_dataset_free(d);
  hcc_taxonomy_free(t);
}

TEST_CASE("calibrate, persist and predict") {
  Fixture f;
  size_t n = 0;
  REQUIRE(hcc_model_cover_count(f.m, &n) == HCC_OK);
  CHECK(n == 11);

  const auto path = (std::filesystem::temp_directory_path() / "hcc_c_api_model.json").string();
  REQUIRE(hcc_model_save(f.m, f.t, path.c_str()) == HCC_OK);
  hcc_model* back = nullptr;
  REQUIRE(hcc_model_load(f.t, path.c_str(), &back) == HCC_OK);
  for (size_t id = 0; id < n; ++id) {
    double a = 0.0, b = 0.0;
    REQUIRE(hcc_model_threshold(f.m, id, .1, &a) == HCC_OK);
    REQUIRE(hcc_model_threshold(back, id, .1, &b) == HCC_OK);
    CHECK(a == b);
  }
  double tau = 0.0;
  CHECK(hcc_model_threshold(f.m, n, .1, &tau) == HCC_ERR_INVALID_ARGUMENT);

  hcc_predict_options o;
  hcc_predict_options_init(&o);
  char* jsonl = nullptr;
  REQUIRE(hcc_predict(back, f.t, f.test, &o, &jsonl) == HCC_OK);
  const std::string lines = take(jsonl);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 100);

  char* report = nullptr;
  o.method = "hcc-crc";
  REQUIRE(hcc_evaluate(back, f.t, f.test, &o, &report) == HCC_OK);
  const auto j = nlohmann::json::parse(take(report));
  CHECK(j["n_test"] == 100);

  o.method = "wizard";
  CHECK(hcc_evaluate(back, f.t, f.test, &o, &report) == HCC_ERR_INVALID_ARGUMENT);
  o.method = nullptr;
  o.alpha = 1.0;
  CHECK(hcc_predict(back, f.t, f.test, &o, &jsonl) == HCC_ERR_INVALID_ARGUMENT);
  o.alpha = .1;

  const double betas[] = {0.0, .5, 1.0};
  char* csv = nullptr;
  REQUIRE(hcc_sweep_beta(back, f.t, f.test, &o, betas, 3, &csv) == HCC_OK);
  const std::string table = take(csv);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
  hcc_model_free(back);

  hcc_taxonomy* other = nullptr;
  REQUIRE(hcc_taxonomy_load(fixture("diamond.json").c_str(), &other) == HCC_OK);
  CHECK(hcc_model_load(other, path.c_str(), &back) == HCC_ERR_HASH_MISMATCH);
  hcc_taxonomy_free(other);
  std::remove(path.c_str());
}

TEST_CASE("pipeline from a configuration") {
  Fixture f;
  const auto csv = (std::filesystem::temp_directory_path() / "hcc_c_api_scores.csv").string();
  REQUIRE(hcc_dataset_save(f.t, f.data, csv.c_str()) == HCC_OK);
  const nlohmann::json cfg{{"taxonomy", fixture("dish.json")},
                           {"scores", csv},
                           {"methods", "standard,lca,hcc"},
                           {"alpha", .1}};
  char* summary = nullptr;
  REQUIRE(hcc_run_pipeline(cfg.dump().c_str(), &summary) == HCC_OK);
  const auto s = nlohmann::json::parse(take(summary));
  CHECK(s["methods"].size() == 3);
  CHECK(s["n_test"] == 100);
  CHECK(hcc_run_pipeline("{\"alpha\": 2}", &summary) == HCC_ERR_INVALID_ARGUMENT);
  CHECK(hcc_run_pipeline("[", &summary) == HCC_ERR_PARSE);
  std::remove(csv.c_str());
}
