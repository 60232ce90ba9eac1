#include "hcc/hcc.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <utility>

#include "hcc/io.hpp"

struct hcc_taxonomy {
  hcc::Taxonomy t;
};

struct hcc_covers {
  hcc::CoverSpace space;
};

struct hcc_dataset {
  hcc::ScoreTable table;
  std::uint64_t fingerprint;
};

struct hcc_model {
  hcc::Model model;
};

namespace {

thread_local std::string g_last_error;

hcc_status to_status(hcc::ErrorCode code) {
  switch (code) {
    case hcc::ErrorCode::kInvalidArgument:
      return HCC_ERR_INVALID_ARGUMENT;
    case hcc::ErrorCode::kParse:
      return HCC_ERR_PARSE;
    case hcc::ErrorCode::kValidation:
      return HCC_ERR_VALIDATION;
    case hcc::ErrorCode::kNotFound:
      return HCC_ERR_NOT_FOUND;
    case hcc::ErrorCode::kHashMismatch:
      return HCC_ERR_HASH_MISMATCH;
    case hcc::ErrorCode::kVersionMismatch:
      return HCC_ERR_VERSION_MISMATCH;
    case hcc::ErrorCode::kCoverExplosion:
      return HCC_ERR_COVER_EXPLOSION;
    case hcc::ErrorCode::kIo:
      return HCC_ERR_IO;
    case hcc::ErrorCode::kInternal:
      return HCC_ERR_INTERNAL;
  }
  return HCC_ERR_INTERNAL;
}

template <class F>
hcc_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return HCC_OK;
  } catch (const hcc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return HCC_ERR_INTERNAL;
}

hcc_status null_pointer(const char* what) {
  g_last_error = std::string("null pointer: ") + what;
  return HCC_ERR_NULL_POINTER;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void check_dataset(const hcc_taxonomy* t, const hcc_dataset* d) {
  if (d->fingerprint != t->t.fingerprint()) {
    hcc::fail(hcc::ErrorCode::kHashMismatch, "dataset was read against a different taxonomy");
  }
}

struct ResolvedOptions {
  hcc::Method method;
  double alpha;
  hcc::CostParams cp;
  hcc::InferenceOptions opts;
  unsigned threads;
};

ResolvedOptions resolve(const hcc_taxonomy* t, const hcc_predict_options* o) {
  hcc_predict_options defaults;
  hcc_predict_options_init(&defaults);
  if (o == nullptr) o = &defaults;
  ResolvedOptions r{};
  r.method = hcc::parse_method(o->method ? o->method : "hcc");
  hcc::check_alpha(o->alpha);
  r.alpha = o->alpha;
  r.cp.beta = o->beta_auto ? hcc::default_beta(t->t) : o->beta;
  hcc::check_cost_params(r.cp);
  r.opts.pad_empty = o->pad_empty != 0;
  r.threads = o->threads == 0 ? 1 : o->threads;
  return r;
}

const hcc::RiskControlFamily* risk_of(const hcc_model* m) {
  return m->model.risk ? &*m->model.risk : nullptr;
}

}  // namespace

extern "C" {

const char* hcc_version(void) { return hcc::kVersion; }

const char* hcc_last_error(void) { return g_last_error.c_str(); }

const char* hcc_status_name(hcc_status status) {
  switch (status) {
    case HCC_OK:
      return "ok";
    case HCC_ERR_INVALID_ARGUMENT:
      return hcc::error_code_name(hcc::ErrorCode::kInvalidArgument);
    case HCC_ERR_PARSE:
      return hcc::error_code_name(hcc::ErrorCode::kParse);
    case HCC_ERR_VALIDATION:
      return hcc::error_code_name(hcc::ErrorCode::kValidation);
    case HCC_ERR_NOT_FOUND:
      return hcc::error_code_name(hcc::ErrorCode::kNotFound);
    case HCC_ERR_HASH_MISMATCH:
      return hcc::error_code_name(hcc::ErrorCode::kHashMismatch);
    case HCC_ERR_VERSION_MISMATCH:
      return hcc::error_code_name(hcc::ErrorCode::kVersionMismatch);
    case HCC_ERR_COVER_EXPLOSION:
      return hcc::error_code_name(hcc::ErrorCode::kCoverExplosion);
    case HCC_ERR_IO:
      return hcc::error_code_name(hcc::ErrorCode::kIo);
    case HCC_ERR_INTERNAL:
      return hcc::error_code_name(hcc::ErrorCode::kInternal);
    case HCC_ERR_NULL_POINTER:
      return "null_pointer";
  }
  return "unknown";
}

int hcc_status_is_validation(hcc_status status) {
  switch (status) {
    case HCC_ERR_INVALID_ARGUMENT:
    case HCC_ERR_PARSE:
    case HCC_ERR_VALIDATION:
    case HCC_ERR_NOT_FOUND:
    case HCC_ERR_HASH_MISMATCH:
    case HCC_ERR_VERSION_MISMATCH:
    case HCC_ERR_NULL_POINTER:
      return 1;
    default:
      return 0;
  }
}

void hcc_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------------------

hcc_status hcc_taxonomy_parse(const char* json, hcc_taxonomy** out) {
  if (json == nullptr || out == nullptr) return null_pointer("taxonomy document");
  *out = nullptr;
  return guarded([&] { *out = new hcc_taxonomy{hcc::Taxonomy::parse(json)}; });
}

hcc_status hcc_taxonomy_load(const char* path, hcc_taxonomy** out) {
  if (path == nullptr || out == nullptr) return null_pointer("taxonomy path");
  *out = nullptr;
  return guarded([&] { *out = new hcc_taxonomy{hcc::Taxonomy::load(path)}; });
}

void hcc_taxonomy_free(hcc_taxonomy* t) { delete t; }

hcc_status hcc_taxonomy_describe(const hcc_taxonomy* t, char** json_out) {
  if (t == nullptr || json_out == nullptr) return null_pointer("taxonomy");
  return guarded([&] { *json_out = dup_string(hcc::describe_taxonomy(t->t)); });
}

hcc_status hcc_taxonomy_default_beta(const hcc_taxonomy* t, double* out) {
  if (t == nullptr || out == nullptr) return null_pointer("taxonomy");
  return guarded([&] { *out = hcc::default_beta(t->t); });
}

// ---------------------------------------------------------------------------

hcc_status hcc_covers_build(const hcc_taxonomy* t, const char* selection, size_t max_covers,
                            hcc_covers** out) {
  if (t == nullptr || out == nullptr) return null_pointer("taxonomy");
  *out = nullptr;
  return guarded([&] {
    const auto sel = hcc::parse_cover_selection(selection ? selection : "auto");
    const std::size_t cap = max_covers == 0 ? hcc::kDefaultMaxCovers : max_covers;
    *out = new hcc_covers{hcc::build_cover_space(t->t, sel, cap)};
  });
}

hcc_status hcc_covers_count(const hcc_covers* c, size_t* out) {
  if (c == nullptr || out == nullptr) return null_pointer("covers");
  *out = c->space.size();
  return HCC_OK;
}

hcc_status hcc_covers_describe(const hcc_taxonomy* t, const hcc_covers* c, int include_list,
                               char** text_out) {
  if (t == nullptr || c == nullptr || text_out == nullptr) return null_pointer("covers");
  return guarded([&] {
    if (c->space.taxonomy_fingerprint() != t->t.fingerprint()) {
      hcc::fail(hcc::ErrorCode::kHashMismatch, "covers belong to a different taxonomy");
    }
    *text_out = dup_string(hcc::describe_covers(t->t, c->space, include_list != 0));
  });
}

void hcc_covers_free(hcc_covers* c) { delete c; }

// ---------------------------------------------------------------------------

hcc_status hcc_dataset_load(const hcc_taxonomy* t, const char* path, int renormalize,
                            hcc_dataset** out) {
  if (t == nullptr || path == nullptr || out == nullptr) return null_pointer("dataset");
  *out = nullptr;
  return guarded([&] {
    auto table = hcc::ingest_scores(std::filesystem::path(path), t->t, renormalize != 0);
    *out = new hcc_dataset{std::move(table), t->t.fingerprint()};
  });
}

hcc_status hcc_dataset_synth(const hcc_taxonomy* t, size_t n, double signal, double noise,
                             uint64_t seed, hcc_dataset** out) {
  if (t == nullptr || out == nullptr) return null_pointer("taxonomy");
  *out = nullptr;
  return guarded([&] {
    const auto data = hcc::synth_generate(t->t, hcc::SynthConfig{n, signal, noise, seed});
    *out = new hcc_dataset{hcc::table_from_synthetic(data), t->t.fingerprint()};
  });
}

hcc_status hcc_dataset_save(const hcc_taxonomy* t, const hcc_dataset* d, const char* path) {
  if (t == nullptr || d == nullptr || path == nullptr) return null_pointer("dataset");
  return guarded([&] {
    check_dataset(t, d);
    std::ostringstream out;
    hcc::write_scores(out, t->t, d->table.rows);
    hcc::write_file_atomic(path, out.str());
  });
}

hcc_status hcc_dataset_to_csv(const hcc_taxonomy* t, const hcc_dataset* d, char** csv_out) {
  if (t == nullptr || d == nullptr || csv_out == nullptr) return null_pointer("dataset");
  return guarded([&] {
    check_dataset(t, d);
    std::ostringstream out;
    hcc::write_scores(out, t->t, d->table.rows);
    *csv_out = dup_string(out.str());
  });
}

hcc_status hcc_dataset_size(const hcc_dataset* d, size_t* out) {
  if (d == nullptr || out == nullptr) return null_pointer("dataset");
  *out = d->table.rows.size();
  return HCC_OK;
}

hcc_status hcc_dataset_split(const hcc_dataset* d, double ratio, uint64_t seed,
                             hcc_dataset** calibration, hcc_dataset** test) {
  if (d == nullptr || calibration == nullptr || test == nullptr) return null_pointer("dataset");
  *calibration = nullptr;
  *test = nullptr;
  return guarded([&] {
    auto [cal, tst] = hcc::split_data(d->table.rows, ratio, seed);
    auto a = std::make_unique<hcc_dataset>(hcc_dataset{hcc::ScoreTable{std::move(cal)}, d->fingerprint});
    *test = new hcc_dataset{hcc::ScoreTable{std::move(tst)}, d->fingerprint};
    *calibration = a.release();
  });
}

void hcc_dataset_free(hcc_dataset* d) { delete d; }

// ---------------------------------------------------------------------------

void hcc_calibrate_options_init(hcc_calibrate_options* o) {
  if (o == nullptr) return;
  o->threads = 1;
  o->with_risk_control = 0;
}

hcc_status hcc_model_calibrate(const hcc_taxonomy* t, const hcc_covers* c,
                               const hcc_dataset* calibration,
                               const hcc_calibrate_options* options, hcc_model** out) {
  if (t == nullptr || c == nullptr || calibration == nullptr || out == nullptr) {
    return null_pointer("calibration input");
  }
  *out = nullptr;
  return guarded([&] {
    check_dataset(t, calibration);
    hcc_calibrate_options o;
    hcc_calibrate_options_init(&o);
    if (options != nullptr) o = *options;
    const auto records = calibration->table.records(t->t);
    auto model = hcc::calibrate_model(t->t, c->space, records, o.with_risk_control != 0,
                                      o.threads == 0 ? 1 : o.threads);
    *out = new hcc_model{std::move(model)};
  });
}

hcc_status hcc_model_save(const hcc_model* m, const hcc_taxonomy* t, const char* path) {
  if (m == nullptr || t == nullptr || path == nullptr) return null_pointer("model");
  return guarded([&] { hcc::save_model(m->model, t->t, path); });
}

hcc_status hcc_model_load(const hcc_taxonomy* t, const char* path, hcc_model** out) {
  if (t == nullptr || path == nullptr || out == nullptr) return null_pointer("model path");
  *out = nullptr;
  return guarded([&] { *out = new hcc_model{hcc::load_model(path, t->t)}; });
}

hcc_status hcc_model_cover_count(const hcc_model* m, size_t* out) {
  if (m == nullptr || out == nullptr) return null_pointer("model");
  *out = m->model.family.size();
  return HCC_OK;
}

hcc_status hcc_model_threshold(const hcc_model* m, size_t cover_id, double alpha, double* out) {
  if (m == nullptr || out == nullptr) return null_pointer("model");
  return guarded([&] {
    if (cover_id >= m->model.family.size()) {
      hcc::fail(hcc::ErrorCode::kInvalidArgument,
                "cover id " + std::to_string(cover_id) + " is out of range");
    }
    *out = m->model.family.predictor(cover_id).threshold_at(alpha);
  });
}

void hcc_model_free(hcc_model* m) { delete m; }

// ---------------------------------------------------------------------------

void hcc_predict_options_init(hcc_predict_options* o) {
  if (o == nullptr) return;
  o->method = "hcc";
  o->alpha = 0.1;
  o->beta = 0.0;
  o->beta_auto = 1;
  o->pad_empty = 0;
  o->threads = 1;
}

hcc_status hcc_predict(const hcc_model* m, const hcc_taxonomy* t, const hcc_dataset* d,
                       const hcc_predict_options* options, char** jsonl_out) {
  if (m == nullptr || t == nullptr || d == nullptr || jsonl_out == nullptr) {
    return null_pointer("prediction input");
  }
  return guarded([&] {
    check_dataset(t, d);
    const auto r = resolve(t, options);
    const auto scores = d->table.propagated(t->t);
    const auto preds = hcc::predict_batch(r.method, m->model.family, risk_of(m), t->t, scores,
                                          r.alpha, r.cp, r.opts, r.threads);
    std::string out;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto& row = d->table.rows[i];
      out += hcc::prediction_json(t->t, preds[i], row.scores.instance_id, r.method,
                                  row.true_leaf)
                 .dump();
      out += '\n';
    }
    *jsonl_out = dup_string(out);
  });
}

hcc_status hcc_evaluate(const hcc_model* m, const hcc_taxonomy* t, const hcc_dataset* d,
                        const hcc_predict_options* options, char** json_out) {
  if (m == nullptr || t == nullptr || d == nullptr || json_out == nullptr) {
    return null_pointer("evaluation input");
  }
  return guarded([&] {
    check_dataset(t, d);
    const auto r = resolve(t, options);
    const auto records = d->table.records(t->t);
    const auto preds = hcc::predict_batch(r.method, m->model.family, risk_of(m), t->t, records,
                                          r.alpha, r.cp, r.opts, r.threads);
    auto doc = hcc::metrics_json(hcc::evaluate_predictions(t->t, preds, records, r.cp.beta));
    doc["method"] = hcc::method_name(r.method);
    doc["alpha"] = r.alpha;
    doc["beta"] = r.cp.beta;
    *json_out = dup_string(doc.dump(2));
  });
}

hcc_status hcc_sweep_beta(const hcc_model* m, const hcc_taxonomy* t, const hcc_dataset* d,
                          const hcc_predict_options* options, const double* betas,
                          size_t n_betas, char** csv_out) {
  if (m == nullptr || t == nullptr || d == nullptr || csv_out == nullptr ||
      (betas == nullptr && n_betas > 0)) {
    return null_pointer("sweep input");
  }
  return guarded([&] {
    check_dataset(t, d);
    const auto r = resolve(t, options);
    const auto records = d->table.records(t->t);
    const auto rows = hcc::sweep_beta(m->model.family, t->t, records, r.alpha,
                                      std::span<const double>(betas, n_betas), r.method,
                                      risk_of(m), r.opts, r.threads);
    *csv_out = dup_string(hcc::sweep_csv(r.method, r.alpha, rows));
  });
}

hcc_status hcc_run_pipeline(const char* config_json, char** summary_json_out) {
  if (config_json == nullptr || summary_json_out == nullptr) return null_pointer("configuration");
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      hcc::fail(hcc::ErrorCode::kParse, std::string("configuration is not valid JSON: ") + e.what());
    }
    const auto cfg = hcc::run_config_from_json(doc);
    const auto art = hcc::run_pipeline(cfg);
    *summary_json_out = dup_string(art.summary.dump(2));
  });
}

}  // extern "C"
