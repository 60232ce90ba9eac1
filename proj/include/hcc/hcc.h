/* C interface to the hierarchical conformal classification library.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Every function returns an hcc_status; on failure the message is available
 * from hcc_last_error() on the same thread until the next call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with hcc_string_free.
 */
#ifndef HCC_HCC_H
#define HCC_HCC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HCC_API __declspec(dllexport)
#else
#define HCC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hcc_status {
  HCC_OK = 0,
  HCC_ERR_INVALID_ARGUMENT = 1,
  HCC_ERR_PARSE = 2,
  HCC_ERR_VALIDATION = 3,
  HCC_ERR_NOT_FOUND = 4,
  HCC_ERR_HASH_MISMATCH = 5,
  HCC_ERR_VERSION_MISMATCH = 6,
  HCC_ERR_COVER_EXPLOSION = 7,
  HCC_ERR_IO = 8,
  HCC_ERR_INTERNAL = 9,
  HCC_ERR_NULL_POINTER = 10
} hcc_status;

typedef struct hcc_taxonomy hcc_taxonomy;
typedef struct hcc_covers hcc_covers;
typedef struct hcc_dataset hcc_dataset;
typedef struct hcc_model hcc_model;

HCC_API const char* hcc_version(void);
HCC_API const char* hcc_last_error(void);
HCC_API const char* hcc_status_name(hcc_status status);
/* 1 for errors caused by the request itself (bad input), 0 otherwise. */
HCC_API int hcc_status_is_validation(hcc_status status);
HCC_API void hcc_string_free(char* s);

/* Taxonomy documents: {"nodes": [...], "edges": [[parent, child], ...]} */
HCC_API hcc_status hcc_taxonomy_parse(const char* json, hcc_taxonomy** out);
HCC_API hcc_status hcc_taxonomy_load(const char* path, hcc_taxonomy** out);
HCC_API void hcc_taxonomy_free(hcc_taxonomy* t);
HCC_API hcc_status hcc_taxonomy_describe(const hcc_taxonomy* t, char** json_out);
HCC_API hcc_status hcc_taxonomy_default_beta(const hcc_taxonomy* t, double* out);

/* selection: "exhaustive", "depth-limited" or "auto"; max_covers 0 means the
 * library default. */
HCC_API hcc_status hcc_covers_build(const hcc_taxonomy* t, const char* selection,
                                    size_t max_covers, hcc_covers** out);
HCC_API hcc_status hcc_covers_count(const hcc_covers* c, size_t* out);
HCC_API hcc_status hcc_covers_describe(const hcc_taxonomy* t, const hcc_covers* c,
                                       int include_list, char** text_out);
HCC_API void hcc_covers_free(hcc_covers* c);

HCC_API hcc_status hcc_dataset_load(const hcc_taxonomy* t, const char* path, int renormalize,
                                    hcc_dataset** out);
HCC_API hcc_status hcc_dataset_synth(const hcc_taxonomy* t, size_t n, double signal,
                                     double noise, uint64_t seed, hcc_dataset** out);
HCC_API hcc_status hcc_dataset_save(const hcc_taxonomy* t, const hcc_dataset* d,
                                    const char* path);
HCC_API hcc_status hcc_dataset_to_csv(const hcc_taxonomy* t, const hcc_dataset* d,
                                      char** csv_out);
HCC_API hcc_status hcc_dataset_size(const hcc_dataset* d, size_t* out);
HCC_API hcc_status hcc_dataset_split(const hcc_dataset* d, double ratio, uint64_t seed,
                                     hcc_dataset** calibration, hcc_dataset** test);
HCC_API void hcc_dataset_free(hcc_dataset* d);

typedef struct hcc_calibrate_options {
  unsigned threads;
  int with_risk_control;
} hcc_calibrate_options;

HCC_API void hcc_calibrate_options_init(hcc_calibrate_options* o);
HCC_API hcc_status hcc_model_calibrate(const hcc_taxonomy* t, const hcc_covers* c,
                                       const hcc_dataset* calibration,
                                       const hcc_calibrate_options* options, hcc_model** out);
HCC_API hcc_status hcc_model_save(const hcc_model* m, const hcc_taxonomy* t, const char* path);
HCC_API hcc_status hcc_model_load(const hcc_taxonomy* t, const char* path, hcc_model** out);
HCC_API hcc_status hcc_model_cover_count(const hcc_model* m, size_t* out);
/* Inclusion threshold of one cover's predictor at level alpha. */
HCC_API hcc_status hcc_model_threshold(const hcc_model* m, size_t cover_id, double alpha,
                                       double* out);
HCC_API void hcc_model_free(hcc_model* m);

typedef struct hcc_predict_options {
  const char* method; /* NULL means "hcc" */
  double alpha;
  double beta;
  int beta_auto; /* nonzero: use the taxonomy default instead of beta */
  int pad_empty;
  unsigned threads;
} hcc_predict_options;

HCC_API void hcc_predict_options_init(hcc_predict_options* o);
/* One JSON object per line and instance. */
HCC_API hcc_status hcc_predict(const hcc_model* m, const hcc_taxonomy* t, const hcc_dataset* d,
                               const hcc_predict_options* options, char** jsonl_out);
/* Requires a fully labeled dataset. */
HCC_API hcc_status hcc_evaluate(const hcc_model* m, const hcc_taxonomy* t, const hcc_dataset* d,
                                const hcc_predict_options* options, char** json_out);
HCC_API hcc_status hcc_sweep_beta(const hcc_model* m, const hcc_taxonomy* t,
                                  const hcc_dataset* d, const hcc_predict_options* options,
                                  const double* betas, size_t n_betas, char** csv_out);

/* Runs the whole pipeline from a JSON configuration object and returns the
 * summary document. */
HCC_API hcc_status hcc_run_pipeline(const char* config_json, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* HCC_HCC_H */
