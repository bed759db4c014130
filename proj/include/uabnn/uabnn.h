/* Copyright 2026 The uabnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to libuabnn.
 *
 * Conventions:
 *  - Every function returns a uabnn_status. On failure the message is
 *    available from uabnn_last_error() until the next call on the same thread.
 *  - Objects are opaque handles released with the matching *_free function.
 *  - Strings returned through char** are heap allocated and must be released
 *    with uabnn_string_free.
 *  - "plan_json" arguments are JSON objects using the experiment plan schema
 *    (see README); missing keys take their defaults, unknown keys are errors.
 *    NULL or "" means all defaults.
 */

#ifndef UABNN_UABNN_H_
#define UABNN_UABNN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UABNN_API __declspec(dllexport)
#else
#define UABNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uabnn_status {
  UABNN_OK = 0,
  UABNN_ERR_CONFIG = 1,     /* invalid configuration or argument value */
  UABNN_ERR_IO = 2,         /* file missing, unreadable or unwritable */
  UABNN_ERR_PARSE = 3,      /* malformed dataset or checkpoint */
  UABNN_ERR_DEGENERATE = 4, /* input too short, zero power, ... */
  UABNN_ERR_CONTRACT = 5,   /* API misuse: null handle, shape mismatch */
  UABNN_ERR_NUMERIC = 6,    /* non-finite loss or values */
  UABNN_ERR_INTERNAL = 7
} uabnn_status;

typedef struct uabnn_dataset uabnn_dataset;
typedef struct uabnn_model uabnn_model;

UABNN_API const char* uabnn_version(void);
UABNN_API const char* uabnn_last_error(void);
UABNN_API const char* uabnn_status_name(uabnn_status status);
UABNN_API void uabnn_string_free(char* s);

/* 0 quiet, 1 warnings (default), 2 info, 3 debug. Messages go to stderr. */
UABNN_API uabnn_status uabnn_set_log_level(int level);

/* Fills in defaults, validates and re-serialises a plan. */
UABNN_API uabnn_status uabnn_plan_normalize(const char* plan_json, char** out_json);

/* Feature windows for each named fault (key such as "MissingTooth" or display
 * name such as "Missing Tooth"), plan.samples_per_class windows per class,
 * seeded by plan.master_seed. snr_db NULL means no added noise. With
 * standardize != 0 a scaler is fitted and applied. */
UABNN_API uabnn_status uabnn_generate_dataset(const char* plan_json, const char* const* faults,
                                              size_t fault_count, const double* snr_db,
                                              int standardize, uabnn_dataset** out);
UABNN_API uabnn_status uabnn_dataset_load(const char* csv_path, uabnn_dataset** out);
/* Writes csv_path and its manifest (foo.csv -> foo.manifest.json). */
UABNN_API uabnn_status uabnn_dataset_save(const uabnn_dataset* ds, const char* csv_path);
UABNN_API uabnn_status uabnn_dataset_shape(const uabnn_dataset* ds, size_t* rows, size_t* cols,
                                           size_t* classes);
UABNN_API void uabnn_dataset_free(uabnn_dataset* ds);

/* Trains on ds with plan.train and plan.architecture. A dataset without a
 * scaler is standardised first. trace_csv may be NULL. */
UABNN_API uabnn_status uabnn_train(const uabnn_dataset* ds, const char* plan_json, int deterministic,
                                   uabnn_model** out, char** trace_csv);
UABNN_API uabnn_status uabnn_model_load(const char* path, uabnn_model** out);
UABNN_API uabnn_status uabnn_model_save(const uabnn_model* m, const char* path);
UABNN_API uabnn_status uabnn_model_is_bayesian(const uabnn_model* m, int* out);
UABNN_API void uabnn_model_free(uabnn_model* m);

/* One JSON object per dataset row, newline separated, with keys
 * row, label, pu, au, eu, mean_probs, predicted_class, confidence,
 * eu_clamped. Raw (unstandardised) datasets are scaled with the model's
 * scaler. */
UABNN_API uabnn_status uabnn_predict(const uabnn_model* m, const uabnn_dataset* ds, int samples,
                                     uint64_t seed, char** jsonl);
/* Single raw feature vector; same report as one line of uabnn_predict. */
UABNN_API uabnn_status uabnn_predict_row(const uabnn_model* m, const double* x, size_t n, int samples,
                                         uint64_t seed, char** json);

/* which: "ood", "noise", "incremental" or "all". */
UABNN_API uabnn_status uabnn_run_experiment(const char* plan_json, const char* which,
                                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* UABNN_UABNN_H_ */
