/* Copyright 2026 The DocRefine Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libdocrefine.
 *
 * Every fallible call returns a dr_status. On failure the message is
 * available from dr_last_error() on the calling thread until the next call.
 * Strings returned through char** out-parameters are owned by the caller
 * and released with dr_string_free(). Handles are released with their
 * destroy function; passing NULL to a destroy function is a no-op.
 */

#ifndef DOCREFINE_DOCREFINE_H_
#define DOCREFINE_DOCREFINE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DR_API __declspec(dllexport)
#else
#define DR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dr_status {
  DR_OK = 0,
  DR_ERR_INVALID_ARGUMENT = 1,
  DR_ERR_IO = 2,
  DR_ERR_PARSE = 3,
  DR_ERR_VALIDATION = 4,
  DR_ERR_INGEST = 5,
  DR_ERR_TRANSPORT = 6,
  DR_ERR_SCHEMA = 7,
  DR_ERR_MOCK_MISS = 8,
  DR_ERR_UNRESOLVABLE_TARGET = 9,
  DR_ERR_EMPTY_GENERATION = 10,
  DR_ERR_DIMENSION_MISMATCH = 11,
  DR_ERR_ZERO_VECTOR = 12,
  DR_ERR_INTERNAL = 13,
  DR_ERR_NO_CASES = 14
} dr_status;

/* A model backend together with the run settings of its config file. */
typedef struct dr_backend dr_backend;

/* A document in the intermediate representation. */
typedef struct dr_ir dr_ir;

DR_API const char* dr_version(void);
DR_API const char* dr_status_name(dr_status status);
DR_API const char* dr_last_error(void);
DR_API void dr_string_free(char* s);

/* Backends. */

/* Reads a key-value config file (see the README). */
DR_API dr_status dr_backend_create(const char* config_path, dr_backend** out);
/* Mock backend replaying `script_path` with default run settings. */
DR_API dr_status dr_backend_create_mock(const char* script_path, dr_backend** out);
DR_API void dr_backend_destroy(dr_backend* backend);

/* Unit-norm embedding of `text`. Writes at most `capacity` values and the
 * full dimension to `dim`. */
DR_API dr_status dr_embed(dr_backend* backend, const char* text, double* out, size_t capacity,
                          size_t* dim);

/* IR documents. */

DR_API dr_status dr_ir_load(const char* path, dr_ir** out);
DR_API dr_status dr_ir_parse(const char* json, dr_ir** out);
/* Canonical JSON bytes. */
DR_API dr_status dr_ir_serialize(const dr_ir* ir, char** out_json);
DR_API dr_status dr_ir_save(const dr_ir* ir, const char* path);
DR_API size_t dr_ir_element_count(const dr_ir* ir);
DR_API dr_status dr_ir_element_text(const dr_ir* ir, const char* element_id, char** out_text);
DR_API void dr_ir_destroy(dr_ir* ir);

/* Pipeline. */

/* Structural analysis of a PDF or layout JSON file. `backend` may be NULL
 * unless the vision pass is enabled. Warnings are returned one per line
 * through `out_warnings` when it is not NULL. */
DR_API dr_status dr_analyze(dr_backend* backend, const char* input_path, dr_ir** out,
                            char** out_warnings);

/* Full closed-loop run. Writes the output files into `out_dir` and returns
 * the final report as JSON through `out_report` when it is not NULL.
 * `max_length` <= 0 and a NULL `style` leave those constraints unset. */
DR_API dr_status dr_refine(dr_backend* backend, const char* input_path, const char* instruction,
                           int max_length, const char* style, const char* out_dir,
                           char** out_report);

/* Standalone verification of `modified_path` against `original_path` for
 * the ops in `ops_path`. summaries.json and out.sem.json beside the
 * modified IR are used when present. */
DR_API dr_status dr_verify(dr_backend* backend, const char* original_path,
                           const char* modified_path, const char* instruction,
                           const char* ops_path, char** out_report);

/* Runs every case under `dataset_dir` and returns the CSV report. The
 * number of failed cases is stored in `failed_cases` when not NULL.
 * `config_path` may be NULL when every case carries a mock.json. */
DR_API dr_status dr_bench(const char* dataset_dir, const char* config_path, int jobs,
                          char** out_csv, int* failed_cases);

/* Metrics. */

/* Mean SSIM of two row-major 8-bit images of equal size. */
DR_API dr_status dr_ssim_u8(const uint8_t* a, const uint8_t* b, int width, int height,
                            int window, double* out);
DR_API dr_status dr_cosine(const double* u, const double* v, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* DOCREFINE_DOCREFINE_H_ */
