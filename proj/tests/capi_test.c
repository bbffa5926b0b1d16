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

/* Exercises the shared library from C. Usage:
 *   capi_test <fixtures dir> <data dir> <scratch dir> */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

#include "docrefine/docrefine.h"

static int failures = 0;

#define CHECK(cond)                                                      \
  do {                                                                   \
    if (!(cond)) {                                                       \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                        \
    }                                                                    \
  } while (0)

#define CHECK_OK(expr)                                                             \
  do {                                                                             \
    dr_status s_ = (expr);                                                         \
    if (s_ != DR_OK) {                                                             \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #expr,          \
              dr_status_name(s_), dr_last_error());                                \
      ++failures;                                                                  \
    }                                                                              \
  } while (0)

static void join(char* out, size_t n, const char* a, const char* b) {
  if (strlen(a) + strlen(b) + 2 > n) {
    fprintf(stderr, "path too long: %s/%s\n", a, b);
    exit(2);
  }
  strcpy(out, a);
  strcat(out, "/");
  strcat(out, b);
}

static void test_basics(void) {
  double u[3] = {1, 2, 3}, v[3] = {2, 4, 6}, c = 0;
  uint8_t img[64];
  double s = 0;
  int i;
  CHECK(dr_version() != NULL && strlen(dr_version()) > 0);
  CHECK(strcmp(dr_status_name(DR_OK), "Ok") == 0);
  CHECK(strcmp(dr_status_name(DR_ERR_NO_CASES), "NoCases") == 0);
  CHECK_OK(dr_cosine(u, v, 3, &c));
  CHECK(fabs(c - 1.0) < 1e-12);
  v[0] = v[1] = v[2] = 0;
  CHECK(dr_cosine(u, v, 3, &c) == DR_ERR_ZERO_VECTOR);
  CHECK(strlen(dr_last_error()) > 0);
  for (i = 0; i < 64; ++i) img[i] = (uint8_t)(i * 3);
  CHECK_OK(dr_ssim_u8(img, img, 8, 8, 8, &s));
  CHECK(fabs(s - 1.0) < 1e-12);
  CHECK(dr_ssim_u8(img, img, 4, 4, 8, &s) == DR_ERR_DIMENSION_MISMATCH);
  CHECK(dr_cosine(NULL, u, 3, &c) == DR_ERR_INVALID_ARGUMENT);
}

static void test_ir(const char* data) {
  char path[1024];
  dr_ir* ir = NULL;
  dr_ir* again = NULL;
  char* json = NULL;
  char* text = NULL;
  join(path, sizeof path, data, "bench/case03_delete_paragraph/gold.ir.json");
  CHECK_OK(dr_ir_load(path, &ir));
  CHECK(dr_ir_element_count(ir) == 3);
  CHECK_OK(dr_ir_element_text(ir, "p3", &text));
  CHECK(text != NULL && strcmp(text, "Learned detectors later replaced rule-based segmentation.") == 0);
  dr_string_free(text);
  CHECK(dr_ir_element_text(ir, "p2", &text) == DR_ERR_UNRESOLVABLE_TARGET);
  CHECK_OK(dr_ir_serialize(ir, &json));
  CHECK_OK(dr_ir_parse(json, &again));
  CHECK(dr_ir_element_count(again) == 3);
  dr_string_free(json);
  dr_ir_destroy(again);
  dr_ir_destroy(ir);
  CHECK(dr_ir_parse("{\"pages\": 1", &ir) == DR_ERR_PARSE);
  CHECK(dr_ir_load("/nonexistent.json", &ir) == DR_ERR_IO);
}

static void test_pipeline(const char* fixtures, const char* data, const char* scratch) {
  char path[1024], mock[1024], out_dir[1024], out_ir[1024], ops[1024], empty[1024];
  dr_backend* backend = NULL;
  dr_ir* ir = NULL;
  char* warnings = NULL;
  char* report = NULL;
  char* csv = NULL;
  double vec[512];
  size_t dim = 0, i;
  double norm = 0;
  int failed = -1;

  join(path, sizeof path, fixtures, "two_page.pdf");
  CHECK_OK(dr_analyze(NULL, path, &ir, &warnings));
  CHECK(dr_ir_element_count(ir) == 9);
  dr_string_free(warnings);
  dr_ir_destroy(ir);

  join(mock, sizeof mock, data, "bench/case01_rewrite_intro/mock.json");
  CHECK_OK(dr_backend_create_mock(mock, &backend));
  CHECK_OK(dr_embed(backend, "layout fidelity", vec, 512, &dim));
  CHECK(dim == 256);
  for (i = 0; i < dim; ++i) norm += vec[i] * vec[i];
  CHECK(fabs(norm - 1.0) < 1e-9);

  join(path, sizeof path, data, "bench/case01_rewrite_intro/input.ir.json");
  join(out_dir, sizeof out_dir, scratch, "capi_refine");
  mkdir(out_dir, 0755);
  CHECK_OK(dr_refine(backend, path, "Make the first paragraph more concise.", 0, NULL, out_dir,
                     &report));
  CHECK(report != NULL && strstr(report, "\"iar\"") != NULL);
  dr_string_free(report);

  join(out_ir, sizeof out_ir, out_dir, "out.ir.json");
  join(ops, sizeof ops, out_dir, "out.ops.json");
  report = NULL;
  CHECK_OK(dr_verify(backend, path, out_ir, "Make the first paragraph more concise.", ops, &report));
  CHECK(report != NULL && strstr(report, "\"per_op\"") != NULL);
  dr_string_free(report);
  CHECK(dr_refine(backend, path, "", 0, NULL, out_dir, NULL) == DR_ERR_INVALID_ARGUMENT);
  dr_backend_destroy(backend);

  CHECK(dr_backend_create_mock("/nonexistent/mock.json", &backend) == DR_ERR_IO);

  join(path, sizeof path, data, "bench");
  CHECK_OK(dr_bench(path, NULL, 2, &csv, &failed));
  CHECK(failed == 0);
  CHECK(csv != NULL && strstr(csv, "MEAN,overall,1.000000,1.000000,1.000000,n=5") != NULL);
  dr_string_free(csv);
  join(empty, sizeof empty, scratch, "empty");
  mkdir(empty, 0755);
  CHECK(dr_bench(empty, NULL, 1, &csv, &failed) == DR_ERR_NO_CASES);
}

int main(int argc, char** argv) {
  if (argc != 4) {
    fprintf(stderr, "usage: %s <fixtures> <data> <scratch>\n", argv[0]);
    return 2;
  }
  mkdir(argv[3], 0755);
  test_basics();
  test_ir(argv[2]);
  test_pipeline(argv[1], argv[2], argv[3]);
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("capi_test: all checks passed\n");
  return 0;
}
