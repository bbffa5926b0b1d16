// Copyright 2026 The DocRefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark harness. A dataset is a directory of case directories, each
// holding:
//
//   input.ir.json | input.pdf   document to edit
//   instruction.txt             editing instruction
//   gold.ir.json                expected output
//   meta.json                   {"category": "..."}
//   mock.json                   optional per-case mock script
//
// Each case runs the full loop and its output is scored against the gold
// document. Failed cases are reported but left out of the means.

#ifndef DOCREFINE_BENCH_HPP_
#define DOCREFINE_BENCH_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "docrefine/config.hpp"

namespace docrefine::bench {

struct CaseRow {
  std::string name;
  std::string category;
  bool ok = false;
  double scs = 0;
  double lfi = 0;
  double iar = 0;
  std::string error;
};

struct MeanRow {
  std::string category;  // "overall" for the dataset mean.
  size_t count = 0;
  double scs = 0;
  double lfi = 0;
  double iar = 0;
};

struct BenchReport {
  std::vector<CaseRow> cases;       // Case-name order.
  std::vector<MeanRow> categories;  // Category-name order.
  MeanRow overall;
  bool any_failed() const;
};

struct BenchOptions {
  config::Config config;
  int jobs = 1;
};

// Cases without a mock.json use the backend described by `config`.
CaseRow run_case(const std::filesystem::path& case_dir, const config::Config& config,
                 backend::Backend* shared_backend);

// Throws Error(kNoCases, "no cases found") when `dataset` has no case
// directories.
BenchReport run_bench(const std::filesystem::path& dataset, const BenchOptions& options);

// Scores are printed with six decimals; means are taken over the printed
// values of the successful cases so they can be recomputed from the file.
// Columns: case, category, scs, lfi, iar, status.
std::string to_csv(const BenchReport& report);

}  // namespace docrefine::bench

#endif  // DOCREFINE_BENCH_HPP_
