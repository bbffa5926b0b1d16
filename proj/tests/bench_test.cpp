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

#include <cstdlib>
#include <sstream>

#include "docrefine/bench.hpp"
#include "docrefine/error.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace docrefine::bench {
namespace {

namespace fs = std::filesystem;

fs::path bench_data() {
  const char* dir = std::getenv("DOCREFINE_DATA");
  return fs::path(dir ? dir : "../data") / "bench";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Copies the bundled dataset so cases can be altered.
fs::path copy_dataset(const testing::TempDir& dir) {
  const fs::path out = dir / "bench";
  fs::copy(bench_data(), out, fs::copy_options::recursive);
  return out;
}

TEST(Bench, GoldEchoCasesScoreOne) {
  const auto report = run_bench(bench_data(), {});
  ASSERT_EQ(report.cases.size(), 5u);
  EXPECT_FALSE(report.any_failed());
  for (const auto& c : report.cases) {
    EXPECT_TRUE(c.ok) << c.name << ": " << c.error;
    EXPECT_DOUBLE_EQ(c.scs, 1.0) << c.name;
    EXPECT_DOUBLE_EQ(c.lfi, 1.0) << c.name;
    EXPECT_DOUBLE_EQ(c.iar, 1.0) << c.name;
  }
  EXPECT_EQ(report.overall.count, 5u);
  EXPECT_EQ(report.categories.size(), 4u);
}

TEST(Bench, EmptyDatasetIsAnError) {
  testing::TempDir dir;
  try {
    run_bench(dir.path(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCases);
  }
}

TEST(Bench, BrokenCaseIsReportedAndExcludedFromMeans) {
  testing::TempDir dir;
  const fs::path data = copy_dataset(dir);
  write_file(data / "case02_table_cell" / "gold.ir.json", "{ not json");
  fs::remove(data / "case03_delete_paragraph" / "instruction.txt");
  const auto report = run_bench(data, {});
  EXPECT_TRUE(report.any_failed());
  size_t failed = 0;
  for (const auto& c : report.cases) {
    if (!c.ok) {
      ++failed;
      EXPECT_FALSE(c.error.empty());
    }
  }
  EXPECT_EQ(failed, 2u);
  EXPECT_EQ(report.overall.count, 3u);
  EXPECT_DOUBLE_EQ(report.overall.scs, 1.0);
}

TEST(Bench, ParallelRunMatchesSerial) {
  BenchOptions parallel;
  parallel.jobs = 4;
  EXPECT_EQ(to_csv(run_bench(bench_data(), {})), to_csv(run_bench(bench_data(), parallel)));
}

TEST(Bench, CsvMeansRecomputeFromRows) {
  testing::TempDir dir;
  const fs::path data = copy_dataset(dir);
  // Make one case imperfect so the means are not all ones.
  const fs::path mock = data / "case01_rewrite_intro" / "mock.json";
  Json script = parse_json(read_file(mock), "mock.json");
  script["CRA"] = {{"default", {{"text", "A different and much shorter paragraph."}}}};
  write_file(mock, script.dump());
  write_file(data / "case05_figure_caption" / "gold.ir.json", "[]");

  const std::string csv = to_csv(run_bench(data, {}));
  const auto rows = csv_rows(csv);
  ASSERT_EQ(rows.front(), (std::vector<std::string>{"case", "category", "scs", "lfi", "iar",
                                                     "status"}));
  double sums[3] = {0, 0, 0};
  int n = 0;
  bool saw_failure = false;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ASSERT_EQ(r.size(), 6u) << csv;
    if (r[0] == "MEAN") {
      if (r[1] != "overall") continue;
      EXPECT_EQ(r[5], "n=" + std::to_string(n));
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::stod(r[2 + k]), sums[k] / n, 5e-7);
      continue;
    }
    if (r[5] != "ok") {
      saw_failure = true;
      EXPECT_EQ(r[5].rfind("failed: ", 0), 0u) << r[5];
      continue;
    }
    ++n;
    for (int k = 0; k < 3; ++k) sums[k] += std::stod(r[2 + k]);
  }
  EXPECT_TRUE(saw_failure);
  EXPECT_EQ(n, 4);
  EXPECT_LT(sums[0], 4.0);
}

TEST(Bench, CaseWithoutMockNeedsBackend) {
  testing::TempDir dir;
  const fs::path data = copy_dataset(dir);
  for (const auto& entry : fs::directory_iterator(data)) {
    if (entry.path().filename() != "case03_delete_paragraph") fs::remove_all(entry.path());
  }
  const fs::path case_dir = data / "case03_delete_paragraph";
  fs::rename(case_dir / "mock.json", dir / "shared.json");
  BenchOptions opts;
  opts.config = config::parse_config("mock_script = shared.json\n", dir.path());
  const auto report = run_bench(data, opts);
  ASSERT_EQ(report.cases.size(), 1u);
  EXPECT_TRUE(report.cases[0].ok) << report.cases[0].error;
  EXPECT_DOUBLE_EQ(report.cases[0].iar, 1.0);
}

}  // namespace
}  // namespace docrefine::bench
