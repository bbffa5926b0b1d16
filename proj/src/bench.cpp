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

#include "docrefine/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <memory>
#include <thread>

#include "docrefine/canonical_json.hpp"
#include "docrefine/error.hpp"
#include "docrefine/fcv.hpp"
#include "docrefine/orchestrator.hpp"

namespace docrefine::bench {
namespace {

namespace fs = std::filesystem;

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double printed(double v) { return std::stod(fixed6(v)); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

MeanRow mean_of(const std::string& category, const std::vector<const CaseRow*>& rows) {
  MeanRow m;
  m.category = category;
  m.count = rows.size();
  if (rows.empty()) return m;
  for (const CaseRow* r : rows) {
    m.scs += printed(r->scs);
    m.lfi += printed(r->lfi);
    m.iar += printed(r->iar);
  }
  const double n = static_cast<double>(rows.size());
  m.scs /= n;
  m.lfi /= n;
  m.iar /= n;
  return m;
}

}  // namespace

bool BenchReport::any_failed() const {
  return std::any_of(cases.begin(), cases.end(), [](const CaseRow& r) { return !r.ok; });
}

CaseRow run_case(const fs::path& case_dir, const config::Config& config,
                 backend::Backend* shared_backend) {
  CaseRow row;
  row.name = case_dir.filename().string();
  try {
    const Json meta = parse_json(read_file(case_dir / "meta.json"), "meta.json");
    if (!meta.is_object() || !meta.contains("category") || !meta["category"].is_string()) {
      throw ParseError("meta.json", "missing string field 'category'");
    }
    row.category = meta["category"].get<std::string>();

    ida::Instruction instruction;
    instruction.text = trim(read_file(case_dir / "instruction.txt"));
    if (instruction.text.empty()) throw ValidationError("instruction.txt is empty");

    lsa::IngestSource source;
    if (fs::exists(case_dir / "input.ir.json")) {
      source = lsa::source_from_path(case_dir / "input.ir.json");
    } else if (fs::exists(case_dir / "input.pdf")) {
      source = lsa::source_from_path(case_dir / "input.pdf");
    } else {
      throw IoError("no input.ir.json or input.pdf");
    }
    const ir::DocumentIR gold = ir::load_ir(case_dir / "gold.ir.json");

    std::unique_ptr<backend::Backend> own;
    backend::Backend* be = shared_backend;
    if (fs::exists(case_dir / "mock.json")) {
      own = std::make_unique<backend::MockBackend>(backend::MockScript::load(case_dir / "mock.json"),
                                                   config.backend.concurrency_limit);
      be = own.get();
    }
    if (be == nullptr) throw Error(ErrorCode::kInvalidArgument, "no backend for case");

    const auto run = orchestrator::run(source, instruction, config.loop, *be);
    const auto scores =
        fcv::score_against_gold(run.original_ir, run.result.new_ir, gold, *be);
    row.scs = scores.scs;
    row.lfi = scores.lfi;
    row.iar = scores.iar;
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

BenchReport run_bench(const fs::path& dataset, const BenchOptions& options) {
  std::vector<fs::path> dirs;
  if (fs::is_directory(dataset)) {
    for (const auto& entry : fs::directory_iterator(dataset)) {
      if (entry.is_directory()) dirs.push_back(entry.path());
    }
  }
  if (dirs.empty()) throw Error(ErrorCode::kNoCases, "no cases found");
  std::sort(dirs.begin(), dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::unique_ptr<backend::Backend> shared;
  const bool all_mocked = std::all_of(dirs.begin(), dirs.end(), [](const fs::path& d) {
    return fs::exists(d / "mock.json");
  });
  if (!all_mocked) shared = backend::make_backend(options.config.backend);

  BenchReport report;
  report.cases.resize(dirs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < dirs.size(); i = next++) {
      report.cases[i] = run_case(dirs[i], options.config, shared.get());
    }
  };
  const size_t jobs = std::clamp<size_t>(static_cast<size_t>(std::max(options.jobs, 1)), 1,
                                         dirs.size());
  std::vector<std::thread> threads;
  for (size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::map<std::string, std::vector<const CaseRow*>> by_category;
  std::vector<const CaseRow*> all;
  for (const auto& row : report.cases) {
    if (!row.ok) continue;
    by_category[row.category].push_back(&row);
    all.push_back(&row);
  }
  for (const auto& [category, rows] : by_category) {
    report.categories.push_back(mean_of(category, rows));
  }
  report.overall = mean_of("overall", all);
  return report;
}

std::string to_csv(const BenchReport& report) {
  std::string out = "case,category,scs,lfi,iar,status\n";
  for (const auto& r : report.cases) {
    out += csv_field(r.name) + "," + csv_field(r.category) + ",";
    if (r.ok) {
      out += fixed6(r.scs) + "," + fixed6(r.lfi) + "," + fixed6(r.iar) + ",ok\n";
    } else {
      out += ",,," + csv_field("failed: " + r.error) + "\n";
    }
  }
  auto mean_line = [&](const MeanRow& m) {
    out += "MEAN," + csv_field(m.category) + ",";
    if (m.count == 0) {
      out += ",,,n=0\n";
    } else {
      out += fixed6(m.scs) + "," + fixed6(m.lfi) + "," + fixed6(m.iar) + ",n=" +
             std::to_string(m.count) + "\n";
    }
  };
  for (const auto& m : report.categories) mean_line(m);
  mean_line(report.overall);
  return out;
}

}  // namespace docrefine::bench
