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

// docrefine command-line tool. Talks to the library only through its C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "docrefine/docrefine.h"

namespace {

struct BackendDeleter {
  void operator()(dr_backend* b) const { dr_backend_destroy(b); }
};
struct IrDeleter {
  void operator()(dr_ir* ir) const { dr_ir_destroy(ir); }
};
struct StringDeleter {
  void operator()(char* s) const { dr_string_free(s); }
};
using BackendPtr = std::unique_ptr<dr_backend, BackendDeleter>;
using IrPtr = std::unique_ptr<dr_ir, IrDeleter>;
using CString = std::unique_ptr<char, StringDeleter>;

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(dr_status status) {
  if (status != DR_OK) {
    throw Failure(std::string(dr_status_name(status)) + ": " + dr_last_error());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure("cannot write " + path);
  out << text;
}

BackendPtr open_backend(const std::string& config, const std::string& mock) {
  dr_backend* raw = nullptr;
  if (!mock.empty()) {
    check(dr_backend_create_mock(mock.c_str(), &raw));
  } else if (!config.empty()) {
    check(dr_backend_create(config.c_str(), &raw));
  }
  return BackendPtr(raw);
}

std::string instruction_text(const std::string& text, const std::string& file) {
  if (!file.empty()) return read_text(file);
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-driven document refinement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dr_version());

  std::string config, mock;
  auto add_backend_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Key-value config file");
    cmd->add_option("--mock", mock, "Mock script; overrides the config backend");
  };

  std::string input, output;
  auto* analyze = app.add_subcommand("analyze", "Build the IR of a PDF or layout JSON file");
  analyze->add_option("input", input, "Input .pdf or layout .json")->required();
  analyze->add_option("output", output, "Output .ir.json")->required();
  add_backend_flags(analyze);

  std::string instruction, instruction_file, style, out_dir;
  int max_length = 0;
  auto* refine = app.add_subcommand("refine", "Run the closed refinement loop");
  refine->add_option("input", input, "Input .pdf or .json")->required();
  refine->add_option("out", out_dir, "Output directory")->required();
  auto* ins_opt = refine->add_option("--instruction", instruction, "Editing instruction");
  refine->add_option("--instruction-file", instruction_file, "File holding the instruction")
      ->excludes(ins_opt);
  refine->add_option("--max-length", max_length, "Word limit for generated summaries");
  refine->add_option("--style", style, "Style for generated summaries");
  add_backend_flags(refine);

  std::string original, modified, ops, report;
  auto* verify = app.add_subcommand("verify", "Score an edited IR against its original");
  verify->add_option("--original", original, "Original .ir.json")->required();
  verify->add_option("--modified", modified, "Edited .ir.json")->required();
  auto* vins_opt = verify->add_option("--instruction", instruction, "Editing instruction");
  verify->add_option("--instruction-file", instruction_file, "File holding the instruction")
      ->excludes(vins_opt);
  verify->add_option("--ops", ops, "Operations JSON (out.ops.json)")->required();
  verify->add_option("--report", report, "Report path (default: stdout)");
  add_backend_flags(verify);

  std::string dataset, csv;
  int jobs = 1;
  bool strict = false;
  auto* bench = app.add_subcommand("bench", "Score every case of a dataset against gold");
  bench->add_option("--dataset", dataset, "Dataset directory")->required();
  bench->add_option("--report", csv, "CSV path (default: stdout)");
  bench->add_option("--config", config, "Key-value config file");
  bench->add_option("--jobs", jobs, "Cases run in parallel")->check(CLI::PositiveNumber);
  bench->add_flag("--strict", strict, "Exit nonzero when a case fails");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      BackendPtr backend = open_backend(config, mock);
      dr_ir* raw = nullptr;
      char* warnings = nullptr;
      check(dr_analyze(backend.get(), input.c_str(), &raw, &warnings));
      IrPtr ir(raw);
      CString w(warnings);
      if (w && *w) std::cerr << w.get();
      check(dr_ir_save(ir.get(), output.c_str()));
      std::cout << dr_ir_element_count(ir.get()) << " elements written to " << output << "\n";
    } else if (*refine) {
      const std::string text = instruction_text(instruction, instruction_file);
      if (text.empty()) throw Failure("an instruction is required");
      BackendPtr backend = open_backend(config, mock);
      if (!backend) throw Failure("--config or --mock is required");
      char* rep = nullptr;
      check(dr_refine(backend.get(), input.c_str(), text.c_str(), max_length,
                      style.empty() ? nullptr : style.c_str(), out_dir.c_str(), &rep));
      CString r(rep);
      std::cout << r.get() << "\n";
    } else if (*verify) {
      BackendPtr backend = open_backend(config, mock);
      if (!backend) throw Failure("--config or --mock is required");
      const std::string text = instruction_text(instruction, instruction_file);
      char* rep = nullptr;
      check(dr_verify(backend.get(), original.c_str(), modified.c_str(), text.c_str(),
                      ops.c_str(), &rep));
      CString r(rep);
      if (report.empty()) {
        std::cout << r.get() << "\n";
      } else {
        write_text(report, r.get());
      }
    } else if (*bench) {
      char* out = nullptr;
      int failed = 0;
      check(dr_bench(dataset.c_str(), config.empty() ? nullptr : config.c_str(), jobs, &out,
                     &failed));
      CString c(out);
      if (csv.empty()) {
        std::cout << c.get();
      } else {
        write_text(csv, c.get());
      }
      if (failed > 0) {
        std::cerr << failed << " case(s) failed\n";
        if (strict) return 1;
      }
    }
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
