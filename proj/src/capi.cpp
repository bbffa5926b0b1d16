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

#include "docrefine/docrefine.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <string_view>

#include "docrefine/bench.hpp"
#include "docrefine/canonical_json.hpp"
#include "docrefine/config.hpp"
#include "docrefine/error.hpp"
#include "docrefine/fcv.hpp"
#include "docrefine/ir.hpp"
#include "docrefine/lsa.hpp"
#include "docrefine/orchestrator.hpp"

struct dr_backend {
  docrefine::config::Config config;
  std::unique_ptr<docrefine::backend::Backend> impl;
};

struct dr_ir {
  docrefine::ir::DocumentIR ir;
};

namespace {

namespace fs = std::filesystem;
using docrefine::Error;
using docrefine::ErrorCode;

thread_local std::string g_last_error;

dr_status fail(dr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
dr_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return DR_OK;
  } catch (const Error& e) {
    return fail(static_cast<dr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DR_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(DR_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(DR_ERR_INTERNAL, e.what());
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void set_out(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

std::vector<docrefine::ida::AtomicOp> load_ops(const fs::path& path) {
  const auto j = docrefine::parse_json(docrefine::read_file(path), path.string());
  if (j.is_array()) {
    return docrefine::ida::decomposition_from_json({{"ops", j}}).ops;
  }
  return docrefine::ida::decomposition_from_json(j).ops;
}

}  // namespace

extern "C" {

const char* dr_version(void) { return "0.1.0"; }

const char* dr_status_name(dr_status status) {
  return docrefine::error_code_name(static_cast<ErrorCode>(status));
}

const char* dr_last_error(void) { return g_last_error.c_str(); }

void dr_string_free(char* s) { std::free(s); }

dr_status dr_backend_create(const char* config_path, dr_backend** out) {
  return guarded([&] {
    require(config_path != nullptr && out != nullptr, "config_path and out are required");
    auto handle = std::make_unique<dr_backend>();
    handle->config = docrefine::config::load_config(config_path);
    docrefine::config::apply_environment(handle->config);
    const auto problems = docrefine::orchestrator::validate_config(handle->config.loop);
    if (!problems.empty()) throw Error(ErrorCode::kInvalidArgument, problems.front());
    handle->impl = docrefine::backend::make_backend(handle->config.backend);
    *out = handle.release();
  });
}

dr_status dr_backend_create_mock(const char* script_path, dr_backend** out) {
  return guarded([&] {
    require(script_path != nullptr && out != nullptr, "script_path and out are required");
    auto handle = std::make_unique<dr_backend>();
    handle->config.backend.mode = docrefine::backend::Mode::kMock;
    handle->config.backend.mock_script = script_path;
    handle->impl = docrefine::backend::make_backend(handle->config.backend);
    *out = handle.release();
  });
}

void dr_backend_destroy(dr_backend* backend) { delete backend; }

dr_status dr_embed(dr_backend* backend, const char* text, double* out, size_t capacity,
                   size_t* dim) {
  return guarded([&] {
    require(backend != nullptr && text != nullptr && dim != nullptr, "missing argument");
    const auto vecs = backend->impl->embed({text});
    const auto& v = vecs.at(0).values();
    *dim = v.size();
    for (size_t i = 0; i < v.size() && i < capacity && out != nullptr; ++i) out[i] = v[i];
  });
}

dr_status dr_ir_load(const char* path, dr_ir** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out are required");
    *out = new dr_ir{docrefine::ir::load_ir(path)};
  });
}

dr_status dr_ir_parse(const char* json, dr_ir** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "json and out are required");
    *out = new dr_ir{docrefine::ir::deserialize_ir(json)};
  });
}

dr_status dr_ir_serialize(const dr_ir* ir, char** out_json) {
  return guarded([&] {
    require(ir != nullptr && out_json != nullptr, "ir and out_json are required");
    *out_json = dup_string(docrefine::ir::serialize_ir(ir->ir));
  });
}

dr_status dr_ir_save(const dr_ir* ir, const char* path) {
  return guarded([&] {
    require(ir != nullptr && path != nullptr, "ir and path are required");
    docrefine::ir::save_ir(path, ir->ir);
  });
}

size_t dr_ir_element_count(const dr_ir* ir) { return ir == nullptr ? 0 : ir->ir.elements.size(); }

dr_status dr_ir_element_text(const dr_ir* ir, const char* element_id, char** out_text) {
  return guarded([&] {
    require(ir != nullptr && element_id != nullptr && out_text != nullptr, "missing argument");
    const auto* e = ir->ir.find(element_id);
    if (e == nullptr) throw docrefine::UnresolvableTarget(element_id);
    *out_text = dup_string(e->text);
  });
}

void dr_ir_destroy(dr_ir* ir) { delete ir; }

dr_status dr_analyze(dr_backend* backend, const char* input_path, dr_ir** out,
                     char** out_warnings) {
  return guarded([&] {
    require(input_path != nullptr && out != nullptr, "input_path and out are required");
    docrefine::lsa::AnalyzeOptions options;
    if (backend != nullptr) options = backend->config.loop.analyze;
    auto analysis = docrefine::lsa::analyze(docrefine::lsa::source_from_path(input_path),
                                            backend != nullptr ? backend->impl.get() : nullptr,
                                            options);
    std::string warnings;
    for (const auto& w : analysis.warnings) warnings += w + "\n";
    auto handle = std::make_unique<dr_ir>(dr_ir{std::move(analysis.ir)});
    set_out(out_warnings, warnings);
    *out = handle.release();
  });
}

dr_status dr_refine(dr_backend* backend, const char* input_path, const char* instruction,
                    int max_length, const char* style, const char* out_dir, char** out_report) {
  return guarded([&] {
    require(backend != nullptr && input_path != nullptr && instruction != nullptr &&
                out_dir != nullptr,
            "backend, input_path, instruction and out_dir are required");
    require(std::string_view(instruction).find_first_not_of(" \t\r\n") != std::string_view::npos,
            "instruction is empty");
    docrefine::ida::Instruction ins;
    ins.text = instruction;
    if (max_length > 0) ins.max_length = max_length;
    if (style != nullptr) ins.style = std::string(style);
    const auto run = docrefine::orchestrator::run(docrefine::lsa::source_from_path(input_path),
                                                  ins, backend->config.loop, *backend->impl);
    docrefine::orchestrator::write_run(out_dir, run);
    if (out_report != nullptr) {
      auto report = docrefine::fcv::to_json(run.report);
      report["iteration"] = run.chosen_iteration;
      *out_report = dup_string(docrefine::to_canonical_json(report));
    }
  });
}

dr_status dr_verify(dr_backend* backend, const char* original_path, const char* modified_path,
                    const char* instruction, const char* ops_path, char** out_report) {
  return guarded([&] {
    require(backend != nullptr && original_path != nullptr && modified_path != nullptr &&
                ops_path != nullptr && out_report != nullptr,
            "missing argument");
    // The original may be an input file (PDF or layout JSON) or a full IR.
    const auto orig = docrefine::lsa::analyze(docrefine::lsa::source_from_path(original_path),
                                              backend->impl.get(), backend->config.loop.analyze)
                          .ir;
    const auto mod = docrefine::ir::load_ir(modified_path);
    const fs::path dir = fs::path(modified_path).parent_path();
    const auto mod_sem = fs::exists(dir / "out.sem.json")
                             ? docrefine::mcu::load_sem(dir / "out.sem.json")
                             : docrefine::mcu::structural_understanding(mod);
    docrefine::fcv::VerifyExtras extras;
    extras.thresholds = backend->config.loop.thresholds;
    if (fs::exists(dir / "summaries.json")) {
      extras.summaries = docrefine::refine::summaries_from_json(docrefine::parse_json(
          docrefine::read_file(dir / "summaries.json"), "summaries.json"));
    }
    docrefine::ida::Instruction ins;
    ins.text = instruction != nullptr ? instruction : "";
    const auto report = docrefine::fcv::verify(
        orig, mod, docrefine::mcu::structural_understanding(orig), mod_sem, ins,
        load_ops(ops_path), *backend->impl,
        backend->config.loop.judge ? backend->impl.get() : nullptr, extras);
    *out_report = dup_string(docrefine::to_canonical_json(docrefine::fcv::to_json(report)));
  });
}

dr_status dr_bench(const char* dataset_dir, const char* config_path, int jobs, char** out_csv,
                   int* failed_cases) {
  return guarded([&] {
    require(dataset_dir != nullptr && out_csv != nullptr, "dataset_dir and out_csv are required");
    docrefine::bench::BenchOptions options;
    if (config_path != nullptr) options.config = docrefine::config::load_config(config_path);
    docrefine::config::apply_environment(options.config);
    options.jobs = jobs;
    const auto report = docrefine::bench::run_bench(dataset_dir, options);
    if (failed_cases != nullptr) {
      int failed = 0;
      for (const auto& row : report.cases) failed += row.ok ? 0 : 1;
      *failed_cases = failed;
    }
    *out_csv = dup_string(docrefine::bench::to_csv(report));
  });
}

dr_status dr_ssim_u8(const uint8_t* a, const uint8_t* b, int width, int height, int window,
                     double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "missing argument");
    require(width > 0 && height > 0, "image dimensions must be positive");
    const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
    docrefine::GrayImage ia(width, height), ib(width, height);
    std::memcpy(ia.pixels.data(), a, n);
    std::memcpy(ib.pixels.data(), b, n);
    *out = docrefine::fcv::ssim(ia, ib, window);
  });
}

dr_status dr_cosine(const double* u, const double* v, size_t n, double* out) {
  return guarded([&] {
    require(u != nullptr && v != nullptr && out != nullptr, "missing argument");
    *out = docrefine::fcv::cosine({u, n}, {v, n});
  });
}

}  // extern "C"
