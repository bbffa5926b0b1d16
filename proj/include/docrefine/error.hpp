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

#ifndef DOCREFINE_ERROR_HPP_
#define DOCREFINE_ERROR_HPP_

#include <exception>
#include <string>
#include <utility>

namespace docrefine {

// Numeric values are part of the C ABI (see docrefine.h) and must not change.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kValidation = 4,
  kIngest = 5,
  kTransport = 6,
  kSchema = 7,
  kMockMiss = 8,
  kUnresolvableTarget = 9,
  kEmptyGeneration = 10,
  kDimensionMismatch = 11,
  kZeroVector = 12,
  kInternal = 13,
  kNoCases = 14,
};

const char* error_code_name(ErrorCode code);

// Base of every failure the library raises. Stages attach context (element
// id, op id) with add_context() and rethrow, so the dynamic type survives.
class Error : public std::exception {
 public:
  Error(ErrorCode code, std::string message)
      : code_(code), message_(std::move(message)) {}

  ErrorCode code() const noexcept { return code_; }
  const char* what() const noexcept override { return message_.c_str(); }
  const std::string& message() const noexcept { return message_; }

  void add_context(const std::string& context) {
    message_ = context + ": " + message_;
  }

 private:
  ErrorCode code_;
  std::string message_;
};

class IoError : public Error {
 public:
  explicit IoError(std::string msg) : Error(ErrorCode::kIo, std::move(msg)) {}
};

// Path-addressed failure while decoding a JSON document, e.g.
// "/elements/3/kind: unknown element kind 'Chart'".
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& msg)
      : Error(ErrorCode::kParse, path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::string msg)
      : Error(ErrorCode::kValidation, std::move(msg)) {}
};

class IngestError : public Error {
 public:
  explicit IngestError(std::string msg)
      : Error(ErrorCode::kIngest, std::move(msg)) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(std::string msg)
      : Error(ErrorCode::kTransport, std::move(msg)) {}
};

// The model output could not be coerced into the declared schema even after
// the repair pass. raw_text() holds the offending output.
class SchemaError : public Error {
 public:
  SchemaError(std::string msg, std::string raw_text)
      : Error(ErrorCode::kSchema, std::move(msg)),
        raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

class MockMiss : public Error {
 public:
  explicit MockMiss(std::string stage_tag)
      : Error(ErrorCode::kMockMiss,
              "mock script has no entry for stage " + stage_tag),
        stage_tag_(std::move(stage_tag)) {}
  const std::string& stage_tag() const noexcept { return stage_tag_; }

 private:
  std::string stage_tag_;
};

class UnresolvableTarget : public Error {
 public:
  explicit UnresolvableTarget(std::string target)
      : Error(ErrorCode::kUnresolvableTarget,
              "operation target '" + target + "' does not exist"),
        target_(std::move(target)) {}
  const std::string& target() const noexcept { return target_; }

 private:
  std::string target_;
};

class EmptyGeneration : public Error {
 public:
  explicit EmptyGeneration(std::string msg)
      : Error(ErrorCode::kEmptyGeneration, std::move(msg)) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(std::string msg)
      : Error(ErrorCode::kDimensionMismatch, std::move(msg)) {}
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error(ErrorCode::kZeroVector, "cosine of a zero vector") {}
};

class InternalError : public Error {
 public:
  explicit InternalError(std::string msg)
      : Error(ErrorCode::kInternal, std::move(msg)) {}
};

}  // namespace docrefine

#endif  // DOCREFINE_ERROR_HPP_
