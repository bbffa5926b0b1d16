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

#include "docrefine/error.hpp"

namespace docrefine {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kIngest: return "IngestError";
    case ErrorCode::kTransport: return "TransportError";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kMockMiss: return "MockMiss";
    case ErrorCode::kUnresolvableTarget: return "UnresolvableTarget";
    case ErrorCode::kEmptyGeneration: return "EmptyGeneration";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kInternal: return "InternalError";
    case ErrorCode::kNoCases: return "NoCases";
  }
  return "Unknown";
}

}  // namespace docrefine
