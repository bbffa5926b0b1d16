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

// Prompt templates. Every request carries a task system prompt that asks for
// step-by-step reasoning followed by a single JSON answer, and one text part
// holding the task input as canonical JSON.

#ifndef DOCREFINE_SRC_PROMPTS_HPP_
#define DOCREFINE_SRC_PROMPTS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "docrefine/backend.hpp"

namespace docrefine::prompts {

enum class Task {
  kRegionLabel,
  kSectionFacts,
  kFigureDescription,
  kTableGrid,
  kDecompose,
  kRewrite,
  kInsert,
  kFormatUnify,
  kCrossModalFix,
  kCaption,
  kSummary,
  kJudge,
};

std::string system_prompt(Task task);

// Builds the request for `task`. `input` is rendered as canonical JSON under
// a one-line task header; `images` become image parts after the text.
backend::BackendRequest make_request(Task task, const Json& input,
                                     const std::vector<std::string>& images = {});

}  // namespace docrefine::prompts

#endif  // DOCREFINE_SRC_PROMPTS_HPP_
