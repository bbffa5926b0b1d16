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

#include "prompts.hpp"

namespace docrefine::prompts {
namespace {

using backend::Stage;
namespace schemas = backend::schemas;

struct TaskSpec {
  Stage stage;
  std::string_view schema;
  std::string_view header;
  std::string_view role;
  std::string_view answer_shape;
};

constexpr std::string_view kReasoning =
    "Work through the task step by step: restate what is asked, inspect the "
    "relevant input fields, decide, then check the decision against the "
    "input. Keep that reasoning to yourself.";

TaskSpec spec_for(Task task) {
  switch (task) {
    case Task::kRegionLabel:
      return {Stage::kLSA, schemas::kRegion, "Label the page region.",
              "You are the layout analysis agent of a document editing system. "
              "You decide whether a non-text page region is a Figure or a Table.",
              R"({"kind": "Figure" | "Table", "text": "<tab/newline table text or empty>"})"};
    case Task::kSectionFacts:
      return {Stage::kMCU, schemas::kSection, "Extract the semantics of one section.",
              "You are the content understanding agent. Extract key facts as "
              "(subject, predicate, object) triplets and named entities from the "
              "section's elements, citing the element id each came from, and "
              "write a one-sentence digest of the section.",
              R"({"facts": [{"subject": "", "predicate": "", "object": "", "source": "<element id>"}], "entities": [{"surface": "", "category": "", "source": "<element id>"}], "digest": ""})"};
    case Task::kFigureDescription:
      return {Stage::kMCU, schemas::kFigure, "Describe the figure.",
              "You are the content understanding agent. Describe what the figure "
              "shows, including axis labels and legend entries when present.",
              R"({"description": "", "axis_labels": [""], "legend_entries": [""]})"};
    case Task::kTableGrid:
      return {Stage::kMCU, schemas::kGrid, "Transcribe the table.",
              "You are the content understanding agent. Transcribe the table image "
              "into a row-major grid of cell strings.",
              R"({"n_rows": 1, "n_cols": 1, "cells": [""], "header_rows": 0})"};
    case Task::kDecompose:
      return {Stage::kIDA, schemas::kOps, "Decompose the instruction.",
              "You are the instruction decomposition agent. Turn the user's "
              "instruction into an ordered list of atomic operations over the "
              "document outline. Allowed kinds: RewriteText, InsertText, "
              "DeleteText, CorrectTableCell, UpdateCaption, GenerateSummary, "
              "ReorderElements, FormatUnify, CrossModalFix. Targets are "
              R"({"element": id}, {"table": id, "row": r, "col": c} (0-based), )"
              R"({"section": heading id} or {"document": true}. Fold locating )"
              "steps into the target of the operation that acts on the located "
              "content. When part of the instruction admits several readings, "
              "emit {\"alternatives\": [op, ...], \"span\": \"...\", \"reason\": "
              "\"...\"} listing the readings, most plausible first.",
              R"({"ops": [{"kind": "", "target": {}, "payload": {"goal": ""}, "rationale": ""}], "ambiguities": [{"span": "", "candidates": [""], "reason": ""}]})"};
    case Task::kRewrite:
      return {Stage::kCRA, schemas::kText, "Rewrite the element.",
              "You are the content refinement agent. Rewrite the target element's "
              "text to satisfy the goal while keeping its meaning, facts and style "
              "consistent with the surrounding section.",
              R"({"text": "<replacement text>"})"};
    case Task::kInsert:
      return {Stage::kCRA, schemas::kText, "Write text to insert.",
              "You are the content refinement agent. Write only the new text to "
              "insert into the target element at the requested position.",
              R"({"text": "<text to insert>"})"};
    case Task::kFormatUnify:
      return {Stage::kCRA, schemas::kText, "Unify the element's formatting.",
              "You are the content refinement agent. Make the element's notation, "
              "number formats and terminology consistent with the goal without "
              "changing its meaning.",
              R"({"text": "<replacement text>"})"};
    case Task::kCrossModalFix:
      return {Stage::kCRA, schemas::kText, "Make the text consistent with the figure.",
              "You are the content refinement agent. Correct the target text so "
              "that every statement about the figure or table agrees with the "
              "provided description of it.",
              R"({"text": "<replacement text>"})"};
    case Task::kCaption:
      return {Stage::kCRA, schemas::kText, "Update the caption.",
              "You are the content refinement agent. Rewrite the caption to "
              "satisfy the goal and mention every listed key term.",
              R"({"text": "<new caption>"})"};
    case Task::kSummary:
      return {Stage::kSGA, schemas::kText, "Write the summary.",
              "You are the summarization and generation agent. Write an "
              "abstractive summary of the given facts and section digests that "
              "satisfies the goal and constraints. Use only information present "
              "in the input.",
              R"({"text": "<summary>"})"};
    case Task::kJudge:
      return {Stage::kFCV, schemas::kJudge, "Judge the edit.",
              "You are the verification agent. Decide whether the edited text "
              "fulfils the operation's goal without distorting the original "
              "meaning. If not, give a specific one-sentence reason and a "
              "category: SemanticInaccuracy, PartialAdherence, NuanceMisread or "
              "Hallucination.",
              R"({"verdict": "yes" | "no", "reason": "", "category": ""})"};
  }
  return {Stage::kLSA, schemas::kText, "", "", ""};
}

}  // namespace

std::string system_prompt(Task task) {
  const TaskSpec s = spec_for(task);
  std::string out(s.role);
  out += "\n\n";
  out += kReasoning;
  out += "\n\nReply with one JSON object matching schema ";
  out += s.schema;
  out += ":\n";
  out += s.answer_shape;
  out += "\nOutput only that JSON object.";
  return out;
}

backend::BackendRequest make_request(Task task, const Json& input,
                                     const std::vector<std::string>& images) {
  const TaskSpec s = spec_for(task);
  backend::BackendRequest req;
  req.stage = s.stage;
  req.system_text = system_prompt(task);
  req.schema_id = std::string(s.schema);
  req.temperature = 0.0;
  req.user_parts.push_back(
      backend::TextPart{std::string(s.header) + "\n" + to_canonical_json(input, 3)});
  for (const auto& img : images) req.user_parts.push_back(backend::ImagePart{img});
  return req;
}

}  // namespace docrefine::prompts
