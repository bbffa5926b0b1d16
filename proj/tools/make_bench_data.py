#!/usr/bin/env python3
# Copyright 2026 The DocRefine Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the synthetic gold-echo benchmark under data/bench.

Each case is a small layout, an instruction, the hand-written gold result and
a mock script whose model answers are the gold content. Gold IRs are built by
running `docrefine analyze` over the gold layout.

Usage: make_bench_data.py --cli build/tools/docrefine [--out data/bench]
"""

import argparse
import copy
import json
import pathlib
import subprocess
import tempfile

PAGE = {"width": 612, "height": 792}

MCU_DEFAULT = {"facts": [], "entities": [], "digest": ""}
JUDGE_YES = {"verdict": "yes", "reason": "", "category": ""}


def el(id_, kind, box, text="", level=None):
    e = {
        "id": id_,
        "kind": kind,
        "bbox": {"page_index": 0, "x0": box[0], "y0": box[1], "x1": box[2], "y1": box[3]},
        "text": text,
    }
    if level is not None:
        e["heading_level"] = level
    return e


def layout(elements):
    return {"pages": [PAGE], "elements": elements}


def replace_text(elements, id_, text):
    out = copy.deepcopy(elements)
    for e in out:
        if e["id"] == id_:
            e["text"] = text
    return out


def needle(text):
    return "contains:" + text[:40]


def mock(ops, cra=None, sga=None, figure=None):
    script = {
        "IDA": {"default": {"ops": ops}},
        "MCU": {"default": MCU_DEFAULT},
        "FCV": {"default": JUDGE_YES},
    }
    if figure is not None:
        script["MCU"]["contains:Describe the figure."] = {"description": figure}
    if cra:
        script["CRA"] = {}
        for before, after in cra:
            script["CRA"][needle(before)] = {"text": after}
            script["CRA"][needle(after)] = {"text": after}
    if sga is not None:
        script["SGA"] = {"default": {"text": sga}}
    return script


INTRO = [
    el("h1", "Heading", (72, 72, 540, 92), "1 Introduction", 1),
    el("p1", "Paragraph", (72, 100, 540, 196),
       "In this work we are going to be presenting a new method that is able to "
       "detect the layout of scientific documents in a way that is more accurate "
       "than the methods that have been used in the past by other researchers."),
    el("p2", "Paragraph", (72, 204, 540, 280),
       "The remainder of the paper describes the method, the data and the results."),
]
P1_GOLD = ("We present a layout detection method for scientific documents that is "
           "more accurate than prior approaches.")

TABLE = [
    el("h1", "Heading", (72, 72, 540, 92), "4 Experiments", 1),
    el("p1", "Paragraph", (72, 100, 540, 160),
       "Table 1 compares the baseline with our model on the held-out test set."),
    el("t1", "Table", (72, 170, 540, 250),
       "Model\tAccuracy\nBaseline\t71.2\nOurs\t84.5"),
    el("c1", "Caption", (72, 256, 540, 272), "Table 1: Accuracy on the test set."),
]

DELETE = [
    el("h1", "Heading", (72, 72, 540, 92), "2 Related Work", 1),
    el("p1", "Paragraph", (72, 100, 540, 160),
       "Early systems relied on hand-written rules for page segmentation."),
    el("p2", "Paragraph", (72, 168, 540, 228),
       "This paragraph repeats the previous one and adds nothing new."),
    el("p3", "Paragraph", (72, 236, 540, 296),
       "Learned detectors later replaced rule-based segmentation."),
]

RESULTS = [
    el("h1", "Heading", (72, 72, 540, 92), "3 Results", 1),
    el("p1", "Paragraph", (72, 100, 540, 160),
       "Our model reaches 84.5 percent accuracy on the test set."),
    el("p2", "Paragraph", (72, 168, 540, 228),
       "Inference takes 12 milliseconds per page on a single GPU."),
]
SUMMARY = "The model reaches 84.5 percent accuracy and needs 12 milliseconds per page."
SUMMARY_BOX = {"x0": 72, "y0": 236, "x1": 540, "y1": 276}

FIGURE = [
    el("h1", "Heading", (72, 72, 540, 92), "5 Analysis", 1),
    el("f1", "Figure", (72, 100, 540, 380)),
    el("c1", "Caption", (72, 386, 540, 402), "Figure 1: Results."),
    el("p1", "Paragraph", (72, 410, 540, 470),
       "Figure 1 plots accuracy against latency for every model we trained."),
]
CAPTION_GOLD = "Figure 1: Accuracy and latency of each model."


def cases():
    yield ("case01_rewrite_intro", "text_refinement",
           "Make the first paragraph of the introduction more concise.",
           INTRO, replace_text(INTRO, "p1", P1_GOLD),
           mock([{"kind": "RewriteText", "target": {"element": "p1"},
                  "payload": {"goal": "make the paragraph more concise"}}],
                cra=[(INTRO[1]["text"], P1_GOLD)]))

    yield ("case02_table_cell", "structural_editing",
           "Correct the accuracy of our model in Table 1 to 85.4.",
           TABLE, replace_text(TABLE, "t1", "Model\tAccuracy\nBaseline\t71.2\nOurs\t85.4"),
           mock([{"kind": "CorrectTableCell", "target": {"table": "t1", "row": 2, "col": 1},
                  "payload": {"value": "85.4"}}]))

    yield ("case03_delete_paragraph", "structural_editing",
           "Remove the redundant second paragraph of the related work section.",
           DELETE, [e for e in DELETE if e["id"] != "p2"],
           mock([{"kind": "DeleteText", "target": {"element": "p2"}, "payload": {}}]))

    summary_el = el("s1", "Paragraph", (SUMMARY_BOX["x0"], SUMMARY_BOX["y0"],
                                         SUMMARY_BOX["x1"], SUMMARY_BOX["y1"]), SUMMARY)
    yield ("case04_section_summary", "summarization",
           "Add a summary of Section 3 of at most 30 words after its last paragraph.",
           RESULTS, RESULTS + [summary_el],
           mock([{"kind": "GenerateSummary", "target": {"section": "h1"},
                  "payload": {"goal": "summarize the key findings", "max_length": 30,
                              "insert": {"id": "s1", "after": "p2", "bbox": SUMMARY_BOX}}}],
                sga=SUMMARY))

    yield ("case05_figure_caption", "multimodal_correction",
           "Update the caption of Figure 1 so it mentions accuracy and latency.",
           FIGURE, replace_text(FIGURE, "c1", CAPTION_GOLD),
           mock([{"kind": "UpdateCaption", "target": {"element": "c1"},
                  "payload": {"goal": "describe what the figure shows",
                              "key_terms": ["accuracy", "latency"]}}],
                cra=[(FIGURE[2]["text"], CAPTION_GOLD)],
                figure="Scatter plot of accuracy against latency."))


def dump(path, value):
    path.write_text(json.dumps(value, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--cli", required=True)
    parser.add_argument("--out", default="data/bench")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    for name, category, instruction, before, after, script in cases():
        d = out / name
        d.mkdir(parents=True, exist_ok=True)
        dump(d / "input.ir.json", layout(before))
        (d / "instruction.txt").write_text(instruction + "\n", encoding="utf-8")
        dump(d / "meta.json", {"category": category})
        dump(d / "mock.json", script)
        with tempfile.TemporaryDirectory() as tmp:
            gold_layout = pathlib.Path(tmp) / "gold.layout.json"
            dump(gold_layout, layout(after))
            subprocess.run([args.cli, "analyze", str(gold_layout), str(d / "gold.ir.json")],
                           check=True, stdout=subprocess.DEVNULL)


if __name__ == "__main__":
    main()
