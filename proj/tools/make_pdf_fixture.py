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

"""Writes tests/fixtures/two_page.pdf with reportlab.

Page 1 holds a title, a heading, two paragraphs, an image and its caption.
Page 2 holds a heading, one paragraph and a footnote.
"""

import argparse

from reportlab.lib.pagesizes import letter
from reportlab.lib.utils import ImageReader
from reportlab.pdfgen import canvas
from PIL import Image

H = letter[1]


def text(c, x, top, size, lines, font="Helvetica"):
    c.setFont(font, size)
    y = H - top - size
    for line in lines:
        c.drawString(x, y, line)
        y -= size * 1.2


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="tests/fixtures/two_page.pdf")
    args = parser.parse_args()
    c = canvas.Canvas(args.out, pagesize=letter, invariant=1)

    text(c, 72, 60, 20, ["Layout Aware Editing"], "Helvetica-Bold")
    text(c, 72, 110, 14, ["1 Introduction"], "Helvetica-Bold")
    text(c, 72, 140, 10, ["Documents mix text, tables and figures on one page.",
                          "Editing them should keep the layout intact."])
    text(c, 72, 190, 10, ["We describe a pipeline that analyzes, edits and verifies.",
                          "Every stage works on a shared representation."])
    img = Image.new("RGB", (64, 32), (200, 30, 30))
    c.drawImage(ImageReader(img), 72, H - 400, width=300, height=150)
    text(c, 72, 410, 9, ["Figure 1: Overview of the pipeline."])
    c.showPage()

    text(c, 72, 72, 14, ["2 Method"], "Helvetica-Bold")
    text(c, 72, 100, 10, ["The analyzer orders blocks with a recursive cut."])
    text(c, 72, 740, 7, ["1 Code is available on request."])
    c.showPage()
    c.save()


if __name__ == "__main__":
    main()
