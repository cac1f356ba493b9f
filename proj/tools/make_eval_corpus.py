#!/usr/bin/env python3
# Copyright 2026 The flakelens Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the 20-image evaluation fixture used by the metrics tests and `eval`.

Images are 128x128 so every box edge is an exact binary fraction once
normalized; IoU values of 0.6 and 0.8 therefore land exactly on thresholds.
The expected AP values below were worked out by hand from the ranked lists
in the comments, not computed from the data.
"""
import json
import pathlib
from fractions import Fraction as F

SIZE = 128
CLASSES = ["thin", "thick", "bulk"]
THIN, THICK, BULK = 0, 1, 2

# image id -> (ground truth [(cls, box)], detections [(cls, conf, box)]); boxes are x0 y0 x1 y1 pixels.
CORPUS = {
    # bulk: 1 GT, a disjoint FP ranked above the exact TP. AP = 0.5 at every threshold.
    "img00": ([(BULK, (10, 10, 40, 40))],
              [(BULK, 0.95, (80, 80, 110, 110)), (BULK, 0.85, (10, 10, 40, 40))]),
    # thick: 4 GTs (img01..img04), ranked 0.92 FP, 0.9 TP, 0.8 IoU .6, 0.7 FP, 0.6 TP, 0.5 FP.
    "img01": ([(THICK, (10, 10, 50, 50))], [(THICK, 0.9, (10, 10, 50, 50))]),
    "img02": ([(THICK, (20, 20, 60, 60))], [(THICK, 0.8, (20, 20, 60, 44))]),
    "img03": ([(THICK, (30, 30, 70, 70))],
              [(THICK, 0.7, (80, 80, 120, 120)), (THICK, 0.6, (30, 30, 70, 70))]),
    "img04": ([(THICK, (0, 0, 40, 40))], []),
    "img05": ([], [(THICK, 0.5, (0, 0, 40, 40))]),
    # thin: 15 GTs.
    "img06": ([(THIN, (0, 0, 20, 20)), (THIN, (30, 0, 50, 20)), (THIN, (60, 0, 80, 20))],
              [(THIN, 0.99, (0, 0, 20, 20)), (THIN, 0.97, (30, 0, 50, 20)), (THIN, 0.93, (60, 0, 76, 20))]),
    "img07": ([(THIN, (0, 0, 30, 30)), (THIN, (40, 40, 70, 70))],
              [(THIN, 0.96, (0, 0, 30, 30)), (THIN, 0.94, (0, 0, 30, 30))]),
    # A thin flake reported as thick: thick FP, thin FN, and a [thin][thick] confusion.
    "img08": ([(THIN, (10, 10, 30, 30))], [(THICK, 0.92, (10, 10, 30, 30))]),
    "img09": ([(THIN, (0, 0, 20, 20))], [(THIN, 0.91, (0, 0, 20, 20))]),
    "img10": ([(THIN, (0, 0, 20, 20))], [(THIN, 0.89, (0, 0, 16, 20))]),
    "img11": ([(THIN, (0, 0, 20, 20))], [(THIN, 0.30, (0, 0, 8, 20))]),
    "img12": ([], []),
    "img13": ([(THIN, (0, 0, 20, 20))], [(THIN, 0.88, (0, 0, 20, 20))]),
    "img14": ([], [(THIN, 0.87, (50, 50, 70, 70))]),
    "img15": ([(THIN, (0, 0, 20, 20))], [(THIN, 0.86, (0, 0, 20, 20))]),
    "img16": ([(THIN, (0, 0, 20, 20)), (THIN, (40, 40, 60, 60))],
              [(THIN, 0.85, (0, 0, 20, 20)), (THIN, 0.84, (40, 40, 60, 60))]),
    "img17": ([(THIN, (0, 0, 20, 20))], []),
    "img18": ([(THIN, (0, 0, 20, 20))], [(THIN, 0.83, (0, 0, 20, 12))]),
    "img19": ([], []),
}

# thin ranking: T T T F(dup) T(.8) T T(.8) T F T T T T(.6) F(.4)
#   t <= .60:      envelope 1 x3, 7/8 x4, 11/13 x4 over 15 GTs -> 257/390
#   .60 < t <= .80: IoU .6 turns FP -> 1 x3, 7/8 x4, 5/6 x3 -> 9/15
#   t > .80:       IoU .8 also FP -> 1 x3, 2/3 x5 -> 19/45
THIN_AP = [F(257, 390)] * 3 + [F(9, 15)] * 4 + [F(19, 45)] * 2
# thick ranking: F T T(.6) F T F over 4 GTs
#   t <= .60: envelope 2/3, 2/3, 3/5 -> 29/60;  t > .60: 1/2, 2/5 -> 9/40
THICK_AP = [F(29, 60)] * 3 + [F(9, 40)] * 6
BULK_AP = [F(1, 2)] * 9

CONFUSION = [  # [gt][pred], last index background
    [11, 1, 0, 3],
    [0, 3, 0, 1],
    [0, 0, 1, 0],
    [3, 2, 1, 0],
]


def norm(box):
    x0, y0, x1, y1 = box
    return ((x0 + x1) / 2 / SIZE, (y0 + y1) / 2 / SIZE, (x1 - x0) / SIZE, (y1 - y0) / SIZE)


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "eval_corpus"
    labels = root / "gt" / "labels"
    pred = root / "pred"
    labels.mkdir(parents=True, exist_ok=True)
    pred.mkdir(parents=True, exist_ok=True)
    (root / "gt" / "classes.txt").write_text("\n".join(CLASSES) + "\n")
    for image_id, (gts, dets) in CORPUS.items():
        lines = [f"{c} " + " ".join(repr(v) for v in norm(b)) for c, b in gts]
        (labels / f"{image_id}.txt").write_text("".join(line + "\n" for line in lines))
        records = [{"class_name": CLASSES[c], "class_id": c, "confidence": conf, "box": list(b)}
                   for c, conf, b in dets]
        (pred / f"{image_id}.json").write_text(
            json.dumps({"image": f"{image_id}.png", "width": SIZE, "height": SIZE, "detections": records}) + "\n")

    per_class = [THIN_AP, THICK_AP, BULK_AP]
    map50 = sum(ap[0] for ap in per_class) / 3
    map50_90 = sum(sum(ap) / 9 for ap in per_class) / 3
    expected = {
        "classes": CLASSES,
        "ap": {name: [float(v) for v in ap] for name, ap in zip(CLASSES, per_class)},
        "mAP50": float(map50),
        "mAP50-90": float(map50_90),
        "mAP50_fraction": str(map50),
        "mAP50-90_fraction": str(map50_90),
        "confusion_matrix": CONFUSION,
    }
    (root / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")


if __name__ == "__main__":
    main()
