#!/usr/bin/env python3
# Copyright 2026 The flakelens Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes models/tiny_seg.onnx (+ manifest) and its reference outputs.

The network is a random-weight miniature of a YOLO-style segmenter: strided
SiLU convolutions, a prototype branch with max-pool and nearest upsampling,
and a head emitting [1, 4 + 3 + 8, 400] candidates. Reference outputs for a
deterministic input pattern are computed with onnx.reference and stored as
TensorProto files for the C++ interpreter tests.
"""

import argparse
import json
import pathlib

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper
from onnx.reference import ReferenceEvaluator

CLASSES = ["thin", "thick", "bulk"]
NM = 8
SIZE = 640


def input_pattern(size=SIZE):
    """Same formula as tests/unit/tiny_model_test.cpp: ((i * 7919) % 256) / 255."""
    i = np.arange(3 * size * size, dtype=np.int64)
    return (((i * 7919) % 256) / 255.0).astype(np.float32).reshape(1, 3, size, size)


def build(seed):
    rng = np.random.default_rng(seed)
    inits, nodes = [], []

    def weight(name, shape):
        fan_in = int(np.prod(shape[1:]))
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape).astype(np.float32)
        inits.append(numpy_helper.from_array(w, name))
        return name

    def bias(name, n):
        inits.append(numpy_helper.from_array(rng.normal(0.0, 0.1, size=(n,)).astype(np.float32), name))
        return name

    def conv(x, name, cin, cout, k, stride, silu=True):
        pad = k // 2
        out = name if not silu else name + "_pre"
        nodes.append(helper.make_node(
            "Conv", [x, weight(name + ".w", (cout, cin, k, k)), bias(name + ".b", cout)], [out],
            name=name, kernel_shape=[k, k], strides=[stride, stride], pads=[pad] * 4))
        if not silu:
            return out
        nodes.append(helper.make_node("Sigmoid", [out], [name + "_sig"], name=name + "_sig"))
        nodes.append(helper.make_node("Mul", [out, name + "_sig"], [name], name=name + "_silu"))
        return name

    x = conv("images", "stem", 3, 8, 3, 2)
    x = conv(x, "down1", 8, 16, 3, 2)
    # prototype branch: 160 -> 80 -> 160
    nodes.append(helper.make_node("MaxPool", [x], ["proto_pool"], name="proto_pool",
                                  kernel_shape=[2, 2], strides=[2, 2]))
    p = conv("proto_pool", "proto_conv", 16, NM, 3, 1, silu=False)
    inits.append(numpy_helper.from_array(np.array([1, 1, 2, 2], dtype=np.float32), "proto_scales"))
    nodes.append(helper.make_node("Resize", [p, "", "proto_scales"], ["output1"], name="proto_up",
                                  mode="nearest", coordinate_transformation_mode="asymmetric",
                                  nearest_mode="floor"))
    # trunk: 160 -> 80 -> 40 -> 20
    x = conv(x, "down2", 16, 16, 3, 2)
    x = conv(x, "down3", 16, 32, 3, 2)
    x = conv(x, "down4", 32, 32, 3, 2)
    channels = 4 + len(CLASSES) + NM
    h = conv(x, "head", 32, channels, 1, 1, silu=False)
    inits.append(numpy_helper.from_array(np.array([1, channels, -1], dtype=np.int64), "head_shape"))
    nodes.append(helper.make_node("Reshape", [h, "head_shape"], ["head_flat"], name="head_flat"))
    inits.append(numpy_helper.from_array(np.array([4, len(CLASSES), NM], dtype=np.int64), "head_split"))
    nodes.append(helper.make_node("Split", ["head_flat", "head_split"], ["box_raw", "cls_raw", "coef"],
                                  name="head_split", axis=1))
    nodes.append(helper.make_node("Sigmoid", ["box_raw"], ["box_sig"], name="box_sig"))
    inits.append(numpy_helper.from_array(
        np.array([SIZE, SIZE, SIZE / 5, SIZE / 5], dtype=np.float32).reshape(1, 4, 1), "box_gain"))
    nodes.append(helper.make_node("Mul", ["box_sig", "box_gain"], ["box"], name="box_scale"))
    nodes.append(helper.make_node("Sigmoid", ["cls_raw"], ["cls"], name="cls_sig"))
    nodes.append(helper.make_node("Concat", ["box", "cls", "coef"], ["output0"], name="head_concat", axis=1))

    graph = helper.make_graph(
        nodes, "tiny_seg",
        [helper.make_tensor_value_info("images", TensorProto.FLOAT, [1, 3, SIZE, SIZE])],
        [helper.make_tensor_value_info("output0", TensorProto.FLOAT, [1, channels, 400]),
         helper.make_tensor_value_info("output1", TensorProto.FLOAT, [1, NM, SIZE // 4, SIZE // 4])],
        inits)
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 17)], producer_name="flakelens")
    model.ir_version = 8
    onnx.checker.check_model(model, full_check=True)
    return model


def manifest():
    return {
        "model_path": "tiny_seg.onnx",
        "task": "segment",
        "input_size": SIZE,
        "class_set": CLASSES,
        "layout": {
            "input": "images",
            "outputs": [{"name": "output0", "shape": [1, 4 + len(CLASSES) + NM, 400]},
                        {"name": "output1", "shape": [1, NM, SIZE // 4, SIZE // 4]}],
            "predictions": "output0",
            "prototypes": "output1",
            "anchors_last": True,
            "slots": ["box", "scores", "coefficients"],
            "box_format": "cxcywh",
            "num_coefficients": NM,
            "scores_are_logits": False,
        },
        "pixel_norm": 1.0 / 255.0,
        "defaults": {"confidence": 0.25, "iou": 0.45},
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default=pathlib.Path(__file__).resolve().parent.parent, type=pathlib.Path)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    model = build(args.seed)
    models = args.root / "models"
    models.mkdir(exist_ok=True)
    onnx.save(model, models / "tiny_seg.onnx")
    (models / "tiny_seg.manifest").write_text(json.dumps(manifest(), indent=2) + "\n")

    ref = args.root / "tests" / "fixtures" / "tiny_seg"
    ref.mkdir(parents=True, exist_ok=True)
    out0, out1 = ReferenceEvaluator(model).run(None, {"images": input_pattern()})
    for name, arr in (("output_0.pb", out0), ("output_1.pb", out1)):
        (ref / name).write_bytes(numpy_helper.from_array(arr.astype(np.float32)).SerializeToString())
    print("output0", out0.shape, float(out0.min()), float(out0.max()))
    print("output1", out1.shape, float(out1.min()), float(out1.max()))


if __name__ == "__main__":
    main()
