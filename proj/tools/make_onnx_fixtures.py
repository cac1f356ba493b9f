#!/usr/bin/env python3
# Copyright 2026 The flakelens Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes single-operator ONNX test cases under tests/fixtures/onnx/<case>/.

Each case holds model.onnx, float inputs input_<k>.pb and expected outputs
output_<k>.pb computed by onnx.reference. Integer operands (shapes, axes,
indices) are graph initializers so that every graph input is float.
"""

import argparse
import pathlib
import shutil

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper
from onnx.reference import ReferenceEvaluator

RNG = np.random.default_rng(7)


def rand(*shape):
    return RNG.normal(0.0, 1.0, size=shape).astype(np.float32)


def i64(name, values):
    return numpy_helper.from_array(np.array(values, dtype=np.int64), name)


def f32(name, values):
    return numpy_helper.from_array(np.array(values, dtype=np.float32), name)


CASES = {}


def case(name, opset=17):
    def register(fn):
        CASES[name] = (fn, opset)
        return fn
    return register


def single(op, inputs, n_out=1, inits=(), **attrs):
    """Node consuming graph inputs x0..xk (floats) followed by named initializers."""
    names = [f"x{k}" for k in range(len(inputs))] + [t.name if t is not None else "" for t in inits]
    outs = [f"y{k}" for k in range(n_out)]
    node = helper.make_node(op, names, outs, **attrs)
    return [node], inputs, outs, [t for t in inits if t is not None]


@case("conv_pads_strides")
def _():
    return single("Conv", [rand(1, 3, 9, 11), rand(4, 3, 3, 3), rand(4)], kernel_shape=[3, 3], strides=[2, 1],
                  pads=[1, 0, 2, 1])


@case("conv_group_dilation")
def _():
    return single("Conv", [rand(2, 4, 10, 10), rand(6, 2, 3, 3)], group=2, dilations=[2, 1], pads=[1, 1, 1, 1])


@case("conv_same_upper")
def _():
    return single("Conv", [rand(1, 2, 7, 8), rand(3, 2, 4, 3), rand(3)], auto_pad="SAME_UPPER", strides=[2, 2])


@case("conv_depthwise")
def _():
    return single("Conv", [rand(1, 5, 6, 6), rand(5, 1, 3, 3), rand(5)], group=5, pads=[1, 1, 1, 1])


@case("conv_transpose")
def _():
    return single("ConvTranspose", [rand(1, 3, 4, 5), rand(3, 2, 3, 3), rand(2)], strides=[2, 2], pads=[1, 1, 1, 1],
                  output_padding=[1, 0])


@case("conv_transpose_k2s2")
def _():
    return single("ConvTranspose", [rand(1, 4, 3, 3), rand(4, 3, 2, 2), rand(3)], strides=[2, 2])


@case("maxpool_ceil")
def _():
    return single("MaxPool", [rand(1, 2, 7, 7)], kernel_shape=[3, 3], strides=[2, 2], ceil_mode=1)


@case("maxpool_pads")
def _():
    return single("MaxPool", [rand(1, 2, 8, 6)], kernel_shape=[5, 5], pads=[2, 2, 2, 2])


@case("avgpool_include_pad")
def _():
    return single("AveragePool", [rand(1, 2, 6, 6)], kernel_shape=[3, 3], strides=[2, 2], pads=[1, 1, 1, 1],
                  count_include_pad=1)


@case("avgpool_exclude_pad")
def _():
    return single("AveragePool", [rand(1, 2, 6, 5)], kernel_shape=[3, 2], pads=[1, 1, 1, 0])


@case("global_average_pool")
def _():
    return single("GlobalAveragePool", [rand(2, 3, 5, 4)])


@case("resize_nearest_asymmetric")
def _():
    return single("Resize", [rand(1, 2, 3, 4)], inits=[None, f32("s", [1, 1, 2, 2])], mode="nearest",
                  coordinate_transformation_mode="asymmetric", nearest_mode="floor")


@case("resize_nearest_half_pixel_sizes")
def _():
    return single("Resize", [rand(1, 1, 5, 4)], inits=[None, None, i64("sz", [1, 1, 7, 9])], mode="nearest")


@case("resize_linear_half_pixel")
def _():
    return single("Resize", [rand(1, 2, 4, 4)], inits=[None, f32("s", [1, 1, 2.5, 1.5])], mode="linear")


@case("resize_linear_align_corners")
def _():
    return single("Resize", [rand(1, 1, 3, 5)], inits=[None, None, i64("sz", [1, 1, 6, 4])], mode="linear",
                  coordinate_transformation_mode="align_corners")


@case("resize_linear_pytorch_half_pixel")
def _():
    return single("Resize", [rand(1, 1, 6, 6)], inits=[None, f32("s", [1, 1, 0.5, 0.5])], mode="linear",
                  coordinate_transformation_mode="pytorch_half_pixel")


@case("upsample_opset9", opset=9)
def _():
    return single("Upsample", [rand(1, 2, 3, 3)], inits=[f32("s", [1, 1, 2, 3])], mode="nearest")


@case("add_broadcast")
def _():
    return single("Add", [rand(2, 3, 4), rand(3, 1)])


@case("mul_broadcast_both")
def _():
    return single("Mul", [rand(2, 1, 4), rand(1, 3, 1)])


@case("div_scalar")
def _():
    return single("Div", [rand(3, 4), np.array(2.5, dtype=np.float32)])


@case("sub_pow")
def _():
    return single("Pow", [np.abs(rand(2, 5)) + 0.1, rand(5)])


@case("unary_chain")
def _():
    x = rand(3, 7)
    nodes = [helper.make_node("Sigmoid", ["x0"], ["a"]), helper.make_node("Tanh", ["a"], ["b"]),
             helper.make_node("Exp", ["b"], ["c"]), helper.make_node("Log", ["c"], ["d"]),
             helper.make_node("Neg", ["d"], ["e"]), helper.make_node("Abs", ["e"], ["f"]),
             helper.make_node("Sqrt", ["f"], ["g"]), helper.make_node("Relu", ["x0"], ["h"]),
             helper.make_node("Add", ["g", "h"], ["y0"])]
    return nodes, [x], ["y0"], []


@case("floor_ceil")
def _():
    x = rand(4, 4) * 3
    nodes = [helper.make_node("Floor", ["x0"], ["y0"]), helper.make_node("Ceil", ["x0"], ["y1"])]
    return nodes, [x], ["y0", "y1"], []


@case("leaky_hard_activations")
def _():
    x = rand(2, 9) * 4
    nodes = [helper.make_node("LeakyRelu", ["x0"], ["y0"], alpha=0.2),
             helper.make_node("HardSigmoid", ["x0"], ["y1"], alpha=0.3, beta=0.4),
             helper.make_node("HardSwish", ["x0"], ["y2"])]
    return nodes, [x], ["y0", "y1", "y2"], []


@case("clip_min_max")
def _():
    return single("Clip", [rand(3, 3) * 3], inits=[f32("lo", -0.5), f32("hi", 1.0)])


@case("min_max_variadic")
def _():
    a, b, c = rand(2, 3), rand(3), rand(2, 1)
    nodes = [helper.make_node("Max", ["x0", "x1", "x2"], ["y0"]), helper.make_node("Min", ["x0", "x1", "x2"], ["y1"])]
    return nodes, [a, b, c], ["y0", "y1"], []


@case("concat_axis_neg")
def _():
    return single("Concat", [rand(2, 3, 2), rand(2, 3, 4), rand(2, 3, 1)], axis=-1)


@case("split_sizes")
def _():
    return single("Split", [rand(2, 9)], n_out=3, inits=[i64("sp", [2, 3, 4])], axis=1)


@case("split_equal")
def _():
    return single("Split", [rand(6, 2)], n_out=3)


@case("split_num_outputs", opset=18)
def _():
    return single("Split", [rand(7, 2)], n_out=3, num_outputs=3)


@case("slice_steps")
def _():
    return single("Slice", [rand(5, 6, 4)],
                  inits=[i64("st", [-1, 1]), i64("en", [-100, 5]), i64("ax", [0, 1]), i64("sp", [-2, 2])])


@case("slice_clamped")
def _():
    return single("Slice", [rand(4, 5)], inits=[i64("st", [1]), i64("en", [1000]), i64("ax", [-1])])


@case("reshape_zero_infer")
def _():
    return single("Reshape", [rand(2, 3, 4)], inits=[i64("sh", [0, -1, 2])])


@case("flatten_axis2")
def _():
    return single("Flatten", [rand(2, 3, 4, 5)], axis=2)


@case("transpose_perm")
def _():
    return single("Transpose", [rand(2, 3, 4, 5)], perm=[0, 2, 3, 1])


@case("squeeze_unsqueeze")
def _():
    nodes = [helper.make_node("Unsqueeze", ["x0", "ua"], ["u"]), helper.make_node("Squeeze", ["u", "sa"], ["y0"]),
             helper.make_node("Squeeze", ["x0"], ["y1"])]
    return nodes, [rand(3, 1, 4)], ["y0", "y1"], [i64("ua", [0, -1]), i64("sa", [2])]


@case("gather_axis1")
def _():
    return single("Gather", [rand(3, 5, 2)], inits=[i64("ix", [[4, 0], [-1, 2]])], axis=1)


@case("dynamic_shape_chain")
def _():
    # Shape -> Gather -> Unsqueeze -> Concat -> Reshape, as emitted by exporters.
    nodes = [helper.make_node("Shape", ["x0"], ["s"]),
             helper.make_node("Gather", ["s", "i0"], ["d0"], axis=0),
             helper.make_node("Unsqueeze", ["d0", "ax"], ["d0u"]),
             helper.make_node("Concat", ["d0u", "m1"], ["target"], axis=0),
             helper.make_node("Reshape", ["x0", "target"], ["r"]),
             helper.make_node("Shape", ["x0"], ["tail"], start=-2),
             helper.make_node("Cast", ["tail"], ["tailf"], to=TensorProto.FLOAT),
             helper.make_node("Identity", ["tailf"], ["y1"]),
             helper.make_node("Identity", ["r"], ["y0"])]
    return nodes, [rand(2, 3, 4)], ["y0", "y1"], [i64("i0", 0), i64("ax", [0]), i64("m1", [-1])]


@case("constant_expand_range")
def _():
    nodes = [helper.make_node("Constant", [], ["c"], value=numpy_helper.from_array(np.array([[1.5], [2.0]], np.float32))),
             helper.make_node("Expand", ["c", "shp"], ["e"]),
             helper.make_node("Add", ["e", "x0"], ["y0"]),
             helper.make_node("ConstantOfShape", ["shp"], ["z"],
                              value=numpy_helper.from_array(np.array([3], np.int64))),
             helper.make_node("Cast", ["z"], ["y1"], to=TensorProto.FLOAT),
             helper.make_node("Range", ["r0", "r1", "r2"], ["r"]),
             helper.make_node("Cast", ["r"], ["y2"], to=TensorProto.FLOAT)]
    return nodes, [rand(2, 3)], ["y0", "y1", "y2"], [i64("shp", [2, 3]), i64("r0", 2), i64("r1", 11), i64("r2", 3)]


@case("softmax_opset11", opset=11)
def _():
    # onnx.reference applies the opset-13 per-axis rule to every version, so the
    # expected output is computed here with the older flatten-to-2D semantics.
    x = rand(2, 3, 4)
    flat = x.reshape(2, 12)
    e = np.exp(flat - flat.max(axis=1, keepdims=True))
    expected = (e / e.sum(axis=1, keepdims=True)).reshape(2, 3, 4)
    return single("Softmax", [x], axis=1) + ([expected],)


@case("softmax_axis")
def _():
    return single("Softmax", [rand(2, 3, 4)], axis=1)


@case("matmul_batched")
def _():
    return single("MatMul", [rand(2, 1, 3, 4), rand(3, 4, 5)])


@case("matmul_vector")
def _():
    return single("MatMul", [rand(4), rand(2, 4, 3)])


@case("gemm_transposed")
def _():
    return single("Gemm", [rand(4, 3), rand(5, 4), rand(5)], transA=1, transB=1, alpha=0.5, beta=2.0)


def write_case(root, name, fn, opset):
    nodes, inputs, outs, inits, *override = fn()
    graph_inputs = [helper.make_tensor_value_info(f"x{k}", TensorProto.FLOAT, list(v.shape))
                    for k, v in enumerate(inputs)]
    feeds = {f"x{k}": v for k, v in enumerate(inputs)}

    def make(shapes):
        graph_outputs = [helper.make_tensor_value_info(o, TensorProto.FLOAT, s) for o, s in zip(outs, shapes)]
        graph = helper.make_graph(nodes, name, graph_inputs, graph_outputs, list(inits))
        m = helper.make_model(graph, opset_imports=[helper.make_opsetid("", opset)])
        m.ir_version = 7 if opset < 15 else 8
        return m

    # Output shapes are taken from a first reference run.
    results = ReferenceEvaluator(make([None] * len(outs))).run(None, feeds)
    model = make([list(np.asarray(r).shape) for r in results])
    onnx.checker.check_model(model)
    if override:
        results = override[0]
    d = root / name
    d.mkdir(parents=True)
    onnx.save(model, d / "model.onnx")
    for k, v in enumerate(inputs):
        (d / f"input_{k}.pb").write_bytes(numpy_helper.from_array(v, f"x{k}").SerializeToString())
    for k, v in enumerate(results):
        arr = np.asarray(v).astype(np.float32)
        (d / f"output_{k}.pb").write_bytes(numpy_helper.from_array(arr, outs[k]).SerializeToString())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "onnx")
    args = ap.parse_args()
    if args.out.exists():
        shutil.rmtree(args.out)
    for name, (fn, opset) in CASES.items():
        write_case(args.out, name, fn, opset)
    # A graph using an operator the interpreter does not implement.
    node = helper.make_node("Einsum", ["x0", "x0"], ["y0"], equation="ij,ij->i")
    graph = helper.make_graph([node], "unsupported", [helper.make_tensor_value_info("x0", TensorProto.FLOAT, [2, 2])],
                              [helper.make_tensor_value_info("y0", TensorProto.FLOAT, [2])])
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 17)])
    model.ir_version = 8
    onnx.save(model, args.out.parent / "unsupported_op.onnx")
    print(f"wrote {len(CASES)} cases to {args.out}")


if __name__ == "__main__":
    main()
