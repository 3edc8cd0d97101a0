#!/usr/bin/env python3
"""Serializes small ONNX models with the reference `onnx` package so the
protobuf reader is tested against a real exporter's bytes."""

import pathlib

import onnx
from onnx import TensorProto, helper

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures" / "onnx"


def vi(name):
    return helper.make_tensor_value_info(name, TensorProto.FLOAT, [1, 4])


def save(graph, filename):
    model = helper.make_model(graph, producer_name="fixture", opset_imports=[helper.make_opsetid("", 13)])
    onnx.checker.check_model(model)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / filename).write_bytes(model.SerializeToString())


def main():
    relu = helper.make_node("Relu", ["x"], ["y"], name="n1")
    save(helper.make_graph([relu], "m1", [vi("x")], [vi("y")]), "m1.onnx")

    save(helper.make_graph([], "empty", [vi("x")], [vi("x")]), "empty.onnx")

    # Converted form of a max-with-indices op: ArgMax and ReduceMax side by
    # side, plus an initializer and an unnamed node.
    shape = helper.make_tensor("shape", TensorProto.INT64, [2], [1, 4])
    nodes = [
        helper.make_node("Reshape", ["x", "shape"], ["r"], name="reshape"),
        helper.make_node("ArgMax", ["r"], ["idx"], name="argmax", axis=1, keepdims=0),
        helper.make_node("ReduceMax", ["r"], ["val"], keepdims=0),
    ]
    g = helper.make_graph(nodes, "torch_jit", [vi("x")],
                          [helper.make_tensor_value_info("idx", TensorProto.INT64, [1]),
                           helper.make_tensor_value_info("val", TensorProto.FLOAT, [1])],
                          initializer=[shape])
    save(g, "argmax_reducemax.onnx")
    print(f"wrote ONNX fixtures to {OUT}")


if __name__ == "__main__":
    main()
