#!/usr/bin/env python3
"""Writes the committed test fixtures under data/fixtures/.

Tensor dumps are packed here with `struct`, independently of the C++
encoder, so the decoder is tested against a second implementation.
Expected tallies (classify/expected_*.json) are written by hand and left
untouched here; expected_counts.json files come from seq_oracle.py.
"""

import json
import pathlib
import struct

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"

DTYPES = {"f32": (1, "f"), "f64": (2, "d"), "i64": (3, "q")}


def tensor_dump(dtype, shape, values):
    code, fmt = DTYPES[dtype]
    out = b"TDMP" + struct.pack("<HBB", 1, code, len(shape))
    out += b"".join(struct.pack("<Q", d) for d in shape)
    out += struct.pack("<" + fmt * len(values), *values)
    return out


def write_graph(path, model_id, inputs, outputs, nodes):
    doc = {"model_id": model_id, "inputs": inputs, "outputs": outputs,
           "nodes": [{"id": i, "op_type": op, "inputs": ins, "outputs": outs} for i, op, ins, outs in nodes]}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")


def chain(path, model_id, ops):
    nodes = []
    prev = "x"
    for k, op in enumerate(ops, start=1):
        out = f"t{k}"
        nodes.append((f"n{k}", op, [prev], [out]))
        prev = out
    write_graph(path, model_id, ["x"], [prev], nodes)


def seqs_trio(base):
    mm, cc, ts = base / "mismatched", base / "correct", base / "testsuite"
    chain(mm / "mm_a.json", "mm_a", ["Conv", "Relu", "MaxPool", "Flatten", "Gemm", "Softmax"])
    write_graph(mm / "mm_b.json", "mm_b", ["x"], ["d", "e"], [
        ("n1", "Conv", ["x"], ["a"]),
        ("n2", "Relu", ["a"], ["b"]),
        ("n3", "MaxPool", ["b"], ["c"]),
        ("n4", "ArgMax", ["c"], ["d"]),
        ("n5", "ReduceMax", ["c"], ["e"]),
    ])
    chain(mm / "mm_c.json", "mm_c", ["Transpose", "Conv", "Relu", "MaxPool", "ArgMax", "Cast"])
    chain(cc / "c_a.json", "c_a", ["Conv", "Relu", "MaxPool", "Flatten", "Gemm"])
    chain(cc / "c_b.json", "c_b", ["MatMul", "Add", "Relu", "MatMul", "Add", "Softmax"])
    write_graph(cc / "c_c.json", "c_c", ["x"], ["y"], [
        ("n1", "Conv", ["x"], ["a"]),
        ("n2", "Relu", ["a"], ["b"]),
        ("n3", "Sigmoid", ["a"], ["c"]),
        ("n4", "Mul", ["c"], ["d"]),
        ("n5", "Add", ["b", "d"], ["e"]),
        ("n6", "Softmax", ["e"], ["y"]),
    ])
    chain(ts / "t_a.json", "t_a", ["Conv", "Relu", "MaxPool"])
    chain(ts / "t_b.json", "t_b", ["Transpose", "Conv", "Relu", "ArgMax"])


def ops_h1_overlap(base):
    # 20 mismatched operator types, 19 of them also in correct models:
    # Jaccard 19/20 = 0.95.
    ops = ["Abs", "Add", "ArgMax", "AveragePool", "BatchNormalization", "Cast", "Concat", "Conv", "Div",
           "Flatten", "Gather", "Gemm", "MatMul", "MaxPool", "Mul", "ReduceMax", "Relu", "Reshape",
           "Softmax", "Transpose"]
    chain(base / "mismatched" / "m1.json", "m1", ops[:10])
    chain(base / "mismatched" / "m2.json", "m2", ops[10:])
    chain(base / "correct" / "c1.json", "c1", ops[:10])
    chain(base / "correct" / "c2.json", "c2", ops[10:19])
    chain(base / "testsuite" / "t1.json", "t1", ops[:5])


def h2_fixtures(base):
    # Supported: one run present in every mismatched model, absent from the
    # correct ones.
    sup = base / "supported"
    chain(sup / "mismatched" / "m1.json", "m1", ["Conv", "Erf", "Tanh", "Relu"])
    chain(sup / "mismatched" / "m2.json", "m2", ["Add", "Conv", "Erf", "Tanh"])
    chain(sup / "mismatched" / "m3.json", "m3", ["Conv", "Erf", "Tanh", "Sigmoid"])
    chain(sup / "correct" / "c1.json", "c1", ["Conv", "Erf", "Relu"])
    chain(sup / "correct" / "c2.json", "c2", ["Add", "Conv", "Relu"])
    chain(sup / "testsuite" / "t1.json", "t1", ["Conv", "Erf"])
    # Rejected: candidate runs each occurring in exactly one mismatched model.
    rej = base / "rejected"
    chain(rej / "mismatched" / "m1.json", "m1", ["Conv", "Relu", "MaxPool", "Flatten"])
    chain(rej / "mismatched" / "m2.json", "m2", ["MatMul", "Add", "Softmax"])
    chain(rej / "mismatched" / "m3.json", "m3", ["Gather", "Reshape", "Transpose", "Cast"])
    (rej / "candidates.json").write_text(json.dumps([
        ["Conv", "Relu", "MaxPool"],
        ["MatMul", "Add", "Softmax"],
        ["Reshape", "Transpose", "Cast"],
    ], indent=1) + "\n")


def classify_fixture(base):
    dumps = base / "dumps"
    dumps.mkdir(parents=True, exist_ok=True)
    ones = [1.0] * 6
    (dumps / "ones_a.tdmp").write_bytes(tensor_dump("f32", [2, 3], ones))
    (dumps / "ones_b.tdmp").write_bytes(tensor_dump("f32", [2, 3], ones))
    (dumps / "ones_3x2.tdmp").write_bytes(tensor_dump("f32", [3, 2], ones))
    (dumps / "off_1e-3.tdmp").write_bytes(tensor_dump("f32", [2, 3], [1.0, 1.0, 1.0, 1.0, 1.0, 1.0009765625]))
    (dumps / "base_f64.tdmp").write_bytes(tensor_dump("f64", [4], [0.0, 0.5, -2.0, 3.0]))
    (dumps / "near_f64.tdmp").write_bytes(tensor_dump("f64", [4], [0.0, 0.5 + 9.99e-8, -2.0, 3.0]))
    (dumps / "idx_i64.tdmp").write_bytes(tensor_dump("i64", [2], [4, 7]))
    (dumps / "scalar_f32.tdmp").write_bytes(tensor_dump("f32", [], [2.5]))

    same = [{"original": "dumps/ones_a.tdmp", "converted": "dumps/ones_b.tdmp"}]
    near = [{"original": "dumps/base_f64.tdmp", "converted": "dumps/near_f64.tdmp"}]
    far = [{"original": "dumps/ones_a.tdmp", "converted": "dumps/off_1e-3.tdmp"}]
    shape = [{"original": "dumps/ones_a.tdmp", "converted": "dumps/ones_3x2.tdmp"}]

    def rec(model_id, converter, stage, kind="synthetic", error=None, pairs=None):
        r = {"model_id": model_id, "converter": converter, "corpus_kind": kind, "stage_reached": stage}
        if error is not None:
            r["error_text"] = error
        if pairs is not None:
            r["output_pairs"] = pairs
        return r

    six = [
        rec("bert_tiny", "torch_onnx", "wrapper_error", "real", "wrapper raised ValueError"),
        rec("syn_001", "torch_onnx", "conversion_error", error="unsupported operator aten::bucketize"),
        rec("syn_002", "torch_onnx", "execution_error", error="libc++abi: terminating"),
        rec("syn_003", "torch_onnx", "inference_done", pairs=far),
        rec("syn_004", "torch_onnx", "inference_done", pairs=same),
        rec("syn_005", "torch_onnx", "inference_done", pairs=near + same),
    ]
    write_jsonl(base / "six.jsonl", six)

    twenty = [
        rec("r01", "tf2onnx", "wrapper_error", "real", "wrapper failed"),
        rec("r02", "tf2onnx", "wrapper_error", "real", "wrapper failed"),
        rec("r03", "tf2onnx", "inference_done", "real", pairs=same),
        rec("r04", "tf2onnx", "inference_done", "real", pairs=near),
        rec("r05", "tf2onnx", "conversion_error", "real", "op not supported"),
        rec("s01", "tf2onnx", "inference_done", pairs=same),
        rec("s02", "tf2onnx", "inference_done", pairs=same),
        rec("s03", "tf2onnx", "inference_done", pairs=near),
        rec("s04", "tf2onnx", "inference_done", pairs=far),
        rec("s05", "tf2onnx", "load_error", error="invalid graph"),
        rec("r06", "torch_onnx", "conversion_error", "real", "export failed"),
        rec("r07", "torch_onnx", "conversion_error", "real", "export failed"),
        rec("r08", "torch_onnx", "execution_error", "real", "segfault"),
        rec("r09", "torch_onnx", "inference_done", "real", pairs=same),
        rec("s06", "torch_onnx", "inference_done", pairs=far),
        rec("s07", "torch_onnx", "inference_done", pairs=shape),
        rec("s08", "torch_onnx", "inference_done", pairs=same),
        rec("s09", "torch_onnx", "inference_done", pairs=same),
        rec("s10", "torch_onnx", "inference_done", pairs=near),
        rec("s11", "torch_onnx", "wrapper_error", error="wrapper failed"),
    ]
    write_jsonl(base / "twenty.jsonl", twenty)

    (base / "empty.jsonl").write_text("")
    write_jsonl(base / "missing_dump.jsonl", [
        rec("syn_404", "tf2onnx", "inference_done",
            pairs=[{"original": "dumps/ones_a.tdmp", "converted": "dumps/does_not_exist.tdmp"}]),
    ])


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, separators=(",", ":")) + "\n" for r in rows))


def main():
    seqs_trio(ROOT / "seqs")
    ops_h1_overlap(ROOT / "ops_h1")
    h2_fixtures(ROOT / "h2")
    classify_fixture(ROOT / "classify")
    print(f"fixtures written under {ROOT}")


if __name__ == "__main__":
    main()
