#!/usr/bin/env python3
"""Independent reference for the scorer conformance fixtures.

Reads the files written by `cargo run --example conformance_fixtures -- DIR`,
re-assembles every feature bundle from its raw inputs, checks it against the
bundle the Rust side produced, runs the forward pass with numpy and writes the
golden files:

    DIR/scores.json           logit and sigmoid score per case
    DIR/evaluate_golden.json  expected revenue of the evaluate case

Usage: tools/forward_reference.py DIR
"""

import base64
import datetime as dt
import json
import math
import sys
from pathlib import Path

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
GENDERS = {"female": 0, "male": 1, "unknown": 2}


def fnv1a_64(text):
    h = FNV_OFFSET
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def matrix(m):
    data = np.frombuffer(base64.b64decode(m["data"]), dtype="<f8")
    return data.reshape(m["rows"], m["cols"])


def layer(l):
    return matrix(l["weight"]), matrix(l["bias"])[:, 0]


class Weights:
    def __init__(self, raw):
        assert raw["format_version"] == 1
        self.unit = raw["encoding"]["unit_cents"]
        self.length = raw["encoding"]["length"]
        self.layout = raw["layout"]
        self.mean = np.array(raw["standardization"]["mean"])
        self.scale = np.array(raw["standardization"]["scale"])
        self.dense = [layer(l) for l in raw["dense_tower"]]
        self.sparse = layer(raw["sparse_projection"])
        self.not_target = layer(raw["not_target_projection"])
        self.query = matrix(raw["attention_query"])[:, 0]
        self.default_context = matrix(raw["default_context"])[:, 0]
        self.pooled = [layer(l) for l in raw["pooled_tower"]]
        self.head = [layer(l) for l in raw["head"]]

    def iso(self, cents):
        v = np.zeros(self.length)
        v[: min(cents // self.unit, self.length)] = 1.0
        return v


def relu(x):
    return np.maximum(x, 0.0)


def assemble(case, layout):
    c, shop, target = case["consumer"], case["shop"], case["target"]
    buckets = layout["id_buckets"]
    day = dt.date.fromisoformat(case["as_of"]).timetuple().tm_yday
    dense = [
        float(day),
        float(fnv1a_64(shop["shop_id"]) % buckets),
        float(fnv1a_64(shop["city_id"]) % buckets),
        float(fnv1a_64(c["consumer_id"]) % buckets),
        c["gmv_30d_cents"] / 100.0,
        c["gmv_60d_cents"] / 100.0,
        c["gmv_90d_cents"] / 100.0,
        target["threshold_cents"] / 100.0,
        target["discount_cents"] / 100.0,
    ]
    sparse = []
    for value, card in (
        (shop["category"], layout["shop_categories"]),
        (c["age_bucket"], layout["age_buckets"]),
        (GENDERS[c["gender"]], layout["genders"]),
    ):
        onehot = [0] * card
        onehot[value] = 1
        sparse += onehot
    menu = sorted(case["menu"], key=lambda p: (p["threshold_cents"], p["discount_cents"]))
    not_target = [p for p in menu if p != target]
    return {"dense": dense, "sparse_onehot": sparse, "target": target, "not_target": not_target}


def logit(bundle, w):
    x = (np.array(bundle["dense"]) - w.mean) / w.scale
    for W, b in w.dense:
        x = relu(W @ x + b)
    x = np.concatenate([x, np.array(bundle["sparse_onehot"], dtype=float)])
    W, b = w.sparse
    g = relu(W @ x + b)
    g = g * w.iso(bundle["target"]["threshold_cents"])
    g = g * w.iso(bundle["target"]["discount_cents"])

    if bundle["not_target"]:
        W, b = w.not_target
        emb = np.stack(
            [relu(W @ np.concatenate([w.iso(p["threshold_cents"]), w.iso(p["discount_cents"])]) + b) for p in bundle["not_target"]]
        )
        scores = emb @ w.query / math.sqrt(len(w.query))
        alpha = np.exp(scores - scores.max())
        alpha /= alpha.sum()
        pooled = alpha @ emb
    else:
        pooled = w.default_context
    for W, b in w.pooled:
        pooled = relu(W @ pooled + b)

    z = np.concatenate([g, pooled])
    for i, (W, b) in enumerate(w.head):
        z = W @ z + b
        if i < len(w.head) - 1:
            z = relu(z)
    return float(z[0])


def main(root):
    root = Path(root)
    w = Weights(json.loads((root / "weights.json").read_text()))
    cases = json.loads((root / "cases.json").read_text())

    out = []
    for i, case in enumerate(cases):
        mine = assemble(case, w.layout)
        theirs = case["bundle"]
        for key in ("dense", "sparse_onehot", "target", "not_target"):
            if mine[key] != theirs[key]:
                sys.exit(f"case {i}: bundle field {key} differs: {mine[key]} vs {theirs[key]}")
        z = logit(mine, w)
        out.append({"logit": z, "score": 1.0 / (1.0 + math.exp(-z))})
    (root / "scores.json").write_text(json.dumps(out, indent=2) + "\n")

    ev = json.loads((root / "evaluate_case.json").read_text())
    total = 0.0
    for consumer in ev["population"]:
        zs = []
        for pair in ev["menu"]:
            case = {"consumer": consumer, "shop": ev["shop"], "target": pair, "menu": ev["menu"], "as_of": ev["as_of"]}
            zs.append(logit(assemble(case, w.layout), w))
        # softmax over the pair logits plus a no-trigger logit of 0
        denom = 1.0 + sum(math.exp(z) for z in zs)
        for pair, z in zip(ev["menu"], zs):
            total += math.exp(z) / denom * (pair["threshold_cents"] - pair["discount_cents"])
    golden = {"revenue_cents_exact": total, "revenue_cents": int(math.floor(total + 0.5))}
    (root / "evaluate_golden.json").write_text(json.dumps(golden, indent=2) + "\n")
    print(f"{len(out)} scores, evaluate golden {golden['revenue_cents']} cents")


if __name__ == "__main__":
    main(sys.argv[1])
