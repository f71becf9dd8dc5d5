"""Flat-text model checkpoints.

Format v1, one header per line then one granule per line:

    granular-model v1
    kind=<fbem|egnn>
    n_attrs=<int>
    n_classes=<int>            (egnn only)
    aggregation=<min|product>  (egnn only)
    rho=<float> eta=<float> h_r=<int> created=<int> step=<int>
    norm_low=<float ...>|unset
    norm_high=<float ...>|unset
    granule=<class> <created_at> <last_win> | <ls lc uc us> x n_attrs
            [| w1 .. wn | right wrong]     (egnn only)

Floats are written with repr and round-trip exactly.
"""

import numpy as np

from .egnn import EGNN
from .fbem import FBeM

FORMAT_TAG = "granular-model v1"


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _granule_line(model, i: int) -> str:
    quads = []
    for j in range(model.n_attrs):
        quads.append(_floats([model.low_sup[i, j], model.low_core[i, j],
                              model.high_core[i, j], model.high_sup[i, j]]))
    head = f"{int(model.labels[i])} {int(model.created_at[i])} {int(model.last_win[i])}"
    line = "granule=" + head + " | " + " | ".join(quads)
    if isinstance(model, EGNN):
        line += " | " + _floats(model.weights[i])
        line += f" | {int(model.right[i])} {int(model.wrong[i])}"
    return line


def save_model(model, path):
    """Write a checkpoint for an FBeM or EGNN model."""
    g = model.granularity
    lines = [FORMAT_TAG]
    lines.append(f"kind={'egnn' if isinstance(model, EGNN) else 'fbem'}")
    lines.append(f"n_attrs={model.n_attrs}")
    if isinstance(model, EGNN):
        lines.append(f"n_classes={model.n_classes}")
        lines.append(f"aggregation={model.aggregation}")
    lines.append(f"rho={repr(g.rho)} eta={repr(g.eta)} h_r={g.h_r} "
                 f"created={g.created_this_period} step={g.step}")
    norm = model.normalizer
    lines.append("norm_low=" + (_floats(norm.low) if norm.seen_any else "unset"))
    lines.append("norm_high=" + (_floats(norm.high) if norm.seen_any else "unset"))
    for i in range(model.rule_count):
        lines.append(_granule_line(model, i))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(lines) -> dict:
    head = {}
    for line in lines:
        if line.startswith("granule="):
            break
        if "=" not in line:
            raise ValueError(f"malformed checkpoint line: {line!r}")
        if line.startswith("rho="):
            for part in line.split():
                key, val = part.split("=", 1)
                head[key] = val
        else:
            key, val = line.split("=", 1)
            head[key] = val
    return head


def load_model(path):
    """Rebuild a model from a checkpoint written by save_model."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != FORMAT_TAG:
        raise ValueError(f"unsupported checkpoint format: {lines[:1]}")
    body = lines[1:]
    head = _parse_header(body)
    kind = head.get("kind")
    n_attrs = int(head["n_attrs"])
    if kind == "fbem":
        model = FBeM(n_attrs=n_attrs, rho0=float(head["rho"]),
                     h_r=int(head["h_r"]), eta=float(head["eta"]))
    elif kind == "egnn":
        model = EGNN(n_attrs=n_attrs, rho0=float(head["rho"]),
                     h_r=int(head["h_r"]), eta=float(head["eta"]),
                     aggregation=head.get("aggregation", "min"),
                     n_classes=int(head.get("n_classes", 4)))
    else:
        raise ValueError(f"unknown model kind: {kind!r}")
    g = model.granularity
    g.created_this_period = int(head["created"])
    g.step = int(head["step"])
    if head["norm_low"] != "unset":
        model.normalizer.low = np.array(
            [float(v) for v in head["norm_low"].split()])
        model.normalizer.high = np.array(
            [float(v) for v in head["norm_high"].split()])
    for line in body:
        if not line.startswith("granule="):
            continue
        chunks = [c.strip() for c in line[len("granule="):].split("|")]
        label, created_at, last_win = (int(v) for v in chunks[0].split())
        sets = []
        for j in range(n_attrs):
            sets.append(tuple(float(v) for v in chunks[1 + j].split()))
        model._install_geometry(sets, label, created_at, last_win)
        if kind == "egnn":
            weights = np.array([float(v) for v in chunks[1 + n_attrs].split()])
            right, wrong = (int(v) for v in chunks[2 + n_attrs].split())
            model.weights = np.vstack([model.weights,
                                       weights.reshape(1, n_attrs)])
            model.right = np.append(model.right, right)
            model.wrong = np.append(model.wrong, wrong)
    return model
