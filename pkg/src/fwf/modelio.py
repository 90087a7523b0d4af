"""Versioned text model files.

One self-describing format family: a `<KIND> v1` header line, `key=value`
scalars, inline vector lines (`weights:`, `rho:`, ...) and optional CSV
blocks (`training:`, `index:`, `centers:`). Every float is written with
17 significant digits so a load reproduces predictions bit-exactly.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .baselines import KlmsModel, KrlsModel, WienerModel
from .correntropy import CorrentropyVector, CrossCorrentropyVector
from .errors import DataFormatError
from .fwf_core import FwfModel, RegularizationRecord
from .preimage import LocalModelIndex
from .signal import SupervisedDataset

_G = "%.17g"


def fmt(x) -> str:
    return _G % float(x)


def fmt_vec(v) -> str:
    return " ".join(_G % float(x) for x in v)


def atomic_write(path, text: str) -> None:
    """Write via temp file + rename so readers never see partial output."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model, path, index: LocalModelIndex | None = None) -> None:
    """Serialize any toolkit model; FWF models may carry an LM index block."""
    if isinstance(model, FwfModel):
        text = _fwf_text(model, index)
    elif isinstance(model, WienerModel):
        text = _wiener_text(model)
    elif isinstance(model, KlmsModel):
        text = _centers_text("KLMS", model.centers, model.coeffs,
                             {"eta": model.eta, "sigma": model.sigma})
    elif isinstance(model, KrlsModel):
        text = _centers_text("KRLS", model.centers, model.alpha,
                             {"ridge": model.ridge, "sigma": model.sigma})
    else:
        raise DataFormatError(f"cannot serialize {type(model).__name__}")
    atomic_write(path, text)


def _fwf_text(model: FwfModel, index) -> str:
    r = model.reg
    lines = [
        "FWF v1",
        f"sigma={fmt(model.sigma)}",
        f"L={model.lags}",
        f"horizon={model.horizon}",
        f"lambda={fmt(r.lam)}",
        f"gamma={fmt(r.gamma)}",
        f"target_condition={fmt(r.target_condition)}",
        f"achieved_condition={fmt(r.achieved_condition)}",
        f"eig_min={fmt(r.eig_min)}",
        f"eig_max={fmt(r.eig_max)}",
        f"centered={int(model.centered)}",
        f"weights: {fmt_vec(model.weights)}",
        f"rho: {fmt_vec(model.rho.values)}",
        f"v: {fmt_vec(model.v.values)}",
        "v_counts: " + " ".join(str(int(c)) for c in model.v.n_effective),
    ]
    if model.training is not None:
        lines.append("training:")
        cols = ",".join(f"x{t}" for t in range(model.lags))
        lines.append(f"anchor,{cols},z")
        tr = model.training
        for j in range(len(tr)):
            row = ",".join(_G % v for v in tr.inputs[j])
            lines.append(f"{int(tr.anchors[j])},{row},{_G % tr.targets[j]}")
    if index is not None:
        if model.training is None:
            raise DataFormatError("an index block requires the training block")
        lines.append("index:")
        lines.append("anchor,partner,z,zhat")
        for j in range(len(index)):
            lines.append("%d,%d,%s,%s" % (
                int(index.anchors[j]), int(index.partner_anchors[j]),
                _G % index.z[j], _G % index.zhat[j]))
    return "\n".join(lines) + "\n"


def _wiener_text(model: WienerModel) -> str:
    return ("WIENER v1\n"
            f"L={model.lags}\n"
            f"ridge={fmt(model.ridge)}\n"
            f"weights: {fmt_vec(model.weights)}\n")


def _centers_text(kind, centers, coeffs, scalars) -> str:
    lines = [f"{kind} v1", f"L={centers.shape[1]}"]
    lines += [f"{k}={fmt(v)}" for k, v in scalars.items()]
    lines.append("centers:")
    cols = ",".join(f"x{t}" for t in range(centers.shape[1]))
    lines.append(f"{cols},coeff")
    for i in range(centers.shape[0]):
        lines.append(",".join(_G % v for v in centers[i]) + "," + _G % coeffs[i])
    return "\n".join(lines) + "\n"


def _parse_scalars(lines, i):
    scalars = {}
    vectors = {}
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if line.endswith(":"):  # start of a CSV block
            break
        if ":" in line and "=" not in line.split(":", 1)[0]:
            name, rest = line.split(":", 1)
            vectors[name.strip()] = rest.split()
            i += 1
            continue
        if "=" not in line:
            raise DataFormatError(f"unparseable line {line!r}")
        k, v = line.split("=", 1)
        scalars[k.strip()] = v.strip()
        i += 1
    return scalars, vectors, i


def _parse_block(lines, i):
    name = lines[i].strip()[:-1]
    i += 1
    if i >= len(lines):
        raise DataFormatError(f"block {name!r} has no header row")
    header = lines[i].strip().split(",")
    i += 1
    rows = []
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if line.endswith(":"):
            break
        parts = line.split(",")
        if len(parts) != len(header):
            raise DataFormatError(f"block {name!r}: row width mismatch at {line!r}")
        rows.append(parts)
        i += 1
    return name, header, rows, i


def load_model(path):
    """Load any model file; returns (model, lm_index_or_None)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    header = lines[0].strip()
    try:
        kind, version = header.split()
    except ValueError:
        raise DataFormatError(f"{path}: bad header {header!r}") from None
    if version != "v1":
        raise DataFormatError(f"{path}: unsupported version {version!r}")
    scalars, vectors, i = _parse_scalars(lines, 1)
    blocks = {}
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        name, cols, rows, i = _parse_block(lines, i)
        blocks[name] = (cols, rows)
    try:
        if kind == "FWF":
            return _load_fwf(scalars, vectors, blocks)
        if kind == "WIENER":
            return WienerModel(weights=np.array([float(x) for x in vectors["weights"]]),
                               ridge=float(scalars["ridge"])), None
        if kind in ("KLMS", "KRLS"):
            cols, rows = blocks["centers"]
            data = np.array([[float(x) for x in r] for r in rows]) if rows else \
                np.zeros((0, int(scalars["L"]) + 1))
            centers, coeffs = data[:, :-1], data[:, -1]
            if kind == "KLMS":
                return KlmsModel(centers=centers, coeffs=coeffs,
                                 eta=float(scalars["eta"]),
                                 sigma=float(scalars["sigma"])), None
            return KrlsModel(centers=centers, alpha=coeffs,
                             kinv=np.zeros((0, 0)),
                             ridge=float(scalars["ridge"]),
                             sigma=float(scalars["sigma"])), None
    except (KeyError, ValueError, IndexError) as exc:
        raise DataFormatError(f"{path}: malformed {kind} model ({exc})") from exc
    raise DataFormatError(f"{path}: unknown model kind {kind!r}")


def _load_fwf(scalars, vectors, blocks):
    lags = int(scalars["L"])
    horizon = int(scalars["horizon"])
    sigma = float(scalars["sigma"])
    reg = RegularizationRecord(
        lam=float(scalars["lambda"]), gamma=float(scalars["gamma"]),
        target_condition=float(scalars["target_condition"]),
        achieved_condition=float(scalars["achieved_condition"]),
        eig_min=float(scalars.get("eig_min", "nan")),
        eig_max=float(scalars.get("eig_max", "nan")))
    weights = np.array([float(x) for x in vectors["weights"]])
    rho = np.array([float(x) for x in vectors["rho"]])
    v = np.array([float(x) for x in vectors["v"]])
    counts = np.array([int(x) for x in vectors.get("v_counts", ["0"] * lags)],
                      dtype=np.int64)
    centered = bool(int(scalars.get("centered", "0")))
    training = None
    if "training" in blocks:
        cols, rows = blocks["training"]
        data = np.array([[float(x) for x in r] for r in rows])
        training = SupervisedDataset(
            inputs=np.ascontiguousarray(data[:, 1:-1]),
            targets=np.ascontiguousarray(data[:, -1]),
            anchors=data[:, 0].astype(np.int64), horizon=horizon)
    model = FwfModel(
        weights=weights, sigma=sigma, lags=lags, horizon=horizon, reg=reg,
        rho=CrossCorrentropyVector(values=rho, sigma=sigma),
        v=CorrentropyVector(values=v, sigma=sigma, n_effective=counts,
                            centered=centered),
        centered=centered, training=training)
    index = None
    if "index" in blocks:
        if training is None:
            raise DataFormatError("index block present but no training block")
        cols, rows = blocks["index"]
        anchors = np.array([int(r[0]) for r in rows], dtype=np.int64)
        partner_anchor = np.array([int(r[1]) for r in rows], dtype=np.int64)
        z = np.array([float(r[2]) for r in rows])
        zhat = np.array([float(r[3]) for r in rows])
        pos = np.searchsorted(training.anchors, partner_anchor)
        if not np.array_equal(anchors, training.anchors) or \
                not np.array_equal(training.anchors[pos], partner_anchor):
            raise DataFormatError("index anchors do not match the training block")
        index = LocalModelIndex(anchors=anchors, partner_rows=pos, z=z, zhat=zhat,
                                windows=training.inputs)
    return model, index
