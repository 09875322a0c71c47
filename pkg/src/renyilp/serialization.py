"""JSON formats for elements, functionals, channels and reports.

Matrix format::

    {"structure": [d1, d2, ...], "blocks": [[[re, im], ...], ...]}

Each block is a flat row-major list of ``[re, im]`` pairs. Readers also accept
a block given as nested rows. Channels are
``{"kind": "kraus" | "superop" | "named", "in_structure": [...], "out_structure": [...], ...}``.

``dumps`` writes keys in sorted order and floats with 17 significant digits so
reports are byte-reproducible.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import channels as ch
from .algebra import AlgebraElement, BlockStructure, PositiveFunctional
from .errors import ParseError, RenyiLpError


# -- deterministic writer ------------------------------------------------------

def format_float(x: float) -> str:
    """17 significant digits; non-finite values as ``inf``, ``-inf``, ``nan``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _emit(obj, indent: int, level: int, out: list) -> None:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            out.append((sep if i else "") + pad + json.dumps(str(key)) + ": ")
            _emit(obj[key], indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(obj):
            out.append((sep if i else "") + pad)
            _emit(item, indent, level + 1, out)
        out.append(end + "]")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        text = format_float(obj)
        out.append(text if math.isfinite(obj) else f'"{text}"')
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


# -- matrices ------------------------------------------------------------------

def _pairs(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).ravel()]


def _matrix_from(data, rows: int, cols: int, what: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: entries must be [re, im] pairs") from exc
    if arr.ndim == 2 and arr.shape == (rows * cols, 2):
        arr = arr.reshape(rows, cols, 2)
    if arr.shape != (rows, cols, 2):
        raise ParseError(f"{what}: expected {rows}x{cols} entries of [re, im], got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def element_to_json(x: AlgebraElement) -> dict:
    return {"structure": list(x.structure.dims), "blocks": [_pairs(b) for b in x.blocks]}


def element_from_json(obj) -> AlgebraElement:
    """Parse the matrix format.

    Raises:
        ParseError: on missing keys or shape mismatches.
    """
    if not isinstance(obj, dict) or "structure" not in obj or "blocks" not in obj:
        raise ParseError("matrix object needs 'structure' and 'blocks'")
    try:
        structure = BlockStructure(tuple(int(d) for d in obj["structure"]))
    except (TypeError, ValueError, RenyiLpError) as exc:
        raise ParseError(f"bad structure: {exc}") from exc
    blocks = obj["blocks"]
    if not isinstance(blocks, list) or len(blocks) != len(structure.dims):
        raise ParseError("number of blocks does not match structure")
    return AlgebraElement(structure, tuple(
        _matrix_from(b, d, d, f"block {i}") for i, (b, d) in enumerate(zip(blocks, structure.dims))))


def functional_from_json(obj) -> PositiveFunctional:
    return PositiveFunctional(element_from_json(obj))


def _rect_to_json(m: np.ndarray) -> dict:
    return {"shape": list(m.shape), "data": _pairs(m)}


def _rect_from_json(obj, what: str) -> np.ndarray:
    if isinstance(obj, dict) and "shape" in obj and "data" in obj:
        rows, cols = (int(n) for n in obj["shape"])
        return _matrix_from(obj["data"], rows, cols, what)
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: unreadable matrix") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ParseError(f"{what}: expected nested rows of [re, im]")
    return arr[..., 0] + 1j * arr[..., 1]


# -- channels ------------------------------------------------------------------

def channel_to_json(phi: ch.Channel) -> dict:
    head = {"in_structure": list(phi.in_structure.dims),
            "out_structure": list(phi.out_structure.dims),
            "positivity_class": phi.positivity_class}
    if phi.kraus is not None:
        return {"kind": "kraus", "kraus": [_rect_to_json(k) for k in phi.kraus], **head}
    return {"kind": "superop", "superop": _rect_to_json(phi.superop), **head}


def _named(obj) -> ch.Channel:
    name = obj.get("name")
    p = obj.get("params", {})
    try:
        if name == "identity":
            return ch.identity(p["structure"])
        if name == "unitary":
            return ch.unitary_conjugation(_rect_from_json(p["unitary"], "unitary"),
                                          p.get("structure"))
        if name == "pinching":
            basis = p.get("basis")
            return ch.pinching(None if basis is None else _rect_from_json(basis, "basis"),
                               p.get("d"))
        if name == "partial_trace":
            return ch.partial_trace(p["dims"], int(p.get("factor", 1)))
        if name == "depolarizing":
            return ch.depolarizing(float(p["lam"]), int(p["d"]))
        if name == "transpose":
            return ch.transpose(p["structure"])
        if name == "sum_collapse":
            return ch.sum_collapse(p["structure"])
        if name in ("direct_sum", "tensor"):
            a, b = (channel_from_json(c) for c in p["channels"])
            return ch.direct_sum(a, b) if name == "direct_sum" else ch.tensor(a, b)
        if name == "mixture":
            return ch.mixture([channel_from_json(c) for c in p["channels"]], p["weights"])
    except KeyError as exc:
        raise ParseError(f"named channel {name!r} is missing parameter {exc}") from exc
    raise ParseError(f"unknown named channel {name!r}")


def channel_from_json(obj) -> ch.Channel:
    """Parse the channel format.

    Raises:
        ParseError: unknown kind, missing fields or inconsistent shapes.
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("channel object needs a 'kind'")
    kind = obj["kind"]
    if kind == "named":
        phi = _named(obj)
        if "positivity_class" in obj and obj["positivity_class"] != phi.positivity_class:
            raise ParseError("named channel positivity class cannot be overridden")
        return phi
    try:
        in_s = BlockStructure(tuple(obj["in_structure"]))
        out_s = BlockStructure(tuple(obj["out_structure"]))
    except (KeyError, TypeError, ValueError, RenyiLpError) as exc:
        raise ParseError(f"bad channel structures: {exc}") from exc
    cls = obj.get("positivity_class", "completely_positive" if kind == "kraus" else "linear")
    if cls not in ch.POSITIVITY_CLASSES:
        raise ParseError(f"unknown positivity class {cls!r}")
    if kind == "kraus":
        kraus = [_rect_from_json(k, f"kraus[{i}]") for i, k in enumerate(obj.get("kraus", []))]
        if not kraus:
            raise ParseError("kraus channel without operators")
        try:
            return ch.Channel.from_kraus(kraus, in_s, out_s, positivity_class=cls)
        except RenyiLpError as exc:
            raise ParseError(str(exc)) from exc
    if kind == "superop":
        sup = _rect_from_json(obj.get("superop"), "superop")
        try:
            return ch.Channel(in_s, out_s, sup, positivity_class=cls, name="superop")
        except RenyiLpError as exc:
            raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown channel kind {kind!r}")


def load_json(path) -> object:
    try:
        with open(Path(path)) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def load_functional(path) -> PositiveFunctional:
    return functional_from_json(load_json(path))


def load_element(path) -> AlgebraElement:
    return element_from_json(load_json(path))


def load_channel(path) -> ch.Channel:
    return channel_from_json(load_json(path))
