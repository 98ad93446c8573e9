"""Versioned JSON model files.

A model file describes a complex, optionally its ``∂`` companion, and the
data needed to produce an operator series: either the series itself or a
DGLA with a representation and a Maurer-Cartan series.  Complex scalars are
``[re, im]`` pairs; matrices are sparse triplet lists ``[row, col, re, im]``
keyed by degree.  Duplicate triplets are summed in file order.

The emitter is deterministic: parsing an emitted document and emitting it
again reproduces the same bytes.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .dgla import (
    DGLA,
    MaurerCartanSeries,
    Representation,
    represent,
    validate_dgla,
    validate_representation,
)
from .errors import ModelError, OrderExceedsTruncation, ShapeMismatch
from .hodge import DEFAULT_RANK_TOL, DEFAULT_VALIDATION_TOL, GradedComplex, validate_complex
from .series import OperatorSeries, operator_series

FORMAT_VERSION = 1

_TOP_KEYS = {
    "format_version",
    "name",
    "description",
    "provenance",
    "complex",
    "companion_del",
    "dgla",
    "mc_series",
    "operator_series",
}


# -- emission ---------------------------------------------------------------

def clean_float(x: float, digits: int | None = None) -> float:
    """Finite float with ``-0.0`` mapped to ``0.0``, optionally rounded to significant digits."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    if digits is not None and x != 0.0:
        x = float(f"{x:.{digits}g}")
    return 0.0 if x == 0.0 else x


_FLAT_LIST = re.compile(r"\[\s*((?:-?[0-9][0-9.eE+-]*|true|false|null)(?:,\s*(?:-?[0-9][0-9.eE+-]*|true|false|null))*)\s*\]")


def dumps(doc: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent, scalar lists on one line."""
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)
    text = _FLAT_LIST.sub(lambda m: "[" + ", ".join(s.strip() for s in m.group(1).split(",")) + "]", text)
    return text + "\n"


def pair(z: complex, digits: int | None = None) -> list[float]:
    z = complex(z)
    return [clean_float(z.real, digits), clean_float(z.imag, digits)]


def triplets(m: np.ndarray, digits: int | None = None, cutoff: float = 0.0) -> list[list]:
    """Nonzero entries of a matrix as ``[row, col, re, im]``, row-major."""
    out = []
    for r, c in zip(*np.nonzero(np.abs(m) > cutoff)):
        out.append([int(r), int(c)] + pair(m[r, c], digits))
    return out


def _complex_section(cx: GradedComplex, labels: Mapping[int, list[str]] | None = None) -> dict:
    sec: dict[str, Any] = {
        "q_min": cx.q_min,
        "dims": list(cx.dims),
        "differential": {str(q): triplets(cx.d(q)) for q in range(cx.q_min, cx.q_max) if cx.d(q).size},
    }
    if any(not np.allclose(cx.metric(q), np.eye(cx.dim(q))) for q in cx.degrees):
        sec["metric"] = {str(q): triplets(cx.metric(q)) for q in cx.degrees}
    if labels:
        sec["labels"] = {str(q): list(v) for q, v in sorted(labels.items())}
    return sec


# -- parsing helpers --------------------------------------------------------

def _scalar(v: Any, where: str) -> complex:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise ModelError(f"{where}: complex scalars must be [re, im] pairs, got {v!r}")
    z = complex(v[0], v[1])
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ModelError(f"{where}: non-finite entry")
    return z


def _int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModelError(f"{where}: expected an integer index, got {v!r}")
    return v


def _dense(entries: Any, shape: tuple[int, int], where: str) -> np.ndarray:
    """Sum ``[row, col, re, im]`` triplets into a dense matrix."""
    m = np.zeros(shape, dtype=complex)
    if not isinstance(entries, list):
        raise ModelError(f"{where}: expected a list of [row, col, re, im] triplets")
    for e in entries:
        if not (isinstance(e, list) and len(e) == 4):
            raise ModelError(f"{where}: malformed triplet {e!r}")
        r, c = _int(e[0], where), _int(e[1], where)
        if not (0 <= r < shape[0] and 0 <= c < shape[1]):
            raise ShapeMismatch(f"{where}: index ({r}, {c}) outside shape {shape}")
        m[r, c] += _scalar(e[2:], where)
    return m


def _degree_key(k: str, where: str) -> int:
    try:
        return int(k)
    except (TypeError, ValueError):
        raise ModelError(f"{where}: degree keys must be integers, got {k!r}") from None


def _parse_complex(sec: Any, where: str, tol: float, rank_tol: float) -> tuple[GradedComplex, dict]:
    if not isinstance(sec, dict) or "dims" not in sec:
        raise ModelError(f"{where}: needs at least 'dims'")
    q_min = _int(sec.get("q_min", 0), f"{where}.q_min")
    dims = [_int(d, f"{where}.dims") for d in sec["dims"]]
    if any(d < 0 for d in dims):
        raise ShapeMismatch(f"{where}: negative dimension")

    def dim(q):
        return dims[q - q_min] if q_min <= q < q_min + len(dims) else 0

    diff = {}
    for k, entries in sec.get("differential", {}).items():
        q = _degree_key(k, f"{where}.differential")
        if not q_min <= q < q_min + len(dims) - 1:
            raise ShapeMismatch(f"{where}.differential: degree {q} has no target in the complex")
        diff[q] = _dense(entries, (dim(q + 1), dim(q)), f"{where}.differential[{q}]")
    metric = None
    if "metric" in sec:
        metric = {}
        for k, entries in sec["metric"].items():
            q = _degree_key(k, f"{where}.metric")
            if not q_min <= q < q_min + len(dims):
                raise ShapeMismatch(f"{where}.metric: degree {q} outside the complex")
            metric[q] = _dense(entries, (dim(q), dim(q)), f"{where}.metric[{q}]")
    labels = {_degree_key(k, f"{where}.labels"): list(v) for k, v in sec.get("labels", {}).items()}
    cx = validate_complex(dims, diff, metric, q_min=q_min, tol=tol)
    return cx, labels


# -- the model ------------------------------------------------------------

@dataclass(frozen=True)
class ModelFile:
    """In-memory model file.

    ``polynomial`` marks a series whose coefficients beyond the stored order
    are known to vanish, so it may be used at any truncation order.
    """

    complex: GradedComplex
    name: str = ""
    description: str = ""
    labels: Mapping[int, list[str]] = field(default_factory=dict)
    companion_del: Mapping[int, np.ndarray] | None = None
    dgla: DGLA | None = None
    representation: Representation | None = None
    mc_series: MaurerCartanSeries | None = None
    operator_series: OperatorSeries | None = None
    polynomial: bool = False
    provenance: Mapping[str, Any] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def sources(self) -> list[str]:
        out = []
        if self.operator_series is not None:
            out.append("operator_series")
        if self.dgla is not None and self.representation is not None and self.mc_series is not None:
            out.append("dgla+mc_series+representation")
        return out

    def series(self, order: int | None = None) -> OperatorSeries:
        """The operator series, truncated or zero-padded to ``order``."""
        src = self.sources()
        if len(src) != 1:
            found = ", ".join(src) if src else "none"
            raise ModelError(
                "model must provide exactly one of operator_series or "
                f"dgla + mc_series + representation (found: {found})"
            )
        if src[0] == "operator_series":
            P = self.operator_series
        else:
            P = represent(self.dgla, self.representation, self.complex, self.mc_series)
        if order is None:
            return P
        if order > P.order and not self.polynomial:
            raise OrderExceedsTruncation(
                f"order {order} requested but the series is only known through order {P.order}"
            )
        return P.truncated(order)


def model_to_doc(m: ModelFile) -> dict:
    doc: dict[str, Any] = {
        "format_version": m.format_version,
        "name": m.name,
        "description": m.description,
        "complex": _complex_section(m.complex, m.labels),
    }
    if m.provenance:
        doc["provenance"] = dict(m.provenance)
    cx = m.complex
    if m.companion_del is not None:
        targets = {q: mat.shape[0] for q, mat in m.companion_del.items()}
        doc["companion_del"] = {
            "target_dims": [targets.get(q, 0) for q in cx.degrees],
            "maps": {str(q): triplets(mat) for q, mat in sorted(m.companion_del.items())},
        }
    if m.dgla is not None:
        L = m.dgla
        sec = _complex_section(L.complex)
        sec.pop("labels", None)
        br = []
        for (p1, p2), c in sorted(L.bracket.items()):
            for i, j, k in zip(*np.nonzero(c)):
                br.append([p1, int(i), p2, int(j), int(k)] + pair(c[i, j, k]))
        sec["bracket"] = br
        if m.representation is not None:
            rep = []
            for (p, q), a in sorted(m.representation.action.items()):
                for i, r, c in zip(*np.nonzero(a)):
                    rep.append([p, int(i), q, int(r), int(c)] + pair(a[i, r, c]))
            sec["representation"] = rep
        doc["dgla"] = sec
    if m.mc_series is not None:
        x = m.mc_series
        doc["mc_series"] = {
            "order": x.order,
            "polynomial": m.polynomial,
            "coeffs": [[pair(v) for v in x.coeff(n)] for n in range(1, x.order + 1)],
        }
    if m.operator_series is not None:
        P = m.operator_series
        doc["operator_series"] = {
            "order": P.order,
            "polynomial": m.polynomial,
            "coeffs": [
                {str(q): triplets(P.coeff(k, q)) for q in range(cx.q_min, cx.q_max) if np.any(P.coeff(k, q))}
                for k in range(1, P.order + 1)
            ],
        }
    return doc


def model_from_doc(
    doc: Any, tol: float = DEFAULT_VALIDATION_TOL, rank_tol: float = DEFAULT_RANK_TOL
) -> ModelFile:
    """Validate a parsed document and build a :class:`ModelFile`."""
    if not isinstance(doc, dict):
        raise ModelError("model file must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ModelError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported format_version {version!r} (this build reads {FORMAT_VERSION})")
    if "complex" not in doc:
        raise ModelError("model file has no 'complex' section")
    cx, labels = _parse_complex(doc["complex"], "complex", tol, rank_tol)

    companion = None
    if "companion_del" in doc:
        sec = doc["companion_del"]
        tdims = [_int(d, "companion_del.target_dims") for d in sec.get("target_dims", [])]
        if len(tdims) != len(cx.dims):
            raise ShapeMismatch("companion_del.target_dims must list one target dimension per degree")
        companion = {}
        for k, entries in sec.get("maps", {}).items():
            q = _degree_key(k, "companion_del.maps")
            cx.check_degree(q)
            companion[q] = _dense(entries, (tdims[q - cx.q_min], cx.dim(q)), f"companion_del.maps[{q}]")

    L = rep = None
    if "dgla" in doc:
        sec = doc["dgla"]
        lcx, _ = _parse_complex(sec, "dgla", tol, rank_tol)
        bracket: dict[tuple[int, int], np.ndarray] = {}
        for e in sec.get("bracket", []):
            if not (isinstance(e, list) and len(e) == 7):
                raise ModelError(f"dgla.bracket: malformed entry {e!r}")
            p1, i, p2, j, k = (_int(v, "dgla.bracket") for v in e[:5])
            shape = (lcx.dim(p1), lcx.dim(p2), lcx.dim(p1 + p2))
            if not (0 <= i < shape[0] and 0 <= j < shape[1] and 0 <= k < shape[2]):
                raise ShapeMismatch(f"dgla.bracket: index ({p1},{i},{p2},{j},{k}) out of range")
            arr = bracket.setdefault((p1, p2), np.zeros(shape, dtype=complex))
            arr[i, j, k] += _scalar(e[5:], "dgla.bracket")
        L = validate_dgla(lcx, bracket, tol=tol, rank_tol=rank_tol)
        if "representation" in sec:
            action: dict[tuple[int, int], np.ndarray] = {}
            for e in sec["representation"]:
                if not (isinstance(e, list) and len(e) == 7):
                    raise ModelError(f"dgla.representation: malformed entry {e!r}")
                p, i, q, r, c = (_int(v, "dgla.representation") for v in e[:5])
                shape = (lcx.dim(p), cx.dim(q + p), cx.dim(q))
                if not (0 <= i < shape[0] and 0 <= r < shape[1] and 0 <= c < shape[2]):
                    raise ShapeMismatch(f"dgla.representation: index ({p},{i},{q},{r},{c}) out of range")
                arr = action.setdefault((p, q), np.zeros(shape, dtype=complex))
                arr[i, r, c] += _scalar(e[5:], "dgla.representation")
            rep = validate_representation(L, action, cx, tol=tol)

    polynomial = False
    x = None
    if "mc_series" in doc:
        sec = doc["mc_series"]
        if L is None:
            raise ModelError("mc_series needs a dgla section")
        coeffs = []
        for n, vec in enumerate(sec.get("coeffs", []), start=1):
            v = np.array([_scalar(z, f"mc_series.coeffs[{n}]") for z in vec], dtype=complex)
            if v.shape != (L.complex.dim(1),):
                raise ShapeMismatch(f"mc_series x_{n} must have length {L.complex.dim(1)}")
            coeffs.append(v)
        if _int(sec.get("order", len(coeffs)), "mc_series.order") != len(coeffs):
            raise ShapeMismatch("mc_series.order does not match the number of coefficients")
        x = MaurerCartanSeries(len(coeffs), tuple(coeffs))
        polynomial = bool(sec.get("polynomial", False))

    P = None
    if "operator_series" in doc:
        sec = doc["operator_series"]
        blocks = []
        for k, block in enumerate(sec.get("coeffs", []), start=1):
            mats = {}
            for key, entries in block.items():
                q = _degree_key(key, f"operator_series.coeffs[{k}]")
                if not cx.q_min <= q < cx.q_max:
                    raise ShapeMismatch(f"operator_series P_{k}: degree {q} has no target")
                mats[q] = _dense(entries, (cx.dim(q + 1), cx.dim(q)), f"operator_series P_{k}[{q}]")
            blocks.append(mats)
        if _int(sec.get("order", len(blocks)), "operator_series.order") != len(blocks):
            raise ShapeMismatch("operator_series.order does not match the number of coefficients")
        P = operator_series(cx, blocks)
        polynomial = bool(sec.get("polynomial", False))

    model = ModelFile(
        cx,
        name=str(doc.get("name", "")),
        description=str(doc.get("description", "")),
        labels=labels,
        companion_del=companion,
        dgla=L,
        representation=rep,
        mc_series=x,
        operator_series=P,
        polynomial=polynomial,
        provenance=dict(doc.get("provenance", {})),
    )
    if P is not None and x is not None and rep is not None:
        model.series()  # raises: two sources
    return model


def loads(text: str, **kw) -> ModelFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: {exc}") from None
    return model_from_doc(doc, **kw)


def load(path: str | Path, **kw) -> ModelFile:
    return loads(Path(path).read_text(encoding="utf-8"), **kw)


def dump(m: ModelFile, path: str | Path) -> None:
    Path(path).write_text(dumps(model_to_doc(m)), encoding="utf-8")
