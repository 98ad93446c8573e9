"""Report documents for the command line.

Each ``*_report`` function returns a plain dict ready for
:func:`cohjump.modelfile.dumps`.  Floats are rounded to a fixed number of
significant digits and vectors are phase-normalized so that structured
output is stable across runs.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import Config
from .dgla import DGLA, KuranishiSolution, fixed_point_residual, mc_residual
from .hodge import GradedComplex, HodgeData, betti, hodge_residuals
from .jump import (
    EXTENSION,
    Extension,
    JumpVerdict,
    ObstructionImage,
    closedness_residuals,
    extension_fixed_point_residual,
)
from .modelfile import FORMAT_VERSION, ModelFile, clean_float, pair
from .oracle import OracleReport
from .series import IntegrabilityReport

DIGITS = 12
RESIDUAL_DIGITS = 3


def num(x: float, digits: int = DIGITS) -> float:
    return clean_float(x, digits)


def vec(v: np.ndarray | None, normalize: bool = False) -> list[list[float]] | None:
    """A complex vector as ``[re, im]`` pairs; optionally phase-normalized.

    Normalization divides by the phase of the first entry of largest modulus,
    which fixes the arbitrary phase of singular vectors.
    """
    if v is None:
        return None
    v = np.asarray(v, dtype=complex)
    if normalize and v.size:
        mags = np.abs(v)
        top = mags.max()
        if top > 0:
            i = int(np.flatnonzero(mags >= top * (1 - 1e-9))[0])
            v = v * (abs(v[i]) / v[i])
    # rounding noise below 1e-14 of the vector scale is zeroed
    cut = 1e-14 * max(1.0, float(np.max(np.abs(v), initial=0.0)))
    v = np.where(np.abs(v.real) < cut, 0.0, v.real) + 1j * np.where(np.abs(v.imag) < cut, 0.0, v.imag)
    return [pair(z, DIGITS) for z in v]


def residual(x: float) -> float:
    return clean_float(x, RESIDUAL_DIGITS)


def envelope(command: str, model: ModelFile, cfg: Config, result: dict, order: int | None = None,
             warnings_seen: Sequence[str] = ()) -> dict:
    prov: dict[str, Any] = {
        "tool_version": __version__,
        "config": {k: (num(v) if isinstance(v, float) else v) for k, v in cfg.as_dict().items()},
        "seed": cfg.seed,
    }
    if order is not None:
        prov["order_checked"] = order
    return {
        "format_version": FORMAT_VERSION,
        "command": command,
        "model": {"name": model.name, "description": model.description},
        "provenance": prov,
        "result": result,
        "warnings": list(warnings_seen),
    }


def integrability_doc(rep: IntegrabilityReport) -> dict:
    return {
        "passed": rep.passed,
        "residuals": [residual(r) for r in rep.residuals],
        "tolerance": num(rep.tol),
    }


def complex_doc(cx: GradedComplex) -> dict:
    return {"q_min": cx.q_min, "dims": list(cx.dims), "euler_characteristic": cx.euler_characteristic()}


def validate_report(model: ModelFile, integrability: IntegrabilityReport | None) -> dict:
    out: dict[str, Any] = {"complex": complex_doc(model.complex), "sources": model.sources()}
    if model.companion_del is not None:
        out["companion_del_degrees"] = sorted(int(q) for q in model.companion_del)
    if model.dgla is not None:
        out["dgla"] = {**complex_doc(model.dgla.complex), "abelian": model.dgla.is_abelian()}
    if integrability is not None:
        out["integrability"] = integrability_doc(integrability)
    out["valid"] = True
    return out


def hodge_report(cx: GradedComplex, hd: HodgeData) -> dict:
    b = betti(cx, hd)
    return {
        "complex": complex_doc(cx),
        "betti": {str(q): b[q] for q in cx.degrees},
        "euler_from_betti": sum((-1) ** q * b[q] for q in cx.degrees),
        "rank_tol": num(hd.rank_tol),
        "identity_residuals": {k: residual(v) for k, v in hodge_residuals(cx, hd).items()},
        "near_threshold": list(hd.near_threshold),
    }


def mc_report(L: DGLA, xi: np.ndarray, sol: KuranishiSolution, tol: float) -> dict:
    x = sol.series
    first = sol.first_obstruction(tol)
    res = mc_residual(L, x)
    return {
        "xi": vec(xi),
        "order": x.order,
        "obstruction_factor": num(sol.obstruction_factor),
        "coeffs": [vec(x.coeff(n)) for n in range(1, x.order + 1)],
        "obstruction_norms": [num(float(np.linalg.norm(ob))) for ob in sol.obstructions],
        "first_obstruction": first,
        "first_obstruction_witness": vec(sol.obstructions[first - 1]) if first else None,
        "fixed_point_residual": residual(fixed_point_residual(L, xi, x)),
        "mc_residual_norms": [residual(float(np.linalg.norm(r))) for r in res],
        "attestation": (
            f"unobstructed through order {x.order}" if first is None else f"obstructed at order {first}"
        ),
    }


def extension_report(P, hd: HodgeData, ext: Extension) -> dict:
    return {
        "degree": ext.degree,
        "order": ext.order,
        "base_class": vec(ext.base_class),
        "coeffs": [vec(c) for c in ext.coeffs],
        "harmonic_part_norms": [num(float(np.linalg.norm(h))) for h in ext.harmonic_parts],
        "obstructed_at": ext.obstructed_at,
        "obstruction_witness": vec(ext.obstruction_witness),
        "certified_order": ext.certified_order,
        "fixed_point_residual": residual(extension_fixed_point_residual(P, hd, ext)),
        "closedness_residuals": [residual(r) for r in closedness_residuals(P, ext)],
    }


def obstructions_report(images: Sequence[ObstructionImage], extension_first: int | None) -> dict:
    first = next((img.order for img in images if img.rank), None)
    return {
        "degree": images[0].degree if images else None,
        "orders": [
            {
                "order": img.order,
                "domain_dim": img.domain_dim,
                "rank": img.rank,
                "basis": [vec(img.basis[:, i], normalize=True) for i in range(img.rank)],
                "exact_leak": residual(img.exact_leak),
            }
            for img in images
        ],
        "first_nonzero_order": first,
        "harmonic_route_first_order": extension_first,
        "routes_agree": first == extension_first,
    }


def _side_name(v: JumpVerdict) -> str | None:
    if not v.jump:
        return None
    return "ExtensionObstruction" if v.side == EXTENSION else "ExactnessObstruction"


def verdict_doc(v: JumpVerdict) -> dict:
    out = {
        "degree": v.degree,
        "order_checked": v.order_checked,
        "verdict": v.describe(),
        "jump": v.jump,
        "side": _side_name(v),
        "side_degree": v.side_degree,
        "order": v.order,
        "witness": vec(v.witness, normalize=True),
        "extension_order": v.extension_order,
        "exactness_order": v.exactness_order,
    }
    if v.integrability is not None:
        out["integrability"] = integrability_doc(v.integrability)
    if not v.jump:
        out["attestation"] = f"no obstruction found through order {v.order_checked}; higher orders unchecked"
    return out


def oracle_doc(o: OracleReport) -> dict:
    return {
        "degree": o.degree,
        "dim_at_zero": o.dim_at_zero,
        "generic_dim": o.generic_dim,
        "jumps": o.jumps,
        "semicontinuous": o.semicontinuous,
        "samples": [{"t": pair(t, DIGITS), "dim": d} for t, d in o.samples],
        "discordant": list(o.discordant),
        "rank_tol": num(o.tol),
        "sample_spec": {
            "count": o.spec.count,
            "modulus_low": num(o.spec.low),
            "modulus_high": num(o.spec.high),
            "seed": o.spec.seed,
        },
    }


def compare_doc(o: OracleReport, v: JumpVerdict) -> dict:
    return {"oracle": oracle_doc(o), "verdict": verdict_doc(v), "agree": o.jumps == v.jump}


# -- text -------------------------------------------------------------------

def _fmt_vec(v: list | None) -> str:
    if v is None:
        return "-"
    parts = []
    for re, im in v:
        parts.append(f"{re:.6g}" if im == 0 else f"({re:.6g}{im:+.6g}j)")
    return "[" + ", ".join(parts) + "]"


def render_text(doc: dict) -> str:
    cmd, r = doc["command"], doc["result"]
    lines = [f"{cmd}: {doc['model']['name'] or '(unnamed model)'}"]
    if cmd == "validate":
        c = r["complex"]
        lines.append(f"  complex dims {c['dims']} from degree {c['q_min']}, Euler characteristic {c['euler_characteristic']}")
        lines.append(f"  series sources: {', '.join(r['sources']) or 'none'}")
        if "dgla" in r:
            lines.append(f"  dgla dims {r['dgla']['dims']}, abelian: {r['dgla']['abelian']}")
        if "integrability" in r:
            i = r["integrability"]
            lines.append(f"  integrable through order {len(i['residuals']) - 1}: {i['passed']} (max residual {max(i['residuals']):.1e})")
        lines.append("  valid")
    elif cmd == "hodge-report":
        lines.append("  betti: " + ", ".join(f"h^{q} = {h}" for q, h in r["betti"].items()))
        lines.append(f"  Euler characteristic {r['complex']['euler_characteristic']} (from betti: {r['euler_from_betti']})")
        worst = max(r["identity_residuals"].values(), default=0.0)
        lines.append(f"  largest Hodge identity residual {worst:.1e}")
        for note in r["near_threshold"]:
            lines.append(f"  note: {note}")
    elif cmd == "mc-solve":
        lines.append(f"  xi = {_fmt_vec(r['xi'])}")
        for n, c in enumerate(r["coeffs"], start=1):
            lines.append(f"  x_{n} = {_fmt_vec(c)}")
        lines.append(f"  {r['attestation']}")
        lines.append(f"  fixed-point residual {r['fixed_point_residual']:.1e}")
    elif cmd == "extend":
        for n, c in enumerate(r["coeffs"]):
            lines.append(f"  alpha^{n} = {_fmt_vec(c)}")
        if r["obstructed_at"] is None:
            lines.append(f"  extends through order {r['order']}")
        else:
            lines.append(f"  obstructed at order {r['obstructed_at']}, witness {_fmt_vec(r['obstruction_witness'])}")
        lines.append(f"  fixed-point residual {r['fixed_point_residual']:.1e}")
    elif cmd == "obstructions":
        for o in r["orders"]:
            lines.append(f"  order {o['order']}: rank {o['rank']} (domain {o['domain_dim']}, exact leak {o['exact_leak']:.1e})")
        lines.append(f"  first nonzero order: {r['first_nonzero_order']}; harmonic route: {r['harmonic_route_first_order']}")
    elif cmd == "jump-verdict":
        lines.append(f"  degree {r['degree']}: {r['verdict']}")
        if r["jump"]:
            lines.append(f"  witness {_fmt_vec(r['witness'])}")
        else:
            lines.append(f"  {r['attestation']}")
    elif cmd == "oracle-compare":
        o, v = r["oracle"], r["verdict"]
        lines.append(f"  degree {o['degree']}: dim_at_zero {o['dim_at_zero']}, generic_dim {o['generic_dim']}, jumps {o['jumps']}")
        if o["discordant"]:
            lines.append(f"  discordant samples: {o['discordant']}")
        lines.append(f"  verdict: {v['verdict']}")
        lines.append(f"  agree: {r['agree']}")
    for w in doc.get("warnings", []):
        lines.append(f"  warning: {w}")
    return "\n".join(lines) + "\n"
