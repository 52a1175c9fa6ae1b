"""System definitions and the verification pipeline.

A system bundles a phase space, a Poisson bivector W, a Hamiltonian h, and a
symmetry-generator candidate E.  Systems come from a small line-oriented file
format (see `load_system`) or from the built-in examples, and `run_report`
drives every check over one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path

from .expr import Num, ParseError, PhaseSpace, ScalarExpr, Var, parse
from .geometry import MultiVectorField, PhasePoint, hamiltonian_vf, lie_derivative_mv
from .verify import (
    CheckConfig,
    CheckRecord,
    CheckReport,
    check_compatibility,
    check_involution,
    check_jacobi,
    check_non_noether,
    check_regularity,
    check_spectral_routes,
    check_symmetry,
    check_yang_baxter,
    conservation_drift,
    sample_regular_points,
)

__all__ = ["SystemSpec", "SystemFileError", "load_system", "builtin_system", "run_report"]

MAX_DOF = 6


class SystemFileError(Exception):
    """Malformed system file; the message carries the line number."""


@dataclass(frozen=True)
class SystemSpec:
    """A loaded system: phase space, Poisson bivector, Hamiltonian, generator."""

    space: PhaseSpace
    W: MultiVectorField
    h: ScalarExpr
    E: MultiVectorField
    name: str


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^\[([a-z]+)\]$")
_W_KEY_RE = re.compile(r"^W\(\s*([A-Za-z_][A-Za-z_0-9]*)\s*,\s*([A-Za-z_][A-Za-z_0-9]*)\s*\)$")
_E_KEY_RE = re.compile(r"^E\(\s*([A-Za-z_][A-Za-z_0-9]*)\s*\)$")
_SECTIONS = ("system", "poisson", "hamiltonian", "symmetry")


def _fail(lineno: int, message: str):
    prefix = f"line {lineno}: " if lineno else ""
    raise SystemFileError(prefix + message)


def _parse_expr(text: str, space: PhaseSpace, lineno: int, column0: int) -> ScalarExpr:
    try:
        return parse(text, space)
    except ParseError as err:
        raise SystemFileError(
            f"line {lineno}, column {column0 + err.position + 1}: {err}"
        ) from err


def load_system(path: str | Path) -> SystemSpec:
    """Load and fully validate a system file.

    Format (UTF-8, '#' comments, blank lines ignored)::

        [system]       name = <string>, dof = <n>
        [poisson]      W(qi,pj) = <expr>   on increasing coordinate pairs
        [hamiltonian]  h = <expr>
        [symmetry]     E(coord) = <expr>
    """
    path = Path(path)
    sections: dict[str, list[tuple[int, str, str, int]]] = {s: [] for s in _SECTIONS}
    current: str | None = None
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        header = _SECTION_RE.match(line.strip())
        if header:
            name = header.group(1)
            if name not in _SECTIONS:
                _fail(lineno, f"unknown section [{name}]")
            current = name
            continue
        if current is None:
            _fail(lineno, "content before the first section header")
        if "=" not in line:
            _fail(lineno, "expected 'key = value'")
        key, value = line.split("=", 1)
        value_col = len(key) + 1 + (len(value) - len(value.lstrip()))
        sections[current].append((lineno, key.strip(), value.strip(), value_col))

    # [system]
    name = path.stem
    dof = None
    for lineno, key, value, _ in sections["system"]:
        if key == "name":
            name = value
        elif key == "dof":
            try:
                dof = int(value)
            except ValueError:
                _fail(lineno, f"dof must be an integer, got '{value}'")
        else:
            _fail(lineno, f"unknown [system] key '{key}'")
    if dof is None:
        _fail(0, "missing mandatory [system] entry 'dof'")
    if not 1 <= dof <= MAX_DOF:
        _fail(0, f"dof must lie in 1..{MAX_DOF}, got {dof}")
    space = PhaseSpace.canonical(dof)

    # [poisson]
    if not sections["poisson"]:
        _fail(0, "missing mandatory section [poisson]")
    w_comps: dict[tuple[int, int], ScalarExpr] = {}
    for lineno, key, value, col in sections["poisson"]:
        m = _W_KEY_RE.match(key)
        if not m:
            _fail(lineno, f"expected 'W(a,b) = <expr>', got key '{key}'")
        a, b = m.group(1), m.group(2)
        for coord in (a, b):
            if coord not in space.names:
                _fail(lineno, f"unknown coordinate '{coord}'")
        ia, ib = space.index(a), space.index(b)
        if ia >= ib:
            _fail(
                lineno,
                f"W components must be given on the increasing canonical pair: "
                f"write W({b},{a}) = -(...) instead of W({a},{b})",
            )
        if (ia, ib) in w_comps:
            _fail(lineno, f"duplicate component W({a},{b})")
        w_comps[(ia, ib)] = _parse_expr(value, space, lineno, col)
    W = MultiVectorField(space, 2, w_comps)

    # [hamiltonian]
    h = None
    for lineno, key, value, col in sections["hamiltonian"]:
        if key != "h":
            _fail(lineno, f"expected 'h = <expr>', got key '{key}'")
        if h is not None:
            _fail(lineno, "duplicate 'h' entry")
        h = _parse_expr(value, space, lineno, col)
    if h is None:
        _fail(0, "missing mandatory [hamiltonian] entry 'h'")

    # [symmetry]
    e_comps: dict[tuple[int], ScalarExpr] = {}
    for lineno, key, value, col in sections["symmetry"]:
        m = _E_KEY_RE.match(key)
        if not m:
            _fail(lineno, f"expected 'E(coord) = <expr>', got key '{key}'")
        coord = m.group(1)
        if coord not in space.names:
            _fail(lineno, f"unknown coordinate '{coord}'")
        i = space.index(coord)
        if (i,) in e_comps:
            _fail(lineno, f"duplicate component E({coord})")
        e_comps[(i,)] = _parse_expr(value, space, lineno, col)
    if not e_comps:
        _fail(0, "generator E required: the [symmetry] section is missing or empty")
    E = MultiVectorField(space, 1, e_comps)

    return SystemSpec(space, W, h, E, name)


# ---------------------------------------------------------------------------
# Built-in systems
# ---------------------------------------------------------------------------

def builtin_system(name: str, n: int) -> SystemSpec:
    """Built-in examples.

    "dissipative":        W = sum p_i dp_i^dq_i, h = sum (p_i + q_i),
                          E = sum (p_i + q_i)^2 d/dq_i  (non-Noether).
    "canonical-noether":  canonical W, oscillator h = sum (p_i^2 + q_i^2)/2,
                          E = Hamiltonian field of (q_1^2 + p_1^2)/2, the
                          Noether negative control (L_E W = 0 exactly).
    """
    if not 1 <= n <= MAX_DOF:
        raise ValueError(f"n outside 1..{MAX_DOF}: {n}")
    space = PhaseSpace.canonical(n)
    q = [Var(space.names[i], i) for i in range(n)]
    p = [Var(space.names[n + i], n + i) for i in range(n)]

    if name == "dissipative":
        W = MultiVectorField(space, 2, {(i, n + i): -p[i] for i in range(n)})
        h: ScalarExpr = Num(0.0)
        for i in range(n):
            h = h + (p[i] + q[i])
        E = MultiVectorField(space, 1, {(i,): (p[i] + q[i]) ** 2 for i in range(n)})
        return SystemSpec(space, W, h, E, f"dissipative-n{n}")

    if name == "canonical-noether":
        W = MultiVectorField(space, 2, {(i, n + i): Num(-1.0) for i in range(n)})
        h = Num(0.0)
        for i in range(n):
            h = h + (p[i] * p[i] + q[i] * q[i]) / 2.0
        first_mode_energy = (q[0] * q[0] + p[0] * p[0]) / 2.0
        E = hamiltonian_vf(W, first_mode_energy)
        return SystemSpec(space, W, h, E, f"canonical-noether-n{n}")

    raise ValueError(f"unknown builtin '{name}' (try 'dissipative' or 'canonical-noether')")


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def _error_record(check_id: str, anchor: str, err: Exception) -> CheckRecord:
    return CheckRecord(
        check_id, anchor, -1.0, 1.0, False, 0, f"error: {err}"
    )


def run_report(
    spec: SystemSpec, cfg: CheckConfig, start: PhasePoint | None = None
) -> CheckReport:
    """Run the full audit: Jacobi, regularity, symmetry, (non-)Noether
    classification, Yang-Baxter, compatibility, spectral routes, conservation
    drift from `start` (default: first sampled regular point), involution.

    Check-level errors are captured in the report, never raised past it.
    """
    W, h, E = spec.W, spec.h, spec.E
    records: list[CheckRecord] = []
    samples: tuple = ()

    def run(check_id, anchor, fn):
        try:
            result = fn()
        except Exception as err:  # noqa: BLE001 - captured into the report
            result = _error_record(check_id, anchor, err)
        if isinstance(result, CheckRecord):
            records.append(result)
        else:
            records.extend(result)
        return records[-1]

    run("jacobi", "[W,W] = 0", lambda: check_jacobi(W, cfg))
    run("regularity", "W^n != 0", lambda: check_regularity(W, cfg))
    run("symmetry", "[E,W(h)] = 0", lambda: check_symmetry(E, W, h, cfg))
    noether_rec = run("non_noether", "[E,W] != 0", lambda: check_non_noether(E, W, cfg))
    noether = noether_rec.passed and noether_rec.residual <= cfg.tol * noether_rec.scale
    run("yang_baxter", "[[E,[E,W]],W] = 0", lambda: check_yang_baxter(E, W, cfg))

    What = lie_derivative_mv(E, W)
    run("compat_mixed", "[What,W] = 0 and [What,What] = 0",
        lambda: check_compatibility(W, What, cfg))

    def spectral_stage():
        nonlocal samples
        record, samples = check_spectral_routes(W, What, cfg)
        return record

    run("spectral_routes", "Y^(l) two-route agreement", spectral_stage)

    def drift_stage():
        x0 = start if start is not None else sample_regular_points(W, cfg)[0]
        return conservation_drift(W, E, h, x0, cfg)

    run("conservation_drift", "dc_i/dt = 0, dY^(l)/dt = 0", drift_stage)
    run("involution", "{Y^(k),Y^(l)} = 0 (both brackets)", lambda: check_involution(W, E, cfg))

    if noether:
        vacuous = {"spectral_routes", "conservation_drift", "involution"}
        records = [
            replace(r, notes=(r.notes + "; " if r.notes else "") + "vacuous (Noether: deformation vanishes)")
            if r.id in vacuous
            else r
            for r in records
        ]

    return CheckReport(spec.name, cfg, tuple(records), samples)
