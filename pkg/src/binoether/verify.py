"""Executable checks for a (W, h, E) system: identity residuals at sampled
regular points, flow integration with a conservation audit, and involution
audits under both Poisson structures.

Residuals are reported raw together with the scale used to relativize them:
a check passes when residual <= tol * scale, where scale is the largest
absolute intermediate term at the worst sampled point, floored at 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .expr import ScalarExpr
from .geometry import (
    MultiVectorField,
    PhasePoint,
    evaluate_mv,
    hamiltonian_vf,
    lie_derivative_mv,
    schouten_bb,
)
from .spectral import (
    REGULARITY_FACTOR,
    ROOT_CLUSTER_TOL,
    ROOT_IMAG_TOL,
    NonRealSpectrumError,
    pencil_coefficient_jets,
    regularity_margin,
    root_gradients,
)
from .spectral import _pencil_coefficients, _matrix_rows  # shared pencil plumbing

__all__ = [
    "CheckConfig",
    "CheckRecord",
    "CheckReport",
    "SpectrumSample",
    "Trajectory",
    "SamplingError",
    "FlowError",
    "sample_regular_points",
    "check_jacobi",
    "check_regularity",
    "check_symmetry",
    "check_non_noether",
    "check_yang_baxter",
    "check_compatibility",
    "check_spectral_routes",
    "integrate_flow",
    "conservation_drift",
    "check_involution",
]


class SamplingError(Exception):
    """Could not find enough regular points in the sampling box."""


class FlowError(Exception):
    """Trajectory integration failed (regularity lost or step error)."""


@dataclass(frozen=True)
class CheckConfig:
    """Knobs shared by all checks; defaults match the desk-scale audit."""

    samples: int = 32
    box: float = 2.0
    seed: int = 0
    tol: float = 1e-9
    t_end: float = 10.0
    dt: float = 1e-3
    drift_tol: float = 1e-6

    def __post_init__(self):
        if self.samples < 8:
            raise ValueError("samples must be >= 8")
        for name in ("box", "tol", "t_end", "dt", "drift_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class CheckRecord:
    """Outcome of one check: raw residual, relativizing scale, verdict."""

    id: str
    paper_anchor: str
    residual: float
    scale: float
    passed: bool
    points: int
    notes: str = ""
    mandatory: bool = True

    def __post_init__(self):
        # keep records JSON-clean even when numpy scalars flow in
        object.__setattr__(self, "residual", float(self.residual))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "points", int(self.points))


@dataclass(frozen=True)
class SpectrumSample:
    point: tuple[float, ...]
    c: tuple[float, ...]
    y: tuple[float, ...]


@dataclass(frozen=True)
class CheckReport:
    """Structured outcome of a full verification run."""

    name: str
    config: CheckConfig
    records: tuple[CheckRecord, ...]
    spectrum_samples: tuple[SpectrumSample, ...] = ()

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.records if r.mandatory)

    def record(self, check_id: str) -> CheckRecord:
        for r in self.records:
            if r.id == check_id:
                return r
        raise KeyError(f"no record '{check_id}'")

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "config": {f.name: getattr(self.config, f.name) for f in fields(CheckConfig)},
            "checks": [
                {
                    "id": r.id,
                    "paper_anchor": r.paper_anchor,
                    "residual": r.residual,
                    "scale": r.scale,
                    "pass": r.passed,
                    "notes": r.notes,
                    "points": r.points,
                    "mandatory": r.mandatory,
                }
                for r in self.records
            ],
            "spectrum_samples": [
                {"point": list(s.point), "c": list(s.c), "y": list(s.y)}
                for s in self.spectrum_samples
            ],
            "verdict": "pass" if self.verdict else "fail",
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        payload = json.loads(text)
        config = CheckConfig(**payload["config"])
        records = tuple(
            CheckRecord(
                id=c["id"],
                paper_anchor=c["paper_anchor"],
                residual=c["residual"],
                scale=c["scale"],
                passed=c["pass"],
                points=c["points"],
                notes=c["notes"],
                mandatory=c["mandatory"],
            )
            for c in payload["checks"]
        )
        samples = tuple(
            SpectrumSample(tuple(s["point"]), tuple(s["c"]), tuple(s["y"]))
            for s in payload["spectrum_samples"]
        )
        return cls(payload["name"], config, records, samples)


@dataclass(frozen=True)
class Trajectory:
    """Uniform-step solution samples of the Hamiltonian flow."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        steps = np.diff(self.times)
        if len(steps) and (np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]):
            raise ValueError("times must be strictly increasing with a uniform step")

    def __len__(self):
        return len(self.times)

    def point(self, i: int) -> PhasePoint:
        return PhasePoint(tuple(self.states[i]))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_regular_points(W: MultiVectorField, cfg: CheckConfig) -> list[PhasePoint]:
    """Draw cfg.samples points uniformly from the box, rejecting those where
    W is numerically degenerate."""
    rng = np.random.default_rng(cfg.seed)
    dim = W.space.dim
    points: list[PhasePoint] = []
    attempts = 0
    limit = 200 * cfg.samples
    while len(points) < cfg.samples and attempts < limit:
        attempts += 1
        x = rng.uniform(-cfg.box, cfg.box, size=dim)
        if regularity_margin(evaluate_mv(W, x)) > REGULARITY_FACTOR:
            points.append(PhasePoint(tuple(x)))
    if len(points) < cfg.samples:
        raise SamplingError(
            f"found only {len(points)}/{cfg.samples} regular points in {attempts} draws"
        )
    return points


# ---------------------------------------------------------------------------
# Residual helpers
# ---------------------------------------------------------------------------

def _max_abs_component(F: MultiVectorField, x) -> float:
    if not F.components:
        return 0.0
    return max(abs(e.eval(x)) for e in F.components.values())


def _component_diffs(F: MultiVectorField) -> dict[int, list[ScalarExpr]]:
    N = F.space.dim
    out: dict[int, list[ScalarExpr]] = {}
    for l in range(N):
        ds = [e.diff(l) for e in F.components.values()]
        out[l] = [d for d in ds if not d.is_zero()]
    return out


def _max_eval(exprs: list[ScalarExpr], x) -> float:
    return max((abs(e.eval(x)) for e in exprs), default=0.0)


def _schouten_scale(Am, Bm, dA, dB, x) -> float:
    """Largest |A^{li}(x) d_l B^{jk}(x)| (and the symmetric term) over the
    products appearing in the bracket."""
    N = Am.shape[0]
    s = 0.0
    for l in range(N):
        a_row = float(np.max(np.abs(Am[l]))) if N else 0.0
        b_row = float(np.max(np.abs(Bm[l]))) if N else 0.0
        s = max(s, a_row * _max_eval(dB[l], x), b_row * _max_eval(dA[l], x))
    return s


def _worst_point(points, raw_fn, scale_fn):
    """Track the point with the largest relative residual."""
    worst = (-1.0, 0.0, 1.0)  # rel, raw, scale
    for x in points:
        raw = raw_fn(x)
        scale = max(1.0, scale_fn(x))
        rel = raw / scale
        if rel > worst[0]:
            worst = (rel, raw, scale)
    return worst


def _bracket_check(
    check_id: str,
    anchor: str,
    T: MultiVectorField,
    A: MultiVectorField,
    B: MultiVectorField,
    points,
    tol: float,
    notes: str = "",
) -> CheckRecord:
    dA, dB = _component_diffs(A), _component_diffs(B)
    rel, raw, scale = _worst_point(
        points,
        lambda x: _max_abs_component(T, x),
        lambda x: _schouten_scale(evaluate_mv(A, x), evaluate_mv(B, x), dA, dB, x),
    )
    return CheckRecord(check_id, anchor, raw, scale, rel <= tol, len(points), notes)


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------

def check_jacobi(W: MultiVectorField, cfg: CheckConfig) -> CheckRecord:
    """[W, W] = 0: the bracket induced by W satisfies the Jacobi identity."""
    points = sample_regular_points(W, cfg)
    return _bracket_check("jacobi", "[W,W] = 0", schouten_bb(W, W), W, W, points, cfg.tol)


def check_regularity(W: MultiVectorField, cfg: CheckConfig) -> CheckRecord:
    """W^n != 0 on the sampled box: minimum scale-free Pfaffian margin."""
    points = sample_regular_points(W, cfg)
    margin = min(regularity_margin(evaluate_mv(W, x)) for x in points)
    return CheckRecord(
        "regularity",
        "W^n != 0",
        margin,
        REGULARITY_FACTOR,
        margin > REGULARITY_FACTOR,
        len(points),
        "residual is the minimum |Pf(W)| / ||W||^n over accepted samples",
    )


def check_symmetry(
    E: MultiVectorField, W: MultiVectorField, h: ScalarExpr, cfg: CheckConfig
) -> CheckRecord:
    """[E, W(h)] = 0: the generator commutes with the evolution operator."""
    X = hamiltonian_vf(W, h)
    C = lie_derivative_mv(E, X)
    dX, dE = _component_diffs(X), _component_diffs(E)
    points = sample_regular_points(W, cfg)

    def scale_at(x):
        Ev = evaluate_mv(E, x) if E.components else np.zeros(E.space.dim)
        Xv = evaluate_mv(X, x) if X.components else np.zeros(X.space.dim)
        s = 0.0
        for m in range(E.space.dim):
            s = max(s, abs(Ev[m]) * _max_eval(dX[m], x), abs(Xv[m]) * _max_eval(dE[m], x))
        return s

    rel, raw, scale = _worst_point(points, lambda x: _max_abs_component(C, x), scale_at)
    return CheckRecord("symmetry", "[E,W(h)] = 0", raw, scale, rel <= cfg.tol, len(points))


def check_non_noether(E: MultiVectorField, W: MultiVectorField, cfg: CheckConfig) -> CheckRecord:
    """Classify the symmetry: Noether when [E, W] vanishes, non-Noether
    otherwise.  Informational - the record always passes."""
    What = lie_derivative_mv(E, W)
    dW, dE = _component_diffs(W), _component_diffs(E)
    points = sample_regular_points(W, cfg)

    def scale_at(x):
        Ev = evaluate_mv(E, x) if E.components else np.zeros(E.space.dim)
        Wm = evaluate_mv(W, x)
        s = 0.0
        for m in range(E.space.dim):
            row = float(np.max(np.abs(Wm[m])))
            s = max(s, abs(Ev[m]) * _max_eval(dW[m], x), row * _max_eval(dE[m], x))
        return s

    rel, raw, scale = _worst_point(points, lambda x: _max_abs_component(What, x), scale_at)
    noether = rel <= cfg.tol
    notes = (
        "Noether: generator preserves the Poisson bivector; downstream invariants are vacuous"
        if noether
        else "non-Noether: [E,W] != 0, deformation carries conserved quantities"
    )
    return CheckRecord("non_noether", "[E,W] != 0", raw, scale, True, len(points), notes)


def check_yang_baxter(E: MultiVectorField, W: MultiVectorField, cfg: CheckConfig) -> CheckRecord:
    """[[E,[E,W]],W] = 0, realized as schouten_bb(L_E L_E W, W)."""
    What = lie_derivative_mv(E, W)
    LLW = lie_derivative_mv(E, What)
    points = sample_regular_points(W, cfg)
    return _bracket_check(
        "yang_baxter", "[[E,[E,W]],W] = 0", schouten_bb(LLW, W), LLW, W, points, cfg.tol
    )


def check_compatibility(
    W: MultiVectorField, What: MultiVectorField, cfg: CheckConfig
) -> tuple[CheckRecord, CheckRecord]:
    """[W_hat, W] = 0 (compatible pair) and [W_hat, W_hat] = 0 (the deformed
    bivector is itself Poisson)."""
    points = sample_regular_points(W, cfg)
    mixed = _bracket_check(
        "compat_mixed", "[What,W] = 0", schouten_bb(What, W), What, W, points, cfg.tol
    )
    deformed = _bracket_check(
        "compat_deformed",
        "[What,What] = 0",
        schouten_bb(What, What),
        What,
        What,
        points,
        cfg.tol,
    )
    return mixed, deformed


# ---------------------------------------------------------------------------
# Spectrum at samples (route cross-check)
# ---------------------------------------------------------------------------

def _coeffs_at(W, What, x):
    return _pencil_coefficients(_matrix_rows(W, x), _matrix_rows(What, x))


def _roots_from_coeffs(coeffs) -> np.ndarray:
    n = len(coeffs) - 1
    desc = [((-1) ** m) * coeffs[m] for m in range(n, -1, -1)]
    raw = np.roots(desc)
    scale = max(1.0, float(np.max(np.abs(raw))) if raw.size else 0.0)
    if np.any(np.abs(raw.imag) > ROOT_IMAG_TOL * scale):
        raise NonRealSpectrumError(
            f"non-real spectrum: |Im| up to {float(np.max(np.abs(raw.imag))):.3e}"
        )
    return np.sort(raw.real)


def _y_from_coeffs(coeffs) -> tuple[float, ...]:
    n = len(coeffs) - 1
    return tuple(coeffs[n - l] / math.comb(n, l) for l in range(1, n + 1))


def _y_from_root_values(roots) -> tuple[float, ...]:
    n = len(roots)
    e = np.zeros(n + 1)
    e[0] = 1.0
    for c in roots:
        e[1:] = e[1:] + c * e[:-1]
    return tuple(float(e[l]) / math.comb(n, l) for l in range(1, n + 1))


def check_spectral_routes(
    W: MultiVectorField, What: MultiVectorField, cfg: CheckConfig
) -> tuple[CheckRecord, tuple[SpectrumSample, ...]]:
    """Cross-validate the two routes to Y^(l) - pencil coefficients versus
    symmetric functions of the secular roots - and collect samples."""
    points = sample_regular_points(W, cfg)
    samples = []
    worst = (0.0, 1.0)  # raw, scale with rel = raw/scale maximal
    worst_rel = -1.0
    for x in points:
        coeffs = _coeffs_at(W, What, x)
        roots = _roots_from_coeffs(coeffs)
        direct = tuple(float(v) for v in _y_from_coeffs(coeffs))
        via_roots = _y_from_root_values(roots)
        samples.append(SpectrumSample(tuple(x), tuple(float(r) for r in roots), direct))
        for a, b in zip(direct, via_roots):
            scale = max(1.0, abs(a), abs(b))
            rel = abs(a - b) / scale
            if rel > worst_rel:
                worst_rel = rel
                worst = (abs(a - b), scale)
    return (
        CheckRecord(
            "spectral_routes",
            "Y^(l) = What^l^W^(n-l)/W^n = e_l(c)/C(n,l)",
            worst[0],
            worst[1],
            worst_rel <= cfg.tol,
            len(points),
        ),
        tuple(samples),
    )


# ---------------------------------------------------------------------------
# Flow and conservation
# ---------------------------------------------------------------------------

def integrate_flow(
    W: MultiVectorField,
    h: ScalarExpr,
    x0,
    cfg: CheckConfig,
    max_step_error: float | None = 1e-8,
    require_regular: bool = True,
) -> Trajectory:
    """Classical fixed-step RK4 for dx/dt = W(h)(x).

    Regularity of W is monitored at every step (disable with
    require_regular=False to integrate through degenerate sets, e.g. fixed
    points of the field); when max_step_error is set, a step-halving
    estimate guards the local error per unit time.
    """
    X = hamiltonian_vf(W, h)
    dim = W.space.dim
    comps = list(X.components.items())

    def f(y):
        out = np.zeros(dim)
        for (i,), e in comps:
            out[i] = e.eval(y)
        return out

    def rk4_step(y, dt):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    steps = int(round(cfg.t_end / cfg.dt))
    times = np.arange(steps + 1) * cfg.dt
    states = np.empty((steps + 1, dim))
    y = np.asarray(tuple(x0), dtype=float)
    states[0] = y
    for k in range(steps):
        if require_regular and regularity_margin(evaluate_mv(W, y)) <= REGULARITY_FACTOR:
            raise FlowError(f"regularity lost at t = {times[k]:.6g}")
        full = rk4_step(y, cfg.dt)
        if max_step_error is not None:
            half = rk4_step(rk4_step(y, cfg.dt / 2), cfg.dt / 2)
            est = float(np.max(np.abs(full - half))) / 15.0 / cfg.dt
            if est > max_step_error:
                raise FlowError(
                    f"step error estimate {est:.3e}/unit time exceeds {max_step_error:.3e}"
                    f" at t = {times[k]:.6g}"
                )
        y = full
        states[k + 1] = y
    return Trajectory(times, states)


def conservation_drift(
    W: MultiVectorField,
    E: MultiVectorField,
    h: ScalarExpr,
    x0,
    cfg: CheckConfig,
) -> CheckRecord:
    """Integrate the flow and audit that every secular root c_i and every
    invariant Y^(l) stays constant (relative drift <= cfg.drift_tol)."""
    n = W.space.n
    What = lie_derivative_mv(E, W)
    traj = integrate_flow(W, h, x0, cfg)
    m = len(traj)
    roots = np.empty((m, n))
    ys = np.empty((m, n))
    for k in range(m):
        coeffs = _coeffs_at(W, What, traj.states[k])
        roots[k] = _roots_from_coeffs(coeffs)
        ys[k] = _y_from_coeffs(coeffs)

    labels = [f"c{i + 1}" for i in range(n)] + [f"Y{l}" for l in range(1, n + 1)]
    series = np.hstack([roots, ys])
    worst = (-1.0, 0.0, 1.0, "")
    parts = []
    for j, label in enumerate(labels):
        base = series[0, j]
        raw = float(np.max(np.abs(series[:, j] - base)))
        scale = max(1.0, abs(base))
        rel = raw / scale
        parts.append(f"{label}: {rel:.3e}")
        if rel > worst[0]:
            worst = (rel, raw, scale, label)
    rel, raw, scale, label = worst
    return CheckRecord(
        "conservation_drift",
        "dc_i/dt = 0, dY^(l)/dt = 0 along the flow",
        raw,
        scale,
        rel <= cfg.drift_tol,
        m,
        f"worst: {label}; relative drifts over T={cfg.t_end:g}: " + ", ".join(parts),
    )


# ---------------------------------------------------------------------------
# Involution
# ---------------------------------------------------------------------------

def check_involution(
    W: MultiVectorField,
    E: MultiVectorField,
    cfg: CheckConfig,
    tol: float | None = None,
) -> CheckRecord:
    """{Y^(k), Y^(l)} = 0 under both Poisson structures (W and W_hat), via
    exact jet gradients; secular-root pairs are audited too wherever the
    spectrum is simple."""
    tol = cfg.tol if tol is None else tol
    n = W.space.n
    What = lie_derivative_mv(E, W)
    points = sample_regular_points(W, cfg)
    worst = (-1.0, 0.0, 1.0)
    skipped = 0
    for x in points:
        coeff_jets = pencil_coefficient_jets(W, What, x)
        grads = [coeff_jets[n - l].gradient / math.comb(n, l) for l in range(1, n + 1)]
        matrices = (evaluate_mv(W, x), evaluate_mv(What, x))

        coeff_values = [j.value for j in coeff_jets]
        roots = _roots_from_coeffs(coeff_values)
        scale_r = max(1.0, float(np.max(np.abs(roots))) if len(roots) else 0.0)
        simple = all(
            roots[i + 1] - roots[i] >= ROOT_CLUSTER_TOL * scale_r for i in range(n - 1)
        )
        grad_sets = [grads]
        if simple and n > 1:
            grad_sets.append(root_gradients(coeff_jets, tuple(roots)))
        elif n > 1:
            skipped += 1

        for gset in grad_sets:
            for a in range(len(gset)):
                for b in range(a, len(gset)):
                    ga, gb = gset[a], gset[b]
                    for Vm in matrices:
                        bracket = float(ga @ Vm @ gb)
                        scale = max(1.0, float(np.max(np.abs(Vm * np.outer(ga, gb)))))
                        rel = abs(bracket) / scale
                        if rel > worst[0]:
                            worst = (rel, abs(bracket), scale)
    rel, raw, scale = worst
    notes = "pairs tested with gradients from forward-mode jets"
    if n == 1:
        notes = "single invariant: only the vanishing self-bracket is checked"
    if skipped:
        notes += f"; root-pair test skipped at {skipped} points with repeated roots"
    return CheckRecord(
        "involution",
        "{Y^(k),Y^(l)} = {Y^(k),Y^(l)}_hat = 0",
        raw,
        scale,
        rel <= tol,
        len(points),
        notes,
    )
