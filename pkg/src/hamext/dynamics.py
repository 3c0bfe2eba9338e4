"""Numerical flow of generated Hamiltonians with conservation monitoring.

Hamilton's equations are compiled from the exact symbolic partials into
plain double-precision Python functions and integrated with an adaptive
high-order one-step method (DOP853 via scipy).  Conservation claims are
checked as drift bounds along trajectories; a splitting or structure-
preserving scheme is deliberately not used because the position-dependent
kinetic coupling has no closed-form sub-flows.

Trajectories are written as delimited text with 17 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .coeffs import Poly, SingularEvaluation, VarSystem
from .phase import PhasePoint, PhaseSpace, PPoly


# ---------------------------------------------------------------------------
# compilation of exact expressions to float callables


def _mono_expr(sys: VarSystem, mono, gen_syms: List[str]) -> str:
    parts = []
    for slot, e in enumerate(mono):
        if e == 1:
            parts.append(gen_syms[slot])
        elif e > 1:
            parts.append(f"{gen_syms[slot]}**{e}")
    return "*".join(parts) if parts else "1.0"


def _poly_expr(p: Poly, params: Mapping[str, object], gen_syms: List[str]) -> str:
    if p.is_zero:
        return "0.0"
    terms = []
    for mono, pp in p.sorted_items():
        coeff = pp.evaluate(params, float)
        terms.append(f"({coeff!r})*{_mono_expr(p.sys, mono, gen_syms)}")
    return "(" + " + ".join(terms) + ")"


def _coeff_expr(c, params, gen_syms) -> str:
    num = _poly_expr(c.num, params, gen_syms)
    dens = []
    if any(c.den_mono):
        dens.append(_mono_expr(c.sys, c.den_mono, gen_syms))
    for f, k in c.den_factors:
        fe = _poly_expr(f, params, gen_syms)
        dens.append(fe if k == 1 else f"{fe}**{k}")
    if not dens:
        return num
    return f"({num})/({'*'.join(dens)})"


def _generator_prelude(space: PhaseSpace) -> Tuple[List[str], List[str]]:
    """Source lines binding generator symbols, and the symbol list by slot."""
    lines: List[str] = []
    gen_syms: List[str] = []
    for v in space.system.vars:
        if v.is_linear:
            gen_syms.append(v.name)
            continue
        c_sym, s_sym = f"_C_{v.name}", f"_S_{v.name}"
        rate = float(v.rate.numerator) / float(v.rate.denominator)
        tag = float(v.tag.numerator) / float(v.tag.denominator)
        if tag > 0:
            root = math.sqrt(tag)
            lines.append(f"{s_sym} = sin({root!r}*{rate!r}*{v.name})/{root!r}")
            lines.append(f"{c_sym} = cos({root!r}*{rate!r}*{v.name})")
        else:
            root = math.sqrt(-tag)
            lines.append(f"{s_sym} = sinh({root!r}*{rate!r}*{v.name})/{root!r}")
            lines.append(f"{c_sym} = cosh({root!r}*{rate!r}*{v.name})")
        gen_syms.extend([c_sym, s_sym])
    return lines, gen_syms


def _ppoly_expr(F: PPoly, params, gen_syms) -> str:
    if F.is_zero:
        return "0.0"
    names = F.space.momentum_names
    terms = []
    for pe, c in F.sorted_items():
        mom = "*".join(
            names[i] if e == 1 else f"{names[i]}**{e}"
            for i, e in enumerate(pe) if e
        )
        ce = _coeff_expr(c, params, gen_syms)
        terms.append(f"({ce})*{mom}" if mom else f"({ce})")
    return " + ".join(terms)


_COMPILE_GLOBALS = {
    "sin": math.sin, "cos": math.cos, "sinh": math.sinh, "cosh": math.cosh,
}


def compile_ppoly(F: PPoly, params: Mapping[str, object]) -> Callable[[Sequence[float]], float]:
    """Compile a momentum polynomial to a fast float function of (q..., p...)."""
    space = F.space
    prelude, gen_syms = _generator_prelude(space)
    args = ", ".join(space.coordinate_names)
    body = "\n    ".join(prelude + [f"return {_ppoly_expr(F, params, gen_syms)}"])
    src = f"def _compiled({args}):\n    {body}\n"
    ns: Dict[str, object] = dict(_COMPILE_GLOBALS)
    exec(src, ns)
    fn = ns["_compiled"]

    def call(y: Sequence[float]) -> float:
        return fn(*y)

    call.source = src  # type: ignore[attr-defined]
    return call


def hamiltons_equations(H: PPoly, params: Mapping[str, object]) -> Callable:
    """Compiled vector field (dq/dt, dp/dt) = (dH/dp, -dH/dq).

    Singular evaluations surface as non-finite components so the adaptive
    integrator can shrink the step and ultimately report failure instead of
    crashing.
    """
    space = H.space
    names = space.position_names
    comps = [compile_ppoly(H.d_momentum(n), params) for n in names]
    comps += [compile_ppoly(-H.d_position(n), params) for n in names]
    dim = len(comps)

    def field(t: float, y: Sequence[float]) -> List[float]:
        try:
            out = [c(y) for c in comps]
        except (ZeroDivisionError, OverflowError, ValueError):
            return [math.inf] * dim
        return out

    field.dim = dim  # type: ignore[attr-defined]
    return field


# ---------------------------------------------------------------------------
# integration and monitoring


@dataclass(frozen=True)
class TrajectoryConfig:
    """Initial data and error control for one trajectory."""

    initial: PhasePoint
    t_final: float
    rtol: float = 1e-10
    atol: float = 1e-10
    stride: int = 200                     # number of output samples
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.stride < 2:
            raise ValueError("stride must be at least 2")


@dataclass
class Trajectory:
    space: PhaseSpace
    t: np.ndarray
    y: np.ndarray          # shape (len(t), 2*dim)
    success: bool
    message: str
    nfev: int

    @property
    def final_state(self) -> np.ndarray:
        return self.y[-1]


def integrate_adaptive(cfg: TrajectoryConfig, fieldfn: Callable) -> Trajectory:
    """Adaptive integration with dense output on the stride grid.

    On singular approach the step control shrinks until the solver aborts;
    the partial trajectory and the solver message are returned rather than
    raised.
    """
    space = cfg.initial.space
    y0 = np.array(cfg.initial.values, dtype=float)
    t_eval = np.linspace(0.0, cfg.t_final, cfg.stride)
    sol = solve_ivp(fieldfn, (0.0, cfg.t_final), y0, method="DOP853",
                    rtol=cfg.rtol, atol=cfg.atol, t_eval=t_eval)
    return Trajectory(space=space, t=sol.t, y=sol.y.T, success=bool(sol.success),
                      message=str(sol.message), nfev=int(sol.nfev))


@dataclass
class DriftReport:
    """Per-invariant conservation statistics along a trajectory."""

    entries: Dict[str, Dict[str, float]]
    steps: int
    success: bool
    message: str

    def drift(self, name: str) -> float:
        return self.entries[name]["max_drift"]

    def to_dict(self) -> Dict[str, object]:
        return {
            "success": self.success,
            "message": self.message,
            "steps": self.steps,
            "invariants": {
                k: {kk: f"{vv:.6e}" for kk, vv in sorted(v.items())}
                for k, v in sorted(self.entries.items())
            },
        }


def monitor_invariants(traj: Trajectory, invariants: Mapping[str, PPoly],
                       params: Mapping[str, object]) -> DriftReport:
    """Relative drift against the t = 0 value for each monitored function.

    Initial values with magnitude below 1e-10 switch that entry to absolute
    drift.
    """
    compiled = {name: compile_ppoly(F, params) for name, F in invariants.items()}
    entries: Dict[str, Dict[str, float]] = {}
    for name, fn in compiled.items():
        vals = np.array([fn(row) for row in traj.y])
        v0 = vals[0]
        dev = np.max(np.abs(vals - v0)) if len(vals) else math.nan
        scale = abs(v0)
        relative = scale >= 1e-10
        entries[name] = {
            "initial": float(v0),
            "max_drift": float(dev / scale) if relative else float(dev),
        }
    return DriftReport(entries=entries, steps=len(traj.t), success=traj.success,
                       message=traj.message)


def invariant_values(traj: Trajectory, invariants: Mapping[str, PPoly],
                     params: Mapping[str, object]) -> Dict[str, np.ndarray]:
    out = {}
    for name, F in invariants.items():
        fn = compile_ppoly(F, params)
        out[name] = np.array([fn(row) for row in traj.y])
    return out


def write_trajectory(path: str, traj: Trajectory,
                     invariants: Optional[Mapping[str, np.ndarray]] = None):
    """Delimited text: header row, then t, coordinates, invariant columns."""
    names = list(traj.space.coordinate_names)
    inv_names = sorted(invariants) if invariants else []
    with open(path, "w") as fh:
        fh.write("\t".join(["t"] + names + inv_names) + "\n")
        for i, t in enumerate(traj.t):
            row = [f"{t:.16e}"] + [f"{v:.16e}" for v in traj.y[i]]
            row += [f"{invariants[k][i]:.16e}" for k in inv_names]
            fh.write("\t".join(row) + "\n")


def validate_initial_point(point: PhasePoint, functions: Sequence[PPoly],
                           params: Mapping[str, object], guard: float = 1e-9):
    """Reject initial data on or too near a coefficient singularity."""
    for F in functions:
        try:
            F.evaluate(point, params, guard=guard)
        except SingularEvaluation as exc:
            raise ValueError(
                f"initial point is singular for a monitored function: {exc}"
            ) from exc
