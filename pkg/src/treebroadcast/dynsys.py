"""The truncated second-order map in (Xc, Zc) = (x + z, -z).

Iterating this map from a macroscopic start and watching whether the
trajectory escapes the origin is the numerical signature of
reconstruction; the escape threshold in lambda1 dropping below
1/sqrt(d) for q >= 4 exhibits the mechanism by which the Kesten-Stigum
bound fails to be tight.  The map drops all remainder terms, so ESCAPE
here is evidence for the mechanism, not a proof-grade statement.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import Spectrum
from .errors import BracketError, ValidationError
from .formulas import MapCoefficients, map_coefficients

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10**5
DEFAULT_ESCAPE_BOUND = 1.0


class Classification(Enum):
    ORIGIN = "ORIGIN"
    ESCAPE = "ESCAPE"
    NONZERO_FIXED = "NONZERO_FIXED"
    AMBIGUOUS = "AMBIGUOUS"


@dataclass(frozen=True)
class DynState:
    """Xc = x + z >= 0 and Zc = -z >= 0 on the physical domain; the
    iterator flags but does not forbid excursions outside."""

    Xc: float
    Zc: float


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    classification: Classification
    iterations: int
    left_domain: bool  # some iterate had a negative coordinate


@dataclass(frozen=True)
class FixedPoint:
    state: DynState
    multipliers: tuple  # eigenvalue magnitudes of the local Jacobian
    stable: bool


def step(state: DynState, coeffs: MapCoefficients) -> DynState:
    xc, zc = state.Xc, state.Zc
    return DynState(
        Xc=coeffs.linear_x * xc + coeffs.quad_xx * xc**2 + coeffs.quad_xz * xc * zc,
        Zc=coeffs.linear_z * zc + coeffs.quad_zz_source * xc**2
        - coeffs.quad_zz_decay * zc**2,
    )


def jacobian_origin(coeffs: MapCoefficients) -> tuple[float, float]:
    """The two linear multipliers (d lambda1^2, d lambda2^2); the origin
    attracts locally iff both are below 1."""
    return (coeffs.linear_x, coeffs.linear_z)


def iterate_classify(
    state0: DynState,
    coeffs: MapCoefficients,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    escape_bound: float = DEFAULT_ESCAPE_BOUND,
    keep_states: bool = True,
) -> Trajectory:
    """Iterate until the trajectory falls below tol (ORIGIN), exceeds
    escape_bound in Xc (ESCAPE), or stalls at a nonzero point
    (NONZERO_FIXED); AMBIGUOUS when max_iter runs out first."""
    if tol <= 0 or escape_bound <= 0:
        raise ValidationError("tol and escape_bound must be positive")
    s = state0
    states = [s]
    left_domain = False
    cls = Classification.AMBIGUOUS
    it = 0
    for it in range(1, max_iter + 1):
        prev = s
        s = step(s, coeffs)
        if not (math.isfinite(s.Xc) and math.isfinite(s.Zc)):
            s = DynState(escape_bound, prev.Zc)  # overflow saturates
        if keep_states:
            states.append(s)
        if s.Xc < 0 or s.Zc < 0:
            left_domain = True
        if max(abs(s.Xc), abs(s.Zc)) < tol:
            cls = Classification.ORIGIN
            break
        if s.Xc > escape_bound:
            cls = Classification.ESCAPE
            break
        if max(abs(s.Xc - prev.Xc), abs(s.Zc - prev.Zc)) < tol * 1e-3:
            cls = Classification.NONZERO_FIXED
            break
    if not keep_states:
        states.append(s)
    return Trajectory(
        states=tuple(states),
        classification=cls,
        iterations=it,
        left_domain=left_domain,
    )


def _numeric_jacobian(coeffs: MapCoefficients, state: DynState) -> np.ndarray:
    jac = np.empty((2, 2))
    for col, coord in enumerate(("Xc", "Zc")):
        h = 1e-6 * max(1.0, abs(getattr(state, coord)))
        up = {"Xc": state.Xc, "Zc": state.Zc}
        dn = dict(up)
        up[coord] += h
        dn[coord] -= h
        sp = step(DynState(**up), coeffs)
        sm = step(DynState(**dn), coeffs)
        jac[0, col] = (sp.Xc - sm.Xc) / (2 * h)
        jac[1, col] = (sp.Zc - sm.Zc) / (2 * h)
    return jac


def _newton(coeffs: MapCoefficients, seed: DynState, max_iter: int = 100):
    s = np.array([seed.Xc, seed.Zc])
    for _ in range(max_iter):
        st = DynState(*s)
        nxt = step(st, coeffs)
        f = np.array([nxt.Xc - s[0], nxt.Zc - s[1]])
        if np.max(np.abs(f)) < 1e-13:
            return st
        jac = _numeric_jacobian(coeffs, st) - np.eye(2)
        try:
            delta = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(delta)):
            return None
        s = s - delta
        if np.max(np.abs(s)) > 1e6:
            return None
    return None


def slice_fixed_point(coeffs: MapCoefficients) -> float | None:
    """Closed-form nontrivial fixed point of the Zc = 0 slice,
    Xc* = (1 - linear_x) / quad_xx, when it lies in the physical
    quadrant."""
    if coeffs.quad_xx > 0 and coeffs.linear_x < 1:
        return (1 - coeffs.linear_x) / coeffs.quad_xx
    return None


def fixed_points(coeffs: MapCoefficients) -> list[FixedPoint]:
    """Fixed points found by Newton iteration from a seed grid; the
    origin is always included first."""
    found: list[FixedPoint] = []

    def record(state: DynState):
        for fp in found:
            if (abs(fp.state.Xc - state.Xc) < 1e-9
                    and abs(fp.state.Zc - state.Zc) < 1e-9):
                return
        mags = tuple(
            sorted(np.abs(np.linalg.eigvals(_numeric_jacobian(coeffs, state))))
        )
        found.append(
            FixedPoint(state=state, multipliers=mags, stable=max(mags) < 1.0)
        )

    record(DynState(0.0, 0.0))
    seeds = []
    xs = slice_fixed_point(coeffs)
    if xs is not None:
        seeds.append(DynState(xs, 0.0))
    for xc in (0.01, 0.1, 0.5):
        for zc in (0.0, 0.01, 0.1):
            seeds.append(DynState(xc, zc))
    for seed in seeds:
        sol = _newton(coeffs, seed)
        if sol is not None:
            record(sol)
    return found


@dataclass(frozen=True)
class ThresholdResult:
    lambda1_star: float
    d_lambda1_star_sq: float
    below_ks: bool
    bracket: tuple


def escape_threshold(
    q: int,
    d: int,
    lambda2: float,
    x_start: float,
    bracket: tuple[float, float],
    tol: float = 1e-6,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ThresholdResult:
    """Bisect lambda1 for the escape/no-escape transition of the
    trajectory started at (x_start, 0)."""
    lo, hi = bracket

    def escapes(l1: float) -> bool:
        coeffs = map_coefficients(q, d, Spectrum(l1, lambda2))
        traj = iterate_classify(
            DynState(x_start, 0.0), coeffs, max_iter=max_iter, keep_states=False
        )
        return traj.classification == Classification.ESCAPE

    e_lo, e_hi = escapes(lo), escapes(hi)
    if e_lo == e_hi:
        raise BracketError(
            f"both bracket endpoints ({lo}, {hi}) classify the same "
            f"(escape={e_lo}); no transition to bisect"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if escapes(mid) == e_lo:
            lo = mid
        else:
            hi = mid
    star = 0.5 * (lo + hi)
    return ThresholdResult(
        lambda1_star=star,
        d_lambda1_star_sq=d * star**2,
        below_ks=d * star**2 < 1.0,
        bracket=bracket,
    )
