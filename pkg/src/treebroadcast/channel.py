"""The 2q-state two-category symmetric channel.

States 1..2q are split into two categories {1..q} and {q+1..2q}.  A
transition keeps the state with probability p0, moves to each other
state of the same category with probability p1, and to each state of
the other category with probability p2, so p0 + (q-1) p1 + q p2 = 1.

All public state arguments are 1-based; numpy arrays are 0-indexed
internally.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

NORM_TOL = 1e-12

# Probabilities in [-NEG_CLAMP, 0) are treated as float round-off and
# clamped to 0; anything below is rejected.
NEG_CLAMP = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    """Channel parameters (q, p0, p1, p2)."""

    q: int
    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        if self.q < 2:
            raise ValidationError(f"q must be >= 2, got {self.q}")
        for name in ("p0", "p1", "p2"):
            p = getattr(self, name)
            if p < -NEG_CLAMP:
                raise ValidationError(f"{name} = {p} is negative")
            if p < 0.0:
                object.__setattr__(self, name, 0.0)
        total = self.p0 + (self.q - 1) * self.p1 + self.q * self.p2
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(
                f"p0 + (q-1) p1 + q p2 = {total!r}, expected 1 within {NORM_TOL}"
            )

    @property
    def n_states(self) -> int:
        return 2 * self.q


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of the channel matrix.

    lambda3 = 1 always; lambda_star is the second largest eigenvalue in
    absolute value, max(|lambda1|, |lambda2|).
    """

    lambda1: float
    lambda2: float
    lambda3: float = 1.0

    @property
    def lambda_star(self) -> float:
        return max(abs(self.lambda1), abs(self.lambda2))


@dataclass(frozen=True)
class DistanceEntries:
    """s-step transition probabilities from a fixed state: same state
    (U), same category different state (V), cross category (W)."""

    s: int
    U: float
    V: float
    W: float


@dataclass(frozen=True)
class KSReport:
    """Kesten-Stigum criterion d * lambda_star^2 > 1, with the two
    eigenvalue contributions reported separately.

    warn is set when the standing assumption 0 < |lambda2| <= |lambda1|
    fails (lambda1 = 0 or |lambda2| > |lambda1|); threshold statements
    in this library are calibrated for the non-warned regime.
    """

    d: int
    lambda_star: float
    d_lambda_sq: float
    d_lambda1_sq: float
    d_lambda2_sq: float
    solvable: bool
    warn: bool


def build_matrix(params: ChannelParams) -> np.ndarray:
    """Assemble the 2q x 2q transition matrix (symmetric, doubly
    stochastic)."""
    q = params.q
    m = np.full((2 * q, 2 * q), params.p2)
    m[:q, :q] = params.p1
    m[q:, q:] = params.p1
    np.fill_diagonal(m, params.p0)
    return m


def spectrum(params: ChannelParams) -> Spectrum:
    """Closed-form eigenvalues lambda1 = p0 - p1,
    lambda2 = p0 + (q-1) p1 - q p2, lambda3 = 1."""
    q = params.q
    return Spectrum(
        lambda1=params.p0 - params.p1,
        lambda2=params.p0 + (q - 1) * params.p1 - q * params.p2,
    )


def params_from_eigenvalues(q: int, lambda1: float, lambda2: float) -> ChannelParams:
    """Invert the eigenvalue formulas to recover (p0, p1, p2).

    Raises ValidationError naming the probability that went negative
    when the pair is infeasible.
    """
    if q < 2:
        raise ValidationError(f"q must be >= 2, got {q}")
    p2 = (1.0 - lambda2) / (2 * q)
    p1 = ((1.0 + lambda2) / 2.0 - lambda1) / q
    p0 = p1 + lambda1
    for name, p in (("p0", p0), ("p1", p1), ("p2", p2)):
        if p < -NEG_CLAMP:
            raise ValidationError(
                f"(lambda1={lambda1}, lambda2={lambda2}) infeasible for q={q}: "
                f"{name} = {p} is negative"
            )
    return ChannelParams(q=q, p0=max(p0, 0.0), p1=max(p1, 0.0), p2=max(p2, 0.0))


def ks_check(d: int, spec: Spectrum) -> KSReport:
    """Evaluate the Kesten-Stigum criterion for a d-ary tree."""
    if d < 1:
        raise ValidationError(f"d must be >= 1, got {d}")
    lam = spec.lambda_star
    return KSReport(
        d=d,
        lambda_star=lam,
        d_lambda_sq=d * lam**2,
        d_lambda1_sq=d * spec.lambda1**2,
        d_lambda2_sq=d * spec.lambda2**2,
        solvable=d * lam**2 > 1.0,
        warn=(spec.lambda1 == 0.0 or abs(spec.lambda2) > abs(spec.lambda1)),
    )


def distance_entries(params: ChannelParams, s: int) -> DistanceEntries:
    """s-step transition entries (U_s, V_s, W_s) by the three-term
    recursion from (1, 0, 0); satisfies U_s - V_s = lambda1^s."""
    if s < 0:
        raise ValidationError(f"s must be >= 0, got {s}")
    q, p0, p1, p2 = params.q, params.p0, params.p1, params.p2
    u, v, w = 1.0, 0.0, 0.0
    for _ in range(s):
        u, v, w = (
            p0 * u + (q - 1) * p1 * v + q * p2 * w,
            p1 * u + (p0 + (q - 2) * p1) * v + q * p2 * w,
            p2 * u + (q - 1) * p2 * v + (p0 + (q - 1) * p1) * w,
        )
    return DistanceEntries(s=s, U=u, V=v, W=w)


def symmetry_permutation(q: int, c: int) -> np.ndarray:
    """Canonical channel symmetry mapping state 1 to state c.

    Returns a 0-indexed image array pi with pi[i-1] = (image of state i) - 1,
    satisfying M[pi[i], pi[j]] = M[i, j] for every channel with this q.

    For c <= q this is the transposition (1 c); for c > q the category
    swap i <-> i +- q composed with the transposition (1, c-q) applied
    within the first category before the swap.
    """
    if not 1 <= c <= 2 * q:
        raise ValidationError(f"state c = {c} out of range 1..{2 * q}")
    pi = np.arange(2 * q)
    if c <= q:
        pi[0], pi[c - 1] = pi[c - 1], pi[0]
    else:
        tau = np.arange(2 * q)
        tau[0], tau[c - q - 1] = tau[c - q - 1], tau[0]
        swap = np.concatenate([np.arange(q, 2 * q), np.arange(q)])
        pi = swap[tau]
    return pi
