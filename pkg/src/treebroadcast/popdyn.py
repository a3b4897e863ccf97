"""Monte Carlo engines for the moment sequence.

Two estimators of the level-n posterior law conditioned on root = 1:

* population dynamics (`init_population` / `evolve_level`), which
  iterates the one-level distributional recursion on an empirical
  population of posterior vectors, using the canonical channel
  symmetry to condition each sampled child on its drawn state;
* independent full-tree sampling (`mc_tree_moments`), which is
  unbiased at finite depth and free of population-recycling
  correlation.

Also hosts the survival/extinction classifier used for threshold
searches on the full recursion.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .broadcast import (
    TreeShape,
    broadcast_sample_batch,
    posterior_root_batch,
)
from .channel import ChannelParams, build_matrix, symmetry_permutation
from .errors import BracketError, ValidationError
from .exact import MomentStats

DEFAULT_POPULATION = 10**5
DEFAULT_LEVELS = 50
SURVIVAL_WINDOW = 10


class Verdict(Enum):
    EXTINCT = "EXTINCT"
    SURVIVING = "SURVIVING"
    AMBIGUOUS = "AMBIGUOUS"


@dataclass(frozen=True)
class Population:
    """Empirical law of the posterior vector at a level: members is a
    (P, 2q) array of simplex vectors."""

    q: int
    level: int
    members: np.ndarray


def init_population(q: int, pop_size: int) -> Population:
    """Level-0 law: the point mass at the indicator of state 1."""
    if pop_size < 1:
        raise ValidationError(f"population size must be >= 1, got {pop_size}")
    members = np.zeros((pop_size, 2 * q))
    members[:, 0] = 1.0
    return Population(q=q, level=0, members=members)


def _inverse_permutation_table(q: int) -> np.ndarray:
    """Row c-1 re-indexes a root-1 posterior into the root-c posterior
    law: Y = W[table[c-1]]."""
    table = np.empty((2 * q, 2 * q), dtype=int)
    for c in range(1, 2 * q + 1):
        table[c - 1] = np.argsort(symmetry_permutation(q, c))
    return table


def evolve_level(
    pop: Population,
    params: ChannelParams,
    d: int,
    rng: np.random.Generator,
) -> Population:
    """One synchronous level of the distributional recursion.

    Each new member draws d children: a child state from row 1 of the
    channel, a uniformly random member of the frozen previous level,
    permuted to the drawn state's conditional law, then combined by
    the one-node posterior product.
    """
    if params.q != pop.q:
        raise ValidationError("channel q does not match the population")
    p = pop.members.shape[0]
    m = build_matrix(params)
    inv_perms = _inverse_permutation_table(params.q)
    cum0 = m[0].cumsum()
    child_states = np.searchsorted(cum0, rng.random((p, d)), side="right")
    picks = rng.integers(0, p, size=(p, d))
    drawn = pop.members[picks]  # (P, d, 2q)
    permuted = np.take_along_axis(drawn, inv_perms[child_states], axis=2)
    msgs = permuted @ m
    members = msgs.prod(axis=1)
    members /= members.sum(axis=1, keepdims=True)
    return Population(q=pop.q, level=pop.level + 1, members=members)


def _stats_from_vectors(vectors: np.ndarray, q: int, level: int) -> MomentStats:
    p = vectors.shape[0]
    inv = 1 / (2 * q)
    a = vectors[:, 0] - inv
    b = (vectors[:, 1:q] - inv).mean(axis=1)
    c = (vectors[:, q:] - inv).mean(axis=1)
    per = {
        "x": a,
        "y": b,
        "z": c,
        "u": a**2,
        "v": ((vectors[:, 1:q] - inv) ** 2).mean(axis=1),
        "w": ((vectors[:, q:] - inv) ** 2).mean(axis=1),
    }
    means = {k: float(v.mean()) for k, v in per.items()}
    ses = {
        f"se_{k}": float(v.std(ddof=1) / np.sqrt(p)) if p > 1 else 0.0
        for k, v in per.items()
    }
    return MomentStats(q=q, level=level, **means, **ses)


def estimate_moments(pop: Population) -> MomentStats:
    """Plug-in moment estimates with per-member standard errors."""
    return _stats_from_vectors(pop.members, pop.q, pop.level)


def mc_tree_moments(
    params: ChannelParams,
    shape: TreeShape,
    n_samples: int,
    rng: np.random.Generator,
) -> MomentStats:
    """Unbiased finite-depth estimate from n_samples independent
    broadcast + exact-posterior evaluations."""
    if n_samples < 1:
        raise ValidationError(f"n_samples must be >= 1, got {n_samples}")
    configs = broadcast_sample_batch(params, shape, 1, n_samples, rng)
    posts = posterior_root_batch(params, shape, configs)
    return _stats_from_vectors(posts, params.q, shape.n)


def run_series(
    params: ChannelParams,
    d: int,
    pop_size: int = DEFAULT_POPULATION,
    levels: int = DEFAULT_LEVELS,
    seed: int = 0,
) -> list[MomentStats]:
    """Population-dynamics moment series for levels 0..levels."""
    rng = np.random.default_rng(seed)
    pop = init_population(params.q, pop_size)
    series = [estimate_moments(pop)]
    for _ in range(levels):
        pop = evolve_level(pop, params, d, rng)
        series.append(estimate_moments(pop))
    return series


@dataclass(frozen=True)
class DiagnosticsRow:
    level: int
    u_ratio_dev: float  # u/x - 1/2q
    w_ratio_dev: float  # w/x - 1/2q


def concentration_diagnostics(series: list[MomentStats], q: int):
    """Per-level deviations of u/x and w/x from 1/2q, for levels where
    x is resolved (x > 10 se_x); returns (rows, omitted levels)."""
    rows, omitted = [], []
    for s in series:
        if s.x > 10 * s.se_x and s.x > 0:
            rows.append(
                DiagnosticsRow(
                    level=s.level,
                    u_ratio_dev=s.u / s.x - 1 / (2 * q),
                    w_ratio_dev=s.w / s.x - 1 / (2 * q),
                )
            )
        else:
            omitted.append(s.level)
    return rows, omitted


def classify_series(
    series: list[MomentStats],
    pop_size: int,
    x_floor: float | None = None,
    x_ceiling: float | None = None,
    window: int = SURVIVAL_WINDOW,
) -> Verdict:
    """Survival/extinction dichotomy on an estimated moment series.

    EXTINCT when x stays below the noise floor for `window` consecutive
    levels, SURVIVING when it stays above the ceiling over the final
    `window` levels, AMBIGUOUS otherwise.
    """
    if x_floor is None:
        x_floor = 10 / np.sqrt(pop_size)
    if x_ceiling is None:
        x_ceiling = 30 / np.sqrt(pop_size)
    xs = [s.x for s in series]
    if len(xs) >= window and all(x > x_ceiling for x in xs[-window:]):
        return Verdict.SURVIVING
    run = 0
    for x in xs:
        run = run + 1 if x < x_floor else 0
        if run >= window:
            return Verdict.EXTINCT
    return Verdict.AMBIGUOUS


@dataclass(frozen=True)
class SurvivalThreshold:
    lambda1_star: float
    d_lambda1_star_sq: float
    below_ks: bool
    ambiguous: bool
    verdicts: tuple  # (lambda1, Verdict) pairs probed during the search


def survival_threshold(
    q: int,
    d: int,
    lambda2: float,
    bracket: tuple[float, float],
    pop_size: int = DEFAULT_POPULATION,
    levels: int = DEFAULT_LEVELS,
    seed: int = 0,
    resolution: float = 0.005,
) -> SurvivalThreshold:
    """Bisect lambda1 for the extinction/survival transition of the
    full population-dynamics recursion.

    AMBIGUOUS runs are treated as not-surviving for bracketing and
    flagged in the result.
    """
    from .channel import params_from_eigenvalues  # local to avoid cycle noise

    probed = []
    ambiguous = False

    def verdict(l1: float) -> Verdict:
        nonlocal ambiguous
        params = params_from_eigenvalues(q, l1, lambda2)
        v = classify_series(run_series(params, d, pop_size, levels, seed), pop_size)
        probed.append((l1, v))
        if v is Verdict.AMBIGUOUS:
            ambiguous = True
        return v

    lo, hi = bracket
    v_lo, v_hi = verdict(lo), verdict(hi)
    if (v_lo is Verdict.SURVIVING) == (v_hi is Verdict.SURVIVING):
        raise BracketError(
            f"no extinction/survival transition in bracket ({lo}, {hi}): "
            f"{v_lo.value} vs {v_hi.value}"
        )
    if v_lo is Verdict.SURVIVING:
        lo, hi = hi, lo  # orient so hi is the surviving side
    while abs(hi - lo) > resolution:
        mid = 0.5 * (lo + hi)
        if verdict(mid) is Verdict.SURVIVING:
            hi = mid
        else:
            lo = mid
    return SurvivalThreshold(
        lambda1_star=hi,
        d_lambda1_star_sq=d * hi**2,
        below_ks=d * hi**2 < 1.0,
        ambiguous=ambiguous,
        verdicts=tuple(probed),
    )
