"""Brute-force exact moments by enumerating every leaf configuration
weighted by its probability given root state 1.

Everything here is ground truth for the Monte Carlo engines and for
the closed-form evaluators; accuracy is limited only by float
rounding, so accumulation uses compensated (fsum) summation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .broadcast import TreeShape, root_likelihoods_batch
from .channel import ChannelParams, build_matrix
from .errors import CapacityError

DEFAULT_ENUM_CAP = 10**7


@dataclass(frozen=True)
class MomentStats:
    """First and second central moments (x, y, z, u, v, w) of the root
    posterior at the true state, a same-category state and a
    cross-category state, conditioned on root = 1.

    Standard errors are zero for exact engines.
    """

    q: int
    level: int
    x: float
    y: float
    z: float
    u: float
    v: float
    w: float
    se_x: float = 0.0
    se_y: float = 0.0
    se_z: float = 0.0
    se_u: float = 0.0
    se_v: float = 0.0
    se_w: float = 0.0


@dataclass(frozen=True)
class CrossMoments:
    """The five cross expectations between posterior components
    (true/same/cross and the two within-pair cases), conditioned on
    root = 1."""

    q: int
    level: int
    e12: float
    e13: float
    e23: float
    e_q1_2q: float
    e_2_q: float


@dataclass(frozen=True)
class ZMoments:
    """Exact expectations of the per-child likelihood-ratio products
    Z_i and their pairwise products, for representative indices."""

    q: int
    d: int
    level: int
    ez: dict = field(default_factory=dict)    # state -> E[Z_state]
    ezz: dict = field(default_factory=dict)   # (a, b) -> E[Z_a Z_b]


def _fsum(a: np.ndarray) -> float:
    return math.fsum(a.tolist())


def enumerate_configs(n_states: int, length: int, cap: int) -> np.ndarray:
    """All configurations of `length` spins in mixed-radix order,
    1-based, shape (n_states^length, length)."""
    count = n_states**length
    if count > cap:
        raise CapacityError(
            f"enumeration needs {count} configurations, cap is {cap}"
        )
    idx = np.arange(count)
    radix = n_states ** np.arange(length - 1, -1, -1)
    return (idx[:, None] // radix) % n_states + 1


def _posterior_table(params: ChannelParams, shape: TreeShape, cap: int):
    """Likelihood table over all leaf configurations of the tree:
    returns (weights given root=1, posteriors, likelihoods)."""
    configs = enumerate_configs(params.n_states, shape.leaves, cap)
    lik = root_likelihoods_batch(params, shape, configs)
    post = lik / lik.sum(axis=1, keepdims=True)
    return lik[:, 0], post, lik


def exact_moments(
    params: ChannelParams, shape: TreeShape, cap: int = DEFAULT_ENUM_CAP
) -> MomentStats:
    """Exact (x, y, z, u, v, w) at level n by full enumeration."""
    q = params.q
    wgt, post, _ = _posterior_table(params, shape, cap)
    c0 = post[:, 0] - 1 / (2 * q)
    c1 = post[:, 1:q].mean(axis=1) - 1 / (2 * q)
    c2 = post[:, q:].mean(axis=1) - 1 / (2 * q)
    s1 = (post[:, 1:q] - 1 / (2 * q)) ** 2
    s2 = (post[:, q:] - 1 / (2 * q)) ** 2
    return MomentStats(
        q=q,
        level=shape.n,
        x=_fsum(wgt * c0),
        y=_fsum(wgt * c1),
        z=_fsum(wgt * c2),
        u=_fsum(wgt * c0**2),
        v=_fsum(wgt * s1.mean(axis=1)),
        w=_fsum(wgt * s2.mean(axis=1)),
    )


def exact_cross_moments(
    params: ChannelParams, shape: TreeShape, cap: int = DEFAULT_ENUM_CAP
) -> CrossMoments:
    """The five cross expectations by enumeration.

    For q = 2 the representative states 2 and q coincide, so e_2_q
    degenerates to a plain second moment; callers skip the matching
    identity there.
    """
    q = params.q
    wgt, post, _ = _posterior_table(params, shape, cap)
    cen = post - 1 / (2 * q)
    return CrossMoments(
        q=q,
        level=shape.n,
        e12=_fsum(wgt * cen[:, 0] * cen[:, 1]),
        e13=_fsum(wgt * cen[:, 0] * cen[:, q]),
        e23=_fsum(wgt * cen[:, 1] * cen[:, q]),
        e_q1_2q=_fsum(wgt * cen[:, q] * cen[:, 2 * q - 1]),
        e_2_q=_fsum(wgt * cen[:, 1] * cen[:, q - 1]),
    )


def child_posterior_law(
    params: ChannelParams, d: int, n: int, cap: int = DEFAULT_ENUM_CAP
):
    """Exact law of the posterior vector of one root-child subtree,
    conditioned on root = 1.

    Returns (weights, posteriors): weights[A] = P(subtree config A |
    root = 1) and posteriors[A] the child-root posterior vector, over
    all (2q)^(d^n) subtree leaf configurations.
    """
    m = build_matrix(params)
    shape = TreeShape(d, n)
    configs = enumerate_configs(params.n_states, shape.leaves, cap)
    lik = root_likelihoods_batch(params, shape, configs)
    wgt = lik @ m[0]  # mix over the child state drawn from row 1 of M
    post = lik / lik.sum(axis=1, keepdims=True)
    return wgt, post


def exact_z_moments(
    params: ChannelParams, d: int, n: int, cap: int = DEFAULT_ENUM_CAP
) -> ZMoments:
    """Exact E[Z_i] and E[Z_a Z_b] under root = 1.

    Z_i is a product of d iid per-subtree factors 2q (M . Y_j)_i, so
    each expectation is the d-th power of a single-subtree enumeration.
    """
    q = params.q
    m = build_matrix(params)
    wgt, post = child_posterior_law(params, d, n, cap)
    g = 2 * q * (post @ m)  # (configs, 2q): the per-subtree factors
    states = (1, 2, q + 1)
    pairs = (
        (1, 1), (2, 2), (q + 1, q + 1),
        (1, 2), (1, q + 1), (2, q), (2, q + 1), (q + 1, 2 * q),
    )
    ez = {s: _fsum(wgt * g[:, s - 1]) ** d for s in states}
    ezz = {
        (a, b): _fsum(wgt * g[:, a - 1] * g[:, b - 1]) ** d for (a, b) in pairs
    }
    return ZMoments(q=q, d=d, level=n, ez=ez, ezz=ezz)
