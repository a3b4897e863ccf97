"""Broadcast sampling on finite d-ary trees and exact root posteriors
by upward message passing.

Leaf configurations are level-ordered left to right: the children of
vertex k at one level occupy positions d*k .. d*k+d-1 of the next.
Spins are 1-based (states 1..2q) at the API surface.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, build_matrix
from .errors import CapacityError, ValidationError

POSTERIOR_TOL = 1e-10
DEFAULT_LEAF_CAP = 2**24


@dataclass(frozen=True)
class TreeShape:
    """A depth-n d-ary tree."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"branching factor d must be >= 1, got {self.d}")
        if self.n < 0:
            raise ValidationError(f"depth n must be >= 0, got {self.n}")

    @property
    def leaves(self) -> int:
        return self.d**self.n


def check_leaf_cap(shape: TreeShape, cap: int = DEFAULT_LEAF_CAP) -> None:
    if shape.leaves > cap:
        raise CapacityError(
            f"d^n = {shape.leaves} leaves exceeds the cap of {cap}"
        )


def validate_posterior(vec: np.ndarray, q: int) -> np.ndarray:
    """Check the 2q-simplex invariants and return the vector as float64."""
    v = np.asarray(vec, dtype=float)
    if v.shape != (2 * q,):
        raise ValidationError(f"posterior vector has shape {v.shape}, expected ({2*q},)")
    if np.any(v < 0.0):
        raise ValidationError("posterior vector has a negative component")
    if abs(v.sum() - 1.0) > POSTERIOR_TOL:
        raise ValidationError(f"posterior vector sums to {v.sum()!r}, expected 1")
    return v


def broadcast_sample(
    params: ChannelParams,
    shape: TreeShape,
    root_state: int,
    rng: np.random.Generator,
    leaf_cap: int = DEFAULT_LEAF_CAP,
) -> np.ndarray:
    """Sample the level-n spins of a broadcast started from root_state.

    Returns a 1-based int array of length d^n.
    """
    cfg = broadcast_sample_batch(params, shape, root_state, 1, rng, leaf_cap)
    return cfg[0]


def broadcast_sample_batch(
    params: ChannelParams,
    shape: TreeShape,
    root_state: int,
    n_samples: int,
    rng: np.random.Generator,
    leaf_cap: int = DEFAULT_LEAF_CAP,
) -> np.ndarray:
    """Sample n_samples independent broadcasts; returns (n_samples, d^n)."""
    if not 1 <= root_state <= params.n_states:
        raise ValidationError(
            f"root_state = {root_state} out of range 1..{params.n_states}"
        )
    check_leaf_cap(shape, leaf_cap)
    cum = build_matrix(params).cumsum(axis=1)
    states = np.full((n_samples, 1), root_state - 1)
    for _ in range(shape.n):
        u = rng.random((n_samples, states.shape[1], shape.d))
        # child state = number of cumulative cells strictly below u
        states = (u[..., None] > cum[states][:, :, None, :]).sum(axis=3)
        states = states.reshape(n_samples, -1)
    return states + 1


def bp_combine(params: ChannelParams, children: list[np.ndarray]) -> np.ndarray:
    """Combine child posteriors into the parent posterior.

    Component i is proportional to prod_j (M . Y_j)_i; the result is
    renormalized so only ratios of the children matter.
    """
    if len(children) < 1:
        raise ValidationError("bp_combine needs at least one child")
    m = build_matrix(params)
    out = np.ones(params.n_states)
    for y in children:
        out *= m @ validate_posterior(y, params.q)
    return out / out.sum()


def _as_index_config(config, shape: TreeShape, n_states: int) -> np.ndarray:
    cfg = np.asarray(config, dtype=int)
    if cfg.shape != (shape.leaves,):
        raise ValidationError(
            f"config has length {cfg.size}, expected d^n = {shape.leaves}"
        )
    if np.any(cfg < 1) or np.any(cfg > n_states):
        raise ValidationError("config contains a spin out of range")
    return cfg - 1


def posterior_root(
    params: ChannelParams, shape: TreeShape, config
) -> np.ndarray:
    """Exact root posterior under uniform prior for one leaf
    configuration, by bottom-up message passing with per-node
    renormalization."""
    cfg = _as_index_config(config, shape, params.n_states)
    return posterior_root_batch(params, shape, cfg[None, :] + 1)[0]


def posterior_root_batch(
    params: ChannelParams, shape: TreeShape, configs: np.ndarray
) -> np.ndarray:
    """Root posteriors for a batch of configurations (rows, 1-based).

    Returns an array of shape (n_configs, 2q).
    """
    cfg = np.asarray(configs, dtype=int) - 1
    n_states = params.n_states
    m = build_matrix(params)
    msgs = np.eye(n_states)[cfg]  # (C, leaves, 2q) indicator messages
    for _ in range(shape.n):
        up = msgs @ m  # M symmetric: (M . Y)_i = (Y . M)_i
        c, nodes, _ = up.shape
        msgs = up.reshape(c, nodes // shape.d, shape.d, n_states).prod(axis=2)
        msgs /= msgs.sum(axis=2, keepdims=True)
    return msgs[:, 0, :]


def root_likelihoods_batch(
    params: ChannelParams, shape: TreeShape, configs: np.ndarray
) -> np.ndarray:
    """Unnormalized leaf likelihoods L(s) = P(config | root = s) for a
    batch of configurations (rows, 1-based); shape (n_configs, 2q).

    No renormalization is applied, so this is only meant for the small
    trees the exact oracle enumerates.
    """
    cfg = np.asarray(configs, dtype=int) - 1
    n_states = params.n_states
    m = build_matrix(params)
    lik = np.eye(n_states)[cfg]
    for _ in range(shape.n):
        up = lik @ m
        c, nodes, _ = up.shape
        lik = up.reshape(c, nodes // shape.d, shape.d, n_states).prod(axis=2)
    return lik[:, 0, :]
