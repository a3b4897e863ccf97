import math

import numpy as np
import pytest

from treebroadcast import ChannelParams
from treebroadcast.exact import _fsum, child_posterior_law


def random_channel(rng: np.random.Generator, q: int) -> ChannelParams:
    """A random valid channel: weights drawn uniformly then normalized
    against the multiplicity-weighted sum p0 + (q-1) p1 + q p2 = 1."""
    a, b, c = rng.random(3) + 1e-3
    total = a + (q - 1) * b + q * c
    return ChannelParams(q=q, p0=a / total, p1=b / total, p2=c / total)


def y_moment_oracle(params: ChannelParams, d: int, n: int) -> dict:
    """Enumeration ground truth for the eleven one-step child-posterior
    moments, conditioned on the parent root being state 1.

    The child law is the root-c posterior law mixed over the child
    state c drawn from row 1 of the channel; child_posterior_law
    returns exactly that mixture as (weights, posteriors).
    """
    q = params.q
    wgt, post = child_posterior_law(params, d, n)
    cen = post - 1 / (2 * q)

    def e(*cols):
        prod = wgt.copy()
        for c in cols:
            prod = prod * cen[:, c]
        return _fsum(prod)

    out = {
        "mean_true": e(0),
        "mean_same": e(1),
        "mean_cross": e(q),
        "sq_true": e(0, 0),
        "sq_same": e(1, 1),
        "sq_cross": e(q, q),
        "cov_true_same": e(0, 1),
        "cov_true_cross": e(0, q),
        "cov_same_cross": e(1, q),
        "cov_cross_pair": e(q, 2 * q - 1),
    }
    out["cov_same_pair"] = e(1, 2) if q > 2 else None
    return out


def assert_close(a, b, tol, label=""):
    assert math.isfinite(a) and math.isfinite(b), label
    assert abs(a - b) <= tol, f"{label}: |{a} - {b}| = {abs(a - b)} > {tol}"


def exact_envelope():
    """The (params, d, n) grid small enough for full enumeration:
    q in {2,3,4} x d in {1,2} x n in {0,1}, plus q=2, d=2, n=2."""
    from treebroadcast import params_from_eigenvalues

    eigs = {2: (0.5, 0.3), 3: (0.4, 0.2), 4: (0.3, -0.2)}
    points = []
    for q, (l1, l2) in eigs.items():
        params = params_from_eigenvalues(q, l1, l2)
        for d in (1, 2):
            for n in (0, 1):
                points.append((params, d, n))
    points.append((params_from_eigenvalues(2, 0.5, 0.3), 2, 2))
    return points


def check_moment_identities(params, d, n, tol=1e-12):
    """Structural invariants of the exact moment vector and the five
    cross-moment identities; raises AssertionError with the offending
    quantity named."""
    from treebroadcast import TreeShape, exact_cross_moments, exact_moments

    q = params.q
    shape = TreeShape(d, n)
    s = exact_moments(params, shape)
    c = exact_cross_moments(params, shape)
    x, y, z, u, v, w = s.x, s.y, s.z, s.u, s.v, s.w
    assert x >= -tol, f"x = {x} < 0"
    assert z <= tol, f"z = {z} > 0"
    assert x + z > -tol, f"x + z = {x + z} <= 0"
    assert abs(x + (q - 1) * y + q * z) <= tol, "sum rule x+(q-1)y+qz"
    assert abs(x - (u + (q - 1) * v + q * w)) <= tol, "second-moment sum rule"
    eig1 = (x + (q - 1) * y - q * z) / (2 * q)
    eig2 = (x - y) / (2 * q)
    assert eig1 >= -tol, f"covariance eigenvalue {eig1} < 0"
    assert eig2 >= -tol, f"covariance eigenvalue {eig2} < 0"
    assert_close(c.e12, v + (y - x) / (2 * q), tol, "identity (ii)")
    assert_close(c.e13, w + (z - x) / (2 * q), tol, "identity (iii)")
    assert_close(
        c.e23,
        -w / (q - 1) - z / (2 * q * (q - 1)) - y / (2 * q),
        tol,
        "identity (iv)",
    )
    assert_close(
        c.e_q1_2q, -w / (q - 1) - z / (2 * (q - 1)), tol, "identity (v)"
    )
    if q > 2:
        assert_close(
            c.e_2_q,
            -2 * v / (q - 2) - z / (2 * (q - 1)) + q * w / ((q - 1) * (q - 2)),
            tol,
            "identity (vi)",
        )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
