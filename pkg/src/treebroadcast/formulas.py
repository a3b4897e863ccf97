"""Closed-form moment evaluators.

Three layers, validated against the enumeration oracle in the tests:

* the eleven one-step means/second-moments/covariances of the child
  posterior components Y_ij;
* the second-order expansions of E[Z_i] and E[Z_a Z_b] (dropping the
  cubic remainders), with the intermediate quadratic forms Pi1..Pi5;
* the coefficients of the truncated two-dimensional map in the
  (x + z, -z) coordinates.

Coefficients are assembled as integer ratios over (q-1), (q-2)
denominators and only then combined with the eigenvalues, so each line
can be checked term by term.
"""

from dataclasses import dataclass

from .channel import Spectrum
from .exact import MomentStats


@dataclass(frozen=True)
class YMomentSet:
    """One-step moments of the child posterior components, conditioned
    on root = 1.  `cov_same_pair` is None for q = 2, where no pair of
    distinct non-true states exists within the first category."""

    mean_true: float
    mean_same: float
    mean_cross: float
    sq_true: float
    sq_same: float
    sq_cross: float
    cov_true_same: float
    cov_true_cross: float
    cov_same_pair: float | None
    cov_same_cross: float
    cov_cross_pair: float


@dataclass(frozen=True)
class ZExpansionSet:
    """Second-order approximations of E[Z_i] and E[Z_a Z_b].

    pi1..pi5 are the one-child quadratic forms; each expectation is
    1 + d*A + d(d-1)/2 * A^2 for the matching A.  Entries requiring a
    within-category pair of non-true states are None for q = 2.
    """

    ez_true: float
    ez_same: float
    ez_cross: float
    pi1: float
    pi2: float
    pi3: float
    pi4: float | None
    pi5: float
    ezz_true: float
    ezz_same: float
    ezz_cross: float
    ezz_same_pair: float | None
    ezz_mixed_pair: float


@dataclass(frozen=True)
class MapCoefficients:
    """Coefficients of the truncated quadratic map in (Xc, Zc) =
    (x + z, -z).  quad_xx carries the sign of (q - 3), the lever of the
    below-threshold escape."""

    q: int
    d: int
    linear_x: float
    linear_z: float
    quad_xx: float
    quad_xz: float
    quad_zz_source: float
    quad_zz_decay: float


def y_moments(stats: MomentStats, spec: Spectrum, q: int) -> YMomentSet:
    """Evaluate the eleven one-step Y-moment closed forms."""
    x, z, u, w = stats.x, stats.z, stats.u, stats.w
    l1, l2 = spec.lambda1, spec.lambda2
    cov_same_pair = None
    if q > 2:
        cov_same_pair = (
            (-(2 * (q + 2) * l1 + (q - 2) * l2) / (2 * q * (q - 1) * (q - 2))
             - 1 / (2 * q * (q - 1))) * x
            - z / (2 * (q - 1))
            + 2 * l1 / ((q - 1) * (q - 2)) * u
            + (2 * (q + 1) * l1 + (q - 2) * l2) / ((q - 1) * (q - 2)) * w
        )
    return YMomentSet(
        mean_true=l1 * x + (l1 - l2) * z,
        mean_same=-l1 / (q - 1) * x - (l1 + (q - 1) * l2) / (q - 1) * z,
        mean_cross=l2 * z,
        sq_true=(1 + l2 - 2 * l1) / (2 * q) * x + l1 * u + (l1 - l2) * w,
        sq_same=(
            (1 / (2 * q) + l2 / (2 * q) + l1 / (q * (q - 1))) * x
            - l1 / (q - 1) * u
            - (l1 + (q - 1) * l2) / (q - 1) * w
        ),
        sq_cross=(1 - l2) / (2 * q) * x + l2 * w,
        cov_true_same=(
            ((q + 2) * l1 - l2 - 1) / (2 * q * (q - 1)) * x
            - z / (2 * (q - 1))
            - l1 / (q - 1) * u
            - ((q + 1) * l1 - l2) / (q - 1) * w
        ),
        cov_true_cross=-l1 / (2 * q) * x + z / (2 * q) + l1 * w,
        cov_same_pair=cov_same_pair,
        cov_same_cross=l1 / (2 * q * (q - 1)) * x + z / (2 * q) - l1 / (q - 1) * w,
        cov_cross_pair=(
            (l2 - 1) / (2 * q * (q - 1)) * x
            - z / (2 * (q - 1))
            - l2 / (q - 1) * w
        ),
    )


def z_expansions(stats: MomentStats, spec: Spectrum, q: int, d: int) -> ZExpansionSet:
    """Second-order expansions of the Z moments (cubic remainders
    dropped).  Exact at d = 1 for the means, where Z_i is linear in the
    single child vector."""
    x, z, u, w = stats.x, stats.z, stats.u, stats.w
    l1, l2 = spec.lambda1, spec.lambda2
    du = u - x / (2 * q)   # concentration defects of the second moments
    dw = w - x / (2 * q)
    half = d * (d - 1) / 2

    def expand(a):
        return 1 + d * a + half * a**2

    a_true = 2 * q * l1**2 * x + 2 * q * (l1**2 - l2**2) * z
    a_same = (-2 * q * l1**2 / (q - 1) * x
              - (2 * q * l1**2 / (q - 1) + 2 * q * l2**2) * z)
    a_cross = 2 * q * l2**2 * z

    pi1 = (6 * q * l1**2 * x + 6 * q * (l1**2 - l2**2) * z
           + 4 * q**2 * l1**3 * du
           + 12 * q**2 * l1**2 * (l1 - l2) * dw)
    pi2 = (2 * q * (q - 3) / (q - 1) * l1**2 * x
           + (2 * q * (q - 3) / (q - 1) * l1**2 - 6 * q * l2**2) * z
           - 4 * q**2 / (q - 1) * l1**3 * du
           - 4 * q**2 * (3 * l1 + (q - 3) * l2) / (q - 1) * l1**2 * dw)
    pi3 = (2 * q * l1**2 * x + 2 * q * (l1**2 + l2**2) * z
           + 4 * q**2 * l1**2 * l2 * dw)
    pi4 = None
    if q > 2:
        pi4 = (-6 * q * l1**2 / (q - 1) * x
               - (6 * q * l1**2 / (q - 1) + 6 * q * l2**2) * z
               + 8 * q**2 * l1**3 / ((q - 1) * (q - 2)) * du
               + 4 * q**2 * (6 * l1 + (3 * q - 6) * l2)
               / ((q - 1) * (q - 2)) * l1**2 * dw)
    pi5 = (-2 * q * l1**2 / (q - 1) * x
           + (-2 * q * l1**2 / (q - 1) + 2 * q * l2**2) * z
           - 4 * q**2 / (q - 1) * l1**2 * l2 * dw)

    return ZExpansionSet(
        ez_true=expand(a_true),
        ez_same=expand(a_same),
        ez_cross=expand(a_cross),
        pi1=pi1, pi2=pi2, pi3=pi3, pi4=pi4, pi5=pi5,
        ezz_true=expand(pi1),
        ezz_same=expand(pi2),
        ezz_cross=expand(pi3),
        ezz_same_pair=expand(pi4) if pi4 is not None else None,
        ezz_mixed_pair=expand(pi5),
    )


def map_coefficients(q: int, d: int, spec: Spectrum) -> MapCoefficients:
    """Coefficients of the truncated map in (Xc, Zc) coordinates."""
    l1, l2 = spec.lambda1, spec.lambda2
    half = d * (d - 1) / 2
    return MapCoefficients(
        q=q,
        d=d,
        linear_x=d * l1**2,
        linear_z=d * l2**2,
        quad_xx=half * 2 * q * (q - 3) / (q - 1) * l1**4,
        quad_xz=half * 4 * q * l1**2 * l2**2,
        quad_zz_source=half * q / (q - 1) * l1**4,
        quad_zz_decay=half * 4 * q * l2**4,
    )


def approx_xz_step(x: float, z: float, q: int, d: int, spec: Spectrum):
    """One step of the truncated recursion written directly in the
    (x, z) moment coordinates; algebraically identical to the (Xc, Zc)
    form of dynsys.step under Xc = x + z, Zc = -z."""
    l1, l2 = spec.lambda1, spec.lambda2
    half = d * (d - 1) / 2
    s = x + z
    x_next = (d * l1**2 * x + (d * l1**2 - d * l2**2) * z
              + half * (q * (2 * q - 5) / (q - 1) * l1**4 * s**2
                        - 4 * q * l1**2 * l2**2 * s * z
                        - 4 * q * l2**4 * z**2))
    z_next = (d * l2**2 * z
              - half * (q / (q - 1) * l1**4 * s**2 - 4 * q * l2**4 * z**2))
    return x_next, z_next
