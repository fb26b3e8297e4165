"""Entropy of class states and its maximization, Devetak-Winter rates on
ccq states, and coherent information after a 50% erasure of A'."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from .criteria import ccq_state
from .linops import (
    Operator,
    abs_left,
    abs_right,
    binary_entropy,
    entropy_of_probabilities,
    hermitian_eigenvalues,
    partial_trace,
    singular_values,
    von_neumann_entropy,
)
from .states import (
    HADAMARD_ANGLES,
    ClassParams,
    UnitaryAngles,
    XYPair,
    add_white_noise,
    class_c_blocks,
    fourier_unitary,
    lambda_tilde,
    spider_y,
    xy_from_unitary,
)

log = logging.getLogger(__name__)

DEFAULT_D_CAP = 40
GRID_POINTS = 10_000


def _entropy(m: np.ndarray) -> float:
    """Entropy of a PSD matrix known to have unit trace (roundoff clipped)."""
    w = hermitian_eigenvalues(m).eigenvalues
    return entropy_of_probabilities(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class EntropyBreakdown:
    h_p: float
    x_coherence: float  # p H((1 - alpha)/2)
    x_shield: float  # p S(sqrt(X+X))
    y_coherence: float  # (1-p) H((1 - beta)/2)
    y_shield: float  # (1-p) S(sqrt(Y+Y))

    @property
    def total(self) -> float:
        return self.h_p + self.x_coherence + self.x_shield + self.y_coherence + self.y_shield


def entropy_class_c(params: ClassParams, xy: XYPair) -> EntropyBreakdown:
    """Entropy of the four-pbit mixture from the mixture weights and the shields.

    The spectrum of sqrt(X+X) is the singular values of X, so no
    d^2-sided eigenproblem is needed.
    """
    p, a, b = params.p, params.alpha, params.beta
    s_x = entropy_of_probabilities(singular_values(xy.X))
    s_y = entropy_of_probabilities(singular_values(xy.Y))
    return EntropyBreakdown(
        binary_entropy(p),
        p * binary_entropy((1 - a) / 2),
        p * s_x,
        (1 - p) * binary_entropy((1 - b) / 2),
        (1 - p) * s_y,
    )


class Maximum(NamedTuple):
    argmax: float
    value: float
    grid_argmax: float
    grid_value: float


def maximize_1d(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-6, grid: int = GRID_POINTS) -> Maximum:
    """Maximize ``f`` on ``[lo, hi]``: uniform grid, then bounded Brent refinement.

    The refinement runs on the two grid cells around the best grid point,
    so a non-unimodal objective can only cost accuracy, not the basin.
    """
    xs = np.linspace(lo, hi, grid)
    ys = np.array([f(x) for x in xs])
    k = int(np.argmax(ys))
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, grid - 1)]
    res = optimize.minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded", options={"xatol": xtol})
    best_x, best_y = xs[k], ys[k]
    if -res.fun > best_y:
        best_x, best_y = float(res.x), float(-res.fun)
    elif ys[k] + 1e-12 < -res.fun:
        log.warning("refinement disagrees with grid: %.12g vs %.12g", -res.fun, ys[k])
    return Maximum(float(best_x), float(best_y), float(xs[k]), float(ys[k]))


def rho_u_supremum_objective(p: float, d: int) -> float:
    """Entropy of the unimodular rho_U state with beta = 0 and alpha at the key threshold."""
    a = math.sqrt((1 - p) / p)
    return (1 + p) * math.log2(d) + (1 - p) + binary_entropy(p) + p * binary_entropy((1 - a) / 2)


def entropy_supremum_rho_u(d: int) -> tuple[float, float]:
    """Supremum of the entropy over PPT key-distillable rho_U states.

    Returns ``(value, p)``; the objective is maximized on ``[1/2, p_max]``
    with ``p_max = 1/(1 + 1/d)`` (closure of the open admissible range).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    p_max = 1.0 / (1.0 + 1.0 / d)
    m = maximize_1d(lambda p: rho_u_supremum_objective(p, d), 0.5, p_max)
    return m.value, m.argmax


def rho_u_supremum_point(d: int, p: float | None = None) -> tuple[ClassParams, XYPair]:
    """Class parameters and Fourier shields at the rho_U entropy supremum."""
    xy = xy_from_unitary(fourier_unitary(d).data, f"fourier{d}")
    if p is None:
        p = 1.0 / (1.0 + xy.norm_x_gamma**2)
    return ClassParams(d, p, math.sqrt((1 - p) / p), 0.0), xy


def spider_y_point(q: float, U1: UnitaryAngles = HADAMARD_ANGLES, U2: UnitaryAngles = HADAMARD_ANGLES, beta: float = 0.0) -> tuple[ClassParams, XYPair]:
    """Spider-Y state at the edge of the PPT key region for its own ``||X^Gamma||``.

    ``p = 1/(1 + ||X^Gamma||^2)`` and ``alpha = sqrt((1-p)/p)``.
    """
    xy = spider_y(U1, U2, q)
    p = 1.0 / (1.0 + xy.norm_x_gamma**2)
    return ClassParams(2, p, math.sqrt((1 - p) / p), beta), xy


class SpiderMaximum(NamedTuple):
    value: float
    q: float
    params: ClassParams
    breakdown: EntropyBreakdown


def entropy_max_spider_y(U1: UnitaryAngles = HADAMARD_ANGLES, U2: UnitaryAngles = HADAMARD_ANGLES, beta: float = 0.0, grid: int = GRID_POINTS) -> SpiderMaximum:
    """Largest entropy of the spider-Y family over q.

    For ``U1 == U2`` the objective is symmetric under ``q -> 1 - q`` and
    only ``q >= 1/2`` is searched.
    """
    lo = 0.5 if tuple(U1) == tuple(U2) else 0.0

    def objective(q):
        params, xy = spider_y_point(q, U1, U2, beta)
        return entropy_class_c(params, xy).total

    m = maximize_1d(objective, lo, 1.0, grid=grid)
    params, xy = spider_y_point(m.argmax, U1, U2, beta)
    return SpiderMaximum(m.value, m.argmax, params, entropy_class_c(params, xy))


@dataclass(frozen=True)
class ErasureReport:
    d: int
    S: float
    S_aprime_b_bprime: float
    S_b_bprime: float
    S_a_b_bprime: float

    @property
    def icoh(self) -> float:
        return 0.5 * (self.S_aprime_b_bprime - self.S) + 0.5 * (self.S_b_bprime - self.S_a_b_bprime)


def _trace_aprime(m: np.ndarray, d: int) -> np.ndarray:
    return np.einsum("abac->bc", m.reshape(d, d, d, d))


def coherent_information_erasure(params: ClassParams, xy: XYPair, d_cap: int = DEFAULT_D_CAP) -> ErasureReport:
    """Coherent information once A' passes a 50% erasure channel.

    ``S`` and the Bob-side entropies use the mixture formulas over the
    shield; ``S(ABB')`` comes from tracing A' out of each key block.
    """
    d = params.d
    if d > d_cap:
        raise ValueError(f"d = {d} exceeds the dimension cap {d_cap}")
    p, x, y = params.p, xy.X.data, xy.Y.data
    m1 = p * abs_left(x) + (1 - p) * abs_right(y)
    m2 = p * abs_right(x) + (1 - p) * abs_left(y)
    s_apbbp = 1 + 0.5 * _entropy(m1) + 0.5 * _entropy(m2)
    s_bbp = 1 + 0.5 * _entropy(_trace_aprime(m1, d)) + 0.5 * _entropy(_trace_aprime(m2, d))
    reduced = np.zeros((4, d, 4, d), dtype=complex)
    for (i, j), block in class_c_blocks(params, xy).items():
        reduced[i, :, j, :] = _trace_aprime(block, d)
    s_abbp = _entropy(reduced.reshape(4 * d, 4 * d))
    return ErasureReport(d, entropy_class_c(params, xy).total, s_apbbp, s_bbp, s_abbp)


def erasure_components_numeric(rho: Operator) -> dict[str, float]:
    """The same entropies from explicit marginals of the assembled state."""
    return {
        "S": von_neumann_entropy(rho),
        "S_aprime_b_bprime": von_neumann_entropy(partial_trace(rho, [0])),
        "S_b_bprime": von_neumann_entropy(partial_trace(rho, [0, 2])),
        "S_a_b_bprime": von_neumann_entropy(partial_trace(rho, [2])),
    }


@dataclass(frozen=True)
class ErasureConfig:
    """Family indexed by d with Fourier shields; ``p=None`` means p = 1/(1 + 1/sqrt(d))."""

    name: str
    alpha: float
    beta: float
    p: float | None = None

    def point(self, d: int) -> tuple[ClassParams, XYPair]:
        xy = xy_from_unitary(fourier_unitary(d).data, f"fourier{d}")
        p = lambda_tilde(xy.norm_x_gamma) if self.p is None else self.p
        return ClassParams(d, p, self.alpha, self.beta), xy


ERASURE_CONFIGS = {
    "tilde_unimodular": ErasureConfig("tilde_unimodular", 1.0, 1.0),
    "beta0": ErasureConfig("beta0", 1.0, 0.0),
}


def erasure_scan(config: ErasureConfig, d_values, d_cap: int = DEFAULT_D_CAP) -> list[ErasureReport]:
    return [coherent_information_erasure(*config.point(d), d_cap=d_cap) for d in d_values]


def erasure_threshold_d(config: ErasureConfig, d_max: int, d_min: int = 2, d_cap: int = DEFAULT_D_CAP) -> int | None:
    """Smallest d in ``[d_min, d_max]`` with positive coherent information."""
    if d_max < 2:
        raise ValueError("d_max must be >= 2")
    for d in range(max(d_min, 2), d_max + 1):
        if coherent_information_erasure(*config.point(d), d_cap=d_cap).icoh > 0:
            return d
    return None


def dw_rate_ccq(rho: Operator) -> float:
    """Devetak-Winter bound I(A:B) - I(A:E) on the ccq state of ``rho``."""
    ccq = ccq_state(rho)
    probs = ccq.probabilities
    pa, pb = probs.sum(axis=1), probs.sum(axis=0)
    mutual_ab = entropy_of_probabilities(pa) + entropy_of_probabilities(pb) - entropy_of_probabilities(probs)
    weighted = probs[:, :, None, None] * ccq.eve_states
    eve = weighted.sum(axis=(0, 1))
    holevo = _entropy(eve)
    for a in range(2):
        if pa[a] > 0:
            holevo -= pa[a] * _entropy(weighted[a].sum(axis=0) / pa[a])
    return mutual_ab - holevo


def noise_threshold_dw(rho: Operator, eps_max: float = 1.0, xtol: float = 1e-7, coarse: int = 200) -> float:
    """White-noise fraction at which the Devetak-Winter rate reaches zero.

    A coarse scan locates the first non-positive rate; bisection then
    narrows the crossing to ``xtol``.
    """
    rate = lambda eps: dw_rate_ccq(add_white_noise(rho, eps))  # noqa: E731
    if rate(0.0) <= 0:
        raise ValueError("Devetak-Winter rate is not positive for the noiseless state")
    prev = 0.0
    for eps in np.linspace(0.0, eps_max, coarse + 1)[1:]:
        r = rate(eps)
        if r == 0:
            return float(eps)
        if r < 0:
            return float(optimize.bisect(rate, prev, eps, xtol=xtol))
        prev = eps
    raise ValueError(f"rate stays positive up to eps = {eps_max}")
