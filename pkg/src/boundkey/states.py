"""Constructors for private bits, the four-pbit class and its subfamilies.

States live on ``(A, B, A', B')`` with qubit key part ``AB`` and a
``d x d`` shield ``A'B'``.  Shield operators (``X``, ``Y`` and the blocks)
are :class:`Operator` objects with dims ``(d, d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linops import (
    PSD_TOL,
    TRACE_TOL,
    Operator,
    abs_left,
    abs_right,
    from_ab_blocks,
    hermitian_eigenvalues,
    is_unitary,
    partial_transpose,
    permute_factors,
    trace_norm,
)

PARAM_SLACK = 1e-12
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class StateValidationError(ValueError):
    """A constructed state failed its PSD / trace / Hermiticity check."""


def validate_density(rho: Operator, what: str = "state") -> Operator:
    tr = rho.tr()
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateValidationError(f"{what}: trace {tr:.15g} differs from 1")
    try:
        w = hermitian_eigenvalues(rho).eigenvalues
    except ValueError as exc:
        raise StateValidationError(f"{what}: {exc}") from exc
    if w[-1] < -PSD_TOL:
        raise StateValidationError(f"{what}: not PSD (min eigenvalue {w[-1]:.3e})")
    return rho


def _clip_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not lo - PARAM_SLACK <= value <= hi + PARAM_SLACK or math.isnan(value):
        raise ValueError(f"{name}={value!r} outside [{lo}, {hi}]")
    return min(max(value, lo), hi)


@dataclass(frozen=True)
class ClassParams:
    """Mixing parameters of the four-pbit class.

    ``p`` weighs the correlated pbits against the anticorrelated ones,
    ``alpha`` and ``beta`` are the coherences inside each pair.  The
    equivalent weights are ``lambda_{1,2} = (1 +- alpha) p / 2`` and
    ``lambda_{3,4} = (1 +- beta) (1 - p) / 2``.
    """

    d: int
    p: float
    alpha: float
    beta: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"shield dimension must be an integer >= 2, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "p", _clip_range("p", self.p, 0.0, 1.0))
        object.__setattr__(self, "alpha", _clip_range("alpha", self.alpha, -1.0, 1.0))
        object.__setattr__(self, "beta", _clip_range("beta", self.beta, -1.0, 1.0))

    @classmethod
    def from_lambdas(cls, lambdas: Sequence[float], d: int) -> "ClassParams":
        l1, l2, l3, l4 = (float(x) for x in lambdas)
        if min(l1, l2, l3, l4) < -PARAM_SLACK or abs(l1 + l2 + l3 + l4 - 1) > 1e-12:
            raise ValueError(f"weights {lambdas} are not a probability vector")
        p = l1 + l2
        alpha = (l1 - l2) / p if p > 0 else 0.0
        beta = (l3 - l4) / (1 - p) if p < 1 else 0.0
        return cls(d, p, alpha, beta)

    @property
    def lambdas(self) -> tuple[float, float, float, float]:
        p, a, b = self.p, self.alpha, self.beta
        return ((1 + a) * p / 2, (1 - a) * p / 2, (1 + b) * (1 - p) / 2, (1 - b) * (1 - p) / 2)


class UnitaryAngles(NamedTuple):
    """Angles of ``e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)``."""

    alpha: float
    beta: float
    gamma: float
    delta: float


HADAMARD_ANGLES = UnitaryAngles(math.pi / 2, 0.0, math.pi / 2, math.pi)


class XOperator(NamedTuple):
    X: Operator
    u: float
    norm_x_gamma: float


@dataclass(frozen=True, eq=False)
class XYPair:
    """Shield operators of the class together with ``||X^Gamma||``."""

    X: Operator
    Y: Operator
    norm_x_gamma: float
    label: str = ""
    unitary: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.X.dims[0]


def qubit_unitary(a: UnitaryAngles) -> Operator:
    al, be, ga, de = a
    c, s = math.cos(ga / 2), math.sin(ga / 2)
    u = np.exp(1j * al) * np.array(
        [
            [np.exp(1j * (-be / 2 - de / 2)) * c, -np.exp(1j * (-be / 2 + de / 2)) * s],
            [np.exp(1j * (be / 2 - de / 2)) * s, np.exp(1j * (be / 2 + de / 2)) * c],
        ]
    )
    return Operator(u, (2,))


def hadamard() -> Operator:
    return Operator(np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2), (2,))


def fourier_unitary(d: int) -> Operator:
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    k = np.arange(d)
    return Operator(np.exp(2j * np.pi * np.outer(k, k) / d) / math.sqrt(d), (d,))


def bell_state(i: int) -> np.ndarray:
    """Bell vectors: 1,2 = (|00> +- |11>)/sqrt2, 3,4 = (|01> +- |10>)/sqrt2."""
    vecs = {
        1: [1, 0, 0, 1],
        2: [1, 0, 0, -1],
        3: [0, 1, 1, 0],
        4: [0, 1, -1, 0],
    }
    if i not in vecs:
        raise ValueError(f"Bell state index must be 1..4, got {i}")
    return np.array(vecs[i], dtype=complex) / math.sqrt(2)


def _as_matrix(u) -> np.ndarray:
    return u.data if isinstance(u, Operator) else np.asarray(u, dtype=complex)


def x_operator(U) -> XOperator:
    """``X = (1/u) sum_ij u_ij |ij><ji|`` with ``u = sum |u_ij|``.

    For this operator ``||X^Gamma|| = d / u``, which lies in
    ``[1/sqrt(d), 1]``.
    """
    U = _as_matrix(U)
    if not is_unitary(U):
        raise ValueError("x_operator needs a unitary matrix")
    d = U.shape[0]
    u = float(np.abs(U).sum())
    X = np.zeros((d, d, d, d), dtype=complex)
    i, j = np.indices((d, d))
    X[i, j, j, i] = U / u
    return XOperator(Operator(X.reshape(d * d, d * d), (d, d)), u, d / u)


def shield_partial_transpose(x: Operator) -> Operator:
    """Partial transpose of a shield operator on the B' factor."""
    return partial_transpose(x, [len(x.dims) - 1])


def y_from_x(X: Operator) -> Operator:
    xg = shield_partial_transpose(X)
    norm = trace_norm(xg)
    if norm == 0:
        raise ValueError("X^Gamma vanishes; Y is undefined")
    return xg / norm


def y_operator(U) -> Operator:
    """``Y_U = (1/d) sum_ij u_ij |ii><jj|``."""
    U = _as_matrix(U)
    d = U.shape[0]
    Y = np.zeros((d, d, d, d), dtype=complex)
    i, j = np.indices((d, d))
    Y[i, i, j, j] = U / d
    return Operator(Y.reshape(d * d, d * d), (d, d))


def diagonal_blocks_ppt_invariant(xy: XYPair, tol: float = 1e-10) -> bool:
    """Whether sqrt(XX+), sqrt(X+X), sqrt(YY+), sqrt(Y+Y) are Gamma-invariant."""
    dims = xy.X.dims
    for m in (abs_left(xy.X.data), abs_right(xy.X.data), abs_left(xy.Y.data), abs_right(xy.Y.data)):
        op = Operator(m, dims)
        if np.abs(shield_partial_transpose(op).data - m).max() > tol:
            return False
    return True


def xy_from_unitary(U, label: str = "") -> XYPair:
    """The pair (X, Y) generated by a d x d unitary."""
    U = _as_matrix(U)
    X, _, norm = x_operator(U)
    return XYPair(X, y_from_x(X), norm, label, U)


def spider_y(U1: UnitaryAngles, U2: UnitaryAngles, q: float) -> XYPair:
    """Qubit-shield pair with ``Y = q Y_U1 + (1-q) sx Y_U2 sx`` (sx on A').

    The two unitaries are given as angle tuples so that their global
    phases can be compared exactly; they must coincide.
    """
    U1, U2 = UnitaryAngles(*U1), UnitaryAngles(*U2)
    if U1.alpha != U2.alpha:
        raise ValueError(f"global phases differ: {U1.alpha!r} != {U2.alpha!r}")
    q = _clip_range("q", q, 0.0, 1.0)
    sx = np.kron(PAULI_X, np.eye(2))
    y = q * y_operator(qubit_unitary(U1)).data + (1 - q) * sx @ y_operator(qubit_unitary(U2)).data @ sx
    Y = Operator(y, (2, 2))
    if abs(trace_norm(Y) - 1) > 1e-10:
        raise StateValidationError(f"||Y|| = {trace_norm(Y)!r}, expected 1")
    yg = shield_partial_transpose(Y)
    norm_yg = trace_norm(yg)
    xy = XYPair(yg / norm_yg, Y, 1.0 / norm_yg, f"spider_y(q={q:g})")
    if not diagonal_blocks_ppt_invariant(xy):
        raise StateValidationError("diagonal blocks are not PPT-invariant for these unitaries")
    return xy


def private_bit(X: Operator) -> Operator:
    """The pbit in X-form: 1/2 [[sqrt(XX+), X], [X+, sqrt(X+X)]] on keys 00/11."""
    norm = trace_norm(X)
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"private bit needs ||X|| = 1, got {norm!r}")
    x = X.data
    blocks = [[None] * 4 for _ in range(4)]
    blocks[0][0] = abs_left(x) / 2
    blocks[0][3] = x / 2
    blocks[3][0] = x.conj().T / 2
    blocks[3][3] = abs_right(x) / 2
    return validate_density(from_ab_blocks(blocks, X.dims), "private bit")


def _sigma_x_on(rho: Operator, factor: int) -> Operator:
    ops = [np.eye(k) for k in rho.dims]
    ops[factor] = PAULI_X
    full = ops[0]
    for o in ops[1:]:
        full = np.kron(full, o)
    return Operator(full @ rho.data @ full, rho.dims)


def _check_pair(params: ClassParams, xy: XYPair):
    if xy.X.dims != (params.d, params.d) or xy.Y.dims != (params.d, params.d):
        raise ValueError(f"X/Y dims {xy.X.dims}/{xy.Y.dims} do not match d={params.d}")


def class_c_blocks(params: ClassParams, xy: XYPair) -> dict[tuple[int, int], np.ndarray]:
    """Nonzero key-basis blocks of the four-pbit mixture, keyed by (row, col)."""
    _check_pair(params, xy)
    l1, l2, l3, l4 = params.lambdas
    x, y = xy.X.data, xy.Y.data
    return {
        (0, 0): (l1 + l2) * abs_left(x) / 2,
        (0, 3): (l1 - l2) * x / 2,
        (3, 0): (l1 - l2) * x.conj().T / 2,
        (3, 3): (l1 + l2) * abs_right(x) / 2,
        (1, 1): (l3 + l4) * abs_left(y) / 2,
        (1, 2): (l3 - l4) * y / 2,
        (2, 1): (l3 - l4) * y.conj().T / 2,
        (2, 2): (l3 + l4) * abs_right(y) / 2,
    }


def class_c_state(params: ClassParams, xy: XYPair) -> Operator:
    """Four-pbit mixture assembled directly in its block form."""
    blocks = [[None] * 4 for _ in range(4)]
    for (i, j), b in class_c_blocks(params, xy).items():
        blocks[i][j] = b
    return validate_density(from_ab_blocks(blocks, xy.X.dims), "class state")


def class_c_generators(xy: XYPair) -> list[Operator]:
    """The four orthogonal pbits gamma(X), gamma(-X), sx_B gamma(+-Y) sx_B."""
    g1p, g1m = private_bit(xy.X), private_bit(-xy.X)
    g2p = _sigma_x_on(private_bit(xy.Y), 1)
    g2m = _sigma_x_on(private_bit(-xy.Y), 1)
    return [g1p, g1m, g2p, g2m]


def class_c_state_from_pbits(params: ClassParams, xy: XYPair) -> Operator:
    """Same state as :func:`class_c_state`, built as the weighted pbit mixture."""
    _check_pair(params, xy)
    gens = class_c_generators(xy)
    data = sum(w * g.data for w, g in zip(params.lambdas, gens))
    return validate_density(Operator(data, gens[0].dims), "class state (pbit mixture)")


def lambda_tilde(norm_x_gamma: float) -> float:
    """Weight of gamma_1^+ for which the two-pbit mixture is PPT: 1/(1+||X^Gamma||)."""
    return 1.0 / (1.0 + norm_x_gamma)


def add_white_noise(rho: Operator, eps: float) -> Operator:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise fraction {eps!r} outside [0, 1]")
    if abs(rho.tr() - 1) > TRACE_TOL:
        raise ValueError("white noise is only admixed to unit-trace states")
    return Operator((1 - eps) * rho.data + eps * np.eye(rho.side) / rho.side, rho.dims)


class FlagForm(NamedTuple):
    weights: tuple[float, float, float, float]
    shield_states: tuple[Operator, Operator, Operator, Operator]
    state: Operator


def rho_h_flag_form(params: ClassParams) -> FlagForm:
    """Hadamard-generated class state as Bell states on AB tagged by shield flags.

    ``rho = sum_i q_i P_{psi_i} (x) rho^(i)`` with ``q_{1,2} = p/2`` and
    ``q_{3,4} = (1-p)/2``.  Only ``alpha, beta >= 0`` is accepted since the
    flag states are not positive for sufficiently negative coherences.
    """
    if params.d != 2:
        raise ValueError("flag form exists for d = 2 only")
    if params.alpha < 0 or params.beta < 0:
        raise ValueError("flag form requires alpha >= 0 and beta >= 0")
    a, b, p = params.alpha, params.beta, params.p
    e = np.eye(4)
    p00, p11 = np.outer(e[0], e[0]), np.outer(e[3], e[3])
    proj = lambda v: np.outer(v, v.conj())  # noqa: E731
    s2 = math.sqrt(2)
    chi_p = (e[0] + bell_state(1)) / math.sqrt(2 + s2)
    chi_m = (e[0] - bell_state(1)) / math.sqrt(2 - s2)
    shields = (
        a * (p00 + proj(bell_state(3))) / 2 + (1 - a) * e / 4,
        a * (p11 + proj(bell_state(4))) / 2 + (1 - a) * e / 4,
        b * proj(chi_p) + (1 - b) * (p00 + p11) / 2,
        b * proj(chi_m) + (1 - b) * (p00 + p11) / 2,
    )
    shields = tuple(validate_density(Operator(s, (2, 2)), f"flag state {k + 1}") for k, s in enumerate(shields))
    weights = (p / 2, p / 2, (1 - p) / 2, (1 - p) / 2)
    data = sum(w * np.kron(proj(bell_state(k + 1)), s.data) for k, (w, s) in enumerate(zip(weights, shields)))
    return FlagForm(weights, shields, validate_density(Operator(data, (2, 2, 2, 2)), "flag form"))


class TwoQubitTerm(NamedTuple):
    weight: float
    rho: Operator
    alice_basis: tuple[tuple[int, int], tuple[int, int]]
    bob_basis: tuple[tuple[int, int], tuple[int, int]]
    phase: float


# logical |0>, |1> of each party as (key, shield) index pairs, per (i, j)
_DECOMPOSITION_BASES = {
    (0, 0): (((0, 0), (1, 0)), ((0, 0), (1, 0))),
    (0, 1): (((0, 0), (1, 1)), ((0, 1), (1, 0))),
    (1, 0): (((0, 1), (1, 0)), ((0, 0), (1, 1))),
    (1, 1): (((0, 1), (1, 1)), ((0, 1), (1, 1))),
}


def _bell_diagonal_term(params: ClassParams, norm_x_gamma: float, phase: float) -> np.ndarray:
    l1, l2, l3, l4 = params.lambdas
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = l1 + l2
    r[1, 1] = r[2, 2] = l3 + l4
    r[0, 3] = (l1 - l2) * np.exp(1j * phase)
    r[1, 2] = (l3 - l4) / norm_x_gamma * np.exp(1j * phase)
    r[3, 0], r[2, 1] = np.conj(r[0, 3]), np.conj(r[1, 2])
    return r / 2


def two_qubit_decomposition(U, params: ClassParams) -> list[TwoQubitTerm]:
    """Split a qubit-shield class state into four embedded two-qubit states.

    Each term is Bell diagonal with the same spectrum; the weights are
    ``|u_ij| / u`` and the phases come from ``u_ij = |u_ij| e^{i phi_ij}``.
    Needs ``|beta| <= ||X^Gamma||``.
    """
    U = _as_matrix(U)
    if params.d != 2 or U.shape != (2, 2):
        raise ValueError("two-qubit decomposition exists for d = 2 only")
    _, u, norm = x_operator(U)
    if abs(params.beta) > norm + PARAM_SLACK:
        raise ValueError(f"|beta| = {abs(params.beta):.6g} exceeds ||X^Gamma|| = {norm:.6g}")
    terms = []
    for (i, j), (abasis, bbasis) in _DECOMPOSITION_BASES.items():
        phase = float(np.angle(U[i, j]))
        rho = Operator(_bell_diagonal_term(params, norm, phase), (2, 2))
        terms.append(TwoQubitTerm(abs(U[i, j]) / u, rho, abasis, bbasis, phase))
    return terms


def embed_two_qubit(term: TwoQubitTerm, d: int = 2) -> Operator:
    """Place a decomposition term into the (A, B, A', B') space."""
    full = np.zeros((2, d, 2, d, 2, d, 2, d), dtype=complex)
    r = term.rho.data.reshape(2, 2, 2, 2)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for e in range(2):
                    A, Ap = term.alice_basis[a]
                    B, Bp = term.bob_basis[b]
                    C, Cp = term.alice_basis[c]
                    E, Ep = term.bob_basis[e]
                    full[A, Ap, B, Bp, C, Cp, E, Ep] += r[a, b, c, e]
    side = 4 * d * d
    # factors are laid out (A, A', B, B'); reorder to (A, B, A', B')
    return permute_factors(Operator(full.reshape(side, side), (2, d, 2, d)), [0, 2, 1, 3])


def reconstruct_from_terms(terms: Sequence[TwoQubitTerm], d: int = 2) -> Operator:
    data = sum(t.weight * embed_two_qubit(t, d).data for t in terms)
    return Operator(data, (2, 2, d, d))
