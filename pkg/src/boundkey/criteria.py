"""Verdicts: spider structure, privacy squeezing, PPT, key distillability,
separability, tolerable noise, twirlings, twistings and ccq states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from .linops import (
    Operator,
    ab_blocks,
    from_ab_blocks,
    hermitian_eigenvalues,
    is_unitary,
    partial_transpose,
    polar_unitary,
    purify,
    trace_norm,
)
from .states import PAULI_X, PAULI_Z, ClassParams, two_qubit_decomposition

PPT_TOL = 1e-9
BLOCK_ZERO_RTOL = 1e-9
EQUAL_NORM_TOL = 1e-9
# slack for closed-form <= conditions evaluated exactly on their boundary
ANALYTIC_TOL = 1e-12

# key-basis positions that must vanish in a spider state
_OFF_PATTERN = [(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)]


@dataclass(frozen=True)
class Verdict:
    """Outcome of one condition: ``margin`` is the signed slack of the inequality."""

    condition: str
    holds: bool
    margin: float
    inputs: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {"condition": self.condition, "holds": self.holds, "margin": self.margin, "inputs": self.inputs}


@dataclass(frozen=True, eq=False)
class SpiderBlocks:
    C: Operator
    D: Operator
    E: Operator
    F: Operator
    E_prime: Operator
    C_prime: Operator

    @property
    def shield_dims(self) -> tuple[int, ...]:
        return self.C.dims

    def norms(self) -> dict[str, float]:
        return {
            "C": trace_norm(self.C),
            "D": trace_norm(self.D),
            "E": trace_norm(self.E),
            "F": trace_norm(self.F),
            "E'": trace_norm(self.E_prime),
            "C'": trace_norm(self.C_prime),
        }

    def assemble(self) -> Operator:
        b = [[None] * 4 for _ in range(4)]
        b[0][0], b[0][3] = self.C.data, self.D.data
        b[1][1], b[1][2] = self.E.data, self.F.data
        b[2][1], b[2][2] = self.F.data.conj().T, self.E_prime.data
        b[3][0], b[3][3] = self.D.data.conj().T, self.C_prime.data
        return from_ab_blocks(b, self.shield_dims)


def is_spider(rho: Operator, tol: float | None = None) -> SpiderBlocks | None:
    """Spider blocks of ``rho``, or None if an off-pattern block is nonzero.

    A block counts as zero when its trace norm is at most ``tol``
    (default ``1e-9 * tr(rho)``).
    """
    blocks = ab_blocks(rho)
    if tol is None:
        tol = BLOCK_ZERO_RTOL * abs(rho.tr())
    if any(trace_norm(blocks[i, j]) > tol for i, j in _OFF_PATTERN):
        return None
    sd = rho.dims[2:]
    op = lambda i, j: Operator(blocks[i, j].copy(), sd)  # noqa: E731
    return SpiderBlocks(op(0, 0), op(0, 3), op(1, 1), op(1, 2), op(2, 2), op(3, 3))


def spider_blocks(rho: Operator, tol: float | None = None) -> SpiderBlocks:
    blocks = is_spider(rho, tol)
    if blocks is None:
        raise ValueError("state is not of spider form")
    return blocks


def privacy_squeezed(blocks: SpiderBlocks) -> Operator:
    """Two-qubit state whose entries are the trace norms of the spider blocks."""
    n = blocks.norms()
    s = np.zeros((4, 4))
    s[0, 0], s[3, 3], s[1, 1], s[2, 2] = n["C"], n["C'"], n["E"], n["E'"]
    s[0, 3] = s[3, 0] = n["D"]
    s[1, 2] = s[2, 1] = n["F"]
    return Operator(s, (2, 2))


def _bob_factors(rho: Operator) -> list[int]:
    if len(rho.dims) == 4:
        return [1, 3]
    if len(rho.dims) == 2:
        return [1]
    raise ValueError(f"cannot infer the Alice|Bob cut for dims {rho.dims}")


def ppt_numeric(rho: Operator, tol: float = PPT_TOL, factors: Sequence[int] | None = None) -> Verdict:
    """Minimum eigenvalue of the partial transpose on Bob's factors."""
    factors = list(factors) if factors is not None else _bob_factors(rho)
    lmin = float(hermitian_eigenvalues(partial_transpose(rho, factors)).eigenvalues[-1])
    return Verdict("ppt_numeric", lmin >= -tol, lmin, {"tol": tol, "factors": factors})


def alpha_1(p: float, norm_x_gamma: float) -> float:
    """``((1-p)/p) / ||X^Gamma||``; infinite at p = 0."""
    return math.inf if p == 0 else (1 - p) / p / norm_x_gamma


def ppt_analytic_class_c(params: ClassParams, norm_x_gamma: float, tol: float = ANALYTIC_TOL) -> Verdict:
    """Sufficient PPT test: |alpha| <= min(1, a1) and |beta| <= min(1, 1/a1)."""
    a1 = alpha_1(params.p, norm_x_gamma)
    inv = 0.0 if math.isinf(a1) else (math.inf if a1 == 0 else 1 / a1)
    slack_a = min(1.0, a1) - abs(params.alpha)
    slack_b = min(1.0, inv) - abs(params.beta)
    margin = min(slack_a, slack_b)
    return Verdict("ppt_analytic", margin >= -tol, margin, {"alpha_1": a1, "norm_x_gamma": norm_x_gamma})


def key_condition_spider(blocks: SpiderBlocks, tol: float = EQUAL_NORM_TOL) -> Verdict:
    """max(||D||, ||F||) > sqrt(||C|| ||E||) for Bell-diagonal-squeezable spiders."""
    n = blocks.norms()
    if abs(n["C"] - n["C'"]) > tol or abs(n["E"] - n["E'"]) > tol:
        raise ValueError("key condition needs ||C|| = ||C'|| and ||E|| = ||E'||")
    margin = max(n["D"], n["F"]) - math.sqrt(n["C"] * n["E"])
    return Verdict("key_spider", margin > 0, margin, n)


def key_condition_class_c(params: ClassParams) -> Verdict:
    """|l1 - l2| > sqrt((l1 + l2)(1 - l1 - l2)), i.e. |alpha| > sqrt((1-p)/p)."""
    l1, l2, _, _ = params.lambdas
    margin = abs(l1 - l2) - math.sqrt(max((l1 + l2) * (1 - l1 - l2), 0.0))
    return Verdict("key_class", margin > 0, margin, {"p": params.p, "alpha": params.alpha})


def key_threshold_alpha(p: float) -> float:
    return math.sqrt((1 - p) / p) if p > 0 else math.inf


def p_range_ppt_key(norm_x_gamma: float) -> tuple[float, float]:
    """Open interval of p admitting alpha that is both PPT and key-distillable."""
    if not 0 < norm_x_gamma <= 1:
        raise ValueError(f"||X^Gamma|| must be in (0, 1], got {norm_x_gamma!r}")
    return 0.5, 1.0 / (1.0 + norm_x_gamma**2)


def separability_conditions(params: ClassParams, norm_x_gamma: float, unitary=None, tol: float = ANALYTIC_TOL) -> Verdict:
    """Sufficient separability test through the four-term two-qubit split.

    Requires ``|beta| <= ||X^Gamma||``, ``|alpha| <= (1-p)/p`` and
    ``|beta| <= p ||X^Gamma|| / (1-p)``.  When it holds and a qubit
    ``unitary`` is given, every two-qubit term is also checked to be PPT.
    """
    p = params.p
    alpha_cap = math.inf if p == 0 else (1 - p) / p
    beta_cap = math.inf if p == 1 else p * norm_x_gamma / (1 - p)
    slacks = {
        "precondition": norm_x_gamma - abs(params.beta),
        "alpha": alpha_cap - abs(params.alpha),
        "beta": beta_cap - abs(params.beta),
    }
    margin = min(slacks.values())
    holds = margin >= -tol
    inputs: dict[str, Any] = {"slacks": slacks}
    if holds and unitary is not None:
        terms = two_qubit_decomposition(unitary, params)
        mins = [ppt_numeric(t.rho).margin for t in terms]
        inputs["term_ppt_margins"] = mins
        if min(mins) < -PPT_TOL:
            raise RuntimeError(f"separability conditions hold but a term is NPT: {mins}")
    return Verdict("separable", holds, margin, inputs)


def tolerable_noise_recurrence(params: ClassParams) -> float:
    """White-noise fraction tolerated by recurrence + Devetak-Winter.

    ``1 - 1/sqrt(8(l1^2 + l2^2) - 4(l1 + l2) + 1)``, defined for p > 1/2.
    Non-positive values mean no noise is tolerated.
    """
    if params.p <= 0.5:
        raise ValueError(f"tolerable noise formula needs p > 1/2, got {params.p!r}")
    l1, l2, _, _ = params.lambdas
    return 1 - 1 / math.sqrt(8 * (l1**2 + l2**2) - 4 * (l1 + l2) + 1)


def tolerable_noise_recurrence_alpha_form(params: ClassParams) -> float:
    p, a = params.p, params.alpha
    return 1 - 1 / math.sqrt(4 * (1 + a**2) * p**2 - 4 * p + 1)


def _check_key_part(rho: Operator) -> None:
    if len(rho.dims) < 2 or rho.dims[:2] != (2, 2):
        raise ValueError(f"expected a (2, 2, ...) key part, got dims {rho.dims}")


def _key_pauli(rho: Operator, pauli: np.ndarray) -> Operator:
    full = np.kron(np.kron(pauli, pauli), np.eye(rho.side // 4))
    return Operator(full @ rho.data @ full.conj().T, rho.dims)


def twirl_zz(rho: Operator) -> Operator:
    _check_key_part(rho)
    return Operator(0.5 * (rho.data + _key_pauli(rho, PAULI_Z).data), rho.dims)


def twirl_xx(rho: Operator) -> Operator:
    _check_key_part(rho)
    return Operator(0.5 * (rho.data + _key_pauli(rho, PAULI_X).data), rho.dims)


def twirl_xx_flagged(rho: Operator) -> Operator:
    """1/2 (rho (x) |0><0| + XX rho XX (x) |1><1|) with the flag as last factor."""
    _check_key_part(rho)
    f0, f1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    data = 0.5 * (np.kron(rho.data, f0) + np.kron(_key_pauli(rho, PAULI_X).data, f1))
    return Operator(data, rho.dims + (2,))


def general_key_condition(rho: Operator) -> Verdict:
    """max(||D||, ||F||) > 1/2 sqrt((||A|| + ||J||)(||E|| + ||H||)) for any state."""
    b = ab_blocks(rho)
    n = {
        "A": trace_norm(b[0, 0]),
        "D": trace_norm(b[0, 3]),
        "E": trace_norm(b[1, 1]),
        "F": trace_norm(b[1, 2]),
        "H": trace_norm(b[2, 2]),
        "J": trace_norm(b[3, 3]),
    }
    margin = max(n["D"], n["F"]) - 0.5 * math.sqrt((n["A"] + n["J"]) * (n["E"] + n["H"]))
    return Verdict("key_general", margin > 0, margin, n)


def error_probability(blocks: SpiderBlocks) -> float:
    """Probability of anticorrelated key outcomes, tr E + tr E'."""
    return float((blocks.E.tr() + blocks.E_prime.tr()).real)


def twisting_unitary(unitaries: Sequence, shield_dims: Sequence[int]) -> Operator:
    """Controlled unitary sum_ij |ij><ij| (x) U_ij over key outcomes 00, 01, 10, 11."""
    if len(unitaries) != 4:
        raise ValueError("a twisting needs one shield unitary per key outcome")
    mats = [u.data if isinstance(u, Operator) else np.asarray(u, dtype=complex) for u in unitaries]
    for k, m in enumerate(mats):
        if not is_unitary(m):
            raise ValueError(f"twisting member {k} is not unitary")
    b = [[mats[i] if i == j else None for j in range(4)] for i in range(4)]
    return from_ab_blocks(b, shield_dims)


def apply_twisting(rho: Operator, unitaries: Sequence) -> Operator:
    w = twisting_unitary(unitaries, rho.dims[2:])
    return Operator(w.data @ rho.data @ w.data.conj().T, rho.dims)


def canonical_twisting(blocks: SpiderBlocks) -> list[np.ndarray]:
    """Twisting that moves the spider's off-diagonal norms into the key part.

    Identity on 00 and 01; on 11 and 10 the polar unitaries of D and F, so
    that tr(U_00 D U_11^+) = ||D|| and tr(U_01 F U_10^+) = ||F||.
    """
    eye = np.eye(blocks.C.side, dtype=complex)
    return [eye, eye, polar_unitary(blocks.F.data), polar_unitary(blocks.D.data)]


class CCQState(NamedTuple):
    probabilities: np.ndarray  # [a, b]
    eve_states: np.ndarray  # [a, b] -> normalized Eve state (zero if p_ab = 0)
    operator: Operator  # sum_ab p_ab |ab><ab| (x) rho_E^ab on (2, 2, env)


def ccq_state(rho: Operator, purification: np.ndarray | None = None) -> CCQState:
    """Measure the key part of a purification in the standard basis.

    The shield is traced out and Eve keeps the purifying system.  By
    default the purification is over the full matrix side (environment
    dimension = side).
    """
    ab_blocks(rho)
    if purification is None:
        purification, _ = purify(rho, full=True)
    psi = np.asarray(purification, dtype=complex).reshape(rho.side, -1)
    env = psi.shape[1]
    rows = psi.reshape(4, rho.side // 4, env)
    probs = np.zeros((2, 2))
    eve = np.zeros((2, 2, env, env), dtype=complex)
    full = np.zeros((4, env, 4, env), dtype=complex)
    for k in range(4):
        m = rows[k]
        sub = m.T @ m.conj()
        pk = float(np.trace(sub).real)
        a, b = divmod(k, 2)
        probs[a, b] = pk
        full[k, :, k, :] = sub
        if pk > 0:
            eve[a, b] = sub / pk
    return CCQState(probs, eve, Operator(full.reshape(4 * env, 4 * env), (2, 2, env)))
