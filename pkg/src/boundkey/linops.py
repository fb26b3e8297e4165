"""Dense complex linear algebra on tensor-product Hilbert spaces.

Every matrix carries an ordered list of factor dimensions.  The left
factor is the slow index (row-major ``np.kron`` convention).  Four-factor
states are ordered ``(A, B, A', B')`` so the AB block layout of a state is
literally its 4x4 block structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix tagged with its tensor-factor dimensions."""

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        dims = tuple(int(x) for x in self.dims)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {data.shape}")
        if any(x < 1 for x in dims):
            raise ValueError(f"factor dimensions must be positive, got {dims}")
        if int(np.prod(dims)) != data.shape[0]:
            raise ValueError(f"dims {dims} do not multiply to matrix side {data.shape[0]}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_array(cls, data, dims: Sequence[int] | None = None) -> "Operator":
        data = np.asarray(data, dtype=complex)
        return cls(data, tuple(dims) if dims is not None else (data.shape[0],))

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "Operator":
        return cls(np.eye(int(np.prod(dims)), dtype=complex), tuple(dims))

    @classmethod
    def projector(cls, vec, dims: Sequence[int] | None = None) -> "Operator":
        vec = np.asarray(vec, dtype=complex).ravel()
        return cls.from_array(np.outer(vec, vec.conj()), dims or (vec.size,))

    @property
    def side(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.dims)

    def tr(self) -> complex:
        return complex(np.trace(self.data))

    def with_dims(self, dims: Sequence[int]) -> "Operator":
        return Operator(self.data, tuple(dims))

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Operator):
            if other.side != self.side:
                raise ValueError(f"side mismatch: {self.side} vs {other.side}")
            return other.data
        return other

    def __add__(self, other):
        return Operator(self.data + self._coerce(other), self.dims)

    def __sub__(self, other):
        return Operator(self.data - self._coerce(other), self.dims)

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __mul__(self, scalar):
        return Operator(self.data * scalar, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.dims)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.data @ self._coerce(other), self.dims)
        return self.data @ other

    def __repr__(self):
        return f"Operator(dims={self.dims}, side={self.side})"


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def _check_factors(dims: Sequence[int], factors: Iterable[int]) -> tuple[int, ...]:
    factors = tuple(sorted(set(int(k) for k in factors)))
    for k in factors:
        if not 0 <= k < len(dims):
            raise IndexError(f"factor index {k} out of range for dims {tuple(dims)}")
    return factors


def kron(a: Operator, b: Operator) -> Operator:
    return Operator(np.kron(a.data, b.data), a.dims + b.dims)


def kron_all(*ops: Operator) -> Operator:
    out = ops[0]
    for op in ops[1:]:
        out = kron(out, op)
    return out


def partial_transpose(rho: Operator, factors: Iterable[int]) -> Operator:
    """Transpose the listed tensor factors, leaving the others alone."""
    factors = _check_factors(rho.dims, factors)
    if not factors:
        return rho
    n = len(rho.dims)
    t = rho.data.reshape(rho.dims + rho.dims)
    perm = list(range(2 * n))
    for k in factors:
        perm[k], perm[n + k] = perm[n + k], perm[k]
    return Operator(t.transpose(perm).reshape(rho.side, rho.side), rho.dims)


def partial_trace(rho: Operator, traced: Iterable[int]) -> Operator:
    traced = _check_factors(rho.dims, traced)
    n = len(rho.dims)
    keep = [k for k in range(n) if k not in traced]
    t = rho.data.reshape(rho.dims + rho.dims)
    # one einsum: contract row and column index of every traced factor
    letters = [chr(ord("a") + k) for k in range(2 * n)]
    for k in traced:
        letters[n + k] = letters[k]
    out = [letters[k] for k in keep] + [letters[n + k] for k in keep]
    spec = "".join(letters) + "->" + "".join(out)
    new_dims = tuple(rho.dims[k] for k in keep)
    side = int(np.prod(new_dims)) if new_dims else 1
    return Operator(np.einsum(spec, t).reshape(side, side), new_dims or (1,))


def permute_factors(rho: Operator, order: Sequence[int]) -> Operator:
    """Reorder tensor factors; ``order[k]`` is the old index of new factor k."""
    n = len(rho.dims)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} factors")
    t = rho.data.reshape(rho.dims + rho.dims)
    perm = list(order) + [n + k for k in order]
    dims = tuple(rho.dims[k] for k in order)
    return Operator(t.transpose(perm).reshape(rho.side, rho.side), dims)


def singular_values(x: Operator | np.ndarray) -> np.ndarray:
    data = x.data if isinstance(x, Operator) else np.asarray(x)
    return np.linalg.svd(data, compute_uv=False)


def trace_norm(x: Operator | np.ndarray) -> float:
    """Sum of singular values."""
    return float(singular_values(x).sum())


def _hermitian_part(data: np.ndarray) -> np.ndarray:
    scale = float(np.linalg.norm(data, np.inf)) if data.size else 0.0
    skew = float(np.abs(data - data.conj().T).max(initial=0.0))
    if skew > HERMITIAN_RTOL * max(scale, 1e-300):
        raise ValueError(f"matrix is not Hermitian (max |A - A^H| = {skew:.3e})")
    return 0.5 * (data + data.conj().T)


def hermitian_eigenvalues(x: Operator | np.ndarray, vectors: bool = False) -> Spectrum:
    """Real eigenvalues in descending order (eigenvectors as columns if asked)."""
    data = _hermitian_part(x.data if isinstance(x, Operator) else np.asarray(x, dtype=complex))
    if vectors:
        w, v = np.linalg.eigh(data)
        return Spectrum(w[::-1].copy(), v[:, ::-1].copy())
    return Spectrum(np.linalg.eigvalsh(data)[::-1].copy())


def entropy_of_probabilities(probs) -> float:
    """Shannon entropy in bits; zeros contribute nothing."""
    probs = np.asarray(probs, dtype=float).ravel()
    probs = probs[probs > 0]
    return float(-(probs * np.log2(probs)).sum()) if probs.size else 0.0


def von_neumann_entropy(rho: Operator | np.ndarray) -> float:
    """Entropy in bits of a density matrix.

    Eigenvalues within ``PSD_TOL`` of the unit interval are clipped to it;
    anything further out, or a trace off by more than ``PSD_TOL``, is an
    error.
    """
    data = rho.data if isinstance(rho, Operator) else np.asarray(rho, dtype=complex)
    trace = np.trace(data).real
    if abs(trace - 1.0) > PSD_TOL:
        raise ValueError(f"density matrix trace is {trace!r}, expected 1")
    w = hermitian_eigenvalues(data).eigenvalues
    if w[-1] < -PSD_TOL or w[0] > 1 + PSD_TOL:
        raise ValueError(f"eigenvalues outside [0, 1]: min {w[-1]:.3e}, max {w[0]:.3e}")
    return entropy_of_probabilities(np.clip(w, 0.0, 1.0))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x!r} outside [0, 1]")
    return entropy_of_probabilities([x, 1.0 - x])


def psd_sqrt(x: Operator | np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix (negative roundoff clipped)."""
    data = x.data if isinstance(x, Operator) else np.asarray(x, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (data + data.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def abs_left(x: np.ndarray) -> np.ndarray:
    """sqrt(X X^dagger), computed from the SVD."""
    u, s, _ = np.linalg.svd(x)
    return (u * s) @ u.conj().T


def abs_right(x: np.ndarray) -> np.ndarray:
    """sqrt(X^dagger X), computed from the SVD."""
    _, s, vh = np.linalg.svd(x)
    return (vh.conj().T * s) @ vh


def polar_unitary(x: np.ndarray) -> np.ndarray:
    """Unitary V with X = V |X|, so that tr(V^dagger X) = ||X||_1."""
    u, _, vh = np.linalg.svd(x)
    return u @ vh


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0
    )


def purify(rho: Operator, full: bool = False) -> tuple[np.ndarray, int]:
    """Purification sum_k sqrt(mu_k) |v_k> (x) |k> of a density matrix.

    Returns the state vector on system (x) environment (system slow) and
    the environment dimension: the rank by default, the full side if
    ``full`` is set.
    """
    w, v = hermitian_eigenvalues(rho, vectors=True)
    if w[-1] < -PSD_TOL:
        raise ValueError(f"cannot purify: eigenvalue {w[-1]:.3e} is negative")
    w = np.clip(w, 0.0, None)
    keep = w.size if full else max(int((w > PSD_TOL).sum()), 1)
    amp = v[:, :keep] * np.sqrt(w[:keep])
    return amp.reshape(-1), keep


def trace_distance(a: Operator | np.ndarray, b: Operator | np.ndarray) -> float:
    da = a.data if isinstance(a, Operator) else np.asarray(a)
    db = b.data if isinstance(b, Operator) else np.asarray(b)
    return 0.5 * trace_norm(da - db)


def ab_blocks(rho: Operator) -> np.ndarray:
    """View a (2, 2, ...) operator as a 4x4 array of shield blocks.

    ``blocks[i, j]`` is the operator on the trailing factors sitting at
    key-part row ``i`` and column ``j`` (key basis 00, 01, 10, 11).
    """
    if len(rho.dims) < 3 or rho.dims[0] != 2 or rho.dims[1] != 2:
        raise ValueError(f"expected factor structure (2, 2, ...), got {rho.dims}")
    s = rho.side // 4
    return rho.data.reshape(4, s, 4, s).transpose(0, 2, 1, 3)


def from_ab_blocks(blocks, shield_dims: Sequence[int]) -> Operator:
    """Inverse of :func:`ab_blocks`; ``blocks`` is 4x4 of shield matrices (or None)."""
    s = int(np.prod(shield_dims))
    out = np.zeros((4, s, 4, s), dtype=complex)
    for i in range(4):
        for j in range(4):
            b = blocks[i][j]
            if b is not None:
                out[i, :, j, :] = b
    return Operator(out.reshape(4 * s, 4 * s), (2, 2) + tuple(shield_dims))
