"""Independent brute-force references used to validate the fast code paths.

Nothing here reuses the algorithms it checks: local-unitary overlaps are
maximized numerically over explicit 2x2 unitaries, LOCC conversions over
explicit one-round measurement protocols, Motzkin spectra by enumerating
walks, and lattice ground states by dense diagonalization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


# --------------------------------------------------------------------------- #
# Local unitaries on two qubits
# --------------------------------------------------------------------------- #
def _u2(a: float, b: float, c: float) -> np.ndarray:
    """Element of SU(2) from Euler angles (global phase is irrelevant here)."""
    return np.array(
        [
            [np.exp(1j * (a + c)) * np.cos(b), np.exp(1j * (a - c)) * np.sin(b)],
            [-np.exp(-1j * (a - c)) * np.sin(b), np.exp(-1j * (a + c)) * np.cos(b)],
        ]
    )


def lu_overlap_bruteforce(p, q, starts: int = 24, seed: int = 0) -> float:
    """max over local unitaries u, v of ``|<(u x v) Psi, Phi>|`` for two-qubit states.

    ``Psi`` and ``Phi`` are the Schmidt-diagonal states with weights ``p``
    and ``q`` (length 2 each).  Multi-start Nelder-Mead over six Euler angles.
    """
    sp = np.diag(np.sqrt(np.asarray(p, dtype=float)))
    sq = np.diag(np.sqrt(np.asarray(q, dtype=float)))

    def neg(x):
        u = _u2(*x[:3])
        v = _u2(*x[3:])
        # coefficient matrix of (u x v) Psi is u Psi v^T
        return -abs(np.trace(sq.conj().T @ u @ sp @ v.T))

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(starts):
        res = optimize.minimize(neg, rng.uniform(0, 2 * np.pi, 6), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best = max(best, -res.fun)
    return best


# --------------------------------------------------------------------------- #
# One-round, two-outcome LOCC protocols on two qubits
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class ProtocolOptimum:
    """Best mean squared overlap of a one-round protocol and its parameters."""

    mean_sq_fidelity: float
    c: tuple[float, float]
    theta: float

    @property
    def convertible(self) -> bool:
        return self.mean_sq_fidelity >= 1.0 - 1e-6


def _protocol_value(x, sp: np.ndarray, q: np.ndarray) -> float:
    c = np.clip(x[:2], 0.0, 1.0)
    th = x[2]
    v = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    total = 0.0
    for diag in (c, np.sqrt(1.0 - c**2)):
        m = (diag[:, None] * v) @ sp
        s2 = np.linalg.svd(m, compute_uv=False) ** 2
        prob = s2.sum()
        if prob <= 1e-300:
            continue
        sig = s2 / prob
        # after the outcome, local unitaries align Schmidt bases with the target
        total += prob * np.dot(np.sqrt(sig), np.sqrt(q)) ** 2
    return total


def qubit_protocol_oracle(p, q, grid: int = 9) -> ProtocolOptimum:
    """Optimize ``sum_j pi_j F_j^2`` over Alice's two-outcome measurements.

    Kraus operators are ``diag(c) V`` and ``diag(sqrt(1 - c^2)) V`` with ``V``
    a real rotation; Bob's correction and both parties' unitaries are folded
    into the sorted overlap of each outcome.  Any two-outcome measurement is
    of this form up to phases and left unitaries that do not change the
    outcome spectra.  This is a lower bound on what general LOCC achieves.
    """
    p = np.sort(np.asarray(p, dtype=float))[::-1]
    q = np.sort(np.asarray(q, dtype=float))[::-1]
    sp = np.diag(np.sqrt(p))

    def neg(x):
        return -_protocol_value(x, sp, q)

    axis = np.linspace(0.0, 1.0, grid)
    angles = np.linspace(0.0, np.pi, 2 * grid, endpoint=False)
    seeds = sorted(
        ((neg((a, b, t)), (a, b, t)) for a, b, t in itertools.product(axis, axis, angles)),
        key=lambda r: r[0],
    )[:6]
    best_val, best_x = -seeds[0][0], np.array(seeds[0][1])
    for _, x0 in seeds:
        res = optimize.minimize(neg, np.array(x0), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 6000})
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
    c = np.clip(best_x[:2], 0.0, 1.0)
    return ProtocolOptimum(float(best_val), (float(c[0]), float(c[1])), float(best_x[2]))


# --------------------------------------------------------------------------- #
# Colored Motzkin walks
# --------------------------------------------------------------------------- #
def motzkin_walks(length: int, s: int):
    """Yield every s-colored Motzkin walk of ``length`` as a tuple of steps.

    Steps are ``0`` (flat), ``+c`` (up with colour c) and ``-c`` (down with
    colour c), ``c = 1..s``; each down step must match the colour of the
    most recent unmatched up step and the walk ends at height 0.
    """

    def rec(prefix, stack):
        remaining = length - len(prefix)
        if remaining == 0:
            if not stack:
                yield tuple(prefix)
            return
        if len(stack) > remaining:
            return
        prefix.append(0)
        yield from rec(prefix, stack)
        prefix.pop()
        if len(stack) + 1 <= remaining - 1:
            for c in range(1, s + 1):
                prefix.append(c)
                stack.append(c)
                yield from rec(prefix, stack)
                stack.pop()
                prefix.pop()
        if stack:
            c = stack.pop()
            prefix.append(-c)
            yield from rec(prefix, stack)
            prefix.pop()
            stack.append(c)

    yield from rec([], [])


def motzkin_midpoint_spectrum(length: int, s: int) -> np.ndarray:
    """Schmidt weights of the uniform superposition of colored Motzkin walks,
    cut at ``length // 2``, from an explicit left x right coefficient matrix.

    The matrix is block diagonal after reordering; each connected block is a
    rank-one all-ones matrix ``a x b`` whose only singular value is
    ``sqrt(a b)``.  The rank-one property is checked by SVD on every block
    small enough to densify.
    """
    half = length // 2
    left_ids: dict = {}
    right_ids: dict = {}
    rows, cols = [], []
    for w in motzkin_walks(length, s):
        li = left_ids.setdefault(w[:half], len(left_ids))
        ri = right_ids.setdefault(w[half:], len(right_ids))
        rows.append(li)
        cols.append(ri)
    nl, nr = len(left_ids), len(right_ids)
    total = len(rows)
    mat = coo_matrix((np.ones(total), (rows, cols)), shape=(nl, nr)).tocsr()
    bip = coo_matrix(
        (np.ones(2 * total), (np.r_[rows, np.array(cols) + nl], np.r_[np.array(cols) + nl, rows])),
        shape=(nl + nr, nl + nr),
    )
    ncomp, labels = connected_components(bip, directed=False)
    weights = []
    for comp in range(ncomp):
        li = np.flatnonzero(labels[:nl] == comp)
        ri = np.flatnonzero(labels[nl:] == comp)
        block = mat[li][:, ri]
        if block.shape[0] * block.shape[1] <= 4096:
            sv = np.linalg.svd(block.toarray(), compute_uv=False)
            if sv.size > 1 and sv[1] > 1e-9 * sv[0]:
                raise AssertionError("Motzkin block is not rank one")
            weights.append(sv[0] ** 2)
        else:
            if block.nnz != block.shape[0] * block.shape[1]:
                raise AssertionError("Motzkin block is not all-ones")
            weights.append(float(block.shape[0] * block.shape[1]))
    w = np.sort(np.array(weights))[::-1]
    return w / total


def motzkin_block_counts(length: int, s: int) -> list[tuple[int, int]]:
    """Exact ``(left prefixes, right suffixes)`` sizes of each midpoint block."""
    half = length // 2
    blocks: dict = {}
    for w in motzkin_walks(length, s):
        left, right = w[:half], w[half:]
        # the unmatched up steps of the left half label the block
        stack = []
        for step in left:
            if step > 0:
                stack.append(step)
            elif step < 0:
                stack.pop()
        key = tuple(stack)
        ls, rs = blocks.setdefault(key, (set(), set()))
        ls.add(left)
        rs.add(right)
    return sorted((len(a), len(b)) for a, b in blocks.values())


# --------------------------------------------------------------------------- #
# Dense ground states
# --------------------------------------------------------------------------- #
def schmidt_weights(vector: np.ndarray, dim_left: int) -> np.ndarray:
    """Squared singular values of ``vector`` reshaped as ``dim_left x rest``."""
    mat = np.asarray(vector).reshape(dim_left, -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    w = sv**2
    return np.sort(w / w.sum())[::-1]
