"""Dense two-phase tableau simplex with Bland's rule.

Used wherever the package needs an exact, non-private LP solve: the
objective-private solver's post-processing step, the reconstruction-attack
baseline, and the OPT used by set-cover instances.
"""

import numpy as np

TOL = 1e-9


class InfeasibleError(ValueError):
    pass


class UnboundedError(ValueError):
    pass


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    others = np.arange(T.shape[0]) != row
    T[others] -= np.outer(T[others, col], T[row])
    basis[row] = col


def _run(T, basis, n_cols, max_iter):
    """Maximize the objective stored in the last row of ``T`` (as reduced costs).

    The last row holds ``-c`` for the current basis, so an entering column is
    one with a negative entry.
    """
    for _ in range(max_iter):
        reduced = T[-1, :n_cols]
        candidates = np.flatnonzero(reduced < -TOL)
        if candidates.size == 0:
            return
        col = int(candidates[0])
        column = T[:-1, col]
        positive = np.flatnonzero(column > TOL)
        if positive.size == 0:
            raise UnboundedError("objective is unbounded")
        ratios = T[positive, -1] / column[positive]
        best = ratios.min()
        ties = positive[ratios <= best + TOL * max(1.0, abs(best))]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(T, basis, row, col)
    raise RuntimeError("simplex did not terminate")


def linprog_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=50_000):
    """Maximize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Returns ``(x, value)``. Raises :class:`InfeasibleError` or
    :class:`UnboundedError`.
    """
    c = np.asarray(c, dtype=np.float64)
    d = c.shape[0]
    A_ub = np.zeros((0, d)) if A_ub is None else np.asarray(A_ub, dtype=np.float64).reshape(-1, d)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=np.float64).reshape(-1)
    A_eq = np.zeros((0, d)) if A_eq is None else np.asarray(A_eq, dtype=np.float64).reshape(-1, d)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=np.float64).reshape(-1)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # columns: d originals | m_ub slacks | m artificials | rhs
    n_struct = d + m_ub
    T = np.zeros((m + 1, n_struct + m + 1))
    T[:m_ub, :d] = A_ub
    T[:m_ub, d:n_struct] = np.eye(m_ub)
    T[m_ub:m, :d] = A_eq
    T[:m, -1] = np.concatenate([b_ub, b_eq])
    T[np.flatnonzero(T[:m, -1] < 0)] *= -1
    T[:m, n_struct:n_struct + m] = np.eye(m)
    basis = np.arange(n_struct, n_struct + m)

    # phase 1: maximize -sum(artificials)
    T[-1, n_struct:n_struct + m] = 1.0
    T[-1] -= T[:m].sum(axis=0)
    _run(T, basis, n_struct + m, max_iter)
    if T[-1, -1] < -TOL * max(1.0, np.abs(T[:m, -1]).max(initial=0.0)):
        raise InfeasibleError("constraints are infeasible")

    # drive remaining artificials out of the basis; rows with no pivot are redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n_struct:
            nz = np.flatnonzero(np.abs(T[r, :n_struct]) > TOL)
            if nz.size:
                _pivot(T, basis, r, int(nz[0]))
            else:
                keep[r] = False
    rows = np.concatenate([np.flatnonzero(keep), [m]])
    T = np.delete(T[rows], np.s_[n_struct:n_struct + m], axis=1)
    basis = basis[keep]

    # phase 2
    T[-1] = 0.0
    T[-1, :d] = -c
    for r, j in enumerate(basis):
        T[-1] -= T[-1, j] * T[r]
    _run(T, basis, n_struct, max_iter)

    x = np.zeros(n_struct)
    x[basis] = T[:-1, -1]
    x = np.maximum(x[:d], 0.0)
    return x, float(c @ x)
