"""Independent reference computations used by the tests."""
import numpy as np

GRID = 64


def _propagate(A, b, lo, hi):
    """Tighten integer boxes lo <= W <= hi in place under A W <= b.
    Returns False when the box becomes empty."""
    pos, neg = A > 0, A < 0
    safe = np.where(A == 0, 1, A)
    while True:
        low = np.where(pos, A * lo, A * hi)
        row_min = low.sum(axis=1)
        if np.any(row_min > b):
            return False
        slack = b[:, None] - (row_min[:, None] - low)
        bound = slack / safe
        new_hi = np.minimum(hi, np.where(pos, np.floor(bound), np.inf).min(axis=0)).astype(np.int64)
        new_lo = np.maximum(lo, np.where(neg, np.ceil(bound), -np.inf).max(axis=0)).astype(np.int64)
        if np.any(new_lo > new_hi):
            return False
        if np.array_equal(new_lo, lo) and np.array_equal(new_hi, hi):
            return True
        lo[:], hi[:] = new_lo, new_hi


def _feasible(A, b, lo, hi):
    lo, hi = lo.copy(), hi.copy()
    if not _propagate(A, b, lo, hi):
        return False
    free = np.flatnonzero(lo < hi)
    if len(free) == 0:
        return bool(np.all(A @ lo <= b))
    e = free[np.argmax((hi - lo)[free])]
    mid = (lo[e] + hi[e]) // 2
    left_hi = hi.copy()
    left_hi[e] = mid
    if _feasible(A, b, lo, left_hi):
        return True
    right_lo = lo.copy()
    right_lo[e] = mid + 1
    return _feasible(A, b, right_lo, hi)


def grid_game_value(A, c, grid=GRID):
    """min over w in {0, 1/grid, ..., 1}^E of max_r (c + A w)_r.

    Requires integer A and c, so the value is a multiple of 1/grid. With
    W = grid * w, the question "value <= k/grid" is the integer feasibility
    problem A W <= k - grid c, 0 <= W <= grid, decided by interval
    propagation and domain splitting; k is found by bisection.
    """
    A = np.asarray(A.todense() if hasattr(A, "todense") else A, dtype=float)
    c = np.asarray(c, dtype=float)
    if not (np.array_equal(A, np.round(A)) and np.array_equal(c, np.round(c))):
        raise ValueError("oracle needs an integer game matrix")
    A = A.astype(np.int64)
    c = c.astype(np.int64)
    R, E = A.shape
    if R == 0:
        return 0.0
    if E == 0:
        return float(c.max())
    # sums over row subsets are implied constraints; they let propagation
    # see certificates that mix several rows (subsets capped for large R)
    if R <= 12:
        S = ((np.arange(1, 2 ** R)[:, None] >> np.arange(R)) & 1).astype(np.int64)
    else:
        pairs = [(i, j) for i in range(R) for j in range(i + 1, R)]
        S = np.zeros((len(pairs), R), dtype=np.int64)
        for k, (i, j) in enumerate(pairs):
            S[k, i] = S[k, j] = 1
        S = np.vstack([np.eye(R, dtype=np.int64), S])
    SA = S @ A
    lo0 = np.zeros(E, dtype=np.int64)
    hi0 = np.full(E, grid, dtype=np.int64)
    # bracket: value lies in [grid*min_r(c + sum neg), grid*max c + grid*max pos]
    k_lo = int((grid * c + grid * np.minimum(A, 0).sum(axis=1)).max()) - 1  # infeasible
    k_hi = int(grid * c.max() + grid * np.maximum(A, 0).sum(axis=1).max())  # feasible
    while k_hi - k_lo > 1:
        k = (k_lo + k_hi) // 2
        if _feasible(SA, S @ (k - grid * c), lo0, hi0):
            k_hi = k
        else:
            k_lo = k
    return k_hi / grid
