"""Random probability vectors for the property sweeps.

Two generators are supported:

``normalized-absolute-gaussian``
    ``|N(0, 1)|`` draws divided by their sum (the default).
``dirichlet-uniform``
    Dirichlet(1, ..., 1), i.e. uniform on the simplex.

Correct rows are made by swapping the largest entry into the true-class
slot.  Wrong rows pick the true class uniformly among the non-argmax slots.

The hot-value samplers build a wrong row ``q`` whose true-class probability
is tied to the hot value ``alpha`` of a given correct row:

* below: ``q_i = alpha - beta`` with ``beta ~ U(0, alpha)``;
* above: ``q_i = alpha + beta`` with ``beta ~ U(0, 1 - alpha)``.

In both cases the non-hot part of ``q`` is a generator draw scaled to
``1 - q_i`` and the pair ``(beta, non-hot part)`` is redrawn until ``q`` is
wrong.  The above-case is implemented with an exact but cheaper scheme for
large ``alpha`` (see ``_above_tilted``) since naive rejection there can need
millions of draws per row.
"""

from __future__ import annotations

import numpy as np

ABS_GAUSSIAN = "normalized-absolute-gaussian"
DIRICHLET = "dirichlet-uniform"
GENERATORS = (ABS_GAUSSIAN, DIRICHLET)

# candidate rows materialized per rejection round
_BATCH = 1 << 17


def check_generator(generator: str) -> None:
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; expected one of {GENERATORS}")


def simplex_rows(rng: np.random.Generator, shape, generator: str = ABS_GAUSSIAN) -> np.ndarray:
    """Random points on the simplex; the last axis of ``shape`` is the class axis."""
    check_generator(generator)
    if generator == ABS_GAUSSIAN:
        v = np.abs(rng.standard_normal(shape))
    else:
        v = rng.standard_exponential(shape)
    total = v.sum(axis=-1, keepdims=True)
    # an all-zero draw has probability zero but would poison the division
    bad = total[..., 0] == 0
    while np.any(bad):
        v[bad] = simplex_rows(rng, v[bad].shape, generator)
        total[bad] = v[bad].sum(axis=-1, keepdims=True)
        bad = total[..., 0] == 0
    return v / total


def _swap_into(rows: np.ndarray, src: np.ndarray, dst: np.ndarray) -> None:
    r = np.arange(rows.shape[0])
    a = rows[r, src].copy()
    rows[r, src] = rows[r, dst]
    rows[r, dst] = a


def correct_rows(rng, n: int, c: int, generator: str = ABS_GAUSSIAN):
    """``n`` rows in which the true class holds the maximum.

    Returns ``(rows, true_classes)``.
    """
    rows = simplex_rows(rng, (n, c), generator)
    true = rng.integers(0, c, n)
    _swap_into(rows, np.argmax(rows, axis=1), true)
    return rows, true


def wrong_rows(rng, n: int, c: int, generator: str = ABS_GAUSSIAN):
    """``n`` rows in which some class strictly beats the true class.

    Returns ``(rows, true_classes, redraws)``; rows whose maximum is tied
    across every candidate slot are redrawn and counted.
    """
    rows = np.empty((n, c))
    true = np.empty(n, dtype=np.int64)
    todo = np.arange(n)
    redraws = 0
    while todo.size:
        m = todo.size
        v = simplex_rows(rng, (m, c), generator)
        top = np.argmax(v, axis=1)
        t = (top + 1 + rng.integers(0, c - 1, m)) % c
        ok = v[np.arange(m), t] < v[np.arange(m), top]
        rows[todo[ok]] = v[ok]
        true[todo[ok]] = t[ok]
        redraws += int(np.count_nonzero(~ok))
        todo = todo[~ok]
    return rows, true, redraws


def _place(hot: np.ndarray, nonhot: np.ndarray, true: np.ndarray) -> np.ndarray:
    """Insert ``hot`` at column ``true`` and ``nonhot`` (n x (c-1)) around it."""
    n, k = nonhot.shape
    c = k + 1
    out = np.empty((n, c))
    cols = np.arange(c)[None, :]
    src = cols - (cols > true[:, None])
    out[:] = np.take_along_axis(nonhot, np.clip(src, 0, k - 1), axis=1)
    out[np.arange(n), true] = hot
    return out


def _first_accepted(acc: np.ndarray):
    has = acc.any(axis=1)
    return has, np.argmax(acc, axis=1)


def _below_nonhot(rng, alpha: np.ndarray, k: int, generator: str):
    """Hot value ``t ~ U(0, alpha)`` and non-hot shape with some entry above ``t``."""
    n = alpha.size
    t_out = np.empty(n)
    s_out = np.empty((n, k))
    todo = np.arange(n)
    while todo.size:
        m = todo.size
        b = max(1, min(_BATCH // m, 1024))
        a = alpha[todo][:, None]
        s = simplex_rows(rng, (m, b, k), generator)
        top = s.max(axis=2)
        t = a * rng.random((m, b))
        # q is wrong iff (1 - t) * max(s) > t
        acc = (t > 0) & (t < top / (1 + top))
        has, first = _first_accepted(acc)
        rows = todo[has]
        t_out[rows] = t[has, first[has]]
        s_out[rows] = s[has, first[has]]
        todo = todo[~has]
    return t_out, s_out


def _tilt_threshold(k: int) -> float:
    # crossover in alpha where the tilted proposal out-accepts plain rejection
    return 0.16 + 0.6 / k


def _above_plain(rng, a: np.ndarray, b: int, k: int, generator: str):
    m = a.size
    s = simplex_rows(rng, (m, b, k), generator)
    top = s.max(axis=2)
    t = a[:, None] + (0.5 - a[:, None]) * rng.random((m, b))
    acc = (t > a[:, None]) & (t < top / (1 + top))
    return acc, t, s


def _above_tilted(rng, a: np.ndarray, b: int, k: int, generator: str):
    """Exact sampler of the above-case target, efficient for large ``alpha``.

    With ``r(t) = t / (1 - t)`` the target over (hot value ``t``, shape
    ``s``) is ``f(s) * 1[alpha < t < 1/2] * 1[max(s) > r(t)]``.  Relative to
    the uniform simplex, ``f(s)`` is ``||s||_2 ** -k`` for the absolute
    Gaussian generator and constant for Dirichlet(1).

    Proposal: pick a slot ``j``, set ``s = r e_j + (1 - r) u`` with ``u``
    uniform on the simplex (so ``s_j > r``), and draw ``t`` from a density
    that cancels the mixture normalizer.  Accepting with probability
    ``(r / ||s||)**k / N`` (``N`` = number of slots above ``r``) recovers
    the target exactly.
    """
    m = a.size
    r_lo = (a / (1 - a))[:, None]
    u = rng.random((m, b))
    if generator == ABS_GAUSSIAN:
        # density of z = (1 - r) / r is proportional to z**(k-1) (1+z) / (2+z)**2
        z_hi = (1 - r_lo) / r_lo
        z = z_hi * rng.random((m, b)) ** (1.0 / k)
        acc = u < 4 * (1 + z) / (2 + z) ** 2
        r = 1 / (1 + z)
    else:
        # density of w = 1 - r is proportional to w**(k-1) / (2-w)**2
        w_hi = 1 - r_lo
        w = w_hi * rng.random((m, b)) ** (1.0 / k)
        acc = u < ((2 - w_hi) / (2 - w)) ** 2
        r = 1 - w
    s = simplex_rows(rng, (m, b, k), DIRICHLET) * (1 - r)[..., None]
    slot = rng.integers(0, k, (m, b))
    np.put_along_axis(s, slot[..., None], np.take_along_axis(s, slot[..., None], 2) + r[..., None], 2)
    above = np.count_nonzero(s > r[..., None], axis=2)
    weight = 1.0 / np.maximum(above, 1)
    if generator == ABS_GAUSSIAN:
        weight = weight * (r / np.linalg.norm(s, axis=2)) ** k
    acc &= rng.random((m, b)) < weight
    t = r / (1 + r)
    acc &= (t > a[:, None]) & (above >= 1)
    return acc, t, s


def _above_nonhot(rng, alpha: np.ndarray, k: int, generator: str):
    """Hot value ``t ~ U(alpha, 1)`` and a non-hot shape making ``q`` wrong.

    Requires ``alpha < 1/2``.  Values of ``t >= 1/2`` can never give a wrong
    row, so the uniform draw is restricted to ``(alpha, 1/2)``, which leaves
    the accepted distribution unchanged.
    """
    n = alpha.size
    t_out = np.empty(n)
    s_out = np.empty((n, k))
    tilted = alpha >= _tilt_threshold(k)
    todo = np.arange(n)
    while todo.size:
        m = todo.size
        b = max(1, min(_BATCH // m, 4096))
        acc = np.zeros((m, b), bool)
        t = np.empty((m, b))
        s = np.empty((m, b, k))
        for use_tilt, draw in ((False, _above_plain), (True, _above_tilted)):
            sel = np.flatnonzero(tilted[todo] == use_tilt)
            if sel.size:
                acc[sel], t[sel], s[sel] = draw(rng, alpha[todo[sel]], b, k, generator)
        has, first = _first_accepted(acc)
        rows = todo[has]
        t_out[rows] = t[has, first[has]]
        s_out[rows] = s[has, first[has]]
        todo = todo[~has]
    return t_out, s_out


def hot_value_pairs(rng, n: int, c: int, case: str, generator: str = ABS_GAUSSIAN):
    """Pairs ``(x, q, true, infeasible)`` for the hot-value Monte Carlo.

    ``x`` is correct with hot value ``alpha``; ``q`` is wrong with hot value
    below (``case="below"``) or above (``case="above"``) ``alpha``.
    ``infeasible`` counts redrawn ``x`` rows (``alpha >= 1/2`` in the above
    case, where no wrong ``q`` can exist).
    """
    check_generator(generator)
    if case not in ("below", "above"):
        raise ValueError(f"case must be 'below' or 'above', got {case!r}")
    if case == "above" and c < 3:
        raise ValueError("a wrong row with a higher hot value needs c >= 3")
    if c < 2:
        raise ValueError("c must be >= 2")
    x, true = correct_rows(rng, n, c, generator)
    alpha = x[np.arange(n), true]
    infeasible = 0
    if case == "above":
        bad = np.flatnonzero(alpha >= 0.5)
        while bad.size:
            infeasible += bad.size
            xr, tr = correct_rows(rng, bad.size, c, generator)
            x[bad], true[bad] = xr, tr
            alpha[bad] = xr[np.arange(bad.size), tr]
            bad = bad[alpha[bad] >= 0.5]
        t, s = _above_nonhot(rng, alpha, c - 1, generator)
    else:
        t, s = _below_nonhot(rng, alpha, c - 1, generator)
    q = _place(t, s * (1 - t)[:, None], true)
    return x, q, true, infeasible
