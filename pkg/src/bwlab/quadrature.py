"""Adaptive Gauss-Legendre panel quadrature.

Panels are bisected until the difference between the one-panel rule and the
two-half-panel rule falls below the local share of the tolerance.  Accepted
panel values are combined with ``math.fsum`` in ascending panel order, so the
result does not depend on the refinement history.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericalFailure

DEFAULT_ORDER = 16


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _as_panels(panels) -> np.ndarray:
    arr = np.asarray(panels, dtype=float)
    if arr.ndim == 1:
        # a list of edges
        arr = np.column_stack([arr[:-1], arr[1:]])
    arr = arr.reshape(-1, 2)
    return arr[arr[:, 1] > arr[:, 0]]


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    panels: Sequence | np.ndarray,
    *,
    rtol: float = 1e-12,
    atol: float = 0.0,
    order: int = DEFAULT_ORDER,
    max_rounds: int = 90,
) -> float:
    """Integrate the vectorised ``f`` over a union of disjoint panels.

    ``panels`` is either an array of edges (contiguous panels) or an
    ``(n, 2)`` array of ``(a, b)`` pairs.  ``f`` is called on 1-D arrays.
    """
    value, _ = integrate_with_error(
        f, panels, rtol=rtol, atol=atol, order=order, max_rounds=max_rounds
    )
    return value


def integrate_with_error(f, panels, *, rtol=1e-12, atol=0.0, order=DEFAULT_ORDER, max_rounds=90):
    active = _as_panels(panels)
    if active.size == 0:
        return 0.0, 0.0
    x, w = gauss_legendre(order)
    total_width = float(np.sum(active[:, 1] - active[:, 0]))
    done_a: list[np.ndarray] = []
    done_v: list[np.ndarray] = []
    done_e: list[np.ndarray] = []
    accepted_sum = 0.0
    for _ in range(max_rounds):
        a = active[:, 0]
        b = active[:, 1]
        m = 0.5 * (a + b)
        h = 0.5 * (b - a)
        # nodes for the whole panel and both halves, evaluated in one call
        nodes = np.concatenate(
            [
                (m[:, None] + h[:, None] * x),
                (0.5 * (a + m)[:, None] + 0.5 * h[:, None] * x),
                (0.5 * (m + b)[:, None] + 0.5 * h[:, None] * x),
            ],
            axis=1,
        )
        vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
        if not np.all(np.isfinite(vals)):
            raise NumericalFailure("integrand produced non-finite values")
        n = len(x)
        whole = h * (vals[:, :n] @ w)
        halves = 0.5 * h * (vals[:, n : 2 * n] @ w) + 0.5 * h * (vals[:, 2 * n :] @ w)
        err = np.abs(whole - halves)
        estimate = accepted_sum + math.fsum(halves)
        tol = max(atol, rtol * abs(estimate))
        share = tol * np.maximum((b - a) / total_width, 1.0 / 64.0)
        ok = err <= share
        if ok.any():
            done_a.append(a[ok])
            done_v.append(halves[ok])
            done_e.append(err[ok])
            accepted_sum += math.fsum(halves[ok])
        if ok.all():
            break
        bad = active[~ok]
        mid = 0.5 * (bad[:, 0] + bad[:, 1])
        active = np.concatenate(
            [np.column_stack([bad[:, 0], mid]), np.column_stack([mid, bad[:, 1]])]
        )
        if np.any(active[:, 1] - active[:, 0] <= 0.0):
            raise NumericalFailure("panel width underflow during refinement")
    else:
        raise NumericalFailure(f"adaptive quadrature did not converge in {max_rounds} rounds")
    starts = np.concatenate(done_a)
    values = np.concatenate(done_v)
    errors = np.concatenate(done_e)
    order_idx = np.argsort(starts, kind="stable")
    return math.fsum(values[order_idx]), float(np.sum(errors))


def dyadic_edges(lo: float, hi: float, first: float = 1.0) -> np.ndarray:
    """Edges ``lo, lo+first, lo+2 first, lo+4 first, ...`` up to ``hi``."""
    edges = [lo]
    step = first
    while edges[-1] + step < hi:
        edges.append(edges[-1] + step)
        step *= 2.0
    edges.append(hi)
    return np.asarray(edges)


def split_at(lo: float, hi: float, points: Iterable[float]) -> np.ndarray:
    """Edges of ``[lo, hi]`` split at the given interior points."""
    inner = [p for p in points if lo < p < hi]
    return np.asarray([lo, *sorted(inner), hi], dtype=float)


def clip_panels(pieces: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Intersect ``(a, b)`` pieces with ``[lo, hi]``."""
    if len(pieces) == 0:
        return np.zeros((0, 2))
    p = np.asarray(pieces, dtype=float).reshape(-1, 2)
    a = np.maximum(p[:, 0], lo)
    b = np.minimum(p[:, 1], hi)
    keep = b > a
    return np.column_stack([a[keep], b[keep]])
