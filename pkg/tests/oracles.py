"""Reference computations written independently of the library.

Everything here uses plain loops, explicit partial sums or ``scipy.integrate.quad``
and never calls into ``bwlab``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

N_BRUTE = 2_000_000


def phi_bf(n: int) -> float:
    out = float(n) ** -3
    j = 1
    while 2 ** (2**j) <= n:
        if n == 2 ** (2**j):
            out += math.log2(math.log2(n)) / float(n) ** 2
        j += 1
    return out


@lru_cache(maxsize=None)
def _suffix_sums() -> np.ndarray:
    # S(m) for 2 <= m <= N_BRUTE, by explicit summation from the top (small terms first)
    n = np.arange(N_BRUTE + 1, dtype=float)
    terms = np.zeros_like(n)
    terms[2:] = n[2:] ** -3
    for j in range(1, 5):
        k = 2 ** (2**j)
        terms[k] += j / float(k) ** 2
    # remainder sum_{k > N} k^-3 (midpoint rule, error O(N^-5)) plus the spikes
    # beyond N; the last representable one is j = 8 (height 8 / 2^512)
    rest = 0.5 / (N_BRUTE + 0.5) ** 2 + math.fsum(FAR_SPIKES.values())
    return np.cumsum(terms[::-1])[::-1] + rest


# n = 2^(2^j) -> spike height, for spikes past the brute-force range
FAR_SPIKES = {2.0 ** (2**j): j / 2.0 ** (2 ** (j + 1)) for j in range(5, 9)}


def S_bf(m: int) -> float:
    return float(_suffix_sums()[m])


def double_tail_rest(m: int) -> float:
    """``sum_{k >= m} S(k)`` for ``m`` near ``N_BRUTE``: ``S(k) ~ 1/(2 k^2)`` plus far spikes."""
    return 0.5 / (m - 0.5) + math.fsum((n - m + 1) * h for n, h in FAR_SPIKES.items())


def logstep_tail_bf(lam: float) -> float:
    """Tail of the log-step weight from block lengths: level density is 1 on ``[n+1-phi(n), n+1]``."""
    if lam < 2.0:
        return S_bf(2)
    n = int(math.floor(lam))
    start = n + 1 - phi_bf(n)
    if lam <= start:
        return S_bf(n)
    return (n + 1 - lam) + S_bf(n + 1)


def logstep_breaks(lo: float, hi: float) -> list[float]:
    pts = []
    for n in range(max(2, int(lo)), int(hi) + 2):
        pts += [n + 1 - phi_bf(n), float(n + 1)]
    return [p for p in pts if lo < p < hi]


def block_level(x: float) -> float:
    """Level of ``r_x = 1 - 2^{-x log2(x+1)}``, i.e. ``x ln(x+1)``."""
    return x * math.log(x + 1.0)


def blockstep_tail_bf(lam: float) -> float:
    """Blocks ``[r_{2j+1}, r_{2j+2}]`` with unit density; ``1-r = e^{-lam}``."""
    total = 0.0
    for j in range(1, 200):
        a, b = block_level(2 * j + 1), block_level(2 * j + 2)
        if b <= lam:
            continue
        a = max(a, lam)
        total += math.exp(-a) - math.exp(-b)
        if a > 745:
            break
    return total


def blockstep_breaks(lo: float, hi: float) -> list[float]:
    pts = [block_level(x) for x in range(3, 200)]
    return [p for p in pts if lo < p < hi]


def quad_pieces(f, edges, **kw) -> float:
    kw.setdefault("epsabs", 0.0)
    kw.setdefault("epsrel", 1e-13)
    kw.setdefault("limit", 200)
    return math.fsum(quad(f, a, b, **kw)[0] for a, b in zip(edges[:-1], edges[1:]) if b > a)


def c_p_gamma(p: float) -> float:
    """``(1/2pi) int |cos|^p`` in closed form."""
    return gamma((p + 1) / 2) / (math.sqrt(math.pi) * gamma(p / 2 + 1))
