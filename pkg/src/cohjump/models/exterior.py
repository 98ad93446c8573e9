"""Left-invariant forms on a complex nilpotent Lie group.

The algebra is ``Λ(g_C^*)`` with generators ``ω^0..ω^{n-1}`` (type (1,0)) and
``ω̄^0..ω̄^{n-1}`` (type (0,1)), indexed ``0..n-1`` and ``n..2n-1``.  A
monomial is a bitmask; its generators are read in increasing index order,
so holomorphic factors always come first.  Forms are dense complex vectors
of length ``4**n`` indexed by bitmask.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np


def _bits(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def wedge_sign(a: int, b: int) -> int:
    """Sign of ``mono(a) ∧ mono(b)`` relative to the sorted monomial; 0 on overlap."""
    if a & b:
        return 0
    swaps = 0
    for g in _bits(b):
        swaps += _popcount(a >> (g + 1))
    return -1 if swaps % 2 else 1


class ExteriorAlgebra:
    """Invariant forms with the Chevalley-Eilenberg differential.

    ``d_generators[g]`` is ``dθ^g`` as a form vector.
    """

    def __init__(self, n: int, d_generators: np.ndarray):
        self.n = n
        self.size = 1 << (2 * n)
        self.d_generators = np.asarray(d_generators, dtype=complex)
        self.hol_mask = (1 << n) - 1
        self.anti_mask = self.hol_mask << n

    def bidegree(self, mask: int) -> tuple[int, int]:
        return _popcount(mask & self.hol_mask), _popcount(mask & self.anti_mask)

    def masks(self, p: int, q: int) -> list[int]:
        return [m for m in range(self.size) if self.bidegree(m) == (p, q)]

    def wedge(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        for i in np.flatnonzero(a):
            for j in np.flatnonzero(b):
                s = wedge_sign(int(i), int(j))
                if s:
                    out[int(i) | int(j)] += s * a[i] * b[j]
        return out

    def monomial(self, mask: int) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        v[mask] = 1.0
        return v

    @cached_property
    def d(self) -> np.ndarray:
        """Matrix of ``d`` on the whole algebra (an odd derivation)."""
        mat = np.zeros((self.size, self.size), dtype=complex)
        for mask in range(self.size):
            gens = _bits(mask)
            col = np.zeros(self.size, dtype=complex)
            for pos, g in enumerate(gens):
                left = sum(1 << h for h in gens[:pos])
                right = sum(1 << h for h in gens[pos + 1:])
                term = self.wedge(self.wedge(self.monomial(left), self.d_generators[g]), self.monomial(right))
                col += (-1) ** pos * term
            mat[:, mask] = col
        return mat

    def component(self, op: np.ndarray, dp: int, dq: int) -> np.ndarray:
        """Part of ``op`` shifting bidegree by ``(dp, dq)``."""
        out = np.zeros_like(op)
        for src in range(self.size):
            p, q = self.bidegree(src)
            for dst in np.flatnonzero(op[:, src]):
                if self.bidegree(int(dst)) == (p + dp, q + dq):
                    out[dst, src] = op[dst, src]
        return out

    @cached_property
    def del_(self) -> np.ndarray:
        return self.component(self.d, 1, 0)

    @cached_property
    def delbar(self) -> np.ndarray:
        return self.component(self.d, 0, 1)

    @cached_property
    def lie_bracket(self) -> np.ndarray:
        """``c[a, b, e]`` with ``[e_a, e_b] = sum_e c[a, b, e] e_e`` on ``g_C``.

        Uses ``θ^e([X, Y]) = -dθ^e(X, Y)``.
        """
        m = 2 * self.n
        c = np.zeros((m, m, m), dtype=complex)
        for e in range(m):
            for a in range(m):
                for b in range(a + 1, m):
                    coeff = self.d_generators[e][(1 << a) | (1 << b)]
                    c[a, b, e] = -coeff
                    c[b, a, e] = coeff
        return c

    def interior(self, a: int) -> np.ndarray:
        """Matrix of contraction with the dual basis vector ``e_a``."""
        mat = np.zeros((self.size, self.size), dtype=complex)
        for mask in range(self.size):
            if mask >> a & 1:
                pos = _popcount(mask & ((1 << a) - 1))
                mat[mask & ~(1 << a), mask] = (-1) ** pos
        return mat

    def restrict(self, op: np.ndarray, src: list[int], dst: list[int]) -> np.ndarray:
        return op[np.ix_(dst, src)]

    def conjugate(self, form: np.ndarray) -> np.ndarray:
        """Complex conjugate: swap ω and ω̄ and conjugate coefficients."""
        n = self.n
        out = np.zeros(self.size, dtype=complex)
        for mask in np.flatnonzero(form):
            mask = int(mask)
            gens = [g + n if g < n else g - n for g in _bits(mask)]
            # sort the swapped generators, tracking the permutation sign
            sign = 1
            arr = list(gens)
            for i in range(len(arr)):
                for j in range(len(arr) - 1 - i):
                    if arr[j] > arr[j + 1]:
                        arr[j], arr[j + 1] = arr[j + 1], arr[j]
                        sign = -sign
            out[sum(1 << g for g in arr)] += sign * np.conj(form[mask])
        return out
