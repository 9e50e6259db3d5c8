"""Virasoro algebra representation theory in exact arithmetic.

Verma modules M(c,h) over the partition-monomial basis T(-n1)...T(-nk)v,
the contravariant (Shapovalov) form, and graded bases of the simple
quotients L(c,h) obtained depth by depth as the quotient by the radical
of the form.  The vacuum variant quotients T(-1)v out first, so vacuum
monomials have all parts >= 2.
"""
from __future__ import annotations

import functools
import math

from .exact import Rat, rat, ZERO, RowReducer, SparseMatrix, rank_kernel


def minimal_c(p: int, q: int) -> Rat:
    """Central charge of the (p,q) minimal model."""
    _check_pq(p, q)
    return 1 - rat(6 * (p - q) ** 2, p * q)


def minimal_h(p: int, q: int, r: int, s: int) -> Rat:
    """Conformal weight of the (r,s) primary in the (p,q) minimal model."""
    _check_pq(p, q)
    if not (0 < r < p and 0 < s < q):
        raise ValueError(f"label (r,s)=({r},{s}) outside 0<r<{p}, 0<s<{q}")
    return rat((r * q - s * p) ** 2 - (p - q) ** 2, 4 * p * q)


def _check_pq(p: int, q: int):
    if not (1 < p < q):
        raise ValueError(f"need 1 < p < q, got ({p},{q})")
    if math.gcd(p, q) != 1:
        raise ValueError(f"p={p}, q={q} not coprime")


def canonical_rs(p: int, q: int, r: int, s: int) -> tuple[int, int]:
    """Representative of the label orbit (r,s) ~ (p-r, q-s)."""
    return min((r, s), (p - r, q - s))


def minimal_labels(p: int, q: int) -> list[tuple[int, int]]:
    """Canonical (r,s) labels for the inequivalent simple modules."""
    out = set()
    for r in range(1, p):
        for s in range(1, q):
            out.add(canonical_rs(p, q, r, s))
    return sorted(out)


def h_value_multiset(p: int, q: int) -> list[Rat]:
    """All h_{p,q;r,s} over 0<r<p, 0<s<q, with multiplicity."""
    return sorted(minimal_h(p, q, r, s) for r in range(1, p) for s in range(1, q))


@functools.lru_cache(maxsize=None)
def partitions_desc(n: int, min_part: int = 1, max_part: int | None = None) -> tuple:
    """Partitions of n, each weakly decreasing, in lex-decreasing order."""
    if n == 0:
        return ((),)
    if n < min_part:
        return ()
    top = n if max_part is None else min(max_part, n)
    out = []
    for first in range(top, min_part - 1, -1):
        for rest in partitions_desc(n - first, min_part, first):
            out.append((first,) + rest)
    return tuple(out)


class VermaModule:
    """Highest-weight Virasoro module on the partition-monomial basis.

    ``vacuum=True`` imposes T(-1)v = 0 (parts >= 2), the quotient relevant
    for vertex-algebra vacuum modules.  Module vectors are dicts mapping
    partitions to rational coefficients; depth is the partition weight.
    """

    def __init__(self, c, h, vacuum: bool = False):
        self.c = rat(c)
        self.h = rat(h)
        self.vacuum = bool(vacuum)
        if self.vacuum and self.h != 0:
            raise ValueError("vacuum quotient requires h = 0")
        self.min_part = 2 if self.vacuum else 1
        self._mode_memo: dict[tuple[int, tuple], dict] = {}
        self._gram_memo: dict[int, list] = {}

    def basis(self, depth: int) -> tuple:
        return partitions_desc(depth, self.min_part)

    def dim(self, depth: int) -> int:
        return len(self.basis(depth))

    # -- mode action ------------------------------------------------------

    def apply_mode(self, n: int, mu: tuple) -> dict[tuple, Rat]:
        """T(n) applied to the basis monomial ``mu``; exact, PBW-ordered."""
        key = (n, mu)
        memo = self._mode_memo
        if key in memo:
            return memo[key]
        if not mu:
            if n > 0:
                res = {}
            elif n == 0:
                res = {(): self.h} if self.h != 0 else {}
            elif self.vacuum and n == -1:
                res = {}
            else:
                res = {(-n,): rat(1)}
        else:
            k, rest = mu[0], mu[1:]
            res = self._prepend(k, self.apply_mode(n, rest))
            if n + k != 0:
                _acc(res, self.apply_mode(n - k, rest), rat(n + k))
            if n == k:
                cterm = self.c * (n ** 3 - n) / 12
                if cterm != 0:
                    _acc(res, {rest: rat(1)}, cterm)
        memo[key] = res
        return res

    def _prepend(self, k: int, vec: dict) -> dict:
        """T(-k) applied to ``vec``, result in PBW order."""
        out = {}
        for nu, cv in vec.items():
            if not nu or k >= nu[0]:
                if self.vacuum and k == 1:
                    continue
                mono = (k,) + nu
                out[mono] = out.get(mono, ZERO) + cv
            else:
                _acc(out, self.apply_mode(-k, nu), cv)
        return {m: v for m, v in out.items() if v != 0}

    def act(self, n: int, vec: dict) -> dict[tuple, Rat]:
        out = {}
        for mu, cv in vec.items():
            _acc(out, self.apply_mode(n, mu), cv)
        return {m: v for m, v in out.items() if v != 0}

    def act_truncated(self, n: int, vec: dict, cutoff: int):
        """T(n) with depth components above cutoff discarded and flagged.

        Truncation can only occur for n < 0; the flag is exact.
        """
        full = self.act(n, vec)
        kept = {m: v for m, v in full.items() if sum(m) <= cutoff}
        return kept, len(kept) != len(full)

    # -- contravariant form -----------------------------------------------

    def gram(self, depth: int) -> list[list[Rat]]:
        """Matrix of <X v, Y v> over the depth basis, <v, v> = 1."""
        if depth in self._gram_memo:
            return self._gram_memo[depth]
        bas = self.basis(depth)
        g = []
        for mu in bas:
            row = []
            for nu in bas:
                vec = {nu: rat(1)}
                for k in mu:
                    vec = self.act(k, vec)
                row.append(vec.get((), ZERO))
            g.append(row)
        self._gram_memo[depth] = g
        return g

    def gram_sparse(self, depth: int) -> SparseMatrix:
        return SparseMatrix.from_dense(self.gram(depth))


def _acc(target: dict, src: dict, scal=None):
    if scal is None:
        for k, v in src.items():
            nv = target.get(k, ZERO) + v
            if nv == 0:
                target.pop(k, None)
            else:
                target[k] = nv
    else:
        for k, v in src.items():
            nv = target.get(k, ZERO) + v * scal
            if nv == 0:
                target.pop(k, None)
            else:
                target[k] = nv


def vec_scale(vec: dict, s) -> dict:
    s = rat(s)
    return {k: v * s for k, v in vec.items()} if s != 0 else {}


def vec_add(a: dict, b: dict) -> dict:
    out = dict(a)
    _acc(out, b)
    return {k: v for k, v in out.items() if v != 0}


class DepthReduction:
    """Reduction of one graded piece of a Verma module by the form radical."""

    def __init__(self, verma: VermaModule, depth: int):
        self.depth = depth
        bas = verma.basis(depth)
        self.ambient = bas
        self.index = {mu: i for i, mu in enumerate(bas)}
        g = verma.gram_sparse(depth)
        _, kernel = rank_kernel(g)
        red = RowReducer(len(bas))
        for v in kernel:
            red.add_row(v)
        self._red = red
        self.radical_vectors = kernel
        self.rep_monomials = tuple(bas[i] for i in red.free_cols())
        self.dim = len(self.rep_monomials)

    def reduce_vec(self, vec: dict) -> dict[tuple, Rat]:
        coords = {self.index[mu]: v for mu, v in vec.items()}
        red = self._red.reduce(coords)
        return {self.ambient[i]: v for i, v in red.items()}


class SimpleQuotient:
    """Graded basis and reduction maps of L(c,h) up to any requested depth.

    The quotient at each depth is the Verma graded piece modulo the kernel
    of the contravariant Gram matrix; representatives are the pivot-free
    partition monomials in lex-decreasing order.
    """

    def __init__(self, c, h, vacuum: bool = False):
        self.verma = VermaModule(c, h, vacuum=vacuum)
        self.c = self.verma.c
        self.h = self.verma.h
        self.vacuum = vacuum
        self._levels: dict[int, DepthReduction] = {}

    def level(self, depth: int) -> DepthReduction:
        lv = self._levels.get(depth)
        if lv is None:
            lv = DepthReduction(self.verma, depth)
            self._levels[depth] = lv
        return lv

    def dim(self, depth: int) -> int:
        return self.level(depth).dim

    def basis(self, depth: int) -> tuple:
        return self.level(depth).rep_monomials

    def graded_dims(self, depth: int) -> list[int]:
        return [self.dim(d) for d in range(depth + 1)]

    def reduce(self, vec: dict) -> dict[tuple, Rat]:
        """Reduce an ambient vector (mixed depths allowed) to representatives."""
        by_depth: dict[int, dict] = {}
        for mu, v in vec.items():
            by_depth.setdefault(sum(mu), {})[mu] = v
        out = {}
        for d, piece in by_depth.items():
            _acc(out, self.level(d).reduce_vec(piece))
        return {m: v for m, v in out.items() if v != 0}

    def act(self, n: int, vec: dict) -> dict[tuple, Rat]:
        """T(n) on reduced vectors: act in the ambient module, re-reduce."""
        return self.reduce(self.verma.act(n, vec))


def simple_quotient_basis(p: int, q: int, r: int, s: int, depth: int):
    """Graded dims and representative bases of L(c_{p,q}, h_{r,s}) up to depth."""
    c = minimal_c(p, q)
    h = minimal_h(p, q, r, s)
    sq = SimpleQuotient(c, h, vacuum=(h == 0))
    return sq, [sq.basis(d) for d in range(depth + 1)]
