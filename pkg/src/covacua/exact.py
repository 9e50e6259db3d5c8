"""Exact rational scalars and sparse linear algebra over Q.

Everything downstream (Gram matrices, quotient bases, block relation
matrices) runs through this module.  There is no floating point and no
tolerance anywhere: two values are equal iff they are the same rational
number.
"""
from __future__ import annotations

import math
from gmpy2 import mpq

# Arbitrary-precision rational, always stored in lowest terms with a
# positive denominator (gmpy2 guarantees both).
Rat = mpq

ZERO = mpq(0)
ONE = mpq(1)


def rat(x, y=None) -> Rat:
    """Coerce ints, 'p/q' strings or rationals to an exact rational."""
    if y is not None:
        return mpq(x, y)
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def rat_str(x) -> str:
    """Render as 'p/q', or 'p' when the denominator is one."""
    return str(mpq(x))


def binomial(n, k: int) -> Rat:
    """Generalized binomial coefficient with arbitrary rational/integer top."""
    if k < 0:
        return ZERO
    num = ONE
    for i in range(k):
        num *= (mpq(n) - i)
    return num / math.factorial(k)


def _bitlen(x: Rat) -> int:
    return int(abs(x.numerator)).bit_length() + int(x.denominator).bit_length()


class SparseMatrix:
    """Sparse matrix over Q: no duplicate positions, no stored zeros."""

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], Rat] = {}
        if entries:
            for (r, c), v in (entries.items() if isinstance(entries, dict) else entries):
                if not (0 <= r < rows and 0 <= c < cols):
                    raise ValueError(f"entry ({r},{c}) outside {rows}x{cols}")
                v = rat(v)
                if v != 0:
                    self.entries[(r, c)] = v

    @classmethod
    def from_rows(cls, row_dicts, cols: int) -> "SparseMatrix":
        m = cls(len(row_dicts), cols)
        for r, row in enumerate(row_dicts):
            for c, v in row.items():
                if v != 0:
                    m.entries[(r, c)] = rat(v)
        return m

    @classmethod
    def from_dense(cls, dense) -> "SparseMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        m = cls(rows, cols)
        for r in range(rows):
            for c in range(cols):
                if dense[r][c] != 0:
                    m.entries[(r, c)] = rat(dense[r][c])
        return m

    def row(self, r: int) -> dict[int, Rat]:
        return {c: v for (rr, c), v in self.entries.items() if rr == r}

    def row_dicts(self) -> list[dict[int, Rat]]:
        out = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        t = SparseMatrix(self.cols, self.rows)
        for (r, c), v in self.entries.items():
            t.entries[(c, r)] = v
        return t

    def to_dense(self):
        d = [[ZERO] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            d[r][c] = v
        return d

    def to_text(self) -> str:
        """Line-oriented 'row col value' triples; rationals printed as p/q."""
        lines = [f"{self.rows} {self.cols}"]
        for (r, c) in sorted(self.entries):
            lines.append(f"{r} {c} {rat_str(self.entries[(r, c)])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SparseMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        rows, cols = map(int, lines[0].split())
        m = cls(rows, cols)
        for ln in lines[1:]:
            r, c, v = ln.split()
            m.entries[(int(r), int(c))] = rat(v)
        return m

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _clear_denominators(row: dict[int, Rat]) -> dict[int, int]:
    if not row:
        return {}
    lcm = 1
    for v in row.values():
        lcm = lcm * v.denominator // math.gcd(lcm, int(v.denominator))
    out = {}
    for c, v in row.items():
        out[c] = int(v.numerator) * (lcm // int(v.denominator))
    g = 0
    for v in out.values():
        g = math.gcd(g, v)
    if g > 1:
        out = {c: v // g for c, v in out.items()}
    return out


def _ff_eliminate(m: SparseMatrix):
    """Fraction-free forward elimination.

    Rows are scaled to content-free integers; each elimination step is the
    cross-multiplication row' = piv*row - coef*pivrow followed by division
    by the integer content, so no rational arithmetic occurs inside the
    elimination loop.  Pivots: leftmost column first, then the entry of
    smallest bit length, then lowest row index (deterministic bases).
    Returns (pivot list [(col, row_dict)], rank).
    """
    active = [_clear_denominators(r) for r in m.row_dicts()]
    active = [r for r in active if r]
    pivots: list[tuple[int, dict[int, int]]] = []
    while active:
        best = None
        for idx, row in enumerate(active):
            c = min(row)
            key = (c, int(abs(row[c])).bit_length(), idx)
            if best is None or key < best[0]:
                best = (key, idx)
        pc = best[0][0]
        prow = active.pop(best[1])
        pval = prow[pc]
        nxt = []
        for row in active:
            cv = row.get(pc)
            if cv is None:
                nxt.append(row)
                continue
            new = {}
            g = 0
            for c in set(row) | set(prow):
                val = pval * row.get(c, 0) - cv * prow.get(c, 0)
                if val:
                    new[c] = val
                    g = math.gcd(g, val)
            if new:
                if g > 1:
                    new = {c: v // g for c, v in new.items()}
                nxt.append(new)
        active = nxt
        pivots.append((pc, prow))
    pivots.sort(key=lambda t: t[0])
    return pivots, len(pivots)


def rank_kernel(m: SparseMatrix):
    """Exact rank and a basis of the right kernel of ``m``.

    Kernel vectors are integer, content-free, first nonzero entry positive,
    one per pivot-free column; rank + len(kernel) == cols.
    """
    pivots, rank = _ff_eliminate(m)
    pivot_cols = [pc for pc, _ in pivots]
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(m.cols) if c not in pivot_set]
    kernel = []
    for fc in free_cols:
        x = {fc: ONE}
        # echelon rows sorted by pivot col; solve bottom-up
        for pc, prow in reversed(pivots):
            s = ZERO
            for c, v in prow.items():
                if c != pc and c in x:
                    s += rat(v) * x[c]
            if s != 0:
                x[pc] = -s / rat(prow[pc])
        lcm = 1
        for v in x.values():
            lcm = lcm * v.denominator // math.gcd(lcm, int(v.denominator))
        xi = {c: int(v.numerator) * (lcm // int(v.denominator)) for c, v in x.items()}
        g = 0
        for v in xi.values():
            g = math.gcd(g, v)
        if g > 1:
            xi = {c: v // g for c, v in xi.items()}
        lead = xi[min(xi)]
        if lead < 0:
            xi = {c: -v for c, v in xi.items()}
        kernel.append({c: rat(v) for c, v in sorted(xi.items())})
    return rank, kernel


def rank_dense(m: SparseMatrix) -> int:
    """Naive dense Gaussian elimination over Q (oracle for rank_kernel)."""
    d = m.to_dense()
    rows, cols = m.rows, m.cols
    rank = 0
    for c in range(cols):
        piv = None
        for r in range(rank, rows):
            if d[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        d[rank], d[piv] = d[piv], d[rank]
        pv = d[rank][c]
        for r in range(rows):
            if r != rank and d[r][c] != 0:
                f = d[r][c] / pv
                for cc in range(c, cols):
                    d[r][cc] -= f * d[rank][cc]
        rank += 1
    return rank


class RowReducer:
    """Incremental reduced row echelon form over Q.

    Rows are fed one at a time; the reducer keeps a fully reduced basis of
    the row space keyed by pivot column.  It doubles as the reduction map
    of the quotient ambient/rowspace: ``reduce`` zeroes every pivot
    coordinate, so the pivot-free columns parametrize the quotient.
    """

    def __init__(self, cols: int):
        self.cols = cols
        self.pivots: dict[int, dict[int, Rat]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict[int, Rat]) -> dict[int, Rat]:
        row = {c: rat(v) for c, v in row.items() if v != 0}
        for pc in sorted(set(row) & set(self.pivots)):
            cv = row.get(pc)
            if not cv:
                continue
            prow = self.pivots[pc]
            for c, v in prow.items():
                nv = row.get(c, ZERO) - cv * v
                if nv == 0:
                    row.pop(c, None)
                else:
                    row[c] = nv
        return row

    def add_row(self, row: dict[int, Rat]):
        """Reduce ``row`` against the basis; insert the remainder if nonzero.

        Returns the new pivot column, or None when the row was dependent.
        """
        row = self.reduce(row)
        if not row:
            return None
        pc = min(row)
        pv = row[pc]
        row = {c: v / pv for c, v in row.items()}
        # keep the basis fully reduced
        for qc, qrow in self.pivots.items():
            cv = qrow.get(pc)
            if cv:
                for c, v in row.items():
                    nv = qrow.get(c, ZERO) - cv * v
                    if nv == 0:
                        qrow.pop(c, None)
                    else:
                        qrow[c] = nv
        self.pivots[pc] = row
        return pc

    def pivot_cols(self) -> list[int]:
        return sorted(self.pivots)

    def free_cols(self) -> list[int]:
        return [c for c in range(self.cols) if c not in self.pivots]

    def kernel_basis(self) -> list[dict[int, Rat]]:
        """Right-kernel basis of the matrix whose rows were added."""
        out = []
        for fc in self.free_cols():
            x = {fc: ONE}
            for pc in sorted(self.pivots):
                v = self.pivots[pc].get(fc)
                if v:
                    x[pc] = -v
            out.append(dict(sorted(x.items())))
        return out


class QuotientBasis:
    """Quotient of an ambient Q-vector space by the row span of relations.

    Pivot-free columns index the quotient basis; ``reduce`` maps a vector
    to its canonical representative (zero at every pivot column) and is an
    idempotent projection.
    """

    def __init__(self, reducer: RowReducer):
        self._red = reducer
        self.ambient_dim = reducer.cols
        self.relation_rank = reducer.rank
        self.pivot_columns = reducer.pivot_cols()
        self.free_columns = reducer.free_cols()

    @property
    def dimension(self) -> int:
        return self.ambient_dim - self.relation_rank

    def reduce(self, vec: dict[int, Rat]) -> dict[int, Rat]:
        return self._red.reduce(vec)

    def coords(self, vec: dict[int, Rat]) -> dict[int, Rat]:
        """Coordinates of the class of ``vec`` on the free-column basis."""
        red = self.reduce(vec)
        assert all(c not in self._red.pivots for c in red)
        return red


def quotient_basis(relations: SparseMatrix) -> QuotientBasis:
    red = RowReducer(relations.cols)
    for row in relations.row_dicts():
        red.add_row(row)
    return QuotientBasis(red)
