"""Zhu's algebra A_z(V) = V/O(V), the zero-mode algebra, and the
regularity condition report.

A_z(V) is computed as the quotient of the weight-filtered vacuum module by
the span of all circle products v1 o v2 together with (T(-1)+T(0))v, cut
off at a working depth; the presentation is in powers of x = [T].  The
zero-mode algebra is materialized through the o-map image, so zero-mode
products are checked against the star product under o.
"""
from __future__ import annotations

import math

from .exact import Rat, rat, rat_str, binomial, ZERO, ONE, RowReducer
from .polynomials import Poly
from .virasoro import minimal_h, minimal_labels, VermaModule, vec_scale, _acc
from .voa import (
    MinimalModel, FreeModeEngine, state_weight, cn_quotient_report,
)


def zhu_circ(model: MinimalModel, v1: dict, v2: dict) -> dict:
    """v1 o v2 = sum_{n=0}^{Delta1} C(Delta1,n) J_{-n-1}(v1) v2."""
    d1 = state_weight(v1)
    out: dict = {}
    for n in range(0, d1 + 1):
        _acc(out, model.mode_on_state(v1, -n - 1, v2), binomial(d1, n))
    return {k: v for k, v in out.items() if v != 0}


def zhu_star(model: MinimalModel, v1: dict, v2: dict) -> dict:
    """v1 * v2 = sum_{n=0}^{Delta1} C(Delta1,n) J_{-n}(v1) v2."""
    d1 = state_weight(v1)
    out: dict = {}
    for n in range(0, d1 + 1):
        _acc(out, model.mode_on_state(v1, -n, v2), binomial(d1, n))
    return {k: v for k, v in out.items() if v != 0}


def star_mixed(model: MinimalModel, v1: dict, v2: dict) -> dict:
    """v1 * v2 with v1 of mixed weight (bilinear extension)."""
    by_w: dict[int, dict] = {}
    for mu, c in v1.items():
        by_w.setdefault(sum(mu), {})[mu] = c
    out: dict = {}
    for piece in by_w.values():
        _acc(out, zhu_star(model, piece, v2))
    return {k: v for k, v in out.items() if v != 0}


def circ_general(model: MinimalModel, v1: dict, v2: dict, m: int, n: int) -> dict:
    """Res J(v1,z) v2 (1+z)^{Delta1+n} / z^{2+m} dz, for m >= n >= 0."""
    d1 = state_weight(v1)
    out: dict = {}
    for k in range(0, d1 + n + 1):
        _acc(out, model.mode_on_state(v1, -k - m - 1, v2), binomial(d1 + n, k))
    return {kk: v for kk, v in out.items() if v != 0}


class ZhuAlgebra:
    """A_z(V) at a working depth, presented in powers of x = [T]."""

    def __init__(self, model: MinimalModel, depth: int):
        self.model = model
        self.depth = depth
        # high weight first: elimination pivots eat deep monomials, so class
        # representatives are supported at low weight and stay star-closed
        self._cols: dict[tuple, int] = {}
        self._monos: list[tuple] = []
        for w in range(depth, -1, -1):
            for mu in model.state_basis(w):
                self._cols[mu] = len(self._monos)
                self._monos.append(mu)
        self._red = RowReducer(len(self._monos))
        self._assemble()
        self.dimension = len(self._monos) - self._red.rank
        self._present()

    def _coords(self, state: dict) -> dict:
        out = {}
        for mu, v in state.items():
            col = self._cols.get(mu)
            if col is None:
                raise ValueError(f"state weight {sum(mu)} beyond working depth")
            out[col] = v
        return out

    def _assemble(self):
        model, d = self.model, self.depth
        # all v1 o v2 with Delta1 + Delta2 + 1 <= d, plus (T(-1)+T(0))v;
        # both families are kept even though one derives from the other
        for w1 in range(2, d):
            for mu1 in model.state_basis(w1):
                v1 = {mu1: ONE}
                for w2 in range(0, d - w1):
                    for mu2 in model.state_basis(w2):
                        out = zhu_circ(model, v1, {mu2: ONE})
                        if out:
                            self._red.add_row(self._coords(out))
        for w in range(0, d):
            for mu in model.state_basis(w):
                vec = model.vacuum.act(-1, {mu: ONE})
                if w:
                    _acc(vec, {mu: rat(w)})
                vec = {k: v for k, v in vec.items() if v != 0}
                if vec:
                    self._red.add_row(self._coords(vec))

    def reduce_class(self, state: dict) -> dict:
        """Canonical representative coordinates of [state]."""
        return self._red.reduce(self._coords(state))

    def class_to_state(self, cls: dict) -> dict:
        return {self._monos[c]: v for c, v in cls.items()}

    def _present(self):
        model = self.model
        T = model.virasoro_state()
        powers = [self.reduce_class({(): ONE})]
        power_states = [{(): ONE}]
        span = RowReducer(len(self._monos))
        span.add_row(dict(powers[0]))
        minpoly = None
        while minpoly is None:
            prev = self.class_to_state(powers[-1])
            nxt_state = star_mixed(model, T, prev)
            nxt = self.reduce_class(nxt_state)
            rem = span.reduce(dict(nxt))
            if not rem:
                # x^k is a combination of lower powers: solve exactly
                k = len(powers)
                solver = RowReducer(len(self._monos) + k)
                for i, pw in enumerate(powers):
                    row = dict(pw)
                    row[len(self._monos) + i] = ONE
                    solver.add_row(row)
                r = solver.reduce(dict(nxt))
                coeffs = [ZERO] * k
                ok = True
                for c, v in r.items():
                    if c < len(self._monos):
                        ok = False
                        break
                    coeffs[c - len(self._monos)] = -v
                assert ok, "inconsistent power dependence"
                minpoly = Poly([-co for co in coeffs] + [ONE])
                break
            span.add_row(dict(nxt))
            powers.append(nxt)
            power_states.append(nxt_state)
        self.generator_min_poly = minpoly
        self.basis_powers = list(range(len(powers)))
        self.power_classes = powers
        self.multiplication_ok = (len(powers) == self.dimension)

    def class_in_powers(self, cls: dict):
        """Coordinates of a class on the x-power basis, or None."""
        solver = RowReducer(len(self._monos) + len(self.power_classes))
        for i, pw in enumerate(self.power_classes):
            row = dict(pw)
            row[len(self._monos) + i] = ONE
            solver.add_row(row)
        r = solver.reduce(dict(cls))
        out = [ZERO] * len(self.power_classes)
        for c, v in r.items():
            if c < len(self._monos):
                return None
            out[c - len(self._monos)] = -v
        return out


def zhu_algebra(model: MinimalModel, depth: int | None = None) -> dict:
    """Presentation of A_z(V) with a stabilization report.

    The default working depth is 2*deg G + 4; stabilization means equal
    dimension at depth-1 and depth and a closed x-power multiplication
    table.
    """
    degG = (model.p - 1) * (model.q - 1) // 2
    d = depth if depth is not None else 2 * degG + 4
    cur = ZhuAlgebra(model, d)
    prev = ZhuAlgebra(model, d - 1)
    stabilized = (cur.dimension == prev.dimension) and cur.multiplication_ok
    expected_roots = sorted(set(minimal_h(model.p, model.q, r, s)
                                for r in range(1, model.p) for s in range(1, model.q)))
    mp = cur.generator_min_poly
    return {
        "algebra": cur,
        "dimension": cur.dimension,
        "min_poly": mp,
        "roots": mp.roots_among(expected_roots),
        "expected_roots": expected_roots,
        "squarefree": mp.is_squarefree(),
        "depth": d,
        "stabilized": stabilized,
    }


def monic_sqrt_from_h_values(p: int, q: int) -> Poly:
    """G_{p,q} as the monic square root of prod (x - h_{r,s}).

    The multiset of h-values over 0<r<p, 0<s<q is a perfect square by the
    (r,s) ~ (p-r,q-s) symmetry; we take one factor per orbit.
    """
    roots = sorted({minimal_h(p, q, r, s) for r in range(1, p) for s in range(1, q)})
    full = sorted(minimal_h(p, q, r, s) for r in range(1, p) for s in range(1, q))
    assert len(full) == 2 * len(roots)
    return Poly.from_roots(roots)


def zero_mode_product(model: MinimalModel, zhu: ZhuAlgebra, v1: dict, v2: dict) -> dict:
    """[J_0(v1)][J_0(v2)] in A_0(V), as an A_z class through the o-map.

    Uses J_0(v1)J_0(v2) = J_0(J_{-Delta1}(v1)v2)
      - sum_{1-Delta1<=j<0} sum_{k=0}^{Delta1+Delta2-1} C(Delta2-j-1,k)
            J_0(J_{k-Delta2+1}(v2)v1)   modulo the zero-mode ideal.
    """
    d1, d2 = state_weight(v1), state_weight(v2)
    acc: dict = {}
    _acc(acc, model.mode_on_state(v1, -d1, v2))
    for j in range(1 - d1, 0):
        for k in range(0, d1 + d2):
            co = binomial(d2 - j - 1, k)
            if co == 0:
                continue
            w = model.mode_on_state(v2, k - d2 + 1, v1)
            if w:
                _acc(acc, w, -co)
    acc = {k: v for k, v in acc.items() if v != 0}
    return zhu.reduce_class(acc)


def theta_zero_mode(model: MinimalModel, zhu: ZhuAlgebra, v: dict) -> dict:
    """theta[J_0(v)] = (-1)^Delta [J_0(e^{T(1)} v)] as an A_z class."""
    out: dict = {}
    by_w: dict[int, dict] = {}
    for mu, c in v.items():
        by_w.setdefault(sum(mu), {})[mu] = c
    for w, piece in by_w.items():
        _acc(out, vec_scale(model.exp_T1(piece), -1 if w % 2 else 1))
    return zhu.reduce_class({k: v2 for k, v2 in out.items() if v2 != 0})


def verify_o_map(model: MinimalModel, zhu: ZhuAlgebra, samples) -> bool:
    """o([v1]*[v2]) = o(v1).o(v2) and o(v1 o v2) = 0 on the given pairs."""
    for v1, v2 in samples:
        if zhu.reduce_class(zhu_circ(model, v1, v2)) != {}:
            return False
        lhs = zhu.reduce_class(zhu_star(model, v1, v2))
        rhs = zero_mode_product(model, zhu, v1, v2)
        if lhs != rhs:
            return False
    return True


# ---------------------------------------------------------------------------
# condition report


def vacuum_radical_states(model: MinimalModel, wmax: int) -> list[dict]:
    """Null states of the vacuum Verma quotient up to the given weight."""
    out = []
    for w in range(2, wmax + 1):
        lv = model.vacuum.level(w)
        for kv in lv.radical_vectors:
            out.append({lv.ambient[i]: v for i, v in kv.items()})
    return out


def induced_module_dims(model: MinimalModel, h, depth: int,
                        radical_weight_bound: int | None = None) -> list[int]:
    """Graded dims of the induced module M(W_h) = Verma / null-field images.

    The relation space is the span of J_n(u) (u a vacuum null state) applied
    to the Verma basis, closed under T(-k) inside the depth window.  The
    result is an upper bound for the true graded dimension at each depth,
    exact whenever the generated span is complete.
    """
    wb = radical_weight_bound if radical_weight_bound is not None else depth + 2
    verma = VermaModule(model.c, h, vacuum=(rat(h) == 0))
    engine = FreeModeEngine(verma)
    radicals = vacuum_radical_states(model, wb)
    reducers = {e: RowReducer(verma.dim(e)) for e in range(depth + 1)}
    index = {e: {mu: i for i, mu in enumerate(verma.basis(e))} for e in range(depth + 1)}

    def add_vec(vec):
        if not vec:
            return
        depths = {sum(k) for k in vec}
        assert len(depths) == 1
        e = depths.pop()
        if e > depth:
            return
        reducers[e].add_row({index[e][k]: v for k, v in vec.items()})

    images = []
    for u in radicals:
        for e in range(depth + 1):
            for key in verma.basis(e):
                for target in range(depth + 1):
                    n = e - target
                    img = engine.apply_state(u, n, {key: ONE})
                    if img:
                        add_vec(img)
                        images.append(img)
    # close under lowering operators inside the window
    frontier = images
    while frontier:
        nxt = []
        for vec in frontier:
            e = sum(next(iter(vec)))
            for k in range(1, depth - e + 1):
                low = verma.act(-k, vec)
                if not low:
                    continue
                ee = e + k
                row = {index[ee][kk]: v for kk, v in low.items()}
                if reducers[ee].add_row(row) is not None:
                    nxt.append(low)
        frontier = nxt
    return [verma.dim(e) - reducers[e].rank for e in range(depth + 1)]


def condition_report(model: MinimalModel, depth: int = 8) -> dict:
    """Conditions I (C_2 finiteness), II (semisimple A_0), III (simple
    induced modules), each checked exactly up to the stated depth."""
    V = model.vacuum_module()
    c2 = cn_quotient_report(model, V, 2, depth)
    za = zhu_algebra(model)
    labels = model.labels()
    induced = {}
    for rs in labels:
        h = minimal_h(model.p, model.q, *rs)
        got = induced_module_dims(model, h, depth)
        want = model.module(*rs).sq.graded_dims(depth)
        induced[rs] = {"simple": got == want, "checked_depth": depth,
                       "dims": got, "simple_dims": want}
    return {
        "c2": c2,
        "condition_I": c2["stabilized"],
        "zhu": za,
        "condition_II": za["squarefree"] and za["stabilized"],
        "induced": induced,
        "condition_III": all(v["simple"] for v in induced.values()),
    }
