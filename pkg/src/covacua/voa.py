"""The chiral algebra structure on the vacuum module V = L(c,0).

Modes J_n(v) of arbitrary states act on every module through the
associativity-formula recursion, peeling one T(-k) factor at a time; the
j-sums are truncated at bounds forced by the grading, so every mode
application is exact.  On top of that sit the axiom verifiers, the theta
involution and contragredient modules, C_n spaces, fermionic spanning
sets, the current Lie algebra bracket, and exact two-point matrix
elements.
"""
from __future__ import annotations

import math
import random

from .exact import Rat, rat, rat_str, binomial, ZERO, ONE, RowReducer
from .polynomials import MPoly
from .virasoro import (
    minimal_c, minimal_h, minimal_labels, canonical_rs,
    SimpleQuotient, VermaModule, vec_add, vec_scale, _acc,
)


def state_weight(state: dict) -> int:
    """Weight of a homogeneous state; raises on mixed weights."""
    if not state:
        return 0
    ws = {sum(mu) for mu in state}
    if len(ws) != 1:
        raise ValueError(f"state not homogeneous: weights {sorted(ws)}")
    return ws.pop()


def vec_depths(vec: dict) -> set[int]:
    return {sum(k) for k in vec}


class ModuleHandle:
    """Common interface for modules entering block computations."""

    model: "MinimalModel"
    h: Rat
    dual: bool

    def dim(self, depth: int) -> int:
        raise NotImplementedError

    def basis(self, depth: int) -> tuple:
        raise NotImplementedError

    def apply_T(self, n: int, vec: dict) -> dict:
        raise NotImplementedError

    def apply_state(self, state: dict, n: int, vec: dict) -> dict:
        raise NotImplementedError


class ModeRecursion:
    """Modes J_m(v) through the associativity formula with v1 = T.

    Peels the leading T(-k) of the state monomial; the two j-sums stop at
    bounds forced by the grading of the target vector.  ``reduce_state``
    rewrites the peeled tail (the identity on free engines, the
    simple-quotient reduction on L(c,0)-reduced ones).
    """

    def __init__(self, apply_T, reduce_state):
        self._apply_T = apply_T
        self._reduce_state = reduce_state
        self._memo: dict[tuple, dict] = {}

    def apply_state(self, state: dict, n: int, vec: dict) -> dict:
        out = {}
        for mu, cv in state.items():
            for key, kv in vec.items():
                _acc(out, self._mono_basis(mu, n, key), cv * kv)
        return {k: v for k, v in out.items() if v != 0}

    def _mono_basis(self, mu: tuple, m: int, key: tuple) -> dict:
        memo_key = (mu, m, key)
        hit = self._memo.get(memo_key)
        if hit is not None:
            return hit
        vec = {key: ONE}
        if not mu:
            res = vec if m == 0 else {}
        else:
            k = mu[0]
            v2 = self._reduce_state({mu[1:]: ONE})
            d = sum(key)
            out: dict = {}
            sign_k = -1 if k % 2 else 1
            for j in range(0, max(d - m - k, -1) + 1):
                coef = (1 if j % 2 == 0 else -1) * binomial(1 - k, j)
                if coef == 0:
                    continue
                inner = self.apply_state(v2, m + k + j, vec)
                if inner:
                    _acc(out, self._apply_T(-(k + j), inner), coef)
            for j in range(0, d + 2):
                coef = (1 if j % 2 == 0 else -1) * binomial(1 - k, j) * sign_k
                if coef == 0:
                    continue
                tv = self._apply_T(j - 1, vec)
                if tv:
                    _acc(out, self.apply_state(v2, m + 1 - j, tv), coef)
            res = {kk: vv for kk, vv in out.items() if vv != 0}
        self._memo[memo_key] = res
        return res


class SimpleHandle(ModuleHandle):
    """Simple module L(c,h) with mode actions of arbitrary vacuum states."""

    def __init__(self, model: "MinimalModel", rs: tuple[int, int]):
        self.model = model
        self.rs = rs
        self.h = minimal_h(model.p, model.q, *rs)
        self.dual = False
        self.sq = model.vacuum if self.h == 0 else SimpleQuotient(model.c, self.h)
        self._rec = ModeRecursion(self.apply_T, model.reduce_state)

    def __repr__(self):
        return f"L({self.model.p},{self.model.q};{self.rs[0]},{self.rs[1]})"

    def dim(self, depth):
        return self.sq.dim(depth)

    def basis(self, depth):
        return self.sq.basis(depth)

    def apply_T(self, n, vec):
        return self.sq.act(n, vec)

    def apply_state(self, state, n, vec):
        return self._rec.apply_state(state, n, vec)


class FreeModeEngine:
    """Null-field modes on a raw Verma module: no simple-quotient reduction.

    States are ambient vacuum monomials (parts >= 2); this defines the
    operators whose images present the induced module inside the Verma.
    """

    def __init__(self, verma: VermaModule):
        self.verma = verma
        self._rec = ModeRecursion(verma.act, lambda st: st)

    def apply_state(self, state: dict, n: int, vec: dict) -> dict:
        return self._rec.apply_state(state, n, vec)


class DualHandle(ModuleHandle):
    """Contragredient module D(M): <J_n(v) phi, m> = <phi, theta(J_n(v)) m>.

    Vectors are coordinates on the dual basis of the underlying simple
    module; the basis keys at each depth are shared with M.
    """

    def __init__(self, base: SimpleHandle):
        self.base = base
        self.model = base.model
        self.h = base.h
        self.dual = True

    def __repr__(self):
        return f"D({self.base!r})"

    def dim(self, depth):
        return self.base.dim(depth)

    def basis(self, depth):
        return self.base.basis(depth)

    def apply_T(self, n, vec):
        # theta(T(n)) = T(-n) exactly (T(1)T = 0)
        return self._transpose_apply([({(2,): ONE}, -n, ONE)], n, vec)

    def apply_state(self, state, n, vec):
        return self._transpose_apply(self.model.theta_terms(state, n), n, vec)

    def _transpose_apply(self, terms, n, vec):
        out = {}
        for d in sorted(vec_depths(vec)):
            phi = {k: v for k, v in vec.items() if sum(k) == d}
            if d - n < 0:
                continue
            for x in self.base.basis(d - n):
                img = {}
                for st, mode, coef in terms:
                    _acc(img, self.base.apply_state(st, mode, {x: ONE}), coef)
                val = sum((phi[k] * img.get(k, ZERO) for k in phi), ZERO)
                if val != 0:
                    out[x] = out.get(x, ZERO) + val
        return {k: v for k, v in out.items() if v != 0}

    def pair(self, phi: dict, m: dict) -> Rat:
        return sum((phi[k] * m.get(k, ZERO) for k in phi), ZERO)


class MinimalModel:
    """The minimal Virasoro chiral algebra V = L(c_{p,q}, 0) and its modules."""

    def __init__(self, p: int, q: int):
        self.p, self.q = p, q
        self.c = minimal_c(p, q)
        self.vacuum = SimpleQuotient(self.c, 0, vacuum=True)
        self._handles: dict = {}
        self._theta_memo: dict = {}

    def __repr__(self):
        return f"MinimalModel({self.p},{self.q})"

    # -- modules ------------------------------------------------------------

    def labels(self) -> list[tuple[int, int]]:
        return minimal_labels(self.p, self.q)

    def module(self, r: int, s: int) -> SimpleHandle:
        rs = canonical_rs(self.p, self.q, r, s)
        key = ("L", rs)
        if key not in self._handles:
            self._handles[key] = SimpleHandle(self, rs)
        return self._handles[key]

    def dual_module(self, r: int, s: int) -> DualHandle:
        rs = canonical_rs(self.p, self.q, r, s)
        key = ("D", rs)
        if key not in self._handles:
            self._handles[key] = DualHandle(self.module(*rs))
        return self._handles[key]

    def vacuum_module(self) -> SimpleHandle:
        return self.module(1, 1)

    # -- states of V ---------------------------------------------------------

    def reduce_state(self, vec: dict) -> dict:
        return self.vacuum.reduce(vec)

    def state_basis(self, weight: int) -> tuple:
        return self.vacuum.basis(weight)

    def states_up_to(self, wmax: int, include_vacuum: bool = False) -> list[dict]:
        out = []
        for w in range(0 if include_vacuum else 1, wmax + 1):
            for mu in self.state_basis(w):
                out.append({mu: ONE})
        return out

    def virasoro_state(self) -> dict:
        return {(2,): ONE}

    def random_state(self, weight: int, rng: random.Random) -> dict:
        bas = self.state_basis(weight)
        while True:
            st = {mu: rat(rng.randint(-3, 3)) for mu in bas}
            st = {k: v for k, v in st.items() if v != 0}
            if st or not bas:
                return st

    def state_on_vacuum(self, state: dict, n: int) -> dict:
        """J_n(state) applied inside V itself."""
        return self.vacuum_module().apply_state(state, n, {(): ONE})

    def mode_on_state(self, v1: dict, n: int, v2: dict) -> dict:
        """The state J_n(v1) v2 in V."""
        return self.vacuum_module().apply_state(v1, n, v2)

    # -- theta ---------------------------------------------------------------

    def theta_terms(self, state: dict, n: int):
        """theta(J_n(state)) as a finite list of (state, mode, coeff).

        theta(J_n(v)) = (-1)^Delta sum_j J_{-n}(T(1)^j v) / j! for homogeneous
        v; the sum stops when T(1)^j v vanishes.
        """
        delta = state_weight(state)
        sign = -1 if delta % 2 else 1
        out = []
        cur = dict(state)
        j = 0
        while cur:
            out.append((dict(cur), -n, rat(sign, math.factorial(j))))
            cur = self.vacuum.act(1, cur)
            j += 1
        return out

    def exp_T1(self, state: dict) -> dict:
        """e^{T(1)} applied to a state of V."""
        out = {}
        cur = dict(state)
        j = 0
        while cur:
            _acc(out, cur, rat(1, math.factorial(j)))
            cur = self.vacuum.act(1, cur)
            j += 1
        return {k: v for k, v in out.items() if v != 0}

    def theta_on_probe(self, state: dict, n: int, module: ModuleHandle, vec: dict) -> dict:
        out = {}
        for st, mode, coef in self.theta_terms(state, n):
            _acc(out, module.apply_state(st, mode, vec), coef)
        return {k: v for k, v in out.items() if v != 0}


# ---------------------------------------------------------------------------
# axiom verifiers; each check is an exact identity on the given probe


def _diff(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, ZERO) - v
        if nv == 0:
            out.pop(k, None)
        else:
            out[k] = nv
    return out


def verify_generator_consistency(model: MinimalModel, module: ModuleHandle,
                                 nrange, depth: int) -> bool:
    """mode_action(J_n(T)) must agree with the native Virasoro action."""
    T = model.virasoro_state()
    for n in nrange:
        for d in range(depth + 1):
            for key in module.basis(d):
                vec = {key: ONE}
                if module.apply_state(T, n, vec) != module.apply_T(n, vec):
                    return False
    return True


def verify_creation(model: MinimalModel, state: dict) -> bool:
    """J_{-Delta}(v)|0> = v and J_n(v)|0> = 0 for n > -Delta."""
    delta = state_weight(state)
    if model.state_on_vacuum(state, -delta) != model.reduce_state(state):
        return False
    for n in range(-delta + 1, delta + 2):
        if model.state_on_vacuum(state, n) != {}:
            return False
    return True


def verify_commutator(model: MinimalModel, v1: dict, v2: dict, m: int, n: int,
                      module: ModuleHandle, probe: dict) -> bool:
    d1, d2 = state_weight(v1), state_weight(v2)
    lhs = _diff(module.apply_state(v1, m, module.apply_state(v2, n, probe)),
                module.apply_state(v2, n, module.apply_state(v1, m, probe)))
    rhs: dict = {}
    for j in range(d1 + d2):
        coef = binomial(m + d1 - 1, j)
        if coef == 0:
            continue
        w = model.mode_on_state(v1, j - d1 + 1, v2)
        if w:
            _acc(rhs, module.apply_state(w, m + n, probe), coef)
    rhs = {k: v for k, v in rhs.items() if v != 0}
    return lhs == rhs


def verify_associativity(model: MinimalModel, v1: dict, v2: dict, m: int, n: int,
                         module: ModuleHandle, probe: dict) -> bool:
    """Def (f): mode of J_n(v1)v2 versus the normal-ordered double sum."""
    d1 = state_weight(v1)
    w = model.mode_on_state(v1, n, v2)
    lhs = module.apply_state(w, m, probe) if w else {}
    dmax = max(vec_depths(probe), default=0)
    rhs: dict = {}
    sgn = -1 if (n + d1 - 1) % 2 else 1
    for j in range(0, max(dmax - m + n, -1) + 1):
        coef = (1 if j % 2 == 0 else -1) * binomial(n + d1 - 1, j)
        if coef == 0:
            continue
        inner = module.apply_state(v2, m - n + j, probe)
        if inner:
            _acc(rhs, module.apply_state(v1, n - j, inner), coef)
    for j in range(0, dmax + d1):
        coef = (1 if j % 2 == 0 else -1) * binomial(n + d1 - 1, j) * (-sgn)
        if coef == 0:
            continue
        inner = module.apply_state(v1, j - d1 + 1, probe)
        if inner:
            _acc(rhs, module.apply_state(v2, m + d1 - j - 1, inner), coef)
    rhs = {k: v for k, v in rhs.items() if v != 0}
    return lhs == rhs


def verify_skew_symmetry(model: MinimalModel, v1: dict, v2: dict, n: int) -> bool:
    d1, d2 = state_weight(v1), state_weight(v2)
    lhs = model.mode_on_state(v1, n, v2)
    rhs: dict = {}
    for j in range(0, max(d2 - n, -1) + 1):
        w = model.mode_on_state(v2, n + d1 - d2 + j, v1)
        if not w:
            continue
        for _ in range(j):
            w = model.vacuum.act(-1, w)
        sign = -1 if (n + d1 + j) % 2 else 1
        _acc(rhs, w, rat(sign, math.factorial(j)))
    rhs = {k: v for k, v in rhs.items() if v != 0}
    return lhs == rhs


def verify_weight_shift(model: MinimalModel, v: dict, n: int,
                        module: ModuleHandle, probe: dict) -> bool:
    """Def (d): J_n(T(-1)v) = -(n+Delta) J_n(v)."""
    delta = state_weight(v)
    tv = model.vacuum.act(-1, v)
    lhs = module.apply_state(tv, n, probe) if tv else {}
    rhs = vec_scale(module.apply_state(v, n, probe), -(n + delta))
    return lhs == {k: v2 for k, v2 in rhs.items() if v2 != 0}


def verify_derivation(model: MinimalModel, v: dict, n: int,
                      module: ModuleHandle, probe: dict) -> bool:
    """[T(-1), J_n(v)] = -(n+Delta-1) J_{n-1}(v)."""
    delta = state_weight(v)
    lhs = _diff(module.apply_T(-1, module.apply_state(v, n, probe)),
                module.apply_state(v, n, module.apply_T(-1, probe)))
    rhs = vec_scale(module.apply_state(v, n - 1, probe), -(n + delta - 1))
    return lhs == {k: v2 for k, v2 in rhs.items() if v2 != 0}


def verify_theta_involution(model: MinimalModel, v: dict, n: int,
                            module: ModuleHandle, probe: dict) -> bool:
    """theta^2 = id evaluated on a module probe."""
    once = model.theta_terms(v, n)
    twice = []
    for st, mode, coef in once:
        for st2, mode2, coef2 in model.theta_terms(st, mode):
            twice.append((st2, mode2, coef * coef2))
    out: dict = {}
    for st, mode, coef in twice:
        _acc(out, module.apply_state(st, mode, probe), coef)
    out = {k: v2 for k, v2 in out.items() if v2 != 0}
    return out == module.apply_state(v, n, probe)


def verify_square_rewrite(model: MinimalModel, v1: dict, v2: dict, m: int,
                          module: ModuleHandle, probe: dict) -> bool:
    """Repetition elimination: the exact identity behind the square lemma.

    For m >= Delta_1:
      J_{-m}(v2)J_{-m}(v1) = J_{-2m}(J_{-Delta1}(v1)v2)
        - sum_{j>=0, j != m-Delta1} J_{-Delta1-j}(v1) J_{-2m+Delta1+j}(v2)
        - sum_{j>=0} J_{-2m+Delta1-j-1}(v2) J_{j-Delta1+1}(v1),
    evaluated exactly on the probe (both j-sums are finite there).
    """
    d1 = state_weight(v1)
    if m < d1:
        raise ValueError("rewrite form requires m >= weight(v1)")
    lhs = module.apply_state(v2, -m, module.apply_state(v1, -m, probe))
    w = model.mode_on_state(v1, -d1, v2)
    rhs = module.apply_state(w, -2 * m, probe) if w else {}
    dmax = max(vec_depths(probe), default=0) + 2 * m + d1
    for j in range(0, dmax + 1):
        if j != m - d1:
            inner = module.apply_state(v2, -2 * m + d1 + j, probe)
            if inner:
                _acc(rhs, vec_scale(module.apply_state(v1, -d1 - j, inner), -1), ONE)
        inner2 = module.apply_state(v1, j - d1 + 1, probe)
        if inner2:
            _acc(rhs, vec_scale(module.apply_state(v2, -2 * m + d1 - j - 1, inner2), -1), ONE)
    rhs = {k: v for k, v in rhs.items() if v != 0}
    return lhs == rhs


# ---------------------------------------------------------------------------
# C_n spaces and fermionic spanning sets


def cn_span_reducers(model: MinimalModel, module: ModuleHandle, n: int, depth: int,
                     state_weight_bound: int | None = None):
    """Row reducers of C_n(M) per depth <= depth."""
    wmax = state_weight_bound if state_weight_bound is not None else depth
    reducers = {}
    for e in range(depth + 1):
        bas = module.basis(e)
        idx = {k: i for i, k in enumerate(bas)}
        red = RowReducer(len(bas))
        for st in model.states_up_to(min(wmax, e), include_vacuum=False):
            delta = state_weight(st)
            for p_ in range(n - 1, e - delta + 1):
                dsrc = e - delta - p_
                if dsrc < 0:
                    continue
                for key in module.basis(dsrc):
                    img = module.apply_state(st, -delta - p_, {key: ONE})
                    if img:
                        red.add_row({idx[k]: v for k, v in img.items()})
        reducers[e] = (red, bas, idx)
    return reducers


def cn_quotient_dims(model: MinimalModel, module: ModuleHandle, n: int,
                     depth: int) -> list[int]:
    """dim of (M/C_n(M)) per depth up to the cutoff."""
    reds = cn_span_reducers(model, module, n, depth)
    return [len(reds[e][1]) - reds[e][0].rank for e in range(depth + 1)]


def cn_quotient_report(model: MinimalModel, module: ModuleHandle, n: int, depth: int):
    dims = cn_quotient_dims(model, module, n, depth)
    total = sum(dims)
    prev = sum(cn_quotient_dims(model, module, n, depth - 1)) if depth >= 1 else None
    return {"per_depth": dims, "total": total,
            "stabilized": prev is not None and dims[depth] == 0 and total == prev}


def c2_complement(model: MinimalModel, wmax: int) -> list[dict]:
    """Greedy graded complement U with V = U + C_2(V) + C|0>."""
    V = model.vacuum_module()
    reds = cn_span_reducers(model, V, 2, wmax)
    out = []
    for w in range(1, wmax + 1):
        red, bas, idx = reds[w]
        for mu in bas:
            if red.add_row({idx[mu]: ONE}) is not None:
                out.append({mu: ONE})
    return out


def fermionic_spanning_set(model: MinimalModel, module: ModuleHandle, depth: int,
                           complement: list[dict] | None = None):
    """Spanning monomials J_{-n1}(v1)...J_{-nr}(vr) w with n1 > ... > nr > 0.

    Returns (descriptions, per-depth spanning flags); spanning is verified
    by exact rank comparison against the graded dimension of the module.
    """
    U = complement if complement is not None else c2_complement(model, depth)
    results = []
    flags = []
    for e in range(depth + 1):
        bas = module.basis(e)
        idx = {k: i for i, k in enumerate(bas)}
        red = RowReducer(len(bas))
        descr = []

        def distinct_seqs(total, cap):
            if total == 0:
                yield ()
                return
            for n1 in range(min(total, cap), 0, -1):
                for rest in distinct_seqs(total - n1, n1 - 1):
                    yield (n1,) + rest

        for seq in distinct_seqs(e, e):
            def assign(i, vec, chosen):
                if not vec:
                    return
                if i == len(seq):
                    if red.add_row({idx[k]: v for k, v in vec.items()}) is not None:
                        descr.append((seq, chosen[::-1]))
                    return
                for si, v in enumerate(U):
                    img = module.apply_state(v, -seq[len(seq) - 1 - i], vec)
                    assign(i + 1, img, chosen + (si,))
            assign(0, {k: ONE for k in module.basis(0)}, ())
        flags.append(red.rank == len(bas))
        results.append(descr)
    return results, flags


# ---------------------------------------------------------------------------
# current Lie algebra g(V)


class LaurentPoly:
    """Laurent polynomial in one variable: dict power -> coefficient."""

    @staticmethod
    def deriv(f: dict) -> dict:
        return {j - 1: v * j for j, v in f.items() if j != 0 and v * j != 0}

    @staticmethod
    def mul(f: dict, g: dict) -> dict:
        out: dict = {}
        for a, x in f.items():
            for b, y in g.items():
                k = a + b
                nv = out.get(k, ZERO) + x * y
                if nv == 0:
                    out.pop(k, None)
                else:
                    out[k] = nv
        return out


class CurrentAlgebra:
    """g(V) with the nabla quotient reduced to a canonical form.

    Elements are dicts {(weight, monomial): laurent dict} plus a scalar
    'residue' slot for the weight-zero generator J(|0>, xi^-1).  States
    are rewritten so no T(-1)-leading components remain.
    """

    def __init__(self, model: MinimalModel, max_weight: int = 10):
        self.model = model
        self.max_weight = max_weight
        self._split_cache: dict[int, tuple] = {}

    def _splitter(self, weight: int):
        """Augmented reducer decomposing V_w = complement + T(-1) V_{w-1}."""
        if weight in self._split_cache:
            return self._split_cache[weight]
        V = self.model.vacuum
        bas = V.basis(weight)
        idx = {mu: i for i, mu in enumerate(bas)}
        low = V.basis(weight - 1) if weight >= 1 else ()
        ncols = len(bas) + len(low)
        red = RowReducer(ncols)
        for i, x in enumerate(low):
            img = V.act(-1, {x: ONE})
            row = {idx[k]: v for k, v in img.items()}
            row[len(bas) + i] = ONE
            red.add_row(row)
        comp = []
        for mu in bas:
            trial = red.reduce({idx[mu]: ONE})
            if any(c < len(bas) for c in trial):
                comp.append(mu)
        self._split_cache[weight] = (red, bas, idx, low, comp)
        return self._split_cache[weight]

    def split(self, state: dict):
        """state = u + T(-1) w with u supported on the chosen complement."""
        w_ = state_weight(state)
        red, bas, idx, low, comp = self._splitter(w_)
        row = {idx[mu]: v for mu, v in state.items()}
        r = red.reduce(row)
        u = {bas[c]: v for c, v in r.items() if c < len(bas)}
        wpart = {low[c - len(bas)]: -v for c, v in r.items() if c >= len(bas)}
        return u, wpart

    def canonical(self, terms) -> dict:
        """Canonical form of sum J(v_i, f_i); keys (weight, mono) + 'res'."""
        res = ZERO
        work = [(dict(st), dict(f)) for st, f in terms]
        out: dict = {}
        while work:
            st, f = work.pop()
            st = self.model.reduce_state(st)
            if not st or not f:
                continue
            by_w: dict[int, dict] = {}
            for mu, v in st.items():
                by_w.setdefault(sum(mu), {})[mu] = v
            for w_, piece in by_w.items():
                if w_ == 0:
                    res += piece.get((), ZERO) * f.get(-1, ZERO)
                    continue
                u, lower = self.split(piece)
                for mu, v in u.items():
                    key = (w_, mu)
                    cur = out.setdefault(key, {})
                    for j, fv in f.items():
                        nv = cur.get(j, ZERO) + v * fv
                        if nv == 0:
                            cur.pop(j, None)
                        else:
                            cur[j] = nv
                if lower:
                    df = LaurentPoly.deriv(f)
                    if df:
                        work.append((vec_scale(lower, -1), df))
        out = {k: {j: v for j, v in f.items() if v != 0} for k, f in out.items()}
        out = {k: f for k, f in out.items() if f}
        if res != 0:
            out["res"] = res
        return out

    def element(self, state: dict, f: dict) -> dict:
        return self.canonical([(state, f)])

    def mode_element(self, state: dict, n: int) -> dict:
        """J_n(v) = J(v, xi^{n+Delta-1})."""
        return self.element(state, {n + state_weight(state) - 1: ONE})

    def bracket(self, a: dict, b: dict) -> dict:
        terms = []
        for ka, fa in a.items():
            for kb, fb in b.items():
                if ka == "res" or kb == "res":
                    continue  # central-free: J(|0>,xi^-1) brackets to zero
                w1, mu1 = ka
                w2, mu2 = kb
                f1 = dict(fa)
                for m in range(w1 + w2):
                    st = self.model.mode_on_state({mu1: ONE}, m - w1 + 1, {mu2: ONE})
                    if st:
                        prod = LaurentPoly.mul(f1, fb)
                        if prod:
                            terms.append((vec_scale(st, rat(1, math.factorial(m))), prod))
                    f1 = LaurentPoly.deriv(f1)
                    if not f1:
                        break
        return self.canonical(terms)

    @staticmethod
    def add(a: dict, b: dict, s=1) -> dict:
        out = {k: dict(v) if isinstance(v, dict) else v for k, v in a.items()}
        for k, v in b.items():
            if k == "res":
                nv = out.get("res", ZERO) + v * s
                if nv == 0:
                    out.pop("res", None)
                else:
                    out["res"] = nv
                continue
            cur = out.setdefault(k, {})
            for j, x in v.items():
                nv = cur.get(j, ZERO) + x * s
                if nv == 0:
                    cur.pop(j, None)
                else:
                    cur[j] = nv
            if not cur:
                out.pop(k)
        return out

    def apply(self, elem: dict, module: ModuleHandle, vec: dict) -> dict:
        out = {}
        dmax = max(vec_depths(vec), default=0)
        for key, f in elem.items():
            if key == "res":
                _acc(out, vec, f)
                continue
            w_, mu = key
            for j, fv in f.items():
                n = j - w_ + 1
                if n > dmax:
                    continue
                _acc(out, module.apply_state({mu: ONE}, n, vec), fv)
        return {k: v for k, v in out.items() if v != 0}


# ---------------------------------------------------------------------------
# exact two-point matrix elements <phi| J(v1,z1) J(v2,z2) |u>


class TwoPointElement:
    """Rational two-point function as (z1-z2)-singular part plus Laurent data.

    terms_sing: {(j, p2): coeff} meaning coeff * (z1-z2)^{-j-1} * z2^{p2};
    terms_lau:  {(p1, p2): coeff} meaning coeff * z1^{p1} * z2^{p2}.
    """

    def __init__(self):
        self.sing: dict[tuple[int, int], Rat] = {}
        self.lau: dict[tuple[int, int], Rat] = {}

    def add_sing(self, j, p2, v):
        k = (j, p2)
        nv = self.sing.get(k, ZERO) + v
        if nv == 0:
            self.sing.pop(k, None)
        else:
            self.sing[k] = nv

    def add_lau(self, p1, p2, v):
        k = (p1, p2)
        nv = self.lau.get(k, ZERO) + v
        if nv == 0:
            self.lau.pop(k, None)
        else:
            self.lau[k] = nv

    def normalized(self):
        """Return (numerator MPoly in (z1,z2), jmax, a, b) clearing
        (z1-z2)^{jmax+1} z1^a z2^b."""
        jmax = max((j for j, _ in self.sing), default=-1)
        a = max(0, -min((p1 for p1, _ in self.lau), default=0))
        ps = [p2 for _, p2 in self.sing] + [p2 for _, p2 in self.lau]
        b = max(0, -min(ps, default=0))
        z1 = MPoly.var(2, 0)
        z2 = MPoly.var(2, 1)
        diff = z1 - z2
        num = MPoly(2)
        for (j, p2), v in self.sing.items():
            t = MPoly.const(2, v)
            for _ in range(jmax - j):
                t = t * diff
            num = num + t * MPoly.var(2, 0, a) * MPoly.var(2, 1, p2 + b)
        for (p1, p2), v in self.lau.items():
            t = MPoly.const(2, v)
            for _ in range(jmax + 1):
                t = t * diff
            num = num + t * MPoly.var(2, 0, p1 + a) * MPoly.var(2, 1, p2 + b)
        return num, jmax, a, b

    def equals(self, other: "TwoPointElement") -> bool:
        n1, j1, a1, b1 = self.normalized()
        n2, j2, a2, b2 = other.normalized()
        z1 = MPoly.var(2, 0)
        z2 = MPoly.var(2, 1)
        diff = z1 - z2
        def lift(num, dj, da, db):
            t = num
            for _ in range(dj):
                t = t * diff
            return t * MPoly.var(2, 0, da) * MPoly.var(2, 1, db)
        J = max(j1, j2)
        A = max(a1, a2)
        B = max(b1, b2)
        return lift(n1, J - j1, A - a1, B - b1) == lift(n2, J - j2, A - a2, B - b2)

    def laurent_in_diff(self, order: int, model, sign_swap=False):
        """Coefficients of (z1-z2)^n for -jmax-1 <= n <= order, as dicts
        {z2 power: coeff}; expands z1^p1 = ((z1-z2)+z2)^p1 (p1 >= 0 only)."""
        out: dict[int, dict[int, Rat]] = {}
        for (j, p2), v in self.sing.items():
            out.setdefault(-j - 1, {})
            out[-j - 1][p2] = out[-j - 1].get(p2, ZERO) + v
        for (p1, p2), v in self.lau.items():
            top = min(p1, order) if p1 >= 0 else order
            for n in range(0, top + 1):
                co = binomial(p1, n)
                if co == 0:
                    continue
                d = out.setdefault(n, {})
                key = p2 + p1 - n
                d[key] = d.get(key, ZERO) + v * co
        return out


def matrix_element_2pt(model: MinimalModel, phi_dual: dict, v1: dict, v2: dict,
                       u: dict, module: SimpleHandle) -> TwoPointElement:
    """<phi|J(v1,z1)J(v2,z2)|u> with phi a graded functional on ``module``.

    Assembled from the commutator part (rational in z1-z2) plus the two
    Laurent-polynomial parts; no series truncation occurs.
    """
    d1, d2 = state_weight(v1), state_weight(v2)
    e = state_weight_of_keys(phi_dual)
    d = state_weight_of_keys(u)
    dual = DualHandle(module) if not isinstance(module, DualHandle) else None
    out = TwoPointElement()

    def pair(phi, vec):
        return sum((phi[k] * vec.get(k, ZERO) for k in phi), ZERO)

    # commutator part: sum_j <phi|J(J_{j-d1+1}(v1)v2, z2)|u> (z1-z2)^{-j-1}
    for j in range(d1 + d2):
        w = model.mode_on_state(v1, j - d1 + 1, v2)
        if not w:
            continue
        wt = state_weight(w)
        m = d - e
        val = pair(phi_dual, module.apply_state(w, m, u))
        if val != 0:
            out.add_sing(j, -m - wt, val)
    # <phi|J(v2,z2) J^{>0}(v1,z1)|u>
    for n in range(-d1 + 1, d + 1):
        x = module.apply_state(v1, n, u)
        if not x:
            continue
        m = (d - n) - e
        val = pair(phi_dual, module.apply_state(v2, m, x))
        if val != 0:
            out.add_lau(-n - d1, -m - d2, val)
    # <phi|J^{<=0}(v1,z1) J(v2,z2)|u>
    for n in range(-e, -d1 + 1):
        m = d - n - e
        x = module.apply_state(v2, m, u)
        if not x:
            continue
        val = pair(phi_dual, module.apply_state(v1, n, x))
        if val != 0:
            out.add_lau(-n - d1, -m - d2, val)
    return out


def ope_element(model: MinimalModel, phi_dual: dict, v1: dict, v2: dict,
                u: dict, module: SimpleHandle, taylor_orders: int):
    """Laurent data of <phi|J(J(v1,z1-z2)v2, z2)|u> in powers of z1-z2.

    Returns {power of (z1-z2): {z2 power: coeff}} for powers up to
    ``taylor_orders`` above the most singular one.
    """
    d1, d2 = state_weight(v1), state_weight(v2)
    e = state_weight_of_keys(phi_dual)
    d = state_weight_of_keys(u)
    out: dict[int, dict[int, Rat]] = {}

    def pair(phi, vec):
        return sum((phi[k] * vec.get(k, ZERO) for k in phi), ZERO)

    nmin = -(taylor_orders + d1)
    for n in range(d2, nmin - 1, -1):
        w = model.mode_on_state(v1, n, v2)
        if not w:
            continue
        wt = state_weight(w)
        m = d - e
        val = pair(phi_dual, module.apply_state(w, m, u))
        if val != 0:
            out.setdefault(-n - d1, {})[-m - wt] = val
    return out


def state_weight_of_keys(vec: dict) -> int:
    ws = {sum(k) for k in vec}
    if len(ws) > 1:
        raise ValueError("vector not homogeneous")
    return ws.pop() if ws else 0


def apply_mode_truncated(module: ModuleHandle, state: dict, n: int, vec: dict,
                         cutoff: int):
    """J_n(state) vec with components above the depth cutoff discarded.

    The action is computed exactly first, so the overflow flag is precise:
    it is set iff truncation actually discarded data (possible only for
    depth-raising modes).
    """
    full = module.apply_state(state, n, vec)
    kept = {k: v for k, v in full.items() if sum(k) <= cutoff}
    return kept, len(kept) != len(full)


def state_text(state: dict) -> str:
    """States as '(partition):rational' pairs, vacuum monomial as '()'."""
    bits = []
    for mu in sorted(state, key=lambda m: (sum(m), m), reverse=True):
        part = ",".join(map(str, mu))
        bits.append(f"({part}):{rat_str(state[mu])}")
    return " ".join(bits) if bits else "0"


def parse_state(text: str) -> dict:
    text = text.strip()
    if text == "0":
        return {}
    out = {}
    for tok in text.split():
        part, _, coeff = tok.rpartition(":")
        if not (part.startswith("(") and part.endswith(")")):
            raise ValueError(f"bad state token {tok!r}")
        inner = part[1:-1]
        mu = tuple(int(x) for x in inner.split(",")) if inner else ()
        out[mu] = rat(coeff)
    return {k: v for k, v in out.items() if v != 0}
