import itertools
import random

import pytest

from covacua.exact import rat, ONE, ZERO
from covacua.virasoro import minimal_h
from covacua.voa import (
    MinimalModel, DualHandle, state_weight, verify_generator_consistency,
    verify_creation, verify_commutator, verify_associativity,
    verify_skew_symmetry, verify_weight_shift, verify_derivation,
    verify_theta_involution, verify_square_rewrite,
    cn_quotient_dims, cn_quotient_report, c2_complement,
    fermionic_spanning_set, CurrentAlgebra, matrix_element_2pt, ope_element,
)


LY = MinimalModel(2, 5)
ISING = MinimalModel(3, 4)


def _probes(model, module, depth, rng, count):
    out = []
    for _ in range(count):
        d = rng.randint(0, depth)
        bas = module.basis(d)
        if not bas:
            continue
        vec = {mu: rat(rng.randint(-2, 2)) for mu in bas}
        vec = {k: v for k, v in vec.items() if v != 0}
        if vec:
            out.append(vec)
    return out


def test_generator_consistency():
    V = LY.vacuum_module()
    assert verify_generator_consistency(LY, V, range(-6, 7), 6)
    phi = LY.module(1, 2)
    assert verify_generator_consistency(LY, phi, range(-4, 5), 5)


def test_creation_axiom():
    # J_{-Delta}(v)|0> = v, J_n(v)|0> = 0 for n > -Delta
    for st in LY.states_up_to(6):
        assert verify_creation(LY, st)
    # v = T(-2)T(-2)|0>, Delta = 4
    v = LY.reduce_state({(2, 2): ONE})
    assert LY.state_on_vacuum(v, -4) == v


def test_grading_mode():
    phi = LY.module(1, 2)
    T = LY.virasoro_state()
    for d in range(5):
        for key in phi.basis(d):
            out = phi.apply_state(T, 0, {key: ONE})
            want = {key: phi.h + d} if phi.h + d != 0 else {}
            assert out == want


def test_central_commutator_on_vacuum():
    # [T(2), T(-2)]|0> = (4 T(0) + c/2)|0> = (c/2)|0>
    T = LY.virasoro_state()
    assert verify_commutator(LY, T, T, 2, -2, LY.vacuum_module(), {(): ONE})
    V = LY.vacuum_module()
    lhs = V.apply_state(T, 2, V.apply_state(T, -2, {(): ONE}))
    assert lhs == {(): LY.c / 2}


def test_commutator_random_samples():
    rng = random.Random(7)
    mod = LY.module(1, 2)
    count = 0
    while count < 20:
        w1, w2 = rng.randint(2, 5), rng.randint(2, 5)
        v1, v2 = LY.random_state(w1, rng), LY.random_state(w2, rng)
        if not v1 or not v2:
            continue
        m, n = rng.randint(-3, 3), rng.randint(-3, 3)
        for probe in _probes(LY, mod, 4, rng, 1):
            assert verify_commutator(LY, v1, v2, m, n, mod, probe)
            count += 1


def test_commutator_exhaustive_low_weight():
    mods = [LY.vacuum_module(), LY.module(1, 2)]
    states = LY.states_up_to(3)
    for v1, v2 in itertools.product(states, repeat=2):
        for m, n in [(-2, 1), (0, 0), (1, -1), (2, -2)]:
            for mod in mods:
                for probe in [{k: ONE} for k in mod.basis(2)]:
                    assert verify_commutator(LY, v1, v2, m, n, mod, probe)


def test_associativity_consistency():
    rng = random.Random(13)
    mod = ISING.module(1, 2)
    count = 0
    while count < 15:
        v1 = ISING.random_state(rng.randint(2, 4), rng)
        v2 = ISING.random_state(rng.randint(2, 4), rng)
        if not v1 or not v2:
            continue
        m, n = rng.randint(-3, 3), rng.randint(-3, 3)
        for probe in _probes(ISING, mod, 3, rng, 1):
            assert verify_associativity(ISING, v1, v2, m, n, mod, probe)
            count += 1


def test_skew_symmetry():
    T = LY.virasoro_state()
    assert verify_skew_symmetry(LY, T, T, -2)
    rng = random.Random(3)
    count = 0
    while count < 12:
        v1 = LY.random_state(rng.randint(2, 5), rng)
        v2 = LY.random_state(rng.randint(2, 5), rng)
        if not v1 or not v2:
            continue
        assert verify_skew_symmetry(LY, v1, v2, rng.randint(-3, 3))
        count += 1


def test_weight_shift_and_derivation():
    rng = random.Random(17)
    mod = LY.module(1, 2)
    count = 0
    while count < 12:
        v = LY.random_state(rng.randint(2, 5), rng)
        if not v:
            continue
        n = rng.randint(-3, 3)
        for probe in _probes(LY, mod, 4, rng, 1):
            assert verify_weight_shift(LY, v, n, mod, probe)
            assert verify_derivation(LY, v, n, mod, probe)
            count += 1


def test_theta_on_virasoro_modes():
    # theta(T(n)) = T(-n), forced by T(1)T = 0
    T = LY.virasoro_state()
    for n in range(-3, 4):
        terms = LY.theta_terms(T, n)
        assert len(terms) == 1
        st, mode, coef = terms[0]
        assert st == T and mode == -n and coef == 1


def test_theta_involution_exact():
    rng = random.Random(23)
    mod = LY.module(1, 2)
    count = 0
    while count < 10:
        v = LY.random_state(rng.randint(2, 6), rng)
        if not v:
            continue
        n = rng.randint(-3, 3)
        for probe in _probes(LY, mod, 3, rng, 1):
            assert verify_theta_involution(LY, v, n, mod, probe)
            count += 1


def test_contragredient_pairing_invariance():
    rng = random.Random(29)
    base = LY.module(1, 2)
    dual = LY.dual_module(1, 2)
    count = 0
    while count < 12:
        v = LY.random_state(rng.randint(2, 4), rng)
        if not v:
            continue
        n = rng.randint(-2, 2)
        dphi = rng.randint(0, 3)
        bas = dual.basis(dphi)
        phi = {k: rat(rng.randint(-2, 2)) for k in bas}
        phi = {k: x for k, x in phi.items() if x != 0}
        for m in _probes(LY, base, 4, rng, 1):
            lhs_phi = dual.apply_state(v, n, phi)
            lhs = sum((lhs_phi[k] * m.get(k, ZERO) for k in lhs_phi), ZERO)
            theta_m = LY.theta_on_probe(v, n, base, m)
            rhs = sum((phi[k] * theta_m.get(k, ZERO) for k in phi), ZERO)
            assert lhs == rhs
            count += 1


def test_dual_T0_eigenvalue_and_double_dual_dims():
    for model, rs in [(LY, (1, 2)), (LY, (1, 1)), (ISING, (1, 2)), (ISING, (1, 3))]:
        base = model.module(*rs)
        dual = model.dual_module(*rs)
        dd = DualHandle(dual)
        for d in range(7):
            assert dual.dim(d) == base.dim(d) == dd.dim(d)
        for d in range(4):
            for key in dual.basis(d):
                out = dual.apply_T(0, {key: ONE})
                want = {key: base.h + d} if base.h + d != 0 else {}
                assert out == want


def test_dual_is_a_module():
    # theta is an anti-homomorphism, which is exactly what makes the
    # commutator formula hold verbatim on the contragredient module.
    rng = random.Random(31)
    dual = LY.dual_module(1, 2)
    count = 0
    while count < 8:
        v1 = LY.random_state(rng.randint(2, 4), rng)
        v2 = LY.random_state(rng.randint(2, 4), rng)
        if not v1 or not v2:
            continue
        m, n = rng.randint(-2, 2), rng.randint(-2, 2)
        for phi in _probes(LY, dual, 4, rng, 1):
            assert verify_commutator(LY, v1, v2, m, n, dual, phi)
            count += 1


def test_square_rewrite_lemma():
    rng = random.Random(37)
    mod = LY.module(1, 2)
    T = LY.virasoro_state()
    for m in (2, 3):
        for probe in _probes(LY, mod, 3, rng, 3):
            assert verify_square_rewrite(LY, T, T, m, mod, probe)


def test_c2_dims_lee_yang():
    V = LY.vacuum_module()
    rep = cn_quotient_report(LY, V, 2, 8)
    assert rep["total"] == 2 and rep["stabilized"]
    phi = LY.module(1, 2)
    per = cn_quotient_dims(LY, phi, 2, 8)
    # C_2 modes are J_{-Delta-p} with p >= 1, so depths 0..2 survive
    assert per == [1, 1, 1, 0, 0, 0, 0, 0, 0]


def test_cn_monotonicity():
    phi = LY.module(1, 2)
    d2 = cn_quotient_dims(LY, phi, 2, 6)
    d3 = cn_quotient_dims(LY, phi, 3, 6)
    d4 = cn_quotient_dims(LY, phi, 4, 6)
    for a, b, c in zip(d2, d3, d4):
        assert a <= b <= c
    # depth-0 vectors are never in C_2
    assert d2[0] >= 1


def test_c2_complement_is_T():
    U = c2_complement(LY, 6)
    assert len(U) == 1 and U[0] == {(2,): ONE}


def test_fermionic_spanning():
    U = c2_complement(LY, 6)
    for mod in [LY.vacuum_module(), LY.module(1, 2)]:
        sets, flags = fermionic_spanning_set(LY, mod, 6, U)
        assert all(flags)
        # mode sequences strictly decreasing
        for descr in sets:
            for seq, _ in descr:
                assert all(a > b for a, b in zip(seq, seq[1:]))


def test_current_bracket_virasoro_relations():
    ca = CurrentAlgebra(LY)
    T = LY.virasoro_state()
    for m, n in [(2, -2), (1, 1), (3, -1), (0, 2), (-2, 2)]:
        a = ca.mode_element(T, m)
        b = ca.mode_element(T, n)
        br = ca.bracket(a, b)
        want = ca.add(ca.canonical([]), ca.mode_element(T, m + n), m - n)
        if m + n == 0:
            cterm = LY.c * (m ** 3 - m) / 12
            want = ca.add(want, {"res": ONE}, cterm)
        assert br == want, (m, n)


def test_current_bracket_antisymmetry_and_jacobi():
    rng = random.Random(41)
    ca = CurrentAlgebra(LY)
    elems = []
    while len(elems) < 3:
        st = LY.random_state(rng.randint(2, 4), rng)
        if not st:
            continue
        f = {rng.randint(-2, 2): rat(rng.randint(-2, 2)) for _ in range(2)}
        f = {k: v for k, v in f.items() if v != 0}
        if f:
            elems.append(ca.element(st, f))
    for x in elems:
        assert ca.bracket(x, x) == {}
    x, y, z = elems
    lhs = ca.bracket(ca.bracket(x, y), z)
    rhs = ca.add(ca.bracket(x, ca.bracket(y, z)),
                 ca.bracket(y, ca.bracket(x, z)), -1)
    assert lhs == rhs


def test_current_bracket_matches_commutator_formula():
    # bracket with f = xi^{m+Delta-1} acts like the mode commutator
    rng = random.Random(43)
    ca = CurrentAlgebra(LY)
    mod = LY.module(1, 2)
    count = 0
    while count < 6:
        v1 = LY.random_state(rng.randint(2, 4), rng)
        v2 = LY.random_state(rng.randint(2, 4), rng)
        if not v1 or not v2:
            continue
        m, n = rng.randint(-2, 2), rng.randint(-2, 2)
        br = ca.bracket(ca.mode_element(v1, m), ca.mode_element(v2, n))
        for probe in _probes(LY, mod, 3, rng, 1):
            via_bracket = ca.apply(br, mod, probe)
            a = mod.apply_state(v1, m, mod.apply_state(v2, n, probe))
            b = mod.apply_state(v2, n, mod.apply_state(v1, m, probe))
            direct = {k: a.get(k, ZERO) - b.get(k, ZERO) for k in set(a) | set(b)}
            direct = {k: v for k, v in direct.items() if v != 0}
            assert via_bracket == direct
            count += 1


def test_matrix_element_TT_vacuum():
    V = LY.vacuum_module()
    phi = {(): ONE}
    T = LY.virasoro_state()
    el = matrix_element_2pt(LY, phi, T, T, {(): ONE}, V)
    assert el.lau == {}
    assert el.sing == {(3, 0): LY.c / 2}


def test_matrix_element_s2_symmetry():
    rng = random.Random(47)
    mod = LY.module(1, 2)
    count = 0
    while count < 10:
        v1 = LY.random_state(rng.randint(2, 4), rng)
        v2 = LY.random_state(rng.randint(2, 4), rng)
        if not v1 or not v2:
            continue
        du = rng.randint(0, 2)
        de = rng.randint(0, 2)
        ub = mod.basis(du)
        eb = mod.basis(de)
        if not ub or not eb:
            continue
        u = {k: rat(rng.randint(-2, 2)) for k in ub}
        phi = {k: rat(rng.randint(-2, 2)) for k in eb}
        u = {k: v for k, v in u.items() if v != 0}
        phi = {k: v for k, v in phi.items() if v != 0}
        if not u or not phi:
            continue
        a = matrix_element_2pt(LY, phi, v1, v2, u, mod)
        b = matrix_element_2pt(LY, phi, v2, v1, u, mod)
        # S2 symmetry: swapping both the states and the variables
        swapped = type(a)()
        for (j, p2), val in b.sing.items():
            # b is a function of (z2', z1') = (z1, z2): (z2-z1)^{-j-1} z1^{p}
            # convert to a-form: (z1-z2)^{-j-1} * (-1)^{j+1}, z1 power p
            swapped.add_lau(p2, 0, ZERO)  # ensure keys exist path
        assert _swap_equal(a, b)
        count += 1


def _swap_equal(a, b):
    """a(z1,z2) == b(z2,z1) as rational functions."""
    from covacua.polynomials import MPoly
    n1, j1, a1, b1 = a.normalized()
    # build b with swapped variables: swap exponents and sign of (z1-z2)
    n2, j2, a2, b2 = b.normalized()
    n2s = MPoly(2, {(e2, e1): v for (e1, e2), v in n2.terms.items()})
    sign = -1 if (j2 + 1) % 2 else 1
    n2s = n2s * sign
    z1 = MPoly.var(2, 0)
    z2 = MPoly.var(2, 1)
    diff = z1 - z2
    J, A, B = max(j1, j2), max(a1, b2), max(b1, a2)

    def lift(num, dj, da, db):
        t = num
        for _ in range(dj):
            t = t * diff
        return t * MPoly.var(2, 0, da) * MPoly.var(2, 1, db)

    return lift(n1, J - j1, A - a1, B - b1) == lift(n2s, J - j2, A - b2, B - a2)


def test_matrix_element_ope():
    rng = random.Random(53)
    mod = LY.module(1, 2)
    count = 0
    while count < 6:
        v1 = LY.random_state(rng.randint(2, 3), rng)
        v2 = LY.random_state(rng.randint(2, 3), rng)
        if not v1 or not v2:
            continue
        u = {k: ONE for k in mod.basis(rng.randint(0, 2))}
        phi = {k: ONE for k in mod.basis(rng.randint(0, 2))}
        if not u or not phi:
            continue
        el = matrix_element_2pt(LY, phi, v1, v2, u, mod)
        # compare every (z1-z2)-Laurent coefficient the LHS supports
        orders = max((p1 for p1, _ in el.lau), default=0)
        lhs = el.laurent_in_diff(orders, LY)
        rhs = ope_element(LY, phi, v1, v2, u, mod, taylor_orders=orders)
        keys = set(lhs) | set(rhs)
        for k in keys:
            l = {p: v for p, v in lhs.get(k, {}).items() if v != 0}
            r = {p: v for p, v in rhs.get(k, {}).items() if v != 0}
            assert l == r, (k, l, r)
        count += 1


def test_truncated_actions_flag_exactly():
    from covacua.voa import apply_mode_truncated
    m = LY.vacuum.verma
    vec = {(2,): ONE}
    out, flag = m.act_truncated(-3, vec, cutoff=4)
    assert flag and out == {}
    out, flag = m.act_truncated(-3, vec, cutoff=5)
    assert not flag and sum(next(iter(out))) == 5
    # raising modes never overflow
    out, flag = m.act_truncated(2, {(2, 2): ONE}, cutoff=2)
    assert not flag
    V = LY.vacuum_module()
    out, flag = apply_mode_truncated(V, LY.virasoro_state(), -4, {(2,): ONE}, 5)
    assert flag and out == {}
    out, flag = apply_mode_truncated(V, LY.virasoro_state(), -4, {(2,): ONE}, 6)
    assert not flag and out


def test_state_serialization_roundtrip():
    from covacua.voa import state_text, parse_state
    st = {(3, 2): rat(-7, 3), (2,): ONE, (): rat(2)}
    text = state_text(st)
    assert parse_state(text) == st
    assert parse_state(state_text({})) == {}
    assert "():2" in text


def test_theta_vacuum_zero_mode():
    # theta(J_0(|0>)) = J_0(|0>)
    terms = LY.theta_terms({(): ONE}, 0)
    assert terms == [({(): ONE}, 0, 1)]


def test_matrix_element_vacuum_v1_constant_in_z1():
    mod = LY.module(1, 2)
    u = {k: ONE for k in mod.basis(1)}
    phi = {k: ONE for k in mod.basis(1)}
    el = matrix_element_2pt(LY, phi, {(): ONE}, LY.virasoro_state(), u, mod)
    assert not el.sing
    assert all(p1 == 0 for p1, _ in el.lau)
