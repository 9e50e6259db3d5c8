"""The integrable connection on block spaces over moving marked points.

nabla_a = d/dw_a + rho_a(T(-1)) acts on the sheaf of covacua; on a
stabilized basis of quotient classes the rho-part becomes an exact matrix
over Q.  Matrices are recovered as rational functions of one coordinate
at a time by exact interpolation at rational sample points, which gives
flatness checks (curvature via mixed partials) and a first-order ODE
export for downstream integrators.
"""
from __future__ import annotations

from .exact import Rat, rat, rat_str, ZERO, ONE, RowReducer
from .polynomials import Poly, interpolate_rational
from .blocks import CovacuaProblem, Window, block_space, INF
from .voa import MinimalModel


# -- small dense matrices over Q ---------------------------------------------

def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    return [[sum((a[i][t] * b[t][j] for t in range(k)), ZERO) for j in range(m)]
            for i in range(n)]


def mat_sub(a, b):
    return [[a[i][j] - b[i][j] for j in range(len(a[0]))] for i in range(len(a))]


def mat_add(a, b):
    return [[a[i][j] + b[i][j] for j in range(len(a[0]))] for i in range(len(a))]


def mat_scale(a, s):
    return [[v * s for v in row] for row in a]


def mat_comm(a, b):
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def mat_is_zero(a):
    return all(v == 0 for row in a for v in row)


def mat_inverse(a):
    """Exact inverse; returns None when singular."""
    n = len(a)
    aug = [[a[i][j] for j in range(n)] + [ONE if i == j else ZERO for j in range(n)]
           for i in range(n)]
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, n):
            if aug[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        aug[row], aug[piv] = aug[piv], aug[row]
        pv = aug[row][col]
        aug[row] = [v / pv for v in aug[row]]
        for r in range(n):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [aug[r][j] - f * aug[row][j] for j in range(2 * n)]
        row += 1
    return [r[n:] for r in aug]


# -- connection matrices -------------------------------------------------------


class ConnectionData:
    """Connection matrices at one rational configuration of marked points.

    ``matrices[slot]`` is the matrix of [m] -> [rho_slot(T(-1)) m] on the
    stabilized block basis; the basis consists of the pivot-free window
    tensors at the working depth, transported through depth+1.
    """

    def __init__(self, problem, depth, basis_keys, matrices, transport,
                 next_basis_keys):
        self.problem = problem
        self.depth = depth
        self.basis_keys = basis_keys
        self.matrices = matrices
        # coordinates of this basis inside the depth+1 quotient basis
        self.transport = transport
        self.next_basis_keys = next_basis_keys

    @property
    def dimension(self):
        return len(self.basis_keys)


def connection_data(problem: CovacuaProblem, depth: int, weight_bound: int,
                    movable=None) -> ConnectionData:
    """Connection matrices for the movable finite points of the problem.

    Requires equal block dimension at depth and depth+1 and an invertible
    depth transport (refuses otherwise).  ``movable`` defaults to every
    finite marked point.
    """
    sp = block_space(problem, depth, weight_bound)
    sp1 = block_space(problem, depth + 1, weight_bound)
    if sp.dimension != sp1.dimension:
        raise ValueError(
            f"block dimension not depth-stable: {sp.dimension} at {depth}, "
            f"{sp1.dimension} at {depth + 1}")
    dim = sp.dimension
    free_keys = [sp.window.col_keys[c] for c in sp.quotient.free_columns]
    free1 = {sp1.window.col_keys[c]: i
             for i, c in enumerate(sp1.quotient.free_columns)}

    def coords1(tensor):
        red = sp1.quotient.reduce(sp1.window.tensor_coords(tensor))
        out = [ZERO] * dim
        for c, v in red.items():
            out[free1[sp1.window.col_keys[c]]] = v
        return out

    P = [[ZERO] * dim for _ in range(dim)]
    for j, key in enumerate(free_keys):
        col = coords1({key: ONE})
        for i in range(dim):
            P[i][j] = col[i]
    Pinv = mat_inverse(P)
    if Pinv is None:
        raise ValueError("depth transport is not an isomorphism")
    if movable is None:
        movable = problem.finite_slots()
    matrices = {}
    T = problem.model.virasoro_state()
    for slot in movable:
        if problem.points[slot][0] is INF:
            raise ValueError("the point at infinity does not move")
        Q = [[ZERO] * dim for _ in range(dim)]
        for j, key in enumerate(free_keys):
            img = sp1.window.apply_slot({key: ONE}, slot, [(T, -1, ONE)])
            col = coords1(img)
            for i in range(dim):
                Q[i][j] = col[i]
        matrices[slot] = mat_mul(Pinv, Q)
    free_keys1 = [sp1.window.col_keys[c] for c in sp1.quotient.free_columns]
    return ConnectionData(problem, depth, free_keys, matrices, P, free_keys1)


def _problem_at(model, spec_points, overrides):
    pts = []
    for i, (c, m) in enumerate(spec_points):
        c2 = overrides.get(i, c)
        pts.append((c2, m))
    return CovacuaProblem(model, pts)


class EntryInterpolator:
    """Entries of a connection matrix as rational functions of one coord.

    Samples the full computation at rational offsets, fits each entry with
    exact rational interpolation (degrees start at #points+2 and double up
    to a cap on validation failure), and validates on held-out points.
    """

    def __init__(self, model, spec_points, slot_var, slot_mat, depth,
                 weight_bound, samples, degree_cap: int = 24):
        self.model = model
        self.spec_points = spec_points
        self.slot_var = slot_var
        self.slot_mat = slot_mat
        self.depth = depth
        self.weight_bound = weight_bound
        self.samples = [rat(x) for x in samples]
        self.degree_cap = degree_cap
        self._cache: dict[Rat, list] = {}
        self.basis_keys = None
        self.dimension = None

    def matrix_at(self, x):
        x = rat(x)
        if x in self._cache:
            return self._cache[x]
        pr = _problem_at(self.model, self.spec_points, {self.slot_var: x})
        data = connection_data(pr, self.depth, self.weight_bound,
                               movable=[self.slot_mat])
        if self.basis_keys is None:
            self.basis_keys = data.basis_keys
            self.dimension = data.dimension
        elif data.basis_keys != self.basis_keys:
            raise ValueError("quotient basis jumped between sample points")
        m = data.matrices[self.slot_mat]
        self._cache[x] = m
        return m

    def entry_function(self, i, j):
        """(num, den) rational fit validated at every sample; raises on
        degree-cap exhaustion."""
        pts = [(x, self.matrix_at(x)[i][j]) for x in self.samples]
        ndeg = len(self.spec_points) + 2
        while ndeg <= self.degree_cap:
            need = 2 * ndeg + 2
            if need > len(pts):
                raise ValueError(
                    f"need {need} sample points for degree {ndeg}, have {len(pts)}")
            fit = interpolate_rational(pts[:need], ndeg, ndeg)
            if fit is not None:
                num, den = fit
                if all(den(x) != 0 and num(x) / den(x) == y for x, y in pts):
                    return num, den
            ndeg *= 2
        raise ValueError("interpolation degree cap exceeded")

    def derivative_at(self, i, j, x0):
        num, den = self.entry_function(i, j)
        x0 = rat(x0)
        d = num.derivative() * den - num * den.derivative()
        return d(x0) / den(x0) ** 2


def flatness_check(model: MinimalModel, spec_points, slot_a, slot_b,
                   depth, weight_bound, offsets=None, degree_cap=24):
    """Curvature d_a A_b - d_b A_a + [A_a, A_b] == 0 at the base point.

    Partials are exact derivatives of validated rational interpolants of
    the matrix entries along each coordinate.
    """
    base_a = rat(spec_points[slot_a][0])
    base_b = rat(spec_points[slot_b][0])
    used = {rat(c) for c, _ in spec_points if c is not INF}
    if offsets is None:
        offsets = [rat(k, 7) for k in range(-8, 9) if k]

    def sample_coords(base):
        out = [base]
        for o in offsets:
            x = base + o
            if x not in used:
                out.append(x)
        return out

    # A_b as a function of w_a, A_a as a function of w_b
    ib = EntryInterpolator(model, spec_points, slot_a, slot_b, depth,
                           weight_bound, sample_coords(base_a), degree_cap)
    ia = EntryInterpolator(model, spec_points, slot_b, slot_a, depth,
                           weight_bound, sample_coords(base_b), degree_cap)
    A_b = ib.matrix_at(base_a)
    A_a = ia.matrix_at(base_b)
    if ia.basis_keys != ib.basis_keys:
        raise ValueError("incompatible bases between directions")
    dim = len(A_a)
    dadb = [[ib.derivative_at(i, j, base_a) for j in range(dim)] for i in range(dim)]
    dbda = [[ia.derivative_at(i, j, base_b) for j in range(dim)] for i in range(dim)]
    curv = mat_add(mat_sub(dadb, dbda), mat_comm(A_a, A_b))
    return {"curvature": curv, "pass": mat_is_zero(curv),
            "dimension": dim, "A_a": A_a, "A_b": A_b}


def depth_stability_check(problem: CovacuaProblem, depth, weight_bound,
                          movable=None):
    """Connection matrices at (depth, depth+1) and (depth+1, depth+2) agree.

    Equality is taken after conjugating by the depth transport S (the
    coordinates of the lower basis inside the upper quotient):
    S A_d = A_{d+1} S for every movable direction.
    """
    d0 = connection_data(problem, depth, weight_bound, movable)
    d1 = connection_data(problem, depth + 1, weight_bound, movable)
    if d0.next_basis_keys != d1.basis_keys:
        return {"pass": False, "dimension": d0.dimension,
                "reason": "basis mismatch"}
    S = d0.transport
    ok = all(mat_mul(S, d0.matrices[s]) == mat_mul(d1.matrices[s], S)
             for s in d0.matrices)
    return {"pass": ok, "dimension": d0.dimension}


def translation_law_check(model: MinimalModel, left_points, right_points,
                          q0, depth, weight_bound, offsets=None,
                          degree_cap=24):
    """Sewing-coordinate consistency at q != 0.

    Along the embedding w_{C,b} = q * w_{B,b} the boundary field
    q d/dq equals sum_b w_{C,b} d/dw_{C,b}; the check equates
    q dA/dq with the chain-rule combination of per-coordinate partials,
    all through independent exact interpolations, for every connection
    matrix A of the problem.
    """
    q0 = rat(q0)
    if offsets is None:
        offsets = [rat(k, 11) for k in range(-7, 8) if k]
    nleft = len(left_points)
    scaled = [(rat(c), m) for c, m in right_points]

    def points_at_q(q):
        pts = [(c, m) for c, m in left_points]
        pts += [(q * c, m) for c, m in scaled]
        return pts

    base_points = points_at_q(q0)
    used = {rat(c) for c, _ in base_points if c is not INF}
    slots_scaled = [nleft + i for i in range(len(scaled))]
    movable = [i for i, (c, _) in enumerate(base_points) if c is not INF]
    base_data = connection_data(CovacuaProblem(model, base_points), depth,
                                weight_bound, movable)
    dim = base_data.dimension

    # interpolate every matrix entry along the q-curve
    qs = [q0] + [q0 + o for o in offsets
                 if all((q0 + o) * c not in used or (q0 + o) * c == q0 * c
                        for c, _ in scaled) and q0 + o != 0]
    cache_q: dict[Rat, dict] = {}

    def data_at_q(q):
        if q not in cache_q:
            d = connection_data(CovacuaProblem(model, points_at_q(q)), depth,
                                weight_bound, movable)
            if d.basis_keys != base_data.basis_keys:
                raise ValueError("basis jumped along the q-curve")
            cache_q[q] = d
        return cache_q[q]

    results = {}
    for slot in movable:
        # LHS: q * d/dq of A_slot along the curve
        lhs = [[ZERO] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(dim):
                pts = [(q, data_at_q(q).matrices[slot][i][j]) for q in qs]
                ndeg = len(base_points) + 2
                fit = None
                while ndeg <= degree_cap:
                    need = 2 * ndeg + 2
                    if need > len(pts):
                        break
                    cand = interpolate_rational(pts[:need], ndeg, ndeg)
                    if cand is not None:
                        num, den = cand
                        if all(den(x) != 0 and num(x) / den(x) == y for x, y in pts):
                            fit = cand
                            break
                    ndeg *= 2
                if fit is None:
                    raise ValueError("q-curve interpolation failed")
                num, den = fit
                d = num.derivative() * den - num * den.derivative()
                lhs[i][j] = q0 * d(q0) / den(q0) ** 2
        # RHS: chain rule sum over the scaled coordinates
        rhs = [[ZERO] * dim for _ in range(dim)]
        for bslot in slots_scaled:
            wcb = base_points[bslot][0]
            interp = EntryInterpolator(
                model, base_points, bslot, slot, depth, weight_bound,
                [rat(wcb)] + [rat(wcb) + o for o in offsets
                              if rat(wcb) + o not in used],
                degree_cap)
            for i in range(dim):
                for j in range(dim):
                    rhs[i][j] += wcb * interp.derivative_at(i, j, wcb)
        results[slot] = mat_sub(lhs, rhs)
    ok = all(mat_is_zero(m) for m in results.values())
    return {"pass": ok, "residual": results, "dimension": dim}


def export_ode(model: MinimalModel, spec_points, movable_slot, depth,
               weight_bound, samples=None, degree_cap=24) -> str:
    """Self-describing first-order ODE system along one moving coordinate.

    Flat sections c(w) of the block bundle satisfy dc/dw = -A(w) c with
    A interpolated exactly; the document lists the dimension, each entry
    as a rational function, the singular locus, and the basis labels.
    """
    base = rat(spec_points[movable_slot][0])
    used = {rat(c) for c, _ in spec_points if c is not INF}
    if samples is None:
        samples = [base] + [base + rat(k, 7) for k in range(-9, 10)
                            if k and base + rat(k, 7) not in used]
    interp = EntryInterpolator(model, spec_points, movable_slot, movable_slot,
                               depth, weight_bound, samples, degree_cap)
    interp.matrix_at(base)
    dim = interp.dimension
    lines = []
    lines.append("ode-system covacua-connection")
    lines.append(f"dimension {dim}")
    coords = " ".join("inf" if c is INF else rat_str(c) for c, _ in spec_points)
    lines.append(f"marked-points {coords}")
    lines.append(f"movable-slot {movable_slot}")
    lines.append("equation dc/dw = -A(w) c")
    sing = set()
    if dim == 0:
        lines.append("entries none")
        return "\n".join(lines) + "\n"
    for i in range(dim):
        for j in range(dim):
            num, den = interp.entry_function(i, j)
            lines.append(f"A[{i}][{j}] = ({num.text('w')}) / ({den.text('w')})")
            for c, _ in spec_points:
                if c is not INF and den(rat(c)) == 0:
                    sing.add(rat(c))
    lines.append("singular-locus " + (" ".join(rat_str(s) for s in sorted(sing)) or "none"))
    for k, key in enumerate(interp.basis_keys):
        dt, keys = key
        parts = ";".join(",".join(map(str, kk)) or "-" for kk in keys)
        lines.append(f"basis[{k}] depths={','.join(map(str, dt))} monomials={parts}")
    return "\n".join(lines) + "\n"
