"""Polynomials and rational forms over Q.

Univariate dense polynomials, small multivariate polynomials (for two-point
forms), partial-fraction representations of rational functions whose poles
sit at prescribed rational points or at infinity, and exact rational-function
interpolation.  All coefficients are exact rationals.
"""
from __future__ import annotations

import math

from .exact import Rat, rat, rat_str, binomial, RowReducer, ZERO, ONE


# ---------------------------------------------------------------------------
# univariate polynomials (dense coefficient list, low degree first)

class Poly:
    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [rat(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = c

    @classmethod
    def const(cls, v):
        return cls([v])

    @classmethod
    def x(cls):
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots):
        p = cls([1])
        for r in roots:
            p = p * cls([-rat(r), 1])
        return p

    def degree(self) -> int:
        return len(self.c) - 1 if self.c else -1

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, other):
        return isinstance(other, Poly) and self.c == other.c

    def __add__(self, other):
        n = max(len(self.c), len(other.c))
        return Poly([(self.c[i] if i < len(self.c) else 0)
                     + (other.c[i] if i < len(other.c) else 0) for i in range(n)])

    def __sub__(self, other):
        n = max(len(self.c), len(other.c))
        return Poly([(self.c[i] if i < len(self.c) else 0)
                     - (other.c[i] if i < len(other.c) else 0) for i in range(n)])

    def __neg__(self):
        return Poly([-x for x in self.c])

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            out = [ZERO] * (len(self.c) + len(other.c) - 1)
            for i, a in enumerate(self.c):
                if a == 0:
                    continue
                for j, b in enumerate(other.c):
                    out[i + j] += a * b
            return Poly(out)
        return Poly([x * rat(other) for x in self.c])

    __rmul__ = __mul__

    def shift_pow(self, k: int) -> "Poly":
        """Multiply by x**k."""
        if self.is_zero():
            return Poly()
        return Poly([ZERO] * k + self.c)

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = Poly()
        r = Poly(self.c)
        d = other.degree()
        lead = other.c[-1]
        while r.degree() >= d:
            k = r.degree() - d
            f = r.c[-1] / lead
            q = q + Poly([0] * k + [f])
            r = r - (other * Poly([0] * k + [f]))
        return q, r

    def gcd(self, other: "Poly") -> "Poly":
        a, b = Poly(self.c), Poly(other.c)
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        if a.is_zero():
            return a
        return a * (ONE / a.c[-1])

    def derivative(self) -> "Poly":
        return Poly([self.c[i] * i for i in range(1, len(self.c))])

    def is_squarefree(self) -> bool:
        if self.degree() <= 0:
            return True
        return self.gcd(self.derivative()).degree() == 0

    def __call__(self, x):
        acc = ZERO
        for co in reversed(self.c):
            acc = acc * rat(x) + co
        return acc

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (ONE / self.c[-1])

    def roots_among(self, candidates):
        return sorted({rat(r) for r in candidates if self(r) == 0})

    def text(self, var: str = "x") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.degree(), -1, -1):
            co = self.c[i]
            if co == 0:
                continue
            if i == 0:
                parts.append(rat_str(co))
            else:
                xs = var if i == 1 else f"{var}^{i}"
                if co == 1:
                    parts.append(xs)
                elif co == -1:
                    parts.append(f"-{xs}")
                else:
                    parts.append(f"{rat_str(co)}*{xs}")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"Poly({self.text()})"


# ---------------------------------------------------------------------------
# multivariate polynomials: dict {exponent tuple: coeff}

class MPoly:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms: dict[tuple, Rat] = {}
        if terms:
            for e, v in terms.items():
                v = rat(v)
                if v != 0:
                    self.terms[tuple(e)] = v

    @classmethod
    def const(cls, n, v):
        return cls(n, {(0,) * n: rat(v)})

    @classmethod
    def var(cls, n, i, power=1):
        e = [0] * n
        e[i] = power
        return cls(n, {tuple(e): ONE})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, MPoly) and self.n == other.n and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        for e, v in other.terms.items():
            nv = out.get(e, ZERO) + v
            if nv == 0:
                out.pop(e, None)
            else:
                out[e] = nv
        return MPoly(self.n, out)

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, other):
        if isinstance(other, MPoly):
            out = {}
            for e1, v1 in self.terms.items():
                for e2, v2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    nv = out.get(e, ZERO) + v1 * v2
                    if nv == 0:
                        out.pop(e, None)
                    else:
                        out[e] = nv
            return MPoly(self.n, out)
        v = rat(other)
        return MPoly(self.n, {e: c * v for e, c in self.terms.items()})

    __rmul__ = __mul__

    def __call__(self, point):
        acc = ZERO
        for e, v in self.terms.items():
            t = v
            for xi, ei in zip(point, e):
                t *= rat(xi) ** ei
            acc += t
        return acc


# ---------------------------------------------------------------------------
# partial-fraction forms in one variable
#
# A PF1 is a rational function with poles confined to a prescribed set of
# rational points, written as  sum c_{a,k} (z-a)^{-k}  +  sum d_j z^j.
# Keys: ("p", a, k) with k >= 1, and ("z", j) with j >= 0.

class PF1:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple, Rat] = {}
        if terms:
            for key, v in terms.items():
                v = rat(v)
                if v != 0:
                    self.terms[key] = v

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def pole(cls, a, k: int, coeff=1):
        return cls({("p", rat(a), k): coeff})

    @classmethod
    def power(cls, j: int, coeff=1):
        return cls({("z", j): coeff})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, PF1) and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            nv = out.get(k, ZERO) + v
            if nv == 0:
                out.pop(k, None)
            else:
                out[k] = nv
        return PF1(out)

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, scal):
        s = rat(scal)
        return PF1({k: v * s for k, v in self.terms.items()})

    __rmul__ = __mul__

    def poles(self) -> dict[Rat, int]:
        out = {}
        for key in self.terms:
            if key[0] == "p":
                _, a, k = key
                out[a] = max(out.get(a, 0), k)
        return out

    def poly_degree(self) -> int:
        return max((key[1] for key in self.terms if key[0] == "z"), default=-1)

    def derivative(self) -> "PF1":
        out = {}
        for key, v in self.terms.items():
            if key[0] == "p":
                _, a, k = key
                out[("p", a, k + 1)] = out.get(("p", a, k + 1), ZERO) + (-k) * v
            else:
                j = key[1]
                if j >= 1:
                    out[("z", j - 1)] = out.get(("z", j - 1), ZERO) + j * v
        return PF1(out)

    def __call__(self, z):
        z = rat(z)
        acc = ZERO
        for key, v in self.terms.items():
            if key[0] == "p":
                _, a, k = key
                if z == a:
                    raise ZeroDivisionError("evaluation at a pole")
                acc += v / (z - a) ** k
            else:
                acc += v * z ** key[1]
        return acc

    def to_num_den(self):
        """Return (num Poly, den Poly); den = prod (z-a)^k over the poles."""
        poles = self.poles()
        den = Poly([1])
        for a in sorted(poles):
            den = den * Poly.from_roots([a] * poles[a])
        num = Poly()
        for key, v in self.terms.items():
            if key[0] == "p":
                _, a, k = key
                rest = Poly([1])
                for b in sorted(poles):
                    mult = poles[b] - (k if b == a else 0)
                    rest = rest * Poly.from_roots([b] * mult)
                num = num + rest * v
            else:
                num = num + (Poly([0] * key[1] + [1]) * den) * v
        return num, den

    @classmethod
    def from_num_den(cls, num: Poly, pole_list) -> "PF1":
        """Exact partial fractions of num / prod (z-a)^m for (a, m) in pole_list."""
        out = {}
        poles = [(rat(a), m) for a, m in pole_list if m > 0]
        den = Poly([1])
        for a, m in poles:
            den = den * Poly.from_roots([a] * m)
        if den.degree() == 0:
            num = num * (ONE / den.c[0])
            for j, v in enumerate(num.c):
                if v != 0:
                    out[("z", j)] = v
            return cls(out)
        # polynomial part
        q, r = num.divmod(den)
        for j, v in enumerate(q.c):
            if v != 0:
                out[("z", j)] = v
        # singular parts: Laurent expansion of r/den at each pole
        for a, m in poles:
            rest = Poly([1])
            for b, mb in poles:
                if b != a:
                    rest = rest * Poly.from_roots([b] * mb)
            # series of r/rest around z=a up to order m-1: coefficients of t^i
            ser = _taylor_ratio(r, rest, a, m)
            for i in range(m):
                v = ser[i]
                if v != 0:
                    out[("p", a, m - i)] = out.get(("p", a, m - i), ZERO) + v
        return cls(out)

    def mulpf(self, other: "PF1") -> "PF1":
        """Exact product; result poles are contained in the union of poles."""
        n1, d1 = self.to_num_den()
        n2, d2 = other.to_num_den()
        poles = {}
        for a, k in self.poles().items():
            poles[a] = poles.get(a, 0) + k
        for a, k in other.poles().items():
            poles[a] = poles.get(a, 0) + k
        return PF1.from_num_den(n1 * n2, sorted(poles.items()))

    def laurent_at(self, a, nmin: int, nmax: int) -> dict[int, Rat]:
        """Coefficients of (z-a)^n for nmin <= n <= nmax."""
        a = rat(a)
        out = {n: ZERO for n in range(nmin, nmax + 1)}
        for key, v in self.terms.items():
            if key[0] == "p":
                _, b, k = key
                if b == a:
                    if nmin <= -k <= nmax:
                        out[-k] += v
                else:
                    # (z-b)^-k = ((a-b) + t)^-k, t = z-a
                    for n in range(max(nmin, 0), nmax + 1):
                        out[n] += v * binomial(-k, n) * (a - b) ** (-k - n)
            else:
                j = key[1]
                # z^j = (t+a)^j
                for n in range(max(nmin, 0), min(j, nmax) + 1):
                    out[n] += v * binomial(j, n) * a ** (j - n)
        return out

    def laurent_at_infinity(self, nmin: int, nmax: int) -> dict[int, Rat]:
        """Coefficients of z^n for nmin <= n <= nmax in the expansion at z=inf."""
        out = {n: ZERO for n in range(nmin, nmax + 1)}
        for key, v in self.terms.items():
            if key[0] == "p":
                _, b, k = key
                # (z-b)^-k = z^-k sum_m C(-k,m)(-b)^m z^-m
                for n in range(nmin, min(nmax, -k) + 1):
                    m = -k - n
                    out[n] += v * binomial(-k, m) * (-b) ** m
            else:
                j = key[1]
                if nmin <= j <= nmax:
                    out[j] += v
        return out

    def residue_at(self, a) -> Rat:
        return self.terms.get(("p", rat(a), 1), ZERO)

    def residue_at_infinity(self) -> Rat:
        """Res_inf f dz = -(coefficient of z^-1 at infinity)."""
        return -self.laurent_at_infinity(-1, -1)[-1]

    def max_pole_order_at_infinity(self) -> int:
        """Largest n with a nonzero z^n coefficient at infinity (or None)."""
        deg = self.poly_degree()
        if deg >= 0:
            return deg
        best = None
        for key in self.terms:
            if key[0] == "p":
                k = key[2]
                if best is None or -k > best:
                    best = -k
        return best if best is not None else None

    def text(self, var: str = "z") -> str:
        if not self.terms:
            return "0"
        bits = []
        for key in sorted(self.terms, key=lambda k: (k[0], str(k[1:]))):
            v = rat_str(self.terms[key])
            if key[0] == "p":
                _, a, k = key
                base = f"({var}-{rat_str(a)})" if a != 0 else var
                bits.append(f"{v}*{base}^(-{k})")
            else:
                j = key[1]
                bits.append(v if j == 0 else f"{v}*{var}^{j}")
        return " + ".join(bits)

    def __repr__(self):
        return f"PF1({self.text()})"


def _taylor_ratio(num: Poly, den: Poly, a, order: int) -> list[Rat]:
    """Taylor coefficients of num/den around z=a up to t^(order-1); den(a) != 0."""
    # expand polynomials in t = z - a
    def shift(p: Poly) -> list[Rat]:
        out = [ZERO] * (p.degree() + 1 if not p.is_zero() else 1)
        for j, v in enumerate(p.c):
            for n in range(min(j, len(out) - 1) + 1):
                out[n] += v * binomial(j, n) * rat(a) ** (j - n)
        return out

    nn = shift(num)
    dd = shift(den)
    if dd[0] == 0:
        raise ZeroDivisionError("denominator vanishes at expansion point")
    ser = []
    for n in range(order):
        v = nn[n] if n < len(nn) else ZERO
        for i in range(1, n + 1):
            di = dd[i] if i < len(dd) else ZERO
            v -= di * ser[n - i]
        ser.append(v / dd[0])
    return ser


# ---------------------------------------------------------------------------
# exact rational-function interpolation

def interpolate_rational(samples, num_deg: int, den_deg: int):
    """Fit y = N(x)/D(x), deg N <= num_deg, deg D <= den_deg, through samples.

    Solves the homogeneous system N(x_i) - y_i D(x_i) = 0 exactly and keeps
    a nonzero solution with D not identically zero.  Returns (N, D) with D
    normalized monic-leading, or None when no such function exists.
    """
    cols = (num_deg + 1) + (den_deg + 1)
    red = RowReducer(cols)
    for x, y in samples:
        x, y = rat(x), rat(y)
        row = {}
        for j in range(num_deg + 1):
            row[j] = x ** j
        for j in range(den_deg + 1):
            row[num_deg + 1 + j] = -y * x ** j
        red.add_row(row)
    for vec in red.kernel_basis():
        den = Poly([vec.get(num_deg + 1 + j, ZERO) for j in range(den_deg + 1)])
        num = Poly([vec.get(j, ZERO) for j in range(num_deg + 1)])
        if den.is_zero():
            continue
        g = num.gcd(den) if not num.is_zero() else den.monic()
        if g.degree() > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
        lead = den.c[-1]
        return num * (ONE / lead), den * (ONE / lead)
    return None
