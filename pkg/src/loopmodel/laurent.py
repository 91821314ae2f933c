"""Exact scalars and multivariate Laurent-polynomial arithmetic.

This module is the computational core of the package.  Everything downstream
(Temperley-Lieb operators, the difference-equation solver, sum rules) works
with three kinds of exact values:

* ``Fraction`` / ``int`` -- arbitrary-precision rationals,
* ``Cyclotomic6`` -- the degree-two extension Q(eps) with eps^2 = eps - 1,
  i.e. eps a primitive sixth root of unity (eps^3 = -1, eps^6 = 1); the cube
  root omega = eps^2 satisfies omega^2 + omega + 1 = 0,
* ``MultiLaurent`` -- sparse multivariate Laurent polynomials over either
  coefficient domain, with ``RatScalar`` as the fraction field on top.

Half-integer powers never appear: the convention throughout the package is
that ``u`` stands for q^(1/2), so q = u^2 and the shift parameter s = q^3 is
the monomial u^6.

Exponent vectors are packed into single integers (16 bits per variable,
offset binary) so that monomial multiplication is one integer addition.  The
canonical term order is graded lexicographic on the exponent vectors.
"""

from __future__ import annotations

import heapq
from fractions import Fraction

from .errors import AlgebraError, PoleError

_WIDTH = 16
_OFFSET = 1 << 15
_MASK = (1 << _WIDTH) - 1


def _exact_div_scalar(a, b):
    """Exact a / b across the scalar tower (int, Fraction, Cyclotomic6, UPoly)."""
    if isinstance(b, int):
        if isinstance(a, int):
            q, r = divmod(a, b)
            return q if r == 0 else Fraction(a, b)
        return a / b
    if isinstance(b, Fraction):
        return a / b
    if isinstance(b, Cyclotomic6):
        return (a if isinstance(a, Cyclotomic6) else Cyclotomic6(a)) / b
    if isinstance(b, UPoly):
        if isinstance(a, int):
            a = UPoly(a)
        q = a.exact_div(b)
        if q is None:
            q = a * b.inverse()
        return q
    raise TypeError(f"cannot divide by scalar of type {type(b)!r}")


def _scalar_pow(c, e):
    """c**e for possibly negative e, staying exact."""
    if e >= 0:
        return c ** e
    if isinstance(c, (Cyclotomic6, UPoly)):
        return c.inverse() ** (-e)
    if c == 0:
        raise PoleError("pole hit")
    if isinstance(c, int) and c in (1, -1):
        return c ** (-e)
    out = Fraction(1) / (Fraction(c) ** (-e))
    return int(out) if out.denominator == 1 else out


class Cyclotomic6:
    """Element a0 + a1*eps of Q(eps), eps^2 = eps - 1.

    eps is a primitive sixth root of unity.  The stochastic specialization
    uses q = omega := eps^2 (so omega^2 + omega + 1 = 0) and u = q^(1/2) = eps.
    """

    __slots__ = ("a0", "a1")

    def __init__(self, a0=0, a1=0):
        self.a0 = a0 if isinstance(a0, (int, Fraction)) else Fraction(a0)
        self.a1 = a1 if isinstance(a1, (int, Fraction)) else Fraction(a1)

    @staticmethod
    def eps():
        return Cyclotomic6(0, 1)

    @staticmethod
    def omega():
        # omega = eps^2 = eps - 1
        return Cyclotomic6(-1, 1)

    def __bool__(self):
        return bool(self.a0) or bool(self.a1)

    def __eq__(self, other):
        if isinstance(other, Cyclotomic6):
            return self.a0 == other.a0 and self.a1 == other.a1
        if isinstance(other, (int, Fraction)):
            return self.a1 == 0 and self.a0 == other
        return NotImplemented

    def __hash__(self):
        if self.a1 == 0:
            return hash(self.a0)
        return hash((Fraction(self.a0), Fraction(self.a1)))

    def __neg__(self):
        return Cyclotomic6(-self.a0, -self.a1)

    def __add__(self, other):
        if isinstance(other, Cyclotomic6):
            return Cyclotomic6(self.a0 + other.a0, self.a1 + other.a1)
        if isinstance(other, (int, Fraction)):
            return Cyclotomic6(self.a0 + other, self.a1)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Cyclotomic6):
            return self + (-other)
        if isinstance(other, (int, Fraction)):
            return self + Cyclotomic6(-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Cyclotomic6):
            # (a0 + a1 e)(b0 + b1 e) with e^2 = e - 1
            a0, a1, b0, b1 = self.a0, self.a1, other.a0, other.a1
            cross = a1 * b1
            return Cyclotomic6(a0 * b0 - cross, a0 * b1 + a1 * b0 + cross)
        if isinstance(other, (int, Fraction)):
            return Cyclotomic6(self.a0 * other, self.a1 * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self):
        """Image under eps -> 1 - eps (= eps^-1), the nontrivial automorphism."""
        return Cyclotomic6(self.a0 + self.a1, -self.a1)

    def norm(self):
        # (a0 + a1 e)(a0 + a1 (1-e)) = a0^2 + a0 a1 + a1^2
        return self.a0 * self.a0 + self.a0 * self.a1 + self.a1 * self.a1

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise AlgebraError("zero denominator")
        conj = self.conjugate()
        return Cyclotomic6(Fraction(conj.a0, 1) / n, Fraction(conj.a1, 1) / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise AlgebraError("zero denominator")
            return Cyclotomic6(Fraction(self.a0) / other, Fraction(self.a1) / other)
        if isinstance(other, Cyclotomic6):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = Cyclotomic6(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_rational(self):
        return self.a1 == 0

    def to_fraction(self):
        if self.a1 != 0:
            raise AlgebraError("value is not rational")
        return Fraction(self.a0)

    def __repr__(self):
        if self.a1 == 0:
            return f"{self.a0}"
        if self.a0 == 0:
            return f"{self.a1}*eps"
        return f"({self.a0} + {self.a1}*eps)"


EPS = Cyclotomic6.eps()
OMEGA = Cyclotomic6.omega()


class LaurentRing:
    """A fixed ordered tuple of variable names plus exponent packing."""

    _cache: dict = {}

    __slots__ = ("vars", "nvars", "index", "units", "zero_key")

    def __new__(cls, names):
        names = tuple(names)
        cached = cls._cache.get(names)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.vars = names
        self.nvars = len(names)
        self.index = {v: i for i, v in enumerate(names)}
        self.units = tuple(1 << (_WIDTH * i) for i in range(len(names)))
        self.zero_key = sum(_OFFSET << (_WIDTH * i) for i in range(len(names)))
        cls._cache[names] = self
        return self

    def pack(self, exps):
        key = self.zero_key
        for i, e in enumerate(exps):
            key += e << (_WIDTH * i)
        return key

    def unpack(self, key):
        return tuple(((key >> (_WIDTH * i)) & _MASK) - _OFFSET for i in range(self.nvars))

    def exponent(self, key, i):
        return ((key >> (_WIDTH * i)) & _MASK) - _OFFSET

    def order_tuple(self, key):
        """Graded-lex sort key (total degree first, then exponents)."""
        exps = self.unpack(key)
        return (sum(exps), exps)

    # --- constructors -----------------------------------------------------

    def zero(self):
        return MultiLaurent(self, {})

    def const(self, c):
        if not c:
            return MultiLaurent(self, {})
        return MultiLaurent(self, {self.zero_key: c})

    def one(self):
        return self.const(1)

    def var(self, name, power=1, coeff=1):
        """The monomial coeff * name**power."""
        if not coeff:
            return self.zero()
        key = self.zero_key + (power << (_WIDTH * self.index[name]))
        return MultiLaurent(self, {key: coeff})

    def monomial(self, exps, coeff=1):
        if not coeff:
            return self.zero()
        return MultiLaurent(self, {self.pack(exps): coeff})

    def poly(self, term_map):
        """Build from {exponent-tuple: coeff}."""
        terms = {}
        for exps, c in term_map.items():
            if c:
                key = self.pack(exps)
                acc = terms.get(key, 0) + c
                if acc:
                    terms[key] = acc
                elif key in terms:
                    del terms[key]
        return MultiLaurent(self, terms)

    def __repr__(self):
        return f"LaurentRing{self.vars}"


def unify(a, b):
    """Coerce two MultiLaurent values into a common ring."""
    if a.ring is b.ring:
        return a, b
    if a.ring.vars == b.ring.vars:
        return a, b
    merged = tuple(dict.fromkeys(a.ring.vars + b.ring.vars))
    ring = LaurentRing(merged)
    return a.extend_to(ring), b.extend_to(ring)


class MultiLaurent:
    """Sparse multivariate Laurent polynomial with exact coefficients.

    Immutable by convention: no method mutates ``self``; all operations
    return new values, so instances can be shared freely across workers.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    # --- structure --------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_monomial(self):
        return len(self.terms) == 1

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and self.ring.zero_key in self.terms)

    def constant_value(self):
        if not self.terms:
            return 0
        if len(self.terms) == 1 and self.ring.zero_key in self.terms:
            return self.terms[self.ring.zero_key]
        raise AlgebraError("value is not constant")

    def coefficient(self, exps):
        return self.terms.get(self.ring.pack(exps), 0)

    def sorted_terms(self):
        """Terms as (exponent-tuple, coeff), canonical (graded-lex desc) order."""
        ring = self.ring
        keys = sorted(self.terms, key=ring.order_tuple, reverse=True)
        return [(ring.unpack(k), self.terms[k]) for k in keys]

    def leading(self):
        """(key, coeff) of the graded-lex leading term."""
        if not self.terms:
            raise AlgebraError("degree of zero")
        ring = self.ring
        key = max(self.terms, key=ring.order_tuple)
        return key, self.terms[key]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Cyclotomic6)):
            other = self.ring.const(other)
        if not isinstance(other, MultiLaurent):
            return NotImplemented
        if self.ring is other.ring or self.ring.vars == other.ring.vars:
            return self.terms == other.terms
        a, b = unify(self, other)
        return a.terms == b.terms

    __hash__ = None

    # --- ring arithmetic ---------------------------------------------------

    def __neg__(self):
        return MultiLaurent(self.ring, {k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Cyclotomic6)):
            other = self.ring.const(other)
        if isinstance(other, RatScalar):
            return RatScalar(self, self.ring.one()) + other
        if not isinstance(other, MultiLaurent):
            return NotImplemented
        a, b = unify(self, other)
        if len(b.terms) > len(a.terms):
            a, b = b, a
        terms = dict(a.terms)
        for k, c in b.terms.items():
            acc = terms.get(k, 0) + c
            if acc:
                terms[k] = acc
            elif k in terms:
                del terms[k]
        return MultiLaurent(a.ring, terms)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Cyclotomic6)):
            if not other:
                return MultiLaurent(self.ring, {})
            return MultiLaurent(self.ring, {k: c * other for k, c in self.terms.items()})
        if isinstance(other, RatScalar):
            return RatScalar(self, self.ring.one()) * other
        if not isinstance(other, MultiLaurent):
            return NotImplemented
        a, b = unify(self, other)
        if len(a.terms) < len(b.terms):
            a, b = b, a
        zero_key = a.ring.zero_key
        result = {}
        a_items = list(a.terms.items())
        for kb, cb in b.terms.items():
            shift = kb - zero_key
            for ka, ca in a_items:
                k = ka + shift
                acc = result.get(k, 0) + ca * cb
                if acc:
                    result[k] = acc
                elif k in result:
                    del result[k]
        return MultiLaurent(a.ring, result)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            inv = self.monomial_inverse()
            return inv ** (-e)
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Cyclotomic6)):
            if not other:
                raise AlgebraError("zero denominator")
            return MultiLaurent(self.ring, {k: _exact_div_scalar(c, other) for k, c in self.terms.items()})
        if isinstance(other, MultiLaurent):
            return RatScalar(self, other)
        if isinstance(other, RatScalar):
            return RatScalar(self, self.ring.one()) / other
        return NotImplemented

    def __rtruediv__(self, other):
        return RatScalar(self.ring.const(other) if isinstance(other, (int, Fraction, Cyclotomic6)) else other, self)

    def monomial_inverse(self):
        if len(self.terms) != 1:
            raise AlgebraError("only monomials are invertible in the Laurent ring")
        ((k, c),) = self.terms.items()
        zk = self.ring.zero_key
        return MultiLaurent(self.ring, {2 * zk - k: _exact_div_scalar(1, c)})

    def map_coefficients(self, fn):
        terms = {}
        for k, c in self.terms.items():
            v = fn(c)
            if v:
                terms[k] = v
        return MultiLaurent(self.ring, terms)

    # --- variable surgery ---------------------------------------------------

    def extend_to(self, ring):
        """Re-embed into a ring whose variable list contains ours."""
        old = self.ring
        positions = [ring.index[v] for v in old.vars]
        terms = {}
        for k, c in self.terms.items():
            exps = old.unpack(k)
            key = ring.zero_key
            for pos, e in zip(positions, exps):
                key += e << (_WIDTH * pos)
            terms[key] = c
        return MultiLaurent(ring, terms)

    def swap_vars(self, v1, v2):
        ring = self.ring
        i, j = ring.index[v1], ring.index[v2]
        ui, uj = ring.units[i], ring.units[j]
        terms = {}
        for k, c in self.terms.items():
            ei = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
            ej = ((k >> (_WIDTH * j)) & _MASK) - _OFFSET
            terms[k + (ej - ei) * ui + (ei - ej) * uj] = c
        return MultiLaurent(ring, terms)

    def invert_var(self, v):
        """Substitute v -> 1/v."""
        ring = self.ring
        i = ring.index[v]
        ui = ring.units[i]
        terms = {}
        for k, c in self.terms.items():
            e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
            terms[k - 2 * e * ui] = c
        return MultiLaurent(ring, terms)

    def substitute_var_monomial(self, v, monomial):
        """Substitute v -> monomial (a one-term MultiLaurent, e.g. c*u^4*z3).

        Monomial substitutions keep the result inside the Laurent ring.
        """
        if isinstance(monomial, (int, Fraction, Cyclotomic6)):
            return self.eliminate_var(v, monomial)
        if len(monomial.terms) != 1:
            raise AlgebraError("substitution target must be a monomial")
        a, m = unify(self, monomial)
        ring = a.ring
        ((mk, mc),) = m.terms.items()
        i = ring.index[v]
        ui = ring.units[i]
        mshift = mk - ring.zero_key
        terms = {}
        powers = {}
        for k, c in a.terms.items():
            e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
            if e not in powers:
                powers[e] = _scalar_pow(mc, e)
            nk = k - e * ui + e * mshift
            acc = terms.get(nk, 0) + c * powers[e]
            if acc:
                terms[nk] = acc
            elif nk in terms:
                del terms[nk]
        return MultiLaurent(ring, terms)

    def eliminate_var(self, v, value):
        """Substitute a scalar value for v and drop v from the ring."""
        old = self.ring
        i = old.index[v]
        new_ring = LaurentRing(tuple(n for n in old.vars if n != v))
        powers = {}
        terms = {}
        for k, c in self.terms.items():
            exps = old.unpack(k)
            e = exps[i]
            if e not in powers:
                powers[e] = _scalar_pow(value, e)
            nk = new_ring.pack(exps[:i] + exps[i + 1:])
            acc = terms.get(nk, 0) + c * powers[e]
            if acc:
                terms[nk] = acc
            elif nk in terms:
                del terms[nk]
        return MultiLaurent(new_ring, terms)

    def evaluate(self, assignment):
        """Evaluate with every variable bound to an exact scalar."""
        ring = self.ring
        missing = [v for v in ring.vars if v not in assignment]
        if missing:
            raise AlgebraError(f"unbound variables {missing}")
        values = [assignment[v] for v in ring.vars]
        total = 0
        power_cache = [{} for _ in values]
        for k, c in self.terms.items():
            acc = c
            for i in range(ring.nvars):
                e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
                if e:
                    cache = power_cache[i]
                    if e not in cache:
                        cache[e] = _scalar_pow(values[i], e)
                    acc = acc * cache[e]
            total = acc + total
        return total

    def substitute(self, bindings):
        """General substitution; values may be scalars, monomials or RatScalar.

        Monomial bindings stay in the Laurent ring; anything else promotes the
        result to RatScalar.  Unbound variables pass through.
        """
        result = self
        general = {}
        for v, val in bindings.items():
            if v not in result.ring.index:
                continue
            if isinstance(val, MultiLaurent) and len(val.terms) == 1:
                result = result.substitute_var_monomial(v, val)
            elif isinstance(val, (int, Fraction, Cyclotomic6)):
                result = result.eliminate_var(v, val)
            else:
                general[v] = val
        if not general:
            return result
        # slow generic path through the fraction field
        ring = result.ring
        try:
            acc = RatScalar(ring.zero(), ring.one())
            for k, c in result.terms.items():
                exps = ring.unpack(k)
                term = RatScalar(ring.const(c), ring.one())
                for v, e in zip(ring.vars, exps):
                    if e == 0:
                        continue
                    if v in general:
                        val = general[v]
                        if not isinstance(val, RatScalar):
                            val = RatScalar(val, val.ring.one())
                        term = term * val ** e
                    else:
                        term = term * RatScalar(ring.var(v, e), ring.one())
                acc = acc + term
        except AlgebraError as exc:
            raise PoleError("pole hit") from exc
        return acc

    # --- degrees ------------------------------------------------------------

    def degree_profile(self, v):
        """(min, max) exponent of variable v across all terms."""
        if not self.terms:
            raise AlgebraError("degree of zero")
        i = self.ring.index[v]
        lo = hi = None
        for k in self.terms:
            e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
            if lo is None or e < lo:
                lo = e
            if hi is None or e > hi:
                hi = e
        return lo, hi

    def total_degree_profile(self, names):
        """(min, max) of the summed exponents over the given variables."""
        if not self.terms:
            raise AlgebraError("degree of zero")
        idx = [self.ring.index[v] for v in names]
        lo = hi = None
        for k in self.terms:
            tot = 0
            for i in idx:
                tot += ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
            if lo is None or tot < lo:
                lo = tot
            if hi is None or tot > hi:
                hi = tot
        return lo, hi

    # --- division -----------------------------------------------------------

    def exact_div(self, g):
        """Quotient self / g if the division is exact, else None."""
        if isinstance(g, (int, Fraction, Cyclotomic6)):
            return self / g
        f, g = unify(self, g)
        if g.is_zero():
            raise AlgebraError("zero denominator")
        if f.is_zero():
            return f
        ring = f.ring
        n = ring.nvars
        # shift both dividend and divisor so each has min exponent 0 per var
        def min_shift(p):
            mins = [None] * n
            for k in p.terms:
                for i in range(n):
                    e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
                    if mins[i] is None or e < mins[i]:
                        mins[i] = e
            shift = sum(m << (_WIDTH * i) for i, m in enumerate(mins))
            return {k - shift: c for k, c in p.terms.items()}, shift

        fterms, fshift = min_shift(f)
        gterms, gshift = min_shift(g)
        order = ring.order_tuple
        glead = max(gterms, key=order)
        glc = gterms[glead]
        gtail = [(k - glead, c) for k, c in gterms.items() if k != glead]
        quot = {}
        rem = dict(fterms)
        heap = []
        for k in rem:
            d, e = order(k)
            heap.append((-d, tuple(-x for x in e), k))
        heapq.heapify(heap)
        zero_key = ring.zero_key
        while heap:
            _, _, k = heapq.heappop(heap)
            c = rem.get(k)
            if not c:
                rem.pop(k, None)
                continue
            mk = k - glead + zero_key  # quotient monomial (packed, offset form)
            # exactness requires every exponent of the quotient monomial >= 0
            ok = True
            for i in range(n):
                if ((mk >> (_WIDTH * i)) & _MASK) < _OFFSET:
                    ok = False
                    break
            if not ok:
                return None
            qc = _exact_div_scalar(c, glc)
            quot[mk] = qc
            del rem[k]
            mshift = mk - zero_key
            for gk, gc in gtail:
                nk = k + gk
                existed = nk in rem
                acc = rem.get(nk, 0) - qc * gc
                if acc:
                    rem[nk] = acc
                    if not existed:
                        d, e = order(nk)
                        heapq.heappush(heap, (-d, tuple(-x for x in e), nk))
                elif existed:
                    del rem[nk]
        if rem:
            return None
        # undo the shifts: f/g = (f'/g') * x^(fshift - gshift)
        delta = fshift - gshift
        return MultiLaurent(ring, {k + delta: c for k, c in quot.items()})

    def divisible_by(self, g):
        return self.exact_div(g) is not None

    # --- serialization / display ---------------------------------------------

    def to_json(self):
        terms = []
        for exps, c in self.sorted_terms():
            terms.append({"exp": list(exps), "coeff": _coeff_to_json(c)})
        return {"vars": list(self.ring.vars), "terms": terms}

    @staticmethod
    def from_json(data):
        ring = LaurentRing(tuple(data["vars"]))
        terms = {}
        for t in data["terms"]:
            c = _coeff_from_json(t["coeff"])
            if c:
                terms[ring.pack(tuple(t["exp"]))] = c
        return MultiLaurent(ring, terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            factors = []
            for v, e in zip(self.ring.vars, exps):
                if e == 1:
                    factors.append(v)
                elif e != 0:
                    factors.append(f"{v}^{e}")
            mono = "*".join(factors)
            if isinstance(c, Cyclotomic6):
                cs = f"({c})"
            else:
                cs = str(c)
            if mono:
                term = mono if cs == "1" else (f"-{mono}" if cs == "-1" else f"{cs}*{mono}")
            else:
                term = cs
            parts.append(term)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        s = str(self)
        return s if len(s) <= 120 else f"<MultiLaurent {len(self.terms)} terms over {self.ring.vars}>"


def _coeff_to_json(c):
    if isinstance(c, Cyclotomic6):
        return {"a0": _coeff_to_json(Fraction(c.a0)), "a1": _coeff_to_json(Fraction(c.a1))}
    f = Fraction(c)
    return {"num": str(f.numerator), "den": str(f.denominator)}


def _coeff_from_json(d):
    if "a0" in d:
        return Cyclotomic6(_coeff_from_json(d["a0"]), _coeff_from_json(d["a1"]))
    f = Fraction(int(d["num"]), int(d["den"]))
    return int(f) if f.denominator == 1 else f


class RatScalar:
    """Normalized fraction of MultiLaurent values.

    Normalization: cancel common monomial factors, reduce to a polynomial when
    the denominator divides the numerator exactly (and the mirror case), and
    scale so the denominator's leading coefficient is one.  Full multivariate
    gcd reduction is deliberately not attempted; equality tests cross-multiply
    and are therefore independent of the normal form.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        if isinstance(num, (int, Fraction, Cyclotomic6)):
            if isinstance(den, MultiLaurent):
                num = den.ring.const(num)
            else:
                raise TypeError("RatScalar needs at least one MultiLaurent")
        if isinstance(den, (int, Fraction, Cyclotomic6)):
            den = num.ring.const(den)
        num, den = unify(num, den)
        if den.is_zero():
            raise AlgebraError("zero denominator")
        self.num, self.den = self._normalize(num, den)

    @staticmethod
    def _normalize(num, den):
        ring = num.ring
        if num.is_zero():
            return num, ring.one()
        # cancel common monomial content (joint minimum exponent -> 0 per var)
        n = ring.nvars
        shift = 0
        for i in range(n):
            lo = None
            for k in num.terms:
                e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
                if lo is None or e < lo:
                    lo = e
            for k in den.terms:
                e = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
                if e < lo:
                    lo = e
            shift += lo << (_WIDTH * i)
        if shift:
            num = MultiLaurent(ring, {k - shift: c for k, c in num.terms.items()})
            den = MultiLaurent(ring, {k - shift: c for k, c in den.terms.items()})
        if den.is_monomial():
            ((dk, dc),) = den.terms.items()
            zk = ring.zero_key
            inv = _exact_div_scalar(1, dc)
            num = MultiLaurent(ring, {k - (dk - zk): c * inv for k, c in num.terms.items()})
            return num, ring.one()
        q = num.exact_div(den)
        if q is not None:
            return q, ring.one()
        q = den.exact_div(num)
        if q is not None:
            # num/den = 1/q
            _, lc = q.leading()
            inv = _exact_div_scalar(1, lc)
            return ring.const(inv), q * inv
        _, lc = den.leading()
        if lc != 1:
            inv = _exact_div_scalar(1, lc)
            num = num * inv
            den = den * inv
        return num, den

    def is_polynomial(self):
        return self.den.is_constant()

    def to_poly(self):
        if not self.is_polynomial():
            raise AlgebraError("value has a nontrivial denominator")
        return self.num / self.den.constant_value()

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    @staticmethod
    def _coerce(x, like):
        if isinstance(x, RatScalar):
            return x
        if isinstance(x, MultiLaurent):
            return RatScalar(x, x.ring.one())
        return RatScalar(like.num.ring.const(x), like.num.ring.one())

    def __add__(self, other):
        other = self._coerce(other, self)
        return RatScalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatScalar(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other, self))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other, self)
        return RatScalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other, self)
        if other.num.is_zero():
            raise AlgebraError("zero denominator")
        return RatScalar(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other, self) / self

    def __pow__(self, e):
        if e < 0:
            if self.num.is_zero():
                raise AlgebraError("zero denominator")
            return RatScalar(self.den, self.num) ** (-e)
        return RatScalar(self.num ** e, self.den ** e)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Cyclotomic6, MultiLaurent)):
            other = self._coerce(other, self)
        if not isinstance(other, RatScalar):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def __str__(self):
        if self.is_polynomial():
            return str(self.to_poly())
        return f"({self.num}) / ({self.den})"

    __repr__ = __str__


# --- integer-packed univariate coefficients ----------------------------------

_SLOT = 64
_SMASK = (1 << _SLOT) - 1
_SHALF = 1 << (_SLOT - 1)
_CBOUND = 1 << 50  # sanity bound: balanced-digit packing is unique below 2^63


class UPoly:
    """Laurent polynomial in one symbol (u) packed into a single integer.

    Slot t of ``val`` (64 bits, balanced digits) holds the coefficient of
    u^(off + t).  Addition and multiplication of polynomials are then plain
    integer addition and multiplication, which makes this the fast coefficient
    domain for the difference-equation solver; coefficients must stay far
    below 2^63 for the packing to remain faithful, which ``to_coeffs``
    asserts whenever values are unpacked.  Integer coefficients only.
    """

    __slots__ = ("val", "off")

    def __init__(self, val=0, off=0):
        if val == 0:
            off = 0
        else:
            while val & _SMASK == 0:
                val >>= _SLOT
                off += 1
        self.val = val
        self.off = off

    @staticmethod
    def mono(exp=0, coeff=1):
        if coeff == 0:
            return _UPOLY_ZERO
        return UPoly(coeff, exp)

    @staticmethod
    def from_coeffs(coeffs):
        items = [(e, c) for e, c in coeffs.items() if c]
        if not items:
            return _UPOLY_ZERO
        off = min(e for e, _ in items)
        val = 0
        for e, c in items:
            val += c << (_SLOT * (e - off))
        return UPoly(val, off)

    def to_coeffs(self):
        """Unpack to {exponent: int}; asserts the faithfulness bound."""
        out = {}
        v = self.val
        t = self.off
        while v:
            low = v & _SMASK
            c = low - (1 << _SLOT) if low >= _SHALF else low
            if c:
                if not -_CBOUND < c < _CBOUND:
                    raise AlgebraError("packed coefficient out of faithful range")
                out[t] = c
            v = (v - c) >> _SLOT
            t += 1
        return out

    def __bool__(self):
        return self.val != 0

    def __eq__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self.val == 0
            other = UPoly(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        return self.val == other.val and self.off == other.off

    __hash__ = None

    def __neg__(self):
        return UPoly(-self.val, self.off)

    def __add__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self
            other = UPoly(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        if self.val == 0:
            return other
        if other.val == 0:
            return self
        if self.off <= other.off:
            return UPoly(self.val + (other.val << (_SLOT * (other.off - self.off))), self.off)
        return UPoly(other.val + (self.val << (_SLOT * (self.off - other.off))), other.off)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = UPoly(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return _UPOLY_ZERO
            return UPoly(self.val * other, self.off)
        if not isinstance(other, UPoly):
            return NotImplemented
        if self.val == 0 or other.val == 0:
            return _UPOLY_ZERO
        return UPoly(self.val * other.val, self.off + other.off)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        out = UPoly(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self):
        coeffs = self.to_coeffs()
        if len(coeffs) != 1:
            raise AlgebraError("only monomials are invertible")
        ((e, c),) = coeffs.items()
        if c not in (1, -1):
            raise AlgebraError("only unit-coefficient monomials are invertible over Z")
        return UPoly.mono(-e, c)

    def exact_div(self, g):
        """Exact quotient by another UPoly, or None; quotient is bound-checked."""
        if self.val == 0:
            return _UPOLY_ZERO
        if g.val == 0:
            raise AlgebraError("zero denominator")
        q, r = divmod(self.val, g.val)
        if r:
            return None
        h = UPoly(q, self.off - g.off)
        h.to_coeffs()  # faithfulness check
        return h

    def evaluate(self, x):
        total = 0
        for e, c in self.to_coeffs().items():
            total = _scalar_pow(x, e) * c + total
        return total

    def u_range(self):
        coeffs = self.to_coeffs()
        if not coeffs:
            raise AlgebraError("degree of zero")
        return min(coeffs), max(coeffs)

    def __repr__(self):
        coeffs = self.to_coeffs()
        if not coeffs:
            return "0"
        parts = []
        for e in sorted(coeffs, reverse=True):
            c = coeffs[e]
            mono = "" if e == 0 else ("u" if e == 1 else f"u^{e}")
            if mono:
                parts.append(mono if c == 1 else (f"-{mono}" if c == -1 else f"{c}*{mono}"))
            else:
                parts.append(str(c))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


_UPOLY_ZERO = UPoly(0, 0)


def pack_u_coefficients(poly, uvar="u"):
    """Standard form -> packed form: move the uvar dependence into UPoly coefficients."""
    old = poly.ring
    i = old.index[uvar]
    new_ring = LaurentRing(tuple(v for v in old.vars if v != uvar))
    terms = {}
    for k, c in poly.terms.items():
        exps = old.unpack(k)
        nk = new_ring.pack(exps[:i] + exps[i + 1:])
        add = UPoly.mono(exps[i], c)
        acc = terms.get(nk)
        acc = add if acc is None else acc + add
        if acc:
            terms[nk] = acc
        elif nk in terms:
            del terms[nk]
    return MultiLaurent(new_ring, terms)


def unpack_u_coefficients(poly, ring, uvar="u"):
    """Packed form -> standard form in the given ring (which must contain uvar)."""
    ui = ring.index[uvar]
    positions = [ring.index[v] for v in poly.ring.vars]
    terms = {}
    for k, c in poly.terms.items():
        exps = poly.ring.unpack(k)
        base = ring.zero_key
        for pos, e in zip(positions, exps):
            base += e << (_WIDTH * pos)
        ucoeffs = c.to_coeffs() if isinstance(c, UPoly) else {0: c}
        for ue, uc in ucoeffs.items():
            terms[base + (ue << (_WIDTH * ui))] = uc
    return MultiLaurent(ring, terms)


# --- divided differences ----------------------------------------------------


def divided_difference(f, v1, v2):
    """(f with v1<->v2 swapped minus f) / (v2 - v1), computed termwise.

    For a monomial v1^a v2^b m the closed form of the quotient is a geometric
    sum, so the division is exact by construction and never materializes the
    intermediate numerator.
    """
    ring = f.ring
    i, j = ring.index[v1], ring.index[v2]
    ui, uj = ring.units[i], ring.units[j]
    result = {}
    for k, c in f.terms.items():
        a = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
        b = ((k >> (_WIDTH * j)) & _MASK) - _OFFSET
        if a == b:
            continue
        if a < b:
            d = b - a
            sign_c = -c
            base = k - d * uj  # v1^a v2^a * m
        else:
            d = a - b
            sign_c = c
            base = k - d * ui
        # (v2^d - v1^d)/(v2 - v1) = sum_t v1^t v2^(d-1-t)
        for t in range(d):
            nk = base + t * ui + (d - 1 - t) * uj
            acc = result.get(nk, 0) + sign_c
            if acc:
                result[nk] = acc
            elif nk in result:
                del result[nk]
    return MultiLaurent(ring, result)


def tilde_difference(f, v):
    """(f(1/v) - f(v)) / (1/v - v), exact termwise geometric sums."""
    ring = f.ring
    i = ring.index[v]
    ui = ring.units[i]
    result = {}
    for k, c in f.terms.items():
        a = ((k >> (_WIDTH * i)) & _MASK) - _OFFSET
        if a == 0:
            continue
        if a > 0:
            d, sign_c = a, c
        else:
            d, sign_c = -a, -c
        base = k - a * ui
        # (v^-d - v^d)/(1/v - v) applied to v^d: exponents 1-d, 3-d, ..., d-1
        for t in range(d):
            nk = base + (1 - d + 2 * t) * ui
            acc = result.get(nk, 0) + sign_c
            if acc:
                result[nk] = acc
            elif nk in result:
                del result[nk]
    return MultiLaurent(ring, result)


def site_divided_difference(f, i):
    """Divided difference acting on the spectral variables z_i, z_{i+1}."""
    return divided_difference(f, f"z{i}", f"z{i + 1}")


def site_tilde_difference(f, L):
    return tilde_difference(f, f"z{L}")
