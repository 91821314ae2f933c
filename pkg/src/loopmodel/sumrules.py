"""Component sums at the stochastic point and their character evaluations.

At u = eps (q = omega, loop weight 1) the sum of all solution components,

    Z_L(z_1, ..., z_L) = sum_pi Psi_pi,

is a symmetric Laurent polynomial, invariant under z_i -> 1/z_i, and factors
as chi_L(z_1..z_L) * chi_{L+1}(z_1..z_L, zeta) where chi_n is the symplectic
character built on the exponent ladder h_j = j + ceil(j/2) - 1:

    chi_n = det(z_i^{h_j} - z_i^{-h_j}) / det(z_i^j - z_i^-j).

This module provides the exact character arithmetic (symbolic for n <= 6 via
the factored Weyl denominator, pointwise via determinant ratios, homogeneous
via the Weyl dimension product), the size recurrence of Z_L, the doubly
symmetric alternating-sign-matrix counting products, the one-row Schur
identity used for the refined density, and the refined density itself.

Sampled factorization checks do not go through the polynomial solution at
all: at each exact point the state vector is recovered independently as the
common eigenvector of the scattering matrices (eigenvalue one), normalized by
the explicitly evaluated seed component.
"""

from __future__ import annotations

from fractions import Fraction
from math import ceil, comb, factorial

from .errors import AlgebraError, VerificationError
from .laurent import EPS, Cyclotomic6, LaurentRing, MultiLaurent, UPoly
from .linkpatterns import enumerate_patterns
from .operators import Scalars, apply_scattering, basis_vectors, vec_equal
from .qkz import QkzSolution, base_component

OMEGA = Cyclotomic6.omega()


def symplectic_exponents(n):
    """h_j = j + ceil(j/2) - 1: the ladder 1, 2, 4, 5, 7, 8, ..."""
    return [j + (j + 1) // 2 - 1 for j in range(1, n + 1)]


# --- stochastic specialization and the sum rule ---------------------------------


def stochastic_components(sol: QkzSolution):
    """Components at u = eps, as Laurent polynomials over Q(eps)."""
    if sol.packed:
        return {
            p: c.map_coefficients(lambda v: v.evaluate(EPS) if isinstance(v, UPoly) else Cyclotomic6(v))
            for p, c in sol.components.items()
        }
    return {p: c.eliminate_var("u", EPS) for p, c in sol.components.items()}


def sum_rule(sol: QkzSolution):
    """Z_L = sum of all components at the stochastic point."""
    comps = stochastic_components(sol)
    total = None
    for c in comps.values():
        total = c if total is None else total + c
    return total


def check_sum_rule_symmetries(z):
    """Z is symmetric in consecutive swaps and invariant under z_i -> 1/z_i."""
    names = [v for v in z.ring.vars if v.startswith("z")]
    for a, b in zip(names, names[1:]):
        if not z.swap_vars(a, b) == z:
            return False
    return all(z.invert_var(v) == z for v in names)


# --- symplectic characters -------------------------------------------------------


def _det_permutation_expansion(entries, n):
    """Determinant by signed permutation sums; entries[i][j] are ring elements."""
    import itertools

    total = None
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = [False] * n
        for start in range(n):
            if seen[start]:
                continue
            length = 0
            k = start
            while not seen[k]:
                seen[k] = True
                k = perm[k]
                length += 1
            if length % 2 == 0:
                sign = -sign
        term = entries[0][perm[0]]
        for i in range(1, n):
            term = term * entries[i][perm[i]]
        term = term * sign
        total = term if total is None else total + term
    return total


def chi_symbolic(n, names=None):
    """chi_n as an exact Laurent polynomial (practical for n <= 6).

    The Weyl denominator is divided out in factored form:
    prod_i (z_i - 1/z_i) * prod_{i<j} (z_i + 1/z_i - z_j - 1/z_j).
    """
    if names is None:
        names = tuple(f"z{i}" for i in range(1, n + 1))
    ring = LaurentRing(tuple(names))
    hs = symplectic_exponents(n)
    entries = [
        [ring.var(names[i], hs[j]) - ring.var(names[i], -hs[j]) for j in range(n)]
        for i in range(n)
    ]
    num = _det_permutation_expansion(entries, n)
    result = num
    for i in range(n):
        result = result.exact_div(ring.var(names[i]) - ring.var(names[i], -1))
        if result is None:
            raise AlgebraError("Weyl denominator zero")
    for i in range(n):
        for j in range(i + 1, n):
            factor = (ring.var(names[i]) + ring.var(names[i], -1)
                      - ring.var(names[j]) - ring.var(names[j], -1))
            result = result.exact_div(factor)
            if result is None:
                raise AlgebraError("Weyl denominator zero")
    # the factored denominator matches det(z_i^j - z_i^-j) up to a sign
    check = result.evaluate({v: Fraction(k + 2) for k, v in enumerate(names)})
    ref = chi_numeric(n, [Fraction(k + 2) for k in range(n)])
    if check == ref:
        return result
    if check == -ref:
        return -result
    raise AlgebraError("factored Weyl denominator mismatch")


def _det_gauss(matrix):
    """Exact determinant by fraction-free-ish Gaussian elimination over a field."""
    n = len(matrix)
    m = [row[:] for row in matrix]
    det = 1
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if m[r][col]:
                pivot = r
                break
        if pivot is None:
            return 0 * det
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        pv = m[col][col]
        det = det * pv
        inv = 1 / pv if not isinstance(pv, Cyclotomic6) else pv.inverse()
        for r in range(col + 1, n):
            if not m[r][col]:
                continue
            factor = m[r][col] * inv
            m[r] = [m[r][j] - factor * m[col][j] for j in range(n)]
    return det


def _power(x, e):
    if e >= 0:
        return x ** e
    if isinstance(x, Cyclotomic6):
        return x.inverse() ** (-e)
    return (Fraction(1) / Fraction(x)) ** (-e)


def chi_numeric(n, points):
    """chi_n at exact points via the determinant ratio."""
    if len(points) != n:
        raise AlgebraError(f"need {n} evaluation points")
    hs = symplectic_exponents(n)
    num = [[_power(z, h) - _power(z, -h) for h in hs] for z in points]
    den = [[_power(z, j) - _power(z, -j) for j in range(1, n + 1)] for z in points]
    d = _det_gauss(den)
    if not d:
        raise AlgebraError("Weyl denominator zero")
    inv = d.inverse() if isinstance(d, Cyclotomic6) else Fraction(1) / Fraction(d)
    return _det_gauss(num) * inv


def chi_homogeneous(n):
    """chi_n(1, ..., 1) by the Weyl dimension product."""
    hs = symplectic_exponents(n)
    out = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            out *= Fraction(hs[j] - hs[i], j - i)
        for j in range(i, n):
            out *= Fraction(hs[i] + hs[j], (i + 1) + (j + 1))
    return out


def chi_scaled_homogeneous(n):
    """chi_n(1,...,1) / 3^ceil(n(n-2)/4): the integer sequence 1,1,2,3,11,26,170,..."""
    scaled = chi_homogeneous(n) / Fraction(3) ** ceil(n * (n - 2) / 4)
    if scaled.denominator != 1:
        raise VerificationError("scaled homogeneous character value is not an integer")
    return int(scaled)


def chi_recurrence_check(n, sampler, count=5):
    """chi_n at z_n = q^2 z_{n-1} reduces to chi_{n-2} times explicit factors."""
    q = OMEGA
    for _ in range(count):
        pts = [Cyclotomic6(v) for v in sampler.distinct(n - 1, exclude_abs_one=True)]
        zn = q * q * pts[-1]
        lhs = chi_numeric(n, pts + [zn])
        rhs = chi_numeric(n - 2, pts[:-1]) if n - 2 >= 1 else Cyclotomic6(1)
        for zi in pts[:-1]:
            rhs = rhs * (Cyclotomic6(1) - q * pts[-1] * zi.inverse())
            rhs = rhs * (zi - q * q * pts[-1].inverse())
        if not lhs == rhs:
            return False
    return True


# --- counting products ------------------------------------------------------------


def hvsasm_count(L):
    """Number of doubly symmetric alternating-sign matrices of size 2L+3."""
    if L < 0:
        raise AlgebraError("size must be >= 0")
    out = Fraction(1)
    for k in range(1, L + 1):
        out *= Fraction((3 * k) // 2 + 1) * factorial(3 * k) * factorial(k)
        out /= Fraction(factorial(2 * k + 1)) * factorial(2 * k)
    if out.denominator != 1:
        raise VerificationError("counting product is not an integer")
    return int(out)


def homogeneous_sum(sol: QkzSolution):
    """3^(-L(L-1)/2) Z_L(1, ..., 1; zeta = 1), as an exact rational."""
    total = Cyclotomic6(0)
    for c in stochastic_components(sol).values():
        assign = {v: 1 for v in c.ring.vars}
        total = total + c.evaluate(assign)
    if not total.is_rational():
        raise VerificationError("homogeneous sum is not rational")
    value = total.to_fraction() / Fraction(3) ** (sol.L * (sol.L - 1) // 2)
    return value


# --- factorization of the sum rule -------------------------------------------------


def verify_zdet_symbolic(sol: QkzSolution):
    """Z_L == chi_L(z) * chi_{L+1}(z, zeta) as exact Laurent polynomials."""
    L = sol.L
    z = sum_rule(sol)
    znames = tuple(f"z{i}" for i in range(1, L + 1))
    product = chi_symbolic(L, znames).extend_to(z.ring) \
        * chi_symbolic(L + 1, znames + ("zeta",)).extend_to(z.ring)
    return z == product.map_coefficients(Cyclotomic6)


def scattering_state_at_point(L, zs, zeta_value):
    """The common eigenvector of all S_i at an exact stochastic point.

    Returns the vector normalized so the fully-unpaired component is 1;
    raises if the fixed space is not one-dimensional.  This route never uses
    the polynomial solution, so it is an independent oracle for Z_L.
    """
    sc = Scalars(OMEGA, Cyclotomic6(zeta_value))
    s = Cyclotomic6(1)
    patterns = enumerate_patterns(L)
    index = {p: i for i, p in enumerate(patterns)}
    dim = len(patterns)
    rows = []
    zs_c = [Cyclotomic6(v) for v in zs]
    for i in range(1, L):
        columns = {}
        for p, v in basis_vectors(L).items():
            columns[p] = apply_scattering(i, zs_c, s, v, sc)
        for r in range(dim):
            row = []
            for p in patterns:
                entry = columns[p].get(patterns[r], Cyclotomic6(0))
                if p == patterns[r]:
                    entry = entry - Cyclotomic6(1)
                row.append(entry)
            rows.append(row)
    # nullspace over Q(eps) by Gaussian elimination
    ncols = dim
    pivots = {}
    reduced = []
    for row in rows:
        row = row[:]
        for col, (prow, pinv) in pivots.items():
            if row[col]:
                factor = row[col] * pinv
                row = [row[j] - factor * prow[j] for j in range(ncols)]
        lead = next((j for j in range(ncols) if row[j]), None)
        if lead is not None:
            pivots[lead] = (row, row[lead].inverse())
            reduced.append(row)
    free = [j for j in range(ncols) if j not in pivots]
    if len(free) != 1:
        raise VerificationError(f"scattering fixed space has dimension {len(free)}")
    vec = [Cyclotomic6(0)] * ncols
    vec[free[0]] = Cyclotomic6(1)
    for col in sorted(pivots, reverse=True):
        prow, pinv = pivots[col]
        acc = Cyclotomic6(0)
        for j in range(col + 1, ncols):
            if prow[j]:
                acc = acc + prow[j] * vec[j]
        vec[col] = -acc * pinv
    empty = vec[index["." * L]]
    if not empty:
        raise VerificationError("degenerate normalization in scattering state")
    inv = empty.inverse()
    return {p: vec[index[p]] * inv for p in patterns}


def sum_rule_at_point(L, zs, zeta_value):
    """Z_L at an exact point through the scattering-eigenvector route."""
    state = scattering_state_at_point(L, zs, zeta_value)
    base = base_component(L) if L > 1 else None
    if base is None:
        seed = Cyclotomic6(1)
    else:
        assign = {f"z{i}": zs[i - 1] for i in range(1, L + 1)}
        assign["u"] = EPS
        assign["zeta"] = Cyclotomic6(zeta_value)
        seed = base.evaluate(assign)
        if not isinstance(seed, Cyclotomic6):
            seed = Cyclotomic6(seed)
    total = Cyclotomic6(0)
    for value in state.values():
        total = total + value
    return total * seed


def verify_zdet_sampled(L, sampler, count=10):
    """Z_L(point) == chi_L(point) chi_{L+1}(point, zeta) at seeded exact points."""
    for _ in range(count):
        zs = sampler.distinct(L, exclude_abs_one=True)
        zeta_value = sampler.nonzero(exclude_abs_one=True)
        lhs = sum_rule_at_point(L, zs, zeta_value)
        rhs = chi_numeric(L, zs) * chi_numeric(L + 1, zs + [zeta_value])
        if not lhs == rhs:
            return False, {"z": [str(v) for v in zs], "zeta": str(zeta_value)}
    return True, None


def recurrence_factor_stochastic(L, ring):
    """The factor in Z_L|_{z_L = q^2 z_{L-1}} = factor * Z_{L-2}."""
    q = OMEGA
    zL1 = ring.var(f"z{L-1}")
    zL1inv = ring.var(f"z{L-1}", -1)
    zeta = ring.var("zeta")
    zetainv = ring.var("zeta", -1)
    one = ring.one()
    out = (one - zL1 * zetainv * q) * (zeta - zL1inv * (q * q))
    for i in range(1, L - 1):
        zi = ring.var(f"z{i}")
        ziinv = ring.var(f"z{i}", -1)
        f1 = one - zL1 * ziinv * q
        f2 = zi - zL1inv * (q * q)
        out = out * f1 * f1 * f2 * f2
    return out


def verify_recz(sol_L: QkzSolution, sol_Lm2: QkzSolution):
    """The size recurrence of the sum rule, as an exact identity."""
    L = sol_L.L
    zL = sum_rule(sol_L)
    zLm2 = sum_rule(sol_Lm2)
    ring = zL.ring
    q2 = OMEGA * OMEGA
    spec = zL.substitute_var_monomial(f"z{L}", ring.var(f"z{L-1}") * q2)
    expected = recurrence_factor_stochastic(L, ring) * zLm2.extend_to(ring)
    return spec == expected


# --- one-row Schur identity and the refined density --------------------------------


def complete_homogeneous(m, values):
    """h_m(values): brute-force complete homogeneous symmetric polynomial."""
    if m < 0:
        return 0
    table = [Fraction(0)] * (m + 1)
    table[0] = Fraction(1)
    for v in values:
        for k in range(1, m + 1):
            table[k] += v * table[k - 1]
    return table[m]


def schur_sum(n, hs):
    """H_n = sum_i h_i^n / prod_{j != i} (h_j - h_i), exactly.

    Vanishes for n < N-1; for n >= N-1 it equals the one-row Schur value
    s_{n-N+1} up to the alternating prefactor (-1)^(N-1), which is calibrated
    against the brute-force oracle.
    """
    if len(set(hs)) != len(hs):
        raise AlgebraError("ladder values must be pairwise distinct")
    total = Fraction(0)
    for i, hi in enumerate(hs):
        den = Fraction(1)
        for j, hj in enumerate(hs):
            if j != i:
                den *= hj - hi
        total += Fraction(hi) ** n / den
    return total


SCHUR_SIGN_CONVENTION = "H_n = (-1)^(N-1) * s_(n-N+1) for n >= N-1"


def schur_sum_oracle(n, hs):
    """Expected H_n via the calibrated convention and the brute-force Schur value."""
    N = len(hs)
    if n < N - 1:
        return Fraction(0)
    return Fraction(-1) ** (N - 1) * complete_homogeneous(n - N + 1, hs)


def h_square_sum(L):
    """sum_{i=1}^{L+1} (h_i^2 - i^2) and its closed form; both returned."""
    hs = symplectic_exponents(L + 1)
    direct = sum(h * h - i * i for i, h in enumerate(hs, start=1))
    closed = Fraction((L + 1) * (L // 2) * (5 * ((L + 1) // 2) + 2), 3)
    return Fraction(direct), closed


def symplectic_log_second_derivative(L):
    """d^2/dzeta^2 log chi_{L+1}(1,...,1,zeta) at zeta = 1, exactly.

    Needs the symbolic character (practical for L <= 5); the claimed value is
    sum(h_i^2 - i^2) / ((L+1)(2L+3)).
    """
    n = L + 1
    names = tuple(f"x{i}" for i in range(1, n)) + ("zeta",)
    chi = chi_symbolic(n, names)
    for i in range(1, n):
        chi = chi.eliminate_var(f"x{i}", 1)
    coeffs = {}
    for exps, c in chi.sorted_terms():
        coeffs[exps[0]] = c
    f0 = sum(coeffs.values())
    f1 = sum(e * c for e, c in coeffs.items())
    f2 = sum(e * (e - 1) * c for e, c in coeffs.items())
    # d^2/dz^2 log f = f''/f - (f'/f)^2
    value = Fraction(f2, f0) - Fraction(f1, f0) ** 2
    expected = h_square_sum(L)[0] / ((L + 1) * (2 * L + 3))
    return value, expected


def rho_closed_form(L):
    """floor(L/2) (1 - (5 floor((L+1)/2) + 2) / (2(2L+3)))."""
    return (L // 2) * (1 - Fraction(5 * ((L + 1) // 2) + 2, 2 * (2 * L + 3)))


def rho_report(L, a_polynomial):
    """Compare the closed form against d/da log Z_L(a) at a = 1.

    ``a_polynomial`` is the exact component sum of the stochastic ground
    state with the smallest component normalized to a^floor(L/2).
    """
    coeffs = {}
    for exps, c in a_polynomial.sorted_terms():
        coeffs[exps[0]] = c
    z1 = sum(coeffs.values())
    dz1 = sum(e * c for e, c in coeffs.items())
    direct = Fraction(dz1, z1)
    closed = rho_closed_form(L)
    return {
        "L": L,
        "rho_direct": direct,
        "rho_closed": closed,
        "match": direct == closed,
    }


def leading_a_coefficient(L, a_polynomial):
    """Coefficient of a^floor(L/2) in Z_L(a); compared against hvsasm_count(L-1)."""
    target = L // 2
    for exps, c in a_polynomial.sorted_terms():
        if exps[0] == target:
            return c
    return 0


def common_factor_at_zeta0(sol: QkzSolution):
    """Leading coefficients of the components as zeta -> 0, at the stochastic point.

    Checks that the nonzero leading vector develops chi_L(z_1..z_L) as a
    common factor (reported, desk-scale sizes only).
    """
    comps = stochastic_components(sol)
    L = sol.L
    lead_exp = None
    for c in comps.values():
        if c.is_zero():
            continue
        lo, _hi = c.degree_profile("zeta")
        lead_exp = lo if lead_exp is None else min(lead_exp, lo)
    chi = chi_symbolic(L, tuple(f"z{i}" for i in range(1, L + 1)))
    report = {}
    for p, c in comps.items():
        coeff_terms = {}
        ring = c.ring
        zi = ring.index["zeta"]
        for exps, v in c.sorted_terms():
            if exps[zi] == lead_exp:
                reduced = exps[:zi] + exps[zi + 1:]
                coeff_terms[reduced] = v
        names = tuple(n for n in ring.vars if n != "zeta")
        small = LaurentRing(names)
        lead = small.poly(coeff_terms)
        if lead.is_zero():
            report[p] = "zero"
        else:
            chi_lift = chi.extend_to(small).map_coefficients(Cyclotomic6)
            report[p] = "divisible" if lead.divisible_by(chi_lift) else "not divisible"
    return report
