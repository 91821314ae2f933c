"""R- and K-matrices, scattering matrices, and exact identity verifiers.

Operators act on loop vectors, i.e. dicts mapping pattern encodings to exact
scalars (MultiLaurent, Fraction, or Cyclotomic6).  With tau = -q - 1/q:

    R_i(z) = [(q z - 1/q) I + (z - 1) e_i] / (q - z/q)
    K(z)   = [(z - q^2/zeta)(z - zeta/q) I + (1 - q)(1 - z^2) f]
             / [(q z - zeta/q)(z - q/zeta)]

Symbolic identity checks use the numerator ("hatted") operators and track the
scalar denominators separately, which keeps every computation inside the
Laurent ring: both sides of each identity carry the same denominator product,
so the hatted identity is equivalent to the original one.

Identities with more than three strands are checked at seeded exact rational
points; with exact arithmetic a nonzero polynomial can only vanish on a
measure-zero set, and the seed makes every run reproducible.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import PoleError
from .laurent import Cyclotomic6, MultiLaurent, RatScalar
from .linkpatterns import apply_e, apply_f, enumerate_patterns


def inv_scalar(x):
    if isinstance(x, MultiLaurent):
        return x.monomial_inverse()
    if isinstance(x, Cyclotomic6):
        return x.inverse()
    if isinstance(x, RatScalar):
        return 1 / x
    if x == 0:
        raise PoleError("pole hit")
    return Fraction(1, 1) / x


# --- loop vectors -------------------------------------------------------------


def vec_scale(vec, c):
    if not c:
        return {}
    return {p: coeff * c for p, coeff in vec.items()}


def vec_add(*vecs):
    out = {}
    for v in vecs:
        for p, c in v.items():
            acc = out.get(p, 0) + c
            if acc:
                out[p] = acc
            elif p in out:
                del out[p]
    return out

def vec_sub(a, b):
    return vec_add(a, vec_scale(b, -1))


def vec_equal(a, b):
    for p in set(a) | set(b):
        diff = a.get(p, 0) - b.get(p, 0)
        if diff:
            return False
    return True


def apply_e_vec(i, vec, tau):
    out = {}
    for p, c in vec.items():
        target, loops = apply_e(i, p)
        w = c * tau if loops else c
        acc = out.get(target, 0) + w
        if acc:
            out[target] = acc
        elif target in out:
            del out[target]
    return out


def apply_f_vec(vec):
    out = {}
    for p, c in vec.items():
        target, _ = apply_f(p)
        acc = out.get(target, 0) + c
        if acc:
            out[target] = acc
        elif target in out:
            del out[target]
    return out


def basis_vectors(L):
    return {p: {p: 1} for p in enumerate_patterns(L)}


# --- hatted (numerator) operators and their denominators -----------------------


def r_hat(i, z, vec, q, qinv, tau):
    """[(q z - 1/q) I + (z - 1) e_i] applied to vec."""
    return vec_add(vec_scale(vec, q * z - qinv), vec_scale(apply_e_vec(i, vec, tau), z - 1))


def r_den(z, q, qinv):
    return q - z * qinv


def k_hat(z, vec, q, qinv, zeta, zetainv):
    """[(z - q^2/zeta)(z - zeta/q) I + (1 - q)(1 - z^2) f] applied to vec."""
    c0 = (z - q * q * zetainv) * (z - zeta * qinv)
    c1 = (1 - q) * (1 - z * z)
    return vec_add(vec_scale(vec, c0), vec_scale(apply_f_vec(vec), c1))


def k_den(z, q, qinv, zeta, zetainv):
    return (q * z - zeta * qinv) * (z - q * zetainv)


class Scalars:
    """Bundle of the model scalars in whatever exact domain is in use."""

    def __init__(self, q, zeta, tau=None):
        self.q = q
        self.qinv = inv_scalar(q)
        self.zeta = zeta
        self.zetainv = inv_scalar(zeta)
        self.tau = tau if tau is not None else -(q + self.qinv)


def apply_R(i, z, vec, sc: Scalars):
    """Full R-matrix action; requires the prefactor denominator to be invertible."""
    den = r_den(z, sc.q, sc.qinv)
    if not den:
        raise PoleError("R-matrix pole")
    return vec_scale(r_hat(i, z, vec, sc.q, sc.qinv, sc.tau), inv_scalar(den))


def apply_K(z, vec, sc: Scalars):
    den = k_den(z, sc.q, sc.qinv, sc.zeta, sc.zetainv)
    if not den:
        raise PoleError("K-matrix pole")
    return vec_scale(k_hat(z, vec, sc.q, sc.qinv, sc.zeta, sc.zetainv), inv_scalar(den))


# --- scattering matrices --------------------------------------------------------


def scattering_word(i, zs, s):
    """The ordered factor list of S_i (leftmost factor first).

    ``zs`` maps 1-based site -> spectral value; factors are ('R', site, arg)
    or ('K', arg).  The word encodes a particle travelling left from site i,
    reflecting trivially at the left boundary (parameter inversion only),
    crossing back, reflecting at the right boundary through K, and returning.
    """
    L = len(zs)
    z = {j + 1: zs[j] for j in range(L)}
    zi = z[i]
    word = []
    for j in range(i, L):
        word.append(("R", j, s * zi * inv_scalar(z[j + 1])))
    word.append(("K", inv_scalar(s * zi)))
    for j in range(L - 1, i - 1, -1):
        word.append(("R", j, s * z[j + 1] * zi))
    for j in range(i - 1, 0, -1):
        word.append(("R", j, s * z[j] * zi))
    for j in range(1, i):
        word.append(("R", j, zi * inv_scalar(z[j])))
    return word


def apply_scattering_hat(i, zs, s, vec, sc: Scalars):
    """Apply the numerator word of S_i; returns (vector, denominator product)."""
    word = scattering_word(i, zs, s)
    den = None
    out = vec
    for factor in reversed(word):
        if factor[0] == "R":
            _, site, arg = factor
            out = r_hat(site, arg, out, sc.q, sc.qinv, sc.tau)
            d = r_den(arg, sc.q, sc.qinv)
        else:
            arg = factor[1]
            out = k_hat(arg, out, sc.q, sc.qinv, sc.zeta, sc.zetainv)
            d = k_den(arg, sc.q, sc.qinv, sc.zeta, sc.zetainv)
        den = d if den is None else den * d
    return out, den


def apply_scattering(i, zs, s, vec, sc: Scalars):
    """Exact S_i action for invertible (numeric / rational-scalar) domains."""
    out, den = apply_scattering_hat(i, zs, s, vec, sc)
    if not den:
        raise PoleError("scattering-matrix pole")
    return vec_scale(out, inv_scalar(den))


def scattering_matrix(i, zs, s, sc: Scalars, L=None):
    """Columns of S_i in the canonical basis (dict pattern -> vector)."""
    L = L or len(zs)
    return {p: apply_scattering(i, zs, s, v, sc) for p, v in basis_vectors(L).items()}


# --- identity verifiers -----------------------------------------------------------


def _report(identity, ok, witness=None):
    entry = {"identity": identity, "status": "pass" if ok else "fail"}
    if witness is not None and not ok:
        entry["witness"] = witness
    return entry


def _symbolic_scalars(L, ring):
    u = ring.var("u")
    q = u * u
    return Scalars(q, ring.var("zeta"))


def verify_unitarity_symbolic(L, ring, tau_shift=0):
    """R_i(z) R_i(1/z) = I and K(z) K(1/z) = I with z a formal variable."""
    sc = _symbolic_scalars(L, ring)
    if tau_shift:
        sc.tau = sc.tau + tau_shift
    z = ring.var("z")
    zinv = z.monomial_inverse()
    results = []
    dd = r_den(z, sc.q, sc.qinv) * r_den(zinv, sc.q, sc.qinv)
    for i in range(1, L):
        ok_all = True
        for p, v in basis_vectors(L).items():
            lhs = r_hat(i, z, r_hat(i, zinv, v, sc.q, sc.qinv, sc.tau), sc.q, sc.qinv, sc.tau)
            if not vec_equal(lhs, vec_scale(v, dd)):
                ok_all = False
                break
        results.append(_report(f"unitarity R_{i}", ok_all, {"pattern": p}))
    kk = k_den(z, sc.q, sc.qinv, sc.zeta, sc.zetainv) * k_den(zinv, sc.q, sc.qinv, sc.zeta, sc.zetainv)
    ok_all = True
    for p, v in basis_vectors(L).items():
        lhs = k_hat(z, k_hat(zinv, v, sc.q, sc.qinv, sc.zeta, sc.zetainv), sc.q, sc.qinv, sc.zeta, sc.zetainv)
        if not vec_equal(lhs, vec_scale(v, kk)):
            ok_all = False
            break
    results.append(_report("unitarity K", ok_all, {"pattern": p}))
    return results


def verify_ybe_symbolic(L, ring, tau_shift=0):
    """R_i(z) R_{i+1}(zw) R_i(w) = R_{i+1}(w) R_i(zw) R_{i+1}(z), formal z, w."""
    sc = _symbolic_scalars(L, ring)
    if tau_shift:
        sc.tau = sc.tau + tau_shift
    z, w = ring.var("z"), ring.var("w")
    zw = z * w
    results = []
    for i in range(1, L - 1):
        ok_all = True
        for p, v in basis_vectors(L).items():
            a = sc.q, sc.qinv, sc.tau
            lhs = r_hat(i, z, r_hat(i + 1, zw, r_hat(i, w, v, *a), *a), *a)
            rhs = r_hat(i + 1, w, r_hat(i, zw, r_hat(i + 1, z, v, *a), *a), *a)
            if not vec_equal(lhs, rhs):
                ok_all = False
                break
        results.append(_report(f"ybe at sites ({i},{i+1})", ok_all, {"pattern": p}))
    return results


def verify_bybe_symbolic(L, ring, tau_shift=0):
    """Reflection equation with formal z, w (both sides share denominators)."""
    sc = _symbolic_scalars(L, ring)
    if tau_shift:
        sc.tau = sc.tau + tau_shift
    z, w = ring.var("z"), ring.var("w")
    wz = z * w
    wzinv = wz.monomial_inverse()
    woz = w * z.monomial_inverse()
    a = sc.q, sc.qinv, sc.tau
    k = sc.q, sc.qinv, sc.zeta, sc.zetainv
    i = L - 1
    ok_all = True
    witness = None
    for p, v in basis_vectors(L).items():
        lhs = r_hat(i, woz, k_hat(z, r_hat(i, wzinv, k_hat(w, v, *k), *a), *k), *a)
        rhs = k_hat(w, r_hat(i, wzinv, k_hat(z, r_hat(i, woz, v, *a), *k), *a), *k)
        if not vec_equal(lhs, rhs):
            ok_all = False
            witness = {"pattern": p}
            break
    return [_report("boundary ybe", ok_all, witness)]


def verify_far_commutation_symbolic(L, ring):
    """[R_i(z), R_j(w)] = 0 for |i-j| > 1 and [K(z), R_i(w)] = 0 for i < L-1."""
    sc = _symbolic_scalars(L, ring)
    z, w = ring.var("z"), ring.var("w")
    a = sc.q, sc.qinv, sc.tau
    k = sc.q, sc.qinv, sc.zeta, sc.zetainv
    results = []
    for i in range(1, L):
        for j in range(i + 2, L):
            ok_all = all(
                vec_equal(
                    r_hat(i, z, r_hat(j, w, v, *a), *a),
                    r_hat(j, w, r_hat(i, z, v, *a), *a),
                )
                for v in basis_vectors(L).values()
            )
            results.append(_report(f"[R_{i}, R_{j}] = 0", ok_all))
    for i in range(1, L - 1):
        ok_all = all(
            vec_equal(
                k_hat(z, r_hat(i, w, v, *a), *k),
                r_hat(i, w, k_hat(z, v, *k), *a),
            )
            for v in basis_vectors(L).values()
        )
        results.append(_report(f"[K, R_{i}] = 0", ok_all))
    return results


def verify_identities_sampled(L, sampler, count, tau_shift=0):
    """Unitarity, YBE, BYBE and far commutation at seeded exact points."""
    results = []
    checked = 0
    for trial in range(3 * count):
        if checked >= count:
            break
        u = sampler.nonzero(exclude_abs_one=True)
        q = u * u
        zeta = sampler.nonzero()
        z = sampler.nonzero(exclude_abs_one=True)
        w = sampler.nonzero(exclude_abs_one=True)
        sc = Scalars(q, zeta)
        if tau_shift:
            sc.tau = sc.tau + tau_shift
        try:
            point = {"u": str(u), "zeta": str(zeta), "z": str(z), "w": str(w)}
            vs = basis_vectors(L)
            for i in range(1, L):
                for p, v in vs.items():
                    lhs = apply_R(i, z, apply_R(i, inv_scalar(z), v, sc), sc)
                    if not vec_equal(lhs, v):
                        results.append(_report(f"unitarity R_{i}", False, point))
                        return results
            for p, v in vs.items():
                lhs = apply_K(z, apply_K(inv_scalar(z), v, sc), sc)
                if not vec_equal(lhs, v):
                    results.append(_report("unitarity K", False, point))
                    return results
            zw = z * w
            for i in range(1, L - 1):
                for p, v in vs.items():
                    lhs = apply_R(i, z, apply_R(i + 1, zw, apply_R(i, w, v, sc), sc), sc)
                    rhs = apply_R(i + 1, w, apply_R(i, zw, apply_R(i + 1, z, v, sc), sc), sc)
                    if not vec_equal(lhs, rhs):
                        results.append(_report(f"ybe at ({i},{i+1})", False, point))
                        return results
            i = L - 1
            woz = z ** -1 * w if isinstance(z, MultiLaurent) else w / z
            wzinv = inv_scalar(zw)
            for p, v in vs.items():
                lhs = apply_R(i, woz, apply_K(z, apply_R(i, wzinv, apply_K(w, v, sc), sc), sc), sc)
                rhs = apply_K(w, apply_R(i, wzinv, apply_K(z, apply_R(i, woz, v, sc), sc), sc), sc)
                if not vec_equal(lhs, rhs):
                    results.append(_report("boundary ybe", False, point))
                    return results
            for i in range(1, L):
                for j in range(i + 2, L):
                    for p, v in vs.items():
                        lhs = apply_R(i, z, apply_R(j, w, v, sc), sc)
                        rhs = apply_R(j, w, apply_R(i, z, v, sc), sc)
                        if not vec_equal(lhs, rhs):
                            results.append(_report(f"[R_{i}, R_{j}]", False, point))
                            return results
            for i in range(1, L - 1):
                for p, v in vs.items():
                    lhs = apply_K(z, apply_R(i, w, v, sc), sc)
                    rhs = apply_R(i, w, apply_K(z, v, sc), sc)
                    if not vec_equal(lhs, rhs):
                        results.append(_report(f"[K, R_{i}]", False, point))
                        return results
            checked += 1
        except PoleError:
            continue
    results.append(_report(f"unitarity/ybe/bybe/commutation at {checked} points", checked >= count))
    return results


def verify_scattering_commutation(L, sampler, count, stochastic=False):
    """Eq.-level commutation of the scattering matrices.

    Generic s:   S_i(.., s z_j, ..) S_j(..) = S_j(.., s z_i, ..) S_i(..);
    stochastic:  q = omega (so s = 1) and the S_i plainly commute.
    """
    results = []
    checked = 0
    for trial in range(count * 3):
        if checked >= count:
            break
        try:
            if stochastic:
                q = Cyclotomic6.omega()
                s = Cyclotomic6(1)
                zeta = Cyclotomic6(sampler.nonzero())
                zs = [Cyclotomic6(x) for x in sampler.distinct(L, exclude_abs_one=True)]
            else:
                u = sampler.nonzero(exclude_abs_one=True)
                q = u * u
                s = sampler.nonzero(exclude_abs_one=True)
                zeta = sampler.nonzero()
                zs = sampler.distinct(L, exclude_abs_one=True)
            sc = Scalars(q, zeta)
            the_point = {"s": str(s), "zeta": str(zeta), "z": [str(x) for x in zs]}
            for i in range(1, L):
                for j in range(i + 1, L):
                    zs_i = list(zs)
                    zs_i[i - 1] = zs_i[i - 1] * s
                    zs_j = list(zs)
                    zs_j[j - 1] = zs_j[j - 1] * s
                    for p, v in basis_vectors(L).items():
                        lhs = apply_scattering(i, zs_j, s, apply_scattering(j, zs, s, v, sc), sc)
                        rhs = apply_scattering(j, zs_i, s, apply_scattering(i, zs, s, v, sc), sc)
                        if not vec_equal(lhs, rhs):
                            results.append(_report(f"scattering commutation S_{i}, S_{j}", False, the_point))
                            return results
            checked += 1
        except PoleError:
            continue
    label = "stochastic scattering commutation" if stochastic else "scattering commutation"
    results.append(_report(f"{label} at {checked} points", checked >= count))
    return results


def verify_left_eigenvector_symbolic(L, ring):
    """At q = omega the all-ones covector is fixed by every R_i(z) and K(z).

    Column sums: for R the hatted column sum must equal the denominator
    q - z/q, and similarly for K.
    """
    omega = Cyclotomic6.omega()
    sc = Scalars(omega, ring.var("zeta"))
    z = ring.var("z")
    results = []
    ok = True
    for i in range(1, L):
        for p, v in basis_vectors(L).items():
            col = r_hat(i, z, v, sc.q, sc.qinv, sc.tau)
            total = sum(col.values(), ring.zero())
            if not total == ring.const(1) * r_den(z, sc.q, sc.qinv):
                ok = False
    results.append(_report("left eigenvector of R at stochastic point", ok))
    ok = True
    for p, v in basis_vectors(L).items():
        col = k_hat(z, v, sc.q, sc.qinv, sc.zeta, sc.zetainv)
        total = sum(col.values(), ring.zero())
        if not total == ring.const(1) * k_den(z, sc.q, sc.qinv, sc.zeta, sc.zetainv):
            ok = False
    results.append(_report("left eigenvector of K at stochastic point", ok))
    return results
