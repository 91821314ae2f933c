"""Right-extended link patterns and the one-boundary Temperley-Lieb action.

A pattern on L points is encoded as a string over ``. ( )``: parentheses pair
points by noncrossing arcs, and every ``.`` marks a point connected to the
extra boundary point at the far right.  Because those boundary connections may
not cross arcs, a ``.`` can only occur at nesting depth zero; the number of
valid encodings of size L is binomial(L, floor(L/2)).

Generators:

* ``e_i`` (1 <= i <= L-1) reconnects sites i, i+1 by a cup/cap.  A closed bulk
  loop contributes one factor of the loop weight tau; loops through the
  boundary point carry weight one.
* ``f`` acts at site L: it cuts the arc ending at L (both ends become
  boundary-connected) and fixes patterns whose last point is already
  boundary-connected.

Canonical basis order is lexicographic on the encoding with '.' < '(' < ')';
reconstructing the stochastic Hamiltonian of size 4 column by column shows
this order reproduces the standard one.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

from .errors import PatternError
from .laurent import LaurentRing

_CHAR_ORDER = {".": 0, "(": 1, ")": 2}

TAU_RING = LaurentRing(("tau",))
TAU = TAU_RING.var("tau")


def is_valid_pattern(encoding: str) -> bool:
    """Balanced, noncrossing, and no boundary point hidden under an arc."""
    depth = 0
    for ch in encoding:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
        elif ch == ".":
            if depth != 0:
                return False
        else:
            return False
    return depth == 0


def check_pattern(encoding: str) -> str:
    if not is_valid_pattern(encoding):
        raise PatternError(f"invalid link pattern {encoding!r}")
    return encoding


def pattern_sort_key(encoding: str):
    return tuple(_CHAR_ORDER[ch] for ch in encoding)


@lru_cache(maxsize=None)
def enumerate_patterns(L: int) -> tuple[str, ...]:
    """All patterns of size L in canonical order ('.' < '(' < ')')."""
    if L < 1:
        raise PatternError("pattern size must be >= 1")
    out = []

    def extend(prefix, depth, remaining):
        if remaining == 0:
            if depth == 0:
                out.append(prefix)
            return
        if depth == 0:
            extend(prefix + ".", 0, remaining - 1)
        if depth + 1 <= remaining - 1:
            extend(prefix + "(", depth + 1, remaining - 1)
        if depth > 0:
            extend(prefix + ")", depth - 1, remaining - 1)

    extend("", 0, L)
    assert len(out) == comb(L, L // 2)
    return tuple(out)


def pattern_index(L: int):
    """Map pattern -> position in the canonical order."""
    return {p: i for i, p in enumerate(enumerate_patterns(L))}


@lru_cache(maxsize=None)
def partner_map(encoding: str) -> tuple:
    """partner[k] = paired site of k (1-based), or 0 if boundary-connected."""
    partners = [0] * (len(encoding) + 1)
    stack = []
    for pos, ch in enumerate(encoding, start=1):
        if ch == "(":
            stack.append(pos)
        elif ch == ")":
            opener = stack.pop()
            partners[opener] = pos
            partners[pos] = opener
    return tuple(partners)


def _encode(partners, L):
    chars = []
    for k in range(1, L + 1):
        j = partners[k]
        if j == 0:
            chars.append(".")
        elif j > k:
            chars.append("(")
        else:
            chars.append(")")
    return "".join(chars)


def apply_e(i: int, encoding: str):
    """Act with e_i; returns (pattern, loop_count) with loop_count in {0, 1}.

    loop_count counts closed bulk loops (each worth a factor tau); closed
    loops through the boundary point are absorbed with weight one.
    """
    L = len(encoding)
    if not 1 <= i <= L - 1:
        raise PatternError(f"site {i} out of range for e_i at L={L}")
    partners = list(partner_map(encoding))
    a, b = partners[i], partners[i + 1]
    if a == i + 1:
        # i, i+1 paired together: closed bulk loop
        return encoding, 1
    loop = 0
    if a != 0 and b != 0:
        partners[a], partners[b] = b, a
    elif a != 0:
        partners[a] = 0
    elif b != 0:
        partners[b] = 0
    # a == b == 0: both boundary-connected; the boundary loop has weight one
    partners[i], partners[i + 1] = i + 1, i
    result = _encode(partners, L)
    return check_pattern(result), loop


def apply_f(encoding: str):
    """Act with f; returns (pattern, weight) where the weight is always 1."""
    L = len(encoding)
    partners = list(partner_map(encoding))
    j = partners[L]
    if j == 0:
        return encoding, 1
    partners[j] = 0
    partners[L] = 0
    return check_pattern(_encode(partners, L)), 1


def antecedents_e(i: int, encoding: str):
    """All patterns pi' != pi with e_i(pi') = pi.

    Requires pi to contain the arc (i, i+1); e_i never produces anything else.
    """
    L = len(encoding)
    partners = partner_map(encoding)
    if partners[i] != i + 1:
        raise PatternError("target not in image shape")
    return tuple(
        p for p in enumerate_patterns(L)
        if p != encoding and apply_e(i, p)[0] == encoding
    )


def antecedents_f(encoding: str):
    """All patterns pi' != pi with f(pi') = pi; needs point L unpaired in pi."""
    L = len(encoding)
    if partner_map(encoding)[L] != 0:
        raise PatternError("target not in image shape")
    return tuple(
        p for p in enumerate_patterns(L)
        if p != encoding and apply_f(p)[0] == encoding
    )


def antecedents(op, encoding: str):
    """Dispatch on op = ('e', i) or 'f'."""
    if op == "f":
        return antecedents_f(encoding)
    kind, i = op
    if kind != "e":
        raise PatternError(f"unknown operator {op!r}")
    return antecedents_e(i, encoding)


# --- operators as sparse maps -------------------------------------------------
#
# Every generator sends a basis pattern to a single weighted pattern, so an
# operator word is conveniently a map {source: (target, weight)}; weights live
# in Q[tau].


def generator_map(L: int, op):
    """Sparse column map of e_i or f over Q[tau]."""
    columns = {}
    for p in enumerate_patterns(L):
        if op == "f":
            target, _ = apply_f(p)
            weight = TAU_RING.one()
        else:
            target, loops = apply_e(op[1], p)
            weight = TAU if loops else TAU_RING.one()
        columns[p] = (target, weight)
    return columns


def compose_maps(outer, inner):
    """(outer . inner) for functional column maps."""
    columns = {}
    for src, (mid, w1) in inner.items():
        tgt, w2 = outer[mid]
        columns[src] = (tgt, w1 * w2)
    return columns


def maps_equal(m1, m2):
    return all(m1[p][0] == m2[p][0] and m1[p][1] == m2[p][1] for p in m1)


def operator_matrix(L: int, ops_with_coeffs):
    """Dense matrix of sum(c * op) in the canonical basis, columns = sources.

    ``ops_with_coeffs`` is a list of (op, coeff) with op one of ('e', i) / 'f'
    and coeff a scalar or polynomial; bulk loops weigh tau.
    """
    patterns = enumerate_patterns(L)
    index = pattern_index(L)
    dim = len(patterns)
    zero = TAU_RING.zero()
    matrix = [[zero for _ in range(dim)] for _ in range(dim)]
    for op, coeff in ops_with_coeffs:
        gmap = generator_map(L, op)
        for src, (tgt, w) in gmap.items():
            j = index[src]
            i = index[tgt]
            matrix[i][j] = matrix[i][j] + coeff * w
    return matrix


def check_tl_relations(L: int) -> dict:
    """Verify the defining algebra relations as exact identities over Q[tau].

    Returns {relation-name: bool}; all must be True for every L.
    """
    ids = {}
    es = {i: generator_map(L, ("e", i)) for i in range(1, L)}
    f = generator_map(L, "f")

    def scaled(m, c):
        return {src: (tgt, w * c) for src, (tgt, w) in m.items()}

    for i in range(1, L):
        ids[f"e{i}^2 = tau*e{i}"] = maps_equal(compose_maps(es[i], es[i]), scaled(es[i], TAU))
    for i in range(1, L - 1):
        ids[f"e{i}*e{i+1}*e{i} = e{i}"] = maps_equal(
            compose_maps(es[i], compose_maps(es[i + 1], es[i])), es[i])
        ids[f"e{i+1}*e{i}*e{i+1} = e{i+1}"] = maps_equal(
            compose_maps(es[i + 1], compose_maps(es[i], es[i + 1])), es[i + 1])
    for i in range(1, L):
        for j in range(i + 2, L):
            ids[f"[e{i}, e{j}] = 0"] = maps_equal(
                compose_maps(es[i], es[j]), compose_maps(es[j], es[i]))
    ids["f^2 = f"] = maps_equal(compose_maps(f, f), f)
    if L >= 2:
        ids[f"e{L-1}*f*e{L-1} = e{L-1}"] = maps_equal(
            compose_maps(es[L - 1], compose_maps(f, es[L - 1])), es[L - 1])
    for i in range(1, L - 1):
        ids[f"[e{i}, f] = 0"] = maps_equal(compose_maps(es[i], f), compose_maps(f, es[i]))
    return ids
