"""Formal model of Iwahori-invariant Whittaker functions.

A function w transforming by psi under left translation by U_n(F) and
invariant under right translation by the Iwahori subgroup is determined
by its values on the cells U_n(F) pi^e w I_n, so its value anywhere is
psi(u) times a formal unknown indexed by the key (e, omega).  Two kinds
of evaluation are provided:

  * formal_eval: the value as (psi^sign(u), key), with coefficient 0 on
    *degenerate* cells, i.e. cells where psi is nontrivial on
    U_n(F) cap pi^e w I_n w^-1 pi^-e.  A genuine Whittaker function must
    vanish there (two decompositions of the same element would force
    conflicting psi-factors), which consistency_probe demonstrates by
    sampling.  The closed-form support test is
        e_i - e_(i+1) + [sigma(i) > sigma(i+1)] >= 0  for all i < n,
    and the probe is the ground-truth oracle backing that formula.

  * SphericalWhittaker: the delta^(1/2)-normalized spherical vector,
    whose value at pi^e is zero off dominant e and otherwise
    qh^(-sum_i e_i (n+1-2i)) times the Schur polynomial s_e in the
    Satake parameters (Weyl character formula, here realized through the
    Jacobi-Trudi determinant to stay division-free).

Hecke elements act through hecke_act: (sum a_i b_i K_B) . w evaluated at
g is sum a_i w(g b_i).
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import lru_cache

from .localgroup import GMatrix, WeylElement, decompose_key
from .scalars import CyclotomicNumber, SymbolicScalar, frac_part
from .characters import psi_exponent

__all__ = [
    "FormalWhittakerVector",
    "SphericalParams",
    "SphericalWhittaker",
    "WhittakerKey",
    "consistency_probe",
    "formal_eval",
    "formal_eval_exponent",
    "hecke_act",
    "schur_polynomial",
    "shintani_value",
    "supported",
]


class WhittakerKey:
    """Cell label (e, omega); compares and hashes by value."""

    __slots__ = ("e", "omega")

    def __init__(self, e, omega: WeylElement):
        object.__setattr__(self, "e", tuple(e))
        object.__setattr__(self, "omega", omega)

    def __setattr__(self, *args):
        raise AttributeError("WhittakerKey is immutable")

    @staticmethod
    def unit(n: int) -> "WhittakerKey":
        return WhittakerKey((0,) * n, WeylElement.identity(n))

    def is_unit(self) -> bool:
        return all(v == 0 for v in self.e) and self.omega.sigma == tuple(range(len(self.e)))

    def __eq__(self, other):
        return (
            isinstance(other, WhittakerKey)
            and self.e == other.e
            and self.omega == other.omega
        )

    def __hash__(self):
        return hash((self.e, self.omega.sigma))

    def __repr__(self):
        return f"Key(e={self.e}, w={tuple(s + 1 for s in self.omega.sigma)})"

    def serialize(self) -> str:
        return f"e={list(self.e)};sigma={[s + 1 for s in self.omega.sigma]}"


class FormalWhittakerVector:
    """Finitely supported scalar combination of WhittakerKeys.

    Scalars may be CyclotomicNumbers, SymbolicScalars or plain Fractions;
    zero coefficients are dropped eagerly so equality is dict equality.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            if not _is_zero(c):
                clean[key] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *args):
        raise AttributeError("FormalWhittakerVector is immutable")

    @staticmethod
    def zero() -> "FormalWhittakerVector":
        return FormalWhittakerVector({})

    @staticmethod
    def single(key: WhittakerKey, coeff) -> "FormalWhittakerVector":
        return FormalWhittakerVector({key: coeff})

    def __add__(self, other):
        if not isinstance(other, FormalWhittakerVector):
            return NotImplemented
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return FormalWhittakerVector(terms)

    def __mul__(self, scalar):
        return FormalWhittakerVector({k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FormalWhittakerVector):
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(_eq(c, other.terms[k]) for k, c in self.terms.items())

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "FormalW(0)"
        return "FormalW(" + " + ".join(f"({c})*{k}" for k, c in self.terms.items()) + ")"


def _is_zero(c):
    if isinstance(c, (CyclotomicNumber, SymbolicScalar)):
        return c.is_zero()
    return c == 0


def _eq(a, b):
    return a == b


# ---------------------------------------------------------------------------
# support predicate and its sampling oracle


def supported(e, omega: WeylElement) -> bool:
    """psi is trivial on U_n(F) cap pi^e w I_n w^-1 pi^-e.

    The superdiagonal entries of that group have valuation at least
    e_i - e_(i+1) + [sigma(i) > sigma(i+1)], and every such valuation
    occurs, so triviality of psi is the displayed inequality.
    """
    e = tuple(e)
    sig = omega.sigma
    for i in range(len(e) - 1):
        gap = e[i] - e[i + 1] + (1 if sig[i] > sig[i + 1] else 0)
        if gap < 0:
            return False
    return True


def consistency_probe(e, omega: WeylElement, trials: int, prime: int, seed: int = 0) -> bool:
    """Sampling oracle for supported().

    Right multiplication by Iwahori elements fixes the cell, so every
    sample s gives pi^e w s = u' pi^e w s' and a well-defined Whittaker
    value forces psi(u') = 1.  Returns False on the first violation.
    """
    if trials < 1:
        raise ValueError("trials >= 1")
    n = len(tuple(e))
    rng = random.Random(seed)
    p = prime
    base = [
        [
            (Fraction(p) ** e[i] if omega.sigma[i] == j else Fraction(0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    for _ in range(trials):
        s = _random_iwahori_rows(rng, n, p)
        rows = [
            [sum(base[i][k] * s[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)
        ]
        evec, sigma, superdiag = decompose_key(rows, p)
        if evec != tuple(e) or sigma != omega.sigma:
            raise AssertionError("Iwahori translation left the cell")
        q = Fraction(0)
        for x in superdiag:
            q += psi_exponent(x, p)
        if frac_part(q) != 0:
            return False
    return True


def _random_iwahori_rows(rng, n, p, depth=3):
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                u = rng.randrange(1, p**depth)
                while u % p == 0:
                    u = rng.randrange(1, p**depth)
                rows[i][j] = Fraction(u)
            elif i < j:
                rows[i][j] = Fraction(rng.randrange(0, p**depth))
            else:
                rows[i][j] = Fraction(p * rng.randrange(0, p ** (depth - 1)))
    return rows


# ---------------------------------------------------------------------------
# formal evaluation


def formal_eval_exponent(rows, prime: int, sign: int = 1):
    """(psi exponent in Q/Z or None, e, sigma) for raw Fraction rows.

    None marks a degenerate cell (the formal value is zero there).
    """
    evec, sigma, superdiag = decompose_key(rows, prime)
    if not supported(evec, WeylElement(sigma)):
        return None, evec, sigma
    q = Fraction(0)
    for x in superdiag:
        q += psi_exponent(x, prime)
    if sign == -1:
        q = -q
    return frac_part(q), evec, sigma


def formal_eval(g: GMatrix, sign: int = 1):
    """(scalar, WhittakerKey) with scalar = psi^sign(u), or 0 if degenerate."""
    q, evec, sigma = formal_eval_exponent(g.rows, g.prime, sign)
    key = WhittakerKey(evec, WeylElement(sigma))
    if q is None:
        return CyclotomicNumber.zero(), key
    return CyclotomicNumber.from_exponent(q), key


def formal_vector(g: GMatrix, sign: int = 1) -> FormalWhittakerVector:
    scalar, key = formal_eval(g, sign)
    return FormalWhittakerVector.single(key, scalar)


# ---------------------------------------------------------------------------
# Schur polynomials and the spherical value


@lru_cache(maxsize=None)
def _complete_homogeneous(k: int, n: int, prime: int) -> SymbolicScalar:
    if k < 0:
        return SymbolicScalar.constant(0, prime, n)
    terms = {}
    for exps in _compositions(k, n):
        terms[(exps, 0)] = Fraction(1)
    return SymbolicScalar(prime, n, terms)


def _compositions(k, n):
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def schur_polynomial(lam: tuple, prime: int) -> SymbolicScalar:
    """Schur (Laurent) polynomial s_lam in len(lam) variables.

    lam must be weakly decreasing; negative parts are handled by pulling
    out a power of x_1 ... x_n.  Uses the Jacobi-Trudi determinant
    det(h_(lam_i - i + j)) to avoid polynomial division.
    """
    lam = tuple(lam)
    n = len(lam)
    if any(lam[i] < lam[i + 1] for i in range(n - 1)):
        raise ValueError("schur_polynomial needs a weakly decreasing tuple")
    shift = lam[-1]
    if shift != 0:
        base = schur_polynomial(tuple(v - shift for v in lam), prime)
        mono = SymbolicScalar(prime, n, {((shift,) * n, 0): Fraction(1)})
        return base * mono
    total = SymbolicScalar.constant(0, prime, n)
    for perm in itertools.permutations(range(n)):
        sgn = _perm_sign(perm)
        prod = SymbolicScalar.constant(sgn, prime, n)
        for i in range(n):
            prod = prod * _complete_homogeneous(lam[i] - i + perm[i], n, prime)
            if prod.is_zero():
                break
        total = total + prod
    return total


def _perm_sign(perm):
    sgn = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sgn = -sgn
    return sgn


class SphericalParams:
    """Satake parameters x_1..x_n, symbolic with optional numeric values."""

    __slots__ = ("prime", "n", "values")

    def __init__(self, prime: int, n: int, values=None):
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", tuple(values) if values is not None else None)

    def __setattr__(self, *args):
        raise AttributeError("SphericalParams is immutable")


def shintani_value(params: SphericalParams, e) -> SymbolicScalar:
    """Normalized spherical value at pi^e: 0 off dominant e, else
    qh^(-sum e_i (n+1-2i)) * s_e(x); the unit value is 1."""
    e = tuple(e)
    n = params.n
    p = params.prime
    if len(e) != n:
        raise ValueError("weight vector length mismatch")
    if any(e[i] < e[i + 1] for i in range(n - 1)):
        return SymbolicScalar.constant(0, p, n)
    exponent = -sum(v * (n + 1 - 2 * (i + 1)) for i, v in enumerate(e))
    value = schur_polynomial(e, p) * SymbolicScalar.q_half(exponent, p, n)
    if params.values is not None:
        value = value.substitute(params.values)
    return value


class SphericalWhittaker:
    """Evaluation oracle for the normalized spherical Whittaker vector.

    For g = u pi^e k (k integral) the value is psi^sign(u) shintani(e);
    the psi-factor is well defined because dominant e forces psi to be
    trivial on the stabilizing unipotents, and off-dominant cells vanish.
    """

    __slots__ = ("params", "sign")

    def __init__(self, params: SphericalParams, sign: int = 1):
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "sign", sign)

    def __setattr__(self, *args):
        raise AttributeError("SphericalWhittaker is immutable")

    def __call__(self, g: GMatrix) -> SymbolicScalar:
        p = self.params.prime
        evec, sigma, superdiag = decompose_key(g.rows, p)
        n = self.params.n
        if any(evec[i] < evec[i + 1] for i in range(n - 1)):
            return SymbolicScalar.constant(0, p, n)
        q = Fraction(0)
        for x in superdiag:
            q += psi_exponent(x, p)
        if self.sign == -1:
            q = -q
        psi_val = CyclotomicNumber.from_exponent(frac_part(q))
        return shintani_value(self.params, evec) * psi_val


# ---------------------------------------------------------------------------
# Hecke action on evaluation oracles


def hecke_act(element, oracle, g: GMatrix):
    """(sum_i a_i b_i K_B) . oracle at g = sum_i a_i oracle(g b_i).

    element must expose coset_pairs() yielding (GMatrix, coefficient);
    the oracle may return any additive value (SymbolicScalar,
    CyclotomicNumber, FormalWhittakerVector...).
    """
    total = None
    for rep, coeff in element.coset_pairs():
        value = oracle(g * rep) * coeff
        total = value if total is None else total + value
    if total is None:
        raise ValueError("empty Hecke element")
    return total
