"""Exact coefficient arithmetic.

Everything downstream (coset sums, Hecke convolutions, distribution
relations) is decided by *exact* equality of scalars, so this module
provides the four coefficient domains used throughout:

  * ``CyclotomicNumber`` -- elements of Q(zeta_N), stored as coefficient
    vectors of length phi(N) reduced modulo the N-th cyclotomic
    polynomial.  Equality is a vector comparison after lifting both
    operands to a common level.
  * ``PAdicRational``   -- an exact rational together with its p-adic
    valuation.  No truncated p-adic expansions are used anywhere; all
    matrices in the verification kernel have entries in Z[1/p], so exact
    rationals eliminate precision management entirely.
  * ``ResidueClass``    -- arithmetic in Z/p^k, used by representative
    systems and character evaluation tables.
  * ``SymbolicScalar``  -- Laurent polynomials in Satake parameters
    x_1..x_n together with a formal square root of p (written qh below,
    subject to qh^2 = p).  Half-integral powers of p arise from the
    delta^(1/2) normalization of spherical values and from Hecke roots
    of the shape p^((n-1)/2) * x_i.

All values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "CyclotomicNumber",
    "PAdicRational",
    "ResidueClass",
    "SymbolicScalar",
    "cyclotomic_polynomial",
    "euler_phi",
    "frac_part",
    "sum_of_roots",
    "val_p",
]

INF = math.inf

_F0 = Fraction(0)
_F1 = Fraction(1)


def euler_phi(n: int) -> int:
    """Euler totient, by trial-division factorization (n stays small here)."""
    if n < 1:
        raise ValueError("euler_phi needs n >= 1")
    result = n
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            result -= result // d
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        result -= result // m
    return result


def val_p(x, p: int):
    """p-adic valuation of a Fraction or int; val_p(0) is +infinity."""
    if isinstance(x, PAdicRational):
        return x.valuation
    num = x.numerator if isinstance(x, Fraction) else x
    den = x.denominator if isinstance(x, Fraction) else 1
    if num == 0:
        return INF
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def frac_part(x: Fraction) -> Fraction:
    """Representative of x in Q/Z lying in [0, 1)."""
    return x - (x.numerator // x.denominator)


def sum_of_roots(qcounts: dict) -> "CyclotomicNumber":
    """sum of count * e(q) over a table {q in Q/Z: count}, reduced once.

    Large coset scans accumulate millions of roots of unity; collecting
    them as exponent counts and reducing a single coefficient vector at
    the lcm level avoids per-term cyclotomic arithmetic."""
    if not qcounts:
        return _CYC_ZERO
    level = 1
    for q in qcounts:
        d = q.denominator
        level = level * d // math.gcd(level, d)
    phi = euler_phi(level)
    coeffs = [_F0] * phi
    table = None
    for q, cnt in qcounts.items():
        k = (q.numerator * (level // q.denominator)) % level
        if k < phi:
            coeffs[k] += cnt
        else:
            if table is None:
                table = _power_table(level)
            row = table[k - phi]
            for j in range(phi):
                if row[j]:
                    coeffs[j] += cnt * row[j]
    return CyclotomicNumber(level, coeffs)


# ---------------------------------------------------------------------------
# Cyclotomic polynomials and power-reduction tables


def _int_poly_div(num: list[int], den: list[int]) -> list[int]:
    # Exact division of integer polynomials, leading coefficients last.
    num = list(num)
    dn = len(den) - 1
    out = [0] * (len(num) - dn)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + dn]
        if c % den[dn] != 0:
            raise ArithmeticError("non-exact polynomial division")
        q = c // den[dn]
        out[k] = q
        if q:
            for i, d in enumerate(den):
                num[k + i] -= q * d
    if any(num[: dn]):
        raise ArithmeticError("non-exact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficient tuple of Phi_n, constant term first, leading term last."""
    if n == 1:
        return (-1, 1)
    poly = [0] * (n + 1)
    poly[0] = -1
    poly[n] = 1
    for d in range(1, n):
        if n % d == 0:
            poly = _int_poly_div(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[Fraction, ...], ...]:
    # Row k holds the coefficient vector of x^(phi(n)+k) mod Phi_n,
    # 0 <= k < n - phi(n).  Exponents >= n are first reduced mod n.
    phi = euler_phi(n)
    psi = cyclotomic_polynomial(n)
    rows: list[tuple[Fraction, ...]] = []
    prev = [_F0] * phi
    # seed: x^phi = -(lower part of Phi_n)
    cur = [Fraction(-psi[i]) for i in range(phi)]
    rows.append(tuple(cur))
    for _ in range(phi + 1, n):
        prev, cur = cur, [_F0] * phi
        # multiply by x, reduce the overflow term through row 0
        top = prev[phi - 1]
        for i in range(phi - 1):
            cur[i + 1] = prev[i]
        if top:
            r0 = rows[0]
            for i in range(phi):
                cur[i] += top * r0[i]
        rows.append(tuple(cur))
    return tuple(rows)


class CyclotomicNumber:
    """An element of Q(zeta_N) in canonical reduced form.

    The basis is 1, zeta, ..., zeta^(phi(N)-1); reduction modulo Phi_N is
    performed eagerly after every multiplication, so equality at a common
    level is a plain vector comparison.  Binary operations lift both
    operands to the lcm of their levels first: Gauss sums, psi-values and
    chi-values naturally live at different p-power levels.
    """

    __slots__ = ("level", "coeffs")

    def __init__(self, level: int, coeffs):
        phi = euler_phi(level)
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != phi:
            raise ValueError(f"need {phi} coefficients at level {level}")
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *args):
        raise AttributeError("CyclotomicNumber is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_rational(x) -> "CyclotomicNumber":
        return CyclotomicNumber(1, (Fraction(x),))

    @staticmethod
    def zero() -> "CyclotomicNumber":
        return _CYC_ZERO

    @staticmethod
    def one() -> "CyclotomicNumber":
        return _CYC_ONE

    @staticmethod
    def root_of_unity(n: int, k: int = 1) -> "CyclotomicNumber":
        """zeta_n^k, constructed at the reduced level n/gcd(n,k)."""
        if n < 1:
            raise ValueError("root_of_unity needs n >= 1")
        k %= n
        if k == 0:
            return _CYC_ONE
        g = math.gcd(n, k)
        n, k = n // g, k // g
        phi = euler_phi(n)
        if k < phi:
            coeffs = [_F0] * phi
            coeffs[k] = _F1
            return CyclotomicNumber(n, coeffs)
        return CyclotomicNumber(n, _power_table(n)[k - phi])

    @staticmethod
    def from_exponent(q: Fraction) -> "CyclotomicNumber":
        """e(q) = zeta_den^num for q = num/den in Q/Z."""
        q = frac_part(Fraction(q))
        return CyclotomicNumber.root_of_unity(q.denominator, q.numerator)

    # -- level arithmetic ---------------------------------------------

    def _lift(self, level: int) -> "CyclotomicNumber":
        if level == self.level:
            return self
        if level % self.level != 0:
            raise ValueError("can only lift to a multiple level")
        step = level // self.level
        phi = euler_phi(level)
        out = [_F0] * phi
        table = None
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            k = (i * step) % level
            if k < phi:
                out[k] += c
            else:
                if table is None:
                    table = _power_table(level)
                row = table[k - phi]
                for j in range(phi):
                    out[j] += c * row[j]
        return CyclotomicNumber(level, out)

    def _common(self, other: "CyclotomicNumber"):
        lcm = self.level * other.level // math.gcd(self.level, other.level)
        return self._lift(lcm), other._lift(lcm)

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        other = _as_cyclotomic(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._common(other)
        return CyclotomicNumber(a.level, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.level, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = _as_cyclotomic(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_cyclotomic(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return CyclotomicNumber(self.level, tuple(x * c for x in self.coeffs))
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        a, b = self._common(other)
        n = a.level
        phi = len(a.coeffs)
        raw = [_F0] * (2 * phi - 1 if phi else 1)
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    raw[i + j] += x * y
        out = list(raw[:phi]) + [_F0] * (phi - len(raw[:phi]))
        table = None
        for k in range(phi, len(raw)):
            c = raw[k]
            if not c:
                continue
            kk = k % n
            if kk < phi:
                out[kk] += c
            else:
                if table is None:
                    table = _power_table(n)
                row = table[kk - phi]
                for j in range(phi):
                    out[j] += c * row[j]
        return CyclotomicNumber(n, out)

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        """Field inverse via extended gcd with Phi_N over Q[x]."""
        if self.is_zero():
            raise ZeroDivisionError("inversion of zero cyclotomic number")
        phi_poly = [Fraction(c) for c in cyclotomic_polynomial(self.level)]
        a = list(self.coeffs)
        # extended Euclid: find u with u*a == 1 (mod Phi)
        r0, r1 = phi_poly, _poly_trim(a)
        s0, s1 = [_F0], [_F1]
        while _poly_deg(r1) > 0:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
            if _poly_deg(r1) < 0:
                raise ZeroDivisionError("inversion of zero cyclotomic number")
        inv_lead = _F1 / r1[0]
        u = [c * inv_lead for c in s1]
        phi = len(self.coeffs)
        u = u[:phi] + [_F0] * max(0, phi - len(u))
        # u may still have degree >= phi only if deg stayed below phi: safe
        return CyclotomicNumber(self.level, u)

    def __truediv__(self, other):
        other = _as_cyclotomic(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = _CYC_ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def galois(self, j: int) -> "CyclotomicNumber":
        """Image under zeta_N -> zeta_N^j (j must be prime to N)."""
        n = self.level
        if math.gcd(j, n) != 1:
            raise ValueError("galois index must be a unit modulo the level")
        out = CyclotomicNumber.zero()
        for i, c in enumerate(self.coeffs):
            if c:
                out = out + CyclotomicNumber.root_of_unity(n, i * j) * c
        return out._lift(n)

    def conjugate(self) -> "CyclotomicNumber":
        """Complex conjugation, zeta -> zeta^(-1)."""
        return self.galois(self.level - 1) if self.level > 1 else self

    # -- predicates and conversions ------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational value")
        return self.coeffs[0] if self.coeffs else _F0

    def __eq__(self, other):
        other = _as_cyclotomic(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._common(other)
        return a.coeffs == b.coeffs

    __hash__ = None  # equality crosses levels; use explicit keys instead

    def __repr__(self):
        if self.is_rational():
            return f"Cyc({self.coeffs[0] if self.coeffs else 0})"
        terms = [
            (f"{c}*z{self.level}^{i}" if i else f"{c}")
            for i, c in enumerate(self.coeffs)
            if c
        ]
        return "Cyc(" + " + ".join(terms) + ")"

    def serialize(self) -> dict:
        return {
            "level": self.level,
            "coeffs": [str(c) for c in self.coeffs],
        }


def _as_cyclotomic(x):
    if isinstance(x, CyclotomicNumber):
        return x
    if isinstance(x, (int, Fraction)):
        return CyclotomicNumber.from_rational(x)
    return NotImplemented


def _poly_trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def _poly_deg(p):
    return len(p) - 1 if p else -1


def _poly_sub(a, b):
    n = max(len(a), len(b))
    return _poly_trim([(a[i] if i < len(a) else _F0) - (b[i] if i < len(b) else _F0) for i in range(n)])


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [_F0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod(a, b):
    a = list(a)
    db = _poly_deg(b)
    if db < 0:
        raise ZeroDivisionError
    q = [_F0] * max(0, len(a) - db)
    while _poly_deg(a) >= db:
        k = _poly_deg(a) - db
        c = a[-1] / b[-1]
        q[k] = c
        for i in range(db + 1):
            a[k + i] -= c * b[i]
        a = _poly_trim(a)
    return _poly_trim(q), a


_CYC_ZERO = CyclotomicNumber(1, (_F0,))
_CYC_ONE = CyclotomicNumber(1, (_F1,))


# ---------------------------------------------------------------------------
# p-adic rationals


class PAdicRational:
    """An exact rational viewed inside Q_p, with cached valuation.

    The absolute value is normalized by |p| = 1/p, so valuation v means
    |x| = p^(-v).  Zero has valuation +infinity.
    """

    __slots__ = ("value", "prime", "_val")

    def __init__(self, value, prime: int):
        object.__setattr__(self, "value", Fraction(value))
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "_val", None)

    def __setattr__(self, *args):
        raise AttributeError("PAdicRational is immutable")

    @property
    def valuation(self):
        if self._val is None:
            object.__setattr__(self, "_val", val_p(self.value, self.prime))
        return self._val

    @property
    def abs_value(self) -> Fraction:
        v = self.valuation
        if v is INF:
            return _F0
        return Fraction(1, self.prime**v) if v >= 0 else Fraction(self.prime ** (-v))

    def is_integral(self) -> bool:
        return self.valuation >= 0

    def is_unit(self) -> bool:
        return self.valuation == 0

    def unit_part(self) -> Fraction:
        """x / p^val(x); raises on zero."""
        v = self.valuation
        if v is INF:
            raise ZeroDivisionError("zero has no unit part")
        return self.value / Fraction(self.prime) ** v

    def _coerce(self, other):
        if isinstance(other, PAdicRational):
            if other.prime != self.prime:
                raise ValueError("mixed primes")
            return other.value
        return Fraction(other)

    def __add__(self, other):
        return PAdicRational(self.value + self._coerce(other), self.prime)

    __radd__ = __add__

    def __neg__(self):
        return PAdicRational(-self.value, self.prime)

    def __sub__(self, other):
        return PAdicRational(self.value - self._coerce(other), self.prime)

    def __rsub__(self, other):
        return PAdicRational(self._coerce(other) - self.value, self.prime)

    def __mul__(self, other):
        return PAdicRational(self.value * self._coerce(other), self.prime)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PAdicRational(self.value / self._coerce(other), self.prime)

    def __rtruediv__(self, other):
        return PAdicRational(self._coerce(other) / self.value, self.prime)

    def __pow__(self, k: int):
        return PAdicRational(self.value**k, self.prime)

    def __eq__(self, other):
        if isinstance(other, PAdicRational):
            return self.prime == other.prime and self.value == other.value
        return self.value == other

    def __hash__(self):
        return hash((self.prime, self.value))

    def __repr__(self):
        return f"PAdic({self.value}; p={self.prime})"


# ---------------------------------------------------------------------------
# residue rings Z/p^k


class ResidueClass:
    """An element of Z/p^k with the representative normalized to [0, p^k)."""

    __slots__ = ("modulus", "rep", "prime")

    def __init__(self, rep: int, prime: int, k: int):
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "modulus", prime**k)
        object.__setattr__(self, "rep", rep % self.modulus)

    def __setattr__(self, *args):
        raise AttributeError("ResidueClass is immutable")

    def _check(self, other):
        if not isinstance(other, ResidueClass) or other.modulus != self.modulus:
            raise ValueError("mismatched residue rings")

    def __add__(self, other):
        self._check(other)
        return ResidueClass(self.rep + other.rep, self.prime, _log_exp(self.modulus, self.prime))

    def __mul__(self, other):
        self._check(other)
        return ResidueClass(self.rep * other.rep, self.prime, _log_exp(self.modulus, self.prime))

    def __neg__(self):
        return ResidueClass(-self.rep, self.prime, _log_exp(self.modulus, self.prime))

    def is_unit(self) -> bool:
        return self.rep % self.prime != 0

    def inverse(self) -> "ResidueClass":
        if not self.is_unit():
            raise ZeroDivisionError("non-unit residue class")
        return ResidueClass(pow(self.rep, -1, self.modulus), self.prime, _log_exp(self.modulus, self.prime))

    def __eq__(self, other):
        return (
            isinstance(other, ResidueClass)
            and self.modulus == other.modulus
            and self.rep == other.rep
        )

    def __hash__(self):
        return hash((self.modulus, self.rep))

    def __repr__(self):
        return f"Res({self.rep} mod {self.modulus})"


def _log_exp(modulus: int, prime: int) -> int:
    k = 0
    while modulus > 1:
        modulus //= prime
        k += 1
    return k


# ---------------------------------------------------------------------------
# symbolic Laurent scalars


def _coeff(x):
    if isinstance(x, CyclotomicNumber):
        return x.rational_value() if x.is_rational() else x
    return Fraction(x)


def _coeff_add(a, b):
    if isinstance(a, CyclotomicNumber) or isinstance(b, CyclotomicNumber):
        return _as_cyclotomic(a) + _as_cyclotomic(b)
    return a + b


def _coeff_mul(a, b):
    if isinstance(a, CyclotomicNumber) or isinstance(b, CyclotomicNumber):
        return _as_cyclotomic(a) * _as_cyclotomic(b)
    return a * b


def _coeff_is_zero(a):
    if isinstance(a, CyclotomicNumber):
        return a.is_zero()
    return a == 0


def _coeff_eq(a, b):
    if isinstance(a, CyclotomicNumber) or isinstance(b, CyclotomicNumber):
        return _as_cyclotomic(a) == _as_cyclotomic(b)
    return a == b


class SymbolicScalar:
    """Laurent polynomial in x_1..x_n and a formal qh with qh^2 = p.

    Terms are stored as {(exponents, parity): coefficient} with parity in
    {0, 1}: the relation qh^2 = p folds even qh-powers into the rational
    part of the coefficient, so the representation is canonical and
    equality is a dict comparison.  Coefficients are Fractions, or
    CyclotomicNumbers when roots of unity enter through psi-values.
    """

    __slots__ = ("prime", "nvars", "terms")

    def __init__(self, prime: int, nvars: int, terms: dict):
        clean = {}
        for (exps, parity), c in terms.items():
            c = _coeff(c)
            if _coeff_is_zero(c):
                continue
            clean[(tuple(exps), parity & 1)] = c
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *args):
        raise AttributeError("SymbolicScalar is immutable")

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant(c, prime: int, nvars: int) -> "SymbolicScalar":
        zero = (0,) * nvars
        return SymbolicScalar(prime, nvars, {(zero, 0): c})

    @staticmethod
    def variable(i: int, prime: int, nvars: int) -> "SymbolicScalar":
        exps = [0] * nvars
        exps[i] = 1
        return SymbolicScalar(prime, nvars, {(tuple(exps), 0): _F1})

    @staticmethod
    def q_half(k: int, prime: int, nvars: int) -> "SymbolicScalar":
        """qh^k, i.e. p^(k/2) with the half-power kept formal when k is odd."""
        zero = (0,) * nvars
        half, parity = divmod(k, 2)
        return SymbolicScalar(prime, nvars, {(zero, parity): Fraction(prime) ** half})

    # -- ring operations -----------------------------------------------

    def _coerce(self, other):
        if isinstance(other, SymbolicScalar):
            if other.prime != self.prime or other.nvars != self.nvars:
                raise ValueError("mismatched symbolic rings")
            return other
        if isinstance(other, (int, Fraction, CyclotomicNumber)):
            return SymbolicScalar.constant(other, self.prime, self.nvars)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = _coeff_add(terms[key], c) if key in terms else c
        return SymbolicScalar(self.prime, self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return SymbolicScalar(
            self.prime, self.nvars, {k: _coeff_mul(c, Fraction(-1)) for k, c in self.terms.items()}
        )

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        p = Fraction(self.prime)
        terms: dict = {}
        for (e1, p1), c1 in self.terms.items():
            for (e2, p2), c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                half, parity = divmod(p1 + p2, 2)
                c = _coeff_mul(c1, c2)
                if half:
                    c = _coeff_mul(c, p**half)
                key = (exps, parity)
                terms[key] = _coeff_add(terms[key], c) if key in terms else c
        return SymbolicScalar(self.prime, self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined for general scalars")
        out = SymbolicScalar.constant(1, self.prime, self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(_coeff_eq(c, other.terms[k]) for k, c in self.terms.items())

    __hash__ = None

    def is_symmetric(self) -> bool:
        """Invariance under all adjacent transpositions of the variables."""
        for i in range(self.nvars - 1):
            swapped = {}
            for (exps, parity), c in self.terms.items():
                e = list(exps)
                e[i], e[i + 1] = e[i + 1], e[i]
                swapped[(tuple(e), parity)] = c
            if SymbolicScalar(self.prime, self.nvars, swapped) != self:
                return False
        return True

    def substitute(self, values) -> "SymbolicScalar":
        """Evaluate x_i -> values[i] (exact rationals); qh stays formal.

        Substitution is a ring homomorphism; negative exponents require the
        substituted value to be nonzero.
        """
        vals = [Fraction(v) for v in values]
        terms: dict = {}
        zero = (0,) * self.nvars
        for (exps, parity), c in self.terms.items():
            factor = _F1
            for v, e in zip(vals, exps):
                if e:
                    factor *= v**e
            key = (zero, parity)
            c = _coeff_mul(c, factor)
            terms[key] = _coeff_add(terms[key], c) if key in terms else c
        return SymbolicScalar(self.prime, self.nvars, terms)

    def __repr__(self):
        if not self.terms:
            return "Sym(0)"
        bits = []
        for (exps, parity), c in sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            mono = "".join(
                f"*x{i+1}^{e}" for i, e in enumerate(exps) if e
            )
            qh = "*qh" if parity else ""
            bits.append(f"({c}){mono}{qh}")
        return "Sym(" + " + ".join(bits) + ")"

    def serialize(self) -> dict:
        out = {}
        for (exps, parity), c in sorted(self.terms.items()):
            key = "x^" + ",".join(map(str, exps)) + (";qh" if parity else "")
            out[key] = c.serialize() if isinstance(c, CyclotomicNumber) else str(c)
        return out
