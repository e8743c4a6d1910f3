"""Additive and multiplicative characters at p, Gauss sums, and the
elementary twisted-sum evaluation they hang on.

The additive character psi is the standard one with conductor Z_p:
psi(x) = e(frac(x)) depends only on the fractional part of x, so psi(x)
is the root of unity zeta_(p^k)^a for x = a/p^k mod Z.  Multiplicative
characters chi of conductor exactly p^m are stored through their images
on fixed generators of (Z/p^m)^*; chi(p) is a free cyclotomic parameter
(default 1) since a quasi-character of Q_p^* is its unit-part character
together with an arbitrary value on the uniformizer.

The workhorse identity is the twisted sum

    sum_(x mod h, x unit) chi(x) psi(x/g)   with  h = p^max(m, val g),

which equals chi(g/f) G(chi) when val(g) = m and vanishes otherwise.
Both the brute-force summation and the closed form are provided; the
test suite certifies their agreement, after which the closed form may
stand in for the summation inside large coset scans.
"""

from __future__ import annotations

from fractions import Fraction

from .localgroup import GMatrix, membership
from .scalars import CyclotomicNumber, euler_phi, frac_part, val_p

__all__ = [
    "AdditiveCharacter",
    "MultChar",
    "enumerate_chars",
    "gauss_sum",
    "psi_eval",
    "psi_exponent",
    "psi_unipotent",
    "twisted_sum",
    "twisted_sum_closed",
]


def psi_exponent(x, prime: int) -> Fraction:
    """The class of x in Q_p/Z_p as a fraction a/p^k in [0, 1).

    psi(x) = e(psi_exponent(x)).  The prime-to-p part of the denominator
    is a p-adic unit and gets inverted modulo p^k, so psi is defined on
    every rational (x in Z_p gives 0).
    """
    x = Fraction(x)
    den, k = x.denominator, 0
    while den % prime == 0:
        den //= prime
        k += 1
    if k == 0:
        return Fraction(0)
    pk = prime**k
    a = (x.numerator * pow(den, -1, pk)) % pk
    return Fraction(a, pk)


def psi_eval(x, prime: int) -> CyclotomicNumber:
    """psi(x) = zeta_(p^k)^a for x = a/p^k mod Z; equals 1 on Z_p."""
    return CyclotomicNumber.from_exponent(psi_exponent(x, prime))


def psi_unipotent(u: GMatrix, sign: int = 1) -> CyclotomicNumber:
    """psi(u) = prod_i psi(u[i, i+1]) on upper unipotent u; sign -1 inverts."""
    if not membership(u, "unipotent"):
        raise ValueError("psi_unipotent needs an upper unipotent matrix")
    total = Fraction(0)
    for i in range(u.n - 1):
        total += psi_exponent(u.rows[i][i + 1], u.prime)
    if sign == -1:
        total = -total
    elif sign != 1:
        raise ValueError("sign must be +1 or -1")
    return CyclotomicNumber.from_exponent(frac_part(total))


class AdditiveCharacter:
    """The standard additive character of Q_p with conductor Z_p."""

    __slots__ = ("prime",)

    def __init__(self, prime: int):
        object.__setattr__(self, "prime", prime)

    def __setattr__(self, *args):
        raise AttributeError("AdditiveCharacter is immutable")

    def __call__(self, x) -> CyclotomicNumber:
        return psi_eval(x, self.prime)

    def exponent(self, x) -> Fraction:
        return psi_exponent(x, self.prime)

    def on_unipotent(self, u: GMatrix, sign: int = 1) -> CyclotomicNumber:
        return psi_unipotent(u, sign)


def _unit_generators(p: int, m: int):
    """Generators of (Z/p^m)^* with their orders.

    Odd p: one generator, the smallest primitive root mod p adjusted to
    stay primitive mod p^2 (hence mod every p^k).  p = 2: empty for
    m = 1, {-1} for m = 2, and {-1, 5} for m >= 3.
    """
    if m == 0:
        return ()
    if p == 2:
        if m == 1:
            return ()
        if m == 2:
            return ((2**m - 1, 2),)
        return ((2**m - 1, 2), (5, 2 ** (m - 2)))
    # smallest primitive root mod p
    phi_p = p - 1
    g = None
    for cand in range(2, p):
        if all(pow(cand, phi_p // q, p) != 1 for q in _prime_divisors(phi_p)):
            g = cand
            break
    if pow(g, p - 1, p * p) == 1:
        g += p
    return ((g % p**m, euler_phi(p**m)),)


def _prime_divisors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class MultChar:
    """Quasi-character of Q_p^* with conductor exactly p^m.

    chi is determined by exponent data k_i with chi(g_i) = zeta_(d_i)^(k_i)
    on the fixed generators (g_i, d_i) of (Z/p^m)^*, plus the free value
    chi(p).  A discrete-log table over the (small) unit group makes unit
    evaluation a dictionary lookup that returns an exponent in Q/Z.
    """

    __slots__ = ("prime", "conductor_exponent", "generators", "exponents", "value_at_p", "_log")

    def __init__(self, prime: int, m: int, exponents, value_at_p=None):
        gens = _unit_generators(prime, m)
        exponents = tuple(int(k) % d for (g, d), k in zip(gens, exponents))
        if len(exponents) != len(gens):
            raise ValueError("need one exponent per generator")
        if value_at_p is None:
            value_at_p = CyclotomicNumber.one()
        elif not isinstance(value_at_p, CyclotomicNumber):
            value_at_p = CyclotomicNumber.from_rational(value_at_p)
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "conductor_exponent", m)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "value_at_p", value_at_p)
        object.__setattr__(self, "_log", self._build_log())

    def __setattr__(self, *args):
        raise AttributeError("MultChar is immutable")

    def _build_log(self):
        p, m = self.prime, self.conductor_exponent
        mod = p**m
        table = {1 % mod: Fraction(0)}
        if m == 0:
            return table
        frontier = {1 % mod: Fraction(0)}
        for (g, d), k in zip(self.generators, self.exponents):
            step = Fraction(k, d)
            new = {}
            for x, ex in frontier.items():
                y, ey = x, ex
                for _ in range(d - 1):
                    y = (y * g) % mod
                    ey = frac_part(ey + step)
                    new[y] = ey
            frontier.update(new)
        if len(frontier) != euler_phi(mod):
            raise AssertionError("generator set does not span the unit group")
        return frontier

    # -- evaluation -----------------------------------------------------

    def unit_log(self, x: int) -> Fraction:
        """Exponent q in Q/Z with chi(x) = e(q), for x a unit mod p^m."""
        mod = self.prime**self.conductor_exponent
        key = x % mod
        if key not in self._log:
            raise ValueError(f"{x} is not a unit modulo {mod}")
        return self._log[key]

    def __call__(self, x) -> CyclotomicNumber:
        """chi(x) = chi(p)^val(x) * chi(unit part mod p^m) on Q_p^*."""
        x = Fraction(x)
        if x == 0:
            raise ZeroDivisionError("chi(0) is undefined")
        v = val_p(x, self.prime)
        unit = x / Fraction(self.prime) ** v
        mod = self.prime**self.conductor_exponent
        # unit is a p-adic unit rational: reduce a/b mod p^m
        rep = (unit.numerator * pow(unit.denominator, -1, mod)) % mod if mod > 1 else 0
        val = CyclotomicNumber.from_exponent(self._log[rep]) if mod > 1 else CyclotomicNumber.one()
        return self.value_at_p**v * val

    def order_on_units(self) -> int:
        d = 1
        for q in self._log.values():
            d = d * q.denominator // _gcd(d, q.denominator)
        return d

    def is_primitive(self) -> bool:
        """Conductor is exactly p^m: nontrivial on 1 + p^(m-1)Z."""
        p, m = self.prime, self.conductor_exponent
        if m == 0:
            return True
        if m == 1:
            return any(q != 0 for q in self._log.values())
        # 1 + p^(m-1) generates the cyclic subgroup 1 + p^(m-1)Z / p^m Z
        probe = (1 + p ** (m - 1)) % p**m
        return self._log[probe] != 0

    def at_minus_one(self) -> CyclotomicNumber:
        mod = self.prime**self.conductor_exponent
        if mod <= 2:
            return CyclotomicNumber.one()
        return CyclotomicNumber.from_exponent(self._log[mod - 1])

    def conjugate(self) -> "MultChar":
        """chi bar, with chi(p) conjugated as well."""
        gens = self.generators
        exps = tuple((-k) % d for (g, d), k in zip(gens, self.exponents))
        vbar = self.value_at_p.conjugate()
        return MultChar(self.prime, self.conductor_exponent, exps, vbar)

    def serialize(self) -> dict:
        return {
            "p": self.prime,
            "conductor_exponent": self.conductor_exponent,
            "generator_images": [
                {"generator": g, "order": d, "exponent": k}
                for (g, d), k in zip(self.generators, self.exponents)
            ],
            "value_at_p": self.value_at_p.serialize(),
        }

    def __repr__(self):
        ims = ",".join(f"{g}->{k}/{d}" for (g, d), k in zip(self.generators, self.exponents))
        return f"MultChar(p={self.prime}, m={self.conductor_exponent}, {ims})"


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def enumerate_chars(p: int, m: int, value_at_p=None):
    """All characters of (Z/p^m)^* of conductor exactly p^m.

    Note (p, m) = (2, 1) yields the empty list: the unit group mod 2 is
    trivial, so no character has conductor exactly 2.
    """
    if m < 1:
        raise ValueError("enumerate_chars needs m >= 1")
    gens = _unit_generators(p, m)
    out = []

    def rec(idx, acc):
        if idx == len(gens):
            chi = MultChar(p, m, tuple(acc), value_at_p)
            if chi.is_primitive():
                out.append(chi)
            return
        for k in range(gens[idx][1]):
            rec(idx + 1, acc + [k])

    rec(0, [])
    return out


def gauss_sum(chi: MultChar) -> CyclotomicNumber:
    """G(chi) = sum over units x mod p^m of chi(x) psi(x / p^m)."""
    p, m = chi.prime, chi.conductor_exponent
    if m < 1:
        raise ValueError("Gauss sum needs a nontrivial conductor")
    mod = p**m
    total = CyclotomicNumber.zero()
    for x in range(1, mod):
        if x % p == 0:
            continue
        q = frac_part(chi.unit_log(x) + Fraction(x, mod))
        total = total + CyclotomicNumber.from_exponent(q)
    return total


def twisted_sum(chi: MultChar, g, l: int | None = None) -> CyclotomicNumber:
    """Brute-force sum chi(x) psi(x/g) over units x modulo h or p^(m l).

    With l = None the modulus is h = p^max(m, val g) as in the elementary
    vanishing fact; a given l >= max(m, val g)/m sums over units modulo
    p^(m l) instead (the form the coset sums need).
    """
    p, m = chi.prime, chi.conductor_exponent
    g = Fraction(g)
    if g == 0:
        raise ZeroDivisionError("twisted sum needs g != 0")
    v = val_p(g, p)
    if v < 0:
        raise ValueError("g must lie in Z_p")
    k = max(m, v) if l is None else m * l
    if k < max(m, v):
        raise ValueError("level l too small for the modulus of psi(x/g)")
    mod = p**k
    total = CyclotomicNumber.zero()
    for x in range(1, mod):
        if x % p == 0:
            continue
        q = frac_part(chi.unit_log(x) + psi_exponent(Fraction(x) / g, p))
        total = total + CyclotomicNumber.from_exponent(q)
    return total


def twisted_sum_closed(chi: MultChar, g, l: int | None = None) -> CyclotomicNumber:
    """Closed form of twisted_sum: chi(g/f) G(chi) if val g = m, else 0."""
    p, m = chi.prime, chi.conductor_exponent
    g = Fraction(g)
    v = val_p(g, p)
    if v < 0:
        raise ValueError("g must lie in Z_p")
    if v != m:
        return CyclotomicNumber.zero()
    unit = g / Fraction(p) ** m
    value = chi(unit) * gauss_sum(chi)
    if l is not None:
        scale = euler_phi(p ** (m * l)) // euler_phi(p ** max(m, v))
        value = value * scale
    return value
