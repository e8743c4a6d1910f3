"""p-adic distributions on Z_p^* and the interpolation bookkeeping.

A distribution is stored through its level functions mu_m on (Z/p^m)^*,
subject to the compatibility

    mu_m(x) = sum_(a mod p) mu_(m+1)(x + a p^m),

verified exactly on every stored pair of adjacent levels.  Integration
of a finite-order character of conductor p^c against mu reads any level
m >= c and is level-independent once the relation holds; the inverse
construction (fourier_inverse) builds the unique deepest-level function
with prescribed integrals by character orthogonality and extends down
by summation.

Boundedness is measured through valuations: beta_m = min_x val(mu_m(x)),
and the reported order is the largest decay slope of beta over the
stored levels (zero slope reports "bounded").  Valuations of cyclotomic
values use the valuation on the p-power cyclotomic tower, where the
prime above p is unique (val(1 - zeta_(p^k)) = 1/phi(p^k)); mixed levels
with a prime-to-p part beyond {1, 2} have no canonical choice and are
rejected.

The synthetic interpolation measures replace the automorphic period
integrals by seeded exact unit data satisfying the same eigenvalue
recursion; the distribution relation then holds exactly because the
kappa constant's exponent [(n+1)n(n-1) + n(n-1)(n-2)]/6 matches the
unipotent index (U_n : t U_n t^-1) times the level-raising count, which
index_formula_check certifies by enumeration.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .characters import MultChar
from .hecke import ordinarity_and_kappa
from .localgroup import _mat_det
from .scalars import (
    CyclotomicNumber,
    euler_phi,
    frac_part,
    sum_of_roots,
    val_p,
)

__all__ = [
    "InterpolationConstants",
    "PAdicDistribution",
    "all_characters",
    "build_dirac",
    "build_geometric",
    "build_haar_like",
    "build_synthetic_hecke_measure",
    "check_relation",
    "cyclotomic_valuation",
    "fourier_inverse",
    "index_formula_check",
    "integrate_character",
    "interpolation_constants",
    "order_estimate",
]

_F0 = Fraction(0)
_F1 = Fraction(1)


# ---------------------------------------------------------------------------
# valuations of cyclotomic scalars


def _reduce_to_p_power_level(x: CyclotomicNumber, p: int) -> CyclotomicNumber:
    n = x.level
    if n % 4 == 2:
        # Q(zeta_(2N)) = Q(zeta_N) for odd N: zeta_(2N) = -zeta_N^((N+1)/2)
        half = n // 2
        out = CyclotomicNumber.zero()
        for i, c in enumerate(x.coeffs):
            if c:
                root = CyclotomicNumber.root_of_unity(half, (i * ((half + 1) // 2)) % half)
                if i % 2:
                    root = -root
                out = out + root * c
        x = out
        n = x.level
    while n > 1 and n % p == 0:
        n //= p
    if n != 1:
        raise ValueError(
            "valuation needs a p-power cyclotomic level (no canonical prime above p otherwise)"
        )
    return x


def cyclotomic_valuation(x, p: int):
    """val_p on Q(zeta_(p^k)), the unique extension of val_p on Q.

    Computed as val_p(Norm(x)) / phi(p^k) with the norm taken as the
    determinant of the multiplication-by-x matrix."""
    if isinstance(x, (int, Fraction)):
        return val_p(Fraction(x), p)
    if x.is_rational():
        return val_p(x.rational_value(), p)
    x = _reduce_to_p_power_level(x, p)
    if x.is_rational():
        return val_p(x.rational_value(), p)
    n = x.level
    phi = euler_phi(n)
    cols = []
    basis = [CyclotomicNumber.root_of_unity(n, j) for j in range(phi)]
    for b in basis:
        prod = x * b
        prod = prod._lift(n)
        cols.append(prod.coeffs)
    rows = [[cols[j][i] for j in range(phi)] for i in range(phi)]
    norm = _mat_det(rows)
    return Fraction(val_p(norm, p), phi)


def _value_val(x, p: int):
    if isinstance(x, CyclotomicNumber):
        return cyclotomic_valuation(x, p)
    return val_p(Fraction(x), p)


def _value_add(a, b):
    return a + b


def _value_eq(a, b):
    return a == b


# ---------------------------------------------------------------------------
# distributions


class PAdicDistribution:
    """Finitely many level functions mu_m: (Z/p^m)^* -> exact scalars."""

    __slots__ = ("prime", "levels")

    def __init__(self, prime: int, levels: dict):
        lv = {}
        for m, table in levels.items():
            mod = prime**m
            full = {}
            for x, v in table.items():
                if x % prime == 0:
                    raise ValueError("distribution values live on unit classes")
                full[x % mod] = v
            if len(full) != euler_phi(mod):
                raise ValueError(f"level {m} must assign a value to every unit class")
            lv[m] = full
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "levels", lv)

    def __setattr__(self, *args):
        raise AttributeError("PAdicDistribution is immutable")

    def value(self, m: int, x: int):
        return self.levels[m][x % self.prime**m]

    def stored_levels(self):
        return sorted(self.levels)

    def serialize(self) -> dict:
        out = {"p": self.prime, "levels": []}
        for m in self.stored_levels():
            vals = {}
            for x in sorted(self.levels[m]):
                v = self.levels[m][x]
                vals[str(x)] = v.serialize() if isinstance(v, CyclotomicNumber) else str(v)
            out["levels"].append({"m": m, "values": vals})
        return out


def check_relation(mu: PAdicDistribution):
    """Exact verification of mu_m(x) = sum_a mu_(m+1)(x + a p^m) on every
    stored adjacent pair; returns (ok, witness)."""
    p = mu.prime
    ms = mu.stored_levels()
    if len(ms) < 2:
        raise ValueError("need at least two stored levels")
    for m, m_next in zip(ms, ms[1:]):
        if m_next != m + 1:
            continue
        mod = p**m
        for x, v in mu.levels[m].items():
            lift_sum = None
            for a in range(p):
                term = mu.levels[m + 1][(x + a * mod) % (mod * p)]
                lift_sum = term if lift_sum is None else _value_add(lift_sum, term)
            if not _value_eq(lift_sum, v):
                return False, {"m": m, "x": x}
    return True, None


def all_characters(p: int, M: int, value_at_p=None):
    """The full dual of (Z/p^M)^*, primitive or not."""
    from .characters import _unit_generators

    gens = _unit_generators(p, M)
    out = []
    for exps in itertools.product(*(range(d) for _, d in gens)):
        out.append(MultChar(p, M, exps, value_at_p))
    return out


def integrate_character(mu: PAdicDistribution, chi: MultChar, conductor: int | None = None):
    """sum_x chi(x) mu_m(x) at any stored level m >= conductor; the value
    is asserted to be independent of the level used.

    Values are bucketed by the chi-exponent class first, so the cost is
    one pass of plain additions plus one root multiplication per class."""
    p = mu.prime
    c = conductor if conductor is not None else chi.conductor_exponent
    usable = [m for m in mu.stored_levels() if m >= max(c, 1)]
    if not usable:
        raise ValueError("no stored level is deep enough for this conductor")
    values = []
    for m in usable:
        buckets: dict = {}
        rational: dict = {}
        for x, v in mu.levels[m].items():
            q = chi.unit_log(x % p**c) if c >= 1 else _F0
            if isinstance(v, CyclotomicNumber) and not v.is_rational():
                buckets[q] = buckets[q] + v if q in buckets else v
            else:
                v = v.rational_value() if isinstance(v, CyclotomicNumber) else Fraction(v)
                rational[q] = rational.get(q, _F0) + v
        total = sum_of_roots(rational)
        for q, v in buckets.items():
            total = total + CyclotomicNumber.from_exponent(q) * v
        values.append(total)
    first = values[0]
    for other in values[1:]:
        if other != first:
            raise AssertionError("character integral depends on the level")
    return first


def _as_cyc(v):
    return v if isinstance(v, CyclotomicNumber) else CyclotomicNumber.from_rational(v)


def fourier_inverse(targets, p: int, M: int) -> PAdicDistribution:
    """The unique distribution of depth M with the prescribed integrals.

    targets: list of (chi, value) covering the full dual of (Z/p^M)^*.
    mu_M(x) = (1/phi(p^M)) sum_chi L(chi) chi(x)^-1 by orthogonality;
    lower levels are filled in by the relation sums."""
    mod = p**M
    size = euler_phi(mod)
    seen = set()
    pairs = []
    for chi, val in targets:
        if chi.prime != p or chi.conductor_exponent != M:
            raise ValueError("targets must be characters on (Z/p^M)^*")
        key = chi.exponents
        if key in seen:
            raise ValueError("duplicate character in targets")
        seen.add(key)
        pairs.append((chi, _as_cyc(val)))
    if len(pairs) != size:
        raise ValueError(f"need all {size} characters of (Z/p^M)^*, got {len(pairs)}")
    inv_size = Fraction(1, size)
    rational_pairs = [
        (chi, val.rational_value()) for chi, val in pairs if val.is_rational()
    ]
    rational_pairs = [(chi, v) for chi, v in rational_pairs if v]
    cyc_pairs = [(chi, val) for chi, val in pairs if not val.is_rational()]
    top = {}
    for x in range(1, mod):
        if x % p == 0:
            continue
        qcounts: dict = {}
        for chi, val in rational_pairs:
            q = frac_part(-chi.unit_log(x))
            qcounts[q] = qcounts.get(q, _F0) + val
        total = sum_of_roots(qcounts)
        for chi, val in cyc_pairs:
            total = total + val * CyclotomicNumber.from_exponent(frac_part(-chi.unit_log(x)))
        top[x] = total * inv_size
    levels = {M: top}
    for m in range(M - 1, 0, -1):
        mod_m = p**m
        table = {}
        for x in range(1, mod_m):
            if x % p == 0:
                continue
            acc = None
            for a in range(p):
                term = levels[m + 1][(x + a * mod_m) % (mod_m * p)]
                acc = term if acc is None else acc + term
            table[x] = acc
        levels[m] = table
    return PAdicDistribution(p, levels)


def order_estimate(mu: PAdicDistribution, M: int | None = None):
    """"bounded" or the decay slope h of beta_m = min_x val(mu_m(x)).

    The fit is anchored at the deepest stored level (the extrapolation
    end): h = max over m < M of (beta_m - beta_M) / (M - m), clamped at
    zero.  Flat valuations report "bounded"; a geometric construction
    mu_m = lambda^(-m) * units reports exactly val(lambda)."""
    p = mu.prime
    ms = [m for m in mu.stored_levels() if M is None or m <= M]
    betas = [min(_value_val(v, p) for v in mu.levels[m].values()) for m in ms]
    deep_m, deep_beta = ms[-1], betas[-1]
    h = _F0
    for m, beta in zip(ms[:-1], betas[:-1]):
        slope = Fraction(beta - deep_beta, deep_m - m)
        if slope > h:
            h = slope
    return "bounded" if h <= 0 else h


# ---------------------------------------------------------------------------
# constructors used by the test campaigns


def build_dirac(p: int, at: int, M: int) -> PAdicDistribution:
    levels = {}
    for m in range(1, M + 1):
        mod = p**m
        levels[m] = {
            x: _F1 if (x - at) % mod == 0 else _F0
            for x in range(1, mod)
            if x % p != 0
        }
    return PAdicDistribution(p, levels)


def build_haar_like(p: int, M: int) -> PAdicDistribution:
    levels = {}
    for m in range(1, M + 1):
        mod = p**m
        w = Fraction(1, euler_phi(mod))
        levels[m] = {x: w for x in range(1, mod) if x % p != 0}
    return PAdicDistribution(p, levels)


def build_geometric(p: int, lam, M: int, seed: int = 0) -> PAdicDistribution:
    """mu_m(x) = lam^(-m) * u_m(x) with seeded p-adic units u_m(x).

    Used by order_estimate tests; the distribution relation is not
    imposed here."""
    rng = random.Random(seed)
    lam = Fraction(lam)
    levels = {}
    for m in range(1, M + 1):
        mod = p**m
        table = {}
        for x in range(1, mod):
            if x % p == 0:
                continue
            u = rng.randrange(1, p**3)
            while u % p == 0:
                u = rng.randrange(1, p**3)
            table[x] = lam**-m * u
        levels[m] = table
    return PAdicDistribution(p, levels)


def _perturb(mu: PAdicDistribution, m: int, x: int, delta) -> PAdicDistribution:
    levels = {k: dict(v) for k, v in mu.levels.items()}
    levels[m][x] = _value_add(levels[m][x], delta)
    return PAdicDistribution(mu.prime, levels)


def build_synthetic_hecke_measure(
    n: int, p: int, roots_pi, roots_sigma, M: int, seed: int = 0
) -> PAdicDistribution:
    """Synthetic period measure mu_c(x) = kappa(p^c) P(x, c).

    P at depth M is seeded unit data; lower levels satisfy the
    eigenvalue recursion P(x, c) = (kh_l kh_a)^-1 p^A sum_a P(lifts),
    A = [(n+1)n(n-1) + n(n-1)(n-2)]/6.  The kappa(p^c) normalization
    then turns the recursion into the distribution relation exactly."""
    rng = random.Random(seed)
    consts = interpolation_constants(n, p, 1, roots_pi, roots_sigma, _F1, _F1)
    kk = consts.kappa_hat_product
    A = ((n + 1) * n * (n - 1) + n * (n - 1) * (n - 2)) // 6
    P = {}
    mod = p**M
    # one designated class keeps the minimal valuation; every level-c
    # value above it then attains the flat floor exactly (a sum with a
    # single minimal-valuation term cannot gain valuation)
    for x in range(1, mod):
        if x % p == 0:
            continue
        if x == 1:
            P[(M, x)] = _F1
        else:
            P[(M, x)] = Fraction(p * rng.randrange(1, p**3))
    for c in range(M - 1, 0, -1):
        mod_c = p**c
        for x in range(1, mod_c):
            if x % p == 0:
                continue
            acc = _F0
            for a in range(p):
                acc += P[(c + 1, (x + a * mod_c) % (mod_c * p))]
            P[(c, x)] = acc * Fraction(p**A) / kk
    levels = {}
    for c in range(1, M + 1):
        kappa_c = Fraction(p ** (A * c)) / kk**c
        mod_c = p**c
        levels[c] = {
            x: kappa_c * P[(c, x)] for x in range(1, mod_c) if x % p != 0
        }
    return PAdicDistribution(p, levels)


# ---------------------------------------------------------------------------
# interpolation constants and the index identity


@dataclass(frozen=True)
class InterpolationConstants:
    n: int
    p: int
    conductor_exponent: int
    kappa: Fraction
    kappa_hat: Fraction
    kappa_hat_product: Fraction
    delta_shape: object
    ordinary: bool

    def serialize(self):
        return {
            "n": self.n,
            "p": self.p,
            "conductor_exponent": self.conductor_exponent,
            "kappa": str(self.kappa),
            "kappa_hat": str(self.kappa_hat),
            "kappa_hat_product": str(self.kappa_hat_product),
            "delta_shape": str(self.delta_shape),
            "ordinary": self.ordinary,
        }


def interpolation_constants(
    n: int, p: int, c: int, roots_pi, roots_sigma, w1, v1
) -> InterpolationConstants:
    """kappa(f), kappa_hat(f) and the delta shape from Hecke-root data.

    roots_pi are the n roots on the GL_n side, roots_sigma the n-1 roots
    on the GL_(n-1) side; f = p^c with c >= 1.  Exactly:
      kappa(f)     = N(f)^([(n+1)n(n-1) + n(n-1)(n-2)]/6) / (kh_l kh_a)^c,
      kappa_hat(f) = N(f)^(n(n-1)(n-2)/6) * (kh_l kh_a)^(-c),
      delta        = w1 v1 prod_(nu<n) (1 - p^-nu)^-1."""
    if c < 1:
        raise ValueError("conductor exponent c >= 1")
    roots_pi = [Fraction(r) for r in roots_pi]
    roots_sigma = [Fraction(r) for r in roots_sigma]
    if len(roots_pi) != n or len(roots_sigma) != n - 1:
        raise ValueError("need n roots for pi and n-1 roots for sigma")
    data_pi = ordinarity_and_kappa([val_p(r, p) for r in roots_pi], p, values=roots_pi)
    data_sigma = ordinarity_and_kappa(
        [val_p(r, p) for r in roots_sigma], p, values=roots_sigma
    )
    kk = data_pi["kappa_hat"] * data_sigma["kappa_hat"]
    A = ((n + 1) * n * (n - 1) + n * (n - 1) * (n - 2)) // 6
    kappa = Fraction(p ** (A * c)) / kk**c
    kappa_hat = Fraction(p ** (c * n * (n - 1) * (n - 2) // 6)) / kk**c
    # kappa and kappa_hat differ by N(f)^((n+1)n(n-1)/6) exactly
    assert kappa == kappa_hat * Fraction(p ** (c * (n + 1) * n * (n - 1) // 6))
    delta = _F1
    for nu in range(1, n):
        delta *= _F1 / (1 - Fraction(1, p**nu))
    delta = delta * w1 * v1
    return InterpolationConstants(
        n=n,
        p=p,
        conductor_exponent=c,
        kappa=kappa,
        kappa_hat=kappa_hat,
        kappa_hat_product=kk,
        delta_shape=delta,
        ordinary=data_pi["ordinary"] and data_sigma["ordinary"],
    )


def index_formula_check(n: int, p: int, enumeration_cap: int = 2**20) -> dict:
    """(U_n : t U_n t^-1) = p^((n+1)n(n-1)/6) with t = diag(p^(n-1)..1),
    counted at level p^n.

    The conjugated subgroup scales the (i, j) entry by p^(j-i), so its
    members at level p^n are the u with u_ij = 0 mod p^(j-i); the index
    is counted by enumeration when feasible, else entry by entry."""
    k = n  # entries live mod p^n; j - i <= n - 1 < n keeps classes faithful
    mod = p**k
    positions = [(i, j) for i in range(n) for j in range(i + 1, n)]
    expected = p ** ((n + 1) * n * (n - 1) // 6)
    total = mod ** len(positions)
    if total <= enumeration_cap:
        members = 0
        for vals in itertools.product(range(mod), repeat=len(positions)):
            if all(v % p ** (j - i) == 0 for (i, j), v in zip(positions, vals)):
                members += 1
        mode = "enumeration"
    else:
        members = 1
        for i, j in positions:
            members *= mod // p ** (j - i)
        mode = "per-entry"
    index = total // members
    return {
        "n": n,
        "p": p,
        "index": index,
        "expected": expected,
        "mode": mode,
        "ok": index == expected,
    }
