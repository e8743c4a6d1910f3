"""Matrices over Q_p, the catalog of special matrices, Weyl bookkeeping,
and the refined Iwasawa decomposition into cells U_n(F) pi^e w I_n.

The decomposition algorithm is a single bottom-up elimination: for rows
i = n..1 the pivot of row i is the *leftmost entry of minimal p-adic
valuation*; subtracting multiples of row i from the rows above clears the
pivot column.  This exhibits an explicit factorization

    g = u * pi^e * omega * s,   u upper unipotent over F, s Iwahori,

where omega sends i to the pivot column of row i and e_i is the pivot
valuation.  Uniqueness of (e, omega) is a property of the cell
decomposition and is exercised by randomized round-trip tests rather than
assumed by the algorithm.

Matrices are dense tuples of Fractions (n <= 8 throughout), immutable,
and all operations are pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .scalars import PAdicRational, val_p

__all__ = [
    "GMatrix",
    "WeylElement",
    "IwasawaData",
    "decompose",
    "decompose_key",
    "lambda_n",
    "membership",
    "phi_vector",
    "special_matrix",
    "verify_matrix_identities",
]

_F0 = Fraction(0)
_F1 = Fraction(1)
INF = math.inf


# ---------------------------------------------------------------------------
# raw matrix helpers (lists of Fraction rows); GMatrix wraps these


def _mat_mul(a, b):
    n, m, k = len(a), len(b[0]) if b else 0, len(b)
    out = []
    for i in range(n):
        ai = a[i]
        row = []
        for j in range(m):
            s = _F0
            for t in range(k):
                x = ai[t]
                if x:
                    s += x * b[t][j]
            row.append(s)
        out.append(row)
    return out


def _mat_identity(n):
    return [[_F1 if i == j else _F0 for j in range(n)] for i in range(n)]


def _mat_inv(a):
    n = len(a)
    work = [list(row) + ident for row, ident in zip(a, _mat_identity(n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        inv = _F1 / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


def _mat_det(a):
    n = len(a)
    work = [list(row) for row in a]
    det = _F1
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            return _F0
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            det = -det
        det *= work[col][col]
        inv = _F1 / work[col][col]
        for r in range(col + 1, n):
            if work[r][col]:
                f = work[r][col] * inv
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return det


class GMatrix:
    """Square matrix over Q_p with exact Fraction entries."""

    __slots__ = ("n", "prime", "rows")

    def __init__(self, rows, prime: int):
        rows = tuple(tuple(Fraction(x) for x in row) for row in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, *args):
        raise AttributeError("GMatrix is immutable")

    @staticmethod
    def identity(n: int, prime: int) -> "GMatrix":
        return GMatrix(_mat_identity(n), prime)

    @staticmethod
    def diagonal(values, prime: int) -> "GMatrix":
        values = list(values)
        n = len(values)
        return GMatrix(
            [[Fraction(values[i]) if i == j else _F0 for j in range(n)] for i in range(n)],
            prime,
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entry(self, i: int, j: int) -> PAdicRational:
        return PAdicRational(self.rows[i][j], self.prime)

    def __mul__(self, other):
        if not isinstance(other, GMatrix):
            return NotImplemented
        if other.prime != self.prime:
            raise ValueError("mixed primes")
        return GMatrix(_mat_mul(self.rows, other.rows), self.prime)

    def inverse(self) -> "GMatrix":
        return GMatrix(_mat_inv(self.rows), self.prime)

    def det(self) -> Fraction:
        return _mat_det(self.rows)

    def transpose(self) -> "GMatrix":
        return GMatrix(tuple(zip(*self.rows)), self.prime)

    def scale(self, c) -> "GMatrix":
        c = Fraction(c)
        return GMatrix([[x * c for x in row] for row in self.rows], self.prime)

    def embed(self, size: int) -> "GMatrix":
        """j(g): block diag(g, 1_(size-n))."""
        if size < self.n:
            raise ValueError("embedding must not shrink")
        out = _mat_identity(size)
        for i in range(self.n):
            for j in range(self.n):
                out[i][j] = self.rows[i][j]
        return GMatrix(out, self.prime)

    def __eq__(self, other):
        return (
            isinstance(other, GMatrix)
            and self.prime == other.prime
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.prime, self.rows))

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in row) for row in self.rows)
        return f"GMatrix[{body}]"


# ---------------------------------------------------------------------------
# Weyl group


class WeylElement:
    """Permutation matrix w with w * b_k = b_(sigma^-1(k)).

    Internally sigma is stored zero-indexed: row i of the matrix has its 1
    in column sigma[i], and for a diagonal vector a one has
    (w a)_i = a_(sigma(i)).  The map w -> sigma^(-1) is an isomorphism
    onto the symmetric group.
    """

    __slots__ = ("sigma",)

    def __init__(self, sigma):
        sigma = tuple(sigma)
        if sorted(sigma) != list(range(len(sigma))):
            raise ValueError("not a permutation")
        object.__setattr__(self, "sigma", sigma)

    def __setattr__(self, *args):
        raise AttributeError("WeylElement is immutable")

    @property
    def n(self) -> int:
        return len(self.sigma)

    @staticmethod
    def identity(n: int) -> "WeylElement":
        return WeylElement(range(n))

    @staticmethod
    def longest(n: int) -> "WeylElement":
        return WeylElement(range(n - 1, -1, -1))

    @staticmethod
    def all_elements(n: int):
        for sig in itertools.permutations(range(n)):
            yield WeylElement(sig)

    def matrix(self, prime: int) -> GMatrix:
        n = self.n
        rows = [[_F1 if self.sigma[i] == j else _F0 for j in range(n)] for i in range(n)]
        return GMatrix(rows, prime)

    @staticmethod
    def from_matrix(g: GMatrix) -> "WeylElement":
        sigma = []
        for row in g.rows:
            ones = [j for j, x in enumerate(row) if x == 1]
            if len(ones) != 1 or sum(1 for x in row if x) != 1:
                raise ValueError("not a permutation matrix")
            sigma.append(ones[0])
        return WeylElement(sigma)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        # matrix product convention: sigma_(vw) = sigma_w o sigma_v
        if not isinstance(other, WeylElement):
            return NotImplemented
        return WeylElement(tuple(other.sigma[self.sigma[i]] for i in range(self.n)))

    def inverse(self) -> "WeylElement":
        inv = [0] * self.n
        for i, s in enumerate(self.sigma):
            inv[s] = i
        return WeylElement(inv)

    def sign(self) -> int:
        sig = self.sigma
        sgn = 1
        for i in range(len(sig)):
            for j in range(i + 1, len(sig)):
                if sig[i] > sig[j]:
                    sgn = -sgn
        return sgn

    def apply_to_vector(self, a):
        """(w a)_i = a_(sigma(i)) for diagonal vectors a."""
        return tuple(a[self.sigma[i]] for i in range(self.n))

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.sigma == other.sigma

    def __hash__(self):
        return hash(self.sigma)

    def __repr__(self):
        return f"Weyl{tuple(s + 1 for s in self.sigma)}"


# ---------------------------------------------------------------------------
# Iwasawa decomposition


@dataclass(frozen=True)
class IwasawaData:
    u: GMatrix
    e: tuple
    omega: WeylElement
    s: GMatrix

    def reconstruct(self) -> GMatrix:
        p = self.u.prime
        pe = GMatrix.diagonal([Fraction(p) ** v for v in self.e], p)
        return self.u * pe * self.omega.matrix(p) * self.s


def _decompose_rows(rows, p):
    """Core elimination; returns (u_rows, e, sigma, m_rows).

    m_rows is u^-1 * g, whose row i is p^(e_i) times row sigma(i) of the
    Iwahori factor.
    """
    n = len(rows)
    work = [list(r) for r in rows]
    u = _mat_identity(n)
    sigma = [None] * n
    evec = [0] * n
    for i in range(n - 1, -1, -1):
        row = work[i]
        piv, pval = None, INF
        for j in range(n):
            x = row[j]
            if x:
                v = val_p(x, p)
                if v < pval:
                    piv, pval = j, v
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        sigma[i] = piv
        evec[i] = pval
        pivot = row[piv]
        for r in range(i):
            x = work[r][piv]
            if x:
                t = x / pivot
                wr, wi = work[r], row
                for j in range(n):
                    if wi[j]:
                        wr[j] -= t * wi[j]
                # g = u * M: clearing M by (1 - t E_(r,i)) on the left
                # multiplies u by (1 + t E_(r,i)) on the right.
                for a in range(n):
                    if u[a][r]:
                        u[a][i] += t * u[a][r]
    return u, tuple(evec), tuple(sigma), work


def decompose(g: GMatrix) -> IwasawaData:
    """Refined Iwasawa data (u, e, omega, s) with g = u pi^e omega s."""
    p = g.prime
    u, evec, sigma, m = _decompose_rows(g.rows, p)
    n = g.n
    # s = omega^-1 * pi^-e * M: row sigma(i) of s is p^(-e_i) * row i of M
    srows = [None] * n
    for i in range(n):
        scale = Fraction(1, p**evec[i]) if evec[i] >= 0 else Fraction(p ** (-evec[i]))
        srows[sigma[i]] = [x * scale for x in m[i]]
    return IwasawaData(
        u=GMatrix(u, p),
        e=evec,
        omega=WeylElement(sigma),
        s=GMatrix(srows, p),
    )


def decompose_key(rows, p):
    """Fast path: returns (e, sigma, psi_exponent_numerators) for raw rows.

    psi data is the tuple of superdiagonal entries of the unipotent part
    (as Fractions); callers turn them into additive character values.
    """
    u, evec, sigma, _ = _decompose_rows(rows, p)
    n = len(rows)
    superdiag = tuple(u[i][i + 1] for i in range(n - 1))
    return evec, sigma, superdiag


# ---------------------------------------------------------------------------
# special matrices


def _require_f(f, p):
    fv = Fraction(f)
    v = val_p(fv, p)
    if fv == 0 or v is INF or v < 1 or fv != Fraction(p) ** v:
        raise ValueError("f must be a positive power of p (nonzero nonunit integer)")
    return fv, v


def phi_vector(n: int, f, p: int):
    """phi_n = (f^-n, f^-(n-1), ..., f^-1)^t as a tuple of Fractions."""
    fv, _ = _require_f(f, p)
    return tuple(fv ** (-n + k - 1) for k in range(1, n + 1))


def special_matrix(kind: str, n: int, p: int, f=None, x=None, i=None) -> GMatrix:
    """Catalog of the fixed matrices; n is always the matrix size.

    Kinds: D, w, C, A, A_tilde, B, E, E_inv, B_inv, h, t, h_f, t_p,
    eps_x (needs x), d_i (needs i).  Kinds built from the conductor
    generator require f, a positive power of p.
    """
    needs_f = {"D", "C", "A", "A_tilde", "B", "E", "E_inv", "B_inv", "t", "h_f"}
    if kind in needs_f:
        fv, _ = _require_f(f, p)
    if kind == "D":
        return GMatrix.diagonal([fv ** (-(n - 1) + 2 * k) for k in range(n)], p)
    if kind == "w":
        return WeylElement.longest(n).matrix(p)
    if kind == "C":
        rows = _mat_identity(n)
        if n >= 1:
            rows[n - 1] = [fv ** (n - 1)] + [-(fv ** (n - j)) for j in range(2, n + 1)]
        return GMatrix(rows, p)
    if kind == "A":
        rows = _mat_identity(n)
        for k in range(n - 1):
            rows[k][k + 1] = fv**-1 if k == 0 else -(fv**-1)
        return GMatrix(rows, p)
    if kind == "A_tilde":
        rows = [[_F0] * n for _ in range(n)]
        rows[0][0] = fv**-1
        for k in range(1, n):
            rows[k][k - 1] = _F1
            rows[k][k] = -(fv**-1)
        return GMatrix(rows, p)
    if kind == "B":
        return special_matrix("A_tilde", n, p, f=f).scale(fv)
    if kind == "E":
        rows = [[_F0] * n for _ in range(n)]
        for idx in range(n - 1):
            base = n - 1 - idx  # anti-diagonal column for row idx
            for j in range(base, n):
                rows[idx][j] = fv ** (j - base)
        if n >= 1:
            rows[n - 1][0] = _F1
            for j in range(1, n):
                rows[n - 1][j] = -(fv**j)
        return GMatrix(rows, p)
    if kind == "E_inv":
        rows = [[_F0] * n for _ in range(n)]
        for idx in range(n):
            rows[idx][n - 1 - idx] = _F1
        if n >= 2:
            rows[0][n - 2] = fv
            for idx in range(1, n - 1):
                rows[idx][n - 2 - idx] = -fv
        return GMatrix(rows, p)
    if kind == "B_inv":
        rows = [[_F0] * n for _ in range(n)]
        for idx in range(n):
            rows[idx][0] = fv**idx
            for j in range(1, idx + 1):
                rows[idx][j] = -(fv ** (idx - j)) if j < idx else -_F1
        if n >= 1:
            rows[0][0] = _F1
        return GMatrix(rows, p)
    if kind == "h":
        rows = [[_F0] * n for _ in range(n)]
        for idx in range(n - 1):
            rows[idx][n - 2 - idx] = _F1  # longest Weyl block of size n-1
            rows[idx][n - 1] = _F1
        rows[n - 1][n - 1] = _F1
        return GMatrix(rows, p)
    if kind == "t":
        return GMatrix.diagonal([fv ** (n - 1 - k) for k in range(n)], p)
    if kind == "h_f":
        t = special_matrix("t", n, p, f=f)
        return t.inverse() * special_matrix("h", n, p) * t
    if kind == "t_p":
        return GMatrix.diagonal([Fraction(p) ** (n - 1 - k) for k in range(n)], p)
    if kind == "eps_x":
        if x is None:
            raise ValueError("eps_x needs x")
        return GMatrix.diagonal([Fraction(x)] + [_F1] * (n - 1), p)
    if kind == "d_i":
        if i is None or not (1 <= i <= n):
            raise ValueError("d_i needs a slot index 1 <= i <= n")
        return GMatrix.diagonal([-_F1 if k == i - 1 else _F1 for k in range(n)], p)
    raise ValueError(f"unknown special matrix kind: {kind!r}")


def lambda_n(g: GMatrix, f) -> PAdicRational:
    """The linear form b_n^t * g * phi_n = sum_nu g[n,nu] f^(nu-n-1)."""
    p = g.prime
    phi = phi_vector(g.n, f, p)
    last = g.rows[g.n - 1]
    total = _F0
    for x, ph in zip(last, phi):
        if x:
            total += x * ph
    return PAdicRational(total, p)


# ---------------------------------------------------------------------------
# subgroup membership


def membership(g: GMatrix, subgroup: str, l: int | None = None, m: int | None = None) -> bool:
    """Exact predicates via valuations.

    subgroup is one of "gl_zp", "iwahori", "unipotent", "borel",
    "j_congruence" (the last needs the level l and conductor exponent m:
    kernel of GL_n(Z_p) -> GL_n(Z/p^(m l)))."""
    p = g.prime
    n = g.n
    rows = g.rows

    def integral():
        return all(val_p(x, p) >= 0 for row in rows for x in row)

    if subgroup == "gl_zp":
        return integral() and val_p(_mat_det(rows), p) == 0
    if subgroup == "iwahori":
        if not integral() or val_p(_mat_det(rows), p) != 0:
            return False
        return all(val_p(rows[i][j], p) >= 1 for i in range(n) for j in range(i))
    if subgroup == "unipotent":
        for i in range(n):
            if rows[i][i] != 1:
                return False
            if any(rows[i][j] for j in range(i)):
                return False
        return True
    if subgroup == "borel":
        if any(rows[i][j] for i in range(n) for j in range(i)):
            return False
        return all(rows[i][i] for i in range(n))
    if subgroup == "j_congruence":
        if l is None or m is None:
            raise ValueError("j_congruence needs l and m")
        if not integral() or val_p(_mat_det(rows), p) != 0:
            return False
        bound = m * l
        for i in range(n):
            for j in range(n):
                delta = rows[i][j] - (_F1 if i == j else _F0)
                if val_p(delta, p) < bound:
                    return False
        return True
    raise ValueError(f"unknown subgroup: {subgroup!r}")


# ---------------------------------------------------------------------------
# matrix identity checker


def verify_matrix_identities(n: int, f, p: int) -> dict:
    """Exact check of the eight fixed-matrix identities at size parameter n.

    Identities involving B_(n+1), C_(n+1), h^(f) are checked at size n+1;
    the rest at size n.  n = 0 degenerates to B_1 = C_1 = 1 and the size-n
    checks are vacuous.
    """
    report: dict = {"n": n, "f": str(Fraction(f)), "p": p, "checks": {}}
    checks = report["checks"]
    sp = special_matrix

    B_n1 = sp("B", n + 1, p, f=f)
    C_n1 = sp("C", n + 1, p, f=f)
    hf = sp("h_f", n + 1, p, f=f)
    E_n1 = sp("E", n + 1, p, f=f)
    D_n1 = sp("D", n + 1, p, f=f)
    checks["B_h_E_equals_D"] = (B_n1 * hf * E_n1) == D_n1

    B_n = sp("B", n, p, f=f) if n >= 1 else GMatrix.identity(0, p)
    checks["jB_Binv_equals_C"] = (B_n.embed(n + 1) * B_n1.inverse()) == C_n1

    if n >= 1:
        d1 = sp("d_i", n, p, i=1)
        dn = sp("d_i", n, p, i=n)
        E_n = sp("E", n, p, f=f)
        w_n = sp("w", n, p)
        checks["signed_B_E_equals_minus_w"] = (d1 * B_n * dn * E_n * d1) == w_n.scale(-1)
        checks["E_inv_display"] = (E_n * sp("E_inv", n, p, f=f)) == GMatrix.identity(n, p)
        checks["B_inv_display"] = (B_n * sp("B_inv", n, p, f=f)) == GMatrix.identity(n, p)
        phi = phi_vector(n, f, p)
        target = [Fraction(f) ** (-n)] + [_F0] * (n - 1)
        bphi = [sum(B_n.rows[i][k] * phi[k] for k in range(n)) for i in range(n)]
        checks["B_phi_collapse"] = bphi == target

    w_n1 = sp("w", n + 1, p)
    A_n1 = sp("A", n + 1, p, f=f)
    conj = w_n1 * D_n1.inverse() * A_n1 * D_n1 * w_n1
    checks["conjugated_A_iwahori"] = membership(conj, "iwahori")

    detB_n = B_n.det() if n >= 1 else _F1
    checks["det_BC_induction"] = (B_n1 * C_n1).det() == detB_n

    report["all_pass"] = all(checks.values())
    report["failed"] = sorted(k for k, v in checks.items() if not v)
    return report
