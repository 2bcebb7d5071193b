"""p-adic slope machinery at matrix scale.

The characteristic series det(1 - T U) of a square matrix plays the role of
the Fredholm series; its Newton polygon at p reads off the valuations of the
eigenvalues of U (one slope per eigenvalue, counted with multiplicity).  For
a slope bound h the series factors as P = Q S with Q collecting exactly the
reciprocal roots of valuation <= h, computed by a quadratically convergent
Hensel/Newton iteration started from the polygon truncation.  When the true
factor has rational coefficients of moderate height the iteration is snapped
to it by rational reconstruction and everything downstream is exact; otherwise
the factors are reported modulo p^precision.

The decomposition splits the ambient space into ker Qt(U) and its polynomial
complement, where Qt(T) = T^m Q(1/T); the projector comes from a Bezout
identity between Qt and the complementary factor of the characteristic
polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from .linalg import Matrix
from .poly import Poly, xgcd
from .scalars import INF, PAdicScalar, PrecisionLossError, padic_valuation, require_prime


class NoBreakError(ValueError):
    """The requested slope bound does not split the polygon at a vertex."""


class SlopePrecisionError(ArithmeticError):
    """The iteration could not certify the factorization at the working precision."""


RECONSTRUCTION_MARGIN = 25


def fredholm_series(U: Matrix) -> Poly:
    """det(1 - T U), computed by exact determinant interpolation at scalar points.

    Degree <= n with constant term 1; the coefficients are the signed
    elementary symmetric functions of the eigenvalues.
    """
    if not U.is_square():
        raise ValueError("matrix must be square")
    n = U.nrows
    ident = Matrix.identity(n)
    # interpolate the degree <= n polynomial t -> det(I - t U)
    points = [(Fraction(t), (ident - U.scale(t)).det()) for t in range(n + 1)]
    coeffs = _lagrange(points)
    p = Poly(coeffs)
    assert p(Fraction(0)) == 1
    return p


def padic_matrix(entries: list[list[PAdicScalar]]) -> tuple[Matrix, int, int]:
    """Lift a matrix of p-adic scalars to rational representatives.

    Returns (matrix, p, precision); signals precision exhaustion if negative
    entry valuations eat the whole working precision of the series
    coefficients.
    """
    flat = [x for row in entries for x in row]
    if not flat:
        raise ValueError("empty matrix")
    p = flat[0].p
    prec = min(x.prec for x in flat)
    n = len(entries)
    vmin = min((x.v for x in flat if not x.is_zero()), default=0)
    if vmin < 0 and n * vmin + prec <= 0:
        raise PrecisionLossError(
            "entry valuations are too negative for the declared precision"
        )
    rows = [[x.rational_representative() for x in row] for row in entries]
    return Matrix(rows), p, prec


def _lagrange(points):
    xs = [x for x, _ in points]
    n = len(points)
    coeffs = [Fraction(0)] * n
    for i, (xi, yi) in enumerate(points):
        num = Poly([1])
        den = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                num = num * Poly([-xj, 1])
                den *= xi - xj
        scaled = num * (yi / den)
        for k, c in enumerate(scaled.coeffs):
            coeffs[k] += c
    return coeffs


@dataclass
class NewtonPolygon:
    """Lower convex hull of (i, v_p(a_i)); slopes weakly increasing."""

    p: int
    vertices: list[tuple[int, Fraction]]
    segments: list[tuple[Fraction, int]] = field(default_factory=list)

    def slopes(self) -> list[Fraction]:
        out = []
        for slope, length in self.segments:
            out.extend([slope] * length)
        return out

    def length_at_most(self, h) -> int:
        h = Fraction(h)
        return sum(length for slope, length in self.segments if slope <= h)


def newton_polygon(P: Poly, p: int) -> NewtonPolygon:
    """Polygon of a polynomial with unit constant term."""
    require_prime(p)
    if P.is_zero():
        raise ValueError("zero polynomial has no polygon")
    if padic_valuation(P.coeffs[0], p) != 0:
        raise ValueError("constant term must be a p-adic unit")
    points = [
        (i, Fraction(padic_valuation(c, p)))
        for i, c in enumerate(P.coeffs)
        if c != 0
    ]
    hull = [points[0]]
    for pt in points[1:]:
        while len(hull) >= 2 and _turns_up(hull[-2], hull[-1], pt):
            hull.pop()
        hull.append(pt)
    segments = []
    for (i0, v0), (i1, v1) in zip(hull, hull[1:]):
        segments.append((Fraction(v1 - v0, i1 - i0), i1 - i0))
    return NewtonPolygon(p, hull, segments)


def _turns_up(a, b, c):
    # drop b if it lies on or above the chord a-c
    return (b[1] - a[1]) * (c[0] - a[0]) >= (c[1] - a[1]) * (b[0] - a[0])


@dataclass
class SlopeFactorization:
    """P = Q * S with Q collecting the reciprocal roots of valuation <= h.

    exact=True means the equality holds over the rationals on the nose;
    otherwise it holds coefficientwise modulo p^precision.
    """

    Q: Poly
    S: Poly
    h: Fraction
    m: int
    p: int
    precision: int | None
    exact: bool

    def residual_valuation(self, P: Poly):
        diff = P - self.Q * self.S
        if diff.is_zero():
            return INF
        return min(padic_valuation(c, self.p) for c in diff.coeffs if c != 0)


def slope_factorization(P: Poly, h, p: int, precision: int = 20) -> SlopeFactorization:
    """Split off the slope <= h part of P (constant term 1) at the prime p."""
    require_prime(p)
    h = Fraction(h)
    if P.is_zero() or P.coeffs[0] != 1:
        raise ValueError("need P(0) = 1")
    d = P.degree
    polygon = newton_polygon(P, p)
    m = polygon.length_at_most(h)
    if m == 0:
        return SlopeFactorization(Poly.one(), P, h, 0, p, None, exact=True)
    if m == d:
        return SlopeFactorization(P, Poly.one(), h, d, p, None, exact=True)
    if all(i != m for i, _ in polygon.vertices):
        raise NoBreakError(f"no polygon vertex at horizontal position {m}")

    integral = all(padic_valuation(c, p) >= 0 for c in P.coeffs if c != 0)
    work = precision + RECONSTRUCTION_MARGIN
    Q = P.truncate(m + 1)
    S = (P * Q.series_inverse(d - m + 1)).truncate(d - m + 1)
    best = -1
    stall = 0
    for _ in range(80):
        E = P - Q * S
        ev = (
            INF
            if E.is_zero()
            else min(padic_valuation(c, p) for c in E.coeffs if c != 0)
        )
        if ev is INF or ev >= work:
            break
        if ev <= best:
            stall += 1
            if stall >= 4:
                raise SlopePrecisionError("iteration stalled before reaching precision")
        else:
            best = ev
            stall = 0
        dq, ds = _newton_step(Q, S, E, m, d)
        Q, S = Q + dq, S + ds
        if integral:
            Q = _reduce_if_integral(Q, p, work)
            S = _reduce_if_integral(S, p, work)
    else:
        raise SlopePrecisionError("iteration budget exhausted")

    exact = _try_exact_snap(P, Q, h, p, work, integral)
    if exact is not None:
        return exact

    Qa = _reduce_if_integral(Q, p, precision)
    Sa = _reduce_if_integral(S, p, precision)
    fact = SlopeFactorization(Qa, Sa, h, m, p, precision, exact=False)
    if fact.residual_valuation(P) < precision:
        raise SlopePrecisionError("could not certify the factorization mod p^precision")
    _validate_split(fact, p, h, integral)
    return fact


def _newton_step(Q, S, E, m, d):
    """Solve S dq + Q ds = E with dq(0) = ds(0) = 0, deg dq <= m, deg ds <= d-m."""
    cols = []
    for b in range(1, m + 1):
        shifted = S * Poly([0] * b + [1])
        cols.append([shifted[j] for j in range(1, d + 1)])
    for b in range(1, d - m + 1):
        shifted = Q * Poly([0] * b + [1])
        cols.append([shifted[j] for j in range(1, d + 1)])
    mat = Matrix([[cols[k][j] for k in range(d)] for j in range(d)])
    rhs = [E[j] for j in range(1, d + 1)]
    sol = mat.solve(rhs)
    if sol is None:
        raise SlopePrecisionError("linearized system is singular; factors not coprime")
    dq = Poly([0] + list(sol[:m]))
    ds = Poly([0] + list(sol[m:]))
    return dq, ds


def _reduce_if_integral(f: Poly, p: int, k: int) -> Poly:
    q = p**k
    out = []
    for c in f.coeffs:
        if c.denominator % p == 0:
            return f  # leave non-integral iterates untouched
        out.append(Fraction(c.numerator * pow(c.denominator, -1, q) % q))
    return Poly(out)


def rational_reconstruction(c: int, modulus: int) -> Fraction | None:
    """Small fraction a/b with a = c b (mod modulus), via half extended Euclid."""
    c %= modulus
    bound = isqrt(modulus // 2)
    a0, a1 = modulus, c
    b0, b1 = 0, 1
    while a1 > bound:
        if a1 == 0:
            return None
        q = a0 // a1
        a0, a1 = a1, a0 - q * a1
        b0, b1 = b1, b0 - q * b1
    if b1 == 0 or abs(b1) > bound or gcd(abs(b1), modulus) != 1:
        return None
    frac = Fraction(a1, b1)
    if (frac.numerator - c * frac.denominator) % modulus != 0:
        return None
    return frac


def _try_exact_snap(P, Q, h, p, work, integral):
    """Reconstruct a rational candidate for Q and verify it divides P exactly."""
    if not integral:
        return None
    modulus = p**work
    cand = [Fraction(1)]
    for c in Q.coeffs[1:]:
        if c.denominator % p == 0:
            return None
        rep = c.numerator * pow(c.denominator, -1, modulus) % modulus
        rec = rational_reconstruction(rep, modulus)
        if rec is None:
            return None
        cand.append(rec)
    Qe = Poly(cand)
    if Qe.degree != Q.degree:
        return None
    quo, rem = P.divmod(Qe)
    if not rem.is_zero():
        return None
    fact = SlopeFactorization(Qe, quo, Fraction(h), Qe.degree, p, None, exact=True)
    try:
        _validate_split(fact, p, Fraction(h), integral)
    except SlopePrecisionError:
        return None
    return fact


def _validate_split(fact: SlopeFactorization, p, h, integral):
    if fact.Q.degree >= 1:
        if any(s > h for s in newton_polygon(fact.Q, p).slopes()):
            raise SlopePrecisionError("low factor carries a slope above the bound")
        if integral and any(
            padic_valuation(c, p) < 0 for c in fact.Q.coeffs if c != 0
        ):
            raise SlopePrecisionError("low factor is not integral")
    if fact.S.degree >= 1 and fact.exact:
        if any(s <= h for s in newton_polygon(fact.S, p).slopes()):
            raise SlopePrecisionError("high factor carries a slope at or below the bound")
    if fact.Q.coeffs and fact.Q.coeffs[-1] == 0:
        raise SlopePrecisionError("low factor lost its leading coefficient")


@dataclass
class SlopeDecomposition:
    """Splitting into the slope <= h part and its polynomial complement."""

    q_part_basis: list[list[Fraction]]
    complement_basis: list[list[Fraction]]
    projector: Matrix
    factorization: SlopeFactorization
    report: dict = field(default_factory=dict)


def slope_decomposition(U: Matrix, h, p: int, precision: int = 20) -> SlopeDecomposition:
    """Split the space into ker Qt(U) and its complement, with a Bezout projector.

    Qt(U) vanishes on the first summand and is invertible on the second; both
    are U-stable and their dimensions are m and n - m.  Requires the slope
    factorization to land exactly (rational coefficients); a genuinely
    irrational factor raises SlopePrecisionError.
    """
    if not U.is_square():
        raise ValueError("matrix must be square")
    n = U.nrows
    h = Fraction(h)
    P = fredholm_series(U)
    fact = slope_factorization(P, h, p, precision)
    if not fact.exact:
        raise SlopePrecisionError(
            "slope factor is not rational at this height; exact splitting unavailable"
        )
    d = P.degree
    m = fact.Q.degree
    qt = fact.Q.reverse(m)
    # complement factor of the characteristic polynomial: x^(n-d) * reversed S
    st_full = Poly([0] * (n - d) + list(fact.S.reverse(d - m).coeffs))
    qt_U = qt.at_matrix(U)
    st_U = st_full.at_matrix(U)
    q_part = qt_U.kernel_basis()
    complement = st_U.kernel_basis()
    g, a, b = xgcd(qt, st_full)
    if g.degree != 0:
        raise SlopePrecisionError("factors of the characteristic polynomial not coprime")
    # normalize so that a*qt + b*st = 1 exactly
    a = a * (Fraction(1) / g.coeffs[0])
    b = b * (Fraction(1) / g.coeffs[0])
    projector = b.at_matrix(U) @ st_U
    checks = {
        "q_dim_matches_polygon": len(q_part) == m,
        "dims_sum": len(q_part) + len(complement) == n,
        "qt_annihilates_q_part": all(
            all(x == 0 for x in qt_U.apply(v)) for v in q_part
        ),
        "qt_invertible_on_complement": _restricted_invertible(qt_U, complement),
        "projector_idempotent": projector @ projector == projector,
        "projector_commutes": projector @ U == U @ projector,
        "projector_fixes_q_part": all(
            projector.apply(v) == [Fraction(x) for x in v] for v in q_part
        ),
        "projector_kills_complement": all(
            all(x == 0 for x in projector.apply(v)) for v in complement
        ),
        "u_stable_q_part": _stable_under(U, q_part),
        "u_stable_complement": _stable_under(U, complement),
    }
    return SlopeDecomposition(
        q_part, complement, projector, fact, {"ok": all(checks.values()), **checks}
    )


def _restricted_invertible(op: Matrix, basis) -> bool:
    if not basis:
        return True
    span = Matrix([list(v) for v in basis]).transpose()  # columns
    coords = []
    for v in basis:
        img = op.apply(v)
        x = span.solve(img)
        if x is None:
            return False
        coords.append(x)
    return Matrix([[coords[j][i] for j in range(len(coords))] for i in range(len(basis))]).det() != 0


def _stable_under(U: Matrix, basis) -> bool:
    if not basis:
        return True
    span = Matrix([list(v) for v in basis]).transpose()
    return all(span.solve(U.apply(v)) is not None for v in basis)
