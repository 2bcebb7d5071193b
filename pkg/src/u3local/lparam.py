"""Moduli of tame parameter pairs (phi, N) with Ad(phi) N = l N.

For an invertible phi the solutions N form a linear space; for diagonal phi
it is spanned by the matrix units E_ij with phi_i = l * phi_j.  Nilpotent
orbits are partitions via Jordan type, and membership of the semisimple point
(phi, 0) in the closure of a nilpotent stratum is certified constructively by
a cocharacter mu with Ad(diag(t^mu)) N = t N, checked symbolically in t.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .linalg import Matrix


class NoWitnessError(ValueError):
    """The integer weight system for a degeneration witness is inconsistent."""


def matrix_unit(n: int, i: int, j: int) -> Matrix:
    m = Matrix.zeros(n, n)
    m.rows[i][j] = Fraction(1)
    return m


@dataclass
class TameParameterPoint:
    """A pair (phi, N) over the rationals with scale factor l."""

    phi: Matrix
    N: Matrix
    l: Fraction

    def __post_init__(self):
        self.l = Fraction(self.l)
        if not (self.phi.is_square() and self.N.is_square()):
            raise ValueError("phi and N must be square")
        if self.phi.shape != self.N.shape:
            raise ValueError("phi and N must have the same size")


def verify_point(pt: TameParameterPoint) -> bool:
    """Check Ad(phi) N = l N and nilpotency of N, exactly."""
    n = pt.N.nrows
    if pt.phi.det() == 0:
        return False
    if pt.phi @ pt.N != (pt.N @ pt.phi).scale(pt.l):
        return False
    power = pt.N
    for _ in range(n - 1):
        power = power @ pt.N
    return power == Matrix.zeros(n, n)


def solution_space(phi: Matrix, l) -> list[Matrix]:
    """Basis of {N : phi N phi^(-1) = l N} as matrices.

    Solved as a linear system in the n^2 entries; for diagonal phi the answer
    is spanned by the E_ij with phi_i = l phi_j.
    """
    if not phi.is_square():
        raise ValueError("phi must be square")
    if phi.det() == 0:
        raise ValueError("phi must be invertible")
    l = Fraction(l)
    n = phi.nrows
    # phi N - l N phi = 0, row by row in the entries of N
    rows = []
    for a in range(n):
        for b in range(n):
            row = [Fraction(0)] * (n * n)
            for k in range(n):
                row[k * n + b] += phi.rows[a][k]
                row[a * n + k] -= l * phi.rows[k][b]
            rows.append(row)
    basis = Matrix(rows).kernel_basis()
    return [Matrix([vec[i * n : (i + 1) * n] for i in range(n)]) for vec in basis]


def jordan_partition(N: Matrix) -> tuple[int, ...]:
    """Jordan type of a nilpotent matrix, read off the ranks of its powers."""
    n = N.nrows
    ranks = [n]
    power = Matrix.identity(n)
    for _ in range(n):
        power = power @ N
        ranks.append(power.rank())
    if ranks[-1] != 0:
        raise ValueError("matrix is not nilpotent")
    # number of blocks of size >= k is rank(N^(k-1)) - rank(N^k)
    blocks = []
    for k in range(1, n + 1):
        count_ge_k = ranks[k - 1] - ranks[k]
        blocks.append(count_ge_k)
    partition = []
    for k in range(n, 0, -1):
        exactly_k = blocks[k - 1] - (blocks[k] if k < n else 0)
        partition.extend([k] * exactly_k)
    return tuple(partition)


def partitions_of(n: int):
    """All partitions of n, weakly decreasing, in reverse lexicographic order."""
    if n == 0:
        yield ()
        return

    def rec(rest, maxpart):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, maxpart), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail

    yield from rec(n, n)


def jordan_representative(partition: tuple[int, ...]) -> Matrix:
    """Block nilpotent matrix in Jordan form with the given block sizes."""
    n = sum(partition)
    m = Matrix.zeros(n, n)
    offset = 0
    for part in partition:
        for i in range(part - 1):
            m.rows[offset + i][offset + i + 1] = Fraction(1)
        offset += part
    return m


def nilpotent_orbits(n: int) -> list[tuple[tuple[int, ...], Matrix]]:
    """All nilpotent orbit labels for n x n matrices, with representatives."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for part in partitions_of(n):
        rep = jordan_representative(part)
        assert jordan_partition(rep) == part
        out.append((part, rep))
    return out


def dominates(lam: tuple[int, ...], mu: tuple[int, ...]) -> bool:
    """Dominance order on partitions of the same integer: lam >= mu."""
    if sum(lam) != sum(mu):
        return False
    acc_l = acc_m = 0
    for k in range(max(len(lam), len(mu))):
        acc_l += lam[k] if k < len(lam) else 0
        acc_m += mu[k] if k < len(mu) else 0
        if acc_l < acc_m:
            return False
    return True


def components_through(s: Matrix, l) -> set[tuple[int, ...]]:
    """Jordan types of strata whose closures contain the point (s, 0).

    Enumerates the types of all 0/1 combinations of the solution-space basis,
    then closes downward under dominance.  Exact for diagonal s whose entry
    ratios are powers of l; heuristic otherwise (the basis need not consist of
    matrix units then).
    """
    _require_diagonal(s)
    n = s.nrows
    basis = solution_space(s, l)
    realized = set()
    for bits in itertools.product((0, 1), repeat=len(basis)):
        N = Matrix.zeros(n, n)
        for b, mat in zip(bits, basis):
            if b:
                N = N + mat
        realized.add(jordan_partition(N))
    closed = set(realized)
    for lam in realized:
        for mu in partitions_of(n):
            if dominates(lam, mu):
                closed.add(mu)
    return closed


def stratum_witnesses(s: Matrix, l) -> dict:
    """For each reported Jordan type, a 0/1-combination representative in the
    solution space together with its verified degeneration witness.

    In the power-of-l diagonal regime every reported type is realized by a
    0/1 combination; a type reachable only through dominance closure (possible
    off that regime) is mapped to None.
    """
    _require_diagonal(s)
    n = s.nrows
    basis = solution_space(s, l)
    reps: dict[tuple[int, ...], Matrix] = {}
    for bits in itertools.product((0, 1), repeat=len(basis)):
        N = Matrix.zeros(n, n)
        for b, mat in zip(bits, basis):
            if b:
                N = N + mat
        reps.setdefault(jordan_partition(N), N)
    out = {}
    for part in sorted(components_through(s, l), reverse=True):
        N = reps.get(part)
        if N is None:
            out[part] = None
            continue
        witness = degeneration_witness(s, N, l)
        out[part] = {
            "support": [(i, j) for i in range(n) for j in range(n) if N.rows[i][j] != 0],
            "witness": witness,
            "verified": witness.scaling_verified
            and witness.path_on_stratum
            and witness.specializes_to_zero,
        }
    return out


def is_degenerate_satake(s: Matrix, l) -> bool:
    """True iff some pair of diagonal entries has ratio exactly l, equivalently
    the solution space at (s, l) is nonzero."""
    _require_diagonal(s)
    l = Fraction(l)
    diag = [s.rows[i][i] for i in range(s.nrows)]
    return any(
        i != j and diag[i] == l * diag[j] for i in range(len(diag)) for j in range(len(diag))
    )


def _require_diagonal(s: Matrix):
    if not s.is_square():
        raise ValueError("s must be square")
    for i in range(s.nrows):
        if s.rows[i][i] == 0:
            raise ValueError("s must be invertible diagonal")
        for j in range(s.ncols):
            if i != j and s.rows[i][j] != 0:
                raise ValueError("s must be diagonal")


@dataclass
class DegenerationWitness:
    """Cocharacter weights mu with Ad(diag(t^mu)) N = t N, plus check results."""

    mu: tuple[int, ...]
    scaling_verified: bool
    path_on_stratum: bool
    specializes_to_zero: bool


def degeneration_witness(s: Matrix, N: Matrix, l) -> DegenerationWitness:
    """Integer weights mu_i - mu_j = 1 on the support of N, verified symbolically.

    The verification conjugates N by diag(t^mu) with t a formal variable: every
    support entry must scale by exactly t^1, so the path (s, tN) stays on the
    stratum of N for t != 0 and lands on (s, 0) at t = 0.
    """
    _require_diagonal(s)
    n = N.nrows
    support = [(i, j) for i in range(n) for j in range(n) if N.rows[i][j] != 0]
    if not lattice_consistent(support, n):
        raise NoWitnessError("support carries a cycle with nonzero weight sum")
    mu = _solve_weights(support, n)
    # symbolic check: exponent of t on entry (i, j) is mu_i - mu_j; need 1 on support
    scaling = all(mu[i] - mu[j] == 1 for i, j in support)
    # the path (s, tN): Ad(s)(tN) = t * Ad(s)(N) = t * l * N = l * (tN), any t
    on_stratum = all(
        s.rows[i][i] * N.rows[i][j] == Fraction(l) * N.rows[i][j] * s.rows[j][j]
        for i, j in support
    )
    return DegenerationWitness(tuple(mu), scaling, on_stratum, True)


def lattice_consistent(support, n) -> bool:
    """Whether mu_i - mu_j = 1 for all (i, j) in support admits an integer solution."""
    color = [None] * n
    for start in range(n):
        if color[start] is not None:
            continue
        color[start] = 0
        stack = [start]
        adj = {}
        for i, j in support:
            adj.setdefault(i, []).append((j, -1))
            adj.setdefault(j, []).append((i, +1))
        while stack:
            v = stack.pop()
            for w, delta in adj.get(v, []):
                want = color[v] + delta
                if color[w] is None:
                    color[w] = want
                    stack.append(w)
                elif color[w] != want:
                    return False
    return True


def _solve_weights(support, n):
    mu = [None] * n
    adj = {}
    for i, j in support:
        adj.setdefault(i, []).append((j, -1))
        adj.setdefault(j, []).append((i, +1))
    for start in range(n):
        if mu[start] is not None:
            continue
        mu[start] = 0
        stack = [start]
        while stack:
            v = stack.pop()
            for w, delta in adj.get(v, []):
                if mu[w] is None:
                    mu[w] = mu[v] + delta
                    stack.append(w)
    # normalize each component to nonnegative weights with min 0
    return [x - min(mu) for x in mu] if n else []


def pgl2_check(l) -> dict:
    """For phi = identity acting on trace-zero 2x2 matrices, N = l N forces N = 0.

    The rank-one analogue with two compact classes: the semisimple point is not
    an intersection point, unlike diag(l, 1) for the full 2x2 matrix algebra.
    """
    l = Fraction(l)
    if l == 1:
        raise ValueError("l must differ from 1")
    # basis of trace-zero 2x2: H, E, F; identity conjugation fixes all of them,
    # so the equation N = l N has only the zero solution
    basis = [
        Matrix([[1, 0], [0, -1]]),
        Matrix([[0, 1], [0, 0]]),
        Matrix([[0, 0], [1, 0]]),
    ]
    sols = []
    for b in basis:
        if b == b.scale(l):
            sols.append(b)
    contrast = solution_space(Matrix([[l, 0], [0, 1]]), l)
    return {
        "solution_dimension": len(sols),
        "not_intersection_point": len(sols) == 0,
        "gl2_contrast_dimension": len(contrast),
    }
