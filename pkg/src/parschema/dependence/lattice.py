"""Integer solutions of linear systems ``A x = b``.

Column operations with extended gcd bring ``A`` to lower column-echelon form
``H = A U`` with ``U`` unimodular.  The solution set is then
``x0 + span_Z(kernel)``; the kernel basis is itself echelonized so lattice
points inside a box can be listed with nested interval bounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

Matrix = list[list[int]]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def column_echelon(A: Matrix, ncols: int | None = None) -> tuple[Matrix, Matrix, list[tuple[int, int]]]:
    """Return (H, U, pivots) with H = A U, U unimodular, H lower column-echelon.

    ``pivots`` lists (row, column) pairs; pivot entries are positive and each
    pivot column is zero above its pivot row.
    """
    m = len(A)
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    H = [list(row) for row in A]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def combine(c: int, j: int, p: int, q: int, r: int, s: int) -> None:
        # col_c, col_j <- p*col_c + r*col_j, q*col_c + s*col_j
        for M in (H, U):
            for row in M:
                a, b = row[c], row[j]
                row[c], row[j] = p * a + r * b, q * a + s * b

    c = 0
    pivots: list[tuple[int, int]] = []
    for r in range(m):
        if c >= n:
            break
        for j in range(c + 1, n):
            b = H[r][j]
            if b == 0:
                continue
            a = H[r][c]
            g, s, t = _egcd(a, b)
            combine(c, j, s, -b // g, t, a // g)
        if H[r][c] != 0:
            if H[r][c] < 0:
                for M in (H, U):
                    for row in M:
                        row[c] = -row[c]
            pivots.append((r, c))
            c += 1
    return H, U, pivots


@dataclass
class IntegerLattice:
    """Affine integer lattice ``particular + Z-span(basis columns)``."""

    particular: list[int]
    basis: list[list[int]]  # list of column vectors, echelonized
    pivot_rows: list[int]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def point(self, t: list[int]) -> list[int]:
        x = list(self.particular)
        for tj, col in zip(t, self.basis):
            for i, v in enumerate(col):
                x[i] += tj * v
        return x

    def interval_bounds(self, box: list[tuple[int, int]], t_prefix: list[int]) -> tuple[int, int]:
        """Closed-form range of the next parameter given the earlier ones."""
        j = len(t_prefix)
        row = self.pivot_rows[j]
        base = self.particular[row] + sum(t * self.basis[k][row] for k, t in enumerate(t_prefix))
        coef = self.basis[j][row]
        lo, hi = box[row]
        return -((base - lo) // coef), (hi - base) // coef  # ceil, floor

    def points_in_box(self, box: list[tuple[int, int]]) -> Iterator[tuple[int, ...]]:
        def inside(x):
            return all(lo <= v <= hi for v, (lo, hi) in zip(x, box))

        def rec(prefix: list[int]):
            if len(prefix) == self.dimension:
                x = self.point(prefix)
                if inside(x):
                    yield tuple(x)
                return
            lo, hi = self.interval_bounds(box, prefix)
            for t in range(lo, hi + 1):
                yield from rec(prefix + [t])

        yield from rec([])


def solve_integer_system(A: Matrix, b: list[int], nvars: int) -> IntegerLattice | None:
    """All integer x with A x = b, or None if there is none."""
    H, U, pivots = column_echelon(A, nvars)
    rank = len(pivots)
    y = [0] * nvars
    for r, c in pivots:
        rest = b[r] - sum(H[r][j] * y[j] for j in range(c))
        if rest % H[r][c]:
            return None
        y[c] = rest // H[r][c]
    for r in range(len(A)):
        if sum(H[r][j] * y[j] for j in range(nvars)) != b[r]:
            return None
    x0 = [sum(U[i][j] * y[j] for j in range(nvars)) for i in range(nvars)]
    kernel_cols = [[U[i][j] for i in range(nvars)] for j in range(rank, nvars)]
    if not kernel_cols:
        return IntegerLattice(x0, [], [])
    # echelonize the kernel: treat it as an nvars x k matrix
    K = [[kernel_cols[j][i] for j in range(len(kernel_cols))] for i in range(nvars)]
    E, _, kpiv = column_echelon(K, len(kernel_cols))
    basis = [[E[i][j] for i in range(nvars)] for j in range(len(kpiv))]
    return IntegerLattice(x0, basis, [r for r, _ in kpiv])
