"""
Exact kernels of linear systems.

Rows over the problem field are cleared to polynomial rows and handed to
sympy's ``DomainMatrix``, whose fraction-free elimination keeps the entries
polynomial. Rows over QQ (numeric specializations) use the QQ domain directly.
"""

from functools import reduce
from typing import List, Optional, Sequence

from sympy import QQ
from sympy.polys.fields import FracElement
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

from .algebra import AlgebraContext, BigRat


def clear_row(ctx: AlgebraContext, row: Sequence[FracElement]) -> List[PolyElement]:
    """把一行域元素缩放为无公因子的多项式"""
    ring = ctx.ring
    nonzero = [c for c in row if c]
    if not nonzero:
        return [ring.zero] * len(row)
    denominator = reduce(lambda a, b: a.lcm(b), (c.denom for c in nonzero))
    polys = [c.numer * denominator.exquo(c.denom) if c else ring.zero for c in row]
    common = reduce(lambda a, b: a.gcd(b), (p for p in polys if p))
    return [p.exquo(common) if p else p for p in polys]


def field_nullspace(
    ctx: AlgebraContext, rows: Sequence[Sequence[FracElement]], ncols: int
) -> List[List[FracElement]]:
    """
    Basis of {v : rows * v = 0}, one vector per free column in ascending
    column order; each vector has a nonzero entry at its free column and
    zeros at the other free columns.
    """
    if not rows:
        return [[ctx.one if i == j else ctx.zero for i in range(ncols)] for j in range(ncols)]
    K = ctx.ring.to_domain()
    cleared = [clear_row(ctx, row) for row in rows]
    matrix = DomainMatrix(cleared, (len(cleared), ncols), K)
    basis = matrix.nullspace().to_list()
    return [[ctx.from_poly(p) for p in vector] for vector in basis]


def rational_nullspace(rows: Sequence[Sequence[BigRat]], ncols: int) -> List[List[BigRat]]:
    """Kernel basis of a matrix over QQ, normalized so the free entry is 1."""
    if not rows:
        return [[QQ(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    matrix = DomainMatrix([list(map(QQ.convert, row)) for row in rows], (len(rows), ncols), QQ)
    return matrix.nullspace(divide_last=True).to_list()


def kernel_vector(
    ctx: AlgebraContext, rows: Sequence[Sequence[FracElement]], ncols: int
) -> Optional[List[FracElement]]:
    """
    The kernel vector attached to the last free column, or None.

    Unknowns are ordered by increasing size of the ansatz, so the last free
    column is the one whose solution uses the highest unknown.
    """
    basis = field_nullspace(ctx, rows, ncols)
    return basis[-1] if basis else None


def kernel_dimension(rows: Sequence[Sequence[BigRat]], ncols: int) -> int:
    """QQ 上矩阵的零化度"""
    return len(rational_nullspace(rows, ncols))


def independent_rows(rows: Sequence[Sequence[BigRat]], ncols: int) -> List[int]:
    """按顺序贪心选出 QQ 上极大线性无关行组的下标"""
    chosen: List[int] = []
    for i, row in enumerate(rows):
        trial = [rows[j] for j in chosen] + [row]
        matrix = DomainMatrix([list(map(QQ.convert, r)) for r in trial], (len(trial), ncols), QQ)
        if matrix.rank() > len(chosen):
            chosen.append(i)
            if len(chosen) == ncols:
                break
    return chosen
