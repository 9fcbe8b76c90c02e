"""Prime-field arithmetic and Latin squares over Z/pZ.

Only prime orders are supported. Squares are built as ``L_a(i, j) = a*i + j``
for ``a = 1, 2, ...`` so the worker numbering derived from them is stable.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import DegreeMismatch, InvalidParams, NotPrime, TooManyRequested, Unsupported


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_power_base(n: int) -> Optional[int]:
    """Return p if n == p**k for a prime p and k >= 2, else None."""
    for p in range(2, int(n**0.5) + 1):
        if n % p:
            continue
        if not is_prime(p):
            return None
        m = n
        while m % p == 0:
            m //= p
        return p if m == 1 else None
    return None


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrime(f"{self.p} is not prime")

    @property
    def order(self) -> int:
        return self.p

    def elements(self) -> range:
        return range(self.p)

    def add(self, x: int, y: int) -> int:
        return (x + y) % self.p

    def sub(self, x: int, y: int) -> int:
        return (x - y) % self.p

    def mul(self, x: int, y: int) -> int:
        return (x * y) % self.p

    def neg(self, x: int) -> int:
        return (-x) % self.p

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, self.p - 2, self.p)


def make_prime_field(p: int) -> PrimeField:
    """Build the field of integers mod ``p``.

    Raises :class:`Unsupported` for proper prime powers such as 4, 8 or 9 and
    :class:`NotPrime` for any other non-prime.
    """
    if p < 2:
        raise NotPrime(f"field order must be >= 2, got {p}")
    if not is_prime(p):
        base = _prime_power_base(p)
        if base is not None:
            raise Unsupported(f"{p} = {base}^k is a prime power; only prime orders are supported")
        raise NotPrime(f"{p} is not prime")
    return PrimeField(p)


Cells = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class LatinSquare:
    degree: int
    cells: Cells
    alpha: Optional[int] = None

    def __post_init__(self):
        l = self.degree
        if len(self.cells) != l or any(len(row) != l for row in self.cells):
            raise InvalidParams(f"cells must be {l}x{l}")

    def __getitem__(self, ij):
        i, j = ij
        return self.cells[i][j]

    def is_latin(self) -> bool:
        symbols = set(range(self.degree))
        rows_ok = all(set(row) == symbols for row in self.cells)
        cols_ok = all(set(col) == symbols for col in zip(*self.cells))
        return rows_ok and cols_ok

    def positions(self, symbol: int):
        """Cells holding ``symbol``, in row-major order."""
        return [
            (i, j)
            for i, row in enumerate(self.cells)
            for j, s in enumerate(row)
            if s == symbol
        ]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], alpha: Optional[int] = None) -> "LatinSquare":
        cells = tuple(tuple(int(x) for x in row) for row in rows)
        return cls(len(cells), cells, alpha)


@dataclass(frozen=True)
class MolsFamily:
    degree: int
    squares: Tuple[LatinSquare, ...]

    def __len__(self):
        return len(self.squares)

    def __getitem__(self, k) -> LatinSquare:
        return self.squares[k]

    def __iter__(self):
        return iter(self.squares)

    def is_mutually_orthogonal(self) -> bool:
        sq = self.squares
        return all(
            check_orthogonal(sq[a], sq[b])
            for a in range(len(sq))
            for b in range(a + 1, len(sq))
        )


def field_square(field: PrimeField, alpha: int) -> LatinSquare:
    l = field.p
    if alpha % l == 0:
        raise InvalidParams("alpha must be a nonzero field element")
    cells = tuple(
        tuple(field.add(field.mul(alpha, i), j) for j in range(l)) for i in range(l)
    )
    return LatinSquare(l, cells, alpha)


def build_mols(l: int, count: int) -> MolsFamily:
    """Return ``count`` MOLS of prime degree ``l`` using multipliers 1..count."""
    field = make_prime_field(l)
    if count > l - 1:
        raise TooManyRequested(f"at most {l - 1} MOLS of degree {l} exist, requested {count}")
    if count < 1:
        raise InvalidParams(f"count must be >= 1, got {count}")
    return MolsFamily(l, tuple(field_square(field, a) for a in range(1, count + 1)))


def check_orthogonal(a: LatinSquare, b: LatinSquare) -> bool:
    if a.degree != b.degree:
        raise DegreeMismatch(f"degrees differ: {a.degree} vs {b.degree}")
    l = a.degree
    pairs = Counter(
        (a.cells[i][j], b.cells[i][j]) for i in range(l) for j in range(l)
    )
    return len(pairs) == l * l and all(c == 1 for c in pairs.values())
