"""Finite groups as explicit operation tables with identity 0."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class GroupAxiomError(ValueError):
    """A Cayley table failed validation; ``witness`` names the offending elements."""

    def __init__(self, axiom: str, witness: tuple[int, ...], message: str):
        super().__init__(f"{axiom} fails at {witness}: {message}")
        self.axiom = axiom
        self.witness = witness


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: np.ndarray
    name: str = ""
    inverses: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        table = np.array(self.table, dtype=np.int64)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "inverses", _validate(table))

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    def op(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    @property
    def elements(self) -> range:
        return range(self.order)

    @property
    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteGroup) and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash(self.table.tobytes())

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, name={self.name!r})"


def _validate(table: np.ndarray) -> np.ndarray:
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise ValueError(f"operation table must be a non-empty square array, got shape {table.shape}")
    n = table.shape[0]
    bad = np.argwhere((table < 0) | (table >= n))
    if bad.size:
        a, b = map(int, bad[0])
        raise GroupAxiomError("closure", (a, b), f"product {int(table[a, b])} is not an element")
    for a in range(n):
        if table[0, a] != a or table[a, 0] != a:
            raise GroupAxiomError("identity", (0, a), "element 0 is not a two-sided identity")
    # (ab)c == a(bc), one left factor at a time to bound memory
    for a in range(n):
        left = table[table[a]]  # [b, c] -> (ab)c
        right = table[a][table]  # [b, c] -> a(bc)
        diff = np.argwhere(left != right)
        if diff.size:
            b, c = map(int, diff[0])
            raise GroupAxiomError("associativity", (a, b, c), f"(ab)c={int(left[b, c])} but a(bc)={int(right[b, c])}")
    inverses = np.full(n, -1, dtype=np.int64)
    for a in range(n):
        hits = np.flatnonzero(table[a] == 0)
        for b in hits:
            if table[b, a] == 0:
                inverses[a] = b
                break
        else:
            raise GroupAxiomError("inverse", (a,), "no two-sided inverse")
    inverses.setflags(write=False)
    return inverses


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group order must be at least 1")
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n, name=f"Z{n}")


def dihedral(m: int) -> FiniteGroup:
    """Symmetries of the m-gon, order 2m; element ``r^i s^j`` has id ``i + m*j``."""
    if m < 1:
        raise ValueError("dihedral group needs m >= 1")
    n = 2 * m
    table = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        i, a = x % m, x // m
        for y in range(n):
            j, b = y % m, y // m
            table[x, y] = (i + (j if a == 0 else -j)) % m + m * ((a + b) % 2)
    return FiniteGroup(table, name=f"D{m}")


def symmetric(m: int) -> FiniteGroup:
    """Permutations of ``range(m)`` in lexicographic order; product is composition ``p(q(x))``."""
    if m < 1:
        raise ValueError("symmetric group needs m >= 1")
    if m > 6:
        raise ValueError("symmetric(m) is limited to m <= 6")
    perms = list(itertools.permutations(range(m)))
    index = {p: i for i, p in enumerate(perms)}
    table = np.array([[index[tuple(p[x] for x in q)] for q in perms] for p in perms], dtype=np.int64)
    return FiniteGroup(table, name=f"S{m}")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Componentwise product; the pair ``(a, b)`` has id ``a*|H| + b``."""
    nh = h.order
    table = (g.table[:, None, :, None] * nh + h.table[None, :, None, :]).reshape(g.order * nh, g.order * nh)
    name = f"{g.name}x{h.name}" if g.name and h.name else ""
    return FiniteGroup(table, name=name)


def semidirect_cyclic(m: int, k: int, r: int) -> FiniteGroup:
    """``Z_m ⋊ Z_k`` with generator of ``Z_k`` acting by ``a -> a^r``; ``a^i b^j`` has id ``i + m*j``."""
    if pow(r, k, m) != 1 % m:
        raise ValueError(f"r={r} does not define an action of Z_{k} on Z_{m}")
    n = m * k
    table = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        i, j = x % m, x // m
        twist = pow(r, j, m)
        for y in range(n):
            i2, j2 = y % m, y // m
            table[x, y] = (i + i2 * twist) % m + m * ((j + j2) % k)
    return FiniteGroup(table, name=f"Z{m}:Z{k}[{r}]")


def from_cayley_table(text: str, name: str | None = None) -> FiniteGroup:
    """Parse ``n`` then ``n`` rows of element ids, optionally followed by ``# name``."""
    lines = [ln.strip() for ln in text.strip().splitlines()]
    label = ""
    rows = []
    for ln in lines:
        if not ln:
            continue
        if ln.startswith("#"):
            label = label or ln[1:].strip()
            continue
        rows.append(ln)
    if not rows:
        raise ValueError("empty Cayley table")
    try:
        n = int(rows[0])
        body = [[int(t) for t in r.split()] for r in rows[1:]]
    except ValueError as exc:
        raise ValueError(f"Cayley table must contain integers: {exc}") from None
    if len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"Cayley table is not {n}x{n}")
    return FiniteGroup(np.array(body, dtype=np.int64), name=name if name is not None else label)


def to_cayley_table(group: FiniteGroup) -> str:
    lines = [str(group.order)]
    lines += [" ".join(str(int(x)) for x in row) for row in group.table]
    if group.name:
        lines.append(f"# {group.name}")
    return "\n".join(lines) + "\n"
