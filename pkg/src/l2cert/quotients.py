"""Finite groups given by multiplication tables, and the naive search for
homomorphisms into symmetric groups.

Permutations are tuples ``p`` with ``p[x]`` the image of ``x``.  The product
``p * q`` means "first ``p``, then ``q``", so a word ``s1 s2 ... sn`` is
evaluated left to right.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import InvalidTable
from .words import Alphabet, Word

Perm = tuple[int, ...]


def perm_mul(p: Perm, q: Perm) -> Perm:
    return tuple(q[x] for x in p)


def perm_inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def perm_eval(letters, images: Sequence[Perm], inverses: Sequence[Perm], degree: int) -> Perm:
    cur = tuple(range(degree))
    for idx, sign in letters:
        cur = perm_mul(cur, images[idx] if sign > 0 else inverses[idx])
    return cur


def cycle_notation(p: Perm) -> str:
    seen = set()
    cycles = []
    for start in range(len(p)):
        if start in seen or p[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        x = p[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = p[x]
        cycles.append("(" + " ".join(str(c + 1) for c in cyc) + ")")
    return "".join(cycles) or "id"


@dataclass(frozen=True)
class FiniteQuotient:
    """A finite group with identity at index 0 and generator images.

    ``table[i][j]`` is the index of the product of elements ``i`` and ``j``.
    """

    order: int
    table: tuple[tuple[int, ...], ...]
    generator_images: tuple[int, ...]
    alphabet: Alphabet
    label: str = ""
    elements: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.order < 1 or len(self.table) != self.order:
            raise InvalidTable(f"table has {len(self.table)} rows, expected order {self.order}")
        for row in self.table:
            if len(row) != self.order or any(not (0 <= x < self.order) for x in row):
                raise InvalidTable("malformed multiplication table row")
        if len(self.generator_images) != len(self.alphabet):
            raise InvalidTable("one generator image per alphabet generator is required")
        if any(not (0 <= g < self.order) for g in self.generator_images):
            raise InvalidTable("generator image out of range")
        inv = []
        for i in range(self.order):
            row = self.table[i]
            try:
                inv.append(row.index(0))
            except ValueError:
                raise InvalidTable(f"element {i} has no inverse") from None
        object.__setattr__(self, "_inverse", tuple(inv))

    @property
    def inverse(self) -> tuple[int, ...]:
        return self._inverse  # type: ignore[attr-defined]

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def evaluate(self, w: Word) -> int:
        return self.evaluate_letters(w.letters)

    def evaluate_letters(self, letters) -> int:
        cur = 0
        gens, inv, table = self.generator_images, self.inverse, self.table
        for idx, sign in letters:
            g = gens[idx]
            cur = table[cur][g if sign > 0 else inv[g]]
        return cur

    def check_group_law(self, exhaustive_limit: int = 64) -> None:
        """Raise :class:`InvalidTable` unless the table is a group law.

        Associativity is checked on all triples when ``order <= exhaustive_limit``
        and on (element, element, generator) triples otherwise.
        """
        n, t = self.order, self.table
        if any(t[0][i] != i or t[i][0] != i for i in range(n)):
            raise InvalidTable("index 0 is not a two-sided identity")
        for i in range(n):
            if sorted(t[i]) != list(range(n)):
                raise InvalidTable(f"row {i} is not a permutation (cancellation fails)")
            if t[self.inverse[i]][i] != 0:
                raise InvalidTable(f"element {i} has no two-sided inverse")
        thirds = range(n) if n <= exhaustive_limit else sorted(set(self.generator_images))
        for a in range(n):
            ta = t[a]
            for b in range(n):
                ab = ta[b]
                tb = t[b]
                for c in thirds:
                    if t[ab][c] != ta[tb[c]]:
                        raise InvalidTable(f"associativity fails at ({a}, {b}, {c})")
        if len(self.closure()) != n:
            raise InvalidTable("generator images do not generate the whole table")

    def closure(self) -> list[int]:
        """Elements reachable from the identity by right multiplication with generators."""
        gens = set(self.generator_images) | {self.inverse[g] for g in self.generator_images}
        seen = {0}
        queue = deque([0])
        order = [0]
        while queue:
            x = queue.popleft()
            for g in sorted(gens):
                y = self.table[x][g]
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    queue.append(y)
        return order

    def element_words(self) -> tuple[Word, ...]:
        """Shortlex-least word for every element (the canonical element words)."""
        cached = self.__dict__.get("_words")
        if cached is not None:
            return cached
        words: list[Word | None] = [None] * self.order
        words[0] = Word(self.alphabet, ())
        queue = deque([0])
        letters = [(i, s) for i in range(len(self.alphabet)) for s in (1, -1)]
        while queue:
            x = queue.popleft()
            for idx, sign in letters:
                g = self.generator_images[idx]
                y = self.table[x][g if sign > 0 else self.inverse[g]]
                if words[y] is None:
                    words[y] = Word(self.alphabet, words[x].letters + ((idx, sign),))
                    queue.append(y)
        if any(w is None for w in words):
            raise InvalidTable("generator images do not generate the whole table")
        result = tuple(words)  # type: ignore[arg-type]
        object.__setattr__(self, "_words", result)
        return result

    def separates(self, words: Sequence[Word]) -> bool:
        return all(self.evaluate(w) != 0 for w in words)

    @classmethod
    def from_permutations(cls, alphabet: Alphabet, images: Sequence[Perm], label: str = "") -> "FiniteQuotient":
        """The subgroup of a symmetric group generated by ``images``."""
        degree = len(images[0]) if images else 1
        ident = tuple(range(degree))
        elements = [ident]
        index = {ident: 0}
        gens = list(images) + [perm_inv(p) for p in images]
        queue = deque([ident])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = perm_mul(x, g)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    queue.append(y)
        table = tuple(tuple(index[perm_mul(x, y)] for y in elements) for x in elements)
        gen_images = tuple(index[p] for p in images)
        return cls(len(elements), table, gen_images, alphabet, label, tuple(elements))

    @classmethod
    def cyclic_product(cls, alphabet: Alphabet, moduli: Sequence[int], label: str = "") -> "FiniteQuotient":
        """``Z/m1 x ... x Z/mr`` with the i-th generator mapped to the i-th unit vector."""
        elements = list(itertools.product(*[range(m) for m in moduli]))
        index = {e: i for i, e in enumerate(elements)}
        table = tuple(
            tuple(index[tuple((a + b) % m for a, b, m in zip(x, y, moduli))] for y in elements)
            for x in elements
        )
        gens = []
        for i in range(len(moduli)):
            e = [0] * len(moduli)
            e[i] = 1 % moduli[i]
            gens.append(index[tuple(e)])
        return cls(len(elements), table, tuple(gens), alphabet, label, tuple(elements))

    @classmethod
    def from_elements(cls, alphabet: Alphabet, identity, generators, mul, label: str = "") -> "FiniteQuotient":
        """Close ``generators`` under the hashable group law ``mul``."""
        elements = [identity]
        index = {identity: 0}
        queue = deque([identity])
        while queue:
            x = queue.popleft()
            for g in generators:
                y = mul(x, g)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    queue.append(y)
        table = tuple(tuple(index[mul(x, y)] for y in elements) for x in elements)
        return cls(len(elements), table, tuple(index[g] for g in generators), alphabet, label, tuple(elements))

    def direct_product(self, other: "FiniteQuotient", alphabet: Alphabet) -> "FiniteQuotient":
        """Product group; generators of ``self`` come first in ``alphabet``."""
        n2 = other.order
        table = tuple(
            tuple(self.table[a1][b1] * n2 + other.table[a2][b2] for b1 in range(self.order) for b2 in range(n2))
            for a1 in range(self.order)
            for a2 in range(n2)
        )
        gens = tuple(g * n2 for g in self.generator_images) + tuple(other.generator_images)
        label = f"({self.label}) x ({other.label})"
        return FiniteQuotient(self.order * n2, table, gens, alphabet, label)


def symmetric_group(p: int) -> list[Perm]:
    """Elements of ``S_p`` in lexicographic order (identity first)."""
    return list(itertools.permutations(range(p)))


def enumerate_permutation_homs(
    alphabet: Alphabet,
    relators: Sequence[Word],
    max_degree: int,
    forbidden: Sequence[Word] = (),
    min_degree: int = 1,
) -> Iterator[tuple[int, tuple[Perm, ...]]]:
    """Maps ``S -> S_p`` killing every relator and no forbidden word.

    Order: ascending ``p``, then lexicographic in the tuple of generator
    images under the alphabet order.
    """
    r = len(alphabet)
    for p in range(max(1, min_degree), max_degree + 1):
        perms = symmetric_group(p)
        ident = perms[0]
        inv_of = {q: perm_inv(q) for q in perms}
        for images in itertools.product(perms, repeat=r):
            inverses = [inv_of[q] for q in images]
            if any(perm_eval(rel.letters, images, inverses, p) != ident for rel in relators):
                continue
            if any(perm_eval(w.letters, images, inverses, p) == ident for w in forbidden):
                continue
            yield p, images
