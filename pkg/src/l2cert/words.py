"""Alphabets, words over signed generators, and free reduction.

A word is a finite sequence of letters ``(generator_index, sign)`` with
``sign`` in ``{+1, -1}``.  Parsing never reduces; call :func:`free_reduce`
explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AlphabetMismatch, WordSyntaxError

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_TOKEN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?")

Letter = tuple[int, int]


@dataclass(frozen=True)
class Alphabet:
    """Ordered tuple of distinct generator names.

    The order is fixed and defines every enumeration order downstream.
    An empty alphabet is allowed and presents the trivial group.
    """

    generators: tuple[str, ...]

    def __init__(self, generators: Iterable[str]):
        gens = tuple(generators)
        seen = set()
        for g in gens:
            if not isinstance(g, str) or not _NAME.fullmatch(g):
                raise ValueError(f"invalid generator name {g!r}")
            if g in seen:
                raise ValueError(f"duplicate generator name {g!r}")
            seen.add(g)
        object.__setattr__(self, "generators", gens)

    def __len__(self) -> int:
        return len(self.generators)

    def __contains__(self, name: object) -> bool:
        return name in self.generators

    def index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise KeyError(name) from None

    def word(self, text: str) -> "Word":
        return parse_word(text, self)

    def generator(self, i: int) -> "Word":
        return Word(self, ((i, 1),))

    def __repr__(self) -> str:
        return f"Alphabet({list(self.generators)!r})"


@dataclass(frozen=True, slots=True)
class Word:
    alphabet: Alphabet
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        n = len(self.alphabet)
        for idx, sign in self.letters:
            if not (0 <= idx < n) or sign not in (1, -1):
                raise ValueError(f"invalid letter {(idx, sign)!r} for {self.alphabet!r}")

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Word":
        return cls(alphabet, ())

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def __str__(self) -> str:
        return serialize(self)

    def __repr__(self) -> str:
        return f"Word({serialize(self)!r})"

    def signed(self) -> tuple[int, ...]:
        """Letters packed as nonzero ints: ``+(i+1)`` or ``-(i+1)``."""
        return tuple(sign * (idx + 1) for idx, sign in self.letters)

    @classmethod
    def from_signed(cls, alphabet: Alphabet, letters: Sequence[int]) -> "Word":
        return cls(alphabet, tuple((abs(x) - 1, 1 if x > 0 else -1) for x in letters))


def parse_word(text: str, alphabet: Alphabet) -> Word:
    """Parse whitespace-separated tokens ``name``, ``name^-1`` or ``name^k``.

    ``"1"`` denotes the empty word.  No reduction is applied.
    """
    stripped = text.strip()
    if stripped == "1":
        return Word(alphabet, ())
    if not stripped:
        raise WordSyntaxError("empty word (use '1' for the identity)", 0, text)
    letters: list[Letter] = []
    for m in re.finditer(r"\S+", text):
        tok = m.group(0)
        tm = _TOKEN.fullmatch(tok)
        if tm is None:
            raise WordSyntaxError(f"malformed token {tok!r}", m.start(), text)
        name, exp = tm.group(1), tm.group(2)
        if name not in alphabet:
            raise WordSyntaxError(f"unknown generator {name!r}", m.start(), text)
        k = 1 if exp is None else int(exp)
        if k == 0:
            raise WordSyntaxError("exponent 0 is not allowed", m.start(), text)
        idx = alphabet.index(name)
        letters.extend([(idx, 1 if k > 0 else -1)] * abs(k))
    return Word(alphabet, tuple(letters))


def serialize(w: Word) -> str:
    """Inverse of :func:`parse_word` on freely reduced words.

    Runs of a repeated letter are written as powers.
    """
    if not w.letters:
        return "1"
    names = w.alphabet.generators
    out = []
    i = 0
    letters = w.letters
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        idx, sign = letters[i]
        k = (j - i) * sign
        out.append(names[idx] if k == 1 else f"{names[idx]}^{k}")
        i = j
    return " ".join(out)


def free_reduce_letters(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for idx, sign in letters:
        if stack and stack[-1][0] == idx and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((idx, sign))
    return tuple(stack)


def free_reduce(w: Word) -> Word:
    return Word(w.alphabet, free_reduce_letters(w.letters))


def is_reduced(w: Word) -> bool:
    return all(not (a[0] == b[0] and a[1] == -b[1]) for a, b in zip(w.letters, w.letters[1:]))


def invert(w: Word) -> Word:
    return Word(w.alphabet, tuple((idx, -sign) for idx, sign in reversed(w.letters)))


def concat(u: Word, v: Word) -> Word:
    if u.alphabet != v.alphabet:
        raise AlphabetMismatch(f"cannot concatenate words over {u.alphabet!r} and {v.alphabet!r}")
    return Word(u.alphabet, u.letters + v.letters)


def power(w: Word, k: int) -> Word:
    if k < 0:
        return Word(w.alphabet, invert(w).letters * (-k))
    return Word(w.alphabet, w.letters * k)


def commutator(u: Word, v: Word) -> Word:
    """``u v u^-1 v^-1``"""
    return concat(concat(u, v), concat(invert(u), invert(v)))


def reduced_words(alphabet: Alphabet, max_length: int) -> Iterable[Word]:
    """All freely reduced words of length at most ``max_length``, shortlex order."""
    letters = [(i, s) for i in range(len(alphabet)) for s in (1, -1)]
    layer: list[tuple[Letter, ...]] = [()]
    yield Word(alphabet, ())
    for _ in range(max_length):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1][0] == x[0] and w[-1][1] == -x[1]:
                    continue
                nxt.append(w + (x,))
        for w in nxt:
            yield Word(alphabet, w)
        layer = nxt
