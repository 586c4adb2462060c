"""Word-problem oracles for concrete finitely generated groups.

Every oracle answers ``is_identity``.  Optional capabilities are exposed as
attributes that are ``None`` when absent:

* ``normal_form``: ``Word -> Word`` canonical representative
* ``quotient_provider``: ``(cap, forbidden) -> iterator of FiniteQuotient``
* ``relators``: a finite presentation
* ``detclass_certificate``: ``(n, K) -> Fraction``

Internally each oracle also carries an :class:`ElementModel`, a hashable
encoding of group elements used by the group-ring arithmetic.  Oracles with a
native normal form get a fast model; the others fall back to a registry of
representatives merged by pairwise ``is_identity`` queries.
"""

from __future__ import annotations

import heapq
import itertools
import threading
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .enclosures import ceil_log_upper
from .errors import AlphabetMismatch, FuelExhausted
from .quotients import FiniteQuotient, enumerate_permutation_homs, perm_eval, perm_inv
from .words import Alphabet, Word, commutator, free_reduce_letters, parse_word

DEFAULT_FUEL = 20_000
DEFAULT_SP_CAP = 5
FINGERPRINT_MAPS = 32


def _shortlex_signed(x: int) -> int:
    return 2 * (abs(x) - 1) + (0 if x > 0 else 1)


class ElementModel:
    """Hashable encoding of group elements.

    ``encode`` takes a tuple of letters and returns a key; equal keys mean
    equal group elements.
    """

    additive = False
    native = True
    identity: object = None

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def encode(self, letters) -> object:
        raise NotImplementedError

    def decode(self, key) -> Word:
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def sort_key(self, key):
        w = self.decode(key)
        return (len(w), tuple(_shortlex_signed(s) for s in w.signed()))

    def is_identity_key(self, key) -> bool:
        return key == self.identity


class FreeModel(ElementModel):
    identity: tuple = ()

    def encode(self, letters):
        return tuple(s * (i + 1) for i, s in free_reduce_letters(letters))

    def decode(self, key):
        return Word.from_signed(self.alphabet, key)

    def mul(self, x, y):
        i, nx, ny = 0, len(x), len(y)
        while i < nx and i < ny and x[nx - 1 - i] == -y[i]:
            i += 1
        return x[: nx - i] + y[i:]

    def inv(self, x):
        return tuple(-s for s in reversed(x))

    def sort_key(self, key):
        return (len(key), tuple(_shortlex_signed(s) for s in key))


# Exponent vectors are packed into one integer with balanced base-2^40 digits,
# so group multiplication is integer addition.
_SHIFT = 40
_BASE = 1 << _SHIFT
_HALF = _BASE >> 1


def pack_exponents(exps: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if not -_HALF < e < _HALF:
            raise OverflowError("exponent too large for packed representation")
        key += e << (_SHIFT * i)
    return key


def unpack_exponents(key: int, rank: int) -> list[int]:
    out = []
    for _ in range(rank):
        digit = key & (_BASE - 1)
        if digit >= _HALF:
            digit -= _BASE
        out.append(digit)
        key = (key - digit) >> _SHIFT
    return out


class AbelianModel(ElementModel):
    additive = True
    identity = 0

    def __init__(self, alphabet: Alphabet):
        super().__init__(alphabet)
        self.rank = len(alphabet)
        self._units = [1 << (_SHIFT * i) for i in range(self.rank)]

    def encode(self, letters):
        units = self._units
        return sum(s * units[i] for i, s in letters)

    def exponents(self, key) -> list[int]:
        return unpack_exponents(key, self.rank)

    def decode(self, key):
        letters = []
        for i, e in enumerate(self.exponents(key)):
            letters.extend([(i, 1 if e > 0 else -1)] * abs(e))
        return Word(self.alphabet, tuple(letters))

    def mul(self, x, y):
        return x + y

    def inv(self, x):
        return -x

    def sort_key(self, key):
        exps = self.exponents(key)
        return (sum(abs(e) for e in exps), tuple(2 * abs(e) - (e > 0) for e in exps))


class LamplighterModel(ElementModel):
    """Elements ``(lamps, shift)`` of ``Z/2 wr Z``; ``a`` is index 0, ``t`` index 1."""

    identity = (frozenset(), 0)

    def encode(self, letters):
        lamps: set[int] = set()
        shift = 0
        for i, s in letters:
            if i == 0:
                lamps ^= {shift}
            else:
                shift += s
        return (frozenset(lamps), shift)

    def decode(self, key):
        lamps, shift = key
        letters: list = []
        pos = 0
        for p in sorted(lamps):
            step = p - pos
            letters.extend([(1, 1 if step > 0 else -1)] * abs(step))
            letters.append((0, 1))
            pos = p
        step = shift - pos
        letters.extend([(1, 1 if step > 0 else -1)] * abs(step))
        return Word(self.alphabet, free_reduce_letters(letters))

    def mul(self, x, y):
        l1, s1 = x
        l2, s2 = y
        return (l1 ^ frozenset(p + s1 for p in l2), s1 + s2)

    def inv(self, x):
        lamps, s = x
        return (frozenset(p - s for p in lamps), -s)

    def sort_key(self, key):
        lamps, shift = key
        return (len(self.decode(key)), tuple(sorted(lamps)), shift)


class FiniteModel(ElementModel):
    identity = 0

    def __init__(self, table: FiniteQuotient):
        super().__init__(table.alphabet)
        self.table = table

    def encode(self, letters):
        return self.table.evaluate_letters(letters)

    def decode(self, key):
        return self.table.element_words()[key]

    def mul(self, x, y):
        return self.table.table[x][y]

    def inv(self, x):
        return self.table.inverse[x]

    def sort_key(self, key):
        return key


class ProductModel(ElementModel):
    def __init__(self, alphabet: Alphabet, m1: ElementModel, m2: ElementModel):
        super().__init__(alphabet)
        self.m1, self.m2 = m1, m2
        self.split = len(m1.alphabet)
        self.identity = (m1.identity, m2.identity)

    def project(self, letters):
        k = self.split
        first = tuple((i, s) for i, s in letters if i < k)
        second = tuple((i - k, s) for i, s in letters if i >= k)
        return first, second

    def encode(self, letters):
        first, second = self.project(letters)
        return (self.m1.encode(first), self.m2.encode(second))

    def decode(self, key):
        w1 = self.m1.decode(key[0])
        w2 = self.m2.decode(key[1])
        k = self.split
        return Word(self.alphabet, w1.letters + tuple((i + k, s) for i, s in w2.letters))

    def mul(self, x, y):
        return (self.m1.mul(x[0], y[0]), self.m2.mul(x[1], y[1]))

    def inv(self, x):
        return (self.m1.inv(x[0]), self.m2.inv(x[1]))

    def sort_key(self, key):
        return (self.m1.sort_key(key[0]), self.m2.sort_key(key[1]))


class RegistryModel(ElementModel):
    """Fallback model: keys are indices into a list of representatives.

    A new word is compared against the known representatives with
    ``is_identity(w * rep^-1)``; the first match wins.  Each comparison may
    raise :class:`FuelExhausted`.  If the oracle offers ``fingerprint``
    (a function constant on group elements), only representatives with the
    same fingerprint are compared.
    """

    native = False
    identity = 0

    def __init__(self, oracle: "WordOracle"):
        super().__init__(oracle.alphabet)
        self._oracle = oracle
        self._reps: list[tuple[int, ...]] = [()]
        self._index: dict[tuple[int, ...], int] = {(): 0}
        self._mul: dict[tuple[int, int], int] = {}
        self._lock = threading.RLock()
        self._fingerprint = getattr(oracle, "fingerprint", None)
        self._buckets: dict[object, list[int]] = {}

    def encode(self, letters):
        reduced = free_reduce_letters(letters)
        signed = tuple(s * (i + 1) for i, s in reduced)
        with self._lock:
            hit = self._index.get(signed)
            if hit is not None:
                return hit
            fp = self._fingerprint(reduced) if self._fingerprint else None
            if not self._buckets:
                self._buckets[self._fingerprint(()) if self._fingerprint else None] = [0]
            for idx in self._buckets.get(fp, ()):
                rep = self._reps[idx]
                probe = signed + tuple(-x for x in reversed(rep))
                if self._oracle.is_identity(Word.from_signed(self.alphabet, probe)):
                    self._index[signed] = idx
                    return idx
            idx = len(self._reps)
            self._reps.append(signed)
            self._index[signed] = idx
            self._buckets.setdefault(fp, []).append(idx)
            return idx

    def decode(self, key):
        return Word.from_signed(self.alphabet, self._reps[key])

    def _letters(self, key):
        return Word.from_signed(self.alphabet, self._reps[key]).letters

    def mul(self, x, y):
        cached = self._mul.get((x, y))
        if cached is None:
            cached = self.encode(self._letters(x) + self._letters(y))
            self._mul[(x, y)] = cached
        return cached

    def inv(self, x):
        return self.encode(tuple((i, -s) for i, s in reversed(self._letters(x))))

    def sort_key(self, key):
        rep = self._reps[key]
        return (len(rep), tuple(_shortlex_signed(s) for s in rep))


def sofic_certificate(n: int, K) -> Fraction:
    """``n * ceil(ln K^2) + 1``, with the ceiling taken of a certified upper bound."""
    K = Fraction(K)
    if K < 1:
        K = Fraction(1)
    return Fraction(n * ceil_log_upper(K * K) + 1)


class WordOracle:
    """A black-box solution of the word problem plus optional capabilities."""

    def __init__(
        self,
        alphabet: Alphabet,
        model: ElementModel | None,
        *,
        label: str,
        relators: Sequence[Word] | None = None,
        quotient_provider: Callable[..., Iterator[FiniteQuotient]] | None = None,
        sofic: bool = True,
    ):
        self.alphabet = alphabet
        self.label = label
        self.relators = list(relators) if relators is not None else None
        self.quotient_provider = quotient_provider
        self.detclass_certificate = sofic_certificate if sofic else None
        self.model = model if model is not None else RegistryModel(self)

    def __repr__(self) -> str:
        return f"<WordOracle {self.label}>"

    def _coerce(self, w: Word | str) -> Word:
        if isinstance(w, str):
            return parse_word(w, self.alphabet)
        if w.alphabet != self.alphabet:
            raise AlphabetMismatch(f"word over {w.alphabet!r} given to oracle over {self.alphabet!r}")
        return w

    def word(self, text: str) -> Word:
        return parse_word(text, self.alphabet)

    def is_identity(self, w: Word | str, fuel: int | None = None) -> bool:
        w = self._coerce(w)
        return self.model.is_identity_key(self.model.encode(w.letters))

    @property
    def normal_form(self) -> Callable[[Word], Word] | None:
        if not self.model.native:
            return None

        def normal_form(w: Word | str) -> Word:
            w = self._coerce(w)
            return self.model.decode(self.model.encode(w.letters))

        return normal_form

    def has(self, capability: str) -> bool:
        return getattr(self, capability, None) is not None


# ---------------------------------------------------------------- providers


def _sp_provider(alphabet: Alphabet, relators: Sequence[Word], default_cap: int = DEFAULT_SP_CAP):
    def provider(cap: int | None = None, forbidden: Sequence[Word] = ()) -> Iterator[FiniteQuotient]:
        cap = default_cap if cap is None else cap
        for p, images in enumerate_permutation_homs(alphabet, relators, cap, forbidden):
            yield FiniteQuotient.from_permutations(alphabet, images, label=f"S_{p} image {images}")

    provider.default_cap = default_cap  # type: ignore[attr-defined]
    return provider


def _abelian_provider(alphabet: Alphabet, model: AbelianModel, default_cap: int = 1024):
    r = len(alphabet)

    def provider(cap: int | None = None, forbidden: Sequence[Word] = ()) -> Iterator[FiniteQuotient]:
        cap = default_cap if cap is None else cap
        vectors = [model.exponents(model.encode(w.letters)) for w in forbidden]
        if r == 0:
            if not vectors:
                yield FiniteQuotient.cyclic_product(alphabet, (), label="trivial")
            return
        for m in range(2, cap + 1):
            if all(any(e % m for e in v) for v in vectors):
                yield FiniteQuotient.cyclic_product(alphabet, (m,) * r, label=f"(Z/{m})^{r}")

    provider.default_cap = default_cap  # type: ignore[attr-defined]
    return provider


def lamplighter_quotient(alphabet: Alphabet, m: int) -> FiniteQuotient:
    """``Z/2 wr Z/m`` with lamps as an ``m``-bit mask."""
    full = (1 << m) - 1

    def rot(mask: int, s: int) -> int:
        s %= m
        return ((mask << s) | (mask >> (m - s))) & full

    def mul(x, y):
        return (x[0] ^ rot(y[0], x[1]), (x[1] + y[1]) % m)

    return FiniteQuotient.from_elements(alphabet, (0, 0), [(1, 0), (0, 1 % m)], mul, label=f"Z/2 wr Z/{m}")


def _lamplighter_provider(alphabet: Alphabet, model: LamplighterModel, default_cap: int = 8):
    def provider(cap: int | None = None, forbidden: Sequence[Word] = ()) -> Iterator[FiniteQuotient]:
        cap = default_cap if cap is None else cap
        keys = [model.encode(w.letters) for w in forbidden]
        for m in range(1, cap + 1):
            ok = True
            for lamps, shift in keys:
                parity: dict[int, int] = {}
                for p in lamps:
                    parity[p % m] = parity.get(p % m, 0) ^ 1
                if shift % m == 0 and not any(parity.values()):
                    ok = False
                    break
            if ok:
                yield lamplighter_quotient(alphabet, m)

    provider.default_cap = default_cap  # type: ignore[attr-defined]
    return provider


def _finite_provider(table: FiniteQuotient):
    def provider(cap: int | None = None, forbidden: Sequence[Word] = ()) -> Iterator[FiniteQuotient]:
        if all(table.evaluate(w) != 0 for w in forbidden):
            yield table

    provider.default_cap = table.order  # type: ignore[attr-defined]
    return provider


def _product_provider(alphabet: Alphabet, o1: "WordOracle", o2: "WordOracle", model: ProductModel):
    def provider(cap: int | None = None, forbidden: Sequence[Word] = ()) -> Iterator[FiniteQuotient]:
        q1 = list(o1.quotient_provider(cap, ()))
        q2 = list(o2.quotient_provider(cap, ()))
        projected = []
        for w in forbidden:
            a, b = model.project(w.letters)
            projected.append((Word(o1.alphabet, a), Word(o2.alphabet, b)))
        # diagonal order over the two factor enumerations
        for total in range(len(q1) + len(q2) - 1):
            for i in range(max(0, total - len(q2) + 1), min(total, len(q1) - 1) + 1):
                h1, h2 = q1[i], q2[total - i]
                if all(h1.evaluate(a) != 0 or h2.evaluate(b) != 0 for a, b in projected):
                    yield h1.direct_product(h2, alphabet)

    provider.default_cap = None  # type: ignore[attr-defined]
    return provider


# ------------------------------------------------------------- constructors


def oracle_free(alphabet: Alphabet | Iterable[str]) -> WordOracle:
    """Free group on ``alphabet``; the word problem is free reduction."""
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet(alphabet)
    label = "F_%d(%s)" % (len(alphabet), ",".join(alphabet.generators))
    return WordOracle(
        alphabet,
        FreeModel(alphabet),
        label=label,
        relators=[],
        quotient_provider=_sp_provider(alphabet, []),
    )


def abelian_names(rank: int) -> tuple[str, ...]:
    if rank == 1:
        return ("t",)
    if rank > 26:
        return tuple(f"x{i}" for i in range(rank))
    return tuple("abcdefghijklmnopqrstuvwxyz"[:rank])


def oracle_free_abelian(rank: int, names: Sequence[str] | None = None) -> WordOracle:
    """``Z^rank``.  Generators are ``t`` for rank 1 and ``a, b, c, ...`` otherwise.

    >>> z2 = oracle_free_abelian(2)
    >>> z2.is_identity("a b a^-1 b^-1")
    True
    """
    if rank < 0:
        raise ValueError("rank must be nonnegative")
    alphabet = Alphabet(names if names is not None else abelian_names(rank))
    if len(alphabet) != rank:
        raise ValueError("number of names must equal the rank")
    model = AbelianModel(alphabet)
    gens = [alphabet.generator(i) for i in range(rank)]
    relators = [commutator(gens[i], gens[j]) for i in range(rank) for j in range(i + 1, rank)]
    return WordOracle(
        alphabet,
        model,
        label=f"Z^{rank}",
        relators=relators,
        quotient_provider=_abelian_provider(alphabet, model),
    )


def finite_presentation(table: FiniteQuotient) -> list[Word]:
    """Cayley-graph presentation: ``w_g s w_{gs}^-1`` for every element and generator."""
    words = table.element_words()
    out = []
    seen = set()
    for g in range(table.order):
        for i in range(len(table.alphabet)):
            h = table.table[g][table.generator_images[i]]
            letters = free_reduce_letters(words[g].letters + ((i, 1),) + tuple((j, -s) for j, s in reversed(words[h].letters)))
            if letters and letters not in seen:
                seen.add(letters)
                out.append(Word(table.alphabet, letters))
    return out


def oracle_finite(table: FiniteQuotient) -> WordOracle:
    """Finite group given by a multiplication table (validated on construction)."""
    table.check_group_law()
    return WordOracle(
        table.alphabet,
        FiniteModel(table),
        label=table.label or f"finite group of order {table.order}",
        relators=finite_presentation(table),
        quotient_provider=_finite_provider(table),
    )


def oracle_lamplighter() -> WordOracle:
    """``Z/2 wr Z`` with ``a`` the lamp at the origin and ``t`` the shift."""
    alphabet = Alphabet(("a", "t"))
    model = LamplighterModel(alphabet)
    return WordOracle(
        alphabet,
        model,
        label="Z/2 wr Z",
        relators=None,
        quotient_provider=_lamplighter_provider(alphabet, model),
    )


def product_alphabet(a1: Alphabet, a2: Alphabet) -> Alphabet:
    """Disjoint union; clashing names of the second factor get a ``_2`` suffix."""
    names = list(a1.generators)
    taken = set(names)
    for g in a2.generators:
        name = g
        while name in taken:
            name += "_2"
        taken.add(name)
        names.append(name)
    return Alphabet(names)


def oracle_direct_product(o1: WordOracle, o2: WordOracle) -> WordOracle:
    """``G1 x G2``; letters of different factors commute."""
    alphabet = product_alphabet(o1.alphabet, o2.alphabet)
    k = len(o1.alphabet)
    if o1.model.native and o2.model.native:
        model: ElementModel | None = ProductModel(alphabet, o1.model, o2.model)
    else:
        model = None
    relators = None
    if o1.relators is not None and o2.relators is not None:
        relators = [Word(alphabet, r.letters) for r in o1.relators]
        relators += [Word(alphabet, tuple((i + k, s) for i, s in r.letters)) for r in o2.relators]
        relators += [
            commutator(alphabet.generator(i), alphabet.generator(k + j))
            for i in range(k)
            for j in range(len(o2.alphabet))
        ]
    oracle = WordOracle(alphabet, model, label=f"({o1.label}) x ({o2.label})", relators=relators, sofic=o1.has("detclass_certificate") and o2.has("detclass_certificate"))
    oracle._factors = (o1, o2, k)  # type: ignore[attr-defined]
    if isinstance(oracle.model, ProductModel) and o1.quotient_provider and o2.quotient_provider:
        oracle.quotient_provider = _product_provider(alphabet, o1, o2, oracle.model)
    if not isinstance(oracle.model, ProductModel):
        def is_identity(w: Word | str, fuel: int | None = None) -> bool:
            w = oracle._coerce(w)
            first = tuple((i, s) for i, s in w.letters if i < k)
            second = tuple((i - k, s) for i, s in w.letters if i >= k)
            return o1.is_identity(Word(o1.alphabet, first), fuel) and o2.is_identity(Word(o2.alphabet, second), fuel)

        oracle.is_identity = is_identity  # type: ignore[method-assign]
    return oracle


def hermite_rows(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row-style Hermite normal form of the integer lattice spanned by ``rows``.

    Pivots are positive and entries above a pivot lie in ``[0, pivot)``.
    """
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int]] = []
    for col in range(ncols):
        active = [r for r in work if r[col]]
        rest = [r for r in work if not r[col]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[col] else rest).append(r)
            active = nxt
        if active:
            piv = active[0]
            if piv[col] < 0:
                piv = [-a for a in piv]
            for b in basis:
                q = b[col] // piv[col]
                if q:
                    b[:] = [x - q * y for x, y in zip(b, piv)]
            basis.append(piv)
        work = [r for r in rest if any(r)]
    return basis


def lattice_reduce(v: Sequence[int], basis: list[list[int]]) -> tuple[int, ...]:
    """Canonical representative of ``v`` modulo the lattice with Hermite basis ``basis``."""
    v = list(v)
    for b in basis:
        col = next(i for i, x in enumerate(b) if x)
        q = v[col] // b[col]
        if q:
            v = [x - q * y for x, y in zip(v, b)]
    return tuple(v)


class FpOracle(WordOracle):
    """Finitely presented group assumed residually finite.

    ``is_identity`` runs two searches: relator consequences (accepting) and
    quotients (rejecting), namely the abelianization and maps to ``S_p``.  When neither side succeeds
    within fuel, :class:`FuelExhausted` is raised.
    """

    def __init__(self, alphabet: Alphabet, relators: Sequence[Word], quotient_cap: int = DEFAULT_SP_CAP, fuel: int = DEFAULT_FUEL):
        super().__init__(
            alphabet,
            None,
            label="<%s | %s>" % (",".join(alphabet.generators), ", ".join(str(r) for r in relators)),
            relators=relators,
            quotient_provider=_sp_provider(alphabet, relators, quotient_cap),
        )
        self.quotient_cap = quotient_cap
        self.default_fuel = fuel
        self._lock = threading.RLock()
        self._answers: dict[tuple[int, ...], bool] = {(): True}
        self._homs: list[tuple[int, tuple, tuple]] | None = None
        # every cyclic conjugate of every relator and its inverse
        moves = set()
        for r in relators:
            letters = free_reduce_letters(r.letters)
            signed = tuple(s * (i + 1) for i, s in letters)
            for rel in (signed, tuple(-x for x in reversed(signed))):
                for c in range(len(rel)):
                    moves.add(rel[c:] + rel[:c])
        self._conjugates = sorted(moves, key=lambda t: (len(t), t))
        self._abelian_basis = hermite_rows([self._exponent_sums(free_reduce_letters(r.letters)) for r in relators], len(alphabet))

    def _homomorphisms(self):
        with self._lock:
            if self._homs is None:
                homs = []
                for p, images in enumerate_permutation_homs(self.alphabet, self.relators, self.quotient_cap):
                    if p == 1:
                        continue
                    homs.append((p, images, tuple(perm_inv(q) for q in images)))
                self._homs = homs
            return self._homs

    def _exponent_sums(self, letters) -> list[int]:
        v = [0] * len(self.alphabet)
        for idx, sign in letters:
            v[idx] += sign
        return v

    def abelianization(self, letters) -> tuple[int, ...]:
        """Canonical image in the abelianization (exponent sums modulo relators)."""
        return lattice_reduce(self._exponent_sums(letters), self._abelian_basis)

    def fingerprint(self, letters) -> tuple:
        """Abelianization and images under the last few permutation maps; equal elements agree."""
        homs = self._homomorphisms()[-FINGERPRINT_MAPS:]
        return (self.abelianization(letters),) + tuple(perm_eval(letters, images, inverses, p) for p, images, inverses in homs)

    def _separated(self, letters) -> bool:
        if any(self.abelianization(letters)):
            return True
        for p, images, inverses in self._homomorphisms():
            if perm_eval(letters, images, inverses, p) != tuple(range(p)):
                return True
        return False

    def _remember(self, signed: tuple[int, ...], answer: bool) -> None:
        self._answers[signed] = answer
        self._answers[tuple(-x for x in reversed(signed))] = answer

    def is_identity(self, w: Word | str, fuel: int | None = None) -> bool:
        w = self._coerce(w)
        fuel = self.default_fuel if fuel is None else fuel
        letters = free_reduce_letters(w.letters)
        signed = tuple(s * (i + 1) for i, s in letters)
        with self._lock:
            if signed in self._answers:
                return self._answers[signed]
            if self._separated(letters):
                self._remember(signed, False)
                return False
            found = self._consequence_search(signed, fuel)
            if found is not None:
                self._remember(signed, found)
                return found
        raise FuelExhausted(f"word {w} undecided within fuel {fuel}")

    def _consequence_search(self, start: tuple[int, ...], fuel: int) -> bool | None:
        """Best-first search from ``start`` towards the empty word.

        Moves insert a cyclic conjugate of a relator (or its inverse) at any
        position, followed by free reduction.  Replacing a subword ``u`` of
        ``u v = r`` by ``v^-1`` is the special case where the insertion
        cancels ``u``.  Reaching a word with a cached answer decides the
        query.  Returns ``None`` when the fuel runs out.
        """
        seen = {start}
        heap = [(len(start), 0, start)]
        counter = itertools.count(1)
        while heap and fuel > 0:
            _, _, w = heapq.heappop(heap)
            fuel -= 1
            known = self._answers.get(w)
            if known is not None:
                return known
            for pos in range(len(w) + 1):
                for rel in self._conjugates:
                    cand = _reduce_signed(w[:pos] + rel + w[pos:])
                    if not cand:
                        return True
                    if cand in seen:
                        continue
                    seen.add(cand)
                    heapq.heappush(heap, (len(cand), next(counter), cand))
        return None


def _reduce_signed(word: tuple[int, ...]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in word:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def oracle_fp_residually_finite(
    alphabet: Alphabet | Iterable[str],
    relators: Sequence[Word | str],
    quotient_cap: int = DEFAULT_SP_CAP,
    fuel: int = DEFAULT_FUEL,
) -> FpOracle:
    """Finitely presented group whose residual finiteness the caller vouches for.

    >>> z2 = oracle_fp_residually_finite(["a", "b"], ["a b a^-1 b^-1"])
    >>> z2.is_identity("b a b^-1 a^-1"), z2.is_identity("a")
    (True, False)
    """
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet(alphabet)
    rels = [parse_word(r, alphabet) if isinstance(r, str) else r for r in relators]
    for r in rels:
        if r.alphabet != alphabet:
            raise AlphabetMismatch("relator over a different alphabet")
    return FpOracle(alphabet, rels, quotient_cap, fuel)
