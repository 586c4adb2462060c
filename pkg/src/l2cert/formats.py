"""Plain-text input files for groups, matrices, complexes and tables.

Blank lines and ``#`` comments are ignored everywhere.

Group files hold one directive::

    trivial
    free a b
    abelian t            # or: abelian 2
    cyclic s 2           # Z/2; more pairs give a product of cyclic groups
    finite table.tbl     # path relative to this file
    lamplighter
    product left.grp right.grp
    fp a b | a b a^-1 b^-1, a^2

Matrix files hold one row per line with comma-separated group-ring
elements, or a bracketed literal such as ``[[a - 1], [b - 1]]``.

Complex files list ``ranks n_0 n_1 ...`` followed by blocks headed
``A1``, ``A2``, ... in matrix-row syntax (an empty block is a zero map).

Table files start with ``generators s=1 t=2`` (generator name and element
index) followed by the ``order x order`` multiplication table with the
identity at index 0.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import InputFileError, L2CertError
from .groupring import GroupRingMatrix, parse_element
from .homology import FinPresComplex
from .oracles import (
    WordOracle,
    oracle_direct_product,
    oracle_finite,
    oracle_fp_residually_finite,
    oracle_free,
    oracle_free_abelian,
    oracle_lamplighter,
)
from .quotients import FiniteQuotient
from .words import Alphabet, parse_word


def _lines(text: str) -> list[tuple[int, str]]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputFileError(f"cannot read file: {exc.strerror}", str(path), 0) from None


# ------------------------------------------------------------------ tables


def parse_table(text: str, path: str = "<string>") -> FiniteQuotient:
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("generators"):
        raise InputFileError("expected 'generators name=index ...' header", path, lines[0][0] if lines else 0)
    no, head = lines[0]
    names, images = [], []
    for tok in head.split()[1:]:
        m = re.fullmatch(r"([A-Za-z][A-Za-z0-9_]*)=(\d+)", tok)
        if m is None:
            raise InputFileError(f"bad generator spec {tok!r}", path, no)
        names.append(m.group(1))
        images.append(int(m.group(2)))
    rows = []
    for no, line in lines[1:]:
        try:
            rows.append(tuple(int(x) for x in line.split()))
        except ValueError:
            raise InputFileError("table rows must be integers", path, no) from None
    try:
        return FiniteQuotient(len(rows), tuple(rows), tuple(images), Alphabet(tuple(names)), label=Path(path).stem)
    except L2CertError as exc:
        raise InputFileError(str(exc), path, lines[-1][0]) from None


# ------------------------------------------------------------------ groups


def parse_group(text: str, path: str = "<string>", base: Path | None = None, fuel: int | None = None, quotient_cap: int | None = None) -> WordOracle:
    """Build the oracle named by a group file; ``fuel`` and ``quotient_cap`` tune ``fp`` groups."""
    base = base if base is not None else Path(path).parent
    lines = _lines(text)
    if len(lines) != 1:
        raise InputFileError("a group file holds exactly one directive", path, lines[1][0] if len(lines) > 1 else 0)
    no, line = lines[0]
    kind, _, rest = line.partition(" ")
    args = rest.split()
    try:
        if kind == "trivial":
            return oracle_free(())
        if kind == "free":
            return oracle_free(args)
        if kind == "abelian":
            if len(args) == 1 and args[0].isdigit():
                return oracle_free_abelian(int(args[0]))
            return oracle_free_abelian(len(args), args)
        if kind == "cyclic":
            if not args or len(args) % 2:
                raise InputFileError("cyclic expects name/order pairs", path, no)
            names = tuple(args[0::2])
            moduli = [int(m) for m in args[1::2]]
            return oracle_finite(FiniteQuotient.cyclic_product(Alphabet(names), moduli))
        if kind == "finite":
            if len(args) != 1:
                raise InputFileError("finite expects one table path", path, no)
            tpath = base / args[0]
            return oracle_finite(parse_table(_read(tpath), str(tpath)))
        if kind == "lamplighter":
            return oracle_lamplighter()
        if kind == "product":
            if len(args) != 2:
                raise InputFileError("product expects two group paths", path, no)
            return oracle_direct_product(*(load_group(base / a, fuel, quotient_cap) for a in args))
        if kind == "fp":
            gens, sep, rels = rest.partition("|")
            if not sep:
                raise InputFileError("fp expects 'generators | relators'", path, no)
            alphabet = Alphabet(tuple(gens.split()))
            relators = [parse_word(r, alphabet) for r in rels.split(",") if r.strip()]
            extra = {k: v for k, v in (("fuel", fuel), ("quotient_cap", quotient_cap)) if v is not None}
            return oracle_fp_residually_finite(alphabet, relators, **extra)
    except InputFileError:
        raise
    except (L2CertError, ValueError) as exc:
        raise InputFileError(str(exc), path, no) from None
    raise InputFileError(f"unknown group kind {kind!r}", path, no)


def load_group(path: str | Path, fuel: int | None = None, quotient_cap: int | None = None) -> WordOracle:
    return parse_group(_read(path), str(path), Path(path).parent, fuel, quotient_cap)


# ---------------------------------------------------------------- matrices


def _split_row(text: str) -> list[str]:
    return [e.strip() for e in text.split(",")]


def _row_texts(text: str, path: str) -> list[tuple[int, str]]:
    """``(line, row text)`` pairs from either matrix syntax."""
    stripped = "\n".join(raw.split("#", 1)[0] for raw in text.splitlines())
    if stripped.strip().startswith("["):
        body = stripped.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise InputFileError("unbalanced brackets", path, 1)
        inner = body[1:-1]
        offset = stripped.index("[") + 1
        rows = []
        for m in re.finditer(r"\[([^\[\]]*)\]", inner):
            line = stripped.count("\n", 0, offset + m.start()) + 1
            rows.append((line, m.group(1)))
        leftover = re.sub(r"\[[^\[\]]*\]", "", inner)
        if leftover.replace(",", "").strip():
            raise InputFileError("unexpected text between rows", path, 1)
        return rows
    return _lines(text)


def _parse_rows(rows: list[tuple[int, str]], oracle: WordOracle, path: str, cols: int | None = None) -> GroupRingMatrix:
    parsed = []
    for no, row in rows:
        entries = _split_row(row)
        if cols is None:
            cols = len(entries)
        if len(entries) != cols:
            raise InputFileError(f"row has {len(entries)} entries, expected {cols}", path, no)
        try:
            parsed.append([parse_element(e, oracle) for e in entries])
        except L2CertError as exc:
            raise InputFileError(str(exc), path, no) from None
    return GroupRingMatrix(oracle, len(parsed), cols or 0, parsed)


def parse_matrix(text: str, oracle: WordOracle, path: str = "<string>") -> GroupRingMatrix:
    rows = _row_texts(text, path)
    if not rows:
        raise InputFileError("empty matrix", path, 0)
    return _parse_rows(rows, oracle, path)


def load_matrix(path: str | Path, oracle: WordOracle) -> GroupRingMatrix:
    return parse_matrix(_read(path), oracle, str(path))


# --------------------------------------------------------------- complexes


def parse_complex(text: str, oracle: WordOracle, path: str = "<string>") -> FinPresComplex:
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("ranks"):
        raise InputFileError("expected 'ranks n_0 n_1 ...' header", path, lines[0][0] if lines else 0)
    no, head = lines[0]
    try:
        ranks = [int(x) for x in head.split()[1:]]
    except ValueError:
        raise InputFileError("ranks must be integers", path, no) from None
    if len(ranks) < 2:
        raise InputFileError("a complex needs at least two ranks", path, no)
    blocks: dict[int, list[tuple[int, str]]] = {}
    current = None
    for no, line in lines[1:]:
        m = re.fullmatch(r"A(\d+)", line)
        if m:
            current = int(m.group(1))
            if not 1 <= current < len(ranks) or current in blocks:
                raise InputFileError(f"unexpected block A{current}", path, no)
            blocks[current] = []
            continue
        if current is None:
            raise InputFileError("row outside an A<p> block", path, no)
        blocks[current].append((no, line))
    boundaries = []
    for p in range(1, len(ranks)):
        rows = blocks.get(p, [])
        if rows and len(rows) != ranks[p]:
            raise InputFileError(f"A{p} has {len(rows)} rows, expected {ranks[p]}", path, rows[-1][0])
        if rows:
            boundaries.append(_parse_rows(rows, oracle, path, ranks[p - 1]))
        else:
            boundaries.append(GroupRingMatrix.zeros(oracle, ranks[p], ranks[p - 1]))
    try:
        return FinPresComplex(oracle, ranks, boundaries)
    except L2CertError as exc:
        raise InputFileError(str(exc), path, 1) from None


def load_complex(path: str | Path, oracle: WordOracle) -> FinPresComplex:
    return parse_complex(_read(path), oracle, str(path))
