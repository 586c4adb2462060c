"""Command-line front end.

Every command streams one record per step, flushed immediately.  With
``--json`` records are JSON lines whose rationals are exact ``"p/q"``
strings; otherwise a short human-readable line is printed.  Exit codes:
0 when the run completed or met its target, 2 when a budget ran out (every
record printed so far is still a valid certificate), 1 on input errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Callable, Sequence, TextIO

from .errors import BudgetExceeded, CapabilityMissing, FuelExhausted, InputFileError, L2CertError
from .formats import load_complex, load_group, load_matrix
from .groupring import DEFAULT_MEM_TERMS, coeff_one_norm, trace
from .homology import ComplexInclusion, betti_estimate, check_complex, dim_im_homology
from .lueck import LueckStream
from .oracles import WordOracle
from .reals import StreamExhausted
from .spectral import Budget, CharSeqState, TorsionInput, dimker_bracket, dimker_upper, fk_logdet_partial, torsion_estimate

COMMANDS = ("dimker", "bracket", "lueck", "detfk", "torsion", "betti", "trace")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


def parse_rational(text: str) -> Fraction:
    """``"3/4"``, ``"0.125"`` or ``"2^-10"``."""
    m = re.fullmatch(r"\s*(\d+)\s*\^\s*(-?\d+)\s*", text)
    if m:
        return Fraction(int(m.group(1))) ** int(m.group(2))
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("budgets must be positive")
    return v


def _target(text: str) -> Fraction:
    v = parse_rational(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("target precision must lie in (0, 1]")
    return v


def _cert(text: str):
    if text in ("auto", "none"):
        return None if text == "none" else "auto"
    v = parse_rational(text)
    if v < 0:
        raise argparse.ArgumentTypeError("certificate must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="l2cert", description="Certified brackets for L2-invariants over group rings.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--group", required=True, help="group file")
    ap.add_argument("--matrix", help="matrix file")
    ap.add_argument("--complex", help="chain complex file")
    ap.add_argument("--iters", type=_positive_int, help="iteration budget (meaning depends on the command)")
    ap.add_argument("--fuel", type=_positive_int, help="word-problem and search fuel")
    ap.add_argument("--mem-terms", type=_positive_int, default=DEFAULT_MEM_TERMS, help="support cap per group-ring entry")
    ap.add_argument("--target", type=_target, default=Fraction(1, 1024), help="target width, e.g. 2^-10")
    ap.add_argument("--cert", type=_cert, default="auto", help="determinant-class certificate q, 'auto' or 'none'")
    ap.add_argument("--quotient-cap", type=_positive_int, help="size cap for finite quotient searches")
    ap.add_argument("--degree", type=int, default=1, help="homological degree for betti")
    ap.add_argument("--norm-bound", type=parse_rational, help="M >= coefficient one-norm (detfk, torsion)")
    ap.add_argument("--tail-C", type=parse_rational, help="tail constant C in C/(2K^alpha)")
    ap.add_argument("--tail-alpha", type=parse_rational, help="tail exponent alpha")
    ap.add_argument("--ratio-bound", type=parse_rational, help="certified geometric ratio of the sequence")
    ap.add_argument("--json", action="store_true", help="JSON-lines output with exact rationals")
    return ap


class Emitter:
    """Single writer for the record stream."""

    def __init__(self, out: TextIO, as_json: bool):
        self.out = out
        self.as_json = as_json
        self.records: list[dict] = []

    def __call__(self, **record) -> None:
        self.records.append(record)
        if self.as_json:
            line = json.dumps({k: _jsonable(v) for k, v in record.items() if v is not None}, sort_keys=False)
        else:
            line = " ".join(f"{k}={_human(v)}" for k, v in record.items() if v is not None)
        self.out.write(line + "\n")
        self.out.flush()


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _human(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1 or len(str(v)) <= 24:
            return str(v)
        return f"~{float(v):.12g}"
    if isinstance(v, dict):
        return ",".join(f"{k}:{_human(x)}" for k, x in v.items())
    return str(v)


def _need(value, flag: str):
    if value is None:
        raise InputFileError(f"{flag} is required for this command", "<command line>", 0)
    return value


# ---------------------------------------------------------------- commands


def cmd_dimker(args, oracle: WordOracle, emit: Emitter) -> int:
    A = load_matrix(_need(args.matrix, "--matrix"), oracle)
    iters = args.iters or 64
    stream = dimker_upper(A, Budget(iters=iters, mem_terms=args.mem_terms))
    for p in range(iters + 1):
        try:
            v = stream[p]
        except StreamExhausted:
            emit(k=p, status="budget-exceeded")
            return EXIT_BUDGET
        emit(k=p, value=v, status="complete" if p == iters else "running")
    return EXIT_OK


def cmd_bracket(args, oracle: WordOracle, emit: Emitter) -> int:
    A = load_matrix(_need(args.matrix, "--matrix"), oracle)
    budget = Budget(iters=args.iters or 200, mem_terms=args.mem_terms)
    res = dimker_bracket(A, args.cert, args.target, budget, on_round=lambda k, lo, hi: emit(k=k, lo=lo, hi=hi, status="running"))
    emit(k=res.k, lo=res.lo, hi=res.hi, p=res.p, cert=res.cert, status=res.status)
    return EXIT_OK if res.status == "target-met" else EXIT_BUDGET


def cmd_lueck(args, oracle: WordOracle, emit: Emitter) -> int:
    A = load_matrix(_need(args.matrix, "--matrix"), oracle)
    stream = LueckStream(oracle, A, args.iters or 4, args.quotient_cap, args.mem_terms)
    for step in stream:
        emit(k=step.k, value=step.value, bound=step.bound, order=step.order, quotient=step.quotient.label, status="running")
    emit(k=len(stream.steps), status=stream.status)
    return EXIT_OK if stream.status == "complete" else EXIT_BUDGET


def _logdet_record(emit: Emitter, iv, status: str) -> None:
    emit(k=iv.K, lo=iv.lo, hi=iv.hi, tail=iv.tail, tail_kind=iv.tail_kind, enclosure_width=iv.s_hi - iv.s_lo, certified=iv.certified, status=status)


def cmd_detfk(args, oracle: WordOracle, emit: Emitter) -> int:
    A = load_matrix(_need(args.matrix, "--matrix"), oracle)
    M = args.norm_bound if args.norm_bound is not None else coeff_one_norm(A)
    Kmax = args.iters or 200
    kw = dict(tail_C=args.tail_C, tail_alpha=args.tail_alpha, ratio_bound=args.ratio_bound, mem_terms=args.mem_terms)
    state = CharSeqState(A, M, args.mem_terms)
    K = 1
    iv = None
    try:
        while True:
            iv = fk_logdet_partial(A, M, K, state=state, **kw)
            met = iv.width is not None and iv.certified and iv.width <= args.target
            if K == Kmax or met:
                break
            _logdet_record(emit, iv, "running")
            K = min(2 * K, Kmax)
    except BudgetExceeded:
        if iv is not None:
            _logdet_record(emit, iv, "budget-exceeded")
        else:
            emit(k=0, status="budget-exceeded")
        return EXIT_BUDGET
    met = iv.width is not None and iv.certified and iv.width <= args.target
    _logdet_record(emit, iv, "target-met" if met else "budget-exceeded")
    return EXIT_OK if met else EXIT_BUDGET


def cmd_torsion(args, oracle: WordOracle, emit: Emitter) -> int:
    c = load_complex(_need(args.complex, "--complex"), oracle)
    check_complex(c)
    inp = TorsionInput(c.boundaries, args.norm_bound, args.tail_C, args.tail_alpha, args.ratio_bound, c.ranks[0])
    res = torsion_estimate(inp, args.iters or 200, args.mem_terms)
    for p, iv in sorted(res.degrees.items()):
        emit(degree=p, weight=res.weights[p], lo=iv.lo, hi=iv.hi, tail_kind=iv.tail_kind, certified=iv.certified, status="running")
    met = res.width is not None and res.certified and res.width <= args.target
    emit(k=args.iters or 200, lo=res.lo, hi=res.hi, certified=res.certified, status="target-met" if met else "budget-exceeded")
    return EXIT_OK if met else EXIT_BUDGET


def cmd_betti(args, oracle: WordOracle, emit: Emitter) -> int:
    budget = Budget(iters=args.iters or 6, mem_terms=args.mem_terms)
    cert = args.cert if args.cert != "auto" else None
    if args.complex:
        c = load_complex(args.complex, oracle)
        check_complex(c)
        res = dim_im_homology(ComplexInclusion.identity(c), args.degree, cert, budget, target=args.target)
        emit(k=args.degree, lo=res.lo, hi=res.hi, status=res.status)
        return EXIT_OK if res.width <= args.target else EXIT_BUDGET

    def on_entry(i, j, r):
        emit(i=i, j=j, lo=r.lo, hi=r.hi, status="running")

    est = betti_estimate(oracle, args.degree, fuel=args.fuel or 5000, budget=budget, cert=cert, on_entry=on_entry)
    met = est.hi - est.lo <= args.target and all(v == "complete" for k, v in est.status.items() if k != "charseq")
    emit(k=args.degree, lo=est.lo, hi=est.hi, flags=est.status, status="target-met" if met else "budget-exceeded")
    return EXIT_OK if met else EXIT_BUDGET


def cmd_trace(args, oracle: WordOracle, emit: Emitter) -> int:
    A = load_matrix(_need(args.matrix, "--matrix"), oracle)
    emit(k=0, value=trace(A), status="complete")
    return EXIT_OK


HANDLERS: dict[str, Callable] = {
    "dimker": cmd_dimker,
    "bracket": cmd_bracket,
    "lueck": cmd_lueck,
    "detfk": cmd_detfk,
    "torsion": cmd_torsion,
    "betti": cmd_betti,
    "trace": cmd_trace,
}


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    emit = Emitter(out, args.json)
    try:
        oracle = load_group(args.group, args.fuel, args.quotient_cap)
        return HANDLERS[args.command](args, oracle, emit)
    except (InputFileError, CapabilityMissing) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (BudgetExceeded, FuelExhausted) as exc:
        emit(status="budget-exceeded", reason=str(exc))
        return EXIT_BUDGET
    except (L2CertError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
