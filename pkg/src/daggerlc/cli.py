"""Command-line interface: ``dlc check|normalize|equiv|interp|axioms``."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calculus import DerivationError, check_derivation, load_sequents
from .model import ModelError, Signature, SymbolicOnly, as_matrix, close, verify_axioms
from .rewrite import RewriteError, enumerate_redexes, format_trace, normalize, step
from .surface import (
    ParseError,
    SourceText,
    parse_derivation_file,
    parse_signature,
    print_sequent,
)
from .syntax import DLCError, Sequent, expand

OK, FAILED, UNUSABLE, BREACH = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    inputs: list[Path] = field(default_factory=list)
    sig: Path | None = None
    seed: int = 0
    strategy: str = "deterministic"
    trace: bool = False
    verify_steps: bool = False
    tol: float = 1e-9
    dims: list[int] = field(default_factory=lambda: [2])
    color: bool = False

    def validate(self) -> None:
        for p in self.inputs + ([self.sig] if self.sig else []):
            if not p.is_file():
                raise FileNotFoundError(f"no such file: {p}")


class _Out:
    def __init__(self, color: bool, stream=None):
        self.color = color
        self.stream = stream or sys.stdout

    def paint(self, text: str, code: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if self.color else text

    def good(self, text: str) -> str:
        return self.paint(text, "32")

    def bad(self, text: str) -> str:
        return self.paint(text, "31")

    def __call__(self, *parts: str) -> None:
        print(*parts, file=self.stream)


def _load_sig(cfg: RunConfig) -> Signature:
    if cfg.sig is None:
        return Signature()
    return Signature.from_decl(parse_signature(SourceText(cfg.sig.read_text(), str(cfg.sig))))


def _sequents(path: Path, sig: Signature) -> list[Sequent]:
    return load_sequents(SourceText(path.read_text(), str(path)), sig.consts)


def format_tensor(a: np.ndarray) -> str:
    def num(z: complex) -> str:
        re, im = float(np.round(z.real, 12)) + 0.0, float(np.round(z.imag, 12)) + 0.0
        return f"{re:.6g}{'+' if im >= 0 else '-'}{abs(im):.6g}i"

    if a.ndim == 0:
        return num(complex(a))
    if a.ndim == 1:
        return "[" + ", ".join(num(z) for z in a) + "]"
    return "[" + ",\n ".join(format_tensor(row) for row in a) + "]"


def cmd_check(cfg: RunConfig, out: _Out) -> int:
    sig = _load_sig(cfg)
    for path in cfg.inputs:
        text = SourceText(path.read_text(), str(path))
        if path.suffix == ".dprf":
            for script in parse_derivation_file(text):
                try:
                    d = check_derivation(script, sig.consts)
                except DerivationError as exc:
                    out(out.bad(f"error {path}:{script.line}: {exc}"))
                    return FAILED
                out(d.report())
                out(out.good("ok") + f" {path}:{script.line}: {print_sequent(d.conclusion)}")
            continue
        try:
            seqs = _sequents(path, sig)
        except ParseError:
            raise
        except DLCError as exc:  # typing or linearity: a semantic failure
            out(out.bad(f"error {exc}"))
            return FAILED
        for J in seqs:
            out(out.good("ok") + f" {print_sequent(J)}")
    return OK


def cmd_normalize(cfg: RunConfig, out: _Out) -> int:
    sig = _load_sig(cfg)
    for path in cfg.inputs:
        for J in _sequents(path, sig):
            nf, trace = normalize(J, cfg.strategy, cfg.seed)
            if cfg.trace:
                out(f"start {print_sequent(J)}")
                if trace:
                    out(format_trace(trace))
                out(f"steps {len(trace)}")
            out(print_sequent(nf))
    return OK


def _single(path: Path, sig: Signature) -> Sequent:
    seqs = _sequents(path, sig)
    if len(seqs) != 1:
        raise ParseError(f"expected one sequent, found {len(seqs)}", str(path))
    return seqs[0]


def cmd_equiv(cfg: RunConfig, out: _Out) -> int:
    sig = _load_sig(cfg)
    if len(cfg.inputs) != 2:
        raise ParseError("equiv takes exactly two files", "<args>")
    a, b = (normalize(_single(p, sig))[0] for p in cfg.inputs)
    out(print_sequent(a))
    out(print_sequent(b))
    if a == b:
        out(out.good("equivalent"))
        return OK
    out(out.bad("not equivalent"))
    return FAILED


def cmd_interp(cfg: RunConfig, out: _Out) -> int:
    sig = _load_sig(cfg)
    status = OK
    for path in cfg.inputs:
        for J in _sequents(path, sig):
            try:
                m = as_matrix(J, sig)
            except SymbolicOnly as exc:
                out(f"symbolic only: {exc}")
                return UNUSABLE
            out(f"sequent {print_sequent(J)}")
            out(f"shape {m.shape[0]}x{m.shape[1]}")
            out(format_tensor(m if m.size > 1 else m.reshape(())))
            if cfg.verify_steps:
                cur = expand(J)
                n = 0
                while (rs := enumerate_redexes(cur)):
                    nxt = step(cur, rs[0])
                    n += 1
                    good = close(as_matrix(cur, sig), as_matrix(nxt, sig), cfg.tol)
                    tag = out.good("preserved") if good else out.bad("CHANGED")
                    out(f"step {n} {rs[0].kind} {tag}")
                    if not good:
                        status = FAILED
                    cur = nxt
    return status


def cmd_axioms(cfg: RunConfig, out: _Out) -> int:
    sig = _load_sig(cfg) if cfg.sig else None
    results = verify_axioms(sig, cfg.dims, cfg.tol, cfg.seed)
    worst: dict[str, tuple[bool, float]] = {}
    for r in results:
        ok, err = worst.get(r.name, (True, 0.0))
        worst[r.name] = (ok and r.passed, max(err, r.max_error))
    for name, (ok, err) in worst.items():
        out(f"axiom {name} {out.good('PASS') if ok else out.bad('FAIL')} {err:.3g}")
    return OK if all(ok for ok, _ in worst.values()) else FAILED


COMMANDS = {
    "check": cmd_check,
    "normalize": cmd_normalize,
    "equiv": cmd_equiv,
    "interp": cmd_interp,
    "axioms": cmd_axioms,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dlc", description="dagger lambda calculus toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, files: str = "+"):
        sp.add_argument("inputs", nargs=files, type=Path)
        sp.add_argument("--sig", type=Path, help="signature file (.dsig)")

    common(sub.add_parser("check", help="type/linearity check sequents, replay derivations"))
    sp = sub.add_parser("normalize", help="print canonical normal forms")
    common(sp)
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--strategy", choices=["deterministic", "random"], default="deterministic")
    sp.add_argument("--seed", type=int, default=0)
    common(sub.add_parser("equiv", help="decide soup equivalence of two sequents"), 2)
    sp = sub.add_parser("interp", help="evaluate sequents in the matrix model")
    common(sp)
    sp.add_argument("--verify-steps", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp = sub.add_parser("axioms", help="check the dagger-compact equalities")
    sp.add_argument("--sig", type=Path)
    sp.add_argument("--dims", type=int, nargs="+", default=[2])
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=0)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        inputs=list(getattr(ns, "inputs", []) or []),
        sig=ns.sig,
        seed=getattr(ns, "seed", 0),
        strategy=getattr(ns, "strategy", "deterministic"),
        trace=getattr(ns, "trace", False),
        verify_steps=getattr(ns, "verify_steps", False),
        tol=getattr(ns, "tol", 1e-9),
        dims=getattr(ns, "dims", [2]),
        color=os.environ.get("DLC_COLOR", "0") == "1",
    )


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    out = _Out(cfg.color)
    try:
        cfg.validate()
        if any(d < 1 or d > 4 for d in cfg.dims):
            raise ParseError("--dims values must lie in 1..4", "<args>")
        return COMMANDS[cfg.command](cfg, out)
    except (ParseError, FileNotFoundError, SymbolicOnly) as exc:
        out(out.bad(f"error {exc}"))
        return UNUSABLE
    except (RewriteError, ModelError) as exc:
        out(out.bad(f"internal error {exc}"))
        return BREACH
    except DLCError as exc:
        out(out.bad(f"error {exc}"))
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
