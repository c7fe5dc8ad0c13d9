"""Command-line front end.

Exit status: 0 on success, 2 when a run's built-in check fails (oracle
mismatch, Example 1 window violation), 1 on usage or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .core import Block, EvalGrid
from .processes import ExampleOneParams, LawOfSeriesParams, ProcessSpec, generate
from .seqfile import SequenceFileError, read_sequence, write_sequence
from .stats import MIN_COUNT, analyze_block, block_sweep, hitting_cdf_direct, scan_occurrences

COMMANDS = ("generate", "analyze", "sweep", "example1", "lawofseries", "unbiased", "oracle-check")
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


# --------------------------------------------------------------------------
# compact spec grammar

def _load_json_ref(text: str):
    if text.startswith("@"):
        try:
            return json.loads(Path(text[1:]).read_text())
        except OSError as exc:
            raise UsageError("cannot read %s: %s" % (text[1:], exc.strerror)) from None
        except json.JSONDecodeError as exc:
            raise UsageError("malformed JSON in %s: %s" % (text[1:], exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError("malformed inline JSON %r: %s" % (text, exc)) from None


def _keyvals(body: str) -> dict:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise UsageError("expected key=value, got %r" % part)
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _floats(body: str) -> list[float]:
    try:
        return [float(x) for x in body.split(",") if x]
    except ValueError:
        raise UsageError("expected a comma-separated list of numbers, got %r" % body) from None


def parse_process(text: str, seed: int) -> ProcessSpec:
    """Parse ``bernoulli:p1,p2``, ``markov:@f.json``, ``periodic:0110``,
    ``example1:N0=4,n=3,r=8``, ``lawofseries:@f.json`` or ``@spec.json``."""
    if text.startswith("@"):
        d = _load_json_ref(text)
        d.setdefault("seed", seed)
        return ProcessSpec.from_dict(d)
    kind, _, body = text.partition(":")
    try:
        if kind == "bernoulli":
            return ProcessSpec("bernoulli", {"probs": _floats(body)}, seed)
        if kind == "markov":
            d = _load_json_ref(body)
            if isinstance(d, list):
                d = {"transition": d}
            return ProcessSpec("markov", {"transition": d["transition"],
                                          "initial": d.get("initial")}, seed)
        if kind == "periodic":
            kv = _keyvals(body) if "=" in body else {"pattern": body}
            pattern = [int(c) for c in kv["pattern"].replace(",", "")]
            size = int(kv.get("A", max(max(pattern) + 1, 2)))
            params = {"pattern": pattern, "alphabet_size": size}
            if "phase" in kv:
                params["phase"] = int(kv["phase"])
            return ProcessSpec("periodic", params, seed)
        if kind == "example1":
            kv = _keyvals(body)
            return ProcessSpec("example1", {k: int(kv[k]) for k in ("N0", "n", "r")}, seed)
        if kind == "lawofseries":
            d = _load_json_ref(body)
            base = d["base"]
            base = parse_process(base, seed) if isinstance(base, str) else ProcessSpec.from_dict(base)
            d["base"] = base.to_dict()
            return ProcessSpec("lawofseries", d, seed)
    except KeyError as exc:
        raise UsageError("process spec %r is missing %s" % (text, exc)) from None
    except ValueError as exc:
        raise UsageError("bad process spec %r: %s" % (text, exc)) from None
    raise UsageError("unknown process kind %r" % kind)


def parse_chain(text: str):
    """``fair-coin``, ``iid:p1,p2,...``, ``identity:K`` or ``markov:<json|@file>``."""
    if text == "fair-coin":
        return np.full((2, 2), 0.5), None
    kind, _, body = text.partition(":")
    if kind == "iid":
        p = _floats(body)
        return np.tile(p, (len(p), 1)), p
    if kind == "identity":
        K = int(body or 2)
        init = [1.0] + [0.0] * (K - 1)
        return np.eye(K), init
    if kind == "markov":
        d = _load_json_ref(body)
        if isinstance(d, list):
            return np.asarray(d, dtype=float), None
        return np.asarray(d["transition"], dtype=float), d.get("initial")
    raise UsageError("unknown chain %r" % text)


def parse_lengths(text: str) -> list[int]:
    """``1..8``, ``2,4,6`` or a mix such as ``1..3,8``."""
    out = []
    try:
        for part in filter(None, text.split(",")):
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError("bad length list %r" % text) from None
    if not out or min(out) < 1:
        raise UsageError("lengths must be positive")
    return out


# --------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="serieslab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="re-run from a resolved config JSON")
    parser.add_argument("--out", dest="config_out", default=".", help="output directory for --config runs")
    parser.add_argument("--threads", dest="config_threads", type=int, default=None)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="64-bit seed (default %d)" % DEFAULT_SEED)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (fallback: SERIESLAB_THREADS, then 1)")
    common.add_argument("--grid-lo", type=float, default=0.01)
    common.add_argument("--grid-hi", type=float, default=10.0)
    common.add_argument("--grid-size", type=int, default=256)
    common.add_argument("--min-count", type=int, default=MIN_COUNT)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="write a sample path to a SERIESEQ file")
    p.add_argument("--process", required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--name", default="seq.bin", help="file name inside --out")

    p = sub.add_parser("analyze", parents=[common], help="statistics of one block in a sequence file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--block", required=True)
    p.add_argument("--num-starts", type=int, default=10**4)

    p = sub.add_parser("sweep", parents=[common], help="repelling prevalence over block lengths")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--process")
    src.add_argument("--in", dest="input")
    p.add_argument("--length", type=int, default=10**6)
    p.add_argument("--n", dest="lengths", default="1..8")
    p.add_argument("--eps", default="0.1")
    p.add_argument("--blocks-csv", action="store_true", help="also write one per-block CSV per n")

    p = sub.add_parser("example1", parents=[common], help="check the Example 1 repelling family")
    p.add_argument("--N0", type=int, default=4)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--length", type=int, default=10**6)
    p.add_argument("--threshold", type=float, default=harness.REPEL_CAP - 0.1)

    p = sub.add_parser("lawofseries", parents=[common], help="before/after attracting demo")
    p.add_argument("--base", default="bernoulli:0.25,0.25,0.25,0.25")
    p.add_argument("--params", help="@file.json or inline JSON with k, l, p, N, ...")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--p", type=int, default=2000)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--max-word-freq", type=float, default=None)
    p.add_argument("--probe", default=None, help="probe lengths (default: subset of [N, N^2])")
    p.add_argument("--t-star", type=float, default=2.0)
    p.add_argument("--eps-star", type=float, default=0.1)
    p.add_argument("--length", type=int, default=10**6)

    p = sub.add_parser("unbiased", parents=[common], help="KS distance to the exponential law")
    p.add_argument("--process", default="bernoulli:0.5,0.5")
    p.add_argument("--n", dest="lengths", default="1..8")
    p.add_argument("--length", type=int, default=10**6)

    p = sub.add_parser("oracle-check", parents=[common], help="empirical vs exact return-time law")
    p.add_argument("--chain", default="fair-coin")
    p.add_argument("--block", action="append", required=True)
    p.add_argument("--length", type=int, default=10**6)
    p.add_argument("--in", dest="input", help="compare a sequence file instead of a fresh sample")
    p.add_argument("--alpha", type=float, default=harness.DKW_ALPHA)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Fully explicit configuration; enough to reproduce the run."""
    skip = ("config", "out", "threads", "config_out", "config_threads")
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    if cfg.get("seed") is None:
        cfg["seed"] = DEFAULT_SEED
    return cfg


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SERIESLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError("SERIESLAB_THREADS must be an integer") from None
    return 1


def _grid(cfg) -> EvalGrid:
    try:
        return EvalGrid.geometric(cfg["grid_lo"], cfg["grid_hi"], cfg["grid_size"])
    except ValueError as exc:
        raise UsageError("bad grid: %s" % exc) from None


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)


# --------------------------------------------------------------------------
# commands

def cmd_generate(cfg, out, threads):
    spec = parse_process(cfg["process"], cfg["seed"])
    seq = generate(spec, cfg["length"])
    write_sequence(out / cfg["name"], seq)


def cmd_analyze(cfg, out, threads):
    seq = read_sequence(cfg["input"])
    try:
        block = Block.parse(seq.alphabet, cfg["block"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    grid = _grid(cfg)
    occ = scan_occurrences(seq, block)
    report = {"kind": "analyze", "seed": cfg["seed"], "block": block.text(), "count": occ.count,
              "mu_hat": occ.mu_hat, "sequence": seq.provenance.to_dict() if seq.provenance else None}
    if occ.count >= 2:
        rec = analyze_block(seq, block, grid)
        direct = hitting_cdf_direct(seq, block, cfg["num_starts"], cfg["seed"], occ)
        report["record"] = rec.to_dict()
        report["direct_hitting"] = {"cdf": direct.cdf.to_dict(), "used": direct.used,
                                    "dropped": direct.dropped}
    _write(out, "analyze.json", harness.dumps(report))


def cmd_sweep(cfg, out, threads):
    grid = _grid(cfg)
    lengths = parse_lengths(cfg["lengths"])
    eps = _floats(cfg["eps"])
    if cfg.get("input"):
        seq = read_sequence(cfg["input"])
        spec = ProcessSpec("bernoulli", {"probs": [1.0 / seq.alphabet.size] * seq.alphabet.size},
                           cfg["seed"])
        report = harness.run_theorem1_sweep(spec, lengths, eps, len(seq), cfg["seed"],
                                            cfg["min_count"], grid, threads, seq=seq)
        report.process = {"file": str(cfg["input"]),
                          "provenance": seq.provenance.to_dict() if seq.provenance else None}
    else:
        spec = parse_process(cfg["process"], cfg["seed"])
        report = harness.run_theorem1_sweep(spec, lengths, eps, cfg["length"], cfg["seed"],
                                            cfg["min_count"], grid, threads)
    _write(out, "sweep.json", report.to_json())
    _write(out, "sweep.csv", report.to_csv())
    if cfg.get("blocks_csv"):
        for n in report.lengths:
            _write(out, "sweep_blocks_n%d.csv" % n, report.block_csv(n))


def cmd_example1(cfg, out, threads):
    params = ExampleOneParams(cfg["N0"], cfg["n"], cfg["r"], cfg["length"], cfg["seed"])
    rep = harness.run_example1_check(params, cfg["threshold"], _grid(cfg))
    _write(out, "example1.json", rep.to_json())
    _write(out, "example1.csv", rep.to_csv())
    if not rep.gaps_within_window:
        raise CheckFailed("designated gaps outside [%g, %g]" % rep.gap_window)


def cmd_lawofseries(cfg, out, threads):
    base = parse_process(cfg["base"], cfg["seed"])
    if cfg.get("params"):
        d = _load_json_ref(cfg["params"])
        words = d.pop("words", None)
        d.pop("base", None)
        d.pop("seed", None)
        params = LawOfSeriesParams(base=base, seed=cfg["seed"], words=words, **d)
    else:
        params = LawOfSeriesParams(k=cfg["k"], l=cfg["l"], p=cfg["p"], N=cfg["N"], a=cfg["a"],
                                   b=cfg["b"], max_word_freq=cfg["max_word_freq"],
                                   seed=cfg["seed"], base=base)
    probes = parse_lengths(cfg["probe"]) if cfg.get("probe") else None
    rep = harness.run_lawofseries_demo(base, params, probes, cfg["t_star"], cfg["eps_star"],
                                       cfg["length"], cfg["min_count"], _grid(cfg), threads)
    _write(out, "lawofseries.json", rep.to_json())
    _write(out, "lawofseries.csv", rep.to_csv())


def cmd_unbiased(cfg, out, threads):
    spec = parse_process(cfg["process"], cfg["seed"])
    rep = harness.run_unbiased_check(spec, parse_lengths(cfg["lengths"]), cfg["length"],
                                     cfg["seed"], cfg["min_count"], _grid(cfg), threads)
    _write(out, "unbiased.json", rep.to_json())
    _write(out, "unbiased.csv", rep.to_csv())


def cmd_oracle_check(cfg, out, threads):
    P, initial = parse_chain(cfg["chain"])
    seq = read_sequence(cfg["input"]) if cfg.get("input") else None
    A = P.shape[0]
    from .core import Alphabet
    alphabet = seq.alphabet if seq is not None else Alphabet(A)
    if alphabet.size != A:
        raise UsageError("sequence alphabet (%d) does not match the chain (%d)" % (alphabet.size, A))
    blocks = [Block.parse(alphabet, b) for b in cfg["block"]]
    rep = harness.run_oracle_equivalence(P, blocks, cfg["length"], cfg["seed"], initial,
                                         cfg["alpha"], seq=seq)
    _write(out, "oracle.json", rep.to_json())
    _write(out, "oracle.csv", rep.to_csv())
    if not rep.passed:
        raise CheckFailed("oracle mismatch: max deviation %.4g exceeds the DKW bound"
                          % rep.max_deviation)


HANDLERS = {"generate": cmd_generate, "analyze": cmd_analyze, "sweep": cmd_sweep,
            "example1": cmd_example1, "lawofseries": cmd_lawofseries,
            "unbiased": cmd_unbiased, "oracle-check": cmd_oracle_check}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.config:
            cfg = _load_json_ref("@" + args.config)
            if not isinstance(cfg, dict) or cfg.get("command") not in COMMANDS:
                raise UsageError("config file has no valid command")
            args = argparse.Namespace(**{**cfg, "out": args.config_out,
                                         "threads": args.config_threads, "config": None})
        elif args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        cfg = resolve(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        threads = _threads(args)
        echo = harness.dumps(cfg)
        sys.stdout.write(echo)
        _write(out, "config.json", echo)
        HANDLERS[cfg["command"]](cfg, out, threads)
    except CheckFailed as exc:
        print("check failed: %s" % exc, file=sys.stderr)
        return 2
    except (UsageError, SequenceFileError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
