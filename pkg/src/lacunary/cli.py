"""``lacunary`` command line: one experiment per invocation.

Exit status is 0 on success, 1 when a hard check fails (oracle mismatch,
identity residual above tolerance) and 2 on usage or resource errors.
Output goes to stdout unless ``--out`` is given or ``LACUNARY_OUTPUT_DIR``
is set; every emitted file starts with the resolved configuration and the
package version.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .config import KEYS, RunConfig, export_prefix, load_config_file, merge
from .diophantine import (
    count_fast,
    count_naive,
    difference_spectrum,
    diophantine_profile,
    paper_profile,
    profile_csv,
)
from .dyadic import precision_for
from .errors import LacunaryError, UsageError
from .reports import ExperimentReport, commented, samples_csv, to_plain, trace_csv
from .sequence import sequence_prefix
from .stats import (
    SampleBatch,
    block_large_value_probability,
    block_periodicity_check,
    clt_experiment,
    erdos_fortet_clt,
    erdos_fortet_identity_experiment,
    gaposhkin_experiment,
    lil_ratio_scan,
)
from .trigsums import decomposition_batch

OUTPUT_DIR_ENV = "LACUNARY_OUTPUT_DIR"
IDENTITY_TOLERANCE = 1e-9
NAIVE_LIMIT = 5000  # largest N for which count also runs the O(N^2) oracle

SUBCOMMANDS = {
    "generate": "print a sequence prefix, one integer per line",
    "count": "count solutions of a*n_k - b*n_l = c",
    "spectrum": "solution counts for every right-hand side",
    "profile": "maximal solution count and its normalization per prefix length",
    "clt": "Kolmogorov distance of normalized sums to the normal law",
    "gaposhkin": "normal approximation of weighted dyadic cosine sums",
    "lil": "iterated-logarithm ratios along sample paths",
    "decompose": "split block sums into main, drag, sine and boundary terms",
    "erdos-fortet-check": "product identity of the Erdos-Fortet sum at random points",
    "blockprob": "measure of large values of a block sum",
    "periodicity": "periodicity of block sums under the tower shift",
}
CSV_CAPABLE = {"spectrum", "profile", "clt", "lil"}
DEFAULT_FORMAT = {"spectrum": "csv", "profile": "csv"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _typed(key):
    parse = KEYS[key][1]

    def conv(text):
        return parse(text)

    conv.__name__ = key
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="key = value configuration file")
    g = common.add_argument_group("sequence")
    g.add_argument("--seq", default=S, help="geometric, erdos-fortet, paper or explicit")
    g.add_argument("--q", type=_typed("q"), default=S, help="ratio of the geometric sequence")
    g.add_argument("--values", type=_typed("values"), default=S, help="terms of an explicit sequence")
    g = common.add_argument_group("construction")
    g.add_argument("--R", type=_typed("R"), default=S)
    g.add_argument("--eps", type=_typed("eps"), default=S, help="rational in (0, 1), e.g. 1/2")
    g.add_argument("--d", type=_typed("d"), default=S)
    g.add_argument("--K", type=_typed("K"), default=S)
    g.add_argument("--tower", default=S, help="reduced, paper or table:<t1,t2,...>")
    g = common.add_argument_group("equation")
    g.add_argument("--a", type=_typed("a"), default=S)
    g.add_argument("--b", type=_typed("b"), default=S)
    g.add_argument("--c", type=_typed("c"), default=S)
    g.add_argument("--include-zero", dest="exclude_zero", action="store_false", default=S,
                   help="let profile maxima range over c = 0 as well")
    g = common.add_argument_group("experiment")
    g.add_argument("--f", default=S, help="cos, erdos-fortet or power:<d>")
    g.add_argument("--N", type=_typed("N"), default=S)
    g.add_argument("--Ns", type=_typed("Ns"), default=S, help="list such as 10,100,1000 or 4..12")
    g.add_argument("--M", type=_typed("M"), default=S, help="Monte-Carlo sample count")
    g.add_argument("--seed", type=_typed("seed"), default=S)
    g.add_argument("--trials", type=_typed("trials"), default=S)
    g.add_argument("--blocks", "--i", dest="blocks", type=_typed("blocks"), default=S,
                   help="block indices such as 1..5 or 2,3")
    g.add_argument("--weights", type=_typed("weights"), default=S)
    g.add_argument("--workers", type=_typed("workers"), default=S)
    g = common.add_argument_group("output")
    g.add_argument("--format", default=S, help="csv or json")
    g.add_argument("--out", default=S, help=f"output file (relative to ${OUTPUT_DIR_ENV} if set)")

    parser = _Parser(prog="lacunary", description="Experiments on lacunary trigonometric sums.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand", parser_class=_Parser)
    sub.required = True
    for name, help_text in SUBCOMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def parse_config(argv=None) -> RunConfig:
    """Resolve defaults, an optional config file and flags into a RunConfig."""
    ns = vars(build_parser().parse_args(argv))
    subcommand = ns.pop("subcommand")
    path = ns.pop("config", None)
    file_values = load_config_file(path) if path else {}
    cfg = merge(subcommand, file_values, ns)
    if cfg.format is not None and cfg.format == "csv" and subcommand not in CSV_CAPABLE:
        raise UsageError(f"{subcommand} only writes json")
    return cfg


# --------------------------------------------------------------------------
# output


def _destination(cfg: RunConfig, ext: str) -> str | None:
    base = os.environ.get(OUTPUT_DIR_ENV)
    out = cfg.out
    if out == "-":
        return None
    if out is None:
        return os.path.join(base, f"{cfg.subcommand}.{ext}") if base else None
    if base and not os.path.isabs(out):
        return os.path.join(base, out)
    return out


def _emit(cfg: RunConfig, text: str, ext: str, stdout: bool = True):
    dest = _destination(cfg, ext)
    if dest is None:
        if stdout:
            sys.stdout.write(text)
        return
    parent = os.path.dirname(dest)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _header(cfg: RunConfig) -> dict:
    return {"config": cfg.to_dict(), "version": __version__}


def _emit_report(cfg: RunConfig, report: ExperimentReport, stdout: bool = True):
    _emit(cfg, report.to_json(config=cfg.to_dict()), "json", stdout)


def _emit_csv(cfg: RunConfig, body: str):
    _emit(cfg, commented(_header(cfg), body), "csv")


def _fmt(cfg: RunConfig) -> str:
    return cfg.format or DEFAULT_FORMAT.get(cfg.subcommand, "json")


# --------------------------------------------------------------------------
# subcommands


def _generate(cfg):
    prefix = sequence_prefix(cfg.N, cfg.sequence())
    lines = json.dumps(to_plain(_header(cfg)), sort_keys=True)
    _emit(cfg, f"# {lines}\n" + export_prefix(prefix), "txt")
    return 0


def _count(cfg):
    prefix = sequence_prefix(cfg.N, cfg.sequence())
    fast = count_fast(prefix, cfg.a, cfg.b, cfg.c)
    naive = count_naive(prefix, cfg.a, cfg.b, cfg.c) if cfg.N <= NAIVE_LIMIT else None
    agree = naive is None or naive == fast
    print(fast)
    report = ExperimentReport("count", {"N": cfg.N, "a": cfg.a, "b": cfg.b, "c": cfg.c}, None,
                              {"count": fast, "naive": naive}, {}, {"oracle": agree})
    _emit_report(cfg, report, stdout=False)
    if not agree:
        print(f"oracle mismatch: naive {naive}, fast {fast}", file=sys.stderr)
        return 1
    return 0


def _spectrum(cfg):
    spec = difference_spectrum(sequence_prefix(cfg.N, cfg.sequence()), cfg.a, cfg.b)
    rows = sorted(spec.counts.items())
    if _fmt(cfg) == "csv":
        _emit_csv(cfg, "c,count\n" + "".join(f"{c},{n}\n" for c, n in rows))
    else:
        report = ExperimentReport("spectrum", {"N": cfg.N, "a": cfg.a, "b": cfg.b}, None,
                                  {"counts": [[c, n] for c, n in rows], "total": spec.total()})
        _emit_report(cfg, report)
    return 0


def _profile(cfg):
    if cfg.seq == "paper" and not cfg.Ns:
        rows = paper_profile(cfg.construction(), cfg.a, cfg.b, cfg.blocks)
    else:
        rows = diophantine_profile(cfg.sequence(), cfg.a, cfg.b, cfg.Ns or (cfg.N,), eps=cfg.eps,
                                   exclude_zero=cfg.exclude_zero)
    if _fmt(cfg) == "csv":
        _emit_csv(cfg, profile_csv(rows))
    else:
        report = ExperimentReport("profile", {"a": cfg.a, "b": cfg.b}, None,
                                  {"rows": [r._asdict() for r in rows]})
        _emit_report(cfg, report)
    return 0


def _clt(cfg):
    want_values = _fmt(cfg) == "csv"
    if cfg.seq == "erdos-fortet" and cfg.f == "erdos-fortet":
        report = erdos_fortet_clt(cfg.N, cfg.M, cfg.seed, cfg.workers, keep_values=want_values)
    else:
        report = clt_experiment(cfg.trig_poly(), cfg.sequence(), cfg.N, cfg.M, cfg.seed,
                                cfg.workers, keep_values=want_values)
    if want_values:
        _emit_csv(cfg, samples_csv(report.points, report.values))
    else:
        _emit_report(cfg, report)
    return 0


def _gaposhkin(cfg):
    weights = cfg.weights or tuple([1 / math.sqrt(cfg.N)] * cfg.N)
    _emit_report(cfg, gaposhkin_experiment(weights, cfg.M, cfg.seed, workers=cfg.workers))
    return 0


def _lil(cfg):
    Ns = cfg.Ns or tuple(2**e for e in range(4, 13))
    report = lil_ratio_scan(cfg.trig_poly(), cfg.sequence(), Ns, cfg.M, cfg.seed, workers=cfg.workers)
    if _fmt(cfg) == "csv":
        Ns_sorted = report.stats["N"]
        rows = ((p, N, v) for p, row in zip(report.points, report.sums.tolist())
                for N, v in zip(Ns_sorted, row))
        _emit_csv(cfg, trace_csv(rows))
    else:
        _emit_report(cfg, report)
    return 0


def _decompose(cfg):
    params = cfg.construction()
    d = params.d
    blocks, ok = [], True
    for i in cfg.blocks:
        hi = params.block_bounds(i)[1]
        batch = SampleBatch.draw(cfg.seed, cfg.trials, precision_for(hi + d + 2))
        r = decomposition_batch(params, i, batch.points)
        worst = float(r["residual"].max())
        err = float(np.abs(r["error"]).max())
        passed = worst <= IDENTITY_TOLERANCE and err <= r["error_bound"]
        ok &= passed
        blocks.append({"i": i, "max_residual": worst, "max_abs_error": err,
                       "error_bound": r["error_bound"], "error_count": r["error_count"], "passed": passed})
    report = ExperimentReport("decompose", {"d": d, "trials": cfg.trials}, cfg.seed, {"blocks": blocks},
                              {"residual": IDENTITY_TOLERANCE}, {"identity": ok})
    _emit_report(cfg, report)
    return 0 if ok else 1


def _erdos_fortet_check(cfg):
    report = erdos_fortet_identity_experiment(cfg.N, cfg.trials, cfg.seed, IDENTITY_TOLERANCE)
    _emit_report(cfg, report)
    return 0 if report.ok else 1


def _blockprob(cfg):
    params = cfg.construction()
    blocks = [block_large_value_probability(params, i, cfg.M, cfg.seed, cfg.workers).stats
              for i in cfg.blocks]
    for i, b in zip(cfg.blocks, blocks):
        b["i"] = i
    _emit_report(cfg, ExperimentReport("blockprob", {"M": cfg.M}, cfg.seed, {"blocks": blocks}))
    return 0


def _periodicity(cfg):
    params = cfg.construction()
    blocks, ok = [], True
    for i in cfg.blocks:
        r = block_periodicity_check(params, i, cfg.trials, cfg.seed)
        passed = r.exact_residual == 0 and r.float_residual <= IDENTITY_TOLERANCE
        ok &= passed
        blocks.append({"i": i, "T": params.T(i), "exact_residual": r.exact_residual,
                       "float_residual": r.float_residual,
                       "half_period_residual": r.half_period_residual, "passed": passed})
    report = ExperimentReport("periodicity", {"trials": cfg.trials}, cfg.seed, {"blocks": blocks},
                              {"float_residual": IDENTITY_TOLERANCE}, {"periodic": ok})
    _emit_report(cfg, report)
    return 0 if ok else 1


HANDLERS = {
    "generate": _generate,
    "count": _count,
    "spectrum": _spectrum,
    "profile": _profile,
    "clt": _clt,
    "gaposhkin": _gaposhkin,
    "lil": _lil,
    "decompose": _decompose,
    "erdos-fortet-check": _erdos_fortet_check,
    "blockprob": _blockprob,
    "periodicity": _periodicity,
}


def execute(cfg: RunConfig) -> int:
    return HANDLERS[cfg.subcommand](cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        with warnings.catch_warnings():
            # parameter-condition warnings are expected at desk scale
            warnings.simplefilter("ignore", UserWarning)
            return execute(cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (LacunaryError, ValueError, OSError) as exc:
        print(f"lacunary: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
