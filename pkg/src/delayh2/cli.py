"""Command-line frontend.

Subcommands::

    delayh2 check-qi --config problem.json
    delayh2 synth    --config problem.json --out controller.json [--force]
    delayh2 sweep    --config problem.json --n-min 1 --n-max 8 --out norms.csv
    delayh2 verify   controller.json --config problem.json

Exit codes: 0 success, 1 usage or parse error, 2 domain-check failure
(QI violation, conformance or stability failure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from . import delaymodel, verify
from .config import ProblemConfig, load_config
from .errors import ConfigError, DelayH2Error
from .statespace import StateSpaceModel, h2_norm_sq
from .synthesis import SynthesisResult, synthesize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; this tool reserves 2 for
    # domain-check failures, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="delayh2", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    qi = sub.add_parser("check-qi", help="test quadratic invariance of the delay pattern")
    qi.add_argument("--config", required=True, help="problem JSON file")
    qi.add_argument("--tol", type=float, default=None,
                    help="threshold for a Markov-parameter block to count as nonzero")

    synth = sub.add_parser("synth", help="synthesize the optimal controller")
    synth.add_argument("--config", required=True)
    synth.add_argument("--out", help="write the controller and costs to this JSON file")
    synth.add_argument("--force", action="store_true",
                       help="skip the quadratic-invariance pre-check")
    synth.add_argument("--tol", type=float, default=None)

    sweep = sub.add_parser("sweep", help="synthesize over a range of horizons N")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--n-min", type=int, required=True)
    sweep.add_argument("--n-max", type=int, required=True)
    sweep.add_argument("--out", required=True, help="CSV output path")

    ver = sub.add_parser("verify", help="re-check a synthesized controller")
    ver.add_argument("controller", help="controller JSON file written by synth")
    ver.add_argument("--config", required=True)
    ver.add_argument("--tol", type=float, default=verify.CONFORMANCE_TOL,
                     help="relative tolerance for conformance")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"delayh2: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handler = {
        "check-qi": cmd_check_qi,
        "synth": cmd_synth,
        "sweep": cmd_sweep,
        "verify": cmd_verify,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"delayh2: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DelayH2Error as exc:
        print(f"delayh2: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def _tol_zero(args, cfg) -> float:
    # CLI flag beats the config's options.tol_zero beats the library default
    if args.tol is not None:
        return args.tol
    if cfg.tol_zero is not None:
        return cfg.tol_zero
    return delaymodel.TOL_ZERO


def _format_matrix(m: np.ndarray) -> str:
    return "\n".join("  " + "  ".join(f"{v:g}" for v in row) for row in np.atleast_2d(m))


def cmd_check_qi(args) -> int:
    cfg = load_config(args.config)
    d = cfg.delay_matrix()
    if d is None:
        raise ConfigError(
            "check-qi needs a 'graph' or 'delay_matrix' constraint; "
            "explicit patterns carry no delay information"
        )
    plant = cfg.plant
    p = delaymodel.plant_block_delays(
        plant.g22, plant.block_rows, plant.block_cols, d.max_delay(),
        tol_zero=_tol_zero(args, cfg),
    )
    print("delay matrix d:")
    print(_format_matrix(d.d))
    print("plant block delays p:")
    print(_format_matrix(p))
    verdict = delaymodel.check_qi(d, p)
    if verdict.ok:
        print("QI: PASS")
        return EXIT_OK
    k, i, j, l = verdict.witness
    lhs = d.d[k, i] + p[i, j] + d.d[j, l]
    print(
        f"QI: FAIL  witness (k={k}, i={i}, j={j}, l={l}): "
        f"d[{k},{i}] + p[{i},{j}] + d[{j},{l}] = {lhs} < d[{k},{l}] = {d.d[k, l]}"
    )
    return EXIT_DOMAIN


def _qi_guard(cfg: ProblemConfig, tol: float, force: bool) -> None:
    if force:
        return
    d = cfg.delay_matrix()
    if d is None:
        print(
            "note: constraint given as explicit patterns; QI not checkable, proceeding",
            file=sys.stderr,
        )
        return
    plant = cfg.plant
    p = delaymodel.plant_block_delays(
        plant.g22, plant.block_rows, plant.block_cols, d.max_delay(), tol_zero=tol
    )
    verdict = delaymodel.check_qi(d, p)
    if not verdict.ok:
        raise DelayH2Error(
            f"delay pattern is not quadratically invariant (witness {verdict.witness}); "
            "re-run with --force to synthesize anyway"
        )


def _result_document(result: SynthesisResult) -> dict:
    k = result.controller
    return {
        "controller": {
            "a": k.a.tolist(),
            "b": k.b.tolist(),
            "c": k.c.tolist(),
            "d": k.d.tolist(),
        },
        "v_star": [b.tolist() for b in result.v_star.blocks],
        "p11_norm_sq": result.p11_norm_sq,
        "qp_cost": result.qp_cost,
        "total_norm_sq": result.total_norm_sq,
        "h2_norm": result.h2_norm,
    }


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    _qi_guard(cfg, _tol_zero(args, cfg), args.force)
    result = synthesize(cfg.plant, cfg.constraint_space())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(_result_document(result), fh, indent=1)
            fh.write("\n")
    print(f"H2 norm: {result.h2_norm:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.n_min < 1 or args.n_max < args.n_min:
        raise ConfigError("need 1 <= n-min <= n-max")
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        try:
            result = synthesize(cfg.plant, cfg.sweep_space(n))
            rows.append((n, f"{result.h2_norm:.10g}"))
        except ConfigError:
            raise
        except DelayH2Error as exc:
            print(f"warning: N={n} failed: {exc}", file=sys.stderr)
            rows.append((n, ""))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("N,norm\n")
        for n, norm in rows:
            fh.write(f"{n},{norm}\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    try:
        with open(args.controller, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        ksec = doc["controller"]
        k = StateSpaceModel(
            np.array(ksec["a"], dtype=float),
            np.array(ksec["b"], dtype=float),
            np.array(ksec["c"], dtype=float),
            np.array(ksec["d"], dtype=float),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read controller file: {exc}") from exc

    cs = cfg.constraint_space()
    report = verify.conformance(k, cs, tol=args.tol)
    loop = verify.closed_loop(cfg.plant, k)
    stable = loop.is_internally_stable
    norm = math.sqrt(h2_norm_sq(loop.model)) if stable else float("nan")

    print(f"conformance: {'PASS' if report.ok else 'FAIL'}")
    for lag, i, j, mag in report.violations[:10]:
        print(f"  lag {lag} block ({i},{j}) magnitude {mag:.3g}")
    print(f"internal stability: {'PASS' if stable else 'FAIL'}")
    print(f"closed-loop H2 norm: {norm:.6f}")

    ok = report.ok and stable
    stored = doc.get("h2_norm")
    if stored is not None and stable:
        rel = abs(norm - stored) / max(abs(stored), 1e-12)
        match = rel <= 1e-6
        print(f"matches stored norm {stored:.6f}: {'PASS' if match else 'FAIL'}")
        ok = ok and match
    return EXIT_OK if ok else EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
