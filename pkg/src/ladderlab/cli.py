"""Command-line interface.

Four subcommands cover the pipeline end to end::

    ladderlab ladder              # build/load the knot table, report segment geometry
    ladderlab verify-hybrid       # factorization + three-term identity residuals
    ladderlab verify-meta         # trace level curves, verify all fifteen equations
    ladderlab generate-equations  # print canonical equation text (or diff vs golden)

Every command is deterministic given the config file, the cache directory
and the sampler seed.  Exit codes: 0 success, 1 a verification failed its
tolerance, 2 bad configuration or unusable cache, 3 a numerical routine
failed (no seed, singular curve, out-of-range request).
"""

from __future__ import annotations

import argparse
import csv
import difflib
import json
import math
import sys
from pathlib import Path
from typing import Callable, Optional

from .config import RunConfig
from .curves import LevelCurve, make_families, level_values, sample_curve, trace_curve
from .errors import CacheFormatError, ConfigError, LadderLabError
from .factorization import check_exact_factorization
from .hybrid import a_terms, epsilon
from .ladder import EULER_GAMMA, LadderTable, build_table, suggested_t_max
from .metaeq import (canonical_text, equation_for_pair, equation_slots,
                     evaluate, generate_all, golden_text, needed_slots,
                     perturb_off_curve, seed_points, verify_with_pools)

__all__ = ["main"]

#: Residual a deliberately displaced point must exceed for the perturbation
#: control to count as discriminating.
_CONTROL_FLOOR = 1e-5

_PROVENANCE = {"root_rule": "smallest", "component_of_seed": True}


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def _say(msg: str) -> None:
    print(msg, flush=True)


def _ensure_table(cfg: RunConfig, progress: Callable[[str], None] = _say) -> LadderTable:
    """Load the knot table from the cache directory, building it on a miss.

    The file name encodes the covered range, so configs with different grids
    coexist in one directory and a bigger table is never clobbered.
    """
    t_max = suggested_t_max(max(cfg.l_grid))
    cache_dir = Path(cfg.cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"h-table-{t_max:.3f}.csv"
    if path.exists():
        return LadderTable.load(path)
    progress(f"cache miss: integrating the second moment up to t = {t_max:.1f} "
             f"(this is the slow step; the result lands in {path})")
    table = build_table(t_max, tol=cfg.tol_exact, progress=progress)
    table.save(path)
    return table


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_report(cfg: RunConfig, command: str, payload: dict, passed: bool) -> Path:
    report = {
        "command": command,
        "config": cfg.as_dict(),
        "provenance": dict(_PROVENANCE),
        "passed": bool(passed),
    }
    report.update(payload)
    path = _out_dir(cfg) / "report.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# ladder
# ---------------------------------------------------------------------------

def _cmd_ladder(cfg: RunConfig, args: argparse.Namespace) -> int:
    table = _ensure_table(cfg)
    header = ["L", "U", "base_lo", "base_hi", "lifted_lo", "lifted_hi",
              "base_len", "lifted_len", "rho", "rho_ratio", "lifted_over_l_logl"]
    rows: list[list] = []
    _say(f"{'L':>6} {'rho':>14} {'rho_ratio':>10} {'lifted_len':>12} {'len/(L/lnL)':>12}")
    for l_value in cfg.l_grid:
        seg = table.disconnected_set(l_value, cfg.u_width)
        log_l = math.log(l_value)
        rho_ratio = seg.rho * log_l / (math.pi * (1.0 - EULER_GAMMA) * l_value)
        lifted_over = seg.lifted_len / (l_value / log_l)
        rows.append([l_value, cfg.u_width,
                     f"{seg.base.lo:.12f}", f"{seg.base.hi:.12f}",
                     f"{seg.lifted.lo:.12f}", f"{seg.lifted.hi:.12f}",
                     f"{seg.base_len:.12e}", f"{seg.lifted_len:.12e}",
                     f"{seg.rho:.12e}", f"{rho_ratio:.12e}", f"{lifted_over:.12e}"])
        _say(f"{l_value:>6g} {seg.rho:>14.6e} {rho_ratio:>10.4f} "
             f"{seg.lifted_len:>12.6e} {lifted_over:>12.6e}")
    path = _out_dir(cfg) / "gaps.csv"
    _write_csv(path, header, rows)
    _say(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# verify-hybrid
# ---------------------------------------------------------------------------

def _cmd_verify_hybrid(cfg: RunConfig, args: argparse.Namespace) -> int:
    table = _ensure_table(cfg)
    tol = cfg.tol_exact
    entries: list[dict] = []
    rows: list[list] = []
    passed = True
    for l_value in cfg.l_grid:
        fact = []
        worst_rel = 0.0
        for l_index in (1, 2, 3):
            rep = check_exact_factorization(table, l_value, cfg.u_width, l_index)
            scale = max(abs(rep.base_integral), abs(rep.lifted_integral))
            rel = float(rep.residual / scale)
            worst_rel = max(worst_rel, rel)
            fact.append({"l": l_index,
                         "base_integral": float(rep.base_integral),
                         "lifted_integral": float(rep.lifted_integral),
                         "residual": float(rep.residual),
                         "relative_residual": rel})
        terms = a_terms(table, l_value, cfg.u_width)
        hybrid_abs = float(abs(terms[0].exact_term + terms[2].exact_term
                               - terms[1].exact_term))
        hybrid_rel = hybrid_abs / max(abs(t.exact_term) for t in terms)
        eps = epsilon(table, l_value, cfg.u_width)
        ok = bool(worst_rel < tol and hybrid_rel < tol)
        passed = passed and ok
        entries.append({"L": l_value, "U": cfg.u_width,
                        "factorization": fact,
                        "hybrid": {"residual": hybrid_abs,
                                   "relative_residual": float(hybrid_rel)},
                        "epsilon": {"epsilon": float(eps.epsilon),
                                    "epsilon_prime": float(eps.epsilon_prime),
                                    "bound_ratio": float(eps.bound_ratio)},
                        "passed": ok})
        rows.append([l_value, cfg.u_width,
                     f"{fact[0]['relative_residual']:.6e}",
                     f"{fact[1]['relative_residual']:.6e}",
                     f"{fact[2]['relative_residual']:.6e}",
                     f"{hybrid_rel:.6e}", f"{eps.epsilon:.6e}",
                     f"{eps.epsilon_prime:.6e}", f"{eps.bound_ratio:.6e}"])
        _say(f"L={l_value:<6g} factorization<= {worst_rel:.3e}  "
             f"hybrid {hybrid_rel:.3e}  eps {eps.epsilon:+.3e}  "
             f"ratio {eps.bound_ratio:.3e}  [{'ok' if ok else 'FAIL'}]")
    csv_path = _out_dir(cfg) / "hybrid.csv"
    _write_csv(csv_path,
               ["L", "U", "fact_rel_1", "fact_rel_2", "fact_rel_3",
                "hybrid_rel", "epsilon", "epsilon_prime", "bound_ratio"],
               rows)
    report_path = _write_report(cfg, "verify-hybrid",
                                {"tolerance": tol, "entries": entries}, passed)
    _say(f"wrote {csv_path} and {report_path}")
    _say("verify-hybrid: " + ("PASS" if passed else "FAIL"))
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# verify-meta
# ---------------------------------------------------------------------------

def _curve_csv(path: Path, curve: LevelCurve) -> None:
    assignment = curve.assignment
    family = assignment.family
    rows = []
    for s in curve.points:
        value = family.field_sq(s)
        abs_f = value if family.n == 1 else math.sqrt(max(value, 0.0))
        rows.append([f"{s.real:.15f}", f"{s.imag:.15f}",
                     f"{abs_f:.15e}", f"{assignment.level:.15e}"])
    _write_csv(path, ["re", "im", "abs_f", "level"], rows)


def _cmd_verify_meta(cfg: RunConfig, args: argparse.Namespace) -> int:
    table = _ensure_table(cfg)
    tol = cfg.tol_meta
    families = make_families(n_pows=cfg.n_pows, p_orders=cfg.p_orders,
                             ksq_values=cfg.ksq)
    anchor = cfg.l_grid[-1]
    assigns = level_values(table, anchor, cfg.u_width, families)

    curve_dir = _out_dir(cfg) / "curves"
    curve_dir.mkdir(parents=True, exist_ok=True)
    pool_size = max(48, 4 * cfg.samples)
    pools = {}
    manifest = []
    for (n, l), assignment in sorted(assigns.items()):
        _say(f"tracing family {n} slot {l} (level {assignment.level:.6g})")
        curve = trace_curve(assignment, max_arc_length=12.0)
        path = curve_dir / f"omega_{n}_{l}.csv"
        _curve_csv(path, curve)
        manifest.append({"family": n, "l": l, "level": float(assignment.level),
                         "closed": bool(curve.closed),
                         "points": len(curve.points),
                         "arc_length": float(curve.arc_length),
                         "file": str(path)})
        if (n, l) in set(needed_slots()):
            pools[(n, l)] = sample_curve(curve, pool_size)

    reports = verify_with_pools(pools, families, samples=cfg.samples,
                                seed=cfg.seed)
    by_ident: dict[str, list[float]] = {}
    for rep in reports:
        by_ident.setdefault(rep.ident, []).append(rep.residual)
    equations = []
    passed = True
    for ident, residuals in by_ident.items():
        worst = float(max(residuals))
        ok = bool(worst < tol)
        passed = passed and ok
        equations.append({"ident": ident, "samples": len(residuals),
                          "max_residual": worst, "passed": ok})
        _say(f"{ident:<14} max residual {worst:.3e} over "
             f"{len(residuals)} draws  [{'ok' if ok else 'FAIL'}]")

    # Control: nudge one slot off its curve and require the defect to show.
    eq = generate_all()[0]
    points = seed_points(assigns, equation_slots(eq))
    slot = (2, 1)
    points[slot] = perturb_off_curve(assigns[slot], points[slot])
    control = float(evaluate(eq, points, families).residual)
    control_ok = bool(control > _CONTROL_FLOOR)
    passed = passed and control_ok
    _say(f"perturbation control: residual {control:.3e} after a 1e-3 "
         f"displacement  [{'ok' if control_ok else 'FAIL'}]")

    report_path = _write_report(
        cfg, "verify-meta",
        {"tolerance": tol, "anchor_l": anchor, "curves": manifest,
         "equations": equations,
         "perturbation_control": {"ident": eq.ident, "slot": list(slot),
                                  "residual": control,
                                  "floor": _CONTROL_FLOOR,
                                  "passed": control_ok}},
        passed)
    _say(f"wrote {len(manifest)} curve files under {curve_dir} and {report_path}")
    _say("verify-meta: " + ("PASS" if passed else "FAIL"))
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# generate-equations
# ---------------------------------------------------------------------------

def _parse_pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise ConfigError(
            f"--pair wants two comma-separated catalog names, e.g. "
            f"'3.10,4.5'; got {text!r}")
    return parts[0], parts[1]


def _cmd_generate_equations(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.pair is not None:
        a, b = _parse_pair(args.pair)
        equations = [equation_for_pair(a, b)]
    else:
        equations = generate_all()
    if args.check_golden:
        clean = True
        for eq in equations:
            produced = canonical_text(eq)
            recorded = golden_text(eq)
            if produced == recorded:
                _say(f"{eq.ident:<14} matches golden record")
                continue
            clean = False
            diff = difflib.unified_diff(
                recorded.splitlines(keepends=True),
                produced.splitlines(keepends=True),
                fromfile=f"golden/{eq.ident}", tofile="generated")
            sys.stdout.writelines(diff)
        _say("check-golden: " + ("PASS" if clean else "FAIL"))
        return 0 if clean else 1
    blocks = [canonical_text(eq) for eq in equations]
    print("\n".join(blocks), end="")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config file (defaults apply when omitted)")
    common.add_argument("--cache", metavar="DIR",
                        help="knot-table cache directory (overrides config)")

    parser = argparse.ArgumentParser(
        prog="ladderlab",
        description="Surrogate-ladder identities and level-curve equation checks.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_ladder = sub.add_parser(
        "ladder", parents=[common],
        help="build or load the knot table and report segment geometry")
    p_ladder.set_defaults(func=_cmd_ladder)

    p_hybrid = sub.add_parser(
        "verify-hybrid", parents=[common],
        help="check factorization and three-term identity residuals")
    p_hybrid.add_argument("--tol", type=float, metavar="X",
                          help="override the exact-identity tolerance")
    p_hybrid.set_defaults(func=_cmd_verify_hybrid)

    p_meta = sub.add_parser(
        "verify-meta", parents=[common],
        help="trace level curves and verify the fifteen equations")
    p_meta.add_argument("--tol", type=float, metavar="X",
                        help="override the equation-residual tolerance")
    p_meta.add_argument("--samples", type=int, metavar="N",
                        help="random assignments per equation")
    p_meta.add_argument("--seed", type=int, metavar="N",
                        help="sampler seed")
    p_meta.set_defaults(func=_cmd_verify_meta)

    p_gen = sub.add_parser(
        "generate-equations", parents=[common],
        help="print the canonical equation text")
    p_gen.add_argument("--pair", metavar="A,B",
                       help="restrict to one crossbreeding, e.g. '3.10,4.5'")
    p_gen.add_argument("--check-golden", action="store_true",
                       help="diff generated text against the recorded golden files")
    p_gen.set_defaults(func=_cmd_generate_equations)
    return parser


def _configure(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    changes = {}
    if getattr(args, "cache", None):
        changes["cache_dir"] = args.cache
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        changes["samples"] = args.samples
    if getattr(args, "tol", None) is not None:
        if args.func is _cmd_verify_meta:
            changes["tol_meta"] = args.tol
        else:
            changes["tol_exact"] = args.tol
    return cfg.override(**changes) if changes else cfg


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help()
        return 2
    try:
        cfg = _configure(args)
        return args.func(cfg, args)
    except (ConfigError, CacheFormatError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except LadderLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
