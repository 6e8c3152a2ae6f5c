"""Command line front end.

Subcommands::

    dcesim steady    branch table at one operating point
    dcesim sweep     1D/2D parameter sweep from config axes
    dcesim wigner    Wigner grid of the mechanical state
    dcesim spectrum  quadrature noise spectrum + integrated variance
    dcesim figure    canned datasets (fig2a, fig2b, fig3a..c, fig4a..f, figA1)

Every subcommand reads a flat key=value config (``--config``) with
optional ``--set key=value`` overrides.  Exit codes: 0 success, 2
invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import config as _config
from .errors import DceSimError, NumericalError, ValidationError
from .linear_dynamics import build_drift, noise_matrix, steady_covariance
from .measures import log_negativity, quadrature_variance, scan_quadratures, \
    wigner_grid, wigner_lab_view
from .model import EffectiveParams, effective_params
from .spectra import mechanical_variance_spectral
from .steady_state import classify_and_solve, select_branch
from .sweep import FIGURE_TAGS, reproduce_figure, run_sweep, write_spectrum, \
    write_wigner, _f17, _write_csv


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="flat key=value config file")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override one config key (repeatable)")
    common.add_argument("--out", metavar="PATH", help="output file (or directory for figure)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=1, metavar="N",
                        help="process pool size for sweeps")

    parser = argparse.ArgumentParser(prog="dcesim",
                                     description="steady states, entanglement and "
                                                 "squeezing of a parametrically "
                                                 "driven optomechanical cavity")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="solve branches at one point")
    sub.add_parser("sweep", parents=[common], help="run the configured sweep")
    sub.add_parser("wigner", parents=[common], help="emit a Wigner grid")
    sub.add_parser("spectrum", parents=[common], help="emit a noise spectrum")
    fig = sub.add_parser("figure", parents=[common], help="emit a canned dataset")
    fig.add_argument("tag", help=f"one of: {', '.join(FIGURE_TAGS)}")
    return parser


def _load_config(args) -> dict[str, str]:
    cfg = _config.read_config(args.config) if args.config else {}
    cfg = _config.apply_overrides(cfg, args.overrides)
    return cfg


def _effective_from(cfg) -> EffectiveParams:
    base = _config.build_base(cfg)
    return effective_params(base) if not isinstance(base, EffectiveParams) else base


def _pick_branch(cfg, eff):
    policy = cfg.get("branch_policy", "follow-stable")
    selected = select_branch(classify_and_solve(eff), policy)
    if not selected:
        raise ValidationError(f"no branch matches policy {policy!r} at this point")
    return selected[0]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        from .sweep import _write_text
        _write_text(out, text)


def _cmd_steady(args) -> int:
    cfg = _load_config(args)
    eff = _effective_from(cfg)
    points = classify_and_solve(eff)
    rows = []
    for bp in points:
        row = {"branch": bp.branch, "stable": bool(bp.stable), "z": bp.z,
               "n_cav": bp.n_cav, "beta_re": bp.beta.real, "beta_im": bp.beta.imag}
        if bp.stable:
            row["E_N"] = log_negativity(steady_covariance(bp, eff).V).E_N
        rows.append(row)
    cols = ["branch", "stable", "z", "n_cav", "beta_re", "beta_im", "E_N"]
    if args.format == "json":
        _emit(json.dumps(rows, sort_keys=True, indent=1) + "\n", args.out)
    elif args.out:
        _write_csv(args.out, cols, rows)
    else:
        from .sweep import _cell
        lines = [",".join(cols)]
        lines += [",".join(_cell(row.get(c)) for c in cols) for row in rows]
        _emit("\n".join(lines) + "\n", None)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    base = _config.build_base(cfg)
    out = args.out or ("sweep." + args.format)
    spec = _config.build_sweep_spec(cfg, out, args.format)
    result = run_sweep(spec, base, workers=max(1, args.workers))
    sys.stdout.write(f"wrote {len(result.rows)} rows to {result.files[0]}"
                     f" (+{len(result.files) - 1} sidecar files)\n")
    return 0


def _cmd_wigner(args) -> int:
    cfg = _load_config(args)
    eff = _effective_from(cfg)
    bp = _pick_branch(cfg, eff)
    if not bp.stable:
        raise NumericalError(f"branch {bp.branch} is unstable; no stationary state")
    cov = steady_covariance(bp, eff)
    n_points = int(float(cfg.get("n_points", "201")))
    half_width = cfg.get("half_width")
    grid = wigner_grid(cov.V_M,
                       half_widths=(float(half_width),) * 2 if half_width else None,
                       n_points=n_points)
    if cfg.get("view", "fluctuation") == "lab":
        grid = wigner_lab_view(grid, bp.beta)
    stem = os.path.splitext(args.out or "wigner.csv")[0]
    files = write_wigner(stem, grid)
    sys.stdout.write(f"wrote {files[0]} and {files[1]}\n")
    return 0


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    eff = _effective_from(cfg)
    bp = _pick_branch(cfg, eff)
    if not bp.stable:
        raise NumericalError(f"branch {bp.branch} is unstable; no stationary spectrum")
    theta = float(cfg.get("theta", "0"))
    A = build_drift(bp, eff)
    scan = mechanical_variance_spectral(A, noise_matrix(eff), theta)
    lyap = quadrature_variance(steady_covariance(bp, eff).V_M, theta)
    stem = os.path.splitext(args.out or "spectrum.csv")[0]
    files = write_spectrum(stem, scan, lyap)
    gap = (scan.integrated_variance - lyap) / lyap
    sys.stdout.write(f"wrote {files[0]} and {files[1]} "
                     f"(integrated={_f17(scan.integrated_variance)}, "
                     f"lyapunov={_f17(lyap)}, gap={gap:.2e})\n")
    return 0


def _cmd_figure(args) -> int:
    cfg = _load_config(args)
    overrides = {}
    for key in ("delta", "Omega_M", "G0", "kappa", "gamma_m", "n_m"):
        if key in cfg:
            overrides[key] = float(cfg[key])
    if "F" in cfg:
        overrides["F"] = complex(cfg["F"])
    files = reproduce_figure(args.tag, out_dir=args.out or ".",
                             workers=max(1, args.workers), **overrides)
    sys.stdout.write("\n".join(files) + "\n")
    return 0


_COMMANDS = {"steady": _cmd_steady, "sweep": _cmd_sweep, "wigner": _cmd_wigner,
             "spectrum": _cmd_spectrum, "figure": _cmd_figure}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"dcesim: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"dcesim: numerical failure: {exc}", file=sys.stderr)
        return 3
    except DceSimError as exc:
        print(f"dcesim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
