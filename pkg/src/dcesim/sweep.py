"""Parameter sweeps, observable tables, and the canned figure datasets.

The batch layer walks a 1D or 2D grid over any physical parameter,
solves the steady-state branches at every point, filters them through a
branch policy, and writes one long-form row per (grid point, branch).
Scalar observables live in the main table; curve and grid observables
(quadrature scans, Wigner functions, noise spectra) go to sidecar files
named after the row index that references them.

Output is deterministic: floats are printed with 17 significant digits
and JSON keys are sorted, so identical inputs produce byte-identical
files.
"""

from __future__ import annotations

import dataclasses
import json
import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from .errors import (NumericalError, OutputUnwritable, UnknownFigureTag,
                     UnknownParameter, ValidationError)
from .linear_dynamics import (build_drift, drift_eigenvalues, noise_matrix,
                              steady_covariance)
from .measures import (log_negativity, quadrature_variance, scan_quadratures,
                       wigner_grid)
from .model import EffectiveParams, SystemParams, effective_params, squeeze_frame
from .spectra import integrated_mech_block, mechanical_variance_spectral
from .steady_state import classify_and_solve, select_branch

OBSERVABLES = ("z", "n_cav", "E_N", "S_theta_scan", "theta_min", "S_min",
               "wigner", "spectrum", "eigenvalues")

_SCALES = ("linear", "log")
_SYSTEM_FIELDS = frozenset(f.name for f in dataclasses.fields(SystemParams))
_EFFECTIVE_FIELDS = frozenset(f.name for f in dataclasses.fields(EffectiveParams))


@dataclass(frozen=True)
class SweepAxis:
    """One sweep dimension: a named parameter and its grid."""
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.count < 2:
            raise ValidationError(f"axis {self.name}: count must be >= 2, got {self.count}")
        if self.scale == "linear":
            return np.linspace(self.start, self.stop, self.count)
        if self.scale == "log":
            if self.start <= 0 or self.stop <= 0:
                raise ValidationError(f"axis {self.name}: log scale needs positive endpoints")
            return np.geomspace(self.start, self.stop, self.count)
        raise ValidationError(f"axis {self.name}: scale must be one of {_SCALES}")


@dataclass(frozen=True)
class SweepSpec:
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    branch_policy: str = "all"
    observables: tuple[str, ...] = ("z", "n_cav", "E_N")
    output: str = "sweep.csv"
    fmt: str = "csv"


@dataclass
class SweepResult:
    """Rows as written to the main table plus every file path emitted."""
    rows: list[dict]
    files: list[str]


# ---------------------------------------------------------------------------
# formatting and file helpers
# ---------------------------------------------------------------------------

def _f17(x) -> str:
    return format(float(x), ".17g")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return _f17(value)


def _write_text(path: str, text: str) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from exc


def _write_csv(path: str, columns: list[str], rows: list[dict],
               comments: tuple[str, ...] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(row.get(c)) for c in columns))
    _write_text(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _write_json(path: str, payload: dict) -> None:
    _write_text(path, json.dumps(payload, sort_keys=True, indent=1,
                                 default=_jsonable) + "\n")


def write_wigner(stem: str, grid) -> list[str]:
    """Emit a Wigner grid: long-form CSV (q, p, W) plus a JSON header."""
    csv_path, json_path = stem + ".csv", stem + ".json"
    lines = ["q,p,W"]
    for i, q in enumerate(grid.q_axis):
        qs = _f17(q)
        for j, p in enumerate(grid.p_axis):
            lines.append(f"{qs},{_f17(p)},{_f17(grid.values[i, j])}")
    _write_text(csv_path, "\n".join(lines) + "\n")
    _write_json(json_path, {
        "q_axis": [float(v) for v in grid.q_axis],
        "p_axis": [float(v) for v in grid.p_axis],
        "half_max_level": float(grid.half_max_level),
        "sql_radius": float(grid.sql_radius),
    })
    return [csv_path, json_path]


def write_spectrum(stem: str, scan, lyapunov_variance: float | None = None) -> list[str]:
    """Emit a noise spectrum: CSV (omega, s_theta) plus JSON metadata."""
    csv_path, json_path = stem + ".csv", stem + ".json"
    lines = ["omega,s_theta"]
    for w, s in zip(scan.omegas, scan.s_theta):
        lines.append(f"{_f17(w)},{_f17(s)}")
    _write_text(csv_path, "\n".join(lines) + "\n")
    meta = {"theta": float(scan.theta),
            "integrated_variance": None if scan.integrated_variance is None
            else float(scan.integrated_variance)}
    if lyapunov_variance is not None:
        meta["lyapunov_variance"] = float(lyapunov_variance)
        if scan.integrated_variance is not None and lyapunov_variance != 0:
            meta["relative_gap"] = (float(scan.integrated_variance)
                                    - float(lyapunov_variance)) / float(lyapunov_variance)
    _write_json(json_path, meta)
    return [csv_path, json_path]


def _write_scan(path: str, scan) -> None:
    lines = ["theta,s_theta"]
    for t, s in zip(scan.thetas, scan.variances):
        lines.append(f"{_f17(t)},{_f17(s)}")
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# grid evaluation
# ---------------------------------------------------------------------------

def _apply_value(base, name: str, value: float):
    if name == "F":
        return dataclasses.replace(base, F=complex(value))
    return dataclasses.replace(base, **{name: float(value)})


def _resolve_route(base, names: list[str]):
    """Decide whether the sweep runs on system or effective parameters.

    Returns ``(base, system_route)``; a system base is converted up
    front when every axis is an effective-frame quantity.
    """
    if isinstance(base, EffectiveParams):
        bad = [n for n in names if n not in _EFFECTIVE_FIELDS]
        if bad:
            raise UnknownParameter(
                f"axis parameter(s) {', '.join(bad)} not available on the effective route")
        return base, False
    if all(n in _SYSTEM_FIELDS for n in names):
        return base, True
    if all(n in _EFFECTIVE_FIELDS for n in names):
        return effective_params(base), False
    bad = [n for n in names if n not in _SYSTEM_FIELDS | _EFFECTIVE_FIELDS]
    if bad:
        raise UnknownParameter(f"unknown sweep parameter(s): {', '.join(bad)}")
    raise UnknownParameter(
        f"axes {names} mix driven-cavity and effective-frame parameters")


_SCALAR_OBS = ("z", "n_cav", "E_N", "theta_min", "S_min")


def _eval_point(task):
    """Worker body: one grid point -> list of result rows.

    Sidecar payloads (scan/wigner/spectrum objects) ride along in the
    row dicts and are replaced by file references during assembly.
    """
    point, axis_cells, policy, observables = task
    eff = effective_params(point) if isinstance(point, SystemParams) else point
    rows = []
    points = classify_and_solve(eff)
    selected = select_branch(points, policy)
    if not selected:
        row = dict(axis_cells)
        row["branch"] = "none"
        row["stable"] = False
        rows.append(row)
        return rows
    for bp in selected:
        row = dict(axis_cells)
        row["branch"] = bp.branch
        row["stable"] = bool(bp.stable)
        covariance = None
        scan = None
        if bp.stable and any(o in observables for o in
                             ("E_N", "S_theta_scan", "theta_min", "S_min",
                              "wigner", "spectrum")):
            covariance = steady_covariance(bp, eff)
        for obs in observables:
            if obs == "z":
                row["z"] = bp.z
            elif obs == "n_cav":
                row["n_cav"] = bp.n_cav
            elif obs == "eigenvalues":
                eig = drift_eigenvalues(build_drift(bp, eff))
                for k in range(4):
                    row[f"eig{k + 1}_re"] = eig[k].real
                    row[f"eig{k + 1}_im"] = eig[k].imag
            elif covariance is None:
                continue
            elif obs == "E_N":
                row["E_N"] = log_negativity(covariance.V).E_N
            elif obs in ("theta_min", "S_min", "S_theta_scan"):
                if scan is None:
                    scan = scan_quadratures(covariance.V_M)
                if obs == "theta_min":
                    row["theta_min"] = scan.theta_min
                elif obs == "S_min":
                    row["S_min"] = scan.S_min
                else:
                    row["_scan_payload"] = scan
            elif obs == "wigner":
                row["_wigner_payload"] = wigner_grid(covariance.V_M)
            elif obs == "spectrum":
                A = build_drift(bp, eff)
                spec_scan = mechanical_variance_spectral(A, noise_matrix(eff), 0.0)
                row["_spectrum_payload"] = (spec_scan,
                                            quadrature_variance(covariance.V_M, 0.0))
        rows.append(row)
    return rows


def _columns_for(spec: SweepSpec) -> list[str]:
    cols = [spec.axis1.name]
    if spec.axis2 is not None:
        cols.append(spec.axis2.name)
    cols += ["branch", "stable"]
    for obs in spec.observables:
        if obs == "eigenvalues":
            cols += [f"eig{k + 1}_{p}" for k in range(4) for p in ("re", "im")]
        elif obs == "S_theta_scan":
            cols.append("scan_file")
        elif obs == "wigner":
            cols.append("wigner_file")
        elif obs == "spectrum":
            cols.append("spectrum_file")
        elif obs not in cols:
            cols.append(obs)
    return cols


def _attach_sidecars(rows: list[dict], stem: str) -> list[str]:
    """Replace payload objects with row-indexed sidecar file references."""
    files: list[str] = []
    for idx, row in enumerate(rows):
        tag = f"{stem}_row{idx:05d}"
        scan = row.pop("_scan_payload", None)
        if scan is not None:
            path = f"{tag}_scan.csv"
            _write_scan(path, scan)
            row["scan_file"] = os.path.basename(path)
            files.append(path)
        grid = row.pop("_wigner_payload", None)
        if grid is not None:
            paths = write_wigner(f"{tag}_wigner", grid)
            row["wigner_file"] = os.path.basename(paths[0])
            files += paths
        spec_payload = row.pop("_spectrum_payload", None)
        if spec_payload is not None:
            scan, lyap = spec_payload
            paths = write_spectrum(f"{tag}_spectrum", scan, lyap)
            row["spectrum_file"] = os.path.basename(paths[0])
            files += paths
    return files


def run_sweep(spec: SweepSpec, base, workers: int = 1) -> SweepResult:
    """Evaluate a sweep and write the main table plus sidecars.

    Grid points are independent; with ``workers > 1`` they are
    dispatched to a process pool and reassembled in grid order (axis1
    outer, axis2 inner), so the output does not depend on scheduling.
    """
    if spec.fmt not in ("csv", "json"):
        raise ValidationError(f"unknown output format {spec.fmt!r}")
    if spec.branch_policy not in ("all", "upper", "lower", "follow-stable"):
        raise ValidationError(f"unknown branch policy {spec.branch_policy!r}")
    bad = [o for o in spec.observables if o not in OBSERVABLES]
    if bad:
        raise ValidationError(f"unknown observable(s): {', '.join(bad)}")

    names = [spec.axis1.name] + ([spec.axis2.name] if spec.axis2 else [])
    base, _ = _resolve_route(base, names)
    v1 = spec.axis1.values()
    v2 = spec.axis2.values() if spec.axis2 is not None else None

    tasks = []
    for x1 in v1:
        p1 = _apply_value(base, spec.axis1.name, x1)
        if v2 is None:
            tasks.append((p1, {spec.axis1.name: float(x1)},
                          spec.branch_policy, spec.observables))
        else:
            for x2 in v2:
                p2 = _apply_value(p1, spec.axis2.name, x2)
                tasks.append((p2, {spec.axis1.name: float(x1),
                                   spec.axis2.name: float(x2)},
                              spec.branch_policy, spec.observables))

    if not spec.observables:
        # nothing to report per row; the file carries just the header
        per_point = []
    elif workers > 1:
        with multiprocessing.Pool(workers) as pool:
            per_point = pool.map(_eval_point, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
    else:
        per_point = [_eval_point(t) for t in tasks]

    rows = [row for chunk in per_point for row in chunk]
    stem, ext = os.path.splitext(spec.output)
    if not ext:
        ext = "." + spec.fmt
    files = _attach_sidecars(rows, stem)

    columns = _columns_for(spec)
    main_path = stem + ext
    if spec.fmt == "csv":
        _write_csv(main_path, columns, rows)
    else:
        payload = {
            "axes": {spec.axis1.name: [float(v) for v in v1]},
            "branch_policy": spec.branch_policy,
            "observables": list(spec.observables),
            "rows": [{c: row.get(c) for c in columns if row.get(c) is not None
                      or c in ("stable",)} for row in rows],
        }
        if v2 is not None:
            payload["axes"][spec.axis2.name] = [float(v) for v in v2]
        _write_json(main_path, payload)
    files.insert(0, main_path)
    return SweepResult(rows=rows, files=files)


# ---------------------------------------------------------------------------
# canned figure datasets
# ---------------------------------------------------------------------------

FIGURE_TAGS = ("fig2a", "fig2b", "fig3a", "fig3b", "fig3c",
               "fig4a", "fig4b", "fig4c", "fig4d", "fig4e", "fig4f", "figA1")

# reference operating point: red-detuned frame, two-photon drive at
# 0.87 omega_m, single-photon coupling 115; the frame maps these to
# G0 ~ 101.46 at delta = Omega_M / 2
_OMEGA_M = 1e4


def _frame_G0(e_frac: float) -> float:
    frame = squeeze_frame(SystemParams(kappa=500.0, omega_m=_OMEGA_M,
                                       delta_s=_OMEGA_M, E=e_frac * _OMEGA_M,
                                       g0=115.0))
    return frame.G0


def figure_base(**overrides) -> EffectiveParams:
    """Default operating point behind the canned figures."""
    base = EffectiveParams(delta=5e3, Omega_M=_OMEGA_M, G0=_frame_G0(0.87),
                           kappa=500.0, F=2e5 + 0j, gamma_m=1.0, n_m=0.0)
    if overrides:
        bad = [k for k in overrides if k not in _EFFECTIVE_FIELDS]
        if bad:
            raise UnknownParameter(f"unknown base override(s): {', '.join(bad)}")
        base = dataclasses.replace(base, **overrides)
    return base


def _fig2a(out_dir, base, workers):
    drives = np.linspace(1e4, 6e5, 60)
    rows = []
    for F in drives:
        eff = dataclasses.replace(base, F=complex(F))
        row = {"F": float(F)}
        for bp in classify_and_solve(eff):
            row[f"z_{bp.branch}"] = bp.z
            row[f"stable_{bp.branch}"] = bool(bp.stable)
        rows.append(row)
    path = os.path.join(out_dir, "fig2a.csv")
    _write_csv(path, ["F", "z_lower", "z_middle", "z_upper",
                      "stable_lower", "stable_middle", "stable_upper"], rows,
               comments=("population branches vs drive amplitude (wide form)",))
    return [path]


def _fig2b(out_dir, base, workers):
    files = []
    # one drive sweep per two-photon pump setting, both branches
    for e_frac in (0.43, 0.87, 0.95):
        g0_eff = _frame_G0(e_frac)
        spec = SweepSpec(axis1=SweepAxis("F", 6e4, 4.8e5, 43),
                         branch_policy="all", observables=("z", "E_N"),
                         output=os.path.join(out_dir, f"fig2b_F_E{int(round(e_frac * 100)):03d}.csv"))
        res = run_sweep(spec, dataclasses.replace(base, G0=g0_eff), workers=workers)
        files += res.files
    # companion sweep over the pump itself at fixed drive
    rows = []
    for e_frac in np.linspace(0.05, 0.95, 46):
        eff = dataclasses.replace(base, G0=_frame_G0(float(e_frac)))
        for bp in select_branch(classify_and_solve(eff), "all"):
            row = {"E_frac": float(e_frac), "G0": eff.G0, "branch": bp.branch,
                   "stable": bool(bp.stable), "z": bp.z}
            if bp.stable:
                row["E_N"] = log_negativity(steady_covariance(bp, eff).V).E_N
            rows.append(row)
    path = os.path.join(out_dir, "fig2b_E.csv")
    _write_csv(path, ["E_frac", "G0", "branch", "stable", "z", "E_N"], rows,
               comments=("pump sweep at F = 2e5; detuning and mechanical "
                         "frequency held at the reference point while the "
                         "pump only rescales G0",))
    files.append(path)
    return files


def _fig3(tag, out_dir, base, workers):
    axes = {
        "fig3a": (SweepAxis("F", 6e4, 4.5e5, 41), SweepAxis("G0", 25.0, 175.0, 41)),
        "fig3b": (SweepAxis("delta", 1e3, 1e4, 41), SweepAxis("kappa", 100.0, 1500.0, 41)),
        "fig3c": (SweepAxis("Omega_M", 6e3, 1.6e4, 41), SweepAxis("n_m", 0.0, 20.0, 41)),
    }[tag]
    spec = SweepSpec(axis1=axes[0], axis2=axes[1], branch_policy="follow-stable",
                     observables=("z", "E_N"),
                     output=os.path.join(out_dir, f"{tag}.csv"))
    return run_sweep(spec, base, workers=workers).files


_FIG4_PANELS = {
    "fig4a": ("F", (6e4, 1e5, 2e5, 4e5)),
    "fig4b": ("G0", (20.0, 40.0, 80.0, 150.0)),
    "fig4c": ("delta", (2500.0, 6000.0, 8000.0, 1e4)),
    "fig4d": ("kappa", (50.0, 500.0, 1000.0, 1500.0)),
    "fig4e": ("Omega_M", (2e3, 3e3, 4e3, 1.2e4)),
    "fig4f": ("n_m", (25.0, 50.0, 75.0, 100.0)),
}


def _fig4(tag, out_dir, base, workers):
    name, values = _FIG4_PANELS[tag]
    rows = []
    for value in values:
        eff = _apply_value(base, name, value)
        cells = {name: float(value)}
        chunk = _eval_point((eff, cells, "follow-stable",
                             ("z", "n_cav", "theta_min", "S_min",
                              "S_theta_scan", "wigner")))
        rows += chunk
    stem = os.path.join(out_dir, tag)
    files = _attach_sidecars(rows, stem)
    columns = [name, "branch", "stable", "z", "n_cav", "theta_min", "S_min",
               "scan_file", "wigner_file"]
    path = stem + ".csv"
    _write_csv(path, columns, rows,
               comments=("quadrature scans and Wigner grids on the followed "
                         "stable branch",))
    return [path] + files


def _figA1(out_dir, base, workers):
    files = []
    thetas = np.linspace(0.0, math.pi, 49)
    for axis_name, values, fname in (
            ("F", (6e4, 1e5, 2e5, 4e5), "figA1_F.csv"),
            ("G0", (20.0, 40.0, 80.0, 150.0), "figA1_G0.csv")):
        rows = []
        for value in values:
            eff = _apply_value(base, axis_name, value)
            selected = select_branch(classify_and_solve(eff), "follow-stable")
            bp = selected[0]
            if not bp.stable:
                rows.append({axis_name: float(value), "branch": bp.branch,
                             "stable": False})
                continue
            V_M = steady_covariance(bp, eff).V_M
            A = build_drift(bp, eff)
            block = integrated_mech_block(A, noise_matrix(eff))
            for th in thetas:
                rows.append({
                    axis_name: float(value), "branch": bp.branch, "stable": True,
                    "theta": float(th),
                    "S_analytic": quadrature_variance(V_M, float(th)),
                    "S_numeric": quadrature_variance(block, float(th)),
                })
        path = os.path.join(out_dir, fname)
        _write_csv(path, [axis_name, "branch", "stable", "theta",
                          "S_analytic", "S_numeric"], rows,
                   comments=("stationary variance: Lyapunov route vs "
                             "integrated noise spectrum",))
        files.append(path)
    return files


def reproduce_figure(tag: str, out_dir: str = ".", workers: int = 1,
                     **base_overrides) -> list[str]:
    """Emit the dataset behind one canned figure.  Returns file paths."""
    if tag not in FIGURE_TAGS:
        raise UnknownFigureTag(f"unknown figure tag {tag!r}; known: {', '.join(FIGURE_TAGS)}")
    base = figure_base(**base_overrides)
    os.makedirs(out_dir, exist_ok=True)
    if tag == "fig2a":
        return _fig2a(out_dir, base, workers)
    if tag == "fig2b":
        return _fig2b(out_dir, base, workers)
    if tag.startswith("fig3"):
        return _fig3(tag, out_dir, base, workers)
    if tag.startswith("fig4"):
        return _fig4(tag, out_dir, base, workers)
    return _figA1(out_dir, base, workers)
