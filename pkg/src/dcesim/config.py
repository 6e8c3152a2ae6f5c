"""Flat key=value configuration for the batch tools.

A config file is plain text: one ``key = value`` per line, ``#`` starts
a comment line, blank lines are ignored.  Later assignments win, and
``--set key=value`` overrides from the command line reuse the same
parser.  Keys fall in three groups:

* physical parameters, either the driven-cavity route
  (``omega_m, delta_s, E, g0, omega_d`` plus the shared keys) or the
  effective route (``delta, Omega_M, G0`` plus shared); the two routes
  must not be mixed in one config.  Shared keys: ``kappa, gamma_m,
  n_m, F``.
* sweep axes: ``axis1.name, axis1.start, axis1.stop, axis1.count,
  axis1.scale`` and the same under ``axis2.``.
* selection/output: ``branch_policy``, ``observables`` (comma list),
  ``theta``, ``n_points``, ``half_width``, ``view``.
"""

from __future__ import annotations

from .errors import UnknownParameter, ValidationError
from .model import EffectiveParams, SystemParams

SYSTEM_ONLY = ("omega_m", "delta_s", "E", "g0", "omega_d")
EFFECTIVE_ONLY = ("delta", "Omega_M", "G0")
SHARED = ("kappa", "gamma_m", "n_m", "F")

_AXIS_FIELDS = ("name", "start", "stop", "count", "scale")
_OTHER = ("branch_policy", "observables", "theta", "n_points", "half_width", "view")

_KNOWN = frozenset(
    SYSTEM_ONLY + EFFECTIVE_ONLY + SHARED + _OTHER
    + tuple(f"axis1.{f}" for f in _AXIS_FIELDS)
    + tuple(f"axis2.{f}" for f in _AXIS_FIELDS)
)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat key=value lines into a string dict."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def read_config(path: str) -> dict[str, str]:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def apply_overrides(cfg: dict[str, str], pairs: list[str]) -> dict[str, str]:
    """Apply ``key=value`` override strings on top of a config dict."""
    out = dict(cfg)
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(f"override {pair!r} is not of the form key=value")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def validate_keys(cfg: dict[str, str]) -> None:
    unknown = sorted(k for k in cfg if k not in _KNOWN)
    if unknown:
        raise UnknownParameter(f"unknown config key(s): {', '.join(unknown)}")


def _get_float(cfg, key, default=None):
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config key {key}: not a number: {cfg[key]!r}") from exc


def _get_complex(cfg, key, default=0j):
    if key not in cfg:
        return default
    try:
        return complex(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config key {key}: not a number: {cfg[key]!r}") from exc


def build_base(cfg: dict[str, str]) -> SystemParams | EffectiveParams:
    """Build the physical parameter set, picking the route from the keys."""
    validate_keys(cfg)
    has_system = any(k in cfg for k in SYSTEM_ONLY)
    has_effective = any(k in cfg for k in EFFECTIVE_ONLY)
    if has_system and has_effective:
        raise ValidationError(
            "config mixes driven-cavity keys (omega_m, delta_s, ...) with "
            "effective-route keys (delta, Omega_M, G0); pick one route")
    if not has_system and not has_effective:
        raise ValidationError(
            "config names no physical route: set omega_m/delta_s/... or delta/Omega_M/G0")

    kappa = _get_float(cfg, "kappa")
    if kappa is None:
        raise ValidationError("config key kappa is required")
    common = dict(kappa=kappa,
                  F=_get_complex(cfg, "F"),
                  gamma_m=_get_float(cfg, "gamma_m", 1.0),
                  n_m=_get_float(cfg, "n_m", 0.0))

    if has_system:
        for key in ("omega_m", "delta_s"):
            if key not in cfg:
                raise ValidationError(f"config key {key} is required on the driven-cavity route")
        return SystemParams(omega_m=_get_float(cfg, "omega_m"),
                            delta_s=_get_float(cfg, "delta_s"),
                            E=_get_float(cfg, "E", 0.0),
                            g0=_get_float(cfg, "g0", 0.0),
                            omega_d=_get_float(cfg, "omega_d", 0.0),
                            **common)

    for key in ("delta", "Omega_M", "G0"):
        if key not in cfg:
            raise ValidationError(f"config key {key} is required on the effective route")
    return EffectiveParams(delta=_get_float(cfg, "delta"),
                           Omega_M=_get_float(cfg, "Omega_M"),
                           G0=_get_float(cfg, "G0"),
                           **common)


def _build_axis(cfg: dict[str, str], prefix: str):
    from .sweep import SweepAxis
    present = [f for f in _AXIS_FIELDS if f"{prefix}.{f}" in cfg]
    if not present:
        return None
    for field in ("name", "start", "stop", "count"):
        if f"{prefix}.{field}" not in cfg:
            raise ValidationError(f"config key {prefix}.{field} is required for axis {prefix}")
    try:
        count = int(cfg[f"{prefix}.count"])
    except ValueError as exc:
        raise ValidationError(f"config key {prefix}.count: not an integer") from exc
    return SweepAxis(name=cfg[f"{prefix}.name"],
                     start=_get_float(cfg, f"{prefix}.start"),
                     stop=_get_float(cfg, f"{prefix}.stop"),
                     count=count,
                     scale=cfg.get(f"{prefix}.scale", "linear"))


def build_sweep_spec(cfg: dict[str, str], output: str, fmt: str):
    """Assemble a SweepSpec from config keys plus the output options."""
    from .sweep import OBSERVABLES, SweepSpec
    validate_keys(cfg)
    axis1 = _build_axis(cfg, "axis1")
    if axis1 is None:
        raise ValidationError("sweep needs axis1.name/start/stop/count in the config")
    axis2 = _build_axis(cfg, "axis2")
    if "observables" in cfg:
        raw = cfg["observables"].strip()
        observables = tuple(s.strip() for s in raw.split(",") if s.strip()) if raw else ()
    else:
        observables = ("z", "n_cav", "E_N")
    bad = [o for o in observables if o not in OBSERVABLES]
    if bad:
        raise ValidationError(
            f"unknown observable(s) {', '.join(bad)}; known: {', '.join(OBSERVABLES)}")
    return SweepSpec(axis1=axis1, axis2=axis2,
                     branch_policy=cfg.get("branch_policy", "all"),
                     observables=observables, output=output, fmt=fmt)
