"""Run configuration: TOML files, shipped presets, validation, echo.

A config file fully determines a run.  Every defaulted value is materialized
into the loaded config, so the echo embedded in run outputs is itself a valid
config file reproducing the run with no other inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .diagnostics import DiagnosticThresholds
from .hybrid import HybridModel, HybridState
from .integrate import IntegratorConfig, IntegratorScheme
from .phase_space import state_to_coords

OUTPUT_DIR_ENV = "HYBRIDQC_OUTPUT_DIR"

MODEL_PARAMETERS = ("omega", "mu", "beta", "m", "k", "c1", "c2", "hbar")


class ConfigError(ValueError):
    """Invalid or unparseable run configuration; message names the key."""


@dataclass(frozen=True)
class InitialStateSpec:
    """How the starting hybrid state is produced.

    kind "default" is the recorded repo default: equal superposition
    (1,1,1,1)/2, q=1, p=0.  kind "explicit" takes unit-norm amplitudes and
    scales them by sqrt(2*hbar).  kind "random" draws a normalized quantum
    state from a seeded generator, so reruns are reproducible.
    """

    kind: str = "default"
    amplitudes: np.ndarray | None = None
    seed: int | None = None
    q: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("default", "explicit", "random"):
            raise ConfigError(
                f"initial_state.kind must be default, explicit or random"
                f" (got {self.kind!r})"
            )
        if self.kind == "explicit":
            if self.amplitudes is None:
                raise ConfigError(
                    "initial_state.amplitudes_re/amplitudes_im required for"
                    " kind = explicit"
                )
            amps = np.asarray(self.amplitudes, dtype=complex)
            if amps.shape != (4,):
                raise ConfigError(
                    "initial_state amplitudes must have 4 components"
                )
            norm = float(np.sum(np.abs(amps) ** 2))
            if abs(norm - 1.0) > 1e-9:
                raise ConfigError(
                    f"initial_state amplitudes must normalize to 1 within"
                    f" 1e-9 (got sum |psi|^2 = {norm!r})"
                )
            object.__setattr__(self, "amplitudes", amps)
        if self.kind == "random" and self.seed is None:
            raise ConfigError("initial_state.seed required for kind = random")
        if self.seed is not None and self.seed < 0:
            raise ConfigError("initial_state.seed must be non-negative")
        for name in ("q", "p"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"initial_state.{name} must be finite")

    def resolve(self, model: HybridModel) -> HybridState:
        if self.kind == "default":
            psi = np.full(4, 0.5, dtype=complex)
        elif self.kind == "explicit":
            psi = self.amplitudes
        else:
            rng = np.random.default_rng(self.seed)
            raw = rng.normal(size=4) + 1j * rng.normal(size=4)
            psi = raw / np.sqrt(np.sum(np.abs(raw) ** 2))
        point = state_to_coords(psi, model.hbar)
        return HybridState(point, q=self.q, p=self.p)


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Which diagnostics a run computes, and with what knobs."""

    enabled: bool = True
    lyapunov: bool = True
    lyapunov_d0: float = 1e-8
    lyapunov_renorm_interval: float = 1.0
    lyapunov_n_renorms: int = 2000
    thresholds: DiagnosticThresholds = field(default_factory=DiagnosticThresholds)

    def __post_init__(self):
        if self.lyapunov_d0 <= 0:
            raise ConfigError("diagnostics.lyapunov_d0 must be positive")
        if self.lyapunov_renorm_interval <= 0:
            raise ConfigError(
                "diagnostics.lyapunov_renorm_interval must be positive"
            )
        if self.lyapunov_n_renorms < 100:
            raise ConfigError(
                "diagnostics.lyapunov_n_renorms must be at least 100"
            )


@dataclass(frozen=True)
class RunConfig:
    """Everything a single run needs; see module docstring for guarantees."""

    model: HybridModel
    initial_state: InitialStateSpec = field(default_factory=InitialStateSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    horizon: float = 2000.0
    sample_stride: int = 10
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    label: str = "run"
    output_dir: str = "runs"
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError("run.horizon must be positive")
        if self.integrator.dt <= 0:
            raise ConfigError("integrator.dt must be positive")
        if self.sample_stride < 1:
            raise ConfigError("run.sample_stride must be at least 1")
        if not self.label or "/" in self.label or self.label in (".", ".."):
            raise ConfigError(f"run.label must be a plain name (got {self.label!r})")

    def resolved_output_dir(self) -> Path:
        override = os.environ.get(OUTPUT_DIR_ENV)
        return Path(override) if override else Path(self.output_dir)

    def initial_hybrid_state(self) -> HybridState:
        return self.initial_state.resolve(self.model)

    def echo(self) -> dict:
        """Nested mapping equivalent to a config file reproducing this run."""
        model: dict[str, Any] = {"kind": self.model.kind.value}
        for name in MODEL_PARAMETERS:
            model[name] = float(getattr(self.model, name))
        init: dict[str, Any] = {
            "kind": self.initial_state.kind,
            "q": self.initial_state.q,
            "p": self.initial_state.p,
        }
        if self.initial_state.kind == "explicit":
            amps = self.initial_state.amplitudes
            init["amplitudes_re"] = [float(v) for v in amps.real]
            init["amplitudes_im"] = [float(v) for v in amps.imag]
        if self.initial_state.kind == "random":
            init["seed"] = int(self.initial_state.seed)
        thr = self.diagnostics.thresholds
        data = {
            "model": model,
            "initial_state": init,
            "integrator": {
                "scheme": self.integrator.scheme.value,
                "dt": self.integrator.dt,
                "fixed_point_tol": self.integrator.fixed_point_tol,
                "fixed_point_max_iters": self.integrator.fixed_point_max_iters,
            },
            "run": {
                "label": self.label,
                "horizon": self.horizon,
                "sample_stride": self.sample_stride,
            },
            "diagnostics": {
                "enabled": self.diagnostics.enabled,
                "lyapunov": self.diagnostics.lyapunov,
                "lyapunov_d0": self.diagnostics.lyapunov_d0,
                "lyapunov_renorm_interval": self.diagnostics.lyapunov_renorm_interval,
                "lyapunov_n_renorms": self.diagnostics.lyapunov_n_renorms,
                "thresholds": {
                    "lyapunov_regular_max": thr.lyapunov_regular_max,
                    "lyapunov_chaotic_min": thr.lyapunov_chaotic_min,
                    "peak_fraction_regular_min": thr.peak_fraction_regular_min,
                    "flatness_chaos_factor": thr.flatness_chaos_factor,
                },
            },
            "output": {"directory": self.output_dir},
        }
        return data


def _require_mapping(value: Any, key: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{key} must be a table")
    return value


def _take(table: dict, key: str, kinds, context: str, default):
    """Pop a typed scalar; bool is not accepted where a number is wanted."""
    if key not in table:
        return default
    value = table.pop(key)
    if isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ConfigError(f"{context}.{key} has wrong type (boolean)")
    if not isinstance(value, kinds):
        raise ConfigError(
            f"{context}.{key} has wrong type ({type(value).__name__})"
        )
    return value


def _reject_unknown(table: dict, context: str) -> None:
    if table:
        name = sorted(table)[0]
        raise ConfigError(f"unknown key {context}.{name}")


def _float_list(table: dict, key: str, context: str):
    if key not in table:
        return None
    value = table.pop(key)
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{context}.{key} must be a list of reals")
    return [float(v) for v in value]


def config_from_mapping(data: Mapping, source: str = "<config>") -> RunConfig:
    """Build and validate a RunConfig from parsed TOML data.

    Missing optional tables and keys fall back to recorded defaults; the
    beta default under NonSymmetric1 additionally produces a warning entry,
    since that model actually uses the value.
    """
    root = dict(_require_mapping(data, source))
    warnings: list[str] = []

    model_tbl = dict(_require_mapping(root.pop("model", {}), "model"))
    kind = _take(model_tbl, "kind", str, "model", "symmetric")
    params = {}
    for name in MODEL_PARAMETERS:
        value = _take(model_tbl, name, (int, float), "model", None)
        if value is not None:
            params[name] = float(value)
    _reject_unknown(model_tbl, "model")
    if kind in ("nonsymmetric1", "ns1") and "beta" not in params:
        warnings.append(
            "model.beta not set; defaulted to 1.0 (the nonsymmetric1 model"
            " uses beta directly)"
        )
    try:
        model = HybridModel(kind=kind, **params)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    init_tbl = dict(_require_mapping(root.pop("initial_state", {}), "initial_state"))
    init_kind = _take(init_tbl, "kind", str, "initial_state", "default")
    re_part = _float_list(init_tbl, "amplitudes_re", "initial_state")
    im_part = _float_list(init_tbl, "amplitudes_im", "initial_state")
    amps = None
    if re_part is not None or im_part is not None:
        if re_part is None or im_part is None:
            raise ConfigError(
                "initial_state needs both amplitudes_re and amplitudes_im"
            )
        if len(re_part) != 4 or len(im_part) != 4:
            raise ConfigError(
                "initial_state amplitudes must have 4 components"
            )
        amps = np.array(re_part) + 1j * np.array(im_part)
    seed = _take(init_tbl, "seed", int, "initial_state", None)
    q0 = float(_take(init_tbl, "q", (int, float), "initial_state", 1.0))
    p0 = float(_take(init_tbl, "p", (int, float), "initial_state", 0.0))
    _reject_unknown(init_tbl, "initial_state")
    initial = InitialStateSpec(kind=init_kind, amplitudes=amps, seed=seed, q=q0, p=p0)

    integ_tbl = dict(_require_mapping(root.pop("integrator", {}), "integrator"))
    scheme_name = _take(integ_tbl, "scheme", str, "integrator", "implicit_midpoint")
    try:
        scheme = IntegratorScheme.parse(scheme_name)
    except ValueError as exc:
        raise ConfigError(f"integrator.scheme: {exc}") from exc
    dt = float(_take(integ_tbl, "dt", (int, float), "integrator", 0.01))
    tol = float(
        _take(integ_tbl, "fixed_point_tol", (int, float), "integrator", 1e-13)
    )
    iters = _take(integ_tbl, "fixed_point_max_iters", int, "integrator", 2000)
    _reject_unknown(integ_tbl, "integrator")
    try:
        integrator = IntegratorConfig(
            scheme=scheme, dt=dt, fixed_point_tol=tol, fixed_point_max_iters=iters
        )
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}") from exc

    run_tbl = dict(_require_mapping(root.pop("run", {}), "run"))
    label = _take(run_tbl, "label", str, "run", "run")
    horizon = float(_take(run_tbl, "horizon", (int, float), "run", 2000.0))
    stride = _take(run_tbl, "sample_stride", int, "run", 10)
    _reject_unknown(run_tbl, "run")

    diag_tbl = dict(_require_mapping(root.pop("diagnostics", {}), "diagnostics"))
    thr_tbl = dict(
        _require_mapping(diag_tbl.pop("thresholds", {}), "diagnostics.thresholds")
    )
    thresholds = DiagnosticThresholds(
        lyapunov_regular_max=float(
            _take(thr_tbl, "lyapunov_regular_max", (int, float),
                  "diagnostics.thresholds", 1e-3)
        ),
        lyapunov_chaotic_min=float(
            _take(thr_tbl, "lyapunov_chaotic_min", (int, float),
                  "diagnostics.thresholds", 5e-3)
        ),
        peak_fraction_regular_min=float(
            _take(thr_tbl, "peak_fraction_regular_min", (int, float),
                  "diagnostics.thresholds", 0.8)
        ),
        flatness_chaos_factor=float(
            _take(thr_tbl, "flatness_chaos_factor", (int, float),
                  "diagnostics.thresholds", 10.0)
        ),
    )
    _reject_unknown(thr_tbl, "diagnostics.thresholds")
    diagnostics = DiagnosticsConfig(
        enabled=_take(diag_tbl, "enabled", bool, "diagnostics", True),
        lyapunov=_take(diag_tbl, "lyapunov", bool, "diagnostics", True),
        lyapunov_d0=float(
            _take(diag_tbl, "lyapunov_d0", (int, float), "diagnostics", 1e-8)
        ),
        lyapunov_renorm_interval=float(
            _take(diag_tbl, "lyapunov_renorm_interval", (int, float),
                  "diagnostics", 1.0)
        ),
        lyapunov_n_renorms=_take(
            diag_tbl, "lyapunov_n_renorms", int, "diagnostics", 2000
        ),
        thresholds=thresholds,
    )
    _reject_unknown(diag_tbl, "diagnostics")

    out_tbl = dict(_require_mapping(root.pop("output", {}), "output"))
    out_dir = _take(out_tbl, "directory", str, "output", "runs")
    _reject_unknown(out_tbl, "output")

    # summary.toml files embed the config echo plus a [summary] table of
    # results; dropping that table here lets them be rerun directly
    root.pop("summary", None)
    _reject_unknown(root, source)

    return RunConfig(
        model=model,
        initial_state=initial,
        integrator=integrator,
        horizon=horizon,
        sample_stride=stride,
        diagnostics=diagnostics,
        label=label,
        output_dir=out_dir,
        warnings=tuple(warnings),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse failure in {path}: {exc}") from exc
    return config_from_mapping(data, source=str(path))


def preset_names() -> list[str]:
    """Names of the presets shipped inside the package, sorted."""
    names = []
    for entry in resources.files("hybridqc.presets").iterdir():
        if entry.name.endswith(".toml"):
            names.append(entry.name[: -len(".toml")])
    return sorted(names)


def load_preset(name: str) -> RunConfig:
    candidate = resources.files("hybridqc.presets") / f"{name}.toml"
    if not candidate.is_file():
        known = ", ".join(preset_names())
        raise ConfigError(f"unknown preset {name!r} (shipped presets: {known})")
    data = tomllib.loads(candidate.read_text(encoding="utf-8"))
    return config_from_mapping(data, source=f"preset {name}")


def load_config_or_preset(ref: str | Path) -> RunConfig:
    """CLI entry semantics: a path that exists wins, otherwise a preset name."""
    path = Path(ref)
    if path.suffix == ".toml" or path.exists():
        return load_config(path)
    return load_preset(str(ref))


def with_model_parameter(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    """A copy of cfg with one model parameter replaced (sweep support)."""
    if axis not in MODEL_PARAMETERS:
        raise ConfigError(
            f"sweep axis must be a model parameter"
            f" ({', '.join(MODEL_PARAMETERS)}); got {axis!r}"
        )
    try:
        model = replace(cfg.model, **{axis: float(value)})
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc
    return replace(cfg, model=model)


def _toml_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = repr(float(value))
        # a bare integer-looking literal would parse back as TOML integer
        if "." not in text and "e" not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__} to TOML")


def toml_dumps(data: Mapping) -> str:
    """Serialize a nested mapping deterministically as TOML.

    Key order follows the mapping order; floats round-trip via repr.  Only
    the shapes the run artifacts need (scalars, flat lists, nested tables).
    """
    lines: list[str] = []

    def emit(table: Mapping, prefix: str) -> None:
        subtables = []
        for key, value in table.items():
            if isinstance(value, Mapping):
                subtables.append((key, value))
            else:
                lines.append(f"{key} = {_toml_scalar(value)}")
        for key, value in subtables:
            name = f"{prefix}{key}"
            lines.append("")
            lines.append(f"[{name}]")
            emit(value, name + ".")

    emit(data, "")
    if lines and lines[0] == "":
        lines.pop(0)
    return "\n".join(lines) + "\n"
