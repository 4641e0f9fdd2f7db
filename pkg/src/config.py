"""Run configuration: JSON parsing, validation and the model registry.

A run configuration is a single JSON object, for example::

    {
      "model": "swanson",
      "theta": 0.3,
      "dim": 80,
      "suites": ["biorthogonality", "gram"],
      "tolerances": {"biorthogonality": 1e-9},
      "output": {"path": "reports/swanson.json", "format": "json"}
    }

Model parameters sit at the top level next to the common keys. Complex
parameters may be given as a number, an ``[re, im]`` pair or a string such as
``"0.8j"``. Unknown keys are rejected.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from src.errors import ConfigError, DomainError
from src.systems import (
    NOGO_VARIANTS,
    DHOParams,
    ExtOscParams,
    GLLParams,
    ModelParams,
    NogoParams,
    PhiSpec,
    Rep,
    RhoSpec,
    RieszParams,
    ShiftedParams,
    SusyParams,
    SwansonParams,
)

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent
THREADS_VAR = "PBLAB_THREADS"
LOG_DIR_VAR = "PBLAB_LOG_DIR"
DEFAULT_SEED = 0xB105EB

SUITES = ("biorthogonality", "coherent", "dho", "gram", "intertwine", "metric", "nogo", "resolution")
COMMON_KEYS = {"model", "dim", "nmax", "suites", "tolerances", "output", "seed", "timings"}
OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold used by the suites."""

    moment_cap: int = 200
    pn_cap: int = 60
    coeff_cap: float = 1e150
    integral_rtol: float = 1e-9
    tail_cap: float = 1e-10
    bounded_ratio: float = 1.2
    unbounded_ratio: float = 2.0
    min_eig_floor: float = 1e-6
    completeness_decrease: float = 0.10
    resolution: float = 1e-4
    biorthogonality: float = 1e-8
    residual: float = 1e-8
    metric_roundtrip: float = 1e-6
    intertwine: float = 1e-6
    non_resolution: float = 0.01
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f"Tolerance '{f.name}' must be a positive number, got {value!r}", field=f.name)


@dataclass(frozen=True)
class ModelEntry:
    name: str
    params: dict[str, tuple[str, Any]]
    suites: tuple[str, ...]
    description: str


_SYSTEM_SUITES = ("biorthogonality", "coherent", "gram", "intertwine", "metric", "resolution")

MODELS: dict[str, ModelEntry] = {
    "shifted": ModelEntry(
        "shifted",
        {"alpha": ("complex", None), "beta": ("complex", None)},
        _SYSTEM_SUITES,
        "A = a - alpha, B = a^dagger - beta on truncated Fock space",
    ),
    "extended": ModelEntry(
        "extended",
        {"beta": ("float", None)},
        _SYSTEM_SUITES,
        "Extended quantum harmonic oscillator H = beta(BA + gamma_beta)",
    ),
    "swanson": ModelEntry(
        "swanson",
        {"theta": ("float", None), "rep": ("str", "fock")},
        _SYSTEM_SUITES,
        "Swanson Hamiltonian, Fock (rep=fock) or coordinate (rep=coord1d) representation",
    ),
    "susy": ModelEntry(
        "susy",
        {"example": ("int", 1), "alpha": ("complex", None), "beta": ("complex", 0.0), "phi": ("phi", None)},
        ("biorthogonality", "coherent", "gram", "metric", "resolution"),
        "Superpotential pair with W_a + W_b = 2x + alpha; example 2 adds a bounded phi",
    ),
    "riesz_mult": ModelEntry(
        "riesz_mult",
        {"rho": ("rho", None)},
        ("biorthogonality", "gram", "metric", "resolution"),
        "Hermite functions multiplied by a bounded, boundedly invertible rho",
    ),
    "gll": ModelEntry(
        "gll",
        {"k1": ("float", None), "k2": ("float", None), "lmax": ("int", 4)},
        ("biorthogonality", "gram", "metric"),
        "Generalized Landau levels, two commuting pseudo-bosonic pairs in 2D",
    ),
    "dho": ModelEntry(
        "dho",
        {
            "m": ("float", None),
            "k": ("float", None),
            "gamma": ("float", None),
            "Gamma": ("complex", None),
            "delta": ("complex", None),
            "samples": ("int", 100),
        },
        ("dho",),
        "Damped harmonic oscillator feasibility of the pseudo-bosonic vacuum",
    ),
    "nogo": ModelEntry(
        "nogo",
        {
            "alpha": ("complex", None),
            "n": ("int", 2),
            "variant": ("str", NOGO_VARIANTS[0]),
            "beta": ("complex", 0.0),
            "kmax": ("int", 120),
        },
        ("nogo",),
        "Deformed lowering operator a - alpha (a^dagger)^n with no admissible vacuum",
    ),
}


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: ModelParams
    dim: int
    nmax: int | None
    suites: tuple[str, ...]
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_path: Path | None = None
    output_format: str = "json"
    seed: int = DEFAULT_SEED
    timings: bool = False
    options: dict[str, Any] = field(default_factory=dict)

    def echo(self) -> dict[str, Any]:
        """Normalized configuration, as written into reports."""
        return {
            "model": self.model,
            "params": _params_echo(self.params),
            "dim": self.dim,
            "nmax": self.nmax,
            "suites": list(self.suites),
            "tolerances": asdict(self.tolerances),
            "output": {
                "path": str(self.output_path) if self.output_path else None,
                "format": self.output_format,
            },
            "seed": self.seed,
            "timings": self.timings,
            "options": dict(self.options),
        }


def _params_echo(params: ModelParams) -> dict[str, Any]:
    out = {}
    for f in fields(params):
        value = getattr(params, f.name)
        if isinstance(value, (PhiSpec, RhoSpec)):
            value = asdict(value)
        elif isinstance(value, Rep):
            value = value.value
        out[f.name] = value
    return out


def _as_complex(key: str, value) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"'{key}' must be a number, got a boolean", field=key)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"'{key}' must be a complex number, a [re, im] pair or a string, got {value!r}", field=key)


def _as_float(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a real number, got {value!r}", field=key)
    return float(value)


def _as_int(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}", field=key)
    return value


def _as_str(key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"'{key}' must be a string, got {value!r}", field=key)
    return value


def _as_spec(key: str, value, spec_type):
    if value is None:
        return spec_type()
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be an object", field=key)
    known = {f.name for f in fields(spec_type)}
    unknown = set(value) - known
    if unknown:
        raise ConfigError(f"Unknown keys in '{key}': {sorted(unknown)}", field=key)
    kwargs = dict(value)
    if "c" in kwargs:
        kwargs["c"] = _as_complex(f"{key}.c", kwargs["c"])
    return spec_type(**kwargs)


_CONVERTERS = {
    "complex": _as_complex,
    "float": _as_float,
    "int": _as_int,
    "str": _as_str,
    "phi": lambda key, value: _as_spec(key, value, PhiSpec),
    "rho": lambda key, value: _as_spec(key, value, RhoSpec),
}


def _model_values(entry: ModelEntry, data: dict) -> dict[str, Any]:
    values = {}
    for key, (kind, default) in entry.params.items():
        raw = data.get(key, default)
        if raw is None and kind not in ("phi", "rho"):
            raise ConfigError(f"Model '{entry.name}' requires '{key}'", field=key)
        values[key] = _CONVERTERS[kind](key, raw)
    return values


def _build_params(name: str, v: dict[str, Any]) -> tuple[ModelParams, dict[str, Any]]:
    """Construct the model's parameter record; returns it with the non-parameter options."""
    if name == "shifted":
        return ShiftedParams(v["alpha"], v["beta"]), {}
    if name == "extended":
        return ExtOscParams(v["beta"]), {}
    if name == "swanson":
        try:
            rep = Rep(v["rep"])
        except ValueError:
            raise ConfigError(f"Unknown representation '{v['rep']}'", field="rep")
        return SwansonParams(v["theta"], rep), {}
    if name == "susy":
        return SusyParams(v["example"], v["alpha"], v["beta"], v["phi"]), {}
    if name == "riesz_mult":
        return RieszParams(v["rho"]), {}
    if name == "gll":
        return GLLParams(v["k1"], v["k2"]), {"lmax": v["lmax"]}
    if name == "dho":
        params = DHOParams(v["m"], v["k"], v["gamma"], v["Gamma"], v["delta"])
        return params, {"samples": v["samples"]}
    return NogoParams(v["alpha"], v["n"], v["variant"], v["beta"], v["kmax"]), {}


def _parse_suites(entry: ModelEntry, params: ModelParams, raw) -> tuple[str, ...]:
    if raw is None:
        return tuple(sorted(entry.suites))
    if not isinstance(raw, list) or not all(isinstance(s, str) for s in raw):
        raise ConfigError("'suites' must be a list of suite names", field="suites")
    unknown = set(raw) - set(SUITES)
    if unknown:
        raise ConfigError(f"Unknown suites {sorted(unknown)}; choose from {list(SUITES)}", field="suites")
    unsupported = set(raw) - set(entry.suites)
    if isinstance(params, SwansonParams) and params.rep != Rep.FOCK and "intertwine" in raw:
        unsupported.add("intertwine")
    if unsupported:
        raise ConfigError(f"Suites {sorted(unsupported)} are not available for this '{entry.name}' configuration", field="suites")
    return tuple(sorted(set(raw)))


def _parse_tolerances(raw) -> Tolerances:
    if raw is None:
        return Tolerances()
    if not isinstance(raw, dict):
        raise ConfigError("'tolerances' must be an object", field="tolerances")
    known = {f.name for f in fields(Tolerances)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"Unknown tolerances: {sorted(unknown)}", field="tolerances")
    return replace(Tolerances(), **raw)


def _parse_output(raw) -> tuple[Path | None, str]:
    if raw is None:
        return None, "json"
    if not isinstance(raw, dict) or set(raw) - {"path", "format"}:
        raise ConfigError("'output' must be an object with 'path' and 'format'", field="output")
    fmt = raw.get("format", "json")
    if fmt not in OUTPUT_FORMATS:
        raise ConfigError(f"Unknown output format '{fmt}'; choose from {list(OUTPUT_FORMATS)}", field="output")
    path = raw.get("path")
    return (Path(path) if path else None), fmt


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Args:
        text: The configuration document.

    Returns:
        Validated RunConfig with defaults filled in.

    Raises:
        ConfigError: Malformed JSON (with line and column), unknown keys,
            or a parameter outside its domain (with the field name).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict):
        raise ConfigError("Configuration must be a JSON object", line=1, column=1)

    name = data.get("model")
    if name not in MODELS:
        raise ConfigError(f"Unknown model {name!r}; choose from {sorted(MODELS)}", field="model")
    entry = MODELS[name]

    unknown = set(data) - COMMON_KEYS - set(entry.params)
    if unknown:
        raise ConfigError(f"Unknown keys for model '{name}': {sorted(unknown)}", field=sorted(unknown)[0])

    try:
        params, options = _build_params(name, _model_values(entry, data))
    except DomainError as e:
        raise ConfigError(str(e), field=e.field) from e
    except TypeError as e:
        raise ConfigError(f"Invalid parameters for model '{name}': {e}") from e

    dim = _as_int("dim", data.get("dim", 80))
    if dim < 16:
        raise ConfigError(f"dim must be at least 16, got {dim}", field="dim")
    nmax = data.get("nmax")
    if nmax is not None and _as_int("nmax", nmax) < 1:
        raise ConfigError(f"nmax must be positive, got {nmax}", field="nmax")

    timings = data.get("timings", False)
    if not isinstance(timings, bool):
        raise ConfigError("'timings' must be true or false", field="timings")

    output_path, output_format = _parse_output(data.get("output"))
    config = RunConfig(
        model=name,
        params=params,
        dim=dim,
        nmax=nmax,
        suites=_parse_suites(entry, params, data.get("suites")),
        tolerances=_parse_tolerances(data.get("tolerances")),
        output_path=output_path,
        output_format=output_format,
        seed=_as_int("seed", data.get("seed", DEFAULT_SEED)),
        timings=timings,
        options=options,
    )
    logger.info(f"Parsed config for model '{name}' with suites {list(config.suites)}")
    return config


def load_config(path: Path) -> RunConfig:
    with open(path, "r") as f:
        return parse_config(f.read())


def load_environment() -> None:
    """Load .env from the project root when present."""
    env_file = PROJECT_ROOT / ".env"
    if env_file.exists():
        load_dotenv(env_file)


def thread_cap() -> int:
    """Worker count for running suites, capped by PBLAB_THREADS."""
    raw = os.getenv(THREADS_VAR)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_VAR} must be an integer, got {raw!r}", field=THREADS_VAR)
    if value < 1:
        raise ConfigError(f"{THREADS_VAR} must be at least 1, got {value}", field=THREADS_VAR)
    return value


def log_dir() -> Path:
    return Path(os.getenv(LOG_DIR_VAR, PROJECT_ROOT / "logs"))
