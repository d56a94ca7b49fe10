"""Experiment configuration: TOML in, validated dataclasses in natural units out."""
import hashlib
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple

from ccqme.bath import BathSpec, LorentzDrude, OhmicExp
from ccqme.errors import CcqmeError, ConfigError
from ccqme.models import HarmonicOscillator, IsingChain, ModelSpec, SpinBoson, kelvin_to_energy
from ccqme.settings import Tolerances

logger = logging.getLogger(__name__)

METHODS = ("redfield", "lindblad", "ccqme", "exact_ho")
VARIANTS = ("harmonic", "spin-boson", "ising")
INITIAL_KINDS = ("gibbs", "fock", "superposition", "ground", "file")
SWEEP_AXES = ("temperature", "gamma")


@dataclass(frozen=True)
class ModelConfig:
    variant: str
    omega: float = 1.0
    levels: int = 60
    epsilon: float = 1.0
    length: int = 8
    coupling: float = 1.0
    # inverse time unit of every energy; only used for kelvin conversion
    time_unit: str = "ps"

    def spec(self) -> ModelSpec:
        if self.variant == "harmonic":
            return HarmonicOscillator(self.omega, self.levels)
        if self.variant == "spin-boson":
            return SpinBoson(self.epsilon)
        return IsingChain(self.length, self.coupling)


@dataclass(frozen=True)
class BathConfig:
    spectral: str
    strength: float  # gamma (Lorentz-Drude) or lambda (Ohmic)
    cutoff: float
    temperature: float  # natural units after parsing
    counterterm: bool = False
    normalization: str = "coupling-sum"

    def spec(self) -> BathSpec:
        if self.spectral == "lorentz-drude":
            j = LorentzDrude(self.strength, self.cutoff)
        else:
            j = OhmicExp(self.strength, self.cutoff)
        return BathSpec(j, self.temperature, self.counterterm, self.normalization)


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "gibbs"
    beta0: float = 1.0
    n: int = 0
    m: int = 1
    path: str | None = None


@dataclass(frozen=True)
class TimeConfig:
    # None: relaxation time 2/gamma
    t_max: float | None = None
    step: float = 0.01
    stride: int = 1
    storage: str = "auto"


@dataclass(frozen=True)
class OracleConfig:
    # asymptotic coefficients; False tabulates the time-dependent ones
    markovian: bool = True


@dataclass(frozen=True)
class KernelsConfig:
    energies: Tuple[float, ...] = ()
    correlator_t_max: float = 10.0
    correlator_step: float = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    model: ModelConfig
    baths: Tuple[BathConfig, ...]
    methods: Tuple[str, ...]
    initial: InitialConfig = field(default_factory=InitialConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    time_dependent: bool = False
    qbar_scale: float = 1.0
    oracle: OracleConfig = field(default_factory=OracleConfig)
    kernels: KernelsConfig = field(default_factory=KernelsConfig)
    sweep: Tuple[Tuple[str, Tuple[float, ...]], ...] = ()
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "out"
    source_sha1: str = ""

    def bath_specs(self) -> List[BathSpec]:
        return [b.spec() for b in self.baths]

    @property
    def tau_r(self) -> float:
        return 2.0 / sum(b.strength for b in self.baths)

    def as_dict(self) -> Dict[str, Any]:
        """Resolved parameters for the run manifest (temperatures in natural units)."""
        out = asdict(self)
        out["tolerances"] = self.tolerances.as_dict()
        out["sweep"] = {name: list(values) for name, values in self.sweep}
        return out


def _table(raw: Dict[str, Any], key: str, required: bool = False) -> Dict[str, Any]:
    value = raw.get(key, {})
    if required and key not in raw:
        raise ConfigError(f"missing [{key}] table")
    if not isinstance(value, dict):
        raise ConfigError(f"[{key}] must be a table")
    return value


def _pick(table: Dict[str, Any], allowed: Tuple[str, ...], where: str) -> Dict[str, Any]:
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"[{where}]: unknown keys {sorted(unknown)}")
    return dict(table)


def _positive(value: Any, what: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {value!r}") from None
    if not (x > 0 and math.isfinite(x)):
        raise ConfigError(f"{what} must be positive and finite, got {value!r}")
    return x


def _parse_model(raw: Dict[str, Any]) -> ModelConfig:
    table = _pick(_table(raw, "model", required=True), tuple(ModelConfig.__dataclass_fields__), "model")
    variant = table.get("variant")
    if variant not in VARIANTS:
        raise ConfigError(f"[model] variant must be one of {VARIANTS}, got {variant!r}")
    return ModelConfig(**table)


def _parse_bath(table: Dict[str, Any], k: int, time_unit: str) -> BathConfig:
    where = f"baths[{k}]"
    allowed = ("spectral", "gamma", "lam", "cutoff", "temperature", "temperature_unit", "counterterm", "normalization")
    table = _pick(table, allowed, where)
    spectral = table.get("spectral", "lorentz-drude")
    if spectral == "lorentz-drude":
        strength_key = "gamma"
    elif spectral == "ohmic-exp":
        strength_key = "lam"
    else:
        raise ConfigError(f"[{where}] spectral must be 'lorentz-drude' or 'ohmic-exp', got {spectral!r}")
    if strength_key not in table:
        raise ConfigError(f"[{where}] needs '{strength_key}' for a {spectral} bath")

    temperature = _positive(table.get("temperature"), f"[{where}] temperature")
    unit = table.get("temperature_unit", "natural")
    if unit == "kelvin":
        temperature = kelvin_to_energy(temperature, time_unit)
    elif unit != "natural":
        raise ConfigError(f"[{where}] temperature_unit must be 'natural' or 'kelvin', got {unit!r}")

    return BathConfig(
        spectral=spectral,
        strength=_positive(table[strength_key], f"[{where}] {strength_key}"),
        cutoff=_positive(table.get("cutoff"), f"[{where}] cutoff"),
        temperature=temperature,
        counterterm=bool(table.get("counterterm", False)),
        normalization=table.get("normalization", "coupling-sum"),
    )


def _parse_sweep(raw: Dict[str, Any]) -> Tuple[Tuple[str, Tuple[float, ...]], ...]:
    table = _pick(_table(raw, "sweep"), SWEEP_AXES, "sweep")
    axes = []
    for name in SWEEP_AXES:
        if name in table:
            values = table[name]
            if not isinstance(values, list) or not values:
                raise ConfigError(f"[sweep] {name} must be a non-empty list")
            axes.append((name, tuple(_positive(v, f"[sweep] {name}") for v in values)))
    return tuple(axes)


def parse_config(text: str, name: str = "experiment") -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{name}: invalid TOML: {exc}") from exc

    try:
        model = _parse_model(raw)
        baths_raw = raw.get("baths", [])
        if not isinstance(baths_raw, list) or not baths_raw:
            raise ConfigError("at least one [[baths]] entry is required")
        baths = tuple(_parse_bath(b, k, model.time_unit) for k, b in enumerate(baths_raw))

        run = _pick(_table(raw, "run"), ("methods", "time_dependent", "qbar_scale"), "run")
        methods = tuple(run.get("methods", ()))
        if not methods:
            raise ConfigError("[run] methods must list at least one method")
        unknown = set(methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"[run] unknown methods {sorted(unknown)}; expected {METHODS}")
        if "exact_ho" in methods and model.variant != "harmonic":
            raise ConfigError(f"exact_ho is only available for the harmonic model, not {model.variant!r}")

        initial = InitialConfig(**_pick(_table(raw, "initial"), tuple(InitialConfig.__dataclass_fields__), "initial"))
        if initial.kind not in INITIAL_KINDS:
            raise ConfigError(f"[initial] kind must be one of {INITIAL_KINDS}, got {initial.kind!r}")
        if initial.kind == "file" and not initial.path:
            raise ConfigError("[initial] kind = 'file' needs a path")

        time = TimeConfig(**_pick(_table(raw, "time"), tuple(TimeConfig.__dataclass_fields__), "time"))
        _positive(time.step, "[time] step")
        if time.stride < 1:
            raise ConfigError("[time] stride must be >= 1")

        kernels = _pick(_table(raw, "kernels"), tuple(KernelsConfig.__dataclass_fields__), "kernels")
        kernels["energies"] = tuple(float(e) for e in kernels.get("energies", ()))

        tolerances = Tolerances().updated(**_table(raw, "tolerances"))
        output = _pick(_table(raw, "output"), ("dir",), "output")

        cfg = ExperimentConfig(
            name=raw.get("name", name),
            model=model,
            baths=baths,
            methods=methods,
            initial=initial,
            time=time,
            time_dependent=bool(run.get("time_dependent", False)),
            qbar_scale=float(run.get("qbar_scale", 1.0)),
            oracle=OracleConfig(**_pick(_table(raw, "oracle"), ("markovian",), "oracle")),
            kernels=KernelsConfig(**kernels),
            sweep=_parse_sweep(raw),
            tolerances=tolerances,
            output_dir=output.get("dir", f"out/{raw.get('name', name)}"),
            source_sha1=hashlib.sha1(text.encode("utf-8")).hexdigest(),
        )
        cfg.model.spec()
        cfg.bath_specs()
    except ConfigError:
        raise
    except (CcqmeError, KeyError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    logger.debug("parsed config %s: %d baths, methods %s", cfg.name, len(cfg.baths), cfg.methods)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, name=path.stem)
