"""Experiment configuration files.

A config is a TOML document; see ``configs/ising5_cmaes.toml`` in the repository
for a commented template.  Unknown keys are rejected so typos cannot
silently fall back to defaults.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..ansatz import Ansatz, build_ansatz
from ..estimator import ALLOCATIONS, MODES, VARIANCE_MODELS, Estimator
from ..exceptions import ConfigurationError
from ..models import build_model
from ..optimizers import OPTIMIZERS, Optimizer, make_optimizer
from ..pauli import Hamiltonian

DEFAULT_SHOTS = 6144
DEFAULT_BUDGET = 10_000
INIT_KINDS = ("uniform01", "zeros", "custom")


@dataclass
class HamiltonianSpec:
    model: str = "ising"
    qubits: int | None = None
    sites: int | None = None
    t: float = 1.0
    u: float = 1.0
    boundary: str = "open"
    file: str | None = None

    def build(self) -> Hamiltonian:
        if self.file:
            return build_model(self.file)
        params = {k: v for k, v in asdict(self).items() if v is not None and k not in ("model", "file")}
        return build_model(self.model, **params)


@dataclass
class AnsatzSpec:
    family: str | None = None
    reps: int = 3
    rotation: str = "RY"
    entangler: str = "CX"
    entanglement: str = "linear"
    p: float = 1.0
    layers: int = 2
    hf_occupation: int | None = None

    def resolved_family(self, h: Hamiltonian) -> str:
        if self.family:
            return self.family
        # lattice models use TwoLocal, molecules the truncated VHA
        return "twolocal" if h.metadata.get("name", "").startswith(("ising", "hubbard")) else "tvha"

    def build(self, h: Hamiltonian) -> Ansatz:
        return build_ansatz(self.resolved_family(h), h, **{k: v for k, v in asdict(self).items() if k != "family"})


@dataclass
class OptimizerSpec:
    algorithm: str = "cma_es"
    params: dict = field(default_factory=dict)


@dataclass
class NoiseSpec:
    mode: str = "exact"
    shots: int | None = DEFAULT_SHOTS
    allocation: str = "per_group"
    variance_model: str = "grouped"


@dataclass
class InitSpec:
    kind: str = "uniform01"
    values: list | None = None


@dataclass
class ReevaluationSpec:
    enabled: bool = True
    shots: int | None = 1_000_000
    mode: str = "gaussian"
    elites: int = 10


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a batch of optimization runs.

    Run ``i`` uses optimizer seed ``seed + i``; evaluation ``k`` of run ``i``
    draws its noise from ``rng_stream(seed, i, k)``.
    """

    name: str = "experiment"
    seed: int = 0
    n_runs: int = 1
    budget: int = DEFAULT_BUDGET
    tolerance: float = 0.1
    stop_at_tolerance: bool = True
    hamiltonian: HamiltonianSpec = field(default_factory=HamiltonianSpec)
    ansatz: AnsatzSpec = field(default_factory=AnsatzSpec)
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    init: InitSpec = field(default_factory=InitSpec)
    reevaluation: ReevaluationSpec = field(default_factory=ReevaluationSpec)

    _SECTIONS = {
        "hamiltonian": HamiltonianSpec,
        "ansatz": AnsatzSpec,
        "optimizer": OptimizerSpec,
        "noise": NoiseSpec,
        "init": InitSpec,
        "reevaluation": ReevaluationSpec,
    }

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        data = copy.deepcopy(data)
        kwargs = {}
        for key, value in data.items():
            if key in cls._SECTIONS:
                if not isinstance(value, dict):
                    raise ConfigurationError(f"[{key}] must be a table")
                section = cls._SECTIONS[key]
                allowed = set(section.__dataclass_fields__)
                unknown = set(value) - allowed
                if unknown:
                    raise ConfigurationError(f"unknown key(s) in [{key}]: {sorted(unknown)}")
                kwargs[key] = section(**value)
            elif key in cls.__dataclass_fields__ and not key.startswith("_"):
                kwargs[key] = value
            else:
                raise ConfigurationError(f"unknown top-level key {key!r}")
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> ExperimentConfig:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if not k.startswith("_")}

    @property
    def config_hash(self) -> str:
        """SHA-256 over every result-affecting field (all but ``name``)."""
        payload = self.to_dict()
        payload.pop("name")
        blob = json.dumps(payload, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def validate(self):
        if int(self.n_runs) < 1:
            raise ConfigurationError("n_runs must be >= 1")
        if int(self.budget) < 1:
            raise ConfigurationError("budget must be >= 1")
        if self.tolerance <= 0:
            raise ConfigurationError("tolerance must be positive")
        if self.hamiltonian.file and not Path(self.hamiltonian.file).is_file():
            raise FileNotFoundError(f"Hamiltonian file not found: {self.hamiltonian.file}")
        if self.optimizer.algorithm not in OPTIMIZERS:
            raise ConfigurationError(
                f"unknown optimizer {self.optimizer.algorithm!r}; choose from {sorted(OPTIMIZERS)}"
            )
        n = self.noise
        if n.mode not in MODES:
            raise ConfigurationError(f"noise.mode must be one of {MODES}")
        if n.mode != "exact" and (n.shots is None or n.shots < 1):
            raise ConfigurationError("noisy modes need noise.shots >= 1")
        if n.allocation not in ALLOCATIONS:
            raise ConfigurationError(f"noise.allocation must be one of {ALLOCATIONS}")
        if n.variance_model not in VARIANCE_MODELS:
            raise ConfigurationError(f"noise.variance_model must be one of {VARIANCE_MODELS}")
        if self.init.kind not in INIT_KINDS:
            raise ConfigurationError(f"init.kind must be one of {INIT_KINDS}")
        if self.init.kind == "custom" and not self.init.values:
            raise ConfigurationError("init.kind = 'custom' needs init.values")
        if self.reevaluation.mode not in MODES:
            raise ConfigurationError(f"reevaluation.mode must be one of {MODES}")
        # surfaces bad hyperparameter names before any run starts
        self.make_optimizer()

    def make_optimizer(self, seed: int | None = None) -> Optimizer:
        params = dict(self.optimizer.params)
        params.setdefault("budget", int(self.budget))
        if seed is not None:
            params["seed"] = seed
        return make_optimizer(self.optimizer.algorithm, **params)

    def build(self) -> tuple[Hamiltonian, Ansatz, Estimator]:
        h = self.hamiltonian.build()
        a = self.ansatz.build(h)
        shots = None if self.noise.mode == "exact" else self.noise.shots
        est = Estimator(a, h, self.noise.mode, shots, self.noise.allocation, self.noise.variance_model)
        return h, a, est
