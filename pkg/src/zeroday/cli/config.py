from __future__ import annotations

import enum
import typing
from pathlib import Path

import attrs
import yaml
from attrs import define, field
from cattrs import ClassValidationError, Converter
from cattrs.v import format_exception, transform_error

from zeroday.autoencoder import Activation, Architecture, LossKind, TrainConfig
from zeroday.dataset import SyntheticSpec
from zeroday.dataset.labeled import DEFAULT_BENIGN_LABEL
from zeroday.errors import ConfigError
from zeroday.ocsvm import KernelSpec, SmoConfig
from zeroday.ocsvm.kernel import GAMMA_SCALE

config_converter = Converter(forbid_extra_keys=True)

AUTO_PREFIX = "auto:"


class DatasetPreset(enum.StrEnum):
    NSL_KDD = "nsl-kdd"


class Command(enum.StrEnum):
    PREPROCESS = "preprocess"
    TRAIN_AE = "train-ae"
    TRAIN_SVM = "train-svm"
    EVALUATE = "evaluate"
    SEARCH = "search"
    COMPARE = "compare"
    SYNTH = "synth"


@config_converter.register_structure_hook
def parse_path(val: str, _) -> Path:
    return Path(val)


def _number_or_text(val, _) -> float | str:
    if isinstance(val, str):
        try:
            return float(val)
        except ValueError:
            return val.strip()
    return float(val)


config_converter.register_structure_hook_func(lambda t: t == (float | str), _number_or_text)


@define(frozen=True)
class DatasetConfig:
    """Where the feature files live and how to read them."""

    id: str = field()
    train: Path = field()
    test: Path | None = field(default=None)
    label_column: str = field(default="label")
    benign_label: str = field(default=DEFAULT_BENIGN_LABEL)
    header: bool = field(default=True)
    preset: DatasetPreset | None = field(default=None)
    force_categorical: tuple[str, ...] = field(default=())
    ignore_columns: tuple[str, ...] = field(default=())
    class_map: dict[str, str] = field(factory=dict)
    train_fraction: float = field(default=0.75)

    @train_fraction.validator  # type: ignore
    def check_fraction(self, _, fraction: float):
        if not 0 < fraction < 1:
            raise ValueError(f"train_fraction must lie in (0, 1), got {fraction}")


@define(frozen=True)
class PreprocessConfig:
    prune: bool = field(default=True)
    threshold: float = field(default=0.9)

    @threshold.validator  # type: ignore
    def check_threshold(self, _, threshold: float):
        if not 0 < threshold <= 1:
            raise ValueError(f"Correlation threshold must lie in (0, 1], got {threshold}")

    @property
    def effective_threshold(self) -> float | None:
        return self.threshold if self.prune else None


@define(frozen=True)
class AutoencoderConfig:
    """Hidden widths only; input and output widths follow the fitted pipeline."""

    hidden: tuple[int, ...] = field(default=(15, 9, 15))
    activation: Activation = field(default=Activation.TANH)
    epochs: int = field(default=50)
    batch_size: int = field(default=1024)
    learning_rate: float = field(default=1e-3)
    l2_lambda: float = field(default=1e-4)
    loss: LossKind = field(default=LossKind.MSE)
    score_loss: LossKind | None = field(default=None)

    def architecture(self, width: int) -> Architecture:
        return Architecture((width, *self.hidden, width), self.activation)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            self.epochs,
            self.batch_size,
            self.learning_rate,
            self.l2_lambda,
            self.loss,
            seed,
        )


@define(frozen=True)
class OcsvmConfig:
    gamma: float | str = field(default=GAMMA_SCALE)
    tolerance: float = field(default=1e-4)
    max_passes: int = field(default=100)
    dense_limit: int = field(default=20_000)
    cache_rows: int = field(default=4096)

    @property
    def kernel(self) -> KernelSpec:
        return KernelSpec(gamma=self.gamma)

    def smo_config(self, seed: int) -> SmoConfig:
        return SmoConfig(
            self.tolerance, self.max_passes, seed, self.dense_limit, self.cache_rows
        )


@define(frozen=True)
class SearchConfig:
    hidden: tuple[tuple[int, ...], ...] = field()
    learning_rates: tuple[float, ...] = field()
    epoch_counts: tuple[int, ...] = field()
    l2_lambdas: tuple[float, ...] = field()
    budget: int = field(default=10)
    retrain: bool = field(default=True)
    activation: Activation = field(default=Activation.TANH)
    batch_size: int = field(default=1024)
    loss: LossKind = field(default=LossKind.MSE)


@define(frozen=True)
class SyntheticConfig:
    n_benign: int = field()
    n_attack_classes: int = field()
    n_features: int = field()
    benign_covariance_rank: int = field()
    attack_offsets: tuple[typing.Any, ...] = field()
    noise_sigma: float = field()
    n_attack: int = field(default=1000)
    class_names: tuple[str, ...] | None = field(default=None)
    seed: int | None = field(default=None)
    output: Path | None = field(default=None)

    def spec(self, default_seed: int) -> SyntheticSpec:
        return SyntheticSpec(
            self.n_benign,
            self.n_attack_classes,
            self.n_features,
            self.benign_covariance_rank,
            self.attack_offsets,
            self.noise_sigma,
            self.seed if self.seed is not None else default_seed,
            self.n_attack,
            self.class_names,
        )


@define(frozen=True)
class RunConfig:
    """One declarative run: data, preprocessing, a detector and its sweep.

    Loaded from YAML; relative paths are taken from the config file's directory.
    """

    dataset: DatasetConfig | None = field(default=None)
    out: Path = field(default=Path("runs"))
    seed: int = field(default=0)
    threads: int | None = field(default=None)
    locale: str = field(default="en")
    preprocess: PreprocessConfig = field(factory=PreprocessConfig)
    autoencoder: AutoencoderConfig | None = field(default=None)
    ocsvm: OcsvmConfig | None = field(default=None)
    sweep: tuple[float | str, ...] = field(default=())
    search: SearchConfig | None = field(default=None)
    synthetic: SyntheticConfig | None = field(default=None)
    source: Path | None = field(default=None)

    @classmethod
    def load(cls, path: Path | str) -> RunConfig:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file {path} does not exist")
        with path.open("r", encoding="utf-8") as fp:
            try:
                data = yaml.safe_load(fp)
            except yaml.YAMLError as e:
                raise ConfigError(f"{path} is not valid YAML: {e}") from e
        return cls.from_dict(data or {}, path)

    @classmethod
    def from_dict(cls, data: dict, path: Path | None = None) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("The config must be a mapping of sections")
        base = path.parent if path is not None else Path.cwd()
        data = _resolve_paths(data, base)
        try:
            config = config_converter.structure(data, cls)
        except ClassValidationError as e:
            problems = transform_error(e, path="config", format_exception=_describe)
            raise ConfigError(problems) from e
        except (ValueError, TypeError) as e:
            raise ConfigError(str(e)) from e
        return attrs.evolve(config, source=path)

    def with_overrides(
        self,
        seed: int | None = None,
        threads: int | None = None,
        out: Path | None = None,
    ) -> RunConfig:
        changes: dict[str, typing.Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if threads is not None:
            changes["threads"] = threads
        if out is not None:
            changes["out"] = out.resolve()
        return attrs.evolve(self, **changes)

    @property
    def detector(self) -> str | None:
        if self.autoencoder is not None and self.ocsvm is None:
            return "autoencoder"
        if self.ocsvm is not None and self.autoencoder is None:
            return "ocsvm"
        return None


def _describe(exc: BaseException, type_) -> str:
    if isinstance(exc, ValueError) and str(exc):
        return str(exc)
    return format_exception(exc, type_)


def _resolve_paths(data: dict, base: Path) -> dict:
    def resolve(value):
        if isinstance(value, str):
            return str((base / Path(value).expanduser()).resolve())
        return value

    data = dict(data)
    if "out" in data:
        data["out"] = resolve(data["out"])
    else:
        data["out"] = str((base / "runs").resolve())
    for section, keys in (("dataset", ("train", "test")), ("synthetic", ("output",))):
        if isinstance(data.get(section), dict):
            data[section] = dict(data[section])
            for key in keys:
                if data[section].get(key) is not None:
                    data[section][key] = resolve(data[section][key])
    return data


def parse_auto(value: float | str) -> float | None:
    """The target specificity of an `auto:<target>` sweep entry, else None."""
    if isinstance(value, str) and value.startswith(AUTO_PREFIX):
        return float(value[len(AUTO_PREFIX) :])
    return None


def validate(config: RunConfig, command: Command) -> RunConfig:
    """Check everything a command needs before any work starts.

    All problems are reported together.
    """
    problems: list[str] = []
    if config.seed < 0:
        problems.append(f"seed must be an unsigned integer, got {config.seed}")
    if config.threads is not None and config.threads < 1:
        problems.append(f"threads must be at least 1, got {config.threads}")
    if config.autoencoder is not None and config.ocsvm is not None:
        problems.append("exactly one detector section is allowed: autoencoder or ocsvm")

    if command is Command.SYNTH:
        if config.synthetic is None:
            problems.append("synth needs a `synthetic` section")
        elif config.synthetic.output is None and config.dataset is None:
            problems.append("synth needs `synthetic.output` or `dataset.train`")
    elif command is not Command.COMPARE:
        if config.dataset is None:
            problems.append(f"{command} needs a `dataset` section")
        else:
            if not config.dataset.train.exists():
                problems.append(f"dataset.train: {config.dataset.train} does not exist")
            if config.dataset.test is not None and not config.dataset.test.exists():
                problems.append(f"dataset.test: {config.dataset.test} does not exist")
            if config.dataset.preset is None and not config.dataset.header:
                problems.append("dataset.header: false needs a preset that names the columns")

    if command is Command.TRAIN_AE and config.autoencoder is None:
        problems.append("train-ae needs an `autoencoder` section")
    if command is Command.TRAIN_SVM and config.ocsvm is None:
        problems.append("train-svm needs an `ocsvm` section")
    if command is Command.EVALUATE and config.autoencoder is None and config.ocsvm is None:
        problems.append("evaluate needs exactly one detector section: autoencoder or ocsvm")
    if command is Command.SEARCH and config.search is None:
        problems.append("search needs a `search` section")

    if command in (Command.TRAIN_SVM, Command.EVALUATE):
        problems.extend(_sweep_problems(config))
    if config.search is not None and command is Command.SEARCH:
        for name in ("hidden", "learning_rates", "epoch_counts", "l2_lambdas"):
            if not getattr(config.search, name):
                problems.append(f"search.{name} must not be empty")

    if problems:
        raise ConfigError(problems)
    return config


def _sweep_problems(config: RunConfig) -> list[str]:
    if not config.sweep:
        return ["sweep must list at least one value"]
    problems = []
    for value in config.sweep:
        if isinstance(value, str):
            try:
                target = parse_auto(value)
            except ValueError:
                problems.append(f"sweep: cannot read {value!r}")
                continue
            if target is None:
                problems.append(f"sweep: {value!r} is not a number or auto:<specificity>")
            elif config.ocsvm is not None:
                problems.append(f"sweep: {value!r} only applies to autoencoder thresholds")
            elif not 0 < target <= 1:
                problems.append(f"sweep: target specificity {target} must lie in (0, 1]")
        elif value <= 0:
            problems.append(f"sweep: values must be positive, got {value}")
        elif config.ocsvm is not None and value > 1:
            problems.append(f"sweep: nu must lie in (0, 1], got {value}")
    return problems
