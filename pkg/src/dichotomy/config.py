import logging
from copy import deepcopy
from dataclasses import asdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Generic
from typing import Literal
from typing import Mapping
from typing import Optional
from typing import Type
from typing import TypeVar
from typing import Union

import yaml
from pydantic import ConfigDict
from pydantic import Field
from pydantic import NonNegativeInt
from pydantic import PositiveFloat
from pydantic import PositiveInt
from pydantic import ValidationError
from pydantic import model_validator
from pydantic.dataclasses import dataclass as pydantic_dataclass

from dichotomy.spectral import DichotomyError

logger = logging.getLogger(__name__)

ModelName = Literal[
    "torus_example", "counterexample_A5", "random_asymptotic", "tabulated"
]

_STRICT = ConfigDict(extra="forbid")


class ConfigDataNotLoadedError(RuntimeError):
    """Used when a ConfigData instance is read before Config.load_config()."""


class ConfigError(DichotomyError, ValueError):
    """Used when a run configuration cannot be read or fails validation."""


@dataclass(frozen=True)
class ConfigData:
    """Base of the validated records a Config builds."""


CONFIG_DATA = TypeVar("CONFIG_DATA", bound=ConfigData)


class Config(Generic[CONFIG_DATA]):
    """Raw run settings plus the validated record built from them by
    ``load_config``; subclasses decide what a summary template sees."""

    def __init__(
        self, raw_config_dict: Dict[Any, Any], ConfigDataClass: Type[CONFIG_DATA]
    ) -> None:
        self.__raw_config_dict = raw_config_dict
        self.__ConfigData = ConfigDataClass
        self.__data: Optional[CONFIG_DATA] = None

    @property
    def raw_config_dict(self) -> Dict[Any, Any]:
        return deepcopy(self.__raw_config_dict)

    def load_config(self) -> None:
        self.__data = self.__ConfigData(**self.__raw_config_dict)

    @property
    def data(self) -> Optional[CONFIG_DATA]:
        """None until load_config() has run."""
        return self.__data

    def get_render_context(self) -> Dict[Any, Any]:
        return self._get_render_context(self.__data)

    def _get_render_context(self, data: Optional[CONFIG_DATA]) -> Dict[Any, Any]:
        """The record as nested dictionaries, empty before loading."""
        if data is None:
            return {}
        return asdict(data)


@pydantic_dataclass(frozen=True, config=_STRICT)
class ModelSpec:
    """Names a built-in model and its parameters, e.g. ``c`` for the
    quadratic term of the torus example or ``seed`` for random families."""

    name: ModelName = "torus_example"
    k: PositiveInt = 1
    params: Dict[str, Any] = Field(default_factory=dict)


@pydantic_dataclass(frozen=True, config=_STRICT)
class MeshSettings:
    """:param k: Must equal model.k when given.

    :param refinements: Number of uniform doublings applied to ``M``.
    """

    k: Optional[PositiveInt] = None
    M: PositiveInt = 64
    refinements: NonNegativeInt = 0

    @property
    def resolution(self) -> int:
        return self.M * 2**self.refinements


@pydantic_dataclass(frozen=True, config=_STRICT)
class Tolerances:
    hyperbolicity: PositiveFloat = 1e-8
    rank: PositiveFloat = 1e-8
    newton: PositiveFloat = 1e-10
    trigger: PositiveFloat = 1e-3
    asymptotic: PositiveFloat = 1e-8


@pydantic_dataclass(frozen=True, config=_STRICT)
class Outputs:
    report: Optional[str] = None
    csv: Optional[str] = None


@pydantic_dataclass(frozen=True, config=_STRICT)
class RunConfigData(ConfigData):
    model: ModelSpec = Field(default_factory=ModelSpec)
    mesh: MeshSettings = Field(default_factory=MeshSettings)
    window: PositiveInt = 50
    tolerances: Tolerances = Field(default_factory=Tolerances)
    outputs: Outputs = Field(default_factory=Outputs)
    seed: int = 0
    seed_amplitude: PositiveFloat = 0.05
    newton_seeds: PositiveInt = 1

    @model_validator(mode="after")
    def _mesh_matches_model(self) -> "RunConfigData":
        if self.mesh.k is not None and self.mesh.k != self.model.k:
            raise ValueError(
                f"mesh.k={self.mesh.k} differs from model.k={self.model.k}"
            )
        if self.tolerances.rank > 1e-2:
            raise ValueError("tolerances.rank must not exceed 1e-2")
        return self


def load_raw_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Reads a YAML or JSON configuration document into a dictionary.
    OSError from reading the file propagates unchanged."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ConfigError(f"cannot parse {path}: {error}") from error
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return document


def merge_overrides(
    raw: Mapping[str, Any], overrides: Mapping[str, Any]
) -> Dict[str, Any]:
    """Returns a copy of ``raw`` with ``overrides`` merged in. Nested mappings
    are merged key by key and None values leave the original untouched."""
    merged = deepcopy(dict(raw))
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_overrides(merged[key], value)
        elif isinstance(value, Mapping):
            merged[key] = merge_overrides({}, value)
        else:
            merged[key] = value
    return merged


class RunConfig(Config[RunConfigData]):
    """Configuration of one certification, sweep or verify run."""

    def __init__(self, raw_config_dict: Dict[Any, Any]) -> None:
        super().__init__(raw_config_dict, RunConfigData)

    @classmethod
    def from_path(
        cls,
        path: Optional[Union[str, Path]],
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        """Reads ``path`` (if any), applies ``overrides`` and loads the result.

        Raises ConfigError when the document is invalid.
        """
        raw = load_raw_config(path) if path is not None else {}
        config = cls(merge_overrides(raw, overrides or {}))
        config.load_config()
        return config

    def load_config(self) -> None:
        try:
            super().load_config()
        except (ValidationError, TypeError) as error:
            raise ConfigError(str(error)) from error
        logger.debug("loaded run configuration %s", self.raw_config_dict)

    def _require(self) -> RunConfigData:
        if self.data is None:
            raise ConfigDataNotLoadedError
        return self.data

    @property
    def model(self) -> ModelSpec:
        return self._require().model

    @property
    def mesh(self) -> MeshSettings:
        return self._require().mesh

    @property
    def window(self) -> int:
        return self._require().window

    @property
    def tolerances(self) -> Tolerances:
        return self._require().tolerances

    @property
    def outputs(self) -> Outputs:
        return self._require().outputs

    @property
    def seed(self) -> int:
        return self._require().seed

    @property
    def seed_amplitude(self) -> float:
        return self._require().seed_amplitude

    @property
    def newton_seeds(self) -> int:
        return self._require().newton_seeds

    def _get_render_context(self, data: Optional[RunConfigData]) -> Dict[Any, Any]:
        context = super()._get_render_context(data)
        if data is not None:
            context["mesh_resolution"] = data.mesh.resolution
        return context
