"""
Staged rendering of human-readable summaries from the package templates.
"""
from copy import deepcopy
from dataclasses import dataclass
from dataclasses import field
from functools import lru_cache
from typing import Any
from typing import Dict
from typing import List
from typing import NewType
from typing import Optional
from typing import Protocol
from typing import runtime_checkable
from typing import Union

from jinja2 import Environment
from jinja2 import PackageLoader
from jinja2 import StrictUndefined
from jinja2 import Template

from dichotomy.config import Config
from dichotomy.config import ConfigData


class NotSameBuilderInstanceError(RuntimeError):
    """Raised when a build step receives a target created by another
    builder instance."""


SummaryTargetInitialized = NewType("SummaryTargetInitialized", "SummaryBuilder")
SummaryTargetRendered = NewType("SummaryTargetRendered", "SummaryBuilder")
SummaryTargetBuilt = NewType("SummaryTargetBuilt", "SummaryBuilder")
SummaryTargetAnyState = Union[
    SummaryTargetInitialized, SummaryTargetRendered, SummaryTargetBuilt
]


@runtime_checkable
class TemplateGettable(Protocol):
    """typing.Protocol for retrieving the jinja2.Template a
    SummaryBuilder renders."""

    def get_template(self) -> Template:
        """Return the jinja2.Template."""


def format_number(value: Any, digits: int = 6) -> str:
    """Formats a float in compact scientific notation; other values pass
    through ``str``."""
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def format_matrix(value: Any, digits: int = 6) -> str:
    rows = [[format_number(float(entry), digits) for entry in row] for row in value]
    if not rows or not rows[0]:
        return "[]"
    width = max(len(entry) for row in rows for entry in row)
    return "\n".join("  ".join(entry.rjust(width) for entry in row) for row in rows)


@lru_cache(maxsize=1)
def _environment() -> Environment:
    environment = Environment(
        loader=PackageLoader("dichotomy", "templates"),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    environment.filters["num"] = format_number
    environment.filters["matrix"] = format_matrix
    return environment


@dataclass(frozen=True)
class PackageTemplate:
    """Looks ``name`` up in the templates shipped with dichotomy."""

    name: str

    def get_template(self) -> Template:
        return _environment().get_template(self.name)


@dataclass(frozen=True)
class SummaryData(ConfigData):
    title: str
    values: Dict[str, Any] = field(default_factory=dict)


class SummaryConfig(Config[SummaryData]):
    """Render context of one summary: ``title`` plus the ``values`` mapping
    flattened into the top level."""

    def __init__(self, title: str, values: Dict[str, Any]) -> None:
        super().__init__({"title": title, "values": values}, SummaryData)

    def _get_render_context(self, data: Optional[SummaryData]) -> Dict[Any, Any]:
        if data is None:
            return {}
        context: Dict[Any, Any] = {"title": data.title}
        context.update(data.values)
        return context


class SummaryBuilder:
    """Renders a template with the context of a SummaryConfig in three
    stages; each stage takes the target returned by the previous one.

    .. code-block:: python

        builder = SummaryBuilder(config, PackageTemplate("spectral.txt.j2"))

        initialized = builder.init_builder_target()
        rendered = builder.render(initialized)
        built = builder.build(rendered)

        text = builder.fetch_built(built)

    :param config: Provides the render context; loaded on construction.

    :param template_getter: Provides the jinja2.Template.
    """

    def __init__(self, config: Config[Any], template_getter: TemplateGettable) -> None:
        self.__config = deepcopy(config)
        self.__config.load_config()
        self.__render_context: Dict[Any, Any] = self.__config.get_render_context()
        self.__template_getter = template_getter
        self.__lines: Optional[List[str]] = None
        self.__built: Optional[str] = None

    @property
    def config(self) -> Config[Any]:
        """Returns a deep copy of the provided Config."""
        return deepcopy(self.__config)

    def _check_see_if_same_builder_instance(
        self, target: SummaryTargetAnyState
    ) -> None:
        if self is not target:
            raise NotSameBuilderInstanceError

    def init_builder_target(self) -> SummaryTargetInitialized:
        return SummaryTargetInitialized(self)

    def fetch_render_context(self, target: SummaryTargetAnyState) -> Dict[Any, Any]:
        """Returns a deep copy of the render context.

        Raises NotSameBuilderInstanceError for a foreign target.
        """
        self._check_see_if_same_builder_instance(target)
        return deepcopy(self.__render_context)

    def render(self, target: SummaryTargetInitialized) -> SummaryTargetRendered:
        """Renders the template into lines with trailing whitespace removed."""
        self._check_see_if_same_builder_instance(target)
        self._render(self.fetch_render_context(target))
        return SummaryTargetRendered(target)

    def _render(self, context: Dict[Any, Any]) -> List[str]:
        """Intended to be overridden to adjust the context or the lines."""
        rendered = self.__template_getter.get_template().render(context)
        self.__lines = [line.rstrip() for line in rendered.splitlines()]
        return self.__lines

    def fetch_rendered(
        self, target: Union[SummaryTargetRendered, SummaryTargetBuilt]
    ) -> List[str]:
        self._check_see_if_same_builder_instance(target)
        return list(self.__lines or [])

    def build(self, target: SummaryTargetRendered) -> SummaryTargetBuilt:
        """Joins the rendered lines into the final text."""
        self._check_see_if_same_builder_instance(target)
        self._build(self.fetch_rendered(target))
        return SummaryTargetBuilt(target)

    def _build(self, lines: List[str]) -> str:
        while lines and not lines[-1]:
            lines.pop()
        self.__built = "\n".join(lines) + "\n"
        return self.__built

    def fetch_built(self, target: SummaryTargetBuilt) -> str:
        self._check_see_if_same_builder_instance(target)
        return self.__built or ""


def render_summary(template_name: str, title: str, values: Dict[str, Any]) -> str:
    """Runs all stages of a SummaryBuilder on a package template."""
    builder = SummaryBuilder(
        SummaryConfig(title, values), PackageTemplate(template_name)
    )
    initialized = builder.init_builder_target()
    rendered = builder.render(initialized)
    built = builder.build(rendered)
    return builder.fetch_built(built)
