"""
Report documents and sweep tables.

Reports are ordered mappings serialised as JSON, or as YAML through the
order-preserving dumper when the target path ends in ``.yaml``/``.yml``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import OrderedDict
from pathlib import Path
from typing import Any
from typing import Dict
from typing import IO
from typing import List
from typing import Optional
from typing import Sequence
from typing import Union

import yaml

from dichotomy.bundles import BifurcationCertificate
from dichotomy.nonlinear import AssumptionCheck
from dichotomy.nonlinear import BifurcationReport
from dichotomy.nonlinear import SweepRecord
from dichotomy.nonlinear import WindowSolution

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
YAML_SUFFIXES = (".yaml", ".yml")


class OrderedDictLoader(yaml.SafeLoader):
    """yaml.SafeLoader building OrderedDict mappings."""


def ordered_dict_constructor(
    loader: OrderedDictLoader, node: yaml.MappingNode
) -> OrderedDict[Any, Any]:  # pylint: disable=unsubscriptable-object
    return OrderedDict(loader.construct_pairs(node))


OrderedDictLoader.add_constructor(
    yaml.resolver.Resolver.DEFAULT_MAPPING_TAG, ordered_dict_constructor
)


class OrderedDictDumper(yaml.SafeDumper):
    """yaml.SafeDumper writing OrderedDict mappings in insertion order."""


def ordered_dict_representer(
    dumper: OrderedDictDumper,
    data: OrderedDict[Any, Any],  # pylint: disable=unsubscriptable-object
) -> yaml.MappingNode:
    return dumper.represent_mapping(
        yaml.resolver.Resolver.DEFAULT_MAPPING_TAG, data.items()
    )


OrderedDictDumper.add_representer(OrderedDict, ordered_dict_representer)


def _finite(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def _check_document(check: AssumptionCheck) -> OrderedDict[str, Any]:
    return OrderedDict(
        [
            ("name", check.name),
            ("passed", check.passed),
            ("detail", check.detail),
            ("failed_vertices", list(check.failed_vertices)),
        ]
    )


def _certificate_document(
    certificate: Optional[BifurcationCertificate],
) -> Optional[OrderedDict[str, Any]]:
    if certificate is None:
        return None
    return OrderedDict(
        [
            ("w1_plus", list(certificate.w1_plus.bits)),
            ("w1_minus", list(certificate.w1_minus.bits)),
            ("mismatch", list(certificate.mismatch)),
            ("any_mismatch", certificate.any_mismatch),
            ("dimension_bound", certificate.dimension_bound),
        ]
    )


def _record_document(record: SweepRecord) -> OrderedDict[str, Any]:
    return OrderedDict(
        [
            ("vertex_index", record.vertex_index),
            ("theta", list(record.theta)),
            ("sigma_min", record.sigma_min),
            ("kernel_dim", record.kernel_dim),
        ]
    )


def _solution_document(solution: WindowSolution) -> OrderedDict[str, Any]:
    return OrderedDict(
        [
            ("lambda", list(solution.lam.theta)),
            ("window", solution.window),
            ("label", solution.label.value),
            ("residual_norm", solution.residual_norm),
            ("amplitude", solution.amplitude),
            ("iterations", solution.iterations),
            ("x", solution.x.tolist()),
        ]
    )


def report_document(report: BifurcationReport) -> OrderedDict[str, Any]:
    """Returns the versioned document for ``report``; field names follow the
    report attributes."""
    checks = [_check_document(c) for c in report.assumption_status]
    return OrderedDict(
        [
            ("schema_version", SCHEMA_VERSION),
            ("model", report.model),
            ("k", report.k),
            ("window", report.window),
            ("assumption_status", checks),
            ("certificate", _certificate_document(report.certificate)),
            ("dimension_bound", report.dimension_bound),
            ("sweep", [_record_document(r) for r in report.sweep]),
            ("candidates", list(report.candidates)),
            ("solutions", [_solution_document(s) for s in report.solutions]),
            ("conclusion", report.conclusion.value),
            ("notes", list(report.notes)),
            ("error", report.error),
        ]
    )


def dump_document(
    document: Dict[str, Any], stream: IO[str], yaml_format: bool = False
) -> None:
    document = sanitize(document)
    if yaml_format:
        yaml.dump(document, stream, Dumper=OrderedDictDumper, sort_keys=False)
    else:
        json.dump(document, stream, indent=2, allow_nan=False)
        stream.write("\n")


def write_document(document: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Writes ``document`` once to ``path``. OSError propagates."""
    target = Path(path)
    with target.open("w", encoding="utf-8") as stream:
        yaml_format = target.suffix.lower() in YAML_SUFFIXES
        dump_document(document, stream, yaml_format=yaml_format)
    logger.info("wrote %s", target)
    return target


def load_document(path: Union[str, Path]) -> OrderedDict[str, Any]:
    """Reads a document written by write_document, preserving key order."""
    target = Path(path)
    text = target.read_text(encoding="utf-8")
    if target.suffix.lower() in YAML_SUFFIXES:
        loaded = yaml.load(text, OrderedDictLoader)
    else:
        loaded = json.loads(text, object_pairs_hook=OrderedDict)
    if not isinstance(loaded, OrderedDict):
        raise ValueError(f"{path} does not hold a report document")
    return loaded


def sweep_header(k: int) -> List[str]:
    thetas = [f"theta_{j}" for j in range(k)]
    return ["vertex_index", *thetas, "sigma_min", "kernel_dim"]


def _float_cell(value: float) -> str:
    return format(value, ".17g")


def write_sweep_csv(records: Sequence[SweepRecord], k: int, stream: IO[str]) -> None:
    """One row per vertex in vertex order; floats carry 17 significant
    digits so that identical runs produce identical bytes."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(sweep_header(k))
    for record in sorted(records, key=lambda r: r.vertex_index):
        writer.writerow(
            [str(record.vertex_index)]
            + [_float_cell(theta) for theta in record.theta]
            + [_float_cell(record.sigma_min), str(record.kernel_dim)]
        )


def write_sweep_file(
    records: Sequence[SweepRecord], k: int, path: Union[str, Path]
) -> Path:
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="") as stream:
        write_sweep_csv(records, k, stream)
    logger.info("wrote %d sweep rows to %s", len(records), target)
    return target


def sanitize(value: Any) -> Any:
    """Replaces non-finite floats by None so documents stay strict JSON."""
    if isinstance(value, float):
        return _finite(value)
    if isinstance(value, OrderedDict):
        return OrderedDict((key, sanitize(item)) for key, item in value.items())
    if isinstance(value, dict):
        return {key: sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    return value
