"""Run configuration, instance files, artifacts, logging and table helpers."""

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .__version__ import __version__
from .exceptions import InputError
from .pls import PartialLatinSquare, generate, parse_generator_spec

# Initialize rich console for better output formatting
console = Console()

DEFAULT_STATE_BUDGET = 10 ** 8


def get_default_threads() -> int:
    """Default worker count from ASSOCLAB_THREADS, falling back to 1."""
    value = os.environ.get("ASSOCLAB_THREADS")
    if not value:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        raise InputError(f"ASSOCLAB_THREADS must be an integer, got {value!r}") from None


def get_default_budget() -> int:
    """Default state budget from ASSOCLAB_BUDGET, falling back to 10^8."""
    value = os.environ.get("ASSOCLAB_BUDGET")
    if not value:
        return DEFAULT_STATE_BUDGET
    try:
        return int(float(value))
    except ValueError:
        raise InputError(f"ASSOCLAB_BUDGET must be a number, got {value!r}") from None


def configure_logging(verbose: bool = False) -> logging.Logger:
    """Attach a rich handler to the package logger (DEBUG when verbose, WARNING otherwise)."""
    logger = logging.getLogger("assoclab")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=verbose)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False
    return logger


@dataclass
class RunConfig:
    """Everything needed to repeat a command."""

    command: str
    action: Optional[str] = None
    instance: Optional[str] = None
    gen: Optional[str] = None
    seed: int = 0
    budget: int = DEFAULT_STATE_BUDGET
    time_budget: Optional[float] = None
    threads: int = 1
    output: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable(asdict(self))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        if "command" not in data:
            raise InputError("run configuration has no 'command'")
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


def to_jsonable(obj: Any) -> Any:
    """Convert fractions, numpy scalars, tuples and sets into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None


def load_instance(path: Optional[str] = None, gen: Optional[str] = None) -> PartialLatinSquare:
    """Instance from a JSON file or a generator spec string, exactly one of the two."""
    if (path is None) == (gen is None):
        raise InputError("give exactly one of an instance file or a generator spec")
    if gen is not None:
        return generate(parse_generator_spec(gen))
    data = read_json(path)
    if isinstance(data, dict) and "result" in data and "triples" not in data:
        data = data["result"]
    if not isinstance(data, dict):
        raise InputError(f"{path} does not hold an instance object")
    return PartialLatinSquare.from_dict(data)


def save_instance(pls: PartialLatinSquare, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(pls.to_dict(), f, indent=2)


def artifact(config: RunConfig, result: Any) -> Dict[str, Any]:
    return {"version": __version__, "config": config.to_dict(), "result": to_jsonable(result)}


def write_artifact(path: str, config: RunConfig, result: Any) -> Dict[str, Any]:
    """Write a JSON artifact carrying the version and the run configuration."""
    payload = artifact(config, result)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    return payload


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], config: RunConfig) -> str:
    """Write CSV rows plus a sibling ``.meta.json`` with the provenance; returns the sidecar path."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([to_jsonable(v) for v in row])
    meta = f"{path}.meta.json"
    with open(meta, "w", encoding="utf-8") as f:
        json.dump({"version": __version__, "config": config.to_dict(), "columns": list(header)}, f, indent=2)
    return meta


def parse_index_set(text: str) -> List[int]:
    """Point sets written as ``0,1,5`` or ``range:A:B`` (B exclusive)."""
    text = text.strip()
    if not text:
        return []
    try:
        if text.startswith("range:"):
            _, start, stop = text.split(":")
            return list(range(int(start), int(stop)))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"malformed point set {text!r}") from None


# Tables


def create_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Table:
    """Generic table with the first column highlighted."""
    table = Table(title=title)
    for i, column in enumerate(columns):
        table.add_column(column, style="cyan" if i == 0 else None)
    for row in rows:
        table.add_row(*(_cell(v) for v in row))
    return table


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "[green]yes[/green]" if value else "[red]no[/red]"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(to_jsonable(value))


def create_check_table(title: str, rows: Sequence[Dict[str, Any]], name_key: str = "metric") -> Table:
    """Measured-against-bound rows with a coloured pass column."""
    table = Table(title=title)
    table.add_column(name_key.capitalize(), style="cyan")
    table.add_column("Measured", style="yellow")
    table.add_column("Bound")
    table.add_column("Status")
    for row in rows:
        passed = row.get("pass", row.get("ok"))
        status = "[green]PASS[/green]" if passed else "[red]FAIL[/red]"
        measured = row.get("measured", row.get("lhs"))
        bound = row.get("bound", row.get("rhs"))
        table.add_row(str(row.get(name_key, row.get("lemma", ""))), _cell(measured), _cell(bound), status)
    return table


def create_trace_table(stages: Sequence[Dict[str, Any]]) -> Table:
    table = Table(title="Extraction Trace")
    table.add_column("Stage", style="cyan")
    table.add_column("Cells", style="yellow")
    table.add_column("Density")
    table.add_column("Octahedron density")
    table.add_column("Defect")
    for stage in stages:
        table.add_row(
            stage["name"],
            str(stage["cells"]),
            _cell(float(stage["density"])),
            _cell(float(stage["octahedron_density"])),
            str(stage["defect"]),
        )
    return table


def create_instance_table(pls: PartialLatinSquare) -> Table:
    """Grid view of a small instance: rows down, columns across."""
    table = Table(title=f"Partial Latin square {pls.dims[0]}x{pls.dims[1]} ({len(pls)} cells)")
    table.add_column("", style="cyan")
    for x in range(pls.dims[0]):
        table.add_column(pls.name_of(0, x))
    label = pls.label_index
    for y in range(pls.dims[1]):
        cells = [pls.name_of(2, label[(x, y)]) if (x, y) in label else "[dim].[/dim]" for x in range(pls.dims[0])]
        table.add_row(pls.name_of(1, y), *cells)
    return table
