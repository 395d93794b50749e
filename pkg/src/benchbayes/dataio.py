"""Loading and pairing of the two study data shapes.

Performance data: per-(language, task) sets of measured running times,
possibly several variants per cell. Experiment data: one row per
(subject, session) with categorical predictors and a count outcome.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import (
    DomainError,
    EmptyComparisonError,
    FormatError,
    RowError,
    UnknownLanguageError,
)

PERFORMANCE_HEADER = ("language", "task", "variant", "seconds")
EXPERIMENT_HEADER = ("subject", "treatment", "system", "lab", "experience", "ability", "fixed")

TREATMENTS = ("manual", "auto")
SYSTEMS = ("J", "X")
LABS = ("1", "2")
EXPERIENCES = ("B", "M")
ABILITIES = ("low", "medium", "high")


@dataclass(frozen=True)
class PerformanceDataset:
    """Measured running times keyed by (language, task)."""

    measurements: dict[tuple[str, str], tuple[float, ...]]

    def __post_init__(self):
        if not self.measurements:
            raise DomainError("performance dataset needs at least one (language, task) entry")
        for (lang, task), times in self.measurements.items():
            if not lang or not task:
                raise DomainError("language and task names must be nonempty")
            if not times:
                raise DomainError(f"empty runtime list for ({lang}, {task})")
            if any(not math.isfinite(t) or t <= 0 for t in times):
                raise DomainError(f"nonpositive or non-finite runtime for ({lang}, {task})")

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted({lang for lang, _ in self.measurements}))

    def tasks(self, language: str) -> tuple[str, ...]:
        found = sorted(task for lang, task in self.measurements if lang == language)
        if not found:
            raise UnknownLanguageError(language)
        return tuple(found)

    def optimal(self, language: str, task: str) -> float:
        """Fastest measured time for the cell (the per-cell "optimal" value)."""
        return min(self.measurements[(language, task)])


@dataclass(frozen=True)
class ExperimentRow:
    subject: str
    treatment: str
    system: str
    lab: str
    experience: str
    ability: str
    fixed: int


@dataclass(frozen=True)
class ExperimentTable:
    rows: tuple[ExperimentRow, ...]

    def __post_init__(self):
        if len(self.rows) < 2:
            raise DomainError("experiment table needs at least 2 rows")


@dataclass(frozen=True)
class PairedSpeedups:
    """Per-task inverse speedups of lang1 versus lang2 on their shared tasks."""

    lang1: str
    lang2: str
    tasks: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.tasks) != len(self.values):
            raise DomainError("one speedup value per task required")
        if any(not -1.0 < v < 1.0 for v in self.values):
            raise DomainError("inverse speedups must lie in (-1, 1)")

    def negated(self) -> "PairedSpeedups":
        return PairedSpeedups(
            self.lang2, self.lang1, self.tasks, tuple(-v for v in self.values)
        )


def _text_lines(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def load_performance_csv(source) -> PerformanceDataset:
    """Parse a `language,task,variant,seconds` CSV byte stream."""
    reader = csv.reader(_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty performance CSV") from None
    if tuple(h.strip() for h in header) != PERFORMANCE_HEADER:
        raise FormatError(
            f"expected header {','.join(PERFORMANCE_HEADER)!r}, got {','.join(header)!r}"
        )
    cells: dict[tuple[str, str], list[float]] = {}
    seen: set[tuple[str, str, str]] = set()
    n_rows = 0
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise RowError(lineno, f"expected 4 fields, got {len(row)}")
        lang, task, variant, seconds = (f.strip() for f in row)
        if not lang or not task:
            raise RowError(lineno, "language and task must be nonempty")
        key3 = (lang, task, variant)
        if key3 in seen:
            raise RowError(lineno, f"duplicate row for {key3}")
        seen.add(key3)
        try:
            value = float(seconds)
        except ValueError:
            raise RowError(lineno, f"seconds is not a number: {seconds!r}") from None
        if not math.isfinite(value) or value <= 0:
            raise RowError(lineno, f"seconds must be a positive finite number, got {seconds}")
        cells.setdefault((lang, task), []).append(value)
        n_rows += 1
    if n_rows == 0:
        raise FormatError("performance CSV has a header but no data rows")
    return PerformanceDataset({k: tuple(v) for k, v in cells.items()})


def dump_performance_csv(ds: PerformanceDataset, stream) -> None:
    """Re-serialize a dataset; inverse of load up to variant labels."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(PERFORMANCE_HEADER)
    for (lang, task) in sorted(ds.measurements):
        for i, t in enumerate(ds.measurements[(lang, task)], start=1):
            writer.writerow([lang, task, i, repr(t)])


def _parse_enum(lineno: int, field_name: str, raw: str, allowed: tuple[str, ...]) -> str:
    for candidate in allowed:
        if raw.strip().lower() == candidate.lower():
            return candidate
    raise RowError(lineno, f"unknown {field_name} value {raw!r} (allowed: {allowed})")


def load_experiment_csv(source) -> ExperimentTable:
    """Parse a `subject,treatment,system,lab,experience,ability,fixed` CSV."""
    reader = csv.reader(_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty experiment CSV") from None
    if tuple(h.strip() for h in header) != EXPERIMENT_HEADER:
        raise FormatError(
            f"expected header {','.join(EXPERIMENT_HEADER)!r}, got {','.join(header)!r}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 7:
            raise RowError(lineno, f"expected 7 fields, got {len(row)}")
        subject, treatment, system, lab, experience, ability, fixed = (f.strip() for f in row)
        try:
            count = int(fixed)
        except ValueError:
            raise RowError(lineno, f"fixed is not an integer: {fixed!r}") from None
        if count < 0:
            raise RowError(lineno, f"fixed must be nonnegative, got {count}")
        rows.append(
            ExperimentRow(
                subject=subject,
                treatment=_parse_enum(lineno, "treatment", treatment, TREATMENTS),
                system=_parse_enum(lineno, "system", system, SYSTEMS),
                lab=_parse_enum(lineno, "lab", lab, LABS),
                experience=_parse_enum(lineno, "experience", experience, EXPERIENCES),
                ability=_parse_enum(lineno, "ability", ability, ABILITIES),
                fixed=count,
            )
        )
    if len(rows) < 2:
        raise FormatError(f"experiment CSV needs at least 2 data rows, got {len(rows)}")
    return ExperimentTable(tuple(rows))


def inverse_speedup(a: float, b: float) -> float:
    """Signed, bounded encoding of the relative speed of two runtimes.

    Negative means the first runtime is smaller (first language faster);
    1/(1 - |result|) recovers the faster-to-slower speedup ratio.
    """
    if not (a > 0 and math.isfinite(a)) or not (b > 0 and math.isfinite(b)):
        raise DomainError(f"runtimes must be positive and finite, got {a}, {b}")
    if a == b:
        return 0.0
    sign = 1.0 if a > b else -1.0
    return sign * (1.0 - min(a, b) / max(a, b))


def paired_speedups(ds: PerformanceDataset, lang1: str, lang2: str) -> PairedSpeedups:
    """Inverse speedups of lang1 vs lang2 over their shared tasks, optimal data."""
    langs = ds.languages
    for lang in (lang1, lang2):
        if lang not in langs:
            raise UnknownLanguageError(lang)
    common = sorted(set(ds.tasks(lang1)) & set(ds.tasks(lang2)))
    if not common:
        raise EmptyComparisonError(f"{lang1} and {lang2} share no tasks")
    values = tuple(
        inverse_speedup(ds.optimal(lang1, t), ds.optimal(lang2, t)) for t in common
    )
    return PairedSpeedups(lang1, lang2, tuple(common), values)


def complete_task_matrix(ds: PerformanceDataset) -> dict[str, dict[str, float]]:
    """Optimal runtime per cell, restricted to tasks every language implements."""
    langs = ds.languages
    shared = set(ds.tasks(langs[0]))
    for lang in langs[1:]:
        shared &= set(ds.tasks(lang))
    return {
        task: {lang: ds.optimal(lang, task) for lang in langs}
        for task in sorted(shared)
    }
