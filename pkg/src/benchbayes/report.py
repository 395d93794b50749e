"""Language relationship graphs and table rendering.

Graphs point from the slower to the faster language; a solid edge marks a
difference supported at the 99% level, a dashed edge one supported only at
95%. Edge thickness scales with the effect magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CycleError, DomainError, InputError
from .speedup import PairwiseComparison


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    strong: bool
    weight: float


@dataclass(frozen=True)
class LanguageGraph:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        # unordered-pair uniqueness is enforced where records enter, in
        # build_graph; antiparallel edges must stay constructible so that
        # transitive_reduction can report them as a cycle
        seen = set()
        for e in self.edges:
            if e.src not in self.nodes or e.dst not in self.nodes:
                raise DomainError(f"edge {e.src}->{e.dst} references an unknown node")
            if e.src == e.dst:
                raise DomainError(f"self edge on {e.src}")
            if (e.src, e.dst) in seen:
                raise DomainError(f"duplicate edge {e.src}->{e.dst}")
            seen.add((e.src, e.dst))
            if e.weight < 0:
                raise DomainError("edge weight must be nonnegative")


@dataclass(frozen=True)
class FreqPairRecord:
    """Frequentist comparison of one pair: adjusted p-value plus effect sign."""

    lang1: str
    lang2: str
    p_value: float
    delta: float  # negative when lang1 is faster


@dataclass(frozen=True)
class LevelRules:
    weak: float = 0.05
    strong: float = 0.01


def build_graph(results, levels: LevelRules | None = None) -> LanguageGraph:
    """Edges for significant pairs, oriented from slower to faster language."""
    levels = levels or LevelRules()
    nodes: set[str] = set()
    seen_pairs: set[frozenset] = set()
    edges: list[Edge] = []
    for record in results:
        nodes.update((record.lang1, record.lang2))
        key = frozenset((record.lang1, record.lang2))
        if key in seen_pairs:
            raise InputError(f"duplicate record for pair {record.lang1}/{record.lang2}")
        seen_pairs.add(key)
        edge = _edge_for(record, levels)
        if edge is not None:
            edges.append(edge)
    return LanguageGraph(tuple(sorted(nodes)), tuple(edges))


def _edge_for(record, levels: LevelRules) -> Edge | None:
    if isinstance(record, PairwiseComparison):
        if record.decision95 == "inconclusive":
            return None
        strong = record.decision99 != "inconclusive"
        weight = abs(record.endpoint99 if strong else record.endpoint95)
        decision = record.decision99 if strong else record.decision95
        faster = record.lang1 if decision == "lang1_faster" else record.lang2
        slower = record.lang2 if decision == "lang1_faster" else record.lang1
        return Edge(slower, faster, strong, weight)
    if isinstance(record, FreqPairRecord):
        if record.p_value >= levels.weak or record.delta == 0.0:
            return None
        faster = record.lang1 if record.delta < 0 else record.lang2
        slower = record.lang2 if record.delta < 0 else record.lang1
        return Edge(slower, faster, record.p_value < levels.strong, abs(record.delta))
    raise InputError(f"cannot build an edge from {type(record).__name__}")


def _find_cycle(adjacency: dict[str, list[str]]) -> list[str] | None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in adjacency}
    parent: dict[str, str] = {}

    for root in adjacency:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adjacency[root]))]
        color[root] = GRAY
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if color[child] == WHITE:
                    color[child] = GRAY
                    parent[child] = node
                    stack.append((child, iter(adjacency[child])))
                    advanced = True
                    break
                if color[child] == GRAY:
                    cycle = [child, node]
                    cursor = node
                    while cursor != child:
                        cursor = parent[cursor]
                        cycle.append(cursor)
                    return cycle[::-1]
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def transitive_reduction(g: LanguageGraph) -> tuple[LanguageGraph, bool]:
    """Drop edges implied by 2-step paths, if the relation is transitive.

    Returns the (possibly reduced) graph and whether the input relation was
    transitive; a non-transitive input comes back unchanged.
    """
    adjacency = {node: [] for node in g.nodes}
    for e in g.edges:
        adjacency[e.src].append(e.dst)
    cycle = _find_cycle(adjacency)
    if cycle is not None:
        raise CycleError(cycle)

    edge_set = {(e.src, e.dst) for e in g.edges}
    implied = set()
    for a in g.nodes:
        for b in adjacency[a]:
            for c in adjacency[b]:
                if a != c:
                    implied.add((a, c))
    if not implied <= edge_set:
        return g, False
    kept = tuple(e for e in g.edges if (e.src, e.dst) not in implied)
    return LanguageGraph(g.nodes, kept), True


def emit_dot(g: LanguageGraph) -> str:
    """Deterministic DOT rendering; byte-identical for equal graphs."""
    lines = [
        "digraph language_speed {",
        "  // an edge points from the slower to the faster language",
    ]
    for node in sorted(g.nodes):
        lines.append(f'  "{node}";')
    for e in sorted(g.edges, key=lambda e: (e.src, e.dst)):
        style = "solid" if e.strong else "dashed"
        width = 1.0 + 4.0 * e.weight
        lines.append(f'  "{e.src}" -> "{e.dst}" [style={style}, penwidth={width:g}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_table(records, fmt: str) -> str:
    """Lower-triangular pairwise matrix, one block row per measure.

    Records are mappings with `lang1`, `lang2`, and a shared set of numeric
    measure keys; `lang1` must sort before `lang2`.
    """
    if fmt not in ("csv", "markdown"):
        raise DomainError(f"unknown table format {fmt!r}")
    records = list(records)
    if not records:
        raise InputError("no records to tabulate")
    measures = [k for k in records[0] if k not in ("lang1", "lang2")]
    if not measures:
        raise InputError("records carry no measures")
    cells: dict[tuple[str, str], dict] = {}
    languages: set[str] = set()
    for record in records:
        if set(record) != set(records[0]):
            raise InputError("records do not share a schema")
        lang1, lang2 = record["lang1"], record["lang2"]
        if not lang1 < lang2:
            raise InputError(f"pair ({lang1}, {lang2}) must be ordered lang1 < lang2")
        if (lang1, lang2) in cells:
            raise InputError(f"duplicate record for pair {lang1}/{lang2}")
        languages.update((lang1, lang2))
        cells[(lang1, lang2)] = record

    ordered = sorted(languages)
    columns = ordered[:-1]
    rows = []
    header = ["language", "measure"] + columns
    for lang2 in ordered[1:]:
        for measure in measures:
            row = [lang2, measure]
            for lang1 in columns:
                record = cells.get((lang1, lang2))
                if record is None or not lang1 < lang2:
                    row.append("")
                else:
                    row.append(_fmt_cell(record[measure]))
            rows.append(row)

    if fmt == "csv":
        return "\n".join(",".join(row) for row in [header] + rows) + "\n"
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(out) + "\n"


def _fmt_cell(value) -> str:
    if isinstance(value, str):
        return value
    return f"{float(value):.3f}"
