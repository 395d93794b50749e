import re

import pytest

from benchbayes import report
from benchbayes.errors import CycleError, DomainError, InputError
from benchbayes.speedup import PairwiseComparison, PriorSpec

UNIFORM = PriorSpec("uniform")


def bayes_record(l1, l2, decision95, decision99="inconclusive", e95=0.0, e99=0.0):
    return PairwiseComparison(
        lang1=l1,
        lang2=l2,
        prior=UNIFORM,
        endpoint95=e95,
        endpoint99=e99,
        decision95=decision95,
        decision99=decision99,
        median=0.0,
        mean=0.0,
    )


def parse_dot(text: str):
    """Minimal parser for the emitted DOT subset: nodes, edges, attributes."""
    lines = text.strip().splitlines()
    assert lines[0] == "digraph language_speed {"
    assert lines[-1] == "}"
    nodes, edges = [], []
    for line in lines[1:-1]:
        line = line.strip()
        if line.startswith("//"):
            continue
        edge = re.fullmatch(
            r'"([^"]+)" -> "([^"]+)" \[style=(solid|dashed), penwidth=([0-9.]+)\];', line
        )
        if edge:
            edges.append((edge.group(1), edge.group(2), edge.group(3), float(edge.group(4))))
            continue
        node = re.fullmatch(r'"([^"]+)";', line)
        assert node, f"unparseable line: {line!r}"
        nodes.append(node.group(1))
    return nodes, edges


class TestBuildGraph:
    def test_no_significant_pairs(self):
        records = [report.FreqPairRecord("A", "B", 0.8, -0.2)]
        g = report.build_graph(records)
        assert g.nodes == ("A", "B")
        assert g.edges == ()

    def test_single_bayes_edge_orientation(self):
        g = report.build_graph([bayes_record("A", "B", "lang1_faster", e95=-0.4)])
        assert len(g.edges) == 1
        edge = g.edges[0]
        assert (edge.src, edge.dst) == ("B", "A")  # slower -> faster
        assert not edge.strong
        assert edge.weight == pytest.approx(0.4)

    def test_strong_edge_uses_99_endpoint(self):
        g = report.build_graph(
            [bayes_record("A", "B", "lang1_faster", "lang1_faster", e95=-0.4, e99=-0.3)]
        )
        assert g.edges[0].strong
        assert g.edges[0].weight == pytest.approx(0.3)

    def test_freq_edge_levels(self):
        records = [
            report.FreqPairRecord("A", "B", 0.02, -0.5),
            report.FreqPairRecord("A", "C", 0.005, 0.7),
            report.FreqPairRecord("B", "C", 0.2, -0.1),
        ]
        g = report.build_graph(records)
        by_pair = {(e.src, e.dst): e for e in g.edges}
        assert set(by_pair) == {("B", "A"), ("A", "C")}
        assert not by_pair[("B", "A")].strong
        assert by_pair[("A", "C")].strong is True
        assert by_pair[("A", "C")].weight == pytest.approx(0.7)

    def test_more_edges_at_95_than_99(self):
        records = [
            report.FreqPairRecord("A", "B", 0.02, -0.5),
            report.FreqPairRecord("A", "C", 0.005, 0.7),
            report.FreqPairRecord("B", "C", 0.04, -0.1),
        ]
        g = report.build_graph(records)
        weak = sum(1 for e in g.edges)
        strong = sum(1 for e in g.edges if e.strong)
        assert weak >= strong

    def test_duplicate_pair_rejected(self):
        records = [
            report.FreqPairRecord("A", "B", 0.02, -0.5),
            report.FreqPairRecord("B", "A", 0.03, 0.5),
        ]
        with pytest.raises(InputError):
            report.build_graph(records)


def graph(nodes, edges):
    return report.LanguageGraph(
        tuple(nodes), tuple(report.Edge(a, b, strong, w) for a, b, strong, w in edges)
    )


class TestTransitiveReduction:
    def test_triangle_reduced(self):
        g = graph("ABC", [("A", "B", False, 0.1), ("B", "C", False, 0.2), ("A", "C", False, 0.9)])
        reduced, was_transitive = report.transitive_reduction(g)
        assert was_transitive
        assert {(e.src, e.dst) for e in reduced.edges} == {("A", "B"), ("B", "C")}

    def test_missing_shortcut_means_not_transitive(self):
        g = graph("ABC", [("A", "B", False, 0.1), ("B", "C", False, 0.2)])
        reduced, was_transitive = report.transitive_reduction(g)
        assert not was_transitive
        assert reduced == g

    def test_cycle_detected_and_named(self):
        g = graph("AB", [("A", "B", False, 0.1), ("B", "A", False, 0.1)])
        with pytest.raises(CycleError) as err:
            report.transitive_reduction(g)
        assert set(err.value.cycle) == {"A", "B"}

    def test_idempotent(self):
        g = graph(
            "ABCD",
            [
                ("A", "B", True, 0.5),
                ("B", "C", False, 0.2),
                ("A", "C", False, 0.4),
                ("C", "D", True, 0.6),
                ("A", "D", False, 0.3),
                ("B", "D", False, 0.1),
            ],
        )
        once, _ = report.transitive_reduction(g)
        twice, _ = report.transitive_reduction(once)
        assert once == twice

    def test_four_node_chain(self):
        edges = [
            ("A", "B", False, 0.1),
            ("B", "C", False, 0.1),
            ("C", "D", False, 0.1),
            ("A", "C", False, 0.1),
            ("A", "D", False, 0.1),
            ("B", "D", False, 0.1),
        ]
        reduced, was_transitive = report.transitive_reduction(graph("ABCD", edges))
        assert was_transitive
        assert {(e.src, e.dst) for e in reduced.edges} == {
            ("A", "B"),
            ("B", "C"),
            ("C", "D"),
        }


class TestEmitDot:
    def test_nodes_only(self):
        text = report.emit_dot(graph("BA", []))
        nodes, edges = parse_dot(text)
        assert nodes == ["A", "B"]
        assert edges == []

    def test_deterministic(self):
        g = graph("ABC", [("A", "B", True, 0.25), ("C", "B", False, 0.5)])
        assert report.emit_dot(g) == report.emit_dot(g)

    def test_weak_edge_rendering(self):
        text = report.emit_dot(graph("AB", [("A", "B", False, 0.5)]))
        line = next(l for l in text.splitlines() if "->" in l)
        assert "style=dashed" in line
        assert "penwidth=3" in line

    def test_roundtrip_through_minimal_parser(self):
        g = graph("ABCD", [("A", "B", True, 0.25), ("C", "D", False, 0.125)])
        nodes, edges = parse_dot(report.emit_dot(g))
        assert nodes == ["A", "B", "C", "D"]
        assert ("A", "B", "solid", 2.0) in edges
        assert ("C", "D", "dashed", 1.5) in edges


class TestEmitTable:
    def test_single_cell(self):
        text = report.emit_table([{"lang1": "A", "lang2": "B", "p": 0.25}], "csv")
        lines = text.strip().splitlines()
        assert lines[0] == "language,measure,A"
        assert lines[1] == "B,p,0.250"

    def test_three_decimal_formatting(self):
        text = report.emit_table([{"lang1": "A", "lang2": "B", "delta": -0.5}], "csv")
        assert "-0.500" in text

    def test_eight_languages_lower_triangle(self):
        langs = ["C", "C#", "F#", "Go", "Haskell", "Java", "Python", "Ruby"]
        records = [
            {"lang1": a, "lang2": b, "p": 0.5}
            for i, a in enumerate(langs)
            for b in langs[i + 1 :]
        ]
        assert len(records) == 28
        text = report.emit_table(records, "csv")
        lines = text.strip().splitlines()
        assert len(lines) == 1 + 7  # header + one p-row per non-first language
        populated = sum(1 for line in lines[1:] for cell in line.split(",")[2:] if cell)
        assert populated == 28

    def test_markdown_format(self):
        text = report.emit_table([{"lang1": "A", "lang2": "B", "p": 0.25}], "markdown")
        assert text.startswith("| language | measure | A |")

    def test_schema_mismatch(self):
        records = [
            {"lang1": "A", "lang2": "B", "p": 0.5},
            {"lang1": "A", "lang2": "C", "delta": 0.5},
        ]
        with pytest.raises(InputError):
            report.emit_table(records, "csv")

    def test_unordered_pair_rejected(self):
        with pytest.raises(InputError):
            report.emit_table([{"lang1": "B", "lang2": "A", "p": 0.5}], "csv")

    def test_unknown_format(self):
        with pytest.raises(DomainError):
            report.emit_table([{"lang1": "A", "lang2": "B", "p": 0.5}], "html")
