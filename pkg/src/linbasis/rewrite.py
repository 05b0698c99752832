"""Graph inferences as rewrite rules; instance matching; derivation checking.

An inference (R, S) is an instance of a rule (L, M) when some node set that is
a module of both R and S, with R and S identical outside it, splits into
|L| nonempty labelled parts whose cross-edges realize L on the left and M on
the right, with each part inducing the same subgraph on both sides.  On
P4-free graphs this coincides with one-step term rewriting modulo AC.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .formula import FormulaInference, variables
from .graph import (
    SizeMismatchError,
    Web,
    from_numeric,
    iota,
    is_module,
    to_web,
    to_web_with_order,
)
from .isomorphism import least_inference_form


class StepError(ValueError):
    """A derivation step is structurally unusable (unknown rule, bad size)."""

    def __init__(self, index: int, reason: str) -> None:
        super().__init__(f"step {index}: {reason}")
        self.index = index
        self.reason = reason


@dataclass(frozen=True)
class GraphInference:
    """An ordered pair of webs on the same node count."""

    lhs: Web
    rhs: Web

    def __post_init__(self) -> None:
        if self.lhs.n != self.rhs.n:
            raise SizeMismatchError(f"node counts differ: {self.lhs.n} vs {self.rhs.n}")

    @property
    def n(self) -> int:
        return self.lhs.n


def format_graph_inference(inf: GraphInference) -> str:
    """External text form "n N_lhs N_rhs"."""
    return f"{inf.n} {inf.lhs.edges} {inf.rhs.edges}"


def parse_graph_inference(text: str) -> GraphInference:
    parts = text.split()
    if len(parts) != 3:
        raise ValueError(f"inference text must be 'n N_lhs N_rhs', got {text!r}")
    n = int(parts[0])
    return GraphInference(from_numeric(n, int(parts[1])), from_numeric(n, int(parts[2])))


def inference_webs(inf: FormulaInference) -> tuple[GraphInference, tuple[str, ...]]:
    """Web pair of a constant-free negation-free inference on shared variables.

    Nodes follow the first-occurrence order of the LHS so both sides use one
    mapping, which is returned.
    """
    if variables(inf.lhs) != variables(inf.rhs):
        raise ValueError("inference sides must share one variable set")
    lhs_web, order = to_web(inf.lhs)
    rhs_web = to_web_with_order(inf.rhs, order)
    return GraphInference(lhs_web, rhs_web), order


_SWITCH_TEXT = ("x & (y | z)", "(x & y) | z")
_MEDIAL_TEXT = ("(w & x) | (y & z)", "(w | y) & (x | z)")


def switch_rule() -> GraphInference:
    """Switch as a web rewrite, built from its formula sides."""
    from .formula import parse

    inf, _ = inference_webs(FormulaInference(parse(_SWITCH_TEXT[0]), parse(_SWITCH_TEXT[1])))
    return inf


def medial_rule() -> GraphInference:
    """Medial as a web rewrite, built from its formula sides."""
    from .formula import parse

    inf, _ = inference_webs(FormulaInference(parse(_MEDIAL_TEXT[0]), parse(_MEDIAL_TEXT[1])))
    return inf


def _pair_mask(members: int, n: int) -> int:
    mask = 0
    for y in range(n):
        if not (members >> y) & 1:
            continue
        for x in range(y):
            if (members >> x) & 1:
                mask |= 1 << iota(x, y)
    return mask


def shared_modules(candidate: GraphInference, min_size: int) -> list[int]:
    """NodeSets that are modules of both sides, with the sides identical
    outside (all differing edges inside the set), ascending by bit pattern."""
    n = candidate.n
    diff = candidate.lhs.edges ^ candidate.rhs.edges
    out = []
    for members in range(1, 1 << n):
        if bin(members).count("1") < min_size:
            continue
        if diff & ~_pair_mask(members, n):
            continue
        if is_module(candidate.lhs, members) and is_module(candidate.rhs, members):
            out.append(members)
    return out


def _rule_edge_tables(rule: GraphInference) -> tuple[list[list[bool]], list[list[bool]]]:
    k = rule.n
    left = [[rule.lhs.has_edge(x, y) for y in range(k)] for x in range(k)]
    right = [[rule.rhs.has_edge(x, y) for y in range(k)] for x in range(k)]
    return left, right


def _match_partition(
    lhs: Web,
    rhs: Web,
    nodes: Sequence[int],
    rule_left: list[list[bool]],
    rule_right: list[list[bool]],
    k: int,
) -> bool:
    """Backtracking search for a partition into k nonempty labelled parts with
    cross-edges matching the rule on both sides and equal within-part edges."""
    total = len(nodes)
    assign = [-1] * total
    counts = [0] * k

    def feasible(i: int, part: int) -> bool:
        b = nodes[i]
        for j in range(i):
            a = nodes[j]
            el = lhs.has_edge(a, b)
            er = rhs.has_edge(a, b)
            pj = assign[j]
            if pj == part:
                if el != er:
                    return False
            elif el != rule_left[pj][part] or er != rule_right[pj][part]:
                return False
        return True

    def search(i: int) -> bool:
        if i == total:
            return all(c > 0 for c in counts)
        empties = sum(1 for c in counts if c == 0)
        if total - i < empties:
            return False
        for part in range(k):
            if feasible(i, part):
                assign[i] = part
                counts[part] += 1
                if search(i + 1):
                    return True
                counts[part] -= 1
                assign[i] = -1
        return False

    return search(0)


def is_instance(candidate: GraphInference, rule: GraphInference) -> bool:
    """candidate rewrites from its lhs to its rhs by one application of rule."""
    if rule.n == 0 or rule.n > candidate.n:
        return False
    rule_left, rule_right = _rule_edge_tables(rule)
    for members in shared_modules(candidate, rule.n):
        nodes = [x for x in range(candidate.n) if (members >> x) & 1]
        if _match_partition(candidate.lhs, candidate.rhs, nodes, rule_left, rule_right, rule.n):
            return True
    return False


def apply_rule_all(g: Web, rule: GraphInference) -> list[Web]:
    """All h with (g, h) an instance of rule, constructed from every module
    and partition matching the rule's LHS, sorted by numeric."""
    if rule.n == 0 or rule.n > g.n:
        return []
    rule_left, rule_right = _rule_edge_tables(rule)
    k = rule.n
    results: set[int] = set()

    for members in range(1, 1 << g.n):
        if bin(members).count("1") < k or not is_module(g, members):
            continue
        nodes = [x for x in range(g.n) if (members >> x) & 1]
        total = len(nodes)
        assign = [-1] * total
        counts = [0] * k

        def emit() -> None:
            edges = g.edges
            for j in range(total):
                for i in range(j):
                    if assign[i] != assign[j]:
                        bit = 1 << iota(*sorted((nodes[i], nodes[j])))
                        if rule_right[assign[i]][assign[j]]:
                            edges |= bit
                        else:
                            edges &= ~bit
            results.add(edges)

        def feasible(i: int, part: int) -> bool:
            b = nodes[i]
            for j in range(i):
                pj = assign[j]
                if pj != part and g.has_edge(nodes[j], b) != rule_left[pj][part]:
                    return False
            return True

        def search(i: int) -> None:
            if i == total:
                if all(c > 0 for c in counts):
                    emit()
                return
            if total - i < sum(1 for c in counts if c == 0):
                return
            for part in range(k):
                if feasible(i, part):
                    assign[i] = part
                    counts[part] += 1
                    search(i + 1)
                    counts[part] -= 1
                    assign[i] = -1

        search(0)

    return [Web(g.n, edges) for edges in sorted(results)]


@dataclass(frozen=True)
class NamedRule:
    name: str
    inference: GraphInference


@dataclass(frozen=True)
class RuleSet:
    """Named ordered rules, stored in least-inference form."""

    name: str
    rules: tuple[NamedRule, ...]
    source: str  # builtin | file | basis(n)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, name: str) -> GraphInference:
        for rule in self.rules:
            if rule.name == name:
                return rule.inference
        raise KeyError(name)

    def names(self) -> list[str]:
        return [rule.name for rule in self.rules]

    def lines(self) -> list[str]:
        return [
            f"{r.name}; {r.inference.n}; {r.inference.lhs.edges}; {r.inference.rhs.edges}"
            for r in self.rules
        ]

    @property
    def digest(self) -> str:
        blob = "\n".join(self.lines()).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_rules(cls, name: str, pairs: Sequence[tuple[str, GraphInference]], source: str) -> "RuleSet":
        rules = tuple(NamedRule(rname, least_inference_form(inf)) for rname, inf in pairs)
        return cls(name=name, rules=rules, source=source)

    @classmethod
    def builtin_sm(cls) -> "RuleSet":
        return cls.from_rules("sm", [("s", switch_rule()), ("m", medial_rule())], "builtin")

    @classmethod
    def empty(cls, name: str = "empty") -> "RuleSet":
        return cls(name=name, rules=(), source="builtin")

    @classmethod
    def from_file(cls, path: str | Path) -> "RuleSet":
        path = Path(path)
        pairs = []
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = [part.strip() for part in line.split(";")]
            if len(fields) != 4:
                raise ValueError(f"rule line must be 'name; n; N_lhs; N_rhs', got {line!r}")
            rname, n, lhs, rhs = fields
            n = int(n)
            pairs.append((rname, GraphInference(from_numeric(n, int(lhs)), from_numeric(n, int(rhs)))))
        return cls.from_rules(path.stem, pairs, "file")

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n")


def match_rule(inf: GraphInference, rules: RuleSet) -> str | None:
    """Name of the first rule (in set order) that inf is an instance of."""
    for rule in rules:
        if is_instance(inf, rule.inference):
            return rule.name
    return None


def derivable_one_step(inf: GraphInference, rules: RuleSet) -> bool:
    return match_rule(inf, rules) is not None


@dataclass(frozen=True)
class DerivationStep:
    rule: str | None  # None: an AC step (identical webs)
    web: Web


@dataclass(frozen=True)
class Derivation:
    n: int
    start: Web
    steps: tuple[DerivationStep, ...]

    @property
    def end(self) -> Web:
        return self.steps[-1].web if self.steps else self.start


@dataclass(frozen=True)
class StepReport:
    index: int
    rule: str | None
    ok: bool
    reason: str


def check_derivation(d: Derivation, rules: RuleSet) -> tuple[bool, list[StepReport]]:
    """Verify each step: AC steps need web equality, rule steps are checked
    with is_instance against the named rule.  Unknown names raise StepError."""
    reports = []
    previous = d.start
    for index, step in enumerate(d.steps):
        if step.web.n != d.n:
            raise StepError(index, f"web on {step.web.n} nodes in a {d.n}-node derivation")
        if step.rule is None:
            ok = step.web.edges == previous.edges
            reason = "webs equal" if ok else "ac step changes the web"
        else:
            try:
                rule = rules[step.rule]
            except KeyError:
                ok = False
                reason = f"rule {step.rule!r} not in the set"
            else:
                ok = is_instance(GraphInference(previous, step.web), rule)
                reason = "instance" if ok else f"not an instance of {step.rule}"
        reports.append(StepReport(index, step.rule, ok, reason))
        previous = step.web
    return all(r.ok for r in reports), reports


def format_derivation(d: Derivation) -> str:
    lines = [f"n={d.n}", f"start -> {d.start.edges}"]
    for step in d.steps:
        if step.rule is None:
            lines.append(f"ac -> {step.web.edges}")
        else:
            lines.append(f"rule {step.rule} -> {step.web.edges}")
    return "\n".join(lines) + "\n"


def parse_derivation(text: str) -> Derivation:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("derivation must start with 'n=<n>'")
    n = int(lines[0][2:])
    if len(lines) < 2 or not lines[1].startswith("start ->"):
        raise ValueError("derivation needs a 'start -> N' line")
    start = from_numeric(n, int(lines[1].split("->")[1]))
    steps = []
    for line in lines[2:]:
        head, _, value = line.partition("->")
        head = head.strip()
        web = from_numeric(n, int(value))
        if head == "ac":
            steps.append(DerivationStep(None, web))
        elif head.startswith("rule "):
            steps.append(DerivationStep(head[5:].strip(), web))
        else:
            raise ValueError(f"bad derivation line {line!r}")
    return Derivation(n, start, tuple(steps))
