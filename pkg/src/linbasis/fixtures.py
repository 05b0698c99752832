"""Canonical catalogue of the named inferences used across the test suite.

Everything is built from formula text (never hand-packed bit patterns) except
the two rule lists that exist only as labelled graphs, which are decoded from
their figure strings.  catalogue() validates every formula inference on first
use; the 36-variable pigeonhole inference is the one entry whose validity is
too expensive to check eagerly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .formula import (
    And,
    FormulaInference,
    LinearFormula,
    Or,
    Var,
    dual_inference,
    is_valid,
    parse,
)
from .graph import Web, iota, web_from_edges
from .rewrite import GraphInference, RuleSet, inference_webs

_EQ1 = (
    "(z | (w & w')) & ((x & x') | ((y | y') & z'))",
    "(z & (x | y)) | ((w | y') & ((w' & x') | z'))",
)
_EQ2 = (
    "(z | (w & w')) & ((x & x') | ((y | y') & z'))",
    "((z | (w & x)) & (x' | y)) | ((w' | y') & z')",
)
_EQ3 = (
    "((w & w') | (x & x')) & ((y & y') | (z & z'))",
    "(w & y) | ((x | (w' & z')) & ((x' & y') | z))",
)
_TENVAR = (
    "(z | (w & w')) & (y | y') & (u | u') & ((x & x') | z')",
    "(z & (x | y)) | (u & x') | (w' & u') | ((w | y') & z')",
)
_NINE_LHS_A = "((x & x') | x'') & ((y & (y' | y'')) | (z & (z' | z'')))"
_NINE_LHS_B = "((w & (x | x')) | w') & ((y & y') | (z & (z' | z'')))"
_NINE = {
    "nine_1": (_NINE_LHS_A, "((z | y'') & (x'' | (x' & z'))) | ((x | y') & (y | z''))"),
    "nine_2": (_NINE_LHS_A, "((z | y'') & (x'' | z')) | ((x' | y') & (y | (x & z'')))"),
    "nine_3": (_NINE_LHS_A, "(y & (x | y')) | ((z & (x' | z')) | (x'' & (y'' | z'')))"),
    "nine_4": (_NINE_LHS_B, "((w' | (w & (x | y))) & (y' | z')) | (z & (x' | z''))"),
    "nine_5": (_NINE_LHS_B, "((w' | (x' & y)) & (y' | z')) | ((x | z) & (w | z''))"),
}

_FORMULA_INFERENCES = {
    "switch": ("x & (y | z)", "(x & y) | z"),
    "medial": ("(w & x) | (y & z)", "(w | y) & (x | z)"),
    "mix": ("x & y", "x | y"),
    "tenvar": _TENVAR,
    "eq1": _EQ1,
    "eq2": _EQ2,
    "eq3": _EQ3,
    **_NINE,
}

# Rule lists that the source presents only as labelled graphs, as strings of
# edge colours in row-major pair order (0,1),(0,2),...,(0,n-1),(1,2),...
_G4_STRINGS = [
    ("g4_1", 4, "ggrrgg", "rgrrgg"),
    ("g4_2", 4, "rgrrgg", "rgrrgr"),
]
_G5_STRINGS = [
    ("g5_1", 5, "ggrrrggggg", "ggrrrrgggg"),
    ("g5_2", 5, "rgrrrggggg", "rgrrrggrgg"),
    ("g5_3", 5, "grgrrrgggg", "gggrgrgggg"),
    ("g5_4", 5, "grgrrrgggg", "grrrrrgggg"),
    ("g5_5", 5, "grgrrrgggg", "grgrrrgggr"),
    ("g5_6", 5, "rrgrrrgggg", "grgrgrgggg"),
    ("g5_7", 5, "rrgrrrgggg", "rrgrrrgggr"),
    ("g5_8", 5, "grrrrrgggg", "grgrrggggg"),
    ("g5_9", 5, "rrrrrrgggg", "rrgrrrgggg"),
    ("g5_10", 5, "rrgrrrgrgg", "rrgrrrgggg"),
    ("g5_11", 5, "rrgrrrgrgg", "rggrrrgrgg"),
    ("g5_12", 5, "ggrrrgrrgg", "ggrgrggrgg"),
    ("g5_13", 5, "rgrrrgrrgg", "ggrrrggrgg"),
    ("g5_14", 5, "rgrrrgrrgg", "rggrrgrggg"),
    ("g5_15", 5, "rrrrrgrrgg", "rrrgrgrrgg"),
    ("g5_16", 5, "grrrrrrrgg", "grrrrgrrgg"),
]

# Appendix analyses: every single-step rewrite of an 8-variable inference's
# side, with the assignment that separates it from the other side.
_EQ1_LHS_CASES = [
    ("m", "(z | (w & w')) & (x | y | y') & (x' | z')", ("x'", "y'", "z")),
    ("m", "(z | (w & w')) & (x | z') & (x' | y | y')", ("x'", "z", "z'")),
    ("s", "(z | (w & w')) & ((x & x') | y | (y' & z'))", ("w", "w'", "y")),
    ("s", "(z | (w & w')) & ((x & x') | y' | (y & z'))", ("y'", "z")),
    ("s", "z | (((x & x') | ((y | y') & z')) & (w & w'))", ("z",)),
    ("s", "(w & w') | (((x & x') | ((y | y') & z')) & z)", ("w", "w'")),
    ("s", "(x & x') | ((z | (w & w')) & ((y | y') & z'))", ("x", "x'")),
    ("s", "((y | y') & z') | ((z | (w & w')) & (x & x'))", ("y", "z'")),
]
_EQ2_LHS_CASES = [
    ("m", "(z | (w & w')) & (x | y | y') & (x' | z')", ("x", "z", "z'")),
    ("m", "(z | (w & w')) & (x | z') & (x' | y | y')", ("x", "y'", "z")),
    ("s", "(z | (w & w')) & ((x & x') | y | (y' & z'))", ("w", "w'", "y")),
    ("s", "(z | (w & w')) & ((x & x') | y' | (y & z'))", ("y'", "z")),
    ("s", "z | (((x & x') | ((y | y') & z')) & (w & w'))", ("z",)),
    ("s", "(w & w') | (((x & x') | ((y | y') & z')) & z)", ("w", "w'")),
    ("s", "(x & x') | ((z | (w & w')) & ((y | y') & z'))", ("x", "x'")),
    ("s", "((y | y') & z') | ((z | (w & w')) & (x & x'))", ("y", "z'")),
]
_EQ3_LHS_CASES = [
    # the first countermodel corrects a transposition in the source's table
    ("m", "(w | x) & (w' | x') & ((y & y') | (z & z'))", ("x", "w'", "y", "y'")),
    ("m", "(w | x') & (w' | x) & ((y & y') | (z & z'))", ("w'", "x'", "y", "y'")),
    ("m", "((w & w') | (x & x')) & (y | z) & (y' | z')", ("x", "x'", "y", "z'")),
    ("m", "((w & w') | (x & x')) & (y | z') & (y' | z)", ("w", "w'", "y'", "z'")),
    ("s", "(w & w') | (((y & y') | (z & z')) & (x & x'))", ("w", "w'")),
    ("s", "(x & x') | (((y & y') | (z & z')) & (w & w'))", ("x", "x'")),
    ("s", "(y & y') | (((w & w') | (x & x')) & (z & z'))", ("y", "y'")),
    ("s", "(z & z') | (((w & w') | (x & x')) & (y & y'))", ("z", "z'")),
]
# Rewrites leading *to* eq3's RHS: the countermodel separates eq3's LHS from
# the interpolating formula.
_EQ3_RHS_CASES = [
    ("m", "(w & y) | (x & x' & y') | (w' & z' & z)", ("x", "x'", "z", "z'")),
    ("m", "(w & y) | (x & z) | (w' & z' & x' & y')", ("w", "w'", "z", "z'")),
    ("s", "(w & y) | ((w' & (z' | x)) & ((x' & y') | z))", ("x", "x'", "y", "y'")),
    ("s", "(w & y) | ((z' & (w' | x)) & ((x' & y') | z))", ("x", "x'", "y", "y'")),
    ("s", "(w & y) | ((x | (w' & z')) & (x' & (y' | z)))", ("w", "w'", "z", "z'")),
    ("s", "(w & y) | ((x | (w' & z')) & (y' & (x' | z)))", ("w", "w'", "z", "z'")),
    ("s", "w & (y | ((x | (w' & z')) & ((x' & y') | z)))", ("x", "x'", "z", "z'")),
    ("s", "y & (w | ((x | (w' & z')) & ((x' & y') | z)))", ("x", "x'", "z", "z'")),
    ("s", "(x | (w' & z')) & (((x' & y') | z) | (w & y))", ("w", "w'", "y", "y'")),
    ("s", "((x' & y') | z) & ((x | (w' & z')) | (w & y))", ("w", "w'", "y", "y'")),
]

# The worked derivations of the 10-variable inference from the 8-variable ones.
_TENVAR_STEPS_EQ1 = [
    ("s", "(z | (w & w')) & ((x & x') | ((y | y') & z')) & (u | u')"),
    ("eq1", "((z & (x | y)) | ((w | y') & ((w' & x') | z'))) & (u | u')"),
    ("s", "((z & (x | y)) | (w' & x') | ((w | y') & z')) & (u | u')"),
    ("s", "(z & (x | y)) | (w' & x' & (u | u')) | ((w | y') & z')"),
    ("s", "(z & (x | y)) | (w' & ((x' & u) | u')) | ((w | y') & z')"),
    ("s", "(z & (x | y)) | (u & x') | (w' & u') | ((w | y') & z')"),
]
_TENVAR_STEPS_EQ2 = [
    ("s", "(z | (w & w')) & ((x & x') | ((y | y') & z')) & (u | u')"),
    ("eq2", "(((z | (w' & x')) & (x | y)) | ((w | y') & z')) & (u | u')"),
    ("s", "((z & (x | y)) | (w' & x') | ((w | y') & z')) & (u | u')"),
    ("s", "(z & (x | y)) | (w' & x' & (u | u')) | ((w | y') & z')"),
    ("s", "(z & (x | y)) | (w' & ((x' & u) | u')) | ((w | y') & z')"),
    ("s", "(z & (x | y)) | (u & x') | (w' & u') | ((w | y') & z')"),
]


@dataclass(frozen=True)
class InferenceFixture:
    name: str
    formulas: FormulaInference
    webs: GraphInference
    variable_order: tuple[str, ...]


@dataclass(frozen=True)
class CountermodelCase:
    rule: str  # which rewrite produced the variant side
    lhs: LinearFormula
    rhs: LinearFormula
    countermodel: frozenset[str]


@dataclass(frozen=True)
class DerivationFixture:
    name: str
    rule_names: tuple[str, ...]
    start: LinearFormula
    steps: tuple[tuple[str, LinearFormula], ...]
    variable_order: tuple[str, ...]


def web_from_figure(n: int, colours: str) -> Web:
    """Decode a row-major edge-colour string ('r' edge, 'g' non-edge)."""
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    if len(colours) != len(pairs):
        raise ValueError(f"expected {len(pairs)} colours for n={n}, got {len(colours)}")
    edges = 0
    for (x, y), colour in zip(pairs, colours):
        if colour == "r":
            edges |= 1 << iota(x, y)
    return Web(n, edges)


def supermix(k: int) -> FormulaInference:
    """a & (b_0 | ... | b_{k-1})  ->  a | (b_0 & ... & b_{k-1}), trivial at each b_i."""
    if k < 1:
        raise ValueError("supermix needs k >= 1")
    bs = [Var(f"b{i}") for i in range(k)]
    ors: LinearFormula = bs[0]
    ands: LinearFormula = bs[0]
    for b in bs[1:]:
        ors = Or(ors, b)
        ands = And(ands, b)
    return FormulaInference(And(Var("a"), ors), Or(Var("a"), ands))


def strassburger_php36() -> FormulaInference:
    """The 36-variable pigeonhole inference (4 pigeons, 3 holes).

    Exhaustive validity is out of reach; the maximal-clique criterion on the
    formula structure is the practical check.
    """
    pairs = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]
    families = ["p", "q", "r"]

    def conj(parts):
        out = parts[0]
        for part in parts[1:]:
            out = And(out, part)
        return out

    def disj(parts):
        out = parts[0]
        for part in parts[1:]:
            out = Or(out, part)
        return out

    lhs = conj([Or(Var(f"{f}{i}{j}"), Var(f"{f}{i}{j}'")) for f in families for i, j in pairs])
    rows = [
        ["{f}11", "{f}21", "{f}31"],
        ["{f}11'", "{f}22", "{f}32"],
        ["{f}21'", "{f}22'", "{f}33"],
        ["{f}31'", "{f}32'", "{f}33'"],
    ]
    rhs = disj(
        [conj([disj([Var(cell.format(f=f)) for cell in row]) for f in families]) for row in rows]
    )
    return FormulaInference(lhs, rhs)


def _fixture(name: str, lhs: str, rhs: str) -> InferenceFixture:
    inf = FormulaInference(parse(lhs), parse(rhs))
    webs, order = inference_webs(inf)
    return InferenceFixture(name=name, formulas=inf, webs=webs, variable_order=order)


def _dual_fixture(name: str, base: InferenceFixture) -> InferenceFixture:
    inf = dual_inference(base.formulas)
    webs, order = inference_webs(inf)
    return InferenceFixture(name=name, formulas=inf, webs=webs, variable_order=order)


@lru_cache(maxsize=1)
def catalogue() -> dict[str, InferenceFixture]:
    """Named formula-inference fixtures; each entry verified valid on build."""
    out: dict[str, InferenceFixture] = {}
    for name, (lhs, rhs) in _FORMULA_INFERENCES.items():
        out[name] = _fixture(name, lhs, rhs)
    out["eq3_dual"] = _dual_fixture("eq3_dual", out["eq3"])
    for name in _NINE:
        out[f"{name}_dual"] = _dual_fixture(f"{name}_dual", out[name])
    for name, fixture in out.items():
        if not is_valid(fixture.formulas):
            raise AssertionError(f"fixture {name} is not a valid inference")
    return out


@lru_cache(maxsize=1)
def p5_c5() -> tuple[Web, Web, tuple[str, ...]]:
    """P5 and C5 on u-w-x-y-z: the pentagon minus/with the closing edge {u,z}."""
    names = ("u", "w", "x", "y", "z")
    path = [(0, 1), (1, 2), (2, 3), (3, 4)]
    p5 = web_from_edges(5, path)
    c5 = web_from_edges(5, path + [(0, 4)])
    return p5, c5, names


def g4_rules() -> RuleSet:
    pairs = [(name, GraphInference(web_from_figure(n, l), web_from_figure(n, r))) for name, n, l, r in _G4_STRINGS]
    return RuleSet.from_rules("g4", pairs, "file")


def g5_rules() -> RuleSet:
    pairs = [(name, GraphInference(web_from_figure(n, l), web_from_figure(n, r))) for name, n, l, r in _G5_STRINGS]
    return RuleSet.from_rules("g5", pairs, "file")


def countermodel_cases() -> dict[str, list[CountermodelCase]]:
    """The appendix case analyses: one-step rewrites and their countermodels."""
    cat = catalogue()
    out: dict[str, list[CountermodelCase]] = {"eq1": [], "eq2": [], "eq3_lhs": [], "eq3_rhs": []}
    for rule, variant, cm in _EQ1_LHS_CASES:
        out["eq1"].append(CountermodelCase(rule, parse(variant), cat["eq1"].formulas.rhs, frozenset(cm)))
    for rule, variant, cm in _EQ2_LHS_CASES:
        out["eq2"].append(CountermodelCase(rule, parse(variant), cat["eq2"].formulas.rhs, frozenset(cm)))
    for rule, variant, cm in _EQ3_LHS_CASES:
        out["eq3_lhs"].append(CountermodelCase(rule, parse(variant), cat["eq3"].formulas.rhs, frozenset(cm)))
    for rule, interpolant, cm in _EQ3_RHS_CASES:
        out["eq3_rhs"].append(
            CountermodelCase(rule, cat["eq3"].formulas.lhs, parse(interpolant), frozenset(cm))
        )
    return out


def derivations() -> dict[str, DerivationFixture]:
    cat = catalogue()
    start = cat["tenvar"].formulas.lhs
    order = cat["tenvar"].variable_order
    out = {}
    for name, steps in (("tenvar_from_eq1", _TENVAR_STEPS_EQ1), ("tenvar_from_eq2", _TENVAR_STEPS_EQ2)):
        out[name] = DerivationFixture(
            name=name,
            rule_names=tuple(sorted({rule for rule, _ in steps})),
            start=start,
            steps=tuple((rule, parse(text)) for rule, text in steps),
            variable_order=order,
        )
    return out


def golden_rules(name: str) -> RuleSet:
    """A golden rule list shipped with the package (m8, m9, g4, g5)."""
    text = resources.files("linbasis.data").joinpath(f"{name}.rules").read_text()
    pairs = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rname, n, lhs, rhs = [part.strip() for part in line.split(";")]
        n = int(n)
        pairs.append((rname, GraphInference(Web(n, int(lhs)), Web(n, int(rhs)))))
    return RuleSet.from_rules(name, pairs, "file")
