"""Linear Boolean formulas: AST, parsing, semantics, and the reduction pipeline.

A linear formula uses every variable at most once.  Validity of an implication
between linear formulas is decidable by brute force over assignments, which is
what everything here does; the graph-side machinery (see `graph` / `cliques`)
exists to make the same questions fast on the constant-free negation-free
fragment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union


class FormulaSyntaxError(ValueError):
    """Malformed formula text."""


class MixedOperatorError(FormulaSyntaxError):
    """`a & b | c` without parentheses; the grammar has no precedence."""


class LinearityError(ValueError):
    """A variable occurs in more than one leaf."""


class DegenerateError(ValueError):
    """The reduction pipeline collapsed a side to a constant."""


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class NegVar:
    name: str


@dataclass(frozen=True)
class And:
    left: "LinearFormula"
    right: "LinearFormula"


@dataclass(frozen=True)
class Or:
    left: "LinearFormula"
    right: "LinearFormula"


LinearFormula = Union[Top, Bot, Var, NegVar, And, Or]

TOP = Top()
BOT = Bot()

_TOKEN = re.compile(r"\s*(?:(?P<ident>[a-z][a-zA-Z0-9']*)|(?P<op>[&|~()TF]))")


def variables(f: LinearFormula) -> frozenset[str]:
    """Set of variable names occurring in f (negated or not)."""
    out: set[str] = set()
    _scan_vars(f, out)
    return frozenset(out)


def _scan_vars(f: LinearFormula, out: set[str]) -> None:
    if isinstance(f, (Var, NegVar)):
        out.add(f.name)
    elif isinstance(f, (And, Or)):
        _scan_vars(f.left, out)
        _scan_vars(f.right, out)


def _leaf_names(f: LinearFormula, out: list[str]) -> None:
    if isinstance(f, (Var, NegVar)):
        out.append(f.name)
    elif isinstance(f, (And, Or)):
        _leaf_names(f.left, out)
        _leaf_names(f.right, out)


def check_linear(f: LinearFormula) -> None:
    """Raise LinearityError if some variable occurs in more than one leaf."""
    names: list[str] = []
    _leaf_names(f, names)
    if len(names) != len(set(names)):
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise LinearityError(f"variable {name!r} occurs more than once")
            seen.add(name)


def is_constant_free(f: LinearFormula) -> bool:
    if isinstance(f, (Top, Bot)):
        return False
    if isinstance(f, (And, Or)):
        return is_constant_free(f.left) and is_constant_free(f.right)
    return True


def is_negation_free(f: LinearFormula) -> bool:
    if isinstance(f, NegVar):
        return False
    if isinstance(f, (And, Or)):
        return is_negation_free(f.left) and is_negation_free(f.right)
    return True


def parse(text: str) -> LinearFormula:
    """Parse a formula.

    Grammar: formula := term (('&'|'|') term)*, with the same operator between
    all unparenthesized siblings (no precedence, chains associate left);
    term := 'T' | 'F' | ident | '~' ident | '(' formula ')'.
    """
    tokens = _tokenize(text)
    f, pos = _parse_formula(tokens, 0)
    if pos != len(tokens):
        raise FormulaSyntaxError(f"trailing input at token {pos}: {tokens[pos]!r}")
    check_linear(f)
    return f


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise FormulaSyntaxError(f"unexpected character {text[pos:].strip()[0]!r}")
        tokens.append(m.group("ident") or m.group("op"))
        pos = m.end()
    if not tokens:
        raise FormulaSyntaxError("empty formula")
    return tokens


def _parse_formula(tokens: list[str], pos: int) -> tuple[LinearFormula, int]:
    f, pos = _parse_term(tokens, pos)
    op: str | None = None
    while pos < len(tokens) and tokens[pos] in ("&", "|"):
        if op is None:
            op = tokens[pos]
        elif tokens[pos] != op:
            raise MixedOperatorError(
                "mixed '&' and '|' at the same level; parenthesize"
            )
        rhs, pos = _parse_term(tokens, pos + 1)
        f = And(f, rhs) if op == "&" else Or(f, rhs)
    return f, pos


def _parse_term(tokens: list[str], pos: int) -> tuple[LinearFormula, int]:
    if pos >= len(tokens):
        raise FormulaSyntaxError("unexpected end of input")
    tok = tokens[pos]
    if tok == "T":
        return TOP, pos + 1
    if tok == "F":
        return BOT, pos + 1
    if tok == "~":
        if pos + 1 >= len(tokens) or not tokens[pos + 1][0].islower():
            raise FormulaSyntaxError("'~' must be followed by a variable")
        return NegVar(tokens[pos + 1]), pos + 2
    if tok == "(":
        f, pos = _parse_formula(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise FormulaSyntaxError("missing ')'")
        return f, pos + 1
    if tok[0].islower():
        return Var(tok), pos + 1
    raise FormulaSyntaxError(f"unexpected token {tok!r}")


def print_formula(f: LinearFormula) -> str:
    """Fully parenthesized text; parse(print_formula(f)) == f."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, Var):
        return f.name
    if isinstance(f, NegVar):
        return "~" + f.name
    op = "&" if isinstance(f, And) else "|"
    return f"({print_formula(f.left)} {op} {print_formula(f.right)})"


def evaluate(f: LinearFormula, assignment: Iterable[str]) -> bool:
    """Boolean value of f under the assignment (a collection of true names)."""
    true_names = assignment if isinstance(assignment, (set, frozenset)) else frozenset(assignment)
    return _eval(f, true_names)


def _eval(f: LinearFormula, true_names) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Var):
        return f.name in true_names
    if isinstance(f, NegVar):
        return f.name not in true_names
    if isinstance(f, And):
        return _eval(f.left, true_names) and _eval(f.right, true_names)
    return _eval(f.left, true_names) or _eval(f.right, true_names)


@dataclass(frozen=True)
class FormulaInference:
    """A candidate implication lhs -> rhs; validity is a checked property."""

    lhs: LinearFormula
    rhs: LinearFormula

    def __post_init__(self) -> None:
        check_linear(self.lhs)
        check_linear(self.rhs)


def parse_inference(text: str) -> FormulaInference:
    """Parse the one-line inference format "LHS -> RHS"."""
    parts = text.split("->")
    if len(parts) != 2:
        raise FormulaSyntaxError("inference text must contain exactly one '->'")
    return FormulaInference(parse(parts[0]), parse(parts[1]))


def format_inference(inf: FormulaInference) -> str:
    return f"{print_formula(inf.lhs)} -> {print_formula(inf.rhs)}"


# Truth tables as big integers: bit a holds the value under the assignment
# whose i-th variable (in var_order) is true iff bit i of a is set.  This keeps
# exhaustive validity checks cheap without leaving pure Python.


def _var_table(i: int, n: int) -> int:
    seg = 1 << i
    block = ((1 << seg) - 1) << seg
    reps = 1 << (n - i - 1)
    period = 2 * seg
    return block * (((1 << (period * reps)) - 1) // ((1 << period) - 1))


def _truth_table(f: LinearFormula, index: dict[str, int], mask: int, n: int) -> int:
    if isinstance(f, Top):
        return mask
    if isinstance(f, Bot):
        return 0
    if isinstance(f, Var):
        return _var_table(index[f.name], n)
    if isinstance(f, NegVar):
        return mask ^ _var_table(index[f.name], n)
    if isinstance(f, And):
        return _truth_table(f.left, index, mask, n) & _truth_table(f.right, index, mask, n)
    return _truth_table(f.left, index, mask, n) | _truth_table(f.right, index, mask, n)


def is_valid(inf: FormulaInference) -> bool:
    """Exhaustive validity over all assignments of the union variable set."""
    order = sorted(variables(inf.lhs) | variables(inf.rhs))
    n = len(order)
    index = {name: i for i, name in enumerate(order)}
    mask = (1 << (1 << n)) - 1
    lhs = _truth_table(inf.lhs, index, mask, n)
    rhs = _truth_table(inf.rhs, index, mask, n)
    return lhs & ~rhs & mask == 0


def countermodel(inf: FormulaInference) -> frozenset[str] | None:
    """A satisfying assignment of lhs falsifying rhs; None iff valid.

    Deterministic: the assignment with the smallest index in the truth-table
    ordering is returned.
    """
    order = sorted(variables(inf.lhs) | variables(inf.rhs))
    n = len(order)
    index = {name: i for i, name in enumerate(order)}
    mask = (1 << (1 << n)) - 1
    bad = _truth_table(inf.lhs, index, mask, n) & ~_truth_table(inf.rhs, index, mask, n) & mask
    if bad == 0:
        return None
    a = (bad & -bad).bit_length() - 1
    return frozenset(order[i] for i in range(n) if (a >> i) & 1)


def unit_normalize(f: LinearFormula) -> LinearFormula:
    """Eliminate constants via the unit laws; result is constant-free, T, or F."""
    if isinstance(f, And):
        left = unit_normalize(f.left)
        right = unit_normalize(f.right)
        if isinstance(left, Bot) or isinstance(right, Bot):
            return BOT
        if isinstance(left, Top):
            return right
        if isinstance(right, Top):
            return left
        return And(left, right)
    if isinstance(f, Or):
        left = unit_normalize(f.left)
        right = unit_normalize(f.right)
        if isinstance(left, Top) or isinstance(right, Top):
            return TOP
        if isinstance(left, Bot):
            return right
        if isinstance(right, Bot):
            return left
        return Or(left, right)
    return f


def negate(f: LinearFormula) -> LinearFormula:
    """De Morgan negation; linear on the same variables, involutive."""
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    if isinstance(f, Var):
        return NegVar(f.name)
    if isinstance(f, NegVar):
        return Var(f.name)
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    return And(negate(f.left), negate(f.right))


def dualize(f: LinearFormula) -> LinearFormula:
    """Swap And/Or and Top/Bot throughout, leaving variables fixed."""
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    if isinstance(f, (Var, NegVar)):
        return f
    if isinstance(f, And):
        return Or(dualize(f.left), dualize(f.right))
    return And(dualize(f.left), dualize(f.right))


def dual_inference(inf: FormulaInference) -> FormulaInference:
    """The dual inference: dualize both sides and swap them."""
    return FormulaInference(dualize(inf.rhs), dualize(inf.lhs))


def substitute_constant(f: LinearFormula, name: str, value: bool) -> LinearFormula:
    """Replace the variable `name` by a constant (negated leaves flip it)."""
    if isinstance(f, Var):
        return (TOP if value else BOT) if f.name == name else f
    if isinstance(f, NegVar):
        return (BOT if value else TOP) if f.name == name else f
    if isinstance(f, And):
        return And(substitute_constant(f.left, name, value), substitute_constant(f.right, name, value))
    if isinstance(f, Or):
        return Or(substitute_constant(f.left, name, value), substitute_constant(f.right, name, value))
    return f


def is_trivial_at(inf: FormulaInference, name: str) -> bool:
    """Substitution definition: lhs[T/x] -> rhs[F/x] is again valid."""
    return is_valid(
        FormulaInference(
            substitute_constant(inf.lhs, name, True),
            substitute_constant(inf.rhs, name, False),
        )
    )


def is_trivial(inf: FormulaInference) -> bool:
    shared = variables(inf.lhs) & variables(inf.rhs)
    return any(is_trivial_at(inf, name) for name in sorted(shared))


@dataclass(frozen=True)
class ReductionStep:
    """One elimination performed by normalize_inference."""

    kind: str  # restrict-lhs | restrict-rhs | trivial-substitution | strip-negation | unit-normalize
    variable: str | None = None
    side: str | None = None


def normalize_inference(inf: FormulaInference) -> tuple[FormulaInference, list[ReductionStep]]:
    """Reduce a valid inference to a constant-free negation-free non-trivial core.

    Repeats: unit-normalize both sides; substitute T (lhs) / F (rhs) for
    variables present on one side only; substitute at the least trivial
    variable.  Finally strips negations (polarities agree once non-trivial).
    Raises DegenerateError when a side collapses to a constant.
    """
    if not is_valid(inf):
        raise ValueError("normalize_inference requires a valid inference")
    lhs, rhs = inf.lhs, inf.rhs
    trace: list[ReductionStep] = []

    def normalized(side: LinearFormula, label: str) -> LinearFormula:
        reduced = unit_normalize(side)
        if reduced != side:
            trace.append(ReductionStep("unit-normalize", side=label))
        return reduced

    while True:
        lhs = normalized(lhs, "lhs")
        rhs = normalized(rhs, "rhs")
        v1, v2 = variables(lhs), variables(rhs)
        if v1 != v2:
            for name in sorted(v1 - v2):
                lhs = substitute_constant(lhs, name, True)
                trace.append(ReductionStep("restrict-lhs", variable=name))
            for name in sorted(v2 - v1):
                rhs = substitute_constant(rhs, name, False)
                trace.append(ReductionStep("restrict-rhs", variable=name))
            continue
        if isinstance(lhs, (Top, Bot)) or isinstance(rhs, (Top, Bot)):
            raise DegenerateError("core collapsed to a constant")
        trivial_var = next(
            (name for name in sorted(v1) if is_trivial_at(FormulaInference(lhs, rhs), name)),
            None,
        )
        if trivial_var is None:
            break
        lhs = substitute_constant(lhs, trivial_var, True)
        rhs = substitute_constant(rhs, trivial_var, False)
        trace.append(ReductionStep("trivial-substitution", variable=trivial_var))

    lhs, rhs = _strip_negations(lhs, rhs, trace)
    core = FormulaInference(lhs, rhs)
    return core, trace


def _negated_vars(f: LinearFormula) -> frozenset[str]:
    if isinstance(f, NegVar):
        return frozenset((f.name,))
    if isinstance(f, (And, Or)):
        return _negated_vars(f.left) | _negated_vars(f.right)
    return frozenset()


def _flip_leaf(f: LinearFormula, name: str) -> LinearFormula:
    if isinstance(f, NegVar) and f.name == name:
        return Var(name)
    if isinstance(f, (And, Or)):
        kind = And if isinstance(f, And) else Or
        return kind(_flip_leaf(f.left, name), _flip_leaf(f.right, name))
    return f


def _strip_negations(lhs, rhs, trace):
    neg_l, neg_r = _negated_vars(lhs), _negated_vars(rhs)
    # Non-triviality forces polarities to agree side-to-side; x -> ~x would
    # already have been substituted away.
    if neg_l != neg_r:
        raise AssertionError("polarity mismatch on a non-trivial core")
    for name in sorted(neg_l):
        lhs = _flip_leaf(lhs, name)
        rhs = _flip_leaf(rhs, name)
        trace.append(ReductionStep("strip-negation", variable=name))
    return lhs, rhs
