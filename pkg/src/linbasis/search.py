"""The seven-phase search for rule-independent inferences, with checkpoints.

Phases: (1) enumerate graphs, (2) resolve least isomorphs, (3) cache maximal
cliques, (4) valid inferences from least webs, (5) drop trivial ones,
(6) keep the logically minimal ones, (7) classify against the rule set and
deduplicate the residual by inference isomorphism.

Each phase writes one checkpoint file whose header carries a digest chain, so
a rerun with the same configuration resumes after the last intact phase.
Phases 1-3 depend only on (n, mode), 4-6 add the entailment, and only phase 7
depends on the rule set, which is what lets basis() share the expensive
phases between strata.
"""

from __future__ import annotations

import gzip
import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from . import cliques as cq
from . import isomorphism as iso
from .cliques import CliqueCache
from .enumeration import BudgetError, all_graph_numerics, p4_free_numerics
from .formula import print_formula
from .graph import Web, dual, edge_bits, from_numeric, from_web, is_p4_free
from .isomorphism import LeastMap, build_least_map, is_least, is_self_dual
from .rewrite import GraphInference, RuleSet, is_instance, match_rule

log = logging.getLogger("linbasis.search")

FORMAT_VERSION = "linbasis-ckpt v1"
GZIP_THRESHOLD_N = 9  # phase 4/5 payloads are gzipped from this size up


class MissingPhaseError(ValueError):
    """A phase ran without its prerequisites."""


class CheckpointCorruptError(ValueError):
    """Checkpoint digest or chain mismatch; recompute from the last valid phase."""


@dataclass(frozen=True)
class SearchConfig:
    n: int
    rules: RuleSet
    mode: str = "p4free"  # p4free | all
    entailment: str = "clique"  # clique | stable
    checkpoint_dir: str | Path | None = None
    workers: int = 1
    long_run: bool = False

    def validate(self) -> None:
        if self.mode not in ("p4free", "all"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.entailment not in ("clique", "stable"):
            raise ValueError(f"unknown entailment {self.entailment!r}")
        if self.n < 1:
            raise ValueError("search needs n >= 1")
        limit = (9 if self.long_run else 8) if self.mode == "p4free" else (7 if self.long_run else 5)
        if self.n > limit:
            raise BudgetError(
                f"n={self.n} in {self.mode} mode exceeds the budget"
                + ("" if self.long_run else "; pass --long-run for the gated sizes")
            )


@dataclass(frozen=True)
class ClassReport:
    index: int
    inference: GraphInference
    lhs_formula: str
    rhs_formula: str
    self_dual: bool

    def line(self) -> str:
        return (
            f"class {self.index}: {self.inference.n} {self.inference.lhs.edges} "
            f"{self.inference.rhs.edges} ; formula {self.lhs_formula} -> {self.rhs_formula} ; "
            f"self_dual={'true' if self.self_dual else 'false'}"
        )


@dataclass(frozen=True)
class SearchReport:
    n: int
    mode: str
    entailment: str
    rules_name: str
    rules_digest: str
    graph_count: int
    least_count: int
    valid_count: int
    nontrivial_count: int
    minimal_count: int
    rule_counts: tuple[tuple[str, int], ...]
    residual_count: int
    classes: tuple[ClassReport, ...]

    def text(self) -> str:
        lines = [
            f"search n={self.n} mode={self.mode} entailment={self.entailment} "
            f"rules={self.rules_name}({self.rules_digest})",
            f"graphs: {self.graph_count}",
            f"least: {self.least_count}",
            f"valid: {self.valid_count}",
            f"nontrivial: {self.nontrivial_count}",
            f"minimal: {self.minimal_count}",
        ]
        for name, count in self.rule_counts:
            lines.append(f"instances of {name}: {count}")
        lines.append(f"residual: {self.residual_count}")
        lines.append(f"classes: {len(self.classes)}")
        for cls in self.classes:
            lines.append(cls.line())
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Phase7Outcome:
    rule_counts: tuple[tuple[str, int], ...]
    residual: tuple[GraphInference, ...]
    classes: tuple[GraphInference, ...]


# ---------------------------------------------------------------------------
# checkpoint files


def _digest_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()[:16]


def _header(phase: int, n: int, mode: str, entailment: str, rules: str, prev: str, digest: str) -> str:
    return (
        f"{FORMAT_VERSION}; phase={phase}; n={n}; mode={mode}; "
        f"entailment={entailment}; rules={rules}; prev={prev}; digest={digest}"
    )


class _StreamStore:
    """Stream a checkpoint payload to disk while hashing it.

    The payload is spooled to a temp file first because the header line,
    which carries the payload digest, has to come first in the final file.
    Files are finalized with write-temp-then-rename.
    """

    def __init__(self, path: Path | None):
        self.path = path
        self.hasher = hashlib.sha256()
        self.spool = None
        if path is not None:
            self.spool_path = path.with_name(path.name + ".payload")
            self.spool = open(self.spool_path, "wb")

    def write(self, text: str) -> None:
        blob = text.encode()
        self.hasher.update(blob)
        if self.spool is not None:
            self.spool.write(blob)

    def finish(self, phase: int, n: int, mode: str, entailment: str, rules: str, prev: str, compress: bool) -> str:
        digest = self.hasher.hexdigest()[:16]
        if self.spool is None:
            return digest
        self.spool.close()
        header = _header(phase, n, mode, entailment, rules, prev, digest).encode() + b"\n"
        tmp = self.path.with_name(self.path.name + ".tmp")
        with open(self.spool_path, "rb") as src, open(tmp, "wb") as out:
            if compress:
                with gzip.GzipFile(fileobj=out, mode="wb", mtime=0, compresslevel=1) as gz:
                    gz.write(header)
                    while block := src.read(1 << 22):
                        gz.write(block)
            else:
                out.write(header)
                while block := src.read(1 << 22):
                    out.write(block)
        os.remove(self.spool_path)
        os.replace(tmp, self.path)
        return digest


def _read_header_fields(path: Path) -> dict[str, str]:
    with open(path, "rb") as handle:
        magic = handle.read(2)
        handle.seek(0)
        if magic == b"\x1f\x8b":
            with gzip.GzipFile(fileobj=handle) as gz:
                head = gz.readline()
        else:
            head = handle.readline()
    return dict(part.strip().split("=", 1) for part in head.decode().split(";")[1:] if "=" in part)


def _read_checkpoint(
    path: Path,
    phase: int,
    n: int,
    mode: str,
    entailment: str,
    rules: str,
    prev: str,
    verify_payload: bool = True,
) -> tuple[bytes | None, str]:
    """Payload (None when verify_payload is off) and digest; raises on mismatch."""
    if not path.exists():
        raise FileNotFoundError(path)
    fields = _read_header_fields(path)
    expected = {"phase": str(phase), "n": str(n), "mode": mode, "entailment": entailment, "rules": rules}
    for key, value in expected.items():
        if fields.get(key) != value:
            raise CheckpointCorruptError(f"{path.name}: {key}={fields.get(key)!r}, expected {value!r}")
    if prev and fields.get("prev") != prev:
        raise CheckpointCorruptError(f"{path.name}: broken digest chain")
    digest = fields.get("digest", "")
    if not verify_payload:
        return None, digest
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    _, _, payload = raw.partition(b"\n")
    if _digest_bytes(payload) != digest:
        raise CheckpointCorruptError(f"{path.name}: payload does not match its digest")
    return payload, digest


# ---------------------------------------------------------------------------
# spec-level phase operations (straightforward in-memory path)


def graph_family(config: SearchConfig) -> np.ndarray:
    """Phase 1: the sorted numeric array of the configured graph family."""
    if config.mode == "p4free":
        return p4_free_numerics(config.n)
    return all_graph_numerics(config.n, allow_large=config.long_run)


def _entails(entailment: str):
    return cq.implies_cliquewise if entailment == "clique" else cq.implies_stablewise


def phase4_valid_inferences(
    graphs: Sequence[Web],
    least_map: LeastMap,
    clique_cache: CliqueCache,
    entailment: str = "clique",
) -> list[GraphInference]:
    """All pairs (R least, S distinct) passing the configured entailment.

    Straightforward composition over cached cliques; run_search uses the
    vectorized sweep instead, which is tested against this.
    """
    if least_map is None or clique_cache is None:
        raise MissingPhaseError("phase 4 needs the least map and the clique cache")
    entails = _entails(entailment)
    out = []
    for pos in least_map.least_positions():
        r = Web(least_map.n, int(least_map.numerics[pos]))
        for value in least_map.numerics:
            if int(value) == r.edges:
                continue
            s = Web(least_map.n, int(value))
            if entails(r, s):
                out.append(GraphInference(r, s))
    return out


def phase5_nontrivial(
    inferences: Sequence[GraphInference], clique_cache: CliqueCache, entailment: str = "clique"
) -> list[GraphInference]:
    """Drop every inference trivial at some variable."""
    if clique_cache is None:
        raise MissingPhaseError("phase 5 needs the clique cache")
    if entailment == "clique":
        return [inf for inf in inferences if not cq.is_trivial(inf.lhs, inf.rhs)]
    return [inf for inf in inferences if not cq.is_trivial(dual(inf.rhs), dual(inf.lhs))]


def _phi_arrays(
    nontrivial: Sequence[GraphInference], least_map: LeastMap
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group the non-trivial targets by least LHS ordinal, each group sorted."""
    least_positions = least_map.least_positions()
    ordinal_of_pos = {int(p): i for i, p in enumerate(least_positions)}
    groups: list[list[int]] = [[] for _ in least_positions]
    for inf in nontrivial:
        pos = least_map.lookup(inf.lhs.edges)
        if pos not in ordinal_of_pos:
            raise MissingPhaseError("phase 6 needs inferences from least webs")
        groups[ordinal_of_pos[pos]].append(inf.rhs.edges)
    phi_off = np.zeros(len(groups) + 1, dtype=np.int64)
    for i, group in enumerate(groups):
        group.sort()
        phi_off[i + 1] = phi_off[i] + len(group)
    phi_flat = np.array([v for group in groups for v in group], dtype=np.int64)
    return phi_flat, phi_off, least_positions


def _least_ordinals(least_map: LeastMap) -> np.ndarray:
    least_positions = least_map.least_positions()
    return np.searchsorted(least_positions, least_map.least_index).astype(np.int64)


def _run_phase6_kernel(
    least_map: LeastMap, phi_flat: np.ndarray, phi_off: np.ndarray
) -> np.ndarray:
    from ._kernels import edge_index_tables, phase6_minimal

    bit2x, bit2y, pairbit = edge_index_tables(least_map.n)
    return phase6_minimal(
        least_map.n,
        least_map.numerics,
        _least_ordinals(least_map),
        least_map.perm_enc,
        phi_flat,
        phi_off,
        bit2x,
        bit2y,
        pairbit,
    )


def phase6_logically_minimal(
    nontrivial: Sequence[GraphInference], least_map: LeastMap
) -> list[GraphInference]:
    """Keep S in Phi_R implied through no intermediate (transported-Phi filter)."""
    if least_map is None:
        raise MissingPhaseError("phase 6 needs the least map")
    phi_flat, phi_off, least_positions = _phi_arrays(nontrivial, least_map)
    keep = _run_phase6_kernel(least_map, phi_flat, phi_off)
    out = []
    n = least_map.n
    for ordinal, pos in enumerate(least_positions):
        lhs = Web(n, int(least_map.numerics[pos]))
        for k in range(int(phi_off[ordinal]), int(phi_off[ordinal + 1])):
            if keep[k]:
                out.append(GraphInference(lhs, Web(n, int(phi_flat[k]))))
    return out


_WORKER_RULES: RuleSet | None = None


def _init_phase7_worker(lines: list[str]) -> None:
    global _WORKER_RULES
    pairs = []
    for line in lines:
        name, num, lhs, rhs = [part.strip() for part in line.split(";")]
        n = int(num)
        pairs.append((name, GraphInference(from_numeric(n, int(lhs)), from_numeric(n, int(rhs)))))
    _WORKER_RULES = RuleSet.from_rules("worker", pairs, "file")


def _phase7_worker(item: tuple[int, int, int]) -> str:
    n, lhs, rhs = item
    name = match_rule(GraphInference(from_numeric(n, lhs), from_numeric(n, rhs)), _WORKER_RULES)
    return name or ""


def phase7_independent(
    minimal: Sequence[GraphInference], rules: RuleSet, workers: int = 1
) -> Phase7Outcome:
    """Partition minimal inferences by first matching rule; the residual is
    deduplicated by inference isomorphism."""
    if minimal is None:
        raise MissingPhaseError("phase 7 needs the minimal inferences")
    counts = {rule.name: 0 for rule in rules}
    if workers > 1 and len(minimal) >= 32:
        items = [(inf.n, inf.lhs.edges, inf.rhs.edges) for inf in minimal]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_phase7_worker, initargs=(rules.lines(),)
        ) as pool:
            matches = list(pool.map(_phase7_worker, items, chunksize=64))
    else:
        matches = [match_rule(inf, rules) or "" for inf in minimal]
    residual = []
    for inf, name in zip(minimal, matches):
        if name:
            counts[name] += 1
        else:
            residual.append(inf)
    classes = tuple(iso.dedup_inferences(residual)) if residual else ()
    return Phase7Outcome(
        rule_counts=tuple((rule.name, counts[rule.name]) for rule in rules),
        residual=tuple(residual),
        classes=classes,
    )


# ---------------------------------------------------------------------------
# vectorized sweep: phases 3-5 in one pass


def _unpack_bits(mask_words: np.ndarray, count: int) -> np.ndarray:
    return np.unpackbits(mask_words.view(np.uint8), bitorder="little")[:count]


class _Sweep:
    """Clique cache plus validity/triviality masks, chunked over columns.

    valid_sink(chunk_index, ordinal, values) receives each least graph's valid
    targets per chunk; non-trivial targets are accumulated in memory (they are
    the input of phase 6).
    """

    def __init__(self, n: int, numerics: np.ndarray, least_positions: np.ndarray, entailment: str):
        self.n = n
        self.numerics = numerics
        self.least_positions = least_positions
        self.entailment = entailment
        self.valid_count = 0
        self.phi_per_least: list[list[np.ndarray]] = [[] for _ in least_positions]
        self.clique_arrays: tuple[np.ndarray, np.ndarray] | None = None
        self.chunk_count = 1

    def run(self, phase3_sink=None, valid_sink: Callable | None = None, matrix_budget: int = 512 << 20):
        if self.entailment == "clique":
            self._run_clique(phase3_sink, valid_sink, matrix_budget)
        else:
            self._run_stable(phase3_sink, valid_sink)
        return self

    @property
    def nontrivial_count(self) -> int:
        return sum(len(part) for parts in self.phi_per_least for part in parts)

    def phi_groups(self) -> list[np.ndarray]:
        return [
            np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
            for parts in self.phi_per_least
        ]

    def _emit_phase3(self, sink, sub: np.ndarray, flat: np.ndarray, offsets: np.ndarray) -> None:
        if sink is None:
            return
        pieces = []
        for i in range(len(sub)):
            text = ",".join(map(str, flat[offsets[i] : offsets[i + 1]].tolist()))
            pieces.append(f"{sub[i]} : {text}\n")
            if len(pieces) >= 65536:
                sink.write("".join(pieces))
                pieces.clear()
        sink.write("".join(pieces))

    def _least_cliques(self) -> list[np.ndarray]:
        from ._kernels import batch_maximal_cliques

        flat, offsets = batch_maximal_cliques(self.numerics[self.least_positions], self.n)
        return [flat[offsets[i] : offsets[i + 1]] for i in range(len(self.least_positions))]

    def _run_clique(self, phase3_sink, valid_sink, matrix_budget: int) -> None:
        from ._kernels import batch_maximal_cliques, set_clique_bits, upward_closure_rows

        n = self.n
        count = len(self.numerics)
        rows = 1 << n
        chunk = max(64, (matrix_budget // (8 * rows)) * 64)
        mc_least = self._least_cliques()
        self.chunk_count = (count + chunk - 1) // chunk if count else 1
        for ci, c0 in enumerate(range(0, count, chunk)):
            c1 = min(c0 + chunk, count)
            sub = self.numerics[c0:c1]
            flat, offsets = batch_maximal_cliques(sub, n)
            if self.chunk_count == 1:
                self.clique_arrays = (flat, offsets)
            self._emit_phase3(phase3_sink, sub, flat, offsets)
            words = (len(sub) + 63) >> 6
            matrix = np.zeros((rows, words), dtype=np.uint64)
            set_clique_bits(matrix, flat, offsets)
            upward_closure_rows(matrix, n)
            for ordinal, pos in enumerate(self.least_positions):
                qs = mc_least[ordinal]
                valid = matrix[qs[0]].copy()
                for q in qs[1:]:
                    valid &= matrix[q]
                if c0 <= pos < c1:
                    local = int(pos - c0)
                    valid[local >> 6] &= ~(np.uint64(1) << np.uint64(local & 63))
                trivial = np.zeros_like(valid)
                for x in range(n):
                    clear = ~(1 << x)
                    t = matrix[qs[0] & clear].copy()
                    for q in qs[1:]:
                        t &= matrix[q & clear]
                    trivial |= t
                valid_bits = _unpack_bits(valid, len(sub))
                vidx = np.nonzero(valid_bits)[0]
                self.valid_count += len(vidx)
                if valid_sink is not None:
                    valid_sink(ci, ordinal, sub[vidx])
                nt_bits = valid_bits & ~_unpack_bits(trivial, len(sub))
                self.phi_per_least[ordinal].append(sub[np.nonzero(nt_bits)[0]])

    def _run_stable(self, phase3_sink, valid_sink) -> None:
        from ._kernels import batch_maximal_cliques

        n = self.n
        numerics = self.numerics
        flat, offsets = batch_maximal_cliques(numerics, n)
        self.clique_arrays = (flat, offsets)
        self._emit_phase3(phase3_sink, numerics, flat, offsets)
        full = (1 << edge_bits(n)) - 1
        dual_index = np.searchsorted(numerics, full ^ numerics)
        if np.any(numerics[dual_index] != (full ^ numerics)):
            raise MissingPhaseError("graph family is not closed under duals")
        lengths = (offsets[1:] - offsets[:-1]).astype(np.int64)
        starts = offsets[:-1][dual_index]
        counts = lengths[dual_index]
        doff = np.concatenate(([0], np.cumsum(counts)))
        gather = np.arange(doff[-1]) - np.repeat(doff[:-1], counts) + np.repeat(starts, counts)
        dual_flat = flat[gather]
        reduce_at = doff[:-1]
        size = 1 << n
        idx_all = np.arange(size)
        for ordinal, lpos in enumerate(self.least_positions):
            dual_r = int(dual_index[lpos])
            col = np.zeros(size, dtype=np.uint8)
            col[flat[offsets[dual_r] : offsets[dual_r + 1]]] = 1
            for i in range(n):
                bit = 1 << i
                hi = idx_all[(idx_all & bit) != 0]
                col[hi] |= col[hi ^ bit]
            valid = np.bitwise_and.reduceat(col[dual_flat], reduce_at).astype(bool)
            valid[lpos] = False
            trivial = np.zeros(len(numerics), dtype=bool)
            for x in range(n):
                masked = col[dual_flat & ~(1 << x)]
                trivial |= np.bitwise_and.reduceat(masked, reduce_at).astype(bool)
            nontrivial = valid & ~trivial
            self.valid_count += int(valid.sum())
            if valid_sink is not None:
                valid_sink(0, ordinal, numerics[np.nonzero(valid)[0]])
            self.phi_per_least[ordinal].append(numerics[np.nonzero(nontrivial)[0]])


# ---------------------------------------------------------------------------
# the checkpointed runner


def _grouped_line(value: int, arrays: Sequence[np.ndarray]) -> str:
    joined = ",".join(",".join(map(str, part.tolist())) for part in arrays if len(part))
    return f"{value} : {joined}\n"


def _parse_grouped(payload: bytes) -> list[tuple[int, np.ndarray]]:
    out = []
    for line in payload.decode().splitlines():
        head, _, rest = line.partition(":")
        rest = rest.strip()
        values = np.array([int(v) for v in rest.split(",")] if rest else [], dtype=np.int64)
        out.append((int(head), values))
    return out


def run_search(config: SearchConfig) -> SearchReport:
    """Execute phases 1-7, resuming from any checkpoint whose chain matches."""
    config.validate()
    return _Runner(config).run()


class _Runner:
    def __init__(self, config: SearchConfig):
        self.config = config
        self.ckpt: Path | None = None
        if config.checkpoint_dir is not None:
            self.ckpt = Path(config.checkpoint_dir) / f"{config.mode}-n{config.n}"
            self.ckpt.mkdir(parents=True, exist_ok=True)
        self.digests: dict[int, str] = {}

    def _path(self, phase: int) -> Path:
        assert self.ckpt is not None
        ent = self.config.entailment
        if phase <= 3:
            return self.ckpt / f"phase{phase}.txt"
        if phase <= 6:
            return self.ckpt / f"phase{phase}-{ent}.txt"
        return self.ckpt / f"phase7-{ent}-{self.config.rules.digest}.txt"

    def _meta(self, phase: int) -> tuple[str, str]:
        ent = "-" if phase <= 3 else self.config.entailment
        rules = self.config.rules.digest if phase == 7 else "-"
        return ent, rules

    def _load(self, phase: int, verify_payload: bool = True) -> bytes | None:
        if self.ckpt is None:
            return None
        ent, rules = self._meta(phase)
        prev = self.digests.get(phase - 1, "")
        try:
            payload, digest = _read_checkpoint(
                self._path(phase),
                phase,
                self.config.n,
                self.config.mode,
                ent,
                rules,
                prev,
                verify_payload=verify_payload,
            )
        except FileNotFoundError:
            return None
        except CheckpointCorruptError as exc:
            log.warning("recomputing phase %d: %s", phase, exc)
            return None
        self.digests[phase] = digest
        log.info("phase %d loaded from checkpoint", phase)
        return payload if verify_payload else b""

    def _store_text(self, phase: int, payload: str, compress: bool = False) -> None:
        store = self._open_store(phase)
        store.write(payload)
        self._close_store(store, phase, compress)

    def _open_store(self, phase: int) -> _StreamStore:
        return _StreamStore(self._path(phase) if self.ckpt is not None else None)

    def _close_store(self, store: _StreamStore, phase: int, compress: bool = False) -> None:
        ent, rules = self._meta(phase)
        prev = self.digests.get(phase - 1, "")
        self.digests[phase] = store.finish(
            phase, self.config.n, self.config.mode, ent, rules, prev, compress
        )

    # -- the run -----------------------------------------------------------

    def run(self) -> SearchReport:
        config = self.config
        n = config.n
        compress = n >= GZIP_THRESHOLD_N

        # phase 1
        payload = self._load(1)
        if payload is None:
            numerics = graph_family(config)
            store = self._open_store(1)
            store.write(f"phase1 n={n} mode={config.mode}\n")
            for lo in range(0, len(numerics), 1 << 20):
                store.write("\n".join(map(str, numerics[lo : lo + (1 << 20)].tolist())) + "\n")
            self._close_store(store, 1)
            log.info("phase 1: %d graphs", len(numerics))
        else:
            lines = payload.splitlines()
            numerics = np.array([int(v) for v in lines[1:]], dtype=np.int64)
            del lines, payload

        # phase 2
        payload = self._load(2)
        if payload is None:
            least_map = build_least_map(numerics, n)
            store = self._open_store(2)
            buffer = []
            for record in least_map.records():
                buffer.append(record)
                if len(buffer) >= 65536:
                    store.write("\n".join(buffer) + "\n")
                    buffer.clear()
            if buffer:
                store.write("\n".join(buffer) + "\n")
            self._close_store(store, 2)
            log.info("phase 2: %d least graphs", least_map.least_count)
        else:
            least_map = self._parse_least_map(numerics, payload)
            del payload
        least_positions = least_map.least_positions()
        least_numerics = [int(numerics[p]) for p in least_positions]

        # phases 3-5
        phi_flat, phi_off, valid_count = self._phases_3_to_5(
            numerics, least_positions, least_numerics, compress
        )
        nontrivial_count = int(len(phi_flat))

        # phase 6
        payload = self._load(6)
        if payload is None:
            keep = _run_phase6_kernel(least_map, phi_flat, phi_off)
            minimal_groups = [
                phi_flat[phi_off[i] : phi_off[i + 1]][keep[phi_off[i] : phi_off[i + 1]]]
                for i in range(len(least_positions))
            ]
            body = "".join(
                _grouped_line(least_numerics[i], [minimal_groups[i]])
                for i in range(len(least_numerics))
            )
            self._store_text(6, body)
            log.info("phase 6: %d minimal", sum(len(g) for g in minimal_groups))
        else:
            minimal_groups = [values for _, values in _parse_grouped(payload)]
        minimal_count = int(sum(len(g) for g in minimal_groups))

        # phase 7
        minimal = [
            GraphInference(Web(n, least_numerics[i]), Web(n, int(v)))
            for i in range(len(least_numerics))
            for v in minimal_groups[i]
        ]
        payload = self._load(7)
        if payload is None:
            outcome = phase7_independent(minimal, config.rules, config.workers)
            lines = [f"rule {name} {count}" for name, count in outcome.rule_counts]
            lines.append(f"residual {len(outcome.residual)}")
            lines.extend(f"{inf.lhs.edges} {inf.rhs.edges}" for inf in outcome.residual)
            self._store_text(7, "\n".join(lines) + "\n")
            log.info("phase 7: %d residual", len(outcome.residual))
            self._verify_residual(numerics, outcome)
        else:
            outcome = self._parse_phase7(payload)
        return self._report(
            numerics, least_positions, valid_count, nontrivial_count, minimal_count, outcome
        )

    def _parse_least_map(self, numerics: np.ndarray, payload: bytes) -> LeastMap:
        count = len(numerics)
        least_index = np.empty(count, dtype=np.int32)
        perm_enc = np.empty(count, dtype=np.int64)
        for i, line in enumerate(payload.splitlines()):
            left, _, perm_text = line.partition(b":")
            _, _, least_text = left.partition(b"->")
            least_index[i] = np.searchsorted(numerics, int(least_text))
            enc = 0
            for j, token in enumerate(perm_text.split()):
                enc |= int(token) << (4 * j)
            perm_enc[i] = enc
        return LeastMap(self.config.n, numerics, least_index, perm_enc)

    def _phases_3_to_5(
        self,
        numerics: np.ndarray,
        least_positions: np.ndarray,
        least_numerics: list[int],
        compress: bool,
    ) -> tuple[np.ndarray, np.ndarray, int]:
        config = self.config
        payload5 = None
        if self._load(3, verify_payload=False) is not None:
            if self._load(4, verify_payload=False) is not None:
                payload5 = self._load(5)
        if payload5 is not None:
            head, _, rest = payload5.partition(b"\n")
            valid_count = int(head.split()[1])
            phi_groups = [values for _, values in _parse_grouped(rest)]
        else:
            sweep = _Sweep(config.n, numerics, least_positions, config.entailment)
            store3 = self._open_store(3)
            spools: dict[int, object] = {}

            def valid_sink(ci: int, ordinal: int, values: np.ndarray) -> None:
                if self.ckpt is None:
                    return
                if ci not in spools:
                    spools[ci] = open(self.ckpt / f"phase4.spool{ci}", "w")
                spools[ci].write(",".join(map(str, values.tolist())) + "\n")

            sweep.run(phase3_sink=store3, valid_sink=valid_sink)
            self._close_store(store3, 3)
            # merge the per-chunk spools into grouped per-least records
            store4 = self._open_store(4)
            if self.ckpt is not None and spools:
                for handle in spools.values():
                    handle.close()
                readers = [open(self.ckpt / f"phase4.spool{ci}") for ci in sorted(spools)]
                for value in least_numerics:
                    parts = [r.readline().strip() for r in readers]
                    joined = ",".join(p for p in parts if p)
                    store4.write(f"{value} : {joined}\n")
                for ci, reader in zip(sorted(spools), readers):
                    reader.close()
                    os.remove(self.ckpt / f"phase4.spool{ci}")
            self._close_store(store4, 4, compress=compress)
            phi_groups = sweep.phi_groups()
            valid_count = sweep.valid_count
            store5 = self._open_store(5)
            store5.write(f"counts {valid_count}\n")
            for value, group in zip(least_numerics, phi_groups):
                store5.write(_grouped_line(value, [group]))
            self._close_store(store5, 5, compress=compress)
            log.info(
                "phase 4: %d valid; phase 5: %d nontrivial",
                valid_count,
                sum(len(g) for g in phi_groups),
            )
        phi_off = np.zeros(len(phi_groups) + 1, dtype=np.int64)
        for i, group in enumerate(phi_groups):
            phi_off[i + 1] = phi_off[i] + len(group)
        phi_flat = (
            np.concatenate(phi_groups) if phi_groups else np.empty(0, dtype=np.int64)
        ).astype(np.int64)
        return phi_flat, phi_off, valid_count

    def _parse_phase7(self, payload: bytes) -> Phase7Outcome:
        rule_counts = []
        residual = []
        n = self.config.n
        lines = payload.decode().splitlines()
        i = 0
        while i < len(lines) and lines[i].startswith("rule "):
            _, name, count = lines[i].split()
            rule_counts.append((name, int(count)))
            i += 1
        for line in lines[i + 1 :]:
            lhs, rhs = line.split()
            residual.append(GraphInference(Web(n, int(lhs)), Web(n, int(rhs))))
        classes = tuple(iso.dedup_inferences(residual)) if residual else ()
        return Phase7Outcome(tuple(rule_counts), tuple(residual), classes)

    def _verify_residual(self, numerics: np.ndarray, outcome: Phase7Outcome) -> None:
        """Independent re-check of every residual inference: validity,
        non-triviality, least LHS, rule independence, and direct logical
        minimality over the whole graph family."""
        if not outcome.residual:
            return
        from ._kernels import batch_maximal_cliques, count_interpolants

        config = self.config
        entails = _entails(config.entailment)
        flat, offsets = batch_maximal_cliques(numerics, config.n)
        size = 1 << config.n
        idx_all = np.arange(size)
        for inf in outcome.residual:
            if not entails(inf.lhs, inf.rhs):
                raise AssertionError(f"residual {inf} is not valid")
            lhs, rhs = inf.lhs, inf.rhs
            if config.entailment == "stable":
                lhs, rhs = dual(inf.rhs), dual(inf.lhs)
            if cq.is_trivial(lhs, rhs):
                raise AssertionError(f"residual {inf} is trivial")
            if not is_least(inf.lhs):
                raise AssertionError(f"residual {inf} has a non-least LHS")
            for rule in config.rules:
                if is_instance(inf, rule.inference):
                    raise AssertionError(f"residual {inf} matches rule {rule.name}")
            up = np.zeros(size, dtype=np.uint8)
            up[list(cq.maximal_cliques(rhs))] = 1
            for i in range(config.n):
                bit = 1 << i
                hi = idx_all[(idx_all & bit) != 0]
                up[hi] |= up[hi ^ bit]
            r_cliques = np.array(cq.maximal_cliques(lhs), dtype=np.int64)
            bad = count_interpolants(r_cliques, up, flat, offsets, numerics, lhs.edges, rhs.edges)
            if bad:
                raise AssertionError(f"residual {inf} admits {bad} interpolants")

    def _report(
        self,
        numerics: np.ndarray,
        least_positions: np.ndarray,
        valid_count: int,
        nontrivial_count: int,
        minimal_count: int,
        outcome: Phase7Outcome,
    ) -> SearchReport:
        classes = []
        for i, inf in enumerate(outcome.classes, start=1):
            if is_p4_free(inf.lhs) and is_p4_free(inf.rhs):
                lhs_text = print_formula(from_web(inf.lhs))
                rhs_text = print_formula(from_web(inf.rhs))
            else:
                lhs_text = rhs_text = "-"
            classes.append(
                ClassReport(
                    index=i,
                    inference=inf,
                    lhs_formula=lhs_text,
                    rhs_formula=rhs_text,
                    self_dual=is_self_dual(inf),
                )
            )
        return SearchReport(
            n=self.config.n,
            mode=self.config.mode,
            entailment=self.config.entailment,
            rules_name=self.config.rules.name,
            rules_digest=self.config.rules.digest,
            graph_count=len(numerics),
            least_count=len(least_positions),
            valid_count=valid_count,
            nontrivial_count=nontrivial_count,
            minimal_count=minimal_count,
            rule_counts=outcome.rule_counts,
            residual_count=len(outcome.residual),
            classes=tuple(classes),
        )
