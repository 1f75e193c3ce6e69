"""Incremental monitoring of a fixed hyperproperty over a growing trace log."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .evaluate import EMPTY_SET_POLICIES, EvalCache, Verdict, _empty_verdict, check
from .formula import HyperFormula, Quant, classify, parse_formula
from .kripke import FiniteTrace, FirstLetterMismatch, LogMode, TraceLog, build_tree, minimize_to_dag
from .parallel import check_parallel, supports_parallel

__all__ = ["Batch", "HistoryEntry", "Session", "session_new", "ingest", "current_verdict"]


@dataclass(frozen=True)
class Batch:
    traces: tuple[FiniteTrace, ...]
    label: str | None = None

    def __init__(self, traces: Iterable, label: str | None = None):
        ts = tuple(t if isinstance(t, FiniteTrace) else FiniteTrace(t) for t in traces)
        if not ts:
            raise ValueError("a batch needs at least one trace")
        object.__setattr__(self, "traces", ts)
        object.__setattr__(self, "label", label)


@dataclass(frozen=True)
class HistoryEntry:
    batch: int
    holds: bool
    tuples_evaluated: int
    label: str | None = None


@dataclass
class Session:
    """Monitoring state: the policy, the log so far and the tuple cache.

    Universal-only policies lock once they fail and existential-only ones once
    they hold; a locked session answers without evaluating anything.
    """

    policy: HyperFormula
    mode: LogMode = LogMode.TREE
    empty_set: str = "error"
    use_cache: bool = True
    workers: int = 1
    log: TraceLog | None = None
    cache: EvalCache = field(default_factory=EvalCache)
    locked_verdict: bool | None = None
    history: list[HistoryEntry] = field(default_factory=list)
    _last: Verdict | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.empty_set not in EMPTY_SET_POLICIES:
            raise ValueError(f"unknown empty-set policy {self.empty_set!r}")
        self.mode = LogMode(self.mode)

    @property
    def _lock_value(self) -> bool | None:
        fc = classify(self.policy)
        if not fc.alternation_free or not self.policy.prefix:
            return None
        return self.policy.prefix[0][0] is Quant.EXISTS

    def ingest(self, batch: Batch | Iterable[FiniteTrace]) -> Verdict:
        if not isinstance(batch, Batch):
            batch = Batch(batch)
        if self.log is not None:
            root = self.log.traces[0][0]
            for t in batch.traces:
                if t[0] != root:
                    raise FirstLetterMismatch(root, t[0])
            log = self.log.extend(batch.traces)
        else:
            log = build_tree(batch.traces)
            if self.mode is LogMode.DAG:
                log = minimize_to_dag(log)

        if self.locked_verdict is not None:
            prev = self._last
            verdict = Verdict(
                self.locked_verdict,
                witness=prev.witness if prev else None,
                witness_traces=prev.witness_traces if prev else None,
            )
        elif self.workers > 1 and supports_parallel(self.policy):
            verdict = check_parallel(log, self.policy, self.workers, empty_set=self.empty_set)
        else:
            verdict = check(log, self.policy, cache=self.cache if self.use_cache else None, empty_set=self.empty_set)
        self.log = log
        if self.locked_verdict is None and verdict.holds is self._lock_value:
            self.locked_verdict = verdict.holds
        self._last = verdict
        self.history.append(
            HistoryEntry(len(self.history), verdict.holds, verdict.stats["tuples_evaluated"], batch.label)
        )
        return verdict

    def current_verdict(self) -> Verdict:
        if self._last is not None:
            return self._last
        if not self.policy.prefix:
            return check([], self.policy)
        return _empty_verdict(self.policy, self.empty_set)

    def report(self) -> dict:
        """Current verdict plus per-batch history and cache statistics."""
        out = self.current_verdict().to_json()
        out["locked"] = self.locked_verdict is not None
        out["history"] = [
            {"batch": h.batch, "holds": h.holds, "tuples_evaluated": h.tuples_evaluated, "label": h.label}
            for h in self.history
        ]
        out["cache"] = {"entries": len(self.cache), "hits": self.cache.hits, "misses": self.cache.misses}
        return out


def session_new(policy: HyperFormula | str, mode: LogMode | str = LogMode.TREE, **kwargs) -> Session:
    if isinstance(policy, str):
        policy = parse_formula(policy)
    return Session(policy, LogMode(mode), **kwargs)


def ingest(session: Session, batch: Batch | Iterable[FiniteTrace]) -> Session:
    session.ingest(batch)
    return session


def current_verdict(session: Session) -> Verdict:
    return session.current_verdict()

