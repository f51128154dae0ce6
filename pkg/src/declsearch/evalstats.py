"""Blind-comparison evaluation statistics.

Judges see three engines under permuted labels A/B/C and answer with a
ranking line like "Engine B, Engine A = Engine C". This module assigns the
labels, parses the lines under competition ranking (ties share the better
place), tallies place rates and pairwise head-to-head outcomes, and
aggregates several runs into mean plus standard error.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyInput, FormatError, MismatchedEngines, ParseError, WrongArity

ENGINE_LABELS = ("A", "B", "C")
PLACES = (1, 2, 3)


@dataclass(frozen=True)
class Ranking:
    """Competition-ranked places for the three labels."""

    places: Mapping[str, int]


@dataclass
class RunStats:
    n_queries: int
    place_rates: dict[str, dict[int, float]]  # engine -> place -> percent
    head_to_head: dict[tuple[str, str], dict[str, float]]  # pair -> wins/losses/ties percents

    def engines(self) -> tuple[str, ...]:
        return tuple(sorted(self.place_rates))


@dataclass(frozen=True)
class MeanSE:
    mean: float
    se: float


@dataclass
class AggregateStats:
    n_runs: int
    se_defined: bool
    place_rates: dict[str, dict[int, MeanSE]] = field(default_factory=dict)
    head_to_head: dict[tuple[str, str], dict[str, MeanSE]] = field(default_factory=dict)


def permute_assignment(engines: Sequence[str], query_index: int, seed: int) -> dict[str, str]:
    """Deterministic uniform label assignment for one query."""
    if len(engines) != 3:
        raise WrongArity(f"need exactly 3 engines, got {len(engines)}")
    rng = random.Random(seed * 1_000_003 + query_index)
    order = list(engines)
    rng.shuffle(order)
    return dict(zip(ENGINE_LABELS, order))


def parse_ranking_line(line: str) -> Ranking:
    """Parse the final line of a judge reply into places.

    Grammar: rank groups joined by ", "; tied labels within a group joined
    by " = "; labels exactly "Engine A"/"Engine B"/"Engine C", each once.
    """
    candidates = [part for part in line.splitlines() if part.strip()]
    if not candidates:
        raise ParseError("no ranking line found")
    final = candidates[-1].strip()
    places: dict[str, int] = {}
    ranked = 0
    for group_text in final.split(", "):
        labels = []
        for token in group_text.split(" = "):
            if not token.startswith("Engine ") or token[7:] not in ENGINE_LABELS:
                raise ParseError(f"unknown token {token!r}")
            label = token[7:]
            if label in places or label in labels:
                raise ParseError(f"duplicate label {token!r}")
            labels.append(label)
        for label in labels:
            places[label] = ranked + 1
        ranked += len(labels)
    if set(places) != set(ENGINE_LABELS):
        missing = sorted(set(ENGINE_LABELS) - set(places))
        raise ParseError(f"missing labels: {missing}")
    return Ranking(places=places)


def format_ranking_line(ranking: Ranking) -> str:
    """Inverse of parse_ranking_line for valid rankings."""
    by_place: dict[int, list[str]] = {}
    for label, place in ranking.places.items():
        by_place.setdefault(place, []).append(label)
    groups = [" = ".join(f"Engine {label}" for label in sorted(by_place[p])) for p in sorted(by_place)]
    return ", ".join(groups)


def _as_places(item: Ranking | Mapping[str, int]) -> Mapping[str, int]:
    return item.places if isinstance(item, Ranking) else item


def place_rates(rankings: Sequence[Ranking | Mapping[str, int]]) -> dict[str, dict[int, float]]:
    """Percent of rankings in which each engine took each place.

    With ties, per-place columns may sum past 100 across engines.
    """
    items = [_as_places(r) for r in rankings]
    if not items:
        raise EmptyInput("no rankings")
    engines = sorted(items[0])
    counts = {engine: {place: 0 for place in PLACES} for engine in engines}
    for places in items:
        for engine in engines:
            counts[engine][places[engine]] += 1
    n = len(items)
    return {
        engine: {place: 100.0 * counts[engine][place] / n for place in PLACES}
        for engine in engines
    }


def head_to_head(rankings: Sequence[Ranking | Mapping[str, int]]) -> dict[tuple[str, str], dict[str, float]]:
    """Pairwise win/loss/tie percentages. "wins" is the first of the pair."""
    items = [_as_places(r) for r in rankings]
    if not items:
        raise EmptyInput("no rankings")
    engines = sorted(items[0])
    stats: dict[tuple[str, str], dict[str, float]] = {}
    for i, x in enumerate(engines):
        for y in engines[i + 1 :]:
            wins = losses = ties = 0
            for places in items:
                if places[x] < places[y]:
                    wins += 1
                elif places[x] > places[y]:
                    losses += 1
                else:
                    ties += 1
            n = len(items)
            stats[(x, y)] = {
                "wins": 100.0 * wins / n,
                "losses": 100.0 * losses / n,
                "ties": 100.0 * ties / n,
            }
    return stats


def compute_run_stats(rankings: Sequence[Ranking | Mapping[str, int]]) -> RunStats:
    return RunStats(
        n_queries=len(rankings),
        place_rates=place_rates(rankings),
        head_to_head=head_to_head(rankings),
    )


def _mean_se(values: list[float]) -> MeanSE:
    if len(values) == 1:
        return MeanSE(values[0], 0.0)
    return MeanSE(statistics.mean(values), statistics.stdev(values) / len(values) ** 0.5)


def aggregate_runs(runs: Sequence[RunStats]) -> AggregateStats:
    """Mean and SE of every metric across runs.

    SE is the sample standard deviation of run-level values over sqrt(n).
    A single run yields SE 0 with se_defined False.
    """
    if not runs:
        raise EmptyInput("no runs")
    engine_sets = {run.engines() for run in runs}
    if len(engine_sets) > 1:
        raise MismatchedEngines(f"runs cover different engines: {sorted(engine_sets)}")
    out = AggregateStats(n_runs=len(runs), se_defined=len(runs) > 1)
    for engine in runs[0].engines():
        out.place_rates[engine] = {
            place: _mean_se([run.place_rates[engine][place] for run in runs]) for place in PLACES
        }
    for pair in runs[0].head_to_head:
        out.head_to_head[pair] = {
            key: _mean_se([run.head_to_head[pair][key] for run in runs]) for key in ("wins", "losses", "ties")
        }
    return out


def load_transcript(path: str | Path) -> list[dict]:
    """Read eval.jsonl records."""
    records = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                record["query_index"] = int(record["query_index"])
                record["run"] = int(record["run"])
                assignment = record["assignment"]
                if set(assignment) != set(ENGINE_LABELS):
                    raise ValueError(f"assignment labels {sorted(assignment)}")
                record["ranking_line"] = str(record["ranking_line"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad transcript record: {exc}", path=str(path), line=line_no) from exc
            records.append(record)
    return records


def evaluate_transcript(records: Iterable[Mapping]) -> tuple[list[RunStats], AggregateStats]:
    """Per-run statistics keyed by engine name, plus the aggregate."""
    by_run: dict[int, list[dict[str, int]]] = {}
    for record in records:
        ranking = parse_ranking_line(record["ranking_line"])
        named = {record["assignment"][label]: place for label, place in ranking.places.items()}
        by_run.setdefault(record["run"], []).append(named)
    if not by_run:
        raise EmptyInput("transcript holds no records")
    runs = [compute_run_stats(by_run[run]) for run in sorted(by_run)]
    return runs, aggregate_runs(runs)
