"""Steady-state evolutionary search across regions.

Candidates evolve independently of any region; each evaluation trains a
candidate on one randomly scheduled region and normalizes its validation
loss by that region's reference (conv-baseline) loss, making losses
comparable across regions. Offspring are produced two at a time as worker
capacity frees up; all population reads and writes happen on the
coordinating thread, so workers only ever train.

Single-worker runs are bit-deterministic for a fixed seed; multi-worker
runs preserve every invariant but not the evaluation order.
"""

from __future__ import annotations

import math
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..dragon import (
    CandidateArchitecture,
    SearchSpace,
    arch_hash,
    arch_to_text,
    crossover_architectures,
    mutate_architecture,
    sample_architecture,
)
from ..errors import TrainingDiverged, ValidationError

LOG_HEADER = "eval_index,arch_hash,region,raw_loss_mw,norm_loss,replaced_index,replaced_hash"
TOURNAMENT_SIZE = 3
STARVATION_FACTOR = 3  # a region idle for 3*K evaluations is scheduled next

# evaluate_fn(arch, region, seed) -> (raw_loss, trained payload or None)
EvaluateFn = Callable[[CandidateArchitecture, str, int], tuple[float, object]]


@dataclass(frozen=True)
class SearchConfig:
    population_size: int
    budget: int
    regions: tuple[str, ...]
    baseline_losses: dict[str, float]
    space: SearchSpace
    worker_count: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population size must be >= 2")
        if self.budget < self.population_size:
            raise ValidationError("evaluation budget must be >= population size")
        if not self.regions:
            raise ValidationError("need at least one region")
        for region in self.regions:
            loss = self.baseline_losses.get(region)
            if loss is None or not (loss > 0):
                raise ValidationError(f"baseline loss for {region!r} must be positive")
        if self.worker_count < 1:
            raise ValidationError("worker_count must be >= 1")


@dataclass
class Individual:
    eval_index: int
    arch: CandidateArchitecture
    region: str
    raw_loss: float
    norm_loss: float
    payload: object = None

    @property
    def hash(self) -> str:
        return arch_hash(self.arch)


@dataclass(frozen=True)
class BestEntry:
    eval_index: int
    arch: CandidateArchitecture
    raw_loss: float
    norm_loss: float
    payload: object


@dataclass(frozen=True)
class LogRow:
    eval_index: int
    arch_hash: str
    region: str
    raw_loss: float
    norm_loss: float
    replaced_index: int | None
    replaced_hash: str | None

    def to_csv(self) -> str:
        replaced_i = "" if self.replaced_index is None else str(self.replaced_index)
        replaced_h = self.replaced_hash or ""
        return (
            f"{self.eval_index},{self.arch_hash},{self.region},"
            f"{repr(self.raw_loss)},{repr(self.norm_loss)},{replaced_i},{replaced_h}"
        )


@dataclass
class SearchResult:
    best: dict[str, BestEntry]
    log_rows: list[LogRow]
    population: list[Individual]
    evaluations: int

    def best_architectures_text(self) -> dict[str, str]:
        return {region: arch_to_text(entry.arch) for region, entry in self.best.items()}


class _RegionScheduler:
    """Uniform random region choice with a starvation guarantee."""

    def __init__(self, regions: tuple[str, ...], population_size: int):
        self.regions = regions
        self.limit = STARVATION_FACTOR * population_size
        self.since = {r: 0 for r in regions}

    def choose(self, rng: np.random.Generator) -> str:
        starved = [r for r in self.regions if self.since[r] >= self.limit]
        if starved:
            pick = max(starved, key=lambda r: (self.since[r], r))
        else:
            pick = self.regions[int(rng.integers(len(self.regions)))]
        for r in self.regions:
            self.since[r] += 1
        self.since[pick] = 0
        return pick


def _tournament(population: list[Individual], rng: np.random.Generator) -> int:
    size = min(TOURNAMENT_SIZE, len(population))
    entrants = rng.choice(len(population), size=size, replace=False)
    best = min(population[i].norm_loss for i in entrants)
    winners = [int(i) for i in entrants if population[i].norm_loss == best]
    return winners[int(rng.integers(len(winners)))]


def select_parents(
    population: list[Individual], rng: np.random.Generator
) -> tuple[Individual, Individual]:
    """Two distinct individuals via independent size-3 tournaments."""
    if len(population) < 2:
        raise ValidationError("need a population of at least 2 to select parents")
    first = _tournament(population, rng)
    second = _tournament(population, rng)
    while second == first:
        second = _tournament(population, rng)
    return population[first], population[second]


def _evaluation_seed(rng_seed: int, eval_index: int) -> int:
    return int(np.random.SeedSequence([rng_seed, eval_index]).generate_state(1)[0])


@dataclass
class _Pending:
    eval_index: int
    arch: CandidateArchitecture
    region: str
    future: Future = field(repr=False)


def make_training_evaluator(tasks: dict, epochs: int, early_stop_patience: int = 3,
                            val_fraction: float = 0.1) -> EvaluateFn:
    """Real evaluator: train the candidate on the region's data.

    The candidate's own learning rate and batch size apply; raw loss is the
    MW MAE on the region's chronological validation tail.
    """
    from ..baselines.specs import ModelSpec, TrainConfig
    from ..baselines.training import train_map_regressor, validation_mae_mw

    def evaluate(arch: CandidateArchitecture, region: str, seed: int):
        data = tasks[region]
        spec = ModelSpec(
            "dragon", {"architecture": arch_to_text(arch)}, input_dims=data.input_dims
        )
        cfg = TrainConfig(
            epochs=epochs,
            batch_size=arch.batch_size,
            learning_rate=arch.learning_rate,
            seed=seed,
            early_stop_patience=early_stop_patience,
            val_fraction=val_fraction,
        )
        model = train_map_regressor(
            spec, data.maps, data.scaled, cfg,
            region_id=region, capacity_series=data.capacity_series,
        )
        return validation_mae_mw(model, data, val_fraction), model

    return evaluate


def steady_state_search(
    config: SearchConfig,
    evaluate_fn: EvaluateFn,
    log_path: str | Path | None = None,
) -> SearchResult:
    """Run the search; returns the best saved model per region.

    Initializes `population_size` random candidates, each evaluated on a
    scheduled region, then repeatedly selects two parents by tournament,
    produces two offspring by crossover followed by one mutation each,
    evaluates them on independently scheduled regions, and lets an offspring
    replace the current worst individual only when its normalized loss is
    strictly lower. A failed training counts against the budget and joins
    the log with an infinite loss; it never enters the best-per-region
    table. Stops once the budget is consumed (pair granularity may overshoot
    by one evaluation).
    """
    rng = np.random.default_rng(config.rng_seed)
    scheduler = _RegionScheduler(config.regions, config.population_size)
    population: list[Individual] = []
    best: dict[str, BestEntry] = {}
    log_rows: list[LogRow] = []
    scheduled = 0
    processed = 0

    log_file = None
    if log_path is not None:
        log_file = open(log_path, "w", encoding="utf-8", newline="\n")
        log_file.write(LOG_HEADER + "\n")

    def run_eval(arch: CandidateArchitecture, region: str, eval_index: int):
        try:
            raw, payload = evaluate_fn(arch, region, _evaluation_seed(config.rng_seed, eval_index))
            raw = float(raw)
            if not (math.isfinite(raw) and raw > 0):
                raise ValidationError(f"evaluator returned non-positive loss {raw}")
        except TrainingDiverged:
            return math.inf, None
        return raw, payload

    def emit(row: LogRow) -> None:
        log_rows.append(row)
        if log_file is not None:
            log_file.write(row.to_csv() + "\n")
            log_file.flush()

    def process(pending: _Pending, raw: float, payload: object) -> None:
        nonlocal processed
        processed += 1
        norm = raw / config.baseline_losses[pending.region] if math.isfinite(raw) else math.inf
        individual = Individual(
            pending.eval_index, pending.arch, pending.region, raw, norm, payload
        )
        replaced_index = None
        replaced_hash = None
        if len(population) < config.population_size:
            population.append(individual)
        else:
            worst_pos = max(
                range(len(population)), key=lambda i: (population[i].norm_loss, -i)
            )
            worst = population[worst_pos]
            if individual.norm_loss < worst.norm_loss:
                replaced_index = worst.eval_index
                replaced_hash = worst.hash
                population[worst_pos] = individual
        if math.isfinite(raw):
            entry = best.get(pending.region)
            if entry is None or raw < entry.raw_loss:
                best[pending.region] = BestEntry(
                    pending.eval_index, pending.arch, raw, norm, payload
                )
        emit(
            LogRow(
                pending.eval_index,
                individual.hash,
                pending.region,
                raw,
                norm,
                replaced_index,
                replaced_hash,
            )
        )

    try:
        with ThreadPoolExecutor(max_workers=config.worker_count) as executor:
            in_flight: list[_Pending] = []

            def submit(arch: CandidateArchitecture, region: str) -> None:
                nonlocal scheduled
                eval_index = scheduled
                scheduled += 1
                future = executor.submit(run_eval, arch, region, eval_index)
                in_flight.append(_Pending(eval_index, arch, region, future))

            for _ in range(config.population_size):
                submit(sample_architecture(config.space, rng), scheduler.choose(rng))

            capacity = max(2, config.worker_count)
            while in_flight:
                if config.worker_count == 1:
                    ready = in_flight.pop(0)
                else:
                    wait([p.future for p in in_flight], return_when=FIRST_COMPLETED)
                    pos = next(i for i, p in enumerate(in_flight) if p.future.done())
                    ready = in_flight.pop(pos)
                raw, payload = ready.future.result()
                process(ready, raw, payload)

                init_done = processed >= config.population_size and not any(
                    p.eval_index < config.population_size for p in in_flight
                )
                while (
                    init_done
                    and scheduled < config.budget
                    and len(in_flight) + 2 <= capacity
                ):
                    p1, p2 = select_parents(population, rng)
                    c1, c2 = crossover_architectures(config.space, p1.arch, p2.arch, rng)
                    c1 = mutate_architecture(config.space, c1, rng)
                    c2 = mutate_architecture(config.space, c2, rng)
                    submit(c1, scheduler.choose(rng))
                    submit(c2, scheduler.choose(rng))
    finally:
        if log_file is not None:
            log_file.close()

    return SearchResult(best=best, log_rows=log_rows, population=population, evaluations=processed)
