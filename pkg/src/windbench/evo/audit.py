"""Independent replay checker for search logs.

Reads only the CSV log and re-derives the population dynamics, verifying
the steady-state invariants without touching the search implementation:
population size stays at K, replacements remove exactly the current worst
and only for a strictly lower normalized loss, per-region best raw loss is
monotone non-increasing, and the evaluation count respects the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import AuditError


@dataclass
class AuditReport:
    evaluations: int
    population_size: int
    best_raw_by_region: dict[str, float]
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_on_violation(self) -> None:
        if self.violations:
            raise AuditError("; ".join(self.violations))


def _parse_rows(path: str | Path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise AuditError(f"{path}: empty search log")
    header = lines[0].split(",")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise AuditError(f"{path}:{lineno}: expected {len(header)} fields")
        row = dict(zip(header, parts))
        rows.append(
            {
                "eval_index": int(row["eval_index"]),
                "arch_hash": row["arch_hash"],
                "region": row["region"],
                "raw_loss": float(row["raw_loss_mw"]),
                "norm_loss": float(row["norm_loss"]),
                "replaced_index": int(row["replaced_index"]) if row["replaced_index"] else None,
                "replaced_hash": row["replaced_hash"] or None,
            }
        )
    return rows


def replay_search_log(
    path: str | Path,
    population_size: int,
    budget: int | None = None,
    baseline_losses: dict[str, float] | None = None,
    expected_best: dict[str, float] | None = None,
) -> AuditReport:
    """Replay the log row by row and report every invariant violation."""
    rows = _parse_rows(path)
    violations: list[str] = []
    population: dict[int, dict] = {}  # eval_index -> row, exactly K after the fill
    best: dict[str, float] = {}

    if budget is not None and len(rows) > budget + 1:
        violations.append(f"{len(rows)} evaluations exceed budget {budget}+1")

    for i, row in enumerate(rows):
        tag = f"eval {row['eval_index']}"
        if baseline_losses is not None and math.isfinite(row["raw_loss"]):
            expected = row["raw_loss"] / baseline_losses[row["region"]]
            if not math.isclose(expected, row["norm_loss"], rel_tol=1e-9):
                violations.append(
                    f"{tag}: normalized loss {row['norm_loss']} != raw/baseline {expected}"
                )
        if math.isfinite(row["norm_loss"]) and row["norm_loss"] <= 0:
            violations.append(f"{tag}: non-positive normalized loss")

        if i < population_size:
            if row["replaced_index"] is not None:
                violations.append(f"{tag}: replacement during population fill")
            population[row["eval_index"]] = row
        else:
            worst = max(member["norm_loss"] for member in population.values())
            if row["replaced_index"] is not None:
                removed = population.get(row["replaced_index"])
                if removed is None:
                    violations.append(
                        f"{tag}: replaced {row['replaced_index']}, which is not in "
                        "the population"
                    )
                else:
                    # ties for worst are broken arbitrarily; any maximal member
                    # is "the current worst"
                    if removed["norm_loss"] != worst:
                        violations.append(
                            f"{tag}: replaced loss {removed['norm_loss']} is not the "
                            f"population worst {worst}"
                        )
                    if removed["arch_hash"] != row["replaced_hash"]:
                        violations.append(f"{tag}: replaced-hash mismatch")
                if row["norm_loss"] >= worst:
                    violations.append(
                        f"{tag}: replacement without strictly lower loss "
                        f"({row['norm_loss']} >= {worst})"
                    )
                population.pop(row["replaced_index"], None)
                population[row["eval_index"]] = row
            else:
                if row["norm_loss"] < worst:
                    violations.append(
                        f"{tag}: loss {row['norm_loss']} beats worst {worst} "
                        "but nothing was replaced"
                    )
        if len(population) > population_size:
            violations.append(f"{tag}: population grew to {len(population)}")

        if math.isfinite(row["raw_loss"]):
            current = best.get(row["region"], math.inf)
            best[row["region"]] = min(current, row["raw_loss"])

    if len(rows) >= population_size and len(population) != population_size:
        violations.append(
            f"final population size {len(population)} != {population_size}"
        )
    if expected_best is not None:
        for region, raw in expected_best.items():
            replayed = best.get(region)
            if replayed is None or not math.isclose(replayed, raw, rel_tol=1e-9):
                violations.append(
                    f"best-per-region mismatch for {region}: log says {replayed}, "
                    f"search reported {raw}"
                )
    return AuditReport(
        evaluations=len(rows),
        population_size=min(len(population), population_size),
        best_raw_by_region=best,
        violations=violations,
    )
