"""Model-selection strategies over categorical designs.

Three searches share the same fitted-statistics backend:

* ``priority_search``: randomized search over whole terms. Each iteration
  draws the number of interaction terms from a prior, samples that many
  crosses, keeps each remaining base feature with a fixed probability, and
  keeps the best candidate by R^2.
* ``forward_selection`` / ``backward_elimination``: greedy stepwise moves
  over the individual one-hot columns of the full encoding (all bases and
  all crosses), driven by per-column t-test p-values with standard-error
  and column-order tie-breaks, guarded by a stop on abrupt AIC increases.

All three are deterministic for a fixed seed and thread count independent:
random draws use per-iteration child streams and reductions happen in
iteration order.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .design import DesignMatrix, ModelSpec, Term, build_design, enumerate_terms, normalize_spec
from .formula import render_formula
from .ols import FitSummary, fit
from .tabular import DataTable

__all__ = [
    "PriorConfig",
    "StoppingRule",
    "TraceRecord",
    "SearchTrace",
    "aic_guard",
    "priority_search",
    "forward_selection",
    "backward_elimination",
    "columns_to_formula",
]


@dataclass(frozen=True)
class PriorConfig:
    """Sampling priors for the randomized term search.

    ``k_probs[k]`` is the probability of proposing k interaction terms;
    ``p_base`` the inclusion probability of each non-crossed base feature.
    """

    iterations: int
    seed: int = 0
    k_probs: tuple[float, ...] = (0.2, 0.4, 0.4)
    p_base: float = 0.75

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if any(q < 0 for q in self.k_probs):
            raise ValueError("k_probs must be non-negative")
        if abs(sum(self.k_probs) - 1.0) > 1e-12:
            raise ValueError("k_probs must sum to 1")
        if not 0.0 < self.p_base <= 1.0:
            raise ValueError("p_base must be in (0, 1]")


@dataclass(frozen=True)
class StoppingRule:
    """Stepwise stopping parameters: significance level and AIC-surge guard."""

    alpha: float = 0.01
    aic_abs_jump: float = 20.0
    aic_rel_jump: float = 0.01
    max_steps: int | None = None  # defaults: column count (backward), 100 (forward)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.aic_abs_jump < 0 or self.aic_rel_jump < 0:
            raise ValueError("AIC jump thresholds must be non-negative")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class TraceRecord:
    step: int
    event: str  # fit | skip | add | remove | restore | stop
    description: str
    accepted: bool
    best_r2: float
    r2: float | None = None
    mse: float | None = None
    aic: float | None = None
    log_likelihood: float | None = None
    p_value: float | None = None
    wall_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "event": self.event,
            "description": self.description,
            "accepted": self.accepted,
            "best_r2": self.best_r2,
            "r2": self.r2,
            "mse": self.mse,
            "aic": self.aic,
            "log_likelihood": self.log_likelihood,
            "p_value": self.p_value,
            "wall_seconds": self.wall_seconds,
        }


@dataclass
class SearchTrace:
    """Per-step history of one search run, ready for JSON-lines export."""

    method: str
    records: list[TraceRecord] = field(default_factory=list)
    design: DesignMatrix | None = None

    def best_r2_series(self) -> list[float]:
        return [r.best_r2 for r in self.records]

    @property
    def guard_triggered(self) -> bool:
        return any(r.event == "restore" for r in self.records) or any(
            r.event == "stop" and "AIC" in r.description for r in self.records
        )

    def save_jsonl(self, path) -> None:
        import json

        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec.to_dict()))
                fh.write("\n")


def aic_guard(prev_aic: float, new_aic: float, rule: StoppingRule) -> bool:
    """True when the AIC increase counts as abrupt under ``rule``.

    The threshold is max(absolute jump, relative jump * |prev|). Moving off
    a perfect fit (AIC = -inf) to any finite AIC is always abrupt; NaN
    inputs never trigger.
    """
    if math.isnan(prev_aic) or math.isnan(new_aic):
        return False
    if math.isinf(prev_aic):
        return prev_aic < 0 and new_aic > prev_aic
    threshold = max(rule.aic_abs_jump, rule.aic_rel_jump * abs(prev_aic))
    return new_aic - prev_aic > threshold


def _run_map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _metrics(res: FitSummary) -> dict:
    return {
        "r2": res.r_squared,
        "mse": res.mse,
        "aic": res.aic,
        "log_likelihood": res.log_likelihood,
    }


def priority_search(
    table: DataTable, prior: PriorConfig, threads: int = 1
) -> tuple[ModelSpec, FitSummary, SearchTrace]:
    """Randomized prior-guided search over term subsets, best by R^2.

    Candidates are normalized (a sampled cross suppresses its base
    features), empty candidates are skipped but logged, and the incumbent
    is replaced only on strict R^2 improvement. Results are identical for
    any ``threads`` value.
    """
    terms = enumerate_terms(table.schema)
    bases = [t for t in terms if not t.is_cross]
    crosses = [t for t in terms if t.is_cross]
    for k, q in enumerate(prior.k_probs):
        if q > 0 and k > len(crosses):
            raise ValueError(
                f"prior puts mass on k={k} interactions but only "
                f"{len(crosses)} exist"
            )
    full = build_design(table, terms)
    y = table.target
    k_probs = np.asarray(prior.k_probs, dtype=np.float64)
    children = np.random.SeedSequence(prior.seed).spawn(prior.iterations)

    def propose(i: int):
        start = time.perf_counter()
        rng = np.random.default_rng(children[i])
        k = int(rng.choice(len(k_probs), p=k_probs))
        if k:
            picked = rng.choice(len(crosses), size=k, replace=False)
            chosen_crosses = [crosses[j] for j in sorted(picked)]
        else:
            chosen_crosses = []
        crossed = {f for t in chosen_crosses for f in t.features}
        draws = rng.random(len(bases))
        chosen_bases = [
            b
            for b, u in zip(bases, draws)
            if u < prior.p_base and b.features[0] not in crossed
        ]
        spec = normalize_spec(chosen_bases + chosen_crosses)
        if not spec.terms:
            return i, None, None, time.perf_counter() - start
        res = fit(full.values[:, full.indices_for_terms(spec.terms)], y)
        return i, spec, res, time.perf_counter() - start

    results = _run_map(propose, range(prior.iterations), threads)

    trace = SearchTrace(method="priority", design=full)
    best_spec: ModelSpec | None = None
    best_fit: FitSummary | None = None
    best_r2 = 0.0
    for i, spec, res, wall in results:
        if spec is None:
            trace.records.append(
                TraceRecord(
                    step=i,
                    event="skip",
                    description="empty candidate",
                    accepted=False,
                    best_r2=best_r2,
                    wall_seconds=wall,
                )
            )
            continue
        accepted = res.r_squared > best_r2
        if accepted:
            best_spec, best_fit = spec, res
            best_r2 = res.r_squared
        trace.records.append(
            TraceRecord(
                step=i,
                event="fit",
                description=render_formula(table.schema.target, spec.terms),
                accepted=accepted,
                best_r2=best_r2,
                wall_seconds=wall,
                **_metrics(res),
            )
        )
    if best_spec is None:
        best_spec = ModelSpec(terms=frozenset())
        best_fit = fit(full.values[:, [0]], y)
    return best_spec, best_fit, trace


def _candidate_key(res: FitSummary, position: int) -> tuple[float, float]:
    """(p, std-error) of one column with NaN mapped to the worst values."""
    p = res.p_values[position]
    se = res.std_errors[position]
    p_eff = 1.0 if math.isnan(p) else float(p)
    se_eff = math.inf if math.isnan(se) else float(se)
    return p_eff, se_eff


def forward_selection(
    table: DataTable, rule: StoppingRule = StoppingRule(), threads: int = 1
) -> tuple[list[int], FitSummary, SearchTrace]:
    """Greedy forward selection over the columns of the full encoding.

    Starting from the intercept-only model, each step refits one candidate
    model per remaining column and admits the column with the smallest
    p-value (ties: smaller standard error, then column order). Stops when
    the smallest p-value reaches ``rule.alpha``, when admitting the column
    would abruptly increase AIC, or at ``rule.max_steps``.
    """
    full = build_design(table, enumerate_terms(table.schema))
    X, y = full.values, table.target
    if full.p < 2:
        raise ValueError("design has no candidate columns")
    remaining = list(range(1, full.p))
    selected: list[int] = []
    current = fit(X[:, [0]], y)
    max_steps = rule.max_steps if rule.max_steps is not None else 100

    trace = SearchTrace(method="forward", design=full)
    trace.records.append(
        TraceRecord(
            step=0,
            event="fit",
            description="intercept only",
            accepted=False,
            best_r2=current.r_squared,
            **_metrics(current),
        )
    )

    def evaluate(j: int):
        cols = [0, *selected, j]
        res = fit(X[:, cols], y)
        if res.rank < len(cols):  # candidate adds no rank: worthless
            return (1.0, math.inf), res
        return _candidate_key(res, len(cols) - 1), res

    for step in range(1, max_steps + 1):
        if not remaining:
            break
        start = time.perf_counter()
        evaluated = _run_map(evaluate, remaining, threads)
        best_pos = min(
            range(len(remaining)), key=lambda i: (*evaluated[i][0], remaining[i])
        )
        (best_p, _), best_fit_res = evaluated[best_pos]
        j = remaining[best_pos]
        wall = time.perf_counter() - start
        if best_p >= rule.alpha:
            trace.records.append(
                TraceRecord(
                    step=step,
                    event="stop",
                    description=(
                        f"minimal p-value {best_p:.4g} not below alpha={rule.alpha}"
                    ),
                    accepted=False,
                    best_r2=max(current.r_squared, trace.records[-1].best_r2),
                    p_value=best_p,
                    wall_seconds=wall,
                )
            )
            break
        if aic_guard(current.aic, best_fit_res.aic, rule):
            trace.records.append(
                TraceRecord(
                    step=step,
                    event="stop",
                    description=(
                        f"abrupt AIC increase adding {full.columns[j].label!r}; "
                        "column not admitted"
                    ),
                    accepted=False,
                    best_r2=max(current.r_squared, trace.records[-1].best_r2),
                    p_value=best_p,
                    wall_seconds=wall,
                )
            )
            break
        selected.append(j)
        selected.sort()
        remaining.remove(j)
        current = best_fit_res
        trace.records.append(
            TraceRecord(
                step=step,
                event="add",
                description=full.columns[j].label,
                accepted=True,
                best_r2=max(current.r_squared, trace.records[-1].best_r2),
                p_value=best_p,
                wall_seconds=wall,
                **_metrics(current),
            )
        )

    final = fit(X[:, [0, *selected]], y)
    return selected, final, trace


def backward_elimination(
    table: DataTable, rule: StoppingRule = StoppingRule(), threads: int = 1
) -> tuple[list[int], FitSummary, SearchTrace]:
    """Greedy elimination from the full encoding of all bases and crosses.

    Each step drops the column with the largest p-value (aliased columns
    count as p = 1 with infinite standard error, so they go first; further
    ties break by standard error, then column order) and refits. Stops
    when every remaining p-value is at most ``rule.alpha``; if a removal
    abruptly increases AIC the column is restored and the search ends.
    """
    full = build_design(table, enumerate_terms(table.schema))
    X, y = full.values, table.target
    if full.p < 2:
        raise ValueError("design has no candidate columns")
    cols = list(range(1, full.p))
    current = fit(X[:, [0, *cols]], y)
    max_steps = rule.max_steps if rule.max_steps is not None else full.p

    trace = SearchTrace(method="backward", design=full)
    best_r2 = current.r_squared
    trace.records.append(
        TraceRecord(
            step=0,
            event="fit",
            description=f"full design ({len(cols)} columns)",
            accepted=False,
            best_r2=best_r2,
            **_metrics(current),
        )
    )

    for step in range(1, max_steps + 1):
        if not cols:
            break
        start = time.perf_counter()
        keys = [_candidate_key(current, i + 1) for i in range(len(cols))]
        worst_pos = max(range(len(cols)), key=lambda i: (*keys[i], -cols[i]))
        worst_p, _ = keys[worst_pos]
        j = cols[worst_pos]
        if worst_p <= rule.alpha:
            trace.records.append(
                TraceRecord(
                    step=step,
                    event="stop",
                    description=(
                        f"maximal p-value {worst_p:.4g} within alpha={rule.alpha}"
                    ),
                    accepted=False,
                    best_r2=best_r2,
                    p_value=worst_p,
                    wall_seconds=time.perf_counter() - start,
                )
            )
            break
        tentative = [c for c in cols if c != j]
        res = fit(X[:, [0, *tentative]], y)
        wall = time.perf_counter() - start
        if aic_guard(current.aic, res.aic, rule):
            trace.records.append(
                TraceRecord(
                    step=step,
                    event="restore",
                    description=(
                        f"abrupt AIC increase removing {full.columns[j].label!r}; "
                        "column restored"
                    ),
                    accepted=False,
                    best_r2=best_r2,
                    p_value=worst_p,
                    wall_seconds=wall,
                    **_metrics(res),
                )
            )
            break
        cols = tentative
        current = res
        best_r2 = max(best_r2, current.r_squared)
        trace.records.append(
            TraceRecord(
                step=step,
                event="remove",
                description=full.columns[j].label,
                accepted=True,
                best_r2=best_r2,
                p_value=worst_p,
                wall_seconds=wall,
                **_metrics(current),
            )
        )

    final = fit(X[:, [0, *cols]], y)
    return cols, final, trace


def columns_to_formula(columns, design: DesignMatrix) -> str:
    """Formula for the terms with at least one selected column."""
    terms: set[Term] = set()
    for j in columns:
        if not 0 <= j < design.p:
            raise ValueError(f"unknown design column {j}")
        term = design.columns[j].term
        if term is not None:
            terms.add(term)
    return render_formula(design.target_name, terms)
