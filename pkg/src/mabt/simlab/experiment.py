"""Two-stage selection pipeline simulations and their summaries.

One run: draw data, fit the penalty grid on the learning data, estimate
validation performance, preselect, refit the preselected models on all
learning data, evaluate them on the hold-out set, pick the best, bound its
performance with every requested method and score it on the ground truth.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..bounds import LEGAL, MethodSpec, compute_bound
from ..measures import EvaluationTable, MeasureKind, plugin_estimates, weighted_measure
from ..resample import DEFAULT_B, bootstrap_performance, draw_resamples
from ..selection import SelectionRule, cv_performance, final_select, holdout_performance, preselect
from .data import ScenarioAConfig, gen_scenario_a, learning_set
from .lasso import LassoGridTrainer, lambda_grid, lambda_max


@dataclass(frozen=True)
class SimulationConfig:
    scenario: ScenarioAConfig = field(default_factory=ScenarioAConfig)
    measure: str = "accuracy"
    methods: tuple = ("mabt", "bt", "wald", "wilson", "cp")
    rules: tuple = ("single-best", "top-fraction=0.1", "within-1-se")
    validation: str = "cv10"
    runs: int = 500
    seed: int = 0
    alpha: float = 0.05
    B: int | None = None
    grid_size: int = 100
    cv_folds: int = 10
    refit_lambda: str = "proportional"

    def __post_init__(self):
        kind = MeasureKind.parse(self.measure)
        if not 0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.validation not in ("cv10", "holdout"):
            raise ValueError("validation must be 'cv10' or 'holdout'")
        if self.refit_lambda not in ("proportional", "same"):
            raise ValueError("refit_lambda must be 'proportional' or 'same'")
        if self.B is not None and self.B < 100:
            raise ValueError("B must be at least 100")
        for m in self.methods:
            spec = MethodSpec.parse(m)
            if spec.name not in LEGAL[kind]:
                raise ValueError(f"method {m!r} is not available for {kind.value}")
        rules = [SelectionRule.parse(r) for r in self.rules]
        if self.validation == "holdout" and any(r.name == "within-1-se" for r in rules):
            raise ValueError("within-1-se needs cross-validated validation scores")

    @property
    def kind(self):
        return MeasureKind.parse(self.measure)

    @property
    def n_resamples(self):
        return self.B or DEFAULT_B[self.kind]


@dataclass
class RunRecord:
    run: int
    measure: str
    validation: str
    rule: str
    method: str
    n_total: int
    m: int
    selected: int
    estimate: float
    bound: float
    true_performance: float
    covered: bool
    tightness: float
    fallback_used: bool
    alpha: float
    alpha_used: float
    error: str = ""

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def to_dict(self):
        return asdict(self)


def _seeds(master, run):
    data_ss, cv_ss, boot_ss = np.random.SeedSequence([int(master), int(run)]).spawn(3)
    return data_ss, int(cv_ss.generate_state(1)[0]), int(boot_ss.generate_state(2, np.uint64)[0])


def _outputs(model, X, kind):
    return model.predict(X) if kind is MeasureKind.ACCURACY else model.decision_function(X)


def simulate_run(config, run):
    """All records of one run; failures become records with ``error`` set."""
    kind = config.kind
    data_ss, cv_seed, boot_seed = _seeds(config.seed, run)
    data = gen_scenario_a(config.scenario, data_ss)
    learn = learning_set(data)
    trainer = LassoGridTrainer()

    lam_learn = lambda_max(learn.X, learn.y)
    if config.validation == "cv10":
        grid = lambda_grid(lam_learn, config.grid_size)
        scores = cv_performance(learn.X, learn.y, trainer, grid, kind, config.cv_folds, cv_seed)
        refit_grid = grid
    else:
        train, val = data["train"], data["validation"]
        grid = lambda_grid(lambda_max(train.X, train.y), config.grid_size)
        scores = holdout_performance(train.X, train.y, val.X, val.y, trainer, grid, kind)
        scale = lam_learn / lambda_max(train.X, train.y) if config.refit_lambda == "proportional" else 1.0
        refit_grid = grid * scale

    outcomes = {str(SelectionRule.parse(r)): preselect(scores, r) for r in config.rules}
    needed = sorted({k for o in outcomes.values() for k in o.preselected})
    refits = dict(zip(needed, trainer.fit_grid(learn.X, learn.y, refit_grid[needed])))

    evaluation, truth = data["evaluation"], data["ground_truth"]
    plan = None
    if any(MethodSpec.parse(m).name in ("mabt", "bt") for m in config.methods):
        plan = draw_resamples(len(evaluation), config.n_resamples, boot_seed)

    records = []
    for rule, outcome in outcomes.items():
        ids = [f"lam{k:03d}" for k in outcome.preselected]
        base = dict(run=run, measure=kind.value, validation=config.validation, rule=rule,
                    n_total=config.scenario.n_total, m=outcome.m, alpha=config.alpha)
        try:
            preds = np.column_stack([_outputs(refits[k], evaluation.X, kind) for k in outcome.preselected])
            table = EvaluationTable(evaluation.y, preds, ids)
            s = final_select(plugin_estimates(table, kind))
            chosen = refits[outcome.preselected[s]]
            truth_value = weighted_measure(kind, truth.y, _outputs(chosen, truth.X, kind))
            ensemble = bootstrap_performance(table, kind, plan) if plan is not None else None
        except Exception as exc:
            for m in config.methods:
                records.append(RunRecord(**base, method=m, selected=-1, estimate=math.nan, bound=math.nan,
                                         true_performance=math.nan, covered=False, tightness=math.nan,
                                         fallback_used=False, alpha_used=config.alpha, error=str(exc)))
            continue
        for m in config.methods:
            spec = MethodSpec.parse(m)
            if spec.name == "mabt" and outcome.rule.name == "single-best":
                continue
            if spec.name != "mabt" and outcome.m > 1:
                spec = MethodSpec(spec.name, sidak=True)
            try:
                rep = compute_bound(spec, table, kind, s, config.alpha, ensemble, fallback_on_failure=True)
                bound = rep.lower_bound
                records.append(RunRecord(
                    **base, method=spec.name, selected=outcome.preselected[s], estimate=rep.estimate,
                    bound=bound, true_performance=truth_value, covered=bool(truth_value >= bound),
                    tightness=truth_value - bound,
                    fallback_used=rep.fallback_used,
                    alpha_used=rep.alpha_adjusted,
                ))
            except Exception as exc:
                records.append(RunRecord(**base, method=spec.name, selected=outcome.preselected[s],
                                         estimate=math.nan, bound=math.nan, true_performance=truth_value,
                                         covered=False, tightness=math.nan, fallback_used=False,
                                         alpha_used=config.alpha, error=str(exc)))
    return records


def run_experiment(config, n_jobs=1, progress=None):
    """Run ``config.runs`` independent pipeline runs.

    Output is ordered by run index and identical for any ``n_jobs``.
    ``progress(done, total)`` is called after every 100 completed runs.
    """
    runs = range(config.runs)
    out = []
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = pool.map(lambda r: simulate_run(config, r), runs)
            for done, recs in enumerate(results, 1):
                out.extend(recs)
                if progress and done % 100 == 0:
                    progress(done, config.runs)
    else:
        for done, r in enumerate(runs, 1):
            out.extend(simulate_run(config, r))
            if progress and done % 100 == 0:
                progress(done, config.runs)
    return out


def liberal_threshold(alpha, runs):
    """Nominal coverage minus one Monte Carlo standard error."""
    return 1 - alpha - math.sqrt((1 - alpha) * alpha / runs)


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return math.nan, math.nan
    se = values.std(ddof=1) / math.sqrt(values.size) if values.size > 1 else 0.0
    return float(values.mean()), float(se)


def aggregate(records, alpha=0.05):
    """Per (validation, rule, method) coverage, bound, truth and tightness summaries.

    ``alpha`` is used for records that do not carry their own nominal level.
    """
    if not records:
        raise ValueError("no records to aggregate")
    groups = defaultdict(list)
    for rec in records:
        rec = rec.to_dict() if isinstance(rec, RunRecord) else rec
        level = float(rec.get("alpha", alpha))
        groups[(rec["measure"], rec["validation"], rec["rule"], rec["method"], level)].append(rec)
    rows = []
    for (measure, validation, rule, method, level), recs in sorted(groups.items()):
        ok = [r for r in recs if not r["error"]]
        n_ok = len(ok)
        coverage, _ = _mean_se([r["covered"] for r in ok])
        cov_se = math.sqrt(coverage * (1 - coverage) / n_ok) if n_ok else math.nan
        threshold = liberal_threshold(level, n_ok) if n_ok else math.nan
        bound, bound_se = _mean_se([r["bound"] for r in ok])
        truth, truth_se = _mean_se([r["true_performance"] for r in ok])
        tight, tight_se = _mean_se([r["tightness"] for r in ok])
        rows.append(dict(
            measure=measure, validation=validation, rule=rule, method=method, alpha=level, runs=n_ok,
            failed=len(recs) - n_ok, coverage=coverage, coverage_se=cov_se,
            liberal_threshold=threshold, liberal=bool(n_ok and coverage < threshold),
            mean_bound=bound, bound_se=bound_se, mean_true=truth, true_se=truth_se,
            mean_tightness=tight, tightness_se=tight_se,
        ))
    return rows
