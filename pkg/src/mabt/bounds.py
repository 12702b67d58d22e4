"""Registry of lower-bound methods and a single entry point to compute them."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .baselines import (
    AucSummary,
    BinomialSummary,
    cp_lower,
    delong_components,
    delong_lower,
    hm_lower,
    sidak_adjust,
    wald_lower,
    wilson_lower,
)
from .exceptions import CalibrationFailure
from .measures import MeasureKind, plugin_estimates
from .multiplicity import mabt_lower_bound
from .tilting import bt_lower_bound, fallback_bound

METHODS = ("mabt", "bt", "wald", "wilson", "cp", "delong", "hm")
LEGAL = {
    MeasureKind.ACCURACY: ("mabt", "bt", "wald", "wilson", "cp"),
    MeasureKind.AUC: ("mabt", "bt", "delong", "hm"),
}
SIDAK_MARK = "+sidak"


@dataclass(frozen=True)
class MethodSpec:
    name: str
    sidak: bool = False

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        text = str(text).strip().lower()
        sidak = text.endswith(SIDAK_MARK)
        name = text[: -len(SIDAK_MARK)] if sidak else text
        if name not in METHODS:
            raise ValueError(f"unknown method {text!r}; choose from {', '.join(METHODS)}")
        if sidak and name == "mabt":
            raise ValueError("mabt adjusts for multiplicity itself; drop the +sidak marker")
        return cls(name, sidak)

    def __str__(self):
        return self.name + (SIDAK_MARK if self.sidak else "")


def check_method(spec, kind, m):
    kind = MeasureKind.parse(kind)
    if spec.name not in LEGAL[kind]:
        raise ValueError(f"method {spec.name!r} is not available for {kind.value}")
    if spec.name == "mabt" and m < 2:
        raise ValueError("mabt needs at least two evaluated models; use bt for a single model")


@dataclass
class BoundReport:
    method: str
    selected: str
    m: int
    alpha: float
    alpha_adjusted: float
    estimate: float
    lower_bound: float
    tau: float | None = None
    fallback_used: bool = False
    achieved_level: float | None = None
    B: int | None = None
    seed: int | None = None
    n_degenerate: int | None = None

    def to_dict(self):
        return asdict(self)


def compute_bound(spec, table, kind, selected, alpha=0.05, ensemble=None, fallback_on_failure=False):
    """Lower confidence bound of ``method`` for model ``selected`` of ``table``.

    ``ensemble`` is required for the resampling methods (``mabt``, ``bt``).
    With ``fallback_on_failure`` a :class:`CalibrationFailure` is replaced by
    the conservative fallback bound instead of propagating.

    Returns
    -------
    BoundReport
    """
    spec = MethodSpec.parse(spec)
    kind = MeasureKind.parse(kind)
    j = table.index(selected)
    level = sidak_adjust(alpha, table.m) if spec.sidak else alpha
    report = dict(method=str(spec), selected=table.model_ids[j], m=table.m, alpha=alpha, alpha_adjusted=level)

    if spec.name in ("mabt", "bt"):
        if ensemble is None:
            raise ValueError(f"{spec.name} needs a bootstrap ensemble")
        try:
            if spec.name == "mabt":
                res = mabt_lower_bound(table, kind, j, ensemble, alpha)
            else:
                res = bt_lower_bound(table, kind, j, ensemble, level)
        except CalibrationFailure:
            if not fallback_on_failure:
                raise
            fb_level = sidak_adjust(alpha, table.m) if spec.name == "mabt" else level
            estimate = float(plugin_estimates(table, kind)[j])
            return BoundReport(
                **report, estimate=estimate,
                lower_bound=min(fallback_bound(table, kind, j, fb_level), estimate),
                fallback_used=True, B=ensemble.B, seed=ensemble.plan.seed,
                n_degenerate=ensemble.n_degenerate,
            )
        return BoundReport(
            **report, estimate=res.estimate, lower_bound=res.lower_bound, tau=res.tau,
            fallback_used=res.fallback_used, achieved_level=res.achieved_level,
            B=ensemble.B, seed=ensemble.plan.seed, n_degenerate=ensemble.n_degenerate,
        )

    column = table.column(j)
    if kind is MeasureKind.ACCURACY:
        summary = BinomialSummary(int(np.sum(column == table.labels)), table.n)
        estimate = summary.proportion
        fn = {"wald": wald_lower, "wilson": wilson_lower, "cp": cp_lower}[spec.name]
        bound = fn(summary, level)
    else:
        summary = delong_components(table.labels, column)
        estimate = summary.auc
        if spec.name == "delong":
            bound = delong_lower(summary, level)
        else:
            bound = hm_lower(AucSummary(summary.auc, summary.n_pos, summary.n_neg), level)
    return BoundReport(**report, estimate=estimate, lower_bound=min(bound, estimate))
