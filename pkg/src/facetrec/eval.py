"""Stratified cross-validation, macro-F1 scoring and Table-style reporting.

Fold plans are built per facet (stratification keeps each fold's class mix
within one document of proportional). For every facet and fold the training
split is resampled, a model is trained and the held-out split is scored
with macro-F1 over both classes. Reports aggregate fold scores into
per-facet means, an overall mean and a wins count per system.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, FacetrecError, ValidationError
from .features import realize_features
from .inventory import FACET_NAMES
from .models import ModelSpec, predict, train
from .resample import ResampleConfig, smote
from .seeding import STREAM_FOLDS, STREAM_SMOTE, check_seed, derive_seed, substream

DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class FoldPlan:
    """Per-facet assignment of every document to an evaluation fold."""

    n_folds: int
    seed: int
    assignment: dict[str, np.ndarray]


def make_folds(labels: dict[str, np.ndarray], n_folds: int = DEFAULT_FOLDS, seed: int = 0) -> FoldPlan:
    """Seeded, stratified round-robin fold assignment, per facet.

    Documents are shuffled once per facet; positives are dealt round-robin
    over the folds first, negatives continue the same counter. Fold sizes
    therefore differ by at most one, and so do per-fold class counts.
    """
    if not isinstance(n_folds, int) or isinstance(n_folds, bool) or n_folds < 2:
        raise ConfigError(f"n_folds must be an integer of at least 2, got {n_folds!r}")
    check_seed(seed)
    if not labels:
        raise ValidationError("no facet labels to fold")
    assignment: dict[str, np.ndarray] = {}
    n_docs = None
    for facet, y in labels.items():
        if facet not in FACET_NAMES:
            raise ValidationError(f"unknown facet {facet!r}")
        y = np.asarray(y)
        if n_docs is None:
            n_docs = len(y)
            if n_docs < n_folds:
                raise ValidationError(
                    f"need at least {n_folds} documents for {n_folds} folds, got {n_docs}"
                )
        elif len(y) != n_docs:
            raise ValidationError("facet label vectors differ in length")
        rng = substream(seed, STREAM_FOLDS, FACET_NAMES.index(facet))
        perm = rng.permutation(n_docs)
        fold = np.empty(n_docs, dtype=np.int64)
        counter = 0
        for cls in (1, 0):
            for idx in perm:
                if y[idx] == cls:
                    fold[idx] = counter % n_folds
                    counter += 1
        assignment[facet] = fold
    return FoldPlan(n_folds=n_folds, seed=seed, assignment=assignment)


def f1_binary(gold, predicted, positive_class: int) -> float:
    """F1 of one class. All-absent-and-none-predicted counts as 1.0."""
    gold = np.asarray(gold)
    predicted = np.asarray(predicted)
    if gold.shape != predicted.shape:
        raise ValidationError(
            f"gold and predicted lengths differ: {gold.shape} vs {predicted.shape}"
        )
    if positive_class not in (0, 1):
        raise ValidationError(f"positive_class must be 0 or 1, got {positive_class!r}")
    is_pos = gold == positive_class
    said_pos = predicted == positive_class
    tp = int(np.sum(is_pos & said_pos))
    fp = int(np.sum(~is_pos & said_pos))
    fn = int(np.sum(is_pos & ~said_pos))
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def f1_macro(gold, predicted) -> float:
    """Mean of the two per-class F1 scores."""
    return 0.5 * (f1_binary(gold, predicted, 1) + f1_binary(gold, predicted, 0))


@dataclass(frozen=True)
class SystemResult:
    """Per-fold macro-F1 of one (features, model) system, keyed by facet."""

    name: str
    model_kind: str
    feature_ref: dict
    fold_f1: dict[str, tuple[float, ...]]


@dataclass
class EvaluationReport:
    """Fold scores for one or more systems over the same facets and folds.

    provenance carries run metadata (seed, config digest and similar); it is
    in-memory context and is not written into report files.
    """

    facets: tuple[str, ...]
    n_folds: int
    systems: tuple[SystemResult, ...]
    provenance: dict = field(default_factory=dict)

    def facet_mean(self, system: SystemResult, facet: str) -> float:
        return float(np.mean(system.fold_f1[facet]))

    def overall(self, system: SystemResult) -> float:
        return float(np.mean([self.facet_mean(system, f) for f in self.facets]))

    def wins(self) -> dict[str, int]:
        """Per system: count of facets where it ties or holds the best mean."""
        counts = {s.name: 0 for s in self.systems}
        for facet in self.facets:
            means = [self.facet_mean(s, facet) for s in self.systems]
            best = max(means)
            for s, m in zip(self.systems, means):
                if m == best:
                    counts[s.name] += 1
        return counts


def _evaluate_facet(X, y, folds, n_folds, model_spec, resample_cfg, plan_seed, facet, facet_idx):
    scores = []
    for k in range(n_folds):
        test = folds == k
        train_rows = ~test
        cell_seed = derive_seed(plan_seed, STREAM_SMOTE, facet_idx, k)
        cfg = replace(resample_cfg, seed=cell_seed)
        try:
            X_aug, y_aug = smote(X[train_rows], y[train_rows], cfg)
            model = train(model_spec, X_aug, y_aug)
            pred, _ = predict(model, X[test])
        except FacetrecError as e:
            raise type(e)(f"facet {facet}, fold {k}: {e}") from e
        scores.append(f1_macro(y[test], pred))
    return tuple(scores)


def _facet_task(payload):
    # Top-level so it can cross a process boundary when jobs > 1.
    return payload[7], _evaluate_facet(
        payload[0], payload[1], payload[2], payload[3],
        payload[4], payload[5], payload[6], payload[7], payload[8],
    )


def run_experiment(
    corpus,
    feature_spec,
    model_spec: ModelSpec,
    resample_cfg: ResampleConfig,
    plan: FoldPlan,
    system_name: str | None = None,
    jobs: int = 1,
) -> EvaluationReport:
    """Cross-validate one system: vectorize, resample each training split,
    train, and score every held-out split with macro-F1.

    Facets flagged degenerate by the corpus are skipped. Facet cells are
    independent; jobs > 1 evaluates facets in worker processes, and results
    are merged in facet order regardless of completion order.
    """
    if not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1:
        raise ConfigError(f"jobs must be a positive integer, got {jobs!r}")
    facets = corpus.active_facets
    if not facets:
        raise ValidationError("all facets are degenerate; nothing to evaluate")
    for facet in facets:
        if facet not in plan.assignment:
            raise ValidationError(f"fold plan is missing facet {facet!r}")
        if len(plan.assignment[facet]) != len(corpus.documents):
            raise ValidationError("fold plan does not match corpus size")

    X, ref, _ = realize_features(feature_spec, corpus)
    name = system_name or model_spec.kind

    payloads = [
        (
            X,
            corpus.labels(facet),
            plan.assignment[facet],
            plan.n_folds,
            model_spec,
            resample_cfg,
            plan.seed,
            facet,
            FACET_NAMES.index(facet),
        )
        for facet in facets
    ]
    if jobs == 1:
        fold_f1 = {p[7]: _evaluate_facet(*p) for p in payloads}
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = dict(pool.map(_facet_task, payloads))
        fold_f1 = {facet: done[facet] for facet in facets}

    result = SystemResult(
        name=name, model_kind=model_spec.kind, feature_ref=ref, fold_f1=fold_f1
    )
    return EvaluationReport(
        facets=facets,
        n_folds=plan.n_folds,
        systems=(result,),
        provenance={"seed": plan.seed},
    )


def combine_reports(reports) -> EvaluationReport:
    """Merge single-system reports that share facets and fold counts."""
    reports = list(reports)
    if not reports:
        raise ValidationError("no reports to combine")
    first = reports[0]
    systems: list[SystemResult] = []
    names = set()
    for rep in reports:
        if rep.facets != first.facets or rep.n_folds != first.n_folds:
            raise ValidationError("reports cover different facets or fold counts")
        for system in rep.systems:
            if system.name in names:
                raise ValidationError(f"duplicate system name {system.name!r}")
            names.add(system.name)
            systems.append(system)
    return EvaluationReport(
        facets=first.facets,
        n_folds=first.n_folds,
        systems=tuple(systems),
        provenance=dict(first.provenance),
    )


def render_report(report: EvaluationReport, fmt: str = "text") -> str:
    """Render as an aligned table (2 decimals) or long-form CSV (full
    precision; sections: fold, facet_mean, overall, wins)."""
    if fmt == "text":
        return _render_text(report)
    if fmt == "csv":
        return _render_csv(report)
    raise ConfigError(f"format must be 'text' or 'csv', got {fmt!r}")


def _render_text(report: EvaluationReport) -> str:
    wins = report.wins()
    headers = ["system", "overall", "wins", *FACET_NAMES]
    rows = []
    for system in report.systems:
        cells = [system.name, f"{report.overall(system):.2f}", str(wins[system.name])]
        for facet in FACET_NAMES:
            if facet in report.facets:
                cells.append(f"{report.facet_mean(system, facet):.2f}")
            else:
                cells.append("-")
        rows.append(cells)
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = []
    header_line = "  ".join(
        h.ljust(widths[i]) if i == 0 else h.rjust(widths[i]) for i, h in enumerate(headers)
    )
    lines.append(header_line)
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append(
            "  ".join(
                c.ljust(widths[i]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(row)
            )
        )
    return "\n".join(lines) + "\n"


def _render_csv(report: EvaluationReport) -> str:
    wins = report.wins()
    lines = ["section,model,facet,fold,f1"]
    for system in report.systems:
        for facet in report.facets:
            for k, value in enumerate(system.fold_f1[facet]):
                lines.append(f"fold,{system.name},{facet},{k},{value!r}")
        for facet in report.facets:
            lines.append(f"facet_mean,{system.name},{facet},,{report.facet_mean(system, facet)!r}")
        lines.append(f"overall,{system.name},,,{report.overall(system)!r}")
        lines.append(f"wins,{system.name},,,{wins[system.name]}")
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> EvaluationReport:
    """Rebuild a report from its CSV rendering (fold rows carry full
    precision, so aggregates are recomputed losslessly)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "section,model,facet,fold,f1":
        raise ValidationError("not a report CSV: missing or wrong header")
    fold_rows: dict[str, dict[str, dict[int, float]]] = {}
    system_order: list[str] = []
    facet_order: list[str] = []
    kinds: dict[str, str] = {}
    max_fold = -1
    for ln_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 5:
            raise ValidationError(f"report CSV line {ln_no}: expected 5 fields")
        section, system, facet, fold, value = parts
        if section == "fold":
            try:
                k = int(fold)
                f1 = float(value)
            except ValueError as e:
                raise ValidationError(f"report CSV line {ln_no}: {e}") from e
            if system not in fold_rows:
                fold_rows[system] = {}
                system_order.append(system)
            if facet not in fold_rows[system]:
                fold_rows[system][facet] = {}
                if facet not in facet_order:
                    facet_order.append(facet)
            fold_rows[system][facet][k] = f1
            max_fold = max(max_fold, k)
        elif section in ("facet_mean", "overall", "wins"):
            continue  # redundant aggregates, recomputed from fold rows
        else:
            raise ValidationError(f"report CSV line {ln_no}: unknown section {section!r}")
    if max_fold < 0:
        raise ValidationError("report CSV has no fold rows")
    n_folds = max_fold + 1
    systems = []
    for name in system_order:
        per_facet = {}
        for facet in facet_order:
            folds = fold_rows[name].get(facet)
            if folds is None or sorted(folds) != list(range(n_folds)):
                raise ValidationError(
                    f"report CSV: system {name!r} facet {facet!r} has incomplete folds"
                )
            per_facet[facet] = tuple(folds[k] for k in range(n_folds))
        systems.append(
            SystemResult(
                name=name,
                model_kind=kinds.get(name, "unknown"),
                feature_ref={},
                fold_f1=per_facet,
            )
        )
    return EvaluationReport(
        facets=tuple(facet_order), n_folds=n_folds, systems=tuple(systems)
    )
