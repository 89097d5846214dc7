"""Least-squares engine with fixed effects and robust standard errors.

Design choices that the rest of the package depends on:

* Rank deficiency is resolved deterministically: columns are considered in
  the order the specification lists them, and a column whose residual (after
  projecting out every column kept so far) falls below ``pivot_tol`` times
  its original norm is dropped — the later column always loses the tie.
* Dropped coefficients stay in the output with value 0.0 and no standard
  error, rendered "0.000 (.)" in tables.
* Cluster-robust (CR1) and heteroskedasticity-robust (HC1) covariances share
  one sandwich code path; with every observation its own cluster the two are
  the same computation, so they agree bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from sklearn.base import BaseEstimator

DEFAULT_PIVOT_TOL = 1e-10

SE_TYPES = ("classical", "hc1", "cluster")

FIXED_EFFECTS = (None, "chair", "meeting")

# column holding the group label for each fixed-effects flavor
FE_GROUP_COLUMN = {"chair": "chair", "meeting": "meeting_id"}


def significance_stars(p_value: float) -> str:
    """''/*/**/*** at the 10/5/1 percent levels (strict inequalities)."""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.10:
        return "*"
    return ""


# ---------------------------------------------------------------------------
# core linear algebra
# ---------------------------------------------------------------------------


@dataclass
class OlsFit:
    beta: np.ndarray          # full length; dropped columns hold 0.0
    kept: List[int]           # indices of retained columns, in original order
    residuals: np.ndarray
    fitted: np.ndarray


def ols_fit(X: np.ndarray, y: np.ndarray, pivot_tol: float = DEFAULT_PIVOT_TOL) -> OlsFit:
    """Least squares with greedy left-to-right rank revealing.

    Columns are orthogonalized (modified Gram-Schmidt, run twice for
    stability) against the columns already kept; a column whose remaining
    norm is <= pivot_tol * its original norm is collinear with its
    predecessors and is dropped. Requires more rows than kept columns.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    n, k = X.shape
    original_norms = np.linalg.norm(X, axis=0)
    basis: List[np.ndarray] = []
    kept: List[int] = []
    for j in range(k):
        v = X[:, j].astype(float).copy()
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        norm = float(np.linalg.norm(v))
        if original_norms[j] == 0.0 or norm <= pivot_tol * original_norms[j]:
            continue
        basis.append(v / norm)
        kept.append(j)
    if n <= len(kept):
        raise ValueError(
            f"underdetermined system: {n} observations for {len(kept)} "
            f"independent regressors")
    beta = np.zeros(k)
    if kept:
        solution, *_ = np.linalg.lstsq(X[:, kept], y, rcond=None)
        beta[kept] = solution
        fitted = X[:, kept] @ solution
    else:
        fitted = np.zeros(n)
    return OlsFit(beta=beta, kept=kept, residuals=y - fitted, fitted=fitted)


def within_transform(values: np.ndarray, groups: np.ndarray) -> np.ndarray:
    """Subtract the group mean from every row (columns handled independently)."""
    values = np.asarray(values, dtype=float)
    frame = pd.DataFrame(values if values.ndim == 2 else values[:, None])
    demeaned = frame - frame.groupby(pd.Series(groups).values).transform("mean")
    out = demeaned.to_numpy()
    return out if values.ndim == 2 else out[:, 0]


def _sandwich(X: np.ndarray, residuals: np.ndarray, groups: np.ndarray,
              factor: float) -> np.ndarray:
    """factor * (X'X)^-1 [sum_g (X_g'e_g)(X_g'e_g)'] (X'X)^-1.

    Clusters are visited in order of first appearance so that the
    single-observation-per-cluster case is the exact HC computation.
    """
    bread = np.linalg.inv(X.T @ X)
    k = X.shape[1]
    meat = np.zeros((k, k))
    _, first_pos = np.unique(groups, return_index=True)
    for pos in np.sort(first_pos):
        mask = groups == groups[pos]
        s = X[mask].T @ residuals[mask]
        meat += np.outer(s, s)
    return factor * (bread @ meat @ bread)


def classical_vcov(X: np.ndarray, residuals: np.ndarray,
                   dof_absorbed: int = 0) -> np.ndarray:
    n, k = X.shape
    dof = n - k - dof_absorbed
    if dof < 1:
        raise ValueError(f"no residual degrees of freedom: n={n}, k={k}, "
                         f"absorbed={dof_absorbed}")
    sigma2 = float(residuals @ residuals) / dof
    return sigma2 * np.linalg.inv(X.T @ X)


def hc_robust_vcov(X: np.ndarray, residuals: np.ndarray,
                   dof_absorbed: int = 0) -> np.ndarray:
    """HC1: sandwich with per-observation meat, scaled by n/(n-k)."""
    n, k = X.shape
    dof = n - k - dof_absorbed
    if dof < 2:
        raise ValueError(
            f"heteroskedasticity-robust errors need n >= k + 2 "
            f"(n={n}, k={k}, absorbed={dof_absorbed})")
    factor = n / dof
    return _sandwich(X, residuals, np.arange(n), factor)


def cluster_robust_vcov(X: np.ndarray, residuals: np.ndarray, groups: np.ndarray,
                        dof_absorbed: int = 0) -> np.ndarray:
    """CR1: cluster-summed sandwich scaled by G/(G-1) * (n-1)/(n-k).

    With every observation its own cluster the scale reduces to n/(n-k) and
    the meat to the per-observation sum, i.e. exactly the HC1 estimate.
    """
    groups = np.asarray(groups)
    n, k = X.shape
    if groups.shape != (n,):
        raise ValueError("groups must be one label per observation")
    n_clusters = len(np.unique(groups))
    if n_clusters < 2:
        raise ValueError("cluster-robust errors need at least two clusters")
    dof = n - k - dof_absorbed
    if dof < 1:
        raise ValueError(f"no residual degrees of freedom: n={n}, k={k}, "
                         f"absorbed={dof_absorbed}")
    if n_clusters == n:
        factor = n / dof  # coincides with the HC1 scale when clusters are singletons
    else:
        factor = (n_clusters / (n_clusters - 1)) * ((n - 1) / dof)
    return _sandwich(X, residuals, groups, factor)


# ---------------------------------------------------------------------------
# specification and result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionSpec:
    """One table column: what to regress on what, and how to compute errors."""

    dependent: str
    regressors: Tuple[str, ...]
    fixed_effects: Optional[str] = None         # None | "chair" | "meeting"
    se_type: str = "classical"                  # classical | hc1 | cluster
    cluster_col: str = "meeting_id"
    sample_filter: Optional[str] = None         # pandas query string
    name: str = ""
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        if self.fixed_effects not in FIXED_EFFECTS:
            raise ValueError(f"fixed_effects must be one of {FIXED_EFFECTS}, "
                             f"got {self.fixed_effects!r}")
        if self.se_type not in SE_TYPES:
            raise ValueError(f"se_type must be one of {SE_TYPES}, got {self.se_type!r}")
        if len(set(self.regressors)) != len(self.regressors):
            raise ValueError("duplicate regressor in specification")


@dataclass(frozen=True)
class CoefficientEstimate:
    value: float
    se: Optional[float]
    t_stat: Optional[float]
    p_value: Optional[float]
    stars: Optional[str]
    dropped_reason: Optional[str] = None

    @property
    def dropped(self) -> bool:
        return self.dropped_reason is not None


@dataclass
class RegressionResult:
    spec: RegressionSpec
    coefficients: Dict[str, CoefficientEstimate]
    n_obs: int
    r_squared: float                 # within-group when fixed effects are absorbed
    r_squared_overall: float
    df_resid: int
    n_clusters: Optional[int] = None
    group_effects: Optional[Dict] = None

    @property
    def dropped(self) -> Dict[str, str]:
        return {name: est.dropped_reason
                for name, est in self.coefficients.items() if est.dropped}

    def to_dict(self) -> Dict:
        return {
            "name": self.spec.name,
            "label": self.spec.label,
            "dependent": self.spec.dependent,
            "fixed_effects": self.spec.fixed_effects,
            "se_type": self.spec.se_type,
            "cluster_col": self.spec.cluster_col,
            "sample_filter": self.spec.sample_filter,
            "n_obs": self.n_obs,
            "n_clusters": self.n_clusters,
            "df_resid": self.df_resid,
            "r_squared": self.r_squared,
            "r_squared_overall": self.r_squared_overall,
            "coefficients": {
                name: {
                    "value": est.value,
                    "se": est.se,
                    "t_stat": est.t_stat,
                    "p_value": est.p_value,
                    "stars": est.stars,
                    "dropped_reason": est.dropped_reason,
                }
                for name, est in self.coefficients.items()
            },
        }


# ---------------------------------------------------------------------------
# the regression pipeline
# ---------------------------------------------------------------------------


def run_regression(df: pd.DataFrame, spec: RegressionSpec,
                   pivot_tol: float = DEFAULT_PIVOT_TOL) -> RegressionResult:
    """Filter, listwise-delete, absorb fixed effects, fit, and attach errors."""
    data = df.query(spec.sample_filter) if spec.sample_filter else df
    missing = [c for c in (spec.dependent, *spec.regressors) if c not in data.columns]
    if missing:
        raise KeyError(f"specification references absent columns: {missing}")

    group_col = FE_GROUP_COLUMN.get(spec.fixed_effects)
    needed = [spec.dependent, *spec.regressors]
    for extra in (group_col, spec.cluster_col if spec.se_type == "cluster" else None):
        if extra is not None:
            if extra not in data.columns:
                raise KeyError(f"specification needs column {extra!r}, not in data")
            if extra not in needed:
                needed.append(extra)

    dropped: Dict[str, str] = {}
    live = list(spec.regressors)

    # regressors with no observed values would empty the sample via deletion
    all_nan = [c for c in live if data[c].isna().all()]
    for c in all_nan:
        dropped[c] = "no variation after deletion"
        live.remove(c)

    delete_on = [spec.dependent, *live]
    if group_col is not None:
        delete_on.append(group_col)
    if spec.se_type == "cluster":
        delete_on.append(spec.cluster_col)
    sample = data.dropna(subset=delete_on)
    if sample.empty:
        raise ValueError("no observations remain after listwise deletion")

    for c in list(live):
        if sample[c].nunique(dropna=True) <= 1 and group_col is None:
            dropped[c] = "no variation after deletion"
            live.remove(c)

    y = sample[spec.dependent].to_numpy(dtype=float)
    n = len(sample)
    absorbed_df = 0
    groups = None
    group_effects = None

    if group_col is not None:
        groups = sample[group_col].to_numpy()
        # a regressor constant inside every group is indistinguishable from
        # the group intercepts and must be dropped before demeaning
        for c in list(live):
            if (sample.groupby(group_col)[c].nunique(dropna=True) <= 1).all():
                dropped[c] = "absorbed by fixed effects"
                live.remove(c)
        X_names = list(live)
        X_raw = sample[X_names].to_numpy(dtype=float) if X_names else np.empty((n, 0))
        X = within_transform(X_raw, groups) if X_names else X_raw
        y_within = within_transform(y, groups)
        absorbed_df = len(np.unique(groups))
        fit = ols_fit(X, y_within, pivot_tol=pivot_tol)
        y_for_r2 = y_within
    else:
        X_names = ["const", *live]
        X = np.column_stack([np.ones(n)] + [sample[c].to_numpy(dtype=float) for c in live])
        fit = ols_fit(X, y, pivot_tol=pivot_tol)
        y_for_r2 = y - y.mean()

    kept_set = set(fit.kept)
    for idx, name in enumerate(X_names):
        if idx not in kept_set and name not in dropped:
            dropped[name] = "collinear with preceding regressors"

    X_kept = X[:, fit.kept]
    k_kept = len(fit.kept)
    residuals = fit.residuals

    n_clusters = None
    if spec.se_type == "classical":
        vcov = classical_vcov(X_kept, residuals, dof_absorbed=absorbed_df)
        df_resid = n - k_kept - absorbed_df
        p_dof = df_resid
    elif spec.se_type == "hc1":
        vcov = hc_robust_vcov(X_kept, residuals, dof_absorbed=absorbed_df)
        df_resid = n - k_kept - absorbed_df
        p_dof = df_resid
    else:
        cluster_labels = sample[spec.cluster_col].to_numpy()
        vcov = cluster_robust_vcov(X_kept, residuals, cluster_labels,
                                   dof_absorbed=absorbed_df)
        n_clusters = len(np.unique(cluster_labels))
        df_resid = n - k_kept - absorbed_df
        p_dof = n_clusters - 1

    se_by_kept = dict(zip(fit.kept, np.sqrt(np.diag(vcov))))
    coefficients: Dict[str, CoefficientEstimate] = {}
    for idx, name in enumerate(X_names):
        if idx in se_by_kept:
            value = float(fit.beta[idx])
            se = float(se_by_kept[idx])
            if se > 0:
                t_stat = value / se
                p_value = float(2.0 * stats.t.sf(abs(t_stat), p_dof))
            else:
                t_stat, p_value = float("inf") if value else 0.0, 0.0 if value else 1.0
            coefficients[name] = CoefficientEstimate(
                value=value, se=se, t_stat=t_stat, p_value=p_value,
                stars=significance_stars(p_value))
        else:
            coefficients[name] = CoefficientEstimate(
                value=0.0, se=None, t_stat=None, p_value=None, stars=None,
                dropped_reason=dropped.get(name, "collinear with preceding regressors"))
    # regressors removed before the design matrix was built
    for name in spec.regressors:
        if name not in coefficients:
            coefficients[name] = CoefficientEstimate(
                value=0.0, se=None, t_stat=None, p_value=None, stars=None,
                dropped_reason=dropped[name])
    # restore specification order (const first when present)
    ordered = {}
    for name in (["const"] if group_col is None else []) + list(spec.regressors):
        ordered[name] = coefficients[name]
    coefficients = ordered

    rss = float(residuals @ residuals)
    tss_within = float(y_for_r2 @ y_for_r2)
    r_squared = 1.0 - rss / tss_within if tss_within > 0 else 0.0
    tss_overall = float(((y - y.mean()) ** 2).sum())
    r_squared_overall = 1.0 - rss / tss_overall if tss_overall > 0 else 0.0

    if group_col is not None:
        frame = pd.DataFrame({"g": groups, "resid_raw": y - (
            sample[live].to_numpy(dtype=float) @ np.array(
                [coefficients[c].value for c in live]) if live else 0.0)})
        group_effects = frame.groupby("g")["resid_raw"].mean().to_dict()

    return RegressionResult(
        spec=spec,
        coefficients=coefficients,
        n_obs=n,
        r_squared=r_squared,
        r_squared_overall=r_squared_overall,
        df_resid=df_resid,
        n_clusters=n_clusters,
        group_effects=group_effects,
    )


class FixedEffectsOLS(BaseEstimator):
    """Estimator facade: parameters mirror RegressionSpec, fit() runs it.

    After fit, ``result_`` holds the full RegressionResult, ``coef_`` the
    coefficient vector in specification order, and predict() applies the
    coefficients plus the fitted group effect (0 for unseen groups).
    """

    def __init__(self, dependent: str = "", regressors: Sequence[str] = (),
                 fixed_effects: Optional[str] = None, se_type: str = "classical",
                 cluster_col: str = "meeting_id", sample_filter: Optional[str] = None,
                 pivot_tol: float = DEFAULT_PIVOT_TOL):
        self.dependent = dependent
        self.regressors = regressors
        self.fixed_effects = fixed_effects
        self.se_type = se_type
        self.cluster_col = cluster_col
        self.sample_filter = sample_filter
        self.pivot_tol = pivot_tol

    def _spec(self) -> RegressionSpec:
        return RegressionSpec(
            dependent=self.dependent, regressors=tuple(self.regressors),
            fixed_effects=self.fixed_effects, se_type=self.se_type,
            cluster_col=self.cluster_col, sample_filter=self.sample_filter)

    def fit(self, X: pd.DataFrame, y=None):
        self.result_ = run_regression(X, self._spec(), pivot_tol=self.pivot_tol)
        self.feature_names_ = [n for n in self.result_.coefficients]
        self.coef_ = np.array([self.result_.coefficients[n].value
                               for n in self.feature_names_])
        return self

    def predict(self, X: pd.DataFrame) -> np.ndarray:
        if not hasattr(self, "result_"):
            raise ValueError("FixedEffectsOLS must be fitted before predict")
        coefs = self.result_.coefficients
        out = np.zeros(len(X), dtype=float)
        for name, est in coefs.items():
            if name == "const":
                out += est.value
            else:
                out += est.value * X[name].to_numpy(dtype=float)
        if self.result_.group_effects is not None:
            group_col = FE_GROUP_COLUMN[self.fixed_effects]
            out += X[group_col].map(self.result_.group_effects).fillna(0.0).to_numpy()
        return out


# ---------------------------------------------------------------------------
# table specifications and rendering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TableSpec:
    table: str
    title: str
    default_se: str
    cluster_col: str
    columns: Tuple[RegressionSpec, ...]


def load_table_spec(path) -> TableSpec:
    """Read a JSON table layout: shared error type plus one spec per column."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    default_se = raw.get("default_se", "classical")
    cluster_col = raw.get("cluster_col", "meeting_id")
    columns = []
    for i, col in enumerate(raw["columns"], start=1):
        columns.append(RegressionSpec(
            dependent=col["dependent"],
            regressors=tuple(col["regressors"]),
            fixed_effects=col.get("fixed_effects"),
            se_type=col.get("se_type", default_se),
            cluster_col=col.get("cluster_col", cluster_col),
            sample_filter=col.get("sample_filter"),
            name=col.get("name", str(i)),
            label=col.get("label", f"({i})"),
        ))
    return TableSpec(table=raw.get("table", Path(path).stem),
                     title=raw.get("title", ""),
                     default_se=default_se, cluster_col=cluster_col,
                     columns=tuple(columns))


def apply_se_override(table: TableSpec, se_type: Optional[str],
                      cluster_col: Optional[str] = None) -> TableSpec:
    if se_type is None:
        return table
    cols = tuple(
        RegressionSpec(
            dependent=c.dependent, regressors=c.regressors,
            fixed_effects=c.fixed_effects, se_type=se_type,
            cluster_col=cluster_col or c.cluster_col,
            sample_filter=c.sample_filter, name=c.name, label=c.label)
        for c in table.columns)
    return TableSpec(table=table.table, title=table.title, default_se=se_type,
                     cluster_col=cluster_col or table.cluster_col, columns=cols)


def run_table(df: pd.DataFrame, table: TableSpec,
              pivot_tol: float = DEFAULT_PIVOT_TOL) -> List[RegressionResult]:
    return [run_regression(df, spec, pivot_tol=pivot_tol) for spec in table.columns]


def _coef_cell(est: CoefficientEstimate) -> Tuple[str, str]:
    if est.dropped:
        return "0.000", "(.)"
    return f"{est.value:.3f}{est.stars}", f"({est.se:.3f})"


def render_table(results: Sequence[RegressionResult], title: str = "",
                 label_fn: Optional[Callable[[str], str]] = None) -> str:
    """Fixed-width text table: coef+stars over (se), one column per result."""
    label_fn = label_fn or (lambda name: name)
    row_names: List[str] = []
    for res in results:
        for name in res.coefficients:
            if name != "const" and name not in row_names:
                row_names.append(name)
    if any("const" in res.coefficients for res in results):
        row_names.append("const")

    headers = [""] + [res.spec.label or res.spec.name or f"({i})"
                      for i, res in enumerate(results, start=1)]
    grid: List[List[str]] = [headers]
    for name in row_names:
        top = [label_fn(name)]
        bottom = [""]
        for res in results:
            est = res.coefficients.get(name)
            if est is None:
                top.append("")
                bottom.append("")
            else:
                c, s = _coef_cell(est)
                top.append(c)
                bottom.append(s)
        grid.append(top)
        grid.append(bottom)

    grid.append(["Chair FE"] + [
        "yes" if res.spec.fixed_effects == "chair" else "no" for res in results])
    grid.append(["Meeting FE"] + [
        "yes" if res.spec.fixed_effects == "meeting" else "no" for res in results])
    grid.append(["R-squared"] + [f"{res.r_squared:.3f}" for res in results])
    grid.append(["N"] + [str(res.n_obs) for res in results])

    widths = [max(len(row[i]) for row in grid) for i in range(len(headers))]
    lines = []
    if title:
        lines.append(title)
        lines.append("=" * (sum(widths) + 2 * (len(widths) - 1)))
    for r, row in enumerate(grid):
        cells = [row[0].ljust(widths[0])] + [
            row[i].rjust(widths[i]) for i in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
        if r == 0:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    lines.append("")
    lines.append("Standard errors in parentheses; dropped regressors shown as 0.000 (.).")
    lines.append("* p<0.10, ** p<0.05, *** p<0.01")
    return "\n".join(lines) + "\n"


def table_to_frame(results: Sequence[RegressionResult]) -> pd.DataFrame:
    """Tidy one-row-per-coefficient frame for CSV export."""
    rows = []
    for res in results:
        for name, est in res.coefficients.items():
            rows.append({
                "column": res.spec.name,
                "label": res.spec.label,
                "dependent": res.spec.dependent,
                "regressor": name,
                "coefficient": est.value,
                "se": est.se,
                "t_stat": est.t_stat,
                "p_value": est.p_value,
                "stars": est.stars,
                "dropped_reason": est.dropped_reason,
                "n_obs": res.n_obs,
                "r_squared": res.r_squared,
                "fixed_effects": res.spec.fixed_effects,
                "se_type": res.spec.se_type,
            })
    return pd.DataFrame(rows)
