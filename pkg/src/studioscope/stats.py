"""Descriptive and inferential statistics over the normalized corpus.

Boxplot five-number summaries (1.5 IQR fences), a two-way MANOVA on the four
features with Wilks' lambda / Rao's F / partial eta squared, and
Bonferroni-corrected univariate post-hoc ANOVAs.

Year enters the default model as a centered numeric covariate, which makes
every effect a single-df contrast; a categorical-year mode (dummy-coded
years, Type II sums of squares) is available for sensitivity analysis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as scistats

from .corpus import FEATURE_NAMES, NormalizedCorpus
from .errors import (
    EmptyGroupWarning,
    InsufficientData,
    RankDeficientE,
    SingularDesign,
)

EFFECTS = ("nation", "year", "interaction")

#: Bonferroni factor for the post-hoc family: 4 features x 3 effects.
POSTHOC_TESTS = 12

_RCOND = 1e-10


# ---------------------------------------------------------------------------
# boxplots


@dataclass
class BoxplotSummary:
    group_key: tuple
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: list[tuple[str, float]] = field(default_factory=list)
    n: int = 0


def _five_numbers(values: np.ndarray) -> tuple[float, float, float]:
    # linear-interpolation quartile convention
    q1, med, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return float(q1), float(med), float(q3)


def boxplot_summary(values: Iterable[tuple[str, float]],
                    group_of: Mapping[str, Hashable] | Callable[[str], Hashable],
                    ) -> list[BoxplotSummary]:
    """Five-number summary per group with outliers beyond 1.5 IQR fences.

    ``values`` are (track_id, value) pairs; ``group_of`` maps a track_id to
    its group key.  Whiskers sit on the most extreme data points inside
    [q1 - 1.5 IQR, q3 + 1.5 IQR]; everything outside is listed in
    ``outliers``.  Groups that end up empty are skipped with a warning.
    """
    lookup = group_of if callable(group_of) else group_of.__getitem__
    groups: dict[Hashable, list[tuple[str, float]]] = {}
    for track_id, value in values:
        groups.setdefault(lookup(track_id), []).append((track_id, value))

    summaries = []
    for key in sorted(groups, key=repr):
        members = groups[key]
        if not members:
            warnings.warn(f"group {key!r} is empty", EmptyGroupWarning, stacklevel=2)
            continue
        data = np.array([v for _, v in members], dtype=float)
        q1, med, q3 = _five_numbers(data)
        iqr = q3 - q1
        low_fence = q1 - 1.5 * iqr
        high_fence = q3 + 1.5 * iqr
        inside = data[(data >= low_fence) & (data <= high_fence)]
        outliers = [(tid, float(v)) for tid, v in members
                    if v < low_fence or v > high_fence]
        outliers.sort(key=lambda item: (item[1], item[0]))
        summaries.append(BoxplotSummary(
            group_key=key if isinstance(key, tuple) else (key,),
            median=med, q1=q1, q3=q3,
            whisker_low=float(inside.min()),
            whisker_high=float(inside.max()),
            outliers=outliers,
            n=len(members),
        ))
    return summaries


def corpus_boxplots(corpus: NormalizedCorpus) -> dict[str, dict[str, dict[int, BoxplotSummary]]]:
    """Raw-feature boxplots for every (feature, nation, year) cell."""
    raw = corpus.raw_matrix()
    nations = corpus.nations()
    years = corpus.years()
    ids = corpus.track_ids()
    out: dict[str, dict[str, dict[int, BoxplotSummary]]] = {}
    for j, feature in enumerate(FEATURE_NAMES):
        key_of = {tid: (nation, int(year))
                  for tid, nation, year in zip(ids, nations, years)}
        summaries = boxplot_summary(zip(ids, raw[:, j]), key_of)
        per_feature: dict[str, dict[int, BoxplotSummary]] = {}
        for s in summaries:
            nation, year = s.group_key
            per_feature.setdefault(nation, {})[year] = s
        out[feature] = per_feature
    return out


# ---------------------------------------------------------------------------
# multivariate linear model


@dataclass
class ManovaResult:
    effect: str
    wilks_lambda: float
    f_stat: float
    df1: int
    df2: float
    p_value: float
    partial_eta_sq: float


@dataclass
class AnovaResult:
    feature: str
    effect: str
    f_stat: float
    df1: int
    df2: float
    p_raw: float
    p_bonferroni: float


def _design_numeric(nation: np.ndarray, year: np.ndarray) -> tuple[np.ndarray, dict[str, list[int]]]:
    nat = np.where(nation == "G", 1.0, -1.0)
    yr = year.astype(float)
    yr = yr - yr.mean()
    x = np.column_stack([np.ones(nation.size), nat, yr, nat * yr])
    return x, {"nation": [1], "year": [2], "interaction": [3]}


def _design_categorical(nation: np.ndarray, year: np.ndarray) -> tuple[np.ndarray, dict[str, list[int]]]:
    nat = np.where(nation == "G", 1.0, -1.0)
    levels = np.unique(year)
    columns = [np.ones(nation.size), nat]
    terms: dict[str, list[int]] = {"nation": [1], "year": [], "interaction": []}
    for level in levels[1:]:  # first level is the reference
        columns.append((year == level).astype(float))
        terms["year"].append(len(columns) - 1)
    for level in levels[1:]:
        columns.append(nat * (year == level).astype(float))
        terms["interaction"].append(len(columns) - 1)
    return np.column_stack(columns), terms


def _fit_sscp(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """OLS fit returning (beta, residual SSCP, (X'X)^-1)."""
    xtx = x.T @ x
    if np.linalg.matrix_rank(xtx, tol=_RCOND * float(np.abs(xtx).max())) < x.shape[1]:
        raise SingularDesign("design matrix columns are collinear")
    xtx_inv = np.linalg.inv(xtx)
    beta = xtx_inv @ (x.T @ y)
    resid = y - x @ beta
    return beta, resid.T @ resid, xtx_inv


def _wilks_from_sscp(h: np.ndarray, e: np.ndarray) -> float:
    sign_e, logdet_e = np.linalg.slogdet(e)
    sign_he, logdet_he = np.linalg.slogdet(h + e)
    if sign_e <= 0:
        raise RankDeficientE("residual SSCP is not positive definite")
    if sign_he <= 0:
        raise RankDeficientE("H + E is not positive definite")
    return float(np.exp(logdet_e - logdet_he))


def _rao_f(lmbda: float, p: int, q: int, v: float) -> tuple[float, int, float, float, float]:
    """Rao's F approximation for Wilks' lambda.

    p responses, q hypothesis df, v error df.  Exact for q = 1 (the default
    single-df contrasts).  Returns (F, df1, df2, p_value, lambda^(1/t)).
    """
    if p * p + q * q - 5 > 0:
        t = np.sqrt((p * p * q * q - 4.0) / (p * p + q * q - 5.0))
    else:
        t = 1.0
    w = v - (p - q + 1.0) / 2.0
    df1 = p * q
    df2 = w * t - (p * q - 2.0) / 2.0
    if df2 <= 0:
        raise InsufficientData("not enough error df for Rao's approximation")
    lam_root = lmbda ** (1.0 / t)
    f_stat = (1.0 - lam_root) / lam_root * df2 / df1
    p_value = float(scistats.f.sf(f_stat, df1, df2))
    return float(f_stat), int(df1), float(df2), p_value, float(lam_root)


def _check_preconditions(z: np.ndarray, nation: np.ndarray, year: np.ndarray) -> None:
    if z.shape[0] <= 10:
        raise InsufficientData(f"need more than 10 rows, got {z.shape[0]}")
    if set(np.unique(nation)) != {"G", "U"}:
        raise InsufficientData("both nations must be present")
    if np.unique(year).size < 2:
        raise InsufficientData("need at least 2 distinct years")


def _contrast_sscp(beta: np.ndarray, xtx_inv: np.ndarray, cols: list[int]) -> np.ndarray:
    lb = beta[cols, :]                      # q x p
    inner = xtx_inv[np.ix_(cols, cols)]     # q x q
    return lb.T @ np.linalg.inv(inner) @ lb


def manova_two_way(z_matrix: np.ndarray, nation: Sequence[str],
                   year: Sequence[int], year_coding: str = "numeric",
                   ) -> list[ManovaResult]:
    """Two-way MANOVA of the feature matrix on nation, year and their product.

    For each effect, the hypothesis SSCP H and the full-model residual SSCP E
    give Wilks' lambda = det(E) / det(H + E); Rao's approximation converts it
    to an F statistic, and partial eta squared is 1 - lambda^(1/t).

    ``year_coding="numeric"`` (default) treats year as a centered covariate;
    ``"categorical"`` dummy-codes years and uses Type II hypothesis SSCPs.
    """
    z = np.asarray(z_matrix, dtype=float)
    nation = np.asarray(nation)
    year = np.asarray(year, dtype=int)
    _check_preconditions(z, nation, year)
    p = z.shape[1]

    if year_coding == "numeric":
        x, terms = _design_numeric(nation, year)
        beta, e_full, xtx_inv = _fit_sscp(x, z)
        v = z.shape[0] - x.shape[1]
        results = []
        for effect in EFFECTS:
            cols = terms[effect]
            h = _contrast_sscp(beta, xtx_inv, cols)
            lmbda = _wilks_from_sscp(h, e_full)
            f_stat, df1, df2, p_value, lam_root = _rao_f(lmbda, p, len(cols), v)
            results.append(ManovaResult(effect, lmbda, f_stat, df1, df2,
                                        p_value, 1.0 - lam_root))
        return results

    if year_coding != "categorical":
        raise ValueError(f"unknown year_coding {year_coding!r}")

    x_full, terms = _design_categorical(nation, year)
    _, e_full, _ = _fit_sscp(x_full, z)
    v = z.shape[0] - x_full.shape[1]
    results = []
    for effect in EFFECTS:
        # Type II: compare against the model without this term (interaction
        # excluded when testing a main effect).
        if effect == "interaction":
            base_cols = [c for c in range(x_full.shape[1])
                         if c not in terms["interaction"]]
            drop = terms["interaction"]
        else:
            base_cols = [c for c in range(x_full.shape[1])
                         if c not in terms["interaction"] and c not in terms[effect]]
            drop = terms[effect]
        with_cols = sorted(base_cols + drop)
        _, e_with, _ = _fit_sscp(x_full[:, with_cols], z)
        _, e_without, _ = _fit_sscp(x_full[:, base_cols], z)
        h = e_without - e_with
        lmbda = _wilks_from_sscp(h, e_full)
        f_stat, df1, df2, p_value, lam_root = _rao_f(lmbda, p, len(drop), v)
        results.append(ManovaResult(effect, lmbda, f_stat, df1, df2,
                                    p_value, 1.0 - lam_root))
    return results


def anova_posthoc(z_matrix: np.ndarray, nation: Sequence[str],
                  year: Sequence[int], year_coding: str = "numeric",
                  feature_names: Sequence[str] = FEATURE_NAMES,
                  ) -> list[AnovaResult]:
    """Univariate F-test per feature per effect on the same design matrix.

    p_bonferroni = min(1, p_raw * 12): 4 features x 3 effects.
    """
    z = np.asarray(z_matrix, dtype=float)
    nation = np.asarray(nation)
    year = np.asarray(year, dtype=int)
    _check_preconditions(z, nation, year)

    results = []
    for j, feature in enumerate(feature_names):
        column = z[:, j:j + 1]
        per_effect = manova_single_response(column, nation, year, year_coding)
        for effect, (f_stat, df1, df2, p_raw) in zip(EFFECTS, per_effect):
            results.append(AnovaResult(
                feature=feature, effect=effect, f_stat=f_stat,
                df1=df1, df2=df2, p_raw=p_raw,
                p_bonferroni=min(1.0, p_raw * POSTHOC_TESTS)))
    return results


def manova_single_response(y: np.ndarray, nation: np.ndarray, year: np.ndarray,
                           year_coding: str) -> list[tuple[float, int, float, float]]:
    """Univariate F-tests (one response column) for the three effects."""
    if year_coding == "numeric":
        x, terms = _design_numeric(nation, year)
        beta, e_full, xtx_inv = _fit_sscp(x, y)
        v = y.shape[0] - x.shape[1]
        out = []
        for effect in EFFECTS:
            cols = terms[effect]
            h = float(_contrast_sscp(beta, xtx_inv, cols)[0, 0])
            sse = float(e_full[0, 0])
            if sse <= 0:
                raise RankDeficientE("zero residual variance")
            f_stat = (h / len(cols)) / (sse / v)
            p_value = float(scistats.f.sf(f_stat, len(cols), v))
            out.append((f_stat, len(cols), float(v), p_value))
        return out

    x_full, terms = _design_categorical(nation, year)
    _, e_full, _ = _fit_sscp(x_full, y)
    v = y.shape[0] - x_full.shape[1]
    out = []
    for effect in EFFECTS:
        if effect == "interaction":
            base_cols = [c for c in range(x_full.shape[1])
                         if c not in terms["interaction"]]
            drop = terms["interaction"]
        else:
            base_cols = [c for c in range(x_full.shape[1])
                         if c not in terms["interaction"] and c not in terms[effect]]
            drop = terms[effect]
        with_cols = sorted(base_cols + drop)
        _, e_with, _ = _fit_sscp(x_full[:, with_cols], y)
        _, e_without, _ = _fit_sscp(x_full[:, base_cols], y)
        h = float((e_without - e_with)[0, 0])
        sse = float(e_full[0, 0])
        if sse <= 0:
            raise RankDeficientE("zero residual variance")
        f_stat = (h / len(drop)) / (sse / v)
        p_value = float(scistats.f.sf(f_stat, len(drop), v))
        out.append((f_stat, len(drop), float(v), p_value))
    return out


def format_p(p: float, floor: float = 1e-5) -> str:
    """Human-readable p with a reporting floor; machine output keeps full precision."""
    return f"< {floor:g}" if p < floor else f"{p:.5g}"
