"""System Usability Scale scoring and between-subjects study statistics.

Scoring follows the standard 10-item transform: odd items contribute
(raw - 1) * 2.5, even items (5 - raw) * 2.5, summed to a 0-100 score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats as sps

SUS_ITEM_COUNT = 10

SUS_ITEM_TEXT = {
    1: "Would use frequently",
    2: "Unnecessarily complex",
    3: "Easy to use",
    4: "Need technical support",
    5: "Functions well integrated",
    6: "Too much inconsistency",
    7: "Quick to learn",
    8: "Cumbersome to use",
    9: "Confident using",
    10: "Needed to learn a lot",
}

SUPPLEMENTARY_ITEM_TEXT = {
    11: "Recommendations met needs",
    12: "Time conservation",
    13: "Trust in recommendations",
    14: "Would recommend to others",
}


def sus_item_contribution(index: int, raw: int) -> float:
    """0-10 contribution of one item: odd -> (raw-1)*2.5, even -> (5-raw)*2.5."""
    if not 1 <= index <= SUS_ITEM_COUNT:
        raise ValueError(f"item index {index} outside 1..10")
    if not 1 <= raw <= 5:
        raise ValueError(f"raw score {raw} outside 1..5")
    if index % 2 == 1:
        return (raw - 1) * 2.5
    return (5 - raw) * 2.5


@dataclass(frozen=True)
class SusResponse:
    items: tuple[int, ...]  # exactly 10 raw scores, each 1..5

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(int(v) for v in self.items))
        if len(self.items) != SUS_ITEM_COUNT:
            raise ValueError(f"need {SUS_ITEM_COUNT} item scores, got {len(self.items)}")
        for i, v in enumerate(self.items, start=1):
            if not 1 <= v <= 5:
                raise ValueError(f"item {i} score {v} outside 1..5")

    def contributions(self) -> tuple[float, ...]:
        return tuple(sus_item_contribution(i, v) for i, v in enumerate(self.items, start=1))


def sus_score(resp: SusResponse) -> float:
    """Total 0-100 SUS score: the sum of the ten item contributions."""
    return sum(resp.contributions())


def mean(xs) -> float:
    xs = list(xs)
    return sum(xs) / len(xs)


def sample_sd(xs) -> float:
    xs = list(xs)
    if len(xs) < 2:
        return float("nan")
    m = mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def cohens_d(a, b) -> float:
    """Standardized mean difference using the pooled standard deviation."""
    a, b = list(a), list(b)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        return float("nan")
    sa, sb = sample_sd(a), sample_sd(b)
    pooled = math.sqrt(((na - 1) * sa**2 + (nb - 1) * sb**2) / (na + nb - 2))
    diff = mean(a) - mean(b)
    if pooled == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / pooled


def confidence_interval_95(xs) -> tuple[float, float] | None:
    """t-based 95% CI of the mean; None for groups of size 1."""
    xs = list(xs)
    n = len(xs)
    if n < 2:
        return None
    m = mean(xs)
    sem = sample_sd(xs) / math.sqrt(n)
    half = sps.t.ppf(0.975, n - 1) * sem
    return (m - half, m + half)


@dataclass(frozen=True)
class GroupSummary:
    label: str
    n: int
    mean_score: float
    sd: float
    ci95: tuple[float, float] | None
    item_means: tuple[float, ...]            # per-item mean contributions, 0-10
    supplementary_means: tuple[float, ...]   # raw 1-5 scale, untransformed


@dataclass(frozen=True)
class StudyReport:
    group_a: GroupSummary
    group_b: GroupSummary
    cohens_d: float
    t_statistic: float
    p_value: float


def summarize_group(label, responses, supplementary=()) -> GroupSummary:
    responses = list(responses)
    if not responses:
        raise ValueError(f"group {label!r} is empty")
    scores = [sus_score(r) for r in responses]
    contribs = [r.contributions() for r in responses]
    item_means = tuple(mean(col) for col in zip(*contribs))
    supp = list(supplementary)
    supp_means = tuple(mean(col) for col in zip(*supp)) if supp else ()
    return GroupSummary(
        label=label,
        n=len(responses),
        mean_score=mean(scores),
        sd=sample_sd(scores),
        ci95=confidence_interval_95(scores),
        item_means=item_means,
        supplementary_means=supp_means,
    )


def aggregate_study(
    group_a,
    group_b,
    labels=("A", "B"),
    supplementary_a=(),
    supplementary_b=(),
) -> StudyReport:
    """Compare two groups of SUS responses: Welch two-sided t-test, 95% CIs,
    and Cohen's d with pooled SD."""
    sa = summarize_group(labels[0], group_a, supplementary_a)
    sb = summarize_group(labels[1], group_b, supplementary_b)
    scores_a = [sus_score(r) for r in group_a]
    scores_b = [sus_score(r) for r in group_b]
    if sa.sd == 0.0 and sb.sd == 0.0:
        # degenerate constant groups: Welch statistic is 0/0
        equal = sa.mean_score == sb.mean_score
        t_stat = 0.0 if equal else math.copysign(math.inf, sa.mean_score - sb.mean_score)
        p_val = 1.0 if equal else 0.0
    else:
        t_stat, p_val = sps.ttest_ind(scores_a, scores_b, equal_var=False)
        t_stat, p_val = float(t_stat), float(p_val)
    return StudyReport(
        group_a=sa,
        group_b=sb,
        cohens_d=cohens_d(scores_a, scores_b),
        t_statistic=t_stat,
        p_value=p_val,
    )


def check_item_sum_consistency(item_means, reported_total: float, tol: float = 0.05) -> dict:
    """Audit a published column: per-item mean contributions must sum to the
    reported total (SUS scoring is linear, so the group mean equals the sum
    of per-item means)."""
    total = sum(item_means)
    gap = total - reported_total
    return {"column_sum": total, "reported": reported_total, "gap": gap, "ok": abs(gap) <= tol}


# Reported user-study results (two systems, 250 participants each): per-item
# mean contributions (0-10), supplementary item means (1-5), and the printed
# overall scores. The 'ours' column sum (83.5) is known to disagree with its
# printed total (82.5); check_item_sum_consistency flags it.
REPORTED_SUS_STUDY = {
    "ours": {
        "reported_total": 82.5,
        "item_means": (8.8, 8.5, 8.6, 8.8, 8.0, 8.3, 8.7, 8.0, 7.9, 7.9),
        "supplementary": (4.5, 4.6, 4.3, 4.5),
    },
    "claude-3.5": {
        "reported_total": 76.3,
        "item_means": (8.0, 7.3, 7.8, 7.5, 7.7, 6.9, 8.1, 7.2, 8.0, 7.8),
        "supplementary": (4.1, 4.2, 4.4, 4.0),
    },
    "participants_per_group": 250,
}


def format_study_report(report: StudyReport) -> str:
    lines = []
    for g in (report.group_a, report.group_b):
        ci = f"[{g.ci95[0]:.2f}, {g.ci95[1]:.2f}]" if g.ci95 else "undefined (n < 2)"
        lines.append(f"group {g.label}: n={g.n} mean SUS={g.mean_score:.2f} sd={g.sd:.2f} 95% CI={ci}")
        items = "  ".join(f"{i + 1}:{m:.2f}" for i, m in enumerate(g.item_means))
        lines.append(f"  item contributions (0-10): {items}")
        if g.supplementary_means:
            supp = "  ".join(f"{i + 11}:{m:.2f}" for i, m in enumerate(g.supplementary_means))
            lines.append(f"  supplementary (1-5): {supp}")
    lines.append(
        f"Cohen's d (pooled SD): {report.cohens_d:.4f}   Welch t: {report.t_statistic:.4f}   "
        f"two-sided p: {report.p_value:.3g}"
    )
    return "\n".join(lines) + "\n"
