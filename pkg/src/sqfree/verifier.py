"""Consistency checks for generated runs.

Five per-step conditions tie the combination, the emitted mu stream and the
history together; they are provably equivalent (conditions d and e joining
under the gap condition), so on a healthy run all of them hold with exact
equality at every step.  A failure of any of them is a finding to report,
never a tolerance question.

Run-level verification compares a finished record stream against the sieve
oracle: completeness (no square-free number skipped), soundness (nothing
with a square factor generated, all mu values match), and the gap condition.

Everything here is a pure function of immutable inputs; checks for distinct
steps may run concurrently.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .core import BeurlingCombination, _tree_sum
from .generator import (
    GeneratedRecord,
    IterationState,
    ScanCapExceeded,
    _ExactEngine,
)
from .oracle import MobiusSieve

__all__ = [
    "ConditionReport",
    "VerificationReport",
    "check_condition_a",
    "check_condition_b",
    "check_condition_c",
    "check_condition_d",
    "check_condition_e",
    "verify_run",
    "report_to_dict",
    "BatteryResult",
    "run_condition_battery",
]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one condition check at one step.

    holds is exact equality of lhs and rhs.  For the coefficient-form
    condition (b) the two sides are whole combinations; lhs/rhs then carry
    the first mismatching coefficient pair (both zero when the check holds).
    """

    step_index: int
    condition: str
    holds: bool
    lhs: Fraction
    rhs: Fraction


@dataclass
class VerificationReport:
    """Run-level findings against the sieve oracle.

    Every list empty means the run is fully consistent with the conjectures
    at this limit.
    """

    limit: int
    missing_square_free: list = field(default_factory=list)
    square_full_generated: list = field(default_factory=list)
    mu_mismatches: list = field(default_factory=list)
    gap_violations: list = field(default_factory=list)
    conditions_failed: list = field(default_factory=list)
    mean_gap: Fraction = Fraction(0)

    def is_consistent(self) -> bool:
        return not (
            self.missing_square_free
            or self.square_full_generated
            or self.mu_mismatches
            or self.gap_violations
            or self.conditions_failed
        )


def _history_mu_sum(history: Sequence[Tuple[int, int]]) -> Fraction:
    return _tree_sum([Fraction(mu, k) for k, mu in history])


def check_condition_a(state: IterationState) -> ConditionReport:
    """sum_{j<=i} mu_j/k_j  ==  (1 + b_i(k_i)) / k_i, exactly."""
    lhs = _history_mu_sum(state.history)
    rhs = (1 + state.b_at_k) / state.k_current
    return ConditionReport(state.i, "a", lhs == rhs, lhs, rhs)


def closed_form_combination(history: Sequence[Tuple[int, int]]) -> BeurlingCombination:
    """Coefficient form implied by the history.

    Terms (k_j, mu_j) for all but the last history entry, plus the tail term
    (k_i, -k_i * sum_{j<i} mu_j/k_j) at the current point.
    """
    if not history:
        raise ValueError("history must not be empty")
    k_i = history[-1][0]
    partial = _history_mu_sum(history[:-1])
    pairs = [(k, Fraction(mu)) for k, mu in history[:-1]]
    pairs.append((k_i, -k_i * partial))
    return BeurlingCombination.from_terms(pairs)


def check_condition_b(state: IterationState) -> ConditionReport:
    """The combination equals its closed coefficient form, term by term."""
    expected = closed_form_combination(state.history)
    actual = state.b_current
    if expected == actual:
        return ConditionReport(state.i, "b", True, Fraction(0), Fraction(0))
    scales = sorted(
        {t.scale for t in expected.terms} | {t.scale for t in actual.terms}
    )
    for s in scales:
        got, want = actual.coefficient_at(s), expected.coefficient_at(s)
        if got != want:
            return ConditionReport(state.i, "b", False, got, want)
    return ConditionReport(state.i, "b", False, Fraction(0), Fraction(0))


def check_condition_c(state_prev: IterationState,
                      state: IterationState) -> ConditionReport:
    """mu_i/k_i  ==  (1+b_i(k_i))/k_i - (1+b_{i-1}(k_{i-1}))/k_{i-1}."""
    if state.i != state_prev.i + 1 or state.history[:-1] != state_prev.history:
        raise ValueError("states must be consecutive")
    if state.i < 3:
        raise ValueError("condition c is defined from step 3 on")
    mu_i = state.history[-1][1]
    lhs = Fraction(mu_i, state.k_current)
    rhs = (1 + state.b_at_k) / state.k_current \
        - (1 + state_prev.b_at_k) / state_prev.k_current
    return ConditionReport(state.i, "c", lhs == rhs, lhs, rhs)


def check_condition_d(state: IterationState, k_next: int, b_at_next: Fraction,
                      mu_generated: int | None = None) -> ConditionReport:
    """The jump b_i(k_next) - b_i(k_i) is the emitted mu and is a unit.

    mu_generated defaults to the jump itself (the value a live run emits);
    pass the recorded mu when replaying a stored stream.
    """
    delta = b_at_next - state.b_at_k
    if mu_generated is None:
        holds = delta in (1, -1)
        return ConditionReport(state.i, "d", holds, delta, delta)
    holds = delta == mu_generated and delta in (1, -1)
    return ConditionReport(state.i, "d", holds, delta, Fraction(mu_generated))


def check_condition_e(history: Sequence[Tuple[int, int]],
                      k_i: int) -> ConditionReport:
    """sum_j mu_j * floor(k_i / k_j)  ==  1, in integers."""
    total = sum(mu * (k_i // k) for k, mu in history)
    return ConditionReport(len(history), "e", total == 1,
                           Fraction(total), Fraction(1))


def verify_run(records: Sequence[GeneratedRecord], sieve: MobiusSieve,
               limit: int | None = None) -> VerificationReport:
    """Judge a finished record stream against the sieve oracle.

    limit defaults to the largest generated k; pass the run's actual limit so
    square-free numbers missing above the last record are caught too.
    """
    if not records:
        raise ValueError("no records to verify")
    ks = [r.k for r in records]
    if ks != sorted(set(ks)):
        raise ValueError("records must be strictly increasing in k")
    if limit is None:
        limit = ks[-1]
    if limit > sieve.limit:
        raise ValueError(f"limit {limit} exceeds sieve limit {sieve.limit}")

    report = VerificationReport(limit=limit)
    mu = sieve.mu_table
    generated = {r.k: r for r in records if r.k <= limit}
    report.missing_square_free = [
        n for n in range(1, limit + 1) if mu[n] != 0 and n not in generated
    ]
    for k in sorted(generated):
        rec = generated[k]
        if mu[k] == 0:
            report.square_full_generated.append(k)
        elif rec.mu != mu[k]:
            report.mu_mismatches.append((k, rec.mu, mu[k]))
    # the seed pair (1, 2) sits outside the gap condition's range
    inside = [r for r in records if r.k <= limit]
    for prev, cur in zip(inside[1:], inside[2:]):
        if cur.k >= 2 * prev.k:
            report.gap_violations.append((prev.i, prev.k, cur.k))
    if len(inside) >= 2:
        gaps = sum(r.gap for r in inside[1:])
        report.mean_gap = Fraction(gaps, len(inside) - 1)
    return report


def report_to_dict(report: VerificationReport) -> dict:
    """JSON-ready view of a verification report (snake_case keys)."""
    return {
        "limit": report.limit,
        "missing_square_free": list(report.missing_square_free),
        "square_full_generated": list(report.square_full_generated),
        "mu_mismatches": [
            {"k": k, "generated_mu": g, "oracle_mu": o}
            for k, g, o in report.mu_mismatches
        ],
        "gap_violations": [
            {"i": i, "k_i": a, "k_next": b} for i, a, b in report.gap_violations
        ],
        "conditions_failed": [
            {
                "step_index": c.step_index,
                "condition": c.condition,
                "holds": c.holds,
                "lhs": str(c.lhs),
                "rhs": str(c.rhs),
            }
            for c in report.conditions_failed
        ],
        "mean_gap": str(report.mean_gap),
        "consistent": report.is_consistent(),
    }


@dataclass
class BatteryResult:
    """Outcome of streaming condition checks over a full exact run."""

    limit: int
    final_i: int
    final_k: int
    checks: Counter
    failures: list
    gap_violations: list
    records: list

    def all_hold(self) -> bool:
        return not self.failures and not self.gap_violations


def run_condition_battery(limit: int,
                          full_check_interval: int = 500,
                          sample_count: int = 4,
                          seed: int = 20260809) -> BatteryResult:
    """Drive an exact run to limit, checking every condition at every step.

    Per step, with exact arithmetic throughout:

    - (a) the running mu/k sum against (1 + b(k))/k;
    - (b) every collapsed coefficient against the history, and the newest
      coefficient against -k * (mu/k sum below k);
    - (c) the telescoped difference of successive (1 + b(k))/k values;
    - (d) the jump recomputed independently from floor counts over the
      history (machine integers, vectorized), plus unit-ness;
    - (e) the floor-weighted history sum equals 1;
    - the gap condition k_next < 2k.

    Every full_check_interval steps the combination is additionally
    materialized and deep-checked: coefficient form from scratch, direct
    evaluation of the cached value, value -1 at the previous point, and
    value -1 at sampled integers and midpoints inside [1, k).
    """
    if limit < 2:
        raise ValueError("limit must be >= 2")
    rng = random.Random(seed)
    eng = _ExactEngine()
    checks: Counter = Counter()
    failures: list[ConditionReport] = []
    gap_violations: list[tuple] = []
    records = [
        GeneratedRecord(1, 1, 1, 0, 0.0, 0.0),
        GeneratedRecord(2, 2, -1, 1, 0.0, 0.0),
    ]

    # seed-step checks: step index 2 for (a), history prefixes for (e)
    musum = Fraction(1, 2)
    alpha_prev = Fraction(eng.L + eng.B, eng.L * eng.k)   # (1 + b_2(2)) / 2
    checks["a"] += 1
    if musum != alpha_prev:
        failures.append(ConditionReport(2, "a", False, musum, alpha_prev))
    for upto in (1, 2):
        rep = check_condition_e(tuple(zip(eng.hk, eng.hmu))[:upto],
                                eng.hk[upto - 1])
        checks["e"] += 1
        if not rep.holds:
            failures.append(rep)

    expected_coeff = {1: 1}
    g_below = Fraction(1)   # sum of mu/k over history strictly below newest
    checks["b"] += 1
    if eng.coeff != expected_coeff or \
            eng.newest_coeff_fraction() != -eng.k * g_below:
        failures.append(ConditionReport(2, "b", False,
                                        eng.newest_coeff_fraction(),
                                        -eng.k * g_below))

    cap = 64
    hist_k = np.zeros(cap, dtype=np.int64)
    hist_mu = np.zeros(cap, dtype=np.int64)
    hist_k[0:2] = (1, 2)
    hist_mu[0:2] = (1, -1)
    n = 2

    def deep_check(i, k_prev, k_next, mu_val):
        eng.spot_verify(k_prev, k_next, mu_val)
        state = eng.state()
        rep = check_condition_b(state)
        checks["b_full"] += 1
        if not rep.holds:
            failures.append(rep)
        checks["below_prev"] += 1
        if state.b_current.value_at(k_prev) != -1:
            failures.append(ConditionReport(
                i, "b_below", False,
                state.b_current.value_at(k_prev), Fraction(-1)))
        for _ in range(sample_count):
            x = rng.randint(1, k_next - 1)
            for pt in (Fraction(x), Fraction(2 * x + 1, 2)):
                if pt >= k_next:
                    continue
                checks["constancy"] += 1
                v = state.b_current.value_at(pt)
                if v != -1:
                    failures.append(ConditionReport(
                        i, "constancy", False, v, Fraction(-1)))

    steps_since_deep = 0
    last_step = None
    while eng.k < limit:
        k_prev = eng.k
        try:
            k_next, mu_val = eng.scan(None, False)
        except ScanCapExceeded as exc:
            gap_violations.append((exc.i, exc.k_current, None))
            break
        if k_next > limit:
            break
        mu_prev_scale = eng.hmu[-1]
        g_next = musum            # sum mu/k over history below k_next
        eng.update(k_next, mu_val)
        i = eng.i
        records.append(GeneratedRecord(i, k_next, mu_val, k_next - k_prev,
                                       0.0, 0.0))

        # gap condition
        checks["gap"] += 1
        if k_next >= 2 * k_prev:
            gap_violations.append((i - 1, k_prev, k_next))

        # (d): jump re-derived from floor counts over the pre-step history
        divs = k_next // hist_k[:n] - k_prev // hist_k[:n]
        jump = -int(np.dot(hist_mu[:n], divs))
        checks["d"] += 1
        if jump != mu_val or mu_val not in (-1, 1):
            failures.append(ConditionReport(i, "d", False,
                                            Fraction(jump), Fraction(mu_val)))

        # (a)
        musum += Fraction(mu_val, k_next)
        alpha = Fraction(eng.L + eng.B, eng.L * k_next)
        checks["a"] += 1
        if musum != alpha:
            failures.append(ConditionReport(i, "a", False, musum, alpha))

        # (c)
        lhs_c = Fraction(mu_val, k_next)
        rhs_c = alpha - alpha_prev
        checks["c"] += 1
        if lhs_c != rhs_c:
            failures.append(ConditionReport(i, "c", False, lhs_c, rhs_c))
        alpha_prev = alpha

        # (b), incrementally: the step may only touch two scales
        expected_coeff[k_prev] = mu_prev_scale
        checks["b"] += 1
        if eng.coeff != expected_coeff:
            bad = next(
                s for s in sorted(set(eng.coeff) | set(expected_coeff))
                if eng.coeff.get(s) != expected_coeff.get(s)
            )
            failures.append(ConditionReport(
                i, "b", False,
                Fraction(eng.coeff.get(bad, 0)),
                Fraction(expected_coeff.get(bad, 0)),
            ))
        newest_expected = -k_next * g_next
        if eng.newest_coeff_fraction() != newest_expected:
            failures.append(ConditionReport(
                i, "b", False, eng.newest_coeff_fraction(), newest_expected))

        # (e)
        if n == cap:
            cap *= 2
            for name, arr in (("k", hist_k), ("mu", hist_mu)):
                buf = np.zeros(cap, dtype=np.int64)
                buf[:n] = arr[:n]
                if name == "k":
                    hist_k = buf
                else:
                    hist_mu = buf
        hist_k[n] = k_next
        hist_mu[n] = mu_val
        n += 1
        total_e = int(np.dot(hist_mu[:n], k_next // hist_k[:n]))
        checks["e"] += 1
        if total_e != 1:
            failures.append(ConditionReport(i, "e", False,
                                            Fraction(total_e), Fraction(1)))

        steps_since_deep += 1
        last_step = (i, k_prev, k_next, mu_val)
        if steps_since_deep >= full_check_interval:
            steps_since_deep = 0
            last_step = None
            deep_check(i, k_prev, k_next, mu_val)

    if last_step is not None:
        deep_check(*last_step)

    return BatteryResult(
        limit=limit,
        final_i=eng.i,
        final_k=eng.k,
        checks=checks,
        failures=failures,
        gap_violations=gap_violations,
        records=records,
    )
