"""Iterative generation of square-free numbers with Mobius values.

The iteration keeps a combination b and a current point k.  The next number
is the first integer above k where b changes value, the emitted mu is that
jump, and b is then extended by a weighted two-scale block.  Three evaluation
strategies are provided:

- exact: every quantity is an exact rational; the run either produces the
  definitionally correct stream or raises a structured error.
- fast: the discontinuity scan runs on machine integers derived from the
  emitted history, with the exact state maintained alongside and consulted
  at a configurable interval.
- float-demo: 64-bit floating point with bit-exact comparisons, kept only to
  demonstrate how rounding forges spurious output; diagnostic, never trusted.

The iteration is inherently sequential (each step depends on the full
history); a single run must stay on one thread.  Completed records and
states are immutable and may be shared freely.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterator, Sequence, Tuple

import numpy as np

from .core import BeurlingCombination, _tree_sum

__all__ = [
    "Mode",
    "IterationState",
    "GeneratedRecord",
    "GeneratorError",
    "ScanCapExceeded",
    "NonUnitMuError",
    "ConsistencyError",
    "initial_state",
    "next_discontinuity",
    "step",
    "fast_delta",
    "run",
]


class Mode(enum.Enum):
    """Evaluation strategy for a run.

    EXACT and FAST must emit identical (k, mu) streams; FLOAT_DEMO is a
    diagnostic mode whose records may carry mu values outside {-1, +1}.
    """

    EXACT = "exact"
    FAST = "fast"
    FLOAT_DEMO = "float-demo"

    @staticmethod
    def from_string(name: str) -> "Mode":
        aliases = {"exact": Mode.EXACT, "fast": Mode.FAST,
                   "float": Mode.FLOAT_DEMO, "float-demo": Mode.FLOAT_DEMO}
        try:
            return aliases[name]
        except KeyError:
            raise ValueError(f"unknown mode {name!r}") from None


class GeneratorError(Exception):
    """Base class for structured generation failures."""


class ScanCapExceeded(GeneratorError):
    """No value change found within the scan window.

    With the default window this means the next number would be >= twice the
    current one, i.e. a gap-condition violation candidate.  The run halts and
    reports; it never guesses past the window.
    """

    def __init__(self, i: int, k_current: int, scan_cap: int):
        self.i = i
        self.k_current = k_current
        self.scan_cap = scan_cap
        super().__init__(
            f"no discontinuity in window: step i={i}, k={k_current}, "
            f"scanned offsets 1..{scan_cap - 1}"
        )


class NonUnitMuError(GeneratorError):
    """The value jump at the chosen point is not exactly +1 or -1."""

    def __init__(self, i: int, k_current: int, k_next: int, delta):
        self.i = i
        self.k_current = k_current
        self.k_next = k_next
        self.delta = delta
        super().__init__(
            f"jump b({k_next}) - b({k_current}) = {delta} is not a unit "
            f"(step i={i}); conjecture violation or representation bug"
        )


class ConsistencyError(GeneratorError):
    """Exact bookkeeping detected drift between representations.

    Raised when a coefficient merge fails to land on an integer, when a
    cached value disagrees with direct evaluation, or when the combination
    and the emitted stream diverge.  Mathematically significant: a genuine
    occurrence (not a bug) would falsify the conjectures under test.
    """


@dataclass(frozen=True)
class IterationState:
    """Full state after step i.

    history holds (k_j, mu_j) for j = 1..i in strictly increasing k order;
    b_at_k caches the combination's value at k_current.
    """

    i: int
    k_current: int
    b_current: BeurlingCombination
    b_at_k: Fraction
    history: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if self.i < 2:
            raise ValueError("states start at step index 2")
        ks = [k for k, _ in self.history]
        if ks != sorted(set(ks)):
            raise ValueError("history must be strictly increasing in k")
        if any(mu not in (-1, 1) for _, mu in self.history):
            raise ValueError("history mu values must be +1 or -1")


@dataclass(frozen=True)
class GeneratedRecord:
    """One output row: index, number, mu, gap to predecessor and timings.

    T_seconds is the running prefix sum of t_seconds.  The first record
    (k = 1) has gap 0.
    """

    i: int
    k: int
    mu: int
    gap: int
    t_seconds: float
    T_seconds: float


def initial_state() -> IterationState:
    """Seed state: k1 = 1, k2 = 2, b = {x/1} - 2*{x/2}, mu(1) = 1, mu(2) = -1.

    The iteration only defines mu from step 3 on; the two seeds carry the
    classical values so the record stream is total.
    """
    b2 = BeurlingCombination.empty().add_block(1, 2, 1)
    return IterationState(
        i=2,
        k_current=2,
        b_current=b2,
        b_at_k=b2.value_at(2),
        history=((1, 1), (2, -1)),
    )


def next_discontinuity(state: IterationState, scan_cap: int | None = None) -> int:
    """First integer above k_current where the combination changes value.

    Only integer points are probed: the combination is constant between
    consecutive naturals, so nothing can change strictly inside a unit
    interval.  Probes offsets 1 .. scan_cap-1 and raises ScanCapExceeded if
    the counter reaches scan_cap (default: k_current, so a raise means the
    gap condition k_next < 2*k_current failed).
    """
    cap = state.k_current if scan_cap is None else scan_cap
    if cap < 1:
        raise ValueError("scan_cap must be >= 1")
    reference = state.b_at_k
    for j in range(1, cap):
        x = state.k_current + j
        if state.b_current.value_at(x) != reference:
            return x
    raise ScanCapExceeded(state.i, state.k_current, cap)


def step(state: IterationState,
         scan_cap: int | None = None) -> tuple[IterationState, GeneratedRecord]:
    """One definitional iteration step, built entirely on exact evaluation.

    Finds k_next, emits mu = b(k_next) - b(k_current) (which must be a unit),
    and extends the combination by (1 + b(k_current)) times the two-scale
    block on (k_current, k_next).  Reference implementation: clear rather
    than fast; the engine used by run() is cross-checked against it.
    """
    k_next = next_discontinuity(state, scan_cap)
    value_next = state.b_current.value_at(k_next)
    delta = value_next - state.b_at_k
    if delta != 1 and delta != -1:
        raise NonUnitMuError(state.i, state.k_current, k_next, delta)
    mu = int(delta)
    weight = 1 + state.b_at_k
    b_next = state.b_current.add_block(state.k_current, k_next, weight)
    new_state = IterationState(
        i=state.i + 1,
        k_current=k_next,
        b_current=b_next,
        b_at_k=b_next.value_at(k_next),
        history=state.history + ((k_next, mu),),
    )
    record = GeneratedRecord(
        i=new_state.i,
        k=k_next,
        mu=mu,
        gap=k_next - state.k_current,
        t_seconds=0.0,
        T_seconds=0.0,
    )
    return new_state, record


def fast_delta(history: Sequence[Tuple[int, int]], k_current: int, x: int) -> int:
    """Machine-integer jump sum over the emitted history.

    Returns sum_j mu_j * (floor(x/k_j) - floor(k_current/k_j)).  Inside the
    window k_current <= x < 2*k_current this equals -(b(x) - b(k_current))
    whenever combination and history agree, so a nonzero value flags the
    discontinuity and mu = -fast_delta.  The derivation only holds in that
    window; other x are rejected.
    """
    if not k_current <= x < 2 * k_current:
        raise ValueError(
            f"x={x} outside fast-path window [{k_current}, {2 * k_current})"
        )
    return sum(mu * (x // k - k_current // k) for k, mu in history)


def _divisors(n: int) -> list[int]:
    out = []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            out.append(d)
            q = n // d
            if q != d:
                out.append(q)
    return out


class _ExactEngine:
    """Exact iteration state over an explicit common denominator.

    Every rational in play (cached value, block weight, newest coefficient)
    conjecturally has denominator dividing L = lcm of the generated numbers,
    so the engine stores numerators over L as plain integers and grows L as
    new prime content arrives.  This avoids normalizing huge fractions every
    step; exactness is preserved because each operation that could leave the
    lattice (a division) checks its remainder and every coefficient merge
    checks that it lands on the integer matching the emitted stream.  Any
    failed check raises ConsistencyError instead of continuing.

    Collapsed coefficients (all scales except the newest) are verified
    integers and kept in a plain dict, which keeps the discontinuity scan in
    machine-size arithmetic.  Scales are scheduled in a bucket map keyed by
    their next multiple, so scanning position m touches exactly the scales
    dividing m.
    """

    def __init__(self):
        self.i = 2
        self.k = 2
        self.L = 2          # lcm of generated numbers so far
        self.B = 0          # b_i(k_i) * L; b_2(2) = 0
        self.coeff: dict[int, int] = {1: 1}   # collapsed coefficients
        self.S = 2          # L * sum of coeff/scale over collapsed scales
        self.newest_scale = 2
        self.NL = -4        # newest coefficient * L: -2 * 2
        self.hk: list[int] = [1, 2]
        self.hmu: list[int] = [1, -1]
        self.mu_by_scale: dict[int, int] = {1: 1, 2: -1}
        # bucket schedule: position -> scales whose next multiple is there
        self.schedule: dict[int, list[int]] = {3: [1], 4: [2]}

    def b_at_k_fraction(self) -> Fraction:
        return Fraction(self.B, self.L)

    def newest_coeff_fraction(self) -> Fraction:
        return Fraction(self.NL, self.L)

    def state(self) -> IterationState:
        pairs = [(s, Fraction(c)) for s, c in self.coeff.items()]
        pairs.append((self.newest_scale, self.newest_coeff_fraction()))
        return IterationState(
            i=self.i,
            k_current=self.k,
            b_current=BeurlingCombination.from_terms(pairs),
            b_at_k=self.b_at_k_fraction(),
            history=tuple(zip(self.hk, self.hmu)),
        )

    def scan(self, scan_cap: int | None, use_history_mu: bool) -> tuple[int, int]:
        """Walk integers above k until the cumulative jump is nonzero.

        The value difference b(x) - b(k) telescopes over integers to
        -sum_{k < m <= x} C(m) with C(m) the sum of coefficients at scales
        dividing m (the per-term sums c_j/k_j cancel block by block).  The
        exact path reads C(m) off the verified collapsed coefficients; the
        fast path reads the emitted history mu values instead.  Returns
        (k_next, mu); raises ScanCapExceeded when the offset reaches the cap.
        """
        cap = self.k if scan_cap is None else scan_cap
        if cap < 1:
            raise ValueError("scan_cap must be >= 1")
        if use_history_mu and cap > self.k:
            # the history-based jump sum is only derivable below 2k
            cap = self.k
        source = self.mu_by_scale if use_history_mu else self.coeff
        cum = 0
        cum_big: Fraction | None = None  # set only if the newest scale is hit
        k = self.k
        schedule = self.schedule
        for j in range(1, cap):
            m = k + j
            for s in schedule.pop(m, ()):
                if s == self.newest_scale and not use_history_mu:
                    term = self.newest_coeff_fraction()
                    cum_big = term if cum_big is None else cum_big + term
                else:
                    cum += source[s]
                nxt = m + s
                if nxt in schedule:
                    schedule[nxt].append(s)
                else:
                    schedule[nxt] = [s]
            if cum_big is None:
                if cum == 0:
                    continue
                delta = -cum
            else:
                total = cum_big + cum
                if total == 0:
                    continue
                if total.denominator != 1:
                    raise NonUnitMuError(self.i, k, m, -total)
                delta = -int(total)
            if delta != 1 and delta != -1:
                raise NonUnitMuError(self.i, k, m, delta)
            return m, delta
        raise ScanCapExceeded(self.i, k, cap)

    def update(self, k_next: int, mu: int) -> None:
        """Extend the combination by the weighted block on (k, k_next).

        All arithmetic is integer over the common denominator; the three
        checks below are where a conjecture violation would surface:
        the block weight must stay on the denominator lattice, the merged
        coefficient at the old newest scale must be an integer, and that
        integer must equal the mu emitted for that scale.
        """
        k = self.k
        if not k < k_next:
            raise ValueError("k_next must exceed the current point")
        g = gcd(self.L, k_next)
        f = k_next // g
        if f > 1:
            self.L *= f
            self.B *= f
            self.NL *= f
            self.S *= f
        L = self.L
        W = L + self.B                      # (1 + b(k)) * L
        if W % k:
            raise ConsistencyError(
                f"step i={self.i}: block weight (1+b({k}))/{k} leaves the "
                f"common-denominator lattice"
            )
        Q = W // k                          # weight / k, times L
        merged = self.NL + W
        if merged % L:
            raise ConsistencyError(
                f"step i={self.i}: coefficient merge at scale {k} is not an "
                f"integer"
            )
        c = merged // L
        if c != self.hmu[-1]:
            raise ConsistencyError(
                f"step i={self.i}: merged coefficient {c} at scale {k} "
                f"differs from emitted mu {self.hmu[-1]}"
            )
        self.coeff[k] = c
        self.S += c * (L // k)              # scale k joins the collapsed sum
        self.newest_scale = k_next
        self.NL = -Q * k_next
        self.B = self.B + mu * L + Q * (k_next - k)
        self.k = k_next
        self.i += 1
        self.hk.append(k_next)
        self.hmu.append(mu)
        self.mu_by_scale[k_next] = mu
        nxt = 2 * k_next
        if nxt in self.schedule:
            self.schedule[nxt].append(k_next)
        else:
            self.schedule[nxt] = [k_next]

    def spot_verify(self, k_prev: int, k_next: int, mu: int) -> None:
        """Re-verify the cached value and the chosen discontinuity.

        Runs the definitional checks that per-step bookkeeping does not:
        direct evaluation of the combination at the current point, an
        independent divisor-enumeration re-scan of the window just chosen,
        and the block-sum cancellation that the stepping identity relies on.
        """
        direct = _tree_sum(
            [Fraction(c * (self.k % s), s) for s, c in self.coeff.items()]
        )
        # the newest scale equals the evaluation point, so its term is zero
        if direct != self.b_at_k_fraction():
            raise ConsistencyError(
                f"step i={self.i}: cached b({self.k}) = "
                f"{self.b_at_k_fraction()} but direct evaluation gives {direct}"
            )
        for m in range(k_prev + 1, k_next + 1):
            cm = 0
            for d in _divisors(m):
                if d in self.coeff:
                    cm += self.coeff[d]
            expected = -mu if m == k_next else 0
            if cm != expected:
                raise ConsistencyError(
                    f"step i={self.i}: window re-scan at {m} gives jump "
                    f"{-cm}, expected {-expected}"
                )
        parts = [Fraction(c, s) for s, c in self.coeff.items()]
        parts.append(Fraction(self.NL, self.L * self.newest_scale))
        if _tree_sum(parts) != 0:
            raise ConsistencyError(
                f"step i={self.i}: coefficient/scale sums no longer cancel"
            )


class _FloatEngine:
    """Floating-point twin of the iteration, for demonstration only.

    Coefficients are float64, evaluation is a vectorized dot product, and
    the discontinuity test is bit-exact float comparison.  Intentionally
    fragile: rounding noise can both forge and hide discontinuities, which
    is precisely the failure mode this mode exists to exhibit.  Emitted mu
    is the jump rounded to the nearest integer and may be anything.
    """

    def __init__(self):
        self._cap = 1024
        self.scales = np.zeros(self._cap, dtype=np.float64)
        self.coeffs = np.zeros(self._cap, dtype=np.float64)
        self.scales[0:2] = (1.0, 2.0)
        self.coeffs[0:2] = (1.0, -2.0)
        self.n = 2
        self.i = 2
        self.k = 2
        self.val_k = self._value(2)

    def _grow(self):
        self._cap *= 2
        for name in ("scales", "coeffs"):
            buf = np.zeros(self._cap, dtype=np.float64)
            old = getattr(self, name)
            buf[: self.n] = old[: self.n]
            setattr(self, name, buf)

    def _value(self, x: int) -> float:
        s = self.scales[: self.n]
        q = x / s
        return float(np.dot(self.coeffs[: self.n], q - np.floor(q)))

    def advance(self, scan_cap: int | None) -> tuple[int, int, float]:
        """Scan, update, return (k_next, mu_rounded, raw_jump)."""
        cap = self.k if scan_cap is None else scan_cap
        if cap < 1:
            raise ValueError("scan_cap must be >= 1")
        k_next = None
        jump = 0.0
        for j in range(1, cap):
            x = self.k + j
            v = self._value(x)
            if v != self.val_k:
                k_next = x
                jump = v - self.val_k
                break
        if k_next is None:
            raise ScanCapExceeded(self.i, self.k, cap)
        w = 1.0 + self.val_k
        if self.n == self._cap:
            self._grow()
        self.coeffs[self.n - 1] += w
        self.scales[self.n] = float(k_next)
        self.coeffs[self.n] = -w * k_next / self.k
        self.n += 1
        self.i += 1
        self.k = k_next
        self.val_k = self._value(k_next)
        return k_next, int(round(jump)), jump


def _seed_records(t_init: float) -> list[GeneratedRecord]:
    return [
        GeneratedRecord(i=1, k=1, mu=1, gap=0, t_seconds=t_init, T_seconds=t_init),
        GeneratedRecord(i=2, k=2, mu=-1, gap=1, t_seconds=0.0, T_seconds=t_init),
    ]


def run(limit: int,
        mode: Mode = Mode.EXACT,
        scan_cap: int | None = None,
        spot_check_interval: int = 1000) -> Iterator[GeneratedRecord]:
    """Generate records for every number produced up to and including limit.

    t_seconds measures generation work only; the periodic re-verification in
    exact and fast modes runs off the clock.  Streams are deterministic in
    the (i, k, mu, gap) columns for a given limit and mode.
    """
    if not isinstance(limit, int) or limit < 2:
        raise ValueError(f"limit must be an integer >= 2, got {limit!r}")
    if spot_check_interval < 1:
        raise ValueError("spot_check_interval must be >= 1")
    if scan_cap is not None and scan_cap < 1:
        raise ValueError("scan_cap must be >= 1")
    if mode is Mode.FLOAT_DEMO:
        yield from _run_float(limit, scan_cap)
    else:
        yield from _run_engine(limit, mode is Mode.FAST, scan_cap,
                               spot_check_interval)


def _run_engine(limit: int, use_history_mu: bool, scan_cap: int | None,
                spot_check_interval: int) -> Iterator[GeneratedRecord]:
    t0 = time.perf_counter()
    engine = _ExactEngine()
    t_init = time.perf_counter() - t0
    total = t_init
    seeds = _seed_records(t_init)
    yield seeds[0]
    yield seeds[1]
    steps_since_check = 0
    last_step: tuple[int, int, int] | None = None
    while engine.k < limit:
        t0 = time.perf_counter()
        k_next, mu = engine.scan(scan_cap, use_history_mu)
        if k_next > limit:
            break
        k_prev = engine.k
        engine.update(k_next, mu)
        t_step = time.perf_counter() - t0
        total += t_step
        last_step = (k_prev, k_next, mu)
        steps_since_check += 1
        if steps_since_check >= spot_check_interval:
            engine.spot_verify(k_prev, k_next, mu)  # off the clock
            steps_since_check = 0
            last_step = None
        yield GeneratedRecord(
            i=engine.i,
            k=k_next,
            mu=mu,
            gap=k_next - k_prev,
            t_seconds=t_step,
            T_seconds=total,
        )
    if last_step is not None:
        engine.spot_verify(*last_step)


def _run_float(limit: int, scan_cap: int | None) -> Iterator[GeneratedRecord]:
    t0 = time.perf_counter()
    engine = _FloatEngine()
    t_init = time.perf_counter() - t0
    total = t_init
    seeds = _seed_records(t_init)
    yield seeds[0]
    yield seeds[1]
    while engine.k < limit:
        t0 = time.perf_counter()
        k_prev = engine.k
        k_next, mu, _ = engine.advance(scan_cap)
        t_step = time.perf_counter() - t0
        total += t_step
        if k_next > limit:
            break
        yield GeneratedRecord(
            i=engine.i,
            k=k_next,
            mu=mu,
            gap=k_next - k_prev,
            t_seconds=t_step,
            T_seconds=total,
        )
