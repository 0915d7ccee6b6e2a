"""
Lemma checker
Runs the invariant suite of the lab and summarizes the results
"""
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from tools.arith import coprime_count, orthant_vectors, phi_m, primitive_vectors, totient
from tools.measures import (
    chung_erdos_bound, fitted_constant, large_psi_floor, lower_bound_measure, measure_A, measure_intersection,
    overlap_ratio_scan, small_psi_limit, upper_bound_measure,
)
from tools.montecarlo import (
    MAX_SEED, counterexample_demo, empirical_intersection_measure, enumerate_solutions, hit_fraction, lift_solution,
    residual,
)
from tools.series import (
    ExplicitTable, PowerLaw, RadialTable, catlin_bar, ds_sum, eval_psi, hausdorff_ds_sum, threshold_split,
)
from tools.torus_sets import (
    ApproxMode, ApproxSet, BallFamily1D, approx_set_1d, scale_concentric, select_separated_numerators,
    stripe_independence_estimate, union_all,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LemmaGrid:
    """Sizes of the default suite; every check finishes in a few seconds"""
    exact_measure_d: int = 300
    sandwich_d: int = 60
    sandwich_m: int = 3
    direction_samples: int = 50
    stripe_samples: int = 20000
    intersection_samples: int = 2000
    overlap_K: int = 40
    overlap_ceiling: int = 100
    chung_erdos_families: int = 100
    dilation_pairs: int = 100
    separated_d: int = 300
    brute_force_Q: int = 40
    counterexample_N: int = 30030
    lifts: int = 200
    determinism_samples: int = 64


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    cases: int
    failures: int
    detail: str = ''
    metrics: Dict[str, Any] = field(default_factory=dict)
    seconds: float = field(default=0.0, repr=False)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) | stream))


def _random_fraction(rng: np.random.Generator, high: Fraction, den: int = 64) -> Fraction:
    """Uniform draw from {0, 1/den, ..., <= high}"""
    return Fraction(int(rng.integers(0, int(high * den) + 1)), den)


class LemmaChecker:
    SUITE_SEED = 20240531

    def __init__(self, seed: Optional[int] = None, grid: Optional[LemmaGrid] = None, workers: int = 1):
        """
        Initialize the lemma checker

        Args:
            seed: Seed for every randomized check; a fixed suite seed when None
            grid: Suite sizes
            workers: Threads for the Monte Carlo checks
        """
        self.seed = self.SUITE_SEED if seed is None else int(seed)
        self.grid = grid or LemmaGrid()
        self.workers = workers
        self.results: List[CheckResult] = []

    def checks(self) -> List[Tuple[str, Callable[[], CheckResult]]]:
        return [
            ('exact_measure_law', self.check_exact_measure_law),
            ('measure_sandwich', self.check_measure_sandwich),
            ('direction_invariance', self.check_direction_invariance),
            ('stripe_independence', self.check_stripe_independence),
            ('intersection_mc', self.check_intersection_mc),
            ('overlap_audit', self.check_overlap_audit),
            ('chung_erdos', self.check_chung_erdos),
            ('dilation', self.check_dilation),
            ('separated_numerators', self.check_separated_numerators),
            ('plain_measure', self.check_plain_measure),
            ('large_psi_floor', self.check_large_psi_floor),
            ('counterexample', self.check_counterexample),
            ('brute_force_counts', self.check_brute_force_counts),
            ('threshold_split', self.check_threshold_split),
            ('hausdorff_reduces_to_ds', self.check_hausdorff_reduces_to_ds),
            ('enumeration_oracle', self.check_enumeration_oracle),
            ('lifting', self.check_lifting),
            ('determinism', self.check_determinism),
        ]

    def run_all(self) -> List[CheckResult]:
        """
        Run every check in order

        Returns:
            List of check results; a check that raises counts as failed
        """
        self.results = []
        for name, check in self.checks():
            start = time.perf_counter()
            try:
                result = check()
            except Exception as e:
                logger.exception(f"Check {name} raised")
                result = CheckResult(name, False, 0, 1, detail=f"error: {e}")
            result = CheckResult(result.name, result.passed, result.cases, result.failures,
                                 result.detail, result.metrics, time.perf_counter() - start)
            mark = '✓' if result.passed else '✗'
            logger.info(f"{mark} {name}: {result.cases} cases, {result.failures} failures ({result.seconds:.2f}s)")
            self.results.append(result)
        return self.results

    @property
    def all_passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    def check_exact_measure_law(self) -> CheckResult:
        failures = cases = 0
        for d in range(1, self.grid.exact_measure_d + 1):
            for eps in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)):
                cases += 1
                if approx_set_1d(d, eps, ApproxMode.COPRIME).measure() != 2 * totient(d) * eps / d:
                    failures += 1
        return CheckResult('exact_measure_law', failures == 0, cases, failures)

    def check_measure_sandwich(self) -> CheckResult:
        failures = cases = 0
        for d in range(1, self.grid.sandwich_d + 1):
            limit = small_psi_limit(d)
            for k in range(1, 5):
                eps = limit * Fraction(k, 4)
                for m in range(1, self.grid.sandwich_m + 1):
                    cases += 1
                    value = measure_A(ApproxSet(1, m, (d,), eps))
                    if not lower_bound_measure(d, eps, m) <= value <= upper_bound_measure(d, eps, m):
                        failures += 1
        return CheckResult('measure_sandwich', failures == 0, cases, failures)

    def check_direction_invariance(self) -> CheckResult:
        rng = _rng(self.seed, 1)
        directions = list(primitive_vectors(3, 12))
        failures = cases = 0
        grid = [(d, eps) for d in (1, 2, 6, 12, 30) for eps in (Fraction(1, 8), Fraction(1, 3))]
        for d, eps in grid:
            cases += 1
            picks = rng.choice(len(directions), size=self.grid.direction_samples, replace=False)
            values = {measure_A(ApproxSet(3, 2, tuple(d * c for c in directions[int(i)]), eps)) for i in picks}
            if len(values) != 1:
                failures += 1
        return CheckResult('direction_invariance', failures == 0, cases, failures)

    def check_stripe_independence(self) -> CheckResult:
        pairs = [
            ((1, 0), (0, 1)), ((1, 1), (1, -1)), ((1, 2), (2, 1)), ((1, 0), (1, 1)), ((2, 1), (1, 3)),
            ((1, 3), (3, 1)), ((0, 1), (1, 1)), ((1, 2), (1, 3)), ((3, 2), (2, 3)), ((1, 4), (4, 1)),
        ]
        radii = [(Fraction(1, 4), Fraction(1, 4)), (Fraction(1, 8), Fraction(1, 8)), (Fraction(1, 5), Fraction(1, 3))]
        within = 0
        for i, (q1, q2) in enumerate(pairs):
            e1, e2 = radii[i % len(radii)]
            v1 = (Fraction(i, 17), Fraction(1, 7))
            v2 = (Fraction(1, 3), Fraction(i, 11))
            estimate = stripe_independence_estimate(q1, q2, v1, v2, e1, e2, self.grid.stripe_samples, self.seed + i)
            if abs(estimate['estimate'] - float(estimate['product'])) <= 4 * max(estimate['stderr'], 1e-12):
                within += 1
        failures = len(pairs) - within
        return CheckResult('stripe_independence', within >= 9, len(pairs), failures,
                           detail='at least 9 of 10 within 4 standard errors')

    def check_intersection_mc(self) -> CheckResult:
        pairs = [
            ((1, 0), (0, 1)), ((1, 1), (1, 2)), ((2, 0), (0, 3)), ((1, 2), (2, 1)), ((2, 2), (1, 3)),
            ((3, 1), (1, 0)), ((0, 2), (2, 3)), ((1, 4), (4, 1)), ((3, 3), (1, 2)), ((2, 4), (3, 1)),
        ]
        within = 0
        for i, (q1, q2) in enumerate(pairs):
            s1 = ApproxSet(2, 1, q1, Fraction(1, 4 + i % 3))
            s2 = ApproxSet(2, 1, q2, Fraction(1, 3 + i % 4))
            exact = measure_intersection(s1, s2)
            estimate = empirical_intersection_measure([s1, s2], self.grid.intersection_samples,
                                                      (self.seed + 100 + i) % MAX_SEED, self.workers)
            if abs(estimate.fraction - float(exact)) <= 4 * max(estimate.stderr, 1e-12):
                within += 1
        return CheckResult('intersection_mc', within >= 9, len(pairs), len(pairs) - within,
                           detail='at least 9 of 10 within 4 standard errors')

    def check_overlap_audit(self) -> CheckResult:
        reports = overlap_ratio_scan(lambda d: Fraction(1, 4 * d), self.grid.overlap_K, self.workers)
        unbounded = [r for r in reports if r.lhs and not r.indicator]
        literal = [r for r in reports if r.lhs and not r.literal_indicator]
        constant = fitted_constant(reports)
        passed = not unbounded and constant is not None and constant <= self.grid.overlap_ceiling
        return CheckResult('overlap_audit', passed, len(reports), len(unbounded),
                           metrics={'fitted_constant': constant,
                                    'positive_overlap_with_literal_indicator_false': len(literal)})

    def check_chung_erdos(self) -> CheckResult:
        rng = _rng(self.seed, 2)
        failures = 0
        for _ in range(self.grid.chung_erdos_families):
            size = int(rng.integers(1, 11))
            sets = [approx_set_1d(int(rng.integers(1, 13)), _random_fraction(rng, Fraction(1, 2)) or Fraction(1, 64),
                                  ApproxMode.COPRIME) for _ in range(size)]
            mu = [s.measure() for s in sets]
            if sum(mu) == 0:
                continue
            pair = [[a.intersect(b).measure() for b in sets] for a in sets]
            if chung_erdos_bound(mu, pair) > union_all(sets).measure():
                failures += 1
        quarter = approx_set_1d(1, Fraction(1, 8), ApproxMode.COPRIME)
        shifted = approx_set_1d(2, Fraction(1, 4), ApproxMode.COPRIME)
        tight = [
            chung_erdos_bound([Fraction(1, 4)] * 2, [[Fraction(1, 4), 0], [0, Fraction(1, 4)]]) == Fraction(1, 2),
            chung_erdos_bound([Fraction(1, 4)] * 2, [[Fraction(1, 4)] * 2] * 2) == Fraction(1, 4),
            chung_erdos_bound([quarter.measure(), shifted.measure()],
                              [[quarter.measure(), 0], [0, shifted.measure()]]) == quarter.union(shifted).measure(),
        ]
        failures += tight.count(False)
        cases = self.grid.chung_erdos_families + len(tight)
        return CheckResult('chung_erdos', failures == 0, cases, failures)

    def _disjoint_family(self, rng: np.random.Generator) -> BallFamily1D:
        slots = int(rng.integers(1, 9))
        chosen = sorted({int(k) for k in rng.integers(0, slots, size=int(rng.integers(1, slots + 1)))})
        radius = Fraction(int(rng.integers(1, 8)), 16 * slots)
        return BallFamily1D(tuple(Fraction(k, slots) + Fraction(int(rng.integers(0, 4)), 64 * slots)
                                  for k in chosen), radius)

    def check_dilation(self) -> CheckResult:
        rng = _rng(self.seed, 3)
        failures = 0
        for _ in range(self.grid.dilation_pairs):
            I, J = self._disjoint_family(rng), self._disjoint_family(rng)
            sigma = Fraction(int(rng.integers(1, 33)), 32)
            before = I.arc_union().intersect(J.arc_union()).measure()
            after = scale_concentric(I, sigma).arc_union().intersect(scale_concentric(J, sigma).arc_union()).measure()
            if after > sigma * before:
                failures += 1
        return CheckResult('dilation', failures == 0, self.grid.dilation_pairs, failures)

    def check_separated_numerators(self) -> CheckResult:
        failures = 0
        for d in range(1, self.grid.separated_d + 1):
            phi = totient(d)
            kept = sorted(select_separated_numerators(d))
            gaps = [b - a for a, b in zip(kept, kept[1:])] + [d - kept[-1] + kept[0]] if len(kept) > 1 else []
            if 3 * len(kept) < phi or any(gap * phi < d for gap in gaps):
                failures += 1
        return CheckResult('separated_numerators', failures == 0, self.grid.separated_d, failures)

    def check_plain_measure(self) -> CheckResult:
        failures = cases = 0
        for d in range(1, 41):
            for eps in (Fraction(1, 8), Fraction(1, 2), Fraction(3, 4), Fraction(5, 2)):
                cases += 1
                value = approx_set_1d(d, eps, ApproxMode.PLAIN).measure()
                if value != min(Fraction(1), 2 * eps):
                    failures += 1
        return CheckResult('plain_measure', failures == 0, cases, failures)

    def check_large_psi_floor(self) -> CheckResult:
        failures = cases = 0
        for d in range(1, 101):
            eps = small_psi_limit(d) + Fraction(1, 1000)
            for m in (1, 2):
                cases += 1
                if measure_A(ApproxSet(1, m, (d,), eps)) < large_psi_floor(d, eps, m):
                    failures += 1
        return CheckResult('large_psi_floor', failures == 0, cases, failures)

    def check_counterexample(self) -> CheckResult:
        eta = Fraction(1, 10)
        demo = counterexample_demo(self.grid.counterexample_N, eta)
        passed = demo.ratio >= 3 and demo.union_exact <= 2 * eta
        return CheckResult('counterexample', passed, 1, 0 if passed else 1,
                           metrics={'sum': demo.sum, 'union': demo.union_exact, 'ratio': demo.ratio})

    def check_brute_force_counts(self) -> CheckResult:
        failures = cases = 0
        limit = self.grid.brute_force_Q
        for Q in range(limit + 1):
            for g in range(1, limit + 1):
                cases += 1
                if coprime_count(Q, g) != sum(1 for p in range(-Q, Q + 1) if math.gcd(p, g) == 1):
                    failures += 1
        for n in (1, 2):
            for q in orthant_vectors(n, 6):
                g = math.gcd(*q)
                height = max(q)
                for m in (1, 2):
                    cases += 1
                    brute = sum(1 for p in product(range(-height, height + 1), repeat=m)
                                if math.gcd(math.gcd(*p), g) == 1)
                    if phi_m(q, m) != brute:
                        failures += 1
        return CheckResult('brute_force_counts', failures == 0, cases, failures)

    def check_threshold_split(self) -> CheckResult:
        rng = _rng(self.seed, 4)
        spec = ExplicitTable({(int(a), int(b)): _random_fraction(rng, Fraction(8), 4)
                              for a, b in rng.integers(0, 13, size=(60, 2)) if a or b})
        small, large = threshold_split(spec)
        failures = 0
        args = [q for q in orthant_vectors(2, 12)]
        for q in args:
            if eval_psi(small, q) + eval_psi(large, q) != eval_psi(spec, q):
                failures += 1
        return CheckResult('threshold_split', failures == 0, len(args), failures)

    def check_hausdorff_reduces_to_ds(self) -> CheckResult:
        specs = [(PowerLaw(1, 1), 1, 1), (PowerLaw(Fraction(1, 2), 2), 2, 1), (PowerLaw(1, 2), 1, 2)]
        failures = 0
        for spec, n, m in specs:
            if hausdorff_ds_sum(spec, n, m, m, 12).partial_sum != ds_sum(spec, m, 12, n).partial_sum:
                failures += 1
        return CheckResult('hausdorff_reduces_to_ds', failures == 0, len(specs), failures)

    def check_enumeration_oracle(self) -> CheckResult:
        rng = _rng(self.seed, 5)
        failures = cases = 0
        for n, m in ((1, 1), (1, 2), (2, 1), (2, 2)):
            for radius in (Fraction(1, 10), Fraction(1, 3), Fraction(3, 4), Fraction(3, 2), Fraction(1, 20)):
                cases += 1
                x = tuple(tuple(Fraction(int(rng.integers(0, 997)), 997) for _ in range(m)) for _ in range(n))
                spec = PowerLaw(radius, 0)
                Q = 5
                found = {(s.p, s.q) for s in enumerate_solutions(x, spec, Q, coprime=True)}
                naive = set()
                box = range(-2, n * Q + 3)
                for q in orthant_vectors(n, Q):
                    g = math.gcd(*q)
                    for p in product(box, repeat=m):
                        if residual(p, q, x) < radius and all(math.gcd(pi, g) == 1 for pi in p):
                            naive.add((p, q))
                if found != naive:
                    failures += 1
        return CheckResult('enumeration_oracle', failures == 0, cases, failures)

    def check_lifting(self) -> CheckResult:
        rng = _rng(self.seed, 6)
        failures = cases = 0
        t_max = 6
        while cases < self.grid.lifts:
            spec = RadialTable({h: _random_fraction(rng, Fraction(2), 16) for h in range(1, 25)})
            q = (int(rng.integers(1, 5)),)
            bar = catlin_bar(spec, q, t_max).value
            if bar == 0:
                continue
            cases += 1
            p = int(rng.integers(0, q[0] + 1))
            r = bar * Fraction(int(rng.integers(0, 64)), 64) * (1 if rng.integers(0, 2) else -1)
            x = ((Fraction(p) + r) / q[0],),
            lifted = lift_solution((p,), q, spec, x, t_max)
            if lifted is None or not residual(lifted[0], lifted[1], x) < eval_psi(spec, lifted[1]):
                failures += 1
        return CheckResult('lifting', failures == 0, cases, failures)

    def check_determinism(self) -> CheckResult:
        spec = PowerLaw(Fraction(1, 2), 1)
        runs = [hit_fraction(spec, 1, 1, 200, 3, self.grid.determinism_samples, self.seed, workers=w)
                for w in (1, 2, 8)]
        passed = len({r.hits for r in runs}) == 1
        return CheckResult('determinism', passed, len(runs), 0 if passed else 1)

    def results_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            'check': r.name,
            'passed': r.passed,
            'cases': r.cases,
            'failures': r.failures,
            'seconds': round(r.seconds, 3),
        } for r in self.results])

    def generate_report(self) -> str:
        """
        Generate a readable summary of the last run

        Returns:
            Formatted suite report
        """
        if not self.results:
            return "No checks have been run."

        passed = sum(1 for r in self.results if r.passed)
        report = f"""
LEMMA SUITE REPORT
==================

Checks Passed: {passed}/{len(self.results)}
Seed: {self.seed}

CHECKS:
"""
        for i, result in enumerate(self.results, 1):
            status = 'PASS' if result.passed else 'FAIL'
            report += f"{i}. [{status}] {result.name}: {result.cases} cases, {result.failures} failures\n"
            for key, value in result.metrics.items():
                report += f"   {key}: {value}\n"
            if result.detail:
                report += f"   {result.detail}\n"

        frame = self.results_frame()
        report += f"""
STATISTICS:
- Total Cases: {int(frame['cases'].sum())}
- Total Failures: {int(frame['failures'].sum())}
- Slowest Check: {frame.loc[frame['seconds'].idxmax(), 'check']}
"""
        return report
