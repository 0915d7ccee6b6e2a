"""
Duffin-Schaeffer Lab - Main orchestrator for the command-line subcommands
"""
import logging
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from checks.lemma_checker import LemmaChecker
from config import Config, RunConfig
from tools.arith import ConfigError, DomainError, vec_gcd
from tools.measures import (
    fitted_constant, find_window, measure_A, measure_intersection, overlap_ratio_scan, window_pair_sum,
    double_prime_pair_sum, window_task_bound, FINITE, INFINITE, SKIPPED,
)
from tools.montecarlo import counterexample_demo, empirical_union_measure, hit_fraction
from tools.report_store import ReportStore
from tools.series import PsiSpec, SeriesParams, capital_psi, evaluate_series, is_exact
from tools.torus_sets import ApproxMode, ApproxSet, select_separated_numerators

logger = logging.getLogger(__name__)


class DuffinSchaefferLab:
    def __init__(self, outputs_dir: str = Config.OUTPUTS_DIR):
        """
        Initialize the lab

        Args:
            outputs_dir: Directory receiving report files
        """
        self.store = ReportStore(outputs_dir, Config.FORMAT_VERSION)
        self.checker: Optional[LemmaChecker] = None

        self.commands: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
            'measure': self.measure,
            'intersect': self.intersect,
            'overlap-scan': self.overlap_scan,
            'series': self.series,
            'window': self.window,
            'mc': self.mc,
            'counterexample': self.counterexample,
            'lemmas': self.lemmas,
        }

    @staticmethod
    def _psi(config: RunConfig) -> PsiSpec:
        if config.psi is None:
            raise ConfigError(f"command {config.command!r} needs a [psi] table")
        return config.psi.to_spec()

    @staticmethod
    def _approx_set(n: int, m: int, q: Optional[List[int]], epsilon: Optional[Fraction], mode: str) -> ApproxSet:
        if q is None or epsilon is None:
            raise ConfigError("a set needs both q and epsilon")
        numerator_filter = None
        if mode == ApproxMode.FILTERED.value:
            numerator_filter = select_separated_numerators(vec_gcd(q))
        return ApproxSet(n, m, tuple(q), epsilon, ApproxMode(mode), numerator_filter)

    def _radius_provider(self, config: RunConfig) -> Callable[[int], Fraction]:
        """
        Psi(d) for the window and overlap commands

        For n = 1 this is psi(d) itself; in higher dimensions it is the truncated
        capital Psi at height H, which must come out as an exact rational.
        """
        spec = self._psi(config)
        cache: Dict[int, Fraction] = {}

        def Psi(d: int) -> Fraction:
            if d not in cache:
                value = capital_psi(spec, d, config.H, config.m, config.n, config.precision_bits)
                if not (value.exact and is_exact(value.value)):
                    raise DomainError('capital_psi', f"Psi({d}) is not rational; use a rational psi")
                cache[d] = value.value
            return cache[d]

        return Psi

    def measure(self, config: RunConfig) -> Dict[str, Any]:
        """
        Exact measure of one approximation set

        Args:
            config: Needs q and epsilon; mode picks A, A' or A''

        Returns:
            Report body with the measure and the one-dimensional reduction
        """
        s = self._approx_set(config.n, config.m, config.q, config.epsilon, config.mode)
        value = measure_A(s)
        logger.info(f"Leb(A) = {value} for q = {s.q}, eps = {s.epsilon}, mode {s.mode.value}")
        return {
            'measure': value,
            'scale': s.scale,
            'direction': list(s.direction),
            'arcs': s.one_dimensional(),
        }

    def intersect(self, config: RunConfig) -> Dict[str, Any]:
        """Exact measure of the intersection of two approximation sets"""
        first = self._approx_set(config.n, config.m, config.q, config.epsilon, config.mode)
        second = self._approx_set(config.n, config.m, config.q2, config.epsilon2 or config.epsilon, config.mode)
        value = measure_intersection(first, second)
        return {
            'measure': value,
            'measures': [measure_A(first), measure_A(second)],
            'same_direction': first.direction == second.direction,
        }

    def overlap_scan(self, config: RunConfig) -> Dict[str, Any]:
        """
        Audit the pairwise overlap bound for 1 <= k < l <= K

        Returns:
            Report body with a summary and one record per pair
        """
        reports = overlap_ratio_scan(self._radius_provider(config), config.K, config.workers)
        constant = fitted_constant(reports)
        violations = [r for r in reports if not r.skipped and r.lhs > 0 and not r.indicator]
        summary = {
            'pairs': len(reports),
            'finite': sum(1 for r in reports if r.ratio_flag == FINITE),
            'infinite': sum(1 for r in reports if r.ratio_flag == INFINITE),
            'skipped': sum(1 for r in reports if r.ratio_flag == SKIPPED),
            'indicator_violations': len(violations),
            'fitted_constant': constant,
        }
        logger.info(f"overlap scan over {len(reports)} pairs, fitted constant {constant}")
        return {'summary': summary, 'records': reports}

    def series(self, config: RunConfig) -> Dict[str, Any]:
        """
        Evaluate a series selected by name, or capital Psi with series = "capital-psi"

        Returns:
            Report body with the series report
        """
        if not config.series:
            raise ConfigError("command 'series' needs a series name")
        spec = self._psi(config)
        if config.series == 'capital-psi':
            return {'capital_psi': capital_psi(spec, config.d, config.H, config.m, config.n,
                                               config.precision_bits)}
        params = SeriesParams(n=config.n, m=config.m, Q=config.Q, H=config.H, D=config.D,
                              t_max=config.t_max, s=config.s, mode=config.phi_mode, bits=config.precision_bits)
        report = evaluate_series(config.series, spec, params)
        logger.info(f"{config.series} partial sum at Q = {config.Q}: {report.partial_sum} ({report.verdict_hint})")
        return {'series': report, 'partial_sum': report.partial_sum}

    def window(self, config: RunConfig) -> Dict[str, Any]:
        """
        Find a summation window starting at X and report its pair sums

        Returns:
            Report body with the window and, when one is found, the exact pair sums
        """
        if config.Y_max is None:
            raise ConfigError("command 'window' needs Y_max")
        Psi = self._radius_provider(config)
        result = find_window(Psi, config.m, config.X, config.Y_max)
        body: Dict[str, Any] = {'window': result}
        if result.found:
            body['pair_sum'] = window_pair_sum(Psi, result.X, result.Y, config.m)
            body['filtered_pair_sum'] = double_prime_pair_sum(Psi, result.X, result.Y, config.m)
            body['union_lower_bound'] = window_task_bound(Psi, result.X, result.Y, config.m)
        return body

    def mc(self, config: RunConfig) -> Dict[str, Any]:
        """
        Monte Carlo hit fraction or empirical union measure

        Returns:
            Report body with the MCReport
        """
        workers = config.workers
        if config.target == 'hits':
            report = hit_fraction(self._psi(config), config.n, config.m, config.Q, config.K, config.samples,
                                  config.seed, config.coprime, config.q_min, workers)
            return {'mc': report}

        if not config.sets:
            raise ConfigError("target 'union' needs at least one [[sets]] entry")
        sets = [self._approx_set(config.n, config.m, entry.q, entry.epsilon, entry.mode)
                for entry in config.sets]
        report = empirical_union_measure(sets, config.samples, config.seed, workers)
        return {'mc': report, 'measures': [measure_A(s) for s in sets]}

    def counterexample(self, config: RunConfig) -> Dict[str, Any]:
        if config.N is None or config.eta is None:
            raise ConfigError("command 'counterexample' needs N and eta")
        report = counterexample_demo(config.N, config.eta, config.samples, config.seed, config.workers)
        return {'counterexample': report}

    def lemmas(self, config: RunConfig) -> Dict[str, Any]:
        """
        Run the invariant suite

        Returns:
            Report body with per-check results and the overall verdict
        """
        self.checker = LemmaChecker(seed=config.seed, workers=config.workers)
        results = self.checker.run_all()
        return {'passed': self.checker.all_passed, 'seed': self.checker.seed, 'checks': results}

    def generate_report(self) -> str:
        """
        Text summary of the last lemma suite run

        Returns:
            Formatted report
        """
        if self.checker is None:
            return "No checks have been run."
        return self.checker.generate_report()

    def build_report(self, config: RunConfig) -> Dict[str, Any]:
        """Run one command and wrap its body with the format version and config echo"""
        try:
            command = self.commands[config.command]
        except KeyError:
            raise ConfigError(f"unknown command {config.command!r}")
        return self.store.envelope(config.command, config.echo(), command(config))

    def run(self, config: RunConfig) -> Tuple[int, Dict[str, Any]]:
        """
        Run one command and write its report

        Scan commands write JSON lines: the envelope with the summary first, then one
        record per pair.

        Args:
            config: Validated run configuration

        Returns:
            (exit status, report)
        """
        logger.info(f"=== {config.command.upper()} ===")
        report = self.build_report(config)
        name = config.out or f"{config.command}.json"

        if config.command == 'overlap-scan':
            records = report.pop('records')
            if not config.out:
                name = f"{config.command}.jsonl"
            self.store.write_lines(name, [report, *records])
            report['records'] = records
        else:
            self.store.write_report(name, report)

        if config.command == 'lemmas':
            logger.info(self.generate_report())
            if not report['passed']:
                return Config.EXIT_CHECK_FAILED, report
        return Config.EXIT_OK, report

