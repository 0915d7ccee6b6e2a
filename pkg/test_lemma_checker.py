"""
Tests for the invariant suite
"""
import pytest

import lab as lab_module
from checks.lemma_checker import LemmaChecker, LemmaGrid
from config import Config, RunConfig

SMALL_GRID = LemmaGrid(
    exact_measure_d=40,
    sandwich_d=15,
    sandwich_m=2,
    direction_samples=10,
    stripe_samples=20000,
    intersection_samples=400,
    overlap_K=12,
    chung_erdos_families=20,
    dilation_pairs=20,
    separated_d=60,
    brute_force_Q=12,
    lifts=30,
    determinism_samples=32,
)


class BrokenChecker(LemmaChecker):
    def checks(self):
        return [('broken', self.check_broken), ('plain_measure', self.check_plain_measure)]

    def check_broken(self):
        raise RuntimeError("broken on purpose")


def test_small_grid_passes():
    checker = LemmaChecker(grid=SMALL_GRID, workers=2)
    results = checker.run_all()
    failed = [r.name for r in results if not r.passed]
    assert not failed
    assert checker.all_passed
    assert checker.seed == LemmaChecker.SUITE_SEED
    assert len(results) == len(checker.checks())


def test_results_frame_and_report():
    checker = LemmaChecker(grid=SMALL_GRID)
    assert checker.generate_report() == "No checks have been run."
    assert not checker.all_passed

    checker.results = [checker.check_plain_measure(), checker.check_hausdorff_reduces_to_ds()]
    frame = checker.results_frame()
    assert list(frame.columns) == ['check', 'passed', 'cases', 'failures', 'seconds']
    assert frame['passed'].all()
    report = checker.generate_report()
    assert "Checks Passed: 2/2" in report
    assert "[PASS] plain_measure" in report


def test_raising_check_counts_as_failure():
    checker = BrokenChecker()
    results = checker.run_all()
    assert not results[0].passed
    assert results[0].detail == "error: broken on purpose"
    assert results[1].passed
    assert not checker.all_passed
    assert "[FAIL] broken" in checker.generate_report()


def test_lemmas_command_reports_failed_checks(tmp_path, monkeypatch):
    monkeypatch.setattr(lab_module, 'LemmaChecker', BrokenChecker)
    lab = lab_module.DuffinSchaefferLab(str(tmp_path))
    status, report = lab.run(RunConfig(command='lemmas', seed=5))
    assert status == Config.EXIT_CHECK_FAILED
    assert report['passed'] is False
    assert report['seed'] == 5


@pytest.mark.slow
def test_default_grid_passes():
    checker = LemmaChecker()
    checker.run_all()
    assert checker.all_passed, checker.generate_report()


@pytest.mark.slow
def test_measure_sandwich_at_acceptance_size():
    result = LemmaChecker(grid=LemmaGrid(sandwich_d=200)).check_measure_sandwich()
    assert result.passed
    assert result.cases == 200 * 4 * 3


@pytest.mark.slow
def test_intersection_check_with_more_samples():
    result = LemmaChecker(seed=77, grid=LemmaGrid(intersection_samples=5000), workers=4).check_intersection_mc()
    assert result.passed, result.failures
    assert result.cases == 10
