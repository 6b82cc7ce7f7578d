import asyncio
import logging
import time
from typing import Any

from towercert.errors import BudgetExceeded
from towercert.groebner import budget_scope
from towercert.tower import TowerContext, build_tower
from towercert.verifier.config import VerifierConfig
from towercert.verifier.registry import CheckSpec, selected
from towercert.verifier.report import CheckReport, SuiteReport


logger = logging.getLogger(__name__)


# --- Metrics ---
class SuiteMetrics:
    """Counts and timings for one suite run."""

    def __init__(self):
        self.status_count: dict[str, int] = {}
        self.wall_times: dict[str, float] = {}
        self.steps: dict[str, int] = {}

    def record_result(self, check_id: str, status: str, wall_time_ms: float):
        self.status_count[status] = self.status_count.get(status, 0) + 1
        self.wall_times[check_id] = wall_time_ms

    def record_steps(self, check_id: str, steps: int):
        self.steps[check_id] = steps

    def get_stats(self) -> dict[str, Any]:
        return {
            "total_wall_time_ms": round(sum(self.wall_times.values()), 3),
            "slowest": max(self.wall_times, key=self.wall_times.get) if self.wall_times else None,
            "total_steps": sum(self.steps.values()),
            "steps_by_check": dict(sorted(self.steps.items())),
        }


# --- Running checks ---
def run_check(spec: CheckSpec, ctx: TowerContext, config: VerifierConfig, metrics: SuiteMetrics | None = None) -> CheckReport:
    """Run one check under its own step budget. Never raises."""
    logger.info(f"Running {spec.id}: {spec.title}")
    start = time.perf_counter()
    steps = 0
    try:
        with budget_scope(config.budget) as budget:
            try:
                result = spec.runner(ctx, config)
            finally:
                steps = budget.spent
    except BudgetExceeded as e:
        logger.warning(f"{spec.id} ran out of budget: {e}")
        result = {"status": "budget", "witness": str(e), "details": {}, "timings": {}}
    except Exception as e:
        logger.error(f"{spec.id} raised {type(e).__name__}", exc_info=True)
        result = {"status": "fail", "witness": f"{type(e).__name__}: {e}", "details": {}, "timings": {}}
    elapsed = (time.perf_counter() - start) * 1000

    report = CheckReport(
        id=spec.id,
        title=spec.title,
        anchor=spec.anchor,
        status=result["status"],
        wall_time_ms=round(elapsed, 3),
        witness=result.get("witness"),
        details=result.get("details", {}),
        timings=result.get("timings", {}),
    )
    if report.status == "fail":
        logger.warning(f"{spec.id} failed: {report.witness}")
    else:
        logger.info(f"{spec.id} {report.status} in {elapsed:.0f} ms")
    if metrics is not None:
        metrics.record_result(spec.id, report.status, report.wall_time_ms)
        metrics.record_steps(spec.id, steps)
    return report


async def run_checks_async(ctx: TowerContext, config: VerifierConfig, specs: list[CheckSpec], metrics: SuiteMetrics) -> list[CheckReport]:
    """Run checks in a thread pool of ``config.workers``; results come back in registry order."""
    semaphore = asyncio.Semaphore(config.workers)

    async def bounded(spec: CheckSpec) -> CheckReport:
        async with semaphore:
            return await asyncio.to_thread(run_check, spec, ctx, config, metrics)

    return list(await asyncio.gather(*(bounded(s) for s in specs)))


def run_suite(config: VerifierConfig) -> SuiteReport:
    """Build the tower for ``config`` and run every selected check.

    Returns:
        SuiteReport with one CheckReport per selected check, in registry order.
    """
    spec = config.field_spec()
    ctx = build_tower(spec, config.n, config.breaks)
    specs = selected(config.checks)
    metrics = SuiteMetrics()
    logger.info(f"Running {len(specs)} checks at level {config.n} with {config.workers} workers")

    reports = asyncio.run(run_checks_async(ctx, config, specs, metrics))

    counts = {status: sum(1 for r in reports if r.status == status) for status in ("pass", "fail", "skipped", "budget")}
    stats = metrics.get_stats()
    logger.info(f"Suite finished: {counts}, {stats['total_wall_time_ms']:.0f} ms, {stats['total_steps']} reduction steps")
    return SuiteReport(
        config=config.echo(),
        summary={"counts": counts, "all_passed": counts["fail"] == 0 and counts["budget"] == 0, "metrics": stats},
        checks=reports,
    )
