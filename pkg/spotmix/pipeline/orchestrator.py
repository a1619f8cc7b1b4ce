"""Multi-seed, multi-policy sweeps with bounded concurrency."""

import asyncio
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..errors import ConfigError
from ..models.experiment import ExperimentConfig
from ..models.policy import PolicyName
from ..models.report import SimReport, SimulationRun
from .export import write_charts, write_reports_csv, write_rows_csv, write_run
from .metrics import nearest_rank
from .simulator import run_simulation

logger = logging.getLogger(__name__)

AGGREGATED = ["availability", "cost_relative_to_od", "latency_p50", "latency_p99",
              "latency_mean", "failure_rate", "preemptions"]


def variant(config: ExperimentConfig, policy: PolicyName, seed: int) -> ExperimentConfig:
    """Copy of `config` running `policy` under `seed`."""
    cfg = config.model_copy(deep=True)
    cfg.policy.name = PolicyName(policy)
    cfg.seed = seed
    cfg.name = f"{config.name}-{cfg.policy.name.value}-{seed}"
    return cfg


def _run_one(config: ExperimentConfig) -> SimulationRun:
    return run_simulation(config)


def aggregate(reports: Sequence[SimReport]) -> List[Dict[str, object]]:
    """Per-policy mean, p10 and p90 across seeds, policies in first-seen order."""
    by_policy: Dict[str, List[SimReport]] = {}
    for report in reports:
        by_policy.setdefault(report.policy, []).append(report)
    rows = []
    for policy, group in by_policy.items():
        row: Dict[str, object] = {"policy": policy, "runs": len(group)}
        for field in AGGREGATED:
            values = [float(getattr(r, field)) for r in group]
            row[f"{field}_mean"] = sum(values) / len(values)
            row[f"{field}_p10"] = nearest_rank(values, 10)
            row[f"{field}_p90"] = nearest_rank(values, 90)
        rows.append(row)
    return rows


def aggregate_fields() -> List[str]:
    fields = ["policy", "runs"]
    for field in AGGREGATED:
        fields += [f"{field}_mean", f"{field}_p10", f"{field}_p90"]
    return fields


class SweepOrchestrator:
    """Runs the (policy, seed) product of one experiment and merges the results."""

    def __init__(self, jobs: int = 1):
        self.jobs = max(1, jobs)

    async def run_async(self, config: ExperimentConfig, policies: Sequence[PolicyName],
                        seeds: Sequence[int]) -> List[SimulationRun]:
        if not policies:
            raise ConfigError("sweep needs at least one policy")
        if not seeds:
            raise ConfigError("sweep needs at least one seed")

        variants = [variant(config, policy, seed) for policy in policies for seed in seeds]
        if self.jobs == 1:
            return [_run_one(cfg) for cfg in variants]

        semaphore = asyncio.Semaphore(self.jobs)
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:

            async def run_with_semaphore(cfg: ExperimentConfig) -> SimulationRun:
                async with semaphore:
                    run = await loop.run_in_executor(pool, _run_one, cfg)
                    logger.info("Finished %s", cfg.name)
                    return run

            # gather keeps submission order, i.e. (policy, seed) order
            results = await asyncio.gather(
                *[run_with_semaphore(cfg) for cfg in variants],
                return_exceptions=True,
            )

        for cfg, result in zip(variants, results):
            if isinstance(result, Exception):
                logger.error("Run %s failed: %s", cfg.name, result)
                raise result
        return list(results)

    def run(self, config: ExperimentConfig, policies: Sequence[PolicyName],
            seeds: Sequence[int]) -> List[SimulationRun]:
        return asyncio.run(self.run_async(config, policies, seeds))

    def run_sweep(self, config: ExperimentConfig, policies: Sequence[PolicyName], seeds: Sequence[int],
                  out_dir: Optional[Path] = None) -> List[SimulationRun]:
        """Run everything, then write per-run artifacts, results, summary and manifest."""
        runs = self.run(config, policies, seeds)
        if out_dir is not None:
            self.save(runs, config, out_dir)
        return runs

    def save(self, runs: Sequence[SimulationRun], config: ExperimentConfig, out_dir: Path):
        out_dir.mkdir(parents=True, exist_ok=True)
        reports = [run.report for run in runs]
        manifest = []
        for run in runs:
            run_dir = out_dir / "runs" / f"{run.report.policy}_{run.report.seed}"
            write_run(run, run_dir, charts=config.output.charts, event_log=config.output.event_log)
            manifest.append({
                "policy": run.report.policy,
                "seed": run.report.seed,
                "dir": str(run_dir.relative_to(out_dir)),
                "availability": run.report.availability,
                "cost_relative_to_od": run.report.cost_relative_to_od,
            })

        write_reports_csv(reports, out_dir / "results.csv")
        write_rows_csv(aggregate(reports), aggregate_fields(), out_dir / "summary.csv")
        with open(out_dir / "manifest.jsonl", "w") as f:
            for entry in manifest:
                f.write(json.dumps(entry) + "\n")
        if config.output.charts:
            write_charts(reports, out_dir, ready=False)
        logger.info("Sweep of %d runs written to %s", len(runs), out_dir)

    def get_statistics(self, manifest_path: Path) -> Dict[str, object]:
        """Run count and policy/seed coverage of a written sweep."""
        policies, seeds, total = set(), set(), 0
        with open(manifest_path, "r") as f:
            for line in f:
                entry = json.loads(line)
                policies.add(entry["policy"])
                seeds.add(entry["seed"])
                total += 1
        return {"runs": total, "policies": sorted(policies), "seeds": sorted(seeds)}
