"""Reactive autoscaler with upscale and downscale hysteresis."""

import math
from typing import Optional, Sequence

import numpy as np

from ..models.policy import PolicyConfig
from ..models.workload import WorkloadKind, WorkloadSpec


def candidate_target(mean_rate: float, cfg: PolicyConfig) -> int:
    """N_Can = ceil(R_t / Q_Tar), floored at min_replicas."""
    # Rounded first so 0.15 / 0.05 lands on 3, not 4
    return max(cfg.min_replicas, int(math.ceil(round(mean_rate / cfg.q_tar, 9))))


def _candidates(history: np.ndarray, cfg: PolicyConfig, count: int) -> Optional[np.ndarray]:
    """Candidates for the last `count` decision ticks, or None if the window is short."""
    window = cfg.autoscale_window
    now = len(history)
    first = now - count + 1
    if first < window:
        return None
    sums = np.concatenate([[0.0], np.cumsum(history[first - window:now])])
    means = (sums[window:] - sums[:-window]) / window
    return np.array([candidate_target(rate, cfg) for rate in means[-count:]])


def autoscale_target(history: Sequence[float], cfg: PolicyConfig, current_n_tar: int) -> int:
    """N_Tar for the decision after `history` (per-tick request rates, oldest first).

    The target moves to the newest candidate only once every candidate of the
    last upscale (downscale) persistence ticks was strictly above (below) it.
    """
    if cfg.n_tar_override is not None:
        return cfg.n_tar_override
    rates = np.asarray(history, dtype=float)
    if len(rates) < cfg.autoscale_window:
        return current_n_tar

    up = _candidates(rates, cfg, cfg.upscale_persistence)
    if up is not None and (up > current_n_tar).all():
        return int(up[-1])
    down = _candidates(rates, cfg, cfg.downscale_persistence)
    if down is not None and (down < current_n_tar).all():
        return int(down[-1])
    return current_n_tar


def initial_target(cfg: PolicyConfig, workload: Optional[WorkloadSpec] = None) -> int:
    """N_Tar used until the averaging window has filled."""
    if cfg.n_tar_override is not None:
        return cfg.n_tar_override
    if cfg.initial_n_tar is not None:
        return cfg.initial_n_tar
    if workload is not None and workload.kind in (WorkloadKind.POISSON, WorkloadKind.BURSTY):
        return candidate_target(workload.rate, cfg)
    return max(cfg.min_replicas, 1)


class Autoscaler:
    """Tracks N_Tar across ticks from a per-tick request-rate series."""

    def __init__(self, cfg: PolicyConfig, rates: Sequence[float], initial: int):
        self.cfg = cfg
        self.rates = np.asarray(rates, dtype=float)
        self.n_tar = initial

    def target(self, t: int) -> int:
        """N_Tar at decision tick t, using rates of ticks before t."""
        self.n_tar = autoscale_target(self.rates[:t], self.cfg, self.n_tar)
        return self.n_tar
