"""Reactive autoscaler with hysteresis."""

from spotmix.models.policy import PolicyConfig
from spotmix.models.workload import WorkloadSpec
from spotmix.pipeline.autoscaler import Autoscaler, autoscale_target, candidate_target, initial_target


class TestCandidateTarget:
    """Test N_Can = ceil(R_t / Q_Tar)."""

    def test_ceiling(self):
        """Test 5 req/s at 2 req/s per replica."""
        assert candidate_target(5.0, PolicyConfig(q_tar=2.0)) == 3

    def test_exact_division_not_rounded_up(self):
        """Test that 0.15 / 0.05 gives 3."""
        assert candidate_target(0.15, PolicyConfig(q_tar=0.05)) == 3

    def test_floor_at_min_replicas(self):
        """Test that zero load keeps min_replicas."""
        assert candidate_target(0.0, PolicyConfig(q_tar=1.0, min_replicas=2)) == 2

    def test_scale_invariance(self):
        """Test that scaling rate and Q_Tar together keeps N_Can."""
        for factor in (0.5, 3.0, 7.25):
            assert candidate_target(5.0 * factor, PolicyConfig(q_tar=2.0 * factor)) == 3


class TestAutoscaleTarget:
    """Test persistence windows."""

    def test_override_wins(self):
        """Test that a fixed N_Tar disables autoscaling."""
        cfg = PolicyConfig(n_tar_override=4)
        assert autoscale_target([100.0] * 200, cfg, 1) == 4

    def test_short_history_keeps_target(self):
        """Test that a window that has not filled changes nothing."""
        cfg = PolicyConfig(q_tar=1.0, autoscale_window=6)
        assert autoscale_target([10.0] * 5, cfg, 2) == 2

    def test_half_persistence_no_change(self):
        """Test that N_Can above N_Tar for half the window keeps N_Tar."""
        cfg = PolicyConfig(q_tar=2.0, autoscale_window=1, upscale_persistence=10, downscale_persistence=10)
        history = [6.0] * 20 + [10.0] * 5
        assert autoscale_target(history, cfg, 3) == 3

    def test_downscale_after_persistence(self):
        """Test that sustained low load lowers N_Tar."""
        cfg = PolicyConfig(q_tar=2.0, autoscale_window=2, upscale_persistence=3, downscale_persistence=3)
        assert autoscale_target([2.0] * 10, cfg, 4) == 1

    def test_step_load_transition_tick(self):
        """Test that 2 -> 10 req/s moves N_Tar 1 -> 5 exactly persistence ticks after the step."""
        cfg = PolicyConfig(q_tar=2.0, autoscale_window=2, upscale_persistence=3, downscale_persistence=3)
        step = 10
        rates = [2.0] * step + [10.0] * 20
        scaler = Autoscaler(cfg, rates, initial=1)
        targets = [scaler.target(t) for t in range(len(rates))]
        assert targets[:step + 3] == [1] * (step + 3)
        assert targets[step + 3:] == [5] * (len(rates) - step - 3)


class TestInitialTarget:
    """Test N_Tar before the window fills."""

    def test_from_poisson_rate(self):
        """Test that a Poisson workload seeds N_Tar from its rate."""
        assert initial_target(PolicyConfig(q_tar=0.05), WorkloadSpec(rate=0.15)) == 3

    def test_explicit_initial(self):
        """Test that initial_n_tar wins over the workload."""
        assert initial_target(PolicyConfig(initial_n_tar=2), WorkloadSpec(rate=10.0)) == 2
