"""Experiment templates, parsing and loading."""

import json
from pathlib import Path

import pytest

from spotmix.errors import ConfigError
from spotmix.generators.config_generator import dump_config, load_config, parse_config
from spotmix.models.experiment import ClusterConfig
from spotmix.models.policy import PolicyName
from spotmix.pipeline.simulator import resolve_trace, run_simulation


class TestConfigGenerator:
    """Test template-based config creation."""

    def test_templates(self, config_generator):
        """Test that every shipped template parses."""
        names = config_generator.list_templates()
        assert {"baseline", "availability_study", "always_available", "on_demand_only", "sensitivity"} <= set(names)
        for name in names:
            assert config_generator.generate_custom_config(name).name == name

    def test_unknown_template(self, config_generator):
        """Test that an unknown template is a config error."""
        with pytest.raises(ConfigError, match="nope"):
            config_generator.generate_custom_config("nope")

    def test_nested_customizations_merge(self, config_generator):
        """Test that overrides replace single keys of a section."""
        config = config_generator.generate_custom_config("baseline", {"policy": {"n_extra": 3}})
        assert config.policy.n_extra == 3
        assert config.policy.q_tar == 0.05
        assert config.policy.name == PolicyName.SPOTHEDGE

    def test_added_template(self, config_generator):
        """Test registering a new template."""
        config_generator.add_template("mine", {"name": "mine", "trace": {"path": "trace.json"}})
        assert config_generator.generate_custom_config("mine").trace.path.name == "trace.json"

    def test_create_config_template(self, config_generator, tmp_path):
        """Test that a written template loads back unchanged."""
        path = config_generator.create_config_template("sensitivity", tmp_path)
        assert path == tmp_path / "sensitivity.json"
        loaded = load_config(path)
        assert loaded.model_dump() == config_generator.generate_custom_config("sensitivity").model_dump()

    def test_sensitivity_template_preempts(self, config_generator):
        """Test that the sensitivity study sees a region outage and spot preemptions."""
        config = config_generator.generate_custom_config("sensitivity", {"metrics": {"simulate_requests": False}})
        trace = resolve_trace(config)
        assert trace.capacity_at("aws:us-east-1a", 230) == 0
        assert trace.capacity_at("aws:us-east-1b", 230) == 0
        assert run_simulation(config, trace).report.preemptions > 0


class TestParseConfig:
    """Test validation of raw config documents."""

    def test_dump_round_trip(self, config_generator):
        """Test that the resolved dump parses back to the same config."""
        config = config_generator.generate_custom_config("availability_study")
        again = parse_config(json.loads(dump_config(config)))
        assert again.model_dump() == config.model_dump()

    def test_error_names_key_path(self, config_generator):
        """Test that a bad value is reported with its dotted key."""
        data = json.loads(dump_config(config_generator.generate_custom_config("baseline")))
        data["policy"]["n_extra"] = -1
        with pytest.raises(ConfigError, match=r"policy\.n_extra"):
            parse_config(data)

    def test_trace_needs_exactly_one_source(self):
        """Test that trace.path and trace.generator exclude each other."""
        with pytest.raises(ConfigError):
            parse_config({"trace": {}})

    def test_unknown_policy(self):
        """Test that a policy outside the known set is rejected."""
        with pytest.raises(ConfigError, match="policy"):
            parse_config({"trace": {"path": "t.json"}, "policy": {"name": "cheapest"}})

    def test_cold_start_ticks(self):
        """Test that the cold start rounds up to whole ticks."""
        assert ClusterConfig(cold_start_s=180).cold_start_ticks(10) == 18
        assert ClusterConfig(cold_start_s=185).cold_start_ticks(10) == 19
        assert ClusterConfig(cold_start_s=0).cold_start_ticks(10) == 0


class TestLoadConfig:
    """Test reading config files."""

    def test_relative_paths_resolve_against_file(self, experiments_dir):
        """Test that trace and workload paths are relative to the config file."""
        config = load_config(experiments_dir / "configs" / "replay.json")
        assert config.trace.path.resolve() == (experiments_dir / "traces" / "three_zone_shift.json").resolve()
        assert config.workload.trace_path.resolve() == (experiments_dir / "workloads" / "sample.jsonl").resolve()

    def test_relative_config_path_gives_absolute_paths(self, experiments_dir, monkeypatch):
        """Test that resolved paths do not depend on the working directory."""
        monkeypatch.chdir(experiments_dir.parent)
        config = load_config(Path("experiments") / "configs" / "replay.json")
        assert config.trace.path.is_absolute()
        assert config.trace.path == (experiments_dir / "traces" / "three_zone_shift.json").resolve()
        assert config.workload.trace_path.is_absolute()

    def test_missing_file(self, tmp_path):
        """Test that a missing file is a config error."""
        with pytest.raises(ConfigError, match="no such config file"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        """Test that malformed JSON is a config error."""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_committed_configs_load(self, experiments_dir):
        """Test every committed experiment config."""
        for name in ("baseline", "availability_study", "replay"):
            assert load_config(experiments_dir / "configs" / f"{name}.json").name == name
