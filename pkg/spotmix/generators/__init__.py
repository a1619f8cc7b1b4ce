"""Input producers: capacity traces, request streams and experiment configs."""

from .trace_generator import TraceGenerator, gen_trace, load_trace, save_trace, sample_preemption_events
from .workload_generator import WorkloadGenerator, gen_workload, load_workload_trace
from .config_generator import ConfigGenerator, load_config, parse_config, dump_config

__all__ = [
    "TraceGenerator", "gen_trace", "load_trace", "save_trace", "sample_preemption_events",
    "WorkloadGenerator", "gen_workload", "load_workload_trace",
    "ConfigGenerator", "load_config", "parse_config", "dump_config",
]
