"""Logarithmic generative-rehearsal scheduling simulator.

Samples are allocated across capacity-2^k buckets mirroring the binary
notation of the running total, so growing by a task retrains only the buckets
at or below the most significant flipped bit and any sample is replayed at
most ceil(log2(n)) times.
"""

from ._core import (
    BucketEntry,
    BucketLayout,
    BucketTraining,
    ConfigError,
    IdRange,
    LayoutVerdict,
    MemoryModel,
    RepackPlan,
    ReplaySlice,
    bucket_size,
    builtin_scenario_names,
    ceil_log2,
    layout_of,
    load_scenario_json,
    locate_bucket,
    max_models_bound,
    occupied_buckets,
    pivot_bit,
    plan_repack,
    run_scenario,
    simulate,
    total_memory,
    validate_layout,
)

__all__ = [
    "BucketEntry",
    "BucketLayout",
    "BucketTraining",
    "ConfigError",
    "IdRange",
    "LayoutVerdict",
    "MemoryModel",
    "RepackPlan",
    "ReplaySlice",
    "bucket_size",
    "builtin_scenario_names",
    "ceil_log2",
    "layout_of",
    "load_scenario_json",
    "locate_bucket",
    "max_models_bound",
    "occupied_buckets",
    "pivot_bit",
    "plan_repack",
    "run_scenario",
    "simulate",
    "total_memory",
    "validate_layout",
]
