"""Experiment orchestration, dataset persistence and figure tables."""
from .config import TASKS, ExperimentConfig, ReservoirSettings, default_config
from .datasets import generate_dataset, generate_records, make_record, read_jsonl, write_jsonl
from .experiments import run_snr, run_task, run_witness_resampled, strip_timing

__all__ = ["TASKS", "ExperimentConfig", "ReservoirSettings", "default_config", "generate_dataset",
           "generate_records", "make_record", "read_jsonl", "write_jsonl", "run_snr", "run_task",
           "run_witness_resampled", "strip_timing"]
