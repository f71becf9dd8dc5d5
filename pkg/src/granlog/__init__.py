"""Streaming anomaly classification over log-activity-rate features.

Two evolving granular classifiers (fbem and egnn) learn online from
weakly labeled feature streams; the labels come from a running control
chart over windowed log activity.
"""

from .granular import (EmptyModelError, GranularityState, Normalizer,
                       RHO_MIN, TrapezoidalSet, trap_membership)
from .fbem import FBeM, FbemGranule
from .egnn import EGNN, EgnnGranule, similarity
from .labeling import ControlChart, window_mean
from .features import (ActivityWindow, FeatureVector, extract,
                       read_dataset_csv, series_to_windows,
                       windows_to_instances, write_dataset_csv)
from .ingest import (BinSeries, Episode, LineParser, LogRecord, SynthProfile,
                     TimestampPattern, bin_records, default_profile,
                     make_pattern, synth_lines, write_synthetic_log)
from .evaluation import (EvalState, Interval, RunSummary, aggregate,
                         run_prequential)
from .checkpoint import load_model, save_model
from .pipeline import bench_runs, build_dataset, label_means, make_model

__version__ = "0.1.0"
