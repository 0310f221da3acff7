"""Driver drowsiness detection toolkit: windowed vehicle-signal features,
EEG/event labels, feature selection, small classifiers and leakage-aware
evaluation pipelines."""

__version__ = "0.1.0"
