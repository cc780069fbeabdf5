"""Hybrid GRU next-article ranker trained online."""

from .features import FeatureSpec, Featurizer, RunningStats, day_of_week, hour_of_day
from .model import Adam, NarCore, gru_step, sampled_softmax_loss, uniform_score_loss
from .snapshot import load_snapshot, save_snapshot
from .training import NarRecommender

__all__ = [
    "FeatureSpec",
    "Featurizer",
    "RunningStats",
    "day_of_week",
    "hour_of_day",
    "Adam",
    "NarCore",
    "gru_step",
    "sampled_softmax_loss",
    "uniform_score_loss",
    "load_snapshot",
    "save_snapshot",
    "NarRecommender",
]
