"""Spectral-graph denoising of neuromorphic (event camera) streams."""
from .events import (NOISE, REAL, UNKNOWN, Event, EventFormatError, EventStream, ScaledEvents,
                     load_events, save_events, scale_time)
from .metrics import ConfusionReport, evaluate
from .noise import NoiseSpec, add_ba_noise, add_hot_pixel_noise, add_noise
from .pipeline import DenoiseResult, PipelineConfig, denoise

__version__ = "0.1.0"
