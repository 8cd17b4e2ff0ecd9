"""Focused-state annotation from binocular gaze disparity and EEG
differential-entropy classification pipeline."""

__version__ = "0.1.0"
