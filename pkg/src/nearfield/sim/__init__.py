"""Scenario configuration, trajectories, Monte-Carlo runs and figure presets."""
