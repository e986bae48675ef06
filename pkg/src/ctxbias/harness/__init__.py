"""Experiment harness: configuration, corpus generation, sweep running,
and report emission behind a small CLI."""
