"""Configuration, trial orchestration, property sweeps and the CLI."""
