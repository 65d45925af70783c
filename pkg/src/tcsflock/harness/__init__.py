"""Configuration, sampling, I/O, reports and the command-line interface."""
