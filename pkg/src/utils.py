"""
Shared helpers for the located/unlocated error-tradeoff toolkit.

Progress printing, the default worker count and a few constants used by
more than one module live here.
"""

import os
import sys

TOOLKIT_VERSION = '1.0.0'

THREADS_ENV_VAR = 'QECC_TRADEOFF_THREADS'

# Pauli letters in the order used by every prior/posterior vector: [I, X, Y, Z]
PAULI_LETTERS = 'IXYZ'


def report(message, verbose=True, stream=None):
    """Print a progress line unless ``verbose`` is off."""
    if not verbose:
        return
    print(message, file=stream or sys.stdout, flush=True)


def banner(title, verbose=True, width=50):
    """Print a section title followed by a rule."""
    report(title, verbose)
    report("=" * width, verbose)


def default_thread_count():
    """
    Worker count used when none is given.

    Reads ``QECC_TRADEOFF_THREADS`` and falls back to the number of CPUs.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got '{raw}'")
        if value < 1:
            raise ValueError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1
