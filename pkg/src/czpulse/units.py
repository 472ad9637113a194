"""Boundary unit conversions.

All internal energies, frequencies and decay rates are angular, in rad/ns,
and all times are in ns.  Configuration files, CLI flags and CSV headers use
plain GHz / MHz / ns / us; the helpers below are the single place where the
2*pi bookkeeping happens.
"""

import math

TWO_PI = 2.0 * math.pi


def ghz(value: float) -> float:
    """Plain frequency in GHz -> angular frequency in rad/ns."""
    return TWO_PI * value


def mhz(value: float) -> float:
    """Plain frequency in MHz -> angular frequency in rad/ns."""
    return TWO_PI * 1e-3 * value


def to_ghz(omega: float) -> float:
    """Angular frequency in rad/ns -> plain frequency in GHz."""
    return omega / TWO_PI


def to_mhz(omega: float) -> float:
    """Angular frequency in rad/ns -> plain frequency in MHz."""
    return 1e3 * omega / TWO_PI


def us(value: float) -> float:
    """Time in microseconds -> time in ns."""
    return 1e3 * value
