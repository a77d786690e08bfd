"""Finite-time quantum Carnot engines on a harmonic oscillator.

Thin wrapper over the C++ library. Cycle results and sweep tables come back
as plain dictionaries.
"""

import json as _json

from ._qcarnot import (  # noqa: F401
    TIME_UNIT,
    ConfigError,
    CycleSpec,
    DomainError,
    Error,
    InfeasibleStroke,
    InvalidProtocol,
    NonConvergence,
    NumericalError,
    ObservableVector,
    ProtocolInversionFailure,
    TruncationError,
    __version__,
    coherence,
    constant_mu_protocol,
    ideal_carnot_work,
    preset,
    preset_names,
    sta_protocol,
    ste_protocol,
    thermal_observable_vector,
    thermal_population,
    to_atomic_time,
    to_reporting_time,
    von_neumann_entropy,
)
from . import _qcarnot


def run_cycle(spec, tol=1e-9, max_cycles=500):
    """Iterate `spec` to its limit cycle; returns the summary with a `ledger` entry."""
    return _json.loads(_qcarnot._run_cycle_json(spec, tol, max_cycles))


def sweep(spec, axis, values, jobs=1):
    """One row per value; failed points carry `error` instead of `ledger`.

    `axis` is one of cycle_time (reporting units), dephasing or compression_ratio.
    """
    return _json.loads(_qcarnot._sweep_json(spec, axis, [float(v) for v in values], jobs))
