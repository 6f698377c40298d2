"""Thermometry of a mechanical oscillator probed by light.

Numerics live in the compiled ``_core`` module; ``tables`` reads the CSV
files written by the ``optotherm`` command-line tool.
"""

from ._core import (
    ContractViolation,
    DomainError,
    GmaxResult,
    PhiOptimum,
    PrecisionError,
    TruncationError,
    __version__,
    bipartite_oracle,
    cfi_homodyne,
    coherent_cutoff,
    distance_mod_pi,
    dnbar_dtemperature,
    find_gmax,
    gaussian_qfi,
    gaussian_qfi_closed_form,
    generaldyne_cfi,
    homodyne_cfi_closed_form,
    nbar_from_temperature,
    optimal_phi_lo,
    probe_state,
    qfi,
    run_cli,
    sigma_L,
    sigma_L_closed_form,
    temperature_from_nbar,
    wigner_grid,
    wigner_point,
)
from .tables import FIGURE_COLUMNS, SchemaError, Table, load, parse, require_figure
