"""Entanglement dynamics of two independent lossy qubit-cavity subsystems."""
from .integrate import BACKEND
from .model import HBAR_UEV_PS, SubsystemParams, TruncationSpec, UnitContext
from .dynamics import TimeGrid, analytic_coefficients, extract_coefficients

__version__ = "0.1.0"
