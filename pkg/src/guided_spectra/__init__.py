"""Spectra and mode localization for stratified waveguides on a rectangle."""

from .dispersion import count_below, guided_eigenvalues, nonguided_eigenvalues, spectrum, zone_of
from .errors import SpectraError
from .mass import mass_ratio, vertical_mass
from .medium import FORM_A, FORM_B, LayeredMedium, SmoothMedium, StripRegion, default_medium, linear_profile
from .modes import Eigenmode, build_guided
from .asymptotics import VerificationReport, run_law

__all__ = [
    "FORM_A", "FORM_B", "LayeredMedium", "SmoothMedium", "StripRegion", "default_medium", "linear_profile",
    "guided_eigenvalues", "nonguided_eigenvalues", "spectrum", "count_below", "zone_of",
    "Eigenmode", "build_guided", "mass_ratio", "vertical_mass", "VerificationReport", "run_law",
    "SpectraError",
]
