"""Exact S-arithmetic tools for Diophantine approximation on fractal measures."""

from .errors import (
    ConfigError,
    DegeneratePairError,
    DimensionError,
    DomainError,
    EmptyBallError,
    EmptyWindowError,
    FitError,
    HypothesisError,
    InvalidPlaceError,
    NotALatticeError,
    PrecisionExhaustedError,
    RadiusError,
    SdiophError,
    SearchTooLargeError,
)
from .exactnum import padic_abs, padic_valuation
from .harness import ExperimentConfig, SurveyRow, approx_survey, bc_sum, run_campaign
from .lattice import HeightWindow, Hyperplane, check_det_lower_bound, covolume, det_exact, volume_contradiction
from .measures import DigitMeasure, ProductMeasure, cylinder_measure, decay_ratio, estimate_alpha, haar, parse_measure, sample
from .places import INFINITY, Place, PlaceSet, RationalPoint, content, snorm
from .psi import PsiFunction
from .simplex1d import check_pair, min_separation_bruteforce, separation_lower_bound

__version__ = "0.1.0"
