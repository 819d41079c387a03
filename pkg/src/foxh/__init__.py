"""Fox H-function evaluation and the space-time fractional diffusion kernel."""
from .hcore import GammaPair, HParams, derived_params, format_hparams, parse_hparams, validate
from .heval import EvalResult, Method, eval_auto, eval_contour, eval_series_left, eval_series_right
from .hrewrite import HExpr
from .kernel import KernelPoint, g_eval, g_elementary, g_heat, radial_mass
from .mittag import mainardi, ml_neg
from .positivity import SignClass, classify, full_report

__version__ = "0.1.0"

__all__ = [
    "GammaPair",
    "HParams",
    "HExpr",
    "derived_params",
    "format_hparams",
    "parse_hparams",
    "validate",
    "EvalResult",
    "Method",
    "eval_auto",
    "eval_contour",
    "eval_series_left",
    "eval_series_right",
    "KernelPoint",
    "g_eval",
    "g_elementary",
    "g_heat",
    "radial_mass",
    "mainardi",
    "ml_neg",
    "SignClass",
    "classify",
    "full_report",
]
