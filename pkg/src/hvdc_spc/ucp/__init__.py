"""Scenario building, solving, pricing, verification and reporting of the unit commitment."""

from .build import StructuralInfeasibilityError, UcpModel, build_ucp, segmentation, vn
from .config import MODES, MissingHyperplaneError, ScenarioConfig, ScenarioError
from .prices import MarketReport, PriceRecoveryError, perturbed_price, recover_prices
from .report import Comparison, ReportError, compare, market_table
from .solution import UcpSolution, UcpSolveError, solve_ucp
from .verify import VerificationReport, Violation, verify_solution

__all__ = [
    "MODES", "Comparison", "MarketReport", "MissingHyperplaneError", "PriceRecoveryError", "ReportError",
    "ScenarioConfig", "ScenarioError", "StructuralInfeasibilityError", "UcpModel", "UcpSolution", "UcpSolveError",
    "VerificationReport", "Violation", "build_ucp", "compare", "market_table", "perturbed_price", "recover_prices",
    "segmentation", "solve_ucp", "verify_solution", "vn",
]
