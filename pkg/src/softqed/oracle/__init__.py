"""Independent numeric ground truth: evaluation, identity checks, quadrature, loop currents."""
from .exact import GQ, CMat
from .evaluate import EvaluationPoint, eval_expr, random_point
from .check import Verdict, check_identity
from .quadrature import (lambda_quadrature, radial_profile, rel_error, inverse_integral,
                         inverse_square_integral, lambda_inverse_square_integral)
from .current import LoopPolygon, loop_current, regulated_pairing, current_pairing, log_slope_scan
