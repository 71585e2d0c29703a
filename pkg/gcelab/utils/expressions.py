"""Conformal factors given on the command line: sympy expressions or sample files."""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from gcelab.exceptions import InvalidParameterError
from gcelab.services.homogenize import PeriodicFunction

logger = logging.getLogger(__name__)

VARIABLES = {"t": sympy.Symbol("t", real=True), "y": sympy.Symbol("y", real=True)}
ALLOWED_NAMES = {
    **VARIABLES,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "pi": sympy.pi,
    "E": sympy.E,
}


def parse_expression(text: str):
    """Parse a real expression in one variable (t or y) into a vectorized evaluator."""
    try:
        expression = parse_expr(
            text,
            local_dict=dict(ALLOWED_NAMES),
            global_dict={"__builtins__": {}, "Integer": sympy.Integer, "Float": sympy.Float,
                         "Rational": sympy.Rational, "Symbol": sympy.Symbol},
            transformations=standard_transformations,
        )
    except Exception as e:
        raise InvalidParameterError(f"cannot parse expression '{text}': {e}") from e
    if not isinstance(expression, sympy.Expr):
        raise InvalidParameterError(f"'{text}' is not a real expression")
    unknown = expression.free_symbols - set(VARIABLES.values())
    if unknown:
        raise InvalidParameterError(
            f"unknown symbols {sorted(str(s) for s in unknown)} in '{text}' (use t or y)"
        )
    if len(expression.free_symbols) > 1:
        raise InvalidParameterError(f"'{text}' must depend on a single variable")
    variable = next(iter(expression.free_symbols), VARIABLES["t"])
    function = sympy.lambdify(variable, expression, modules="numpy")
    logger.debug(f"parsed f({variable}) = {expression}")
    return lambda t: np.asarray(function(np.asarray(t, dtype=float)), dtype=float) * np.ones_like(t, dtype=float)


def load_samples(path: Path) -> np.ndarray:
    """Samples from a JSON list, a JSON object with "samples", or whitespace-separated text."""
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.split()
    if isinstance(data, dict):
        data = data.get("samples")
    if data is None:
        raise InvalidParameterError(f"'{path}' has no \"samples\" entry")
    try:
        samples = np.asarray(data, dtype=float).ravel()
    except (TypeError, ValueError) as e:
        raise InvalidParameterError(f"'{path}' does not hold numeric samples: {e}") from e
    if samples.size == 0:
        raise InvalidParameterError(f"'{path}' holds no samples")
    return samples


def periodic_function_from_spec(spec: str, period: float, name: Optional[str] = None) -> PeriodicFunction:
    """`spec` is either a readable sample file or an expression string."""
    path = Path(spec).expanduser()
    if path.is_file():
        return PeriodicFunction(period, samples=load_samples(path), name=name or path.name)
    return PeriodicFunction(period, evaluator=parse_expression(spec), name=name or spec)
