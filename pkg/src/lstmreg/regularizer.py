"""Closed-form perturbation-bound regularizer and relaxed objective.

The regularizer bounds how strongly input noise can perturb the model
output, using only the weight matrices.  Two Lipschitz constants enter all
formulas:

  alpha = 1/4    largest derivative of the sigmoid,
  beta  = 17/16  bound constant for differences of tanh * sigmoid
                 Hadamard products (sum of the separate maxima of the two
                 squared partial derivatives of G(a, b) = tanh(a)sigmoid(b)).

From the nine matrix norms the gate aggregates

  gamma_bar_x = alpha ||W_fx|| + beta (||W_ix|| + ||W_cix||)
  gamma_bar_h = alpha ||W_fh|| + beta (||W_ih|| + ||W_cih||)

feed the per-step perturbation gains

  rho_x = sqrt(2) (gamma_bar_x + sqrt(2)(beta gamma_bar_x ||W_oh|| + ||W_ox||)
                   / exp(1 - beta ||W_oh||))
  rho_h = sqrt(2) (gamma_bar_h + beta gamma_bar_h ||W_oh||
                   / exp(1 - beta ||W_oh||))

and, inside the feasible region rho_h^2 < 1 and beta ||W_oh|| <= 1, the
regularizer

  R = lambda_s ||W_hy||^2 rho_x^2 / (1 - rho_h^2).

The relaxed training objective adds hinge penalties that push the weights
back into the feasible region when either constraint is violated:

  L = mse + R + lambda_1 (rho_h^2 - 1)_+ + lambda_2 (beta ||W_oh|| - 1)_+
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import linalg
from .model import ModelParams, ParamGrads

ALPHA = 0.25
BETA = 17.0 / 16.0

SQRT2 = math.sqrt(2.0)

# norm field <-> parameter matrix, in the reporting order
NORM_FIELDS = (
    ("norm_ox", "W_ox"), ("norm_oh", "W_oh"),
    ("norm_fx", "W_fx"), ("norm_fh", "W_fh"),
    ("norm_ix", "W_ix"), ("norm_ih", "W_ih"),
    ("norm_cix", "W_cix"), ("norm_cih", "W_cih"),
    ("norm_hy", "W_hy"),
)


def lipschitz_constants() -> tuple[float, float]:
    """The two constants (alpha, beta) = (0.25, 1.0625), exactly."""
    return ALPHA, BETA


def lambda_s_from_sigma(sigma_eps: float) -> float:
    """Default mapping from an input-noise level to the regularization
    weight: lambda_s = sigma_eps^2."""
    return float(sigma_eps) ** 2


@dataclass
class RegConfig:
    """Regularizer settings: the three lambda weights, which matrix norm to
    use, and the power-iteration budget for the spectral norm."""

    lambda_s: float = 0.0
    lambda_1: float = 0.0
    lambda_2: float = 0.0
    norm_mode: str = "spectral"
    power_max_iters: int = linalg.POWER_MAX_ITERS
    power_tol: float = linalg.POWER_TOL

    def __post_init__(self):
        for name in ("lambda_s", "lambda_1", "lambda_2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.norm_mode not in ("spectral", "frobenius"):
            raise ValueError(f"unknown norm_mode {self.norm_mode!r}")
        if self.power_max_iters < 1:
            raise ValueError("power_max_iters must be >= 1")
        if self.power_tol <= 0:
            raise ValueError("power_tol must be positive")


@dataclass
class RegCoefficients:
    """Derived scalars of one parameter set: Lipschitz constants, the nine
    matrix norms, gate aggregates and perturbation gains."""

    alpha: float = ALPHA
    beta: float = BETA
    norm_ox: float = 0.0
    norm_oh: float = 0.0
    norm_fx: float = 0.0
    norm_fh: float = 0.0
    norm_ix: float = 0.0
    norm_ih: float = 0.0
    norm_cix: float = 0.0
    norm_cih: float = 0.0
    norm_hy: float = 0.0
    gamma_bar_x: float = 0.0
    gamma_bar_h: float = 0.0
    rho_x: float = 0.0
    rho_h: float = 0.0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _norm_and_grad(w: np.ndarray, config: RegConfig) -> tuple[float, np.ndarray]:
    if config.norm_mode == "frobenius":
        return linalg.frobenius_norm(w), linalg.frobenius_norm_grad(w)
    res = linalg.spectral_norm(w, max_iters=config.power_max_iters,
                               tol=config.power_tol)
    if res.degenerate:
        return 0.0, np.zeros_like(w)
    return res.value, np.outer(res.u, res.v)


def _matrix_norm(w: np.ndarray, config: RegConfig) -> float:
    if config.norm_mode == "frobenius":
        return linalg.frobenius_norm(w)
    return linalg.spectral_norm(w, max_iters=config.power_max_iters,
                                tol=config.power_tol).value


def gate_norms(params: ModelParams, config: RegConfig) -> RegCoefficients:
    """Compute the nine matrix norms with the configured norm."""
    coeffs = RegCoefficients()
    for norm_name, param_name in NORM_FIELDS:
        setattr(coeffs, norm_name, _matrix_norm(getattr(params, param_name), config))
    return coeffs


def gamma_bars(coeffs: RegCoefficients) -> tuple[float, float]:
    """Gate aggregates from the filled norm fields."""
    gx = coeffs.alpha * coeffs.norm_fx + coeffs.beta * (coeffs.norm_ix + coeffs.norm_cix)
    gh = coeffs.alpha * coeffs.norm_fh + coeffs.beta * (coeffs.norm_ih + coeffs.norm_cih)
    return gx, gh


def rho(coeffs: RegCoefficients) -> tuple[float, float]:
    """Perturbation gains from the filled norm and gamma_bar fields."""
    e = math.exp(1.0 - coeffs.beta * coeffs.norm_oh)
    rho_x = SQRT2 * (coeffs.gamma_bar_x
                     + SQRT2 * (coeffs.beta * coeffs.gamma_bar_x * coeffs.norm_oh
                                + coeffs.norm_ox) / e)
    rho_h = SQRT2 * (coeffs.gamma_bar_h
                     + coeffs.beta * coeffs.gamma_bar_h * coeffs.norm_oh / e)
    return rho_x, rho_h


def full_coefficients(params: ModelParams, config: RegConfig) -> RegCoefficients:
    """Norms, gamma_bars and rho in one pass."""
    coeffs = gate_norms(params, config)
    coeffs.gamma_bar_x, coeffs.gamma_bar_h = gamma_bars(coeffs)
    coeffs.rho_x, coeffs.rho_h = rho(coeffs)
    return coeffs


def reg_from_coefficients(coeffs: RegCoefficients, lambda_s: float) -> float | None:
    """R from already-computed coefficients; None outside the feasible
    region rho_h^2 < 1 (where the closed form is undefined)."""
    rho_h_sq = coeffs.rho_h ** 2
    if rho_h_sq >= 1.0:
        return None
    return lambda_s * coeffs.norm_hy ** 2 * coeffs.rho_x ** 2 / (1.0 - rho_h_sq)


def regularizer(params: ModelParams, config: RegConfig) -> float | None:
    """The perturbation-bound regularizer R, or None when rho_h^2 >= 1."""
    return reg_from_coefficients(full_coefficients(params, config), config.lambda_s)


def hinge(u: float) -> float:
    """(u)_+ = max(0, u)."""
    return max(0.0, float(u))


def hinge_subgrad(u: float) -> float:
    """Subgradient of the hinge: 1 past the kink, 0 at and below it."""
    return 1.0 if u > 0.0 else 0.0


def objective(params: ModelParams, batch_mse: float,
              config: RegConfig) -> tuple[float, dict]:
    """Relaxed objective L = mse + reg + pen1 + pen2 and its parts.

    Outside the feasible region the reg part is replaced by 0; only the
    lambda_1 hinge pushes the weights back.
    """
    if batch_mse < 0:
        raise ValueError("batch_mse must be >= 0")
    coeffs = full_coefficients(params, config)
    return _objective_from(coeffs, batch_mse, config)


def _objective_from(coeffs: RegCoefficients, batch_mse: float,
                    config: RegConfig) -> tuple[float, dict]:
    reg = reg_from_coefficients(coeffs, config.lambda_s)
    reg_part = 0.0 if reg is None else reg
    pen1 = config.lambda_1 * hinge(coeffs.rho_h ** 2 - 1.0)
    pen2 = config.lambda_2 * hinge(coeffs.beta * coeffs.norm_oh - 1.0)
    parts = {"mse": float(batch_mse), "reg": reg_part, "pen1": pen1, "pen2": pen2}
    total = parts["mse"] + parts["reg"] + parts["pen1"] + parts["pen2"]
    return total, parts


def objective_grad(params: ModelParams, mse_grads: ParamGrads,
                   config: RegConfig) -> ParamGrads:
    """mse_grads plus the gradient of reg + penalties.

    Chains through the matrix-norm gradients, the affine gamma_bar maps,
    the rho formulas and the quotient rho_x^2 / (1 - rho_h^2).  Hinge
    subgradients are 0 at the kink; outside the feasible region only the
    penalty terms contribute.
    """
    if config.lambda_s == 0.0 and config.lambda_1 == 0.0 and config.lambda_2 == 0.0:
        return mse_grads.copy()

    norms: dict[str, float] = {}
    norm_grads: dict[str, np.ndarray] = {}
    for norm_name, param_name in NORM_FIELDS:
        value, grad = _norm_and_grad(getattr(params, param_name), config)
        norms[norm_name] = value
        norm_grads[norm_name] = grad

    coeffs = RegCoefficients(**norms)
    coeffs.gamma_bar_x, coeffs.gamma_bar_h = gamma_bars(coeffs)
    coeffs.rho_x, coeffs.rho_h = rho(coeffs)

    alpha, beta = coeffs.alpha, coeffs.beta
    n_oh, n_ox, n_hy = coeffs.norm_oh, coeffs.norm_ox, coeffs.norm_hy
    gx, gh = coeffs.gamma_bar_x, coeffs.gamma_bar_h
    rho_x, rho_h = coeffs.rho_x, coeffs.rho_h
    rho_h_sq = rho_h ** 2
    e = math.exp(1.0 - beta * n_oh)

    feasible = rho_h_sq < 1.0
    if feasible and config.lambda_s > 0.0:
        denom = 1.0 - rho_h_sq
        d_reg_d_rho_x = config.lambda_s * n_hy ** 2 * 2.0 * rho_x / denom
        d_reg_d_rho_h = config.lambda_s * n_hy ** 2 * rho_x ** 2 \
            * 2.0 * rho_h / denom ** 2
        d_reg_d_n_hy = config.lambda_s * 2.0 * n_hy * rho_x ** 2 / denom
    else:
        d_reg_d_rho_x = d_reg_d_rho_h = d_reg_d_n_hy = 0.0

    d_pen1_d_rho_h = config.lambda_1 * hinge_subgrad(rho_h_sq - 1.0) * 2.0 * rho_h
    d_pen2_d_n_oh = config.lambda_2 * hinge_subgrad(beta * n_oh - 1.0) * beta

    g_rho_x = d_reg_d_rho_x
    g_rho_h = d_reg_d_rho_h + d_pen1_d_rho_h

    # rho partials
    d_rho_x_d_gx = SQRT2 + 2.0 * beta * n_oh / e
    d_rho_x_d_n_ox = 2.0 / e
    d_rho_x_d_n_oh = (2.0 * beta / e) * (gx + beta * gx * n_oh + n_ox)
    d_rho_h_d_gh = SQRT2 * (1.0 + beta * n_oh / e)
    d_rho_h_d_n_oh = (SQRT2 * beta * gh / e) * (1.0 + beta * n_oh)

    s_gamma_x = g_rho_x * d_rho_x_d_gx
    s_gamma_h = g_rho_h * d_rho_h_d_gh

    sensitivity = {
        "norm_fx": alpha * s_gamma_x,
        "norm_ix": beta * s_gamma_x,
        "norm_cix": beta * s_gamma_x,
        "norm_fh": alpha * s_gamma_h,
        "norm_ih": beta * s_gamma_h,
        "norm_cih": beta * s_gamma_h,
        "norm_ox": g_rho_x * d_rho_x_d_n_ox,
        "norm_oh": g_rho_x * d_rho_x_d_n_oh + g_rho_h * d_rho_h_d_n_oh
                   + d_pen2_d_n_oh,
        "norm_hy": d_reg_d_n_hy,
    }

    out = mse_grads.copy()
    for norm_name, param_name in NORM_FIELDS:
        scale = sensitivity[norm_name]
        if scale != 0.0:
            arr = getattr(out, param_name)
            arr += scale * norm_grads[norm_name]
    return out


def reg_and_penalty_value(params: ModelParams, config: RegConfig) -> float:
    """reg + pen1 + pen2 as a single scalar (the non-mse objective part)."""
    total, _ = objective(params, 0.0, config)
    return total


def inspect_report(params: ModelParams, config: RegConfig) -> dict:
    """Flat key-value report of all coefficients, R and the hinge values."""
    coeffs = full_coefficients(params, config)
    reg = reg_from_coefficients(coeffs, config.lambda_s)
    report = coeffs.as_dict()
    report["rho_h_sq"] = coeffs.rho_h ** 2
    report["beta_norm_oh"] = coeffs.beta * coeffs.norm_oh
    report["feasible"] = coeffs.rho_h ** 2 < 1.0
    report["reg"] = reg
    report["hinge_rho_h"] = hinge(coeffs.rho_h ** 2 - 1.0)
    report["hinge_beta_oh"] = hinge(coeffs.beta * coeffs.norm_oh - 1.0)
    return report


def format_report(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if value is None:
            lines.append(f"{key} = not applicable")
        else:
            lines.append(f"{key} = {value!r}")
    return "\n".join(lines)


def project_feasible(params: ModelParams, config: RegConfig,
                     rho_h_sq_max: float = 0.5,
                     beta_oh_max: float = 0.9) -> ModelParams:
    """Scale weights down until rho_h^2 <= rho_h_sq_max and
    beta ||W_oh|| <= beta_oh_max.

    W_oh is clamped first; then the three recurrent gate matrices that
    gamma_bar_h aggregates are shrunk (rho_h is 1-homogeneous in them once
    ||W_oh|| is fixed).
    """
    out = params.copy()
    n_oh = _matrix_norm(out.W_oh, config)
    if BETA * n_oh > beta_oh_max:
        out.W_oh = out.W_oh * (beta_oh_max / (BETA * n_oh)) * (1.0 - 1e-12)
    for _ in range(8):
        coeffs = full_coefficients(out, config)
        rho_h_sq = coeffs.rho_h ** 2
        if rho_h_sq <= rho_h_sq_max:
            break
        c = math.sqrt(rho_h_sq_max / rho_h_sq) * (1.0 - 1e-9)
        out.W_fh = out.W_fh * c
        out.W_ih = out.W_ih * c
        out.W_cih = out.W_cih * c
    return out
