"""
Gaussian-weighted spectral analysis against the radial Ornstein-Uhlenbeck
operator

    L = d^2/drho^2 + ((k-1)/rho - rho/2) d/drho + 1,

self-adjoint for the weight e^(-rho^2/4) rho^(k-1) on [0, inf).

The quadrature for that weight is a generalized Gauss-Laguerre rule in
s = rho^2 / 4, where the weight becomes 2^(k-1) s^(k/2-1) e^(-s) ds.
"""
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import PchipInterpolator
from scipy.linalg import eig_banded
from scipy.special import gamma

import ovals.definitions as defs
import ovals.helpers
from ovals.classes import ProfileSamples, SymmetryClass
from ovals.errors import CoverageError

logger = logging.getLogger(__name__)

Projection = namedtuple("Projection", ["a_plus", "a_zero", "a_minus", "residual"])

FunctionLike = Union[Polynomial, Callable, np.ndarray, float]


def _recur_laguerre(m: int, alpha: float) -> tuple:
    """
    Recursion coefficients of the generalized Laguerre polynomials for the
    weight s^alpha e^(-s); b[0] carries the total mass Gamma(alpha + 1).

    :param m: number of coefficients
    :param alpha: > -1
    :return: (a, b)
    """
    j = np.arange(m, dtype=float)
    a = 2.0 * j + alpha + 1.0
    b = j * (j + alpha)
    b[0] = gamma(alpha + 1.0)
    return a, b


def _gauss_nodes_weights(a: np.ndarray, b: np.ndarray) -> tuple:
    """Nodes and weights from the symmetric tridiagonal Jacobi matrix."""
    bands = np.vstack((np.sqrt(b), a))
    nodes, vectors = eig_banded(bands)
    weights = b[0] * vectors[0, :] ** 2
    return nodes, weights


@dataclass(frozen=True)
class SpectralFrame:
    """
    Quadrature for the Gaussian weight plus the normalized eigenfunctions

        psi_plus = c_plus, psi_zero = c_zero (rho^2 - 2k),
        psi_minus = c_minus (rho^4 - (8+4k) rho^2 + (8+4k) k)

    with L psi = psi, 0, -psi respectively. Immutable and shareable.
    """

    k: int
    rho: np.ndarray
    weights: np.ndarray
    c_plus: float
    c_zero: float
    c_minus: float

    @property
    def size(self) -> int:
        return self.rho.size

    @property
    def psi_plus(self) -> Polynomial:
        return Polynomial([self.c_plus])

    @property
    def psi_zero(self) -> Polynomial:
        return self.c_zero * Polynomial([-2.0 * self.k, 0.0, 1.0])

    @property
    def psi_minus(self) -> Polynomial:
        b = 8.0 + 4.0 * self.k
        return self.c_minus * Polynomial([b * self.k, 0.0, -b, 0.0, 1.0])

    def basis(self) -> tuple:
        return self.psi_plus, self.psi_zero, self.psi_minus


def build_frame(k: int, m: int = 64) -> SpectralFrame:
    """
    Build the quadrature and the basis constants for given k.

    Ex.

    k=2: <1,1> = 2 and ||rho^2 - 4||^2 = 32, so c_zero = 32^(-1/2)

    :param k: k >= 1
    :param m: quadrature size, 8 <= m <= 200
    :return:
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m < defs.MIN_QUADRATURE:
        raise ValueError(f"quadrature size must be >= {defs.MIN_QUADRATURE}, got {m}")
    if m > defs.MAX_QUADRATURE:
        raise ValueError(
            f"quadrature size {m} not supported: the recurrence breaks down above {defs.MAX_QUADRATURE}"
        )
    s_nodes, s_weights = _gauss_nodes_weights(*_recur_laguerre(m, k / 2.0 - 1.0))
    rho = 2.0 * np.sqrt(s_nodes)
    weights = 2.0 ** (k - 1) * s_weights

    def norm(poly: Polynomial) -> float:
        return math.sqrt(float(np.sum(weights * poly(rho) ** 2)))

    b = 8.0 + 4.0 * k
    c_plus = 1.0 / norm(Polynomial([1.0]))
    c_zero = 1.0 / norm(Polynomial([-2.0 * k, 0.0, 1.0]))
    c_minus = 1.0 / norm(Polynomial([b * k, 0.0, -b, 0.0, 1.0]))
    logger.debug("[SPECTRAL] frame k=%d m=%d c0=%.12g", k, m, c_zero)
    return SpectralFrame(k, rho, weights, c_plus, c_zero, c_minus)


def _apply_L_polynomial(f: Polynomial, k: int) -> Polynomial:
    d1 = f.deriv()
    d2 = f.deriv(2)
    out = d2 - Polynomial([0.0, 0.5]) * d1 + f
    if k > 1:
        coef = d1.coef
        if abs(coef[0]) > 1e-14 * max(1.0, np.max(np.abs(coef))):
            raise ValueError("polynomial path needs f'(0) = 0 when k > 1")
        if coef.size > 1:
            out = out + (k - 1) * Polynomial(coef[1:])
    return out


def _apply_L_sampled(rho: np.ndarray, values: np.ndarray, k: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    values = np.asarray(values, dtype=float)
    if rho.size < defs.MIN_SAMPLED_NODES:
        raise ValueError(f"sampled input needs at least {defs.MIN_SAMPLED_NODES} nodes")
    d1 = np.gradient(values, rho, edge_order=2)
    d2 = np.gradient(d1, rho, edge_order=2)
    drift = np.empty_like(values)
    at_axis = rho == 0.0
    drift[~at_axis] = (k - 1) * d1[~at_axis] / rho[~at_axis]
    drift[at_axis] = (k - 1) * d2[at_axis]
    return d2 + drift - 0.5 * rho * d1 + values


def apply_L(f, frame: SpectralFrame):
    """
    Apply the radial Ornstein-Uhlenbeck operator.

    Polynomials are handled exactly by coefficient algebra; samples given as
    a (rho, values) pair by finite differences, with the even-extension
    limit (k-1) f''(0) for the drift term at rho = 0.

    :param f: numpy Polynomial or (rho, values)
    :param frame:
    :return: Polynomial or array of values
    """
    if isinstance(f, Polynomial):
        return _apply_L_polynomial(f, frame.k)
    rho, values = f
    return _apply_L_sampled(rho, values, frame.k)


def _at_nodes(f: FunctionLike, frame: SpectralFrame) -> np.ndarray:
    if isinstance(f, np.ndarray):
        values = f.astype(float)
        if values.shape != frame.rho.shape:
            raise ValueError(f"array input must match the {frame.size} quadrature nodes")
    elif callable(f):
        values = np.asarray(f(frame.rho), dtype=float) * np.ones_like(frame.rho)
    else:
        values = np.full_like(frame.rho, float(f))
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite values at quadrature nodes")
    return values


def inner_H(f: FunctionLike, g: FunctionLike, frame: SpectralFrame) -> float:
    """
    Weighted inner product <f, g> for the Gaussian weight.

    :param f: Polynomial, callable, values at the nodes, or a constant
    :param g:
    :param frame:
    :return:
    """
    return float(np.sum(frame.weights * _at_nodes(f, frame) * _at_nodes(g, frame)))


def norm_H(f: FunctionLike, frame: SpectralFrame) -> float:
    return math.sqrt(inner_H(f, f, frame))


def decomposition_coefficients(frame: SpectralFrame) -> tuple:
    """
    Coefficients (x, y, z) of
    (psi_zero/c_zero)^2 = x psi_minus/c_minus + y psi_zero/c_zero + z psi_plus/c_plus,
    which are (1, 8, 8k).

    :param frame:
    :return:
    """
    square = (frame.psi_zero / frame.c_zero) ** 2
    return (
        frame.c_minus * inner_H(square, frame.psi_minus, frame),
        frame.c_zero * inner_H(square, frame.psi_zero, frame),
        frame.c_plus * inner_H(square, frame.psi_plus, frame),
    )


def neutral_mode_constant(frame: SpectralFrame, sym: SymmetryClass) -> float:
    """c = <psi_zero^2, psi_zero> / (2 sqrt(2(n-k)))."""
    psi = frame.psi_zero
    return inner_H(psi**2, psi, frame) / (2.0 * sym.cylinder_radius)


def alpha0_prediction(tau: float, sym: SymmetryClass, frame: SpectralFrame = None) -> float:
    """
    Predicted neutral-mode coefficient -1 / (c |tau|).

    Ex.

    n=3, k=2: c = 1/2, so the prediction at tau = -100 is -0.02

    :param tau: tau < 0
    :param sym:
    :param frame: reuse a frame; built for sym.k if omitted
    :return:
    """
    if not tau < 0.0:
        raise ValueError(f"prediction needs tau < 0, got {tau}")
    frame = frame or build_frame(sym.k)
    return -1.0 / (neutral_mode_constant(frame, sym) * abs(tau))


def cutoff(x: np.ndarray) -> np.ndarray:
    """Truncation profile: 1 on x <= 1, 0 on x >= 2, C^2 in between."""
    return ovals.helpers.smooth_cutoff(x)


def project_truncated(p: ProfileSamples, rho_cut: float, frame: SpectralFrame) -> Projection:
    """
    Project v_hat = (u - sqrt(2(n-k))) phi(rho / rho_cut) onto the three modes.

    :param p: samples whose graph chart covers [0, 2 rho_cut]
    :param rho_cut:
    :param frame:
    :return: Projection(a_plus, a_zero, a_minus, residual norm)
    """
    if not rho_cut > 0.0:
        raise ValueError(f"rho_cut must be positive, got {rho_cut}")
    if p.rho[-1] < 2.0 * rho_cut * (1.0 - 1e-12):
        raise CoverageError(
            f"graph chart reaches rho={p.rho[-1]:.4g}, projection needs {2.0 * rho_cut:.4g}"
        )
    rho = frame.rho
    inside = rho < 2.0 * rho_cut
    v_hat = np.zeros_like(rho)
    u_vals = PchipInterpolator(p.rho, p.u)(rho[inside])
    v_hat[inside] = (u_vals - p.sym.cylinder_radius) * cutoff(rho[inside] / rho_cut)

    coefficients = [inner_H(v_hat, psi, frame) for psi in frame.basis()]
    residual = v_hat - sum(a * psi(rho) for a, psi in zip(coefficients, frame.basis()))
    return Projection(*coefficients, residual=norm_H(residual, frame))


def rho_cut_schedule(p: ProfileSamples, theta: float = None) -> float:
    """
    rho_cut = min(sqrt|tau| / 2, largest rho with u >= theta), kept inside
    half the graph chart so the projection stays covered.

    :param p:
    :param theta: defaults to 0.3 sqrt(2(n-k))
    :return:
    """
    theta = defs.CUTOFF_THETA_FRACTION * p.sym.cylinder_radius if theta is None else theta
    if p.curve is not None:
        above = p.curve.r[p.curve.y >= theta]
    else:
        above = p.rho[p.u >= theta]
    if above.size == 0:
        raise CoverageError(f"profile never reaches u >= {theta:.4g}")
    return float(min(math.sqrt(abs(p.tau)) / 2.0, above.max(), p.rho[-1] / 2.0))


@dataclass
class ModeTrace:
    """Neutral-mode coefficients alpha0(tau) beside the prediction -1/(c|tau|)."""

    taus: np.ndarray
    alpha0: np.ndarray
    predicted: np.ndarray
    residuals: np.ndarray
    c: float
    rho_cuts: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        sizes = {len(self.taus), len(self.alpha0), len(self.predicted), len(self.residuals)}
        if len(sizes) != 1:
            raise ValueError("mode trace series lengths disagree")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c}")

    def relative_errors(self) -> np.ndarray:
        return np.abs(self.alpha0 - self.predicted) / np.abs(self.predicted)

    def columns(self) -> dict:
        return {
            "tau": self.taus,
            "alpha0": self.alpha0,
            "predicted": self.predicted,
            "residual_norm": self.residuals,
        }


def mode_trace(samples: Sequence[ProfileSamples], frame: SpectralFrame, sym: SymmetryClass) -> ModeTrace:
    """
    alpha0(tau) for every sample with tau < 0, using the rho_cut schedule.

    :param samples: renormalized samples in increasing tau
    :param frame:
    :param sym:
    :return:
    """
    c = neutral_mode_constant(frame, sym)
    rows: List[tuple] = []
    for p in samples:
        if not p.tau < 0.0:
            continue
        try:
            rho_cut = rho_cut_schedule(p)
            proj = project_truncated(p, rho_cut, frame)
        except CoverageError as err:
            logger.warning("[SPECTRAL] skipping tau=%.4g: %s", p.tau, err)
            continue
        rows.append((p.tau, proj.a_zero, -1.0 / (c * abs(p.tau)), proj.residual, rho_cut))
    if not rows:
        return ModeTrace(np.empty(0), np.empty(0), np.empty(0), np.empty(0), c)
    taus, alpha0, predicted, residuals, cuts = (np.array(col) for col in zip(*rows))
    logger.info("[SPECTRAL] traced %d samples, c=%.6g", taus.size, c)
    return ModeTrace(taus, alpha0, predicted, residuals, c, cuts)
