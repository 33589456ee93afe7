"""Fisher information and Cramer-Rao bounds for the stacked training signal.

All training slots are stacked into one length M*K vector. Its noiseless
mean is linear in the three link channels through fixed measurement
matrices: the direct link repeats the identity across slots, while each
surface-assisted link passes through the anchor-to-surface channel weighted
by that link's per-slot phase schedule. With circular white noise the
Fisher information of the 9 link parameters is

    J = (P / sigma^2) * Re(G^H G),

where G stacks the mean derivatives; position information follows by the
chain rule through the scene Jacobian. To keep scaling exact, the Gram
factor Re(G^H G) and the scalar P/sigma^2 are carried separately and CRLBs
invert the Gram once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import (
    DISTANCE_EXPONENT,
    CarrierConfig,
    PathLossModel,
    UpaConfig,
    bs_ris_channel,
    element_grid,
    los_channel,
)
from .errors import DimensionMismatchError, RankDeficientError, SingularFimError
from .geometry import (
    ChannelParams,
    PositionJacobian,
    SceneGeometry,
    SphericalTriple,
    channel_params_from_scene,
    spherical_from_positions,
)
from .surface import PhaseProfilePair

# Refuse to invert beyond this raw condition number.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class EnergySplit:
    """Per-element amplitude split between refraction and reflection.

    ``eps1`` scales the refracted (indoor-bound) wave, ``eps2`` the
    reflected one; energy conservation ties them by eps1^2 + eps2^2 = 1.
    """

    eps1: float
    eps2: float

    def __post_init__(self):
        for name, v in (("eps1", self.eps1), ("eps2", self.eps2)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if abs(self.eps1**2 + self.eps2**2 - 1.0) > 1e-12:
            raise ValueError("split amplitudes must satisfy eps1^2 + eps2^2 = 1")

    @classmethod
    def from_refraction(cls, eps1: float) -> "EnergySplit":
        if not 0.0 <= eps1 <= 1.0:
            raise ValueError(f"eps1 must lie in [0, 1], got {eps1}")
        return cls(eps1, math.sqrt(1.0 - eps1**2))


@dataclass(frozen=True)
class PowerAllocation:
    """Amplitude share of the total power given to each mobile.

    ``eta1`` scales the outdoor mobile's transmission, ``eta2`` the indoor
    one's, with eta1^2 + eta2^2 = 1 so the summed power stays total_power.
    """

    eta1: float
    eta2: float
    total_power: float = 1.0

    def __post_init__(self):
        for name, v in (("eta1", self.eta1), ("eta2", self.eta2)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if abs(self.eta1**2 + self.eta2**2 - 1.0) > 1e-12:
            raise ValueError("power shares must satisfy eta1^2 + eta2^2 = 1")
        if self.total_power <= 0:
            raise ValueError(f"total_power must be positive, got {self.total_power}")

    @classmethod
    def from_outdoor(cls, eta1: float, total_power: float = 1.0) -> "PowerAllocation":
        if not 0.0 <= eta1 <= 1.0:
            raise ValueError(f"eta1 must lie in [0, 1], got {eta1}")
        return cls(eta1, math.sqrt(1.0 - eta1**2), total_power)


@dataclass(frozen=True)
class SystemModel:
    """Everything needed to evaluate one scene: geometry, arrays, radio."""

    scene: SceneGeometry
    bs_upa: UpaConfig
    ris_upa: UpaConfig
    carrier: CarrierConfig
    loss: PathLossModel
    profiles: PhaseProfilePair
    split: EnergySplit
    alloc: PowerAllocation
    noise_variance: float
    k_slots: int

    def __post_init__(self):
        if self.profiles.n_elements != self.ris_upa.size:
            raise DimensionMismatchError(
                f"profiles cover {self.profiles.n_elements} elements, "
                f"surface has {self.ris_upa.size}"
            )
        if self.profiles.k_slots != self.k_slots:
            raise DimensionMismatchError(
                f"profiles span {self.profiles.k_slots} slots, model uses {self.k_slots}"
            )
        if self.noise_variance < 0:
            raise ValueError(f"noise_variance must be nonnegative, got {self.noise_variance}")

    @property
    def snr_scale(self) -> float:
        """P / sigma^2, the linear prefactor of the Fisher information."""
        if self.noise_variance <= 0:
            raise ValueError("snr_scale needs a positive noise variance")
        return self.alloc.total_power / self.noise_variance


@dataclass(frozen=True)
class MeasurementMatrices:
    """Fixed maps from link channels to the stacked slot vector (M*K rows).

    ``direct`` repeats the identity over slots (M columns); ``reflection``
    and ``refraction`` weight the anchor-to-surface columns by the matching
    phase schedule (N columns each).
    """

    direct: np.ndarray
    reflection: np.ndarray
    refraction: np.ndarray


@dataclass(frozen=True)
class MeanJacobian:
    """Noiseless stacked mean and its derivatives w.r.t. the 9 parameters."""

    g: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True)
class ChannelFisher:
    """Fisher information of the 9 link parameters.

    ``matrix`` is the full snr-scaled FIM; ``gram`` the prefactor-free
    Re(G^H G) with ``matrix = snr_scale * gram``.
    """

    matrix: np.ndarray
    gram: np.ndarray
    snr_scale: float


@dataclass(frozen=True)
class PositionFisher:
    """Fisher information of the stacked mobile coordinates (6x6)."""

    matrix: np.ndarray
    gram: np.ndarray
    snr_scale: float


@dataclass(frozen=True)
class CrlbReport:
    """Position error bounds of one evaluation point.

    ``channel_crlb`` holds the 9 per-parameter variances when the caller
    supplies them (None otherwise); ``position_crlb`` is the full 6x6 bound
    matrix; the RMSE fields are root-traces of its two 3x3 diagonal blocks.
    """

    channel_crlb: np.ndarray | None
    position_crlb: np.ndarray
    rmse_outdoor: float
    rmse_indoor: float
    condition_number: float


def measurement_matrices(model: SystemModel) -> MeasurementMatrices:
    """Assemble the three stacked measurement matrices of a model."""
    m = model.bs_upa.size
    k = model.k_slots
    anchor_link = _anchor_link(model.scene)
    h4 = bs_ris_channel(anchor_link, model.bs_upa, model.ris_upa, model.loss, model.carrier)
    direct = np.tile(np.eye(m), (k, 1))
    reflection = (model.profiles.reflection.T[:, None, :] * h4[None, :, :]).reshape(
        m * k, model.ris_upa.size
    )
    refraction = (model.profiles.refraction.T[:, None, :] * h4[None, :, :]).reshape(
        m * k, model.ris_upa.size
    )
    return MeasurementMatrices(direct=direct, reflection=reflection, refraction=refraction)


def _anchor_link(scene: SceneGeometry) -> SphericalTriple:
    return spherical_from_positions(scene.bs, scene.ris)


def link_coefficients(split: EnergySplit, alloc: PowerAllocation) -> np.ndarray:
    """Real amplitude of each parameter's link inside the stacked mean.

    Ordered like the parameter vector: the direct link carries eta1, the
    reflected link eta1*eps2, the refracted link eta2*eps1, three columns
    each.
    """
    return np.repeat(
        [alloc.eta1, alloc.eta1 * split.eps2, alloc.eta2 * split.eps1], 3
    )


def _link_channel_vectors(model: SystemModel, params: ChannelParams):
    h1 = los_channel(params.bs_outdoor, model.bs_upa, model.loss, model.carrier)
    h2 = los_channel(params.ris_outdoor, model.ris_upa, model.loss, model.carrier)
    h3 = los_channel(params.ris_indoor, model.ris_upa, model.loss, model.carrier)
    return (h1, h2, h3)


def mean_vector(model: SystemModel, params: ChannelParams | None = None) -> np.ndarray:
    """Noiseless stacked mean, excluding the sqrt(P) transmit amplitude."""
    if params is None:
        params = channel_params_from_scene(model.scene)
    mats = measurement_matrices(model)
    h1, h2, h3 = _link_channel_vectors(model, params)
    c1, c2, c3 = link_coefficients(model.split, model.alloc)[::3]
    return c1 * (mats.direct @ h1) + c2 * (mats.reflection @ h2) + c3 * (mats.refraction @ h3)


def _derivative_factors(
    link: SphericalTriple, upa: UpaConfig, loss: PathLossModel, wavelength: float
):
    """Elementwise derivative multipliers of one link channel.

    The channel entry p equals gain * exp(j * phase_p), so each derivative
    column is the channel scaled elementwise: azimuth and elevation scale by
    the per-element phase derivatives, distance by the scalar log-gain
    derivative -j*2*pi/lambda - gamma/(2 d) with gamma the path-loss
    distance exponent.
    """
    fx = 2.0 * math.pi * upa.spacing_x * element_grid(upa.nx)
    fz = 2.0 * math.pi * upa.spacing_z * element_grid(upa.nz)
    sa, ca = math.sin(link.azimuth), math.cos(link.azimuth)
    se, ce = math.sin(link.elevation), math.cos(link.elevation)
    ones_x = np.ones(upa.nx)
    ones_z = np.ones(upa.nz)
    d_azimuth = np.kron(-1j * fx * sa * se, ones_z)
    d_elevation = np.kron(1j * fx * ca * ce, ones_z) + np.kron(ones_x, -1j * fz * se)
    gamma = DISTANCE_EXPONENT[PathLossModel(loss)]
    d_distance = -2j * math.pi / wavelength - gamma / (2.0 * link.distance)
    return d_azimuth, d_elevation, d_distance


def mean_jacobian_columns(
    model: SystemModel, params: ChannelParams | None = None
) -> np.ndarray:
    """Derivatives of the stacked mean w.r.t. the 9 parameters, without the
    split/allocation amplitudes (those multiply in as per-column scalars)."""
    if params is None:
        params = channel_params_from_scene(model.scene)
    mats = measurement_matrices(model)
    channels = _link_channel_vectors(model, params)
    upas = (model.bs_upa, model.ris_upa, model.ris_upa)
    stacks = (mats.direct, mats.reflection, mats.refraction)
    cols = []
    for link, upa, stack, h in zip(params.links(), upas, stacks, channels):
        d_az, d_el, d_dist = _derivative_factors(link, upa, model.loss, model.carrier.wavelength)
        cols.append(stack @ (d_az * h))
        cols.append(stack @ (d_el * h))
        cols.append(stack @ (d_dist * h))
    return np.column_stack(cols)


def analytic_mean_jacobian(
    model: SystemModel, params: ChannelParams | None = None
) -> MeanJacobian:
    """Stacked mean and its scaled derivative matrix G (M*K x 9)."""
    if params is None:
        params = channel_params_from_scene(model.scene)
    g = mean_jacobian_columns(model, params) * link_coefficients(model.split, model.alloc)
    return MeanJacobian(g=g, mu=mean_vector(model, params))


def fisher_from_columns(g: np.ndarray, snr_scale: float) -> ChannelFisher:
    """FIM from scaled derivative columns: snr_scale * Re(G^H G)."""
    gram = (g.conj().T @ g).real
    gram = (gram + gram.T) / 2.0
    return ChannelFisher(matrix=snr_scale * gram, gram=gram, snr_scale=snr_scale)


def fim_channel(model: SystemModel, params: ChannelParams | None = None) -> ChannelFisher:
    """Fisher information of the 9 link parameters for one model."""
    g = mean_jacobian_columns(model, params) * link_coefficients(model.split, model.alloc)
    return fisher_from_columns(g, model.snr_scale)


def fim_position(fim: ChannelFisher, jac: PositionJacobian) -> PositionFisher:
    """Chain-rule transform of the channel FIM to the 6 mobile coordinates."""
    gram = jac.full @ fim.gram @ jac.full.T
    gram = (gram + gram.T) / 2.0
    return PositionFisher(matrix=fim.snr_scale * gram, gram=gram, snr_scale=fim.snr_scale)


def _inverse_and_condition(gram: np.ndarray) -> tuple[np.ndarray, float]:
    """Invert a symmetric positive-definite Gram, refusing singular input.

    The reported (and thresholded) condition number is the raw Gram's
    lambda_max/lambda_min. The inverse itself is computed after Jacobi
    scaling: mixed radian/meter parameters make the raw FIM artificially
    ill-conditioned, and normalizing by the diagonal keeps the inversion
    noise orders of magnitude below the raw-kappa bound.
    """
    diag = np.diag(gram).copy()
    if not np.all(diag > 0):
        raise SingularFimError(np.inf)
    lam_raw = np.linalg.eigvalsh(gram)
    cond = np.inf if lam_raw[0] <= 0 else float(lam_raw[-1] / lam_raw[0])
    if not cond <= CONDITION_LIMIT:
        raise SingularFimError(cond)
    scale = 1.0 / np.sqrt(diag)
    scaled = gram * np.outer(scale, scale)
    scaled = (scaled + scaled.T) / 2.0
    lam, vec = np.linalg.eigh(scaled)
    if lam[0] <= 0:
        raise SingularFimError(cond)
    inv_scaled = (vec / lam) @ vec.T
    inv = inv_scaled * np.outer(scale, scale)
    return (inv + inv.T) / 2.0, cond


def crlb_channel(fim: ChannelFisher) -> np.ndarray:
    """Per-parameter variance bounds: the diagonal of the inverse FIM."""
    inv, _ = _inverse_and_condition(fim.gram)
    return np.diag(inv) / fim.snr_scale


def crlb_position(
    pfim: PositionFisher, channel_crlb: np.ndarray | None = None
) -> CrlbReport:
    """Position bound matrix and per-mobile RMSE bounds."""
    inv, cond = _inverse_and_condition(pfim.gram)
    position_crlb = inv / pfim.snr_scale
    return CrlbReport(
        channel_crlb=None if channel_crlb is None else np.asarray(channel_crlb, dtype=float),
        position_crlb=position_crlb,
        rmse_outdoor=float(math.sqrt(np.trace(position_crlb[0:3, 0:3]))),
        rmse_indoor=float(math.sqrt(np.trace(position_crlb[3:6, 3:6]))),
        condition_number=cond,
    )


def block_inverse_via_projections(
    model: SystemModel, jac: PositionJacobian, params: ChannelParams | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Per-mobile 3x3 bound blocks without forming the joint 6x6 FIM.

    Each mobile's block of the inverse position FIM equals the inverse of
    its own information minus what leaks into the other mobile's subspace:
    with U_i stacking the real and imaginary parts of G_i J_i^T, the
    outdoor block is (P/sigma^2)^-1 (U_1^T U_1 - U_1^T P_{U_2} U_1)^-1 and
    symmetrically for the indoor one. The real/imaginary stacking matters:
    the FIM is the Gram of those realified columns, so the projection
    identity is exact there.
    """
    if params is None:
        params = channel_params_from_scene(model.scene)
    g = mean_jacobian_columns(model, params) * link_coefficients(model.split, model.alloc)
    ghat_out = g[:, 0:6] @ jac.outdoor.T
    ghat_in = g[:, 6:9] @ jac.indoor.T
    u1 = np.vstack([ghat_out.real, ghat_out.imag])
    u2 = np.vstack([ghat_in.real, ghat_in.imag])
    q1 = scipy.linalg.orth(u1)
    q2 = scipy.linalg.orth(u2)
    if q1.shape[1] < 3 or q2.shape[1] < 3:
        raise RankDeficientError("a mobile's projected information block lost rank")
    cross12 = q2.T @ u1
    cross21 = q1.T @ u2
    m1 = u1.T @ u1 - cross12.T @ cross12
    m2 = u2.T @ u2 - cross21.T @ cross21
    try:
        outdoor = np.linalg.inv(m1) / model.snr_scale
        indoor = np.linalg.inv(m2) / model.snr_scale
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError(
            "projected information block is singular after interference removal"
        ) from exc
    return (outdoor + outdoor.T) / 2.0, (indoor + indoor.T) / 2.0


def simulate_measurement(
    model: SystemModel,
    seed: int | None = None,
    params: ChannelParams | None = None,
) -> np.ndarray:
    """One noisy stacked observation sqrt(P)*mu + circular Gaussian noise."""
    mu = mean_vector(model, params)
    rng = np.random.default_rng(seed)
    parts = rng.standard_normal((2, mu.size))
    noise = math.sqrt(model.noise_variance / 2.0) * (parts[0] + 1j * parts[1])
    return math.sqrt(model.alloc.total_power) * mu + noise
