"""Shared fixtures and randomized scene/model generators."""

import math

import numpy as np
import pytest

from starloc import (
    CarrierConfig,
    DesignKind,
    EnergySplit,
    PathLossModel,
    Position3,
    PowerAllocation,
    ScenarioConfig,
    SceneGeometry,
    SystemModel,
    UpaConfig,
    channel_params_from_scene,
    make_design,
    spherical_from_positions,
)

_LOSS_MODELS = (
    PathLossModel.SQUARED_DISTANCE,
    PathLossModel.FREE_SPACE,
    PathLossModel.UMI,
)


def random_scene(rng: np.random.Generator) -> SceneGeometry:
    """A well-behaved random scene.

    Rejection-sampled so every link is at least 1.5 m long, no elevation
    comes near +-pi/2 (the Jacobian singularity), and azimuths stay away
    from the branch cut so finite differencing is safe.
    """
    while True:
        bs = Position3(0.0, 0.0, float(rng.uniform(5.0, 9.0)))
        ris = Position3(*(rng.uniform([1.0, 1.0, 3.0], [4.0, 4.0, 7.0])))
        ms_out = Position3(*(rng.uniform([2.0, 0.5, 0.5], [8.0, 6.0, 3.0])))
        ms_in = Position3(*(rng.uniform([0.5, 2.0, 0.5], [6.0, 8.0, 3.0])))
        scene = SceneGeometry(bs=bs, ris=ris, ms_outdoor=ms_out, ms_indoor=ms_in)
        links = [
            spherical_from_positions(bs, ris),
            spherical_from_positions(bs, ms_out),
            spherical_from_positions(ris, ms_out),
            spherical_from_positions(ris, ms_in),
        ]
        if any(link.distance < 1.5 for link in links):
            continue
        if any(abs(math.sin(link.elevation)) > 0.92 for link in links):
            continue
        if any(abs(link.azimuth) > 2.9 for link in links[1:]):
            continue
        return scene


def random_model(
    rng: np.random.Generator,
    scene: SceneGeometry | None = None,
    min_elements: int = 1,
    wavelength_range: tuple[float, float] = (0.02, 0.2),
) -> SystemModel:
    """A random small-array model exercising every loss model and design kind."""
    if scene is None:
        scene = random_scene(rng)
    bs_upa = UpaConfig(
        nx=int(rng.integers(min_elements, 4)),
        nz=int(rng.integers(min_elements, 4)),
        spacing_x=float(rng.uniform(0.3, 0.7)),
        spacing_z=float(rng.uniform(0.3, 0.7)),
    )
    ris_upa = UpaConfig(
        nx=int(rng.integers(max(min_elements, 2), 4)),
        nz=int(rng.integers(max(min_elements, 2), 4)),
        spacing_x=float(rng.uniform(0.3, 0.7)),
        spacing_z=float(rng.uniform(0.3, 0.7)),
    )
    n = ris_upa.size
    kind = (DesignKind.DFT, DesignKind.HADAMARD, DesignKind.RANDOM)[int(rng.integers(3))]
    if kind is DesignKind.HADAMARD:
        k = 1
        while k < 2 * n:
            k *= 2
    elif kind is DesignKind.DFT:
        k = 2 * n + int(rng.integers(0, 3))
    else:
        k = n + int(rng.integers(2, 6))
    profiles = make_design(kind, n, k, seed=int(rng.integers(0, 1000)))
    return SystemModel(
        scene=scene,
        bs_upa=bs_upa,
        ris_upa=ris_upa,
        carrier=CarrierConfig(float(rng.uniform(*wavelength_range))),
        loss=_LOSS_MODELS[int(rng.integers(3))],
        profiles=profiles,
        split=EnergySplit.from_refraction(float(rng.uniform(0.3, 0.9))),
        alloc=PowerAllocation.from_outdoor(float(rng.uniform(0.3, 0.9))),
        noise_variance=float(rng.uniform(0.5, 2.0)),
        k_slots=k,
    )


def reference_model(
    kind: DesignKind = DesignKind.DFT,
    eps1: float = math.sqrt(0.5),
    eta1: float = math.sqrt(0.5),
    snr_db: float = 15.0,
    seed: int | None = None,
) -> SystemModel:
    """The full-size reference scenario as a SystemModel."""
    cfg = ScenarioConfig()
    n = cfg.ris_array.nx * cfg.ris_array.nz
    return SystemModel(
        scene=cfg.scene.to_scene(),
        bs_upa=cfg.bs_array.to_upa(),
        ris_upa=cfg.ris_array.to_upa(),
        carrier=CarrierConfig(cfg.wavelength),
        loss=cfg.path_loss,
        profiles=make_design(kind, n, cfg.k_slots, seed),
        split=EnergySplit.from_refraction(eps1),
        alloc=PowerAllocation.from_outdoor(eta1, cfg.total_power),
        noise_variance=cfg.total_power / 10.0 ** (snr_db / 10.0),
        k_slots=cfg.k_slots,
    )


@pytest.fixture(scope="session")
def paper_cfg() -> ScenarioConfig:
    return ScenarioConfig()


@pytest.fixture(scope="session")
def paper_scene(paper_cfg) -> SceneGeometry:
    return paper_cfg.scene.to_scene()


@pytest.fixture(scope="session")
def paper_params(paper_scene):
    return channel_params_from_scene(paper_scene)
