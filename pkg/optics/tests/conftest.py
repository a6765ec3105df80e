import factory
import factory.random
import numpy as np
import pytest
from pytest_factoryboy import register

from optics.enums import MirrorPreset, NoiseKind
from optics.experiments.base import SweepConfig
from optics.experiments.scenes import sample_mirror_point, visible_pool
from optics.geometry import (
    CameraRig,
    Intrinsics,
    MirrorShape,
    canonicalize_rig,
    scene_direction_at,
)
from optics.presets import preset_rig


@pytest.fixture(autouse=True)
def reseed():
    factory.random.reseed_random("catavp")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@register
class MirrorShapeFactory(factory.Factory):
    A = 1.0
    B = 0.0
    C = 1.0

    class Meta:
        model = MirrorShape


@register
class IntrinsicsFactory(factory.Factory):
    fx = 500.0
    fy = 500.0
    cx = 320.0
    cy = 320.0

    class Meta:
        model = Intrinsics


@register
class CameraRigFactory(factory.Factory):
    shape = factory.SubFactory(MirrorShapeFactory)
    c = factory.LazyFunction(lambda: np.array([0.0, 0.2, 3.0]))
    intrinsics = factory.SubFactory(IntrinsicsFactory)

    class Meta:
        model = CameraRig


@register
class SweepConfigFactory(factory.Factory):
    preset = MirrorPreset.SPHERICAL
    noise_kind = NoiseKind.PIXEL
    levels = (0.0, 2.0, 4.0)
    trials = 4
    seed = factory.Faker("pyint", min_value=0, max_value=10000)

    class Meta:
        model = SweepConfig


@pytest.fixture
def axial_sphere_rig():
    return canonicalize_rig(MirrorShape.spherical(), [0.0, 0.0, 3.0])


@pytest.fixture
def central_rig():
    return preset_rig(MirrorPreset.CENTRAL_HYPERBOLIC)


@pytest.fixture(
    params=[
        MirrorPreset.SPHERICAL,
        MirrorPreset.HYPERBOLIC_OFFAXIS,
        MirrorPreset.ELLIPSOIDAL,
    ]
)
def noncentral_rig(request):
    return preset_rig(request.param)


@pytest.fixture(params=list(MirrorPreset))
def any_rig(request):
    return preset_rig(request.param)


@pytest.fixture
def visible_directions():
    """Reflected rays at `count` random visible mirror points of `rig`"""

    def sample(rig, rng, count):
        pool = visible_pool(rig)
        points = [sample_mirror_point(rig, pool, rng)[0] for _ in range(count)]
        return [(r, scene_direction_at(rig, r.r)) for r in points]

    return sample
