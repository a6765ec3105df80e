from django.utils.translation import pgettext_lazy
from enumfields import Enum


class MirrorPreset(Enum):
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"
    HYPERBOLIC_OFFAXIS = "hyperbolic-offaxis"
    ELLIPSOIDAL = "ellipsoidal"
    CENTRAL_HYPERBOLIC = "central-hyperbolic"
    NEAR_CENTRAL_HYPERBOLIC = "near-central-hyperbolic"

    class Labels:
        SPHERICAL = pgettext_lazy("MirrorPreset", "Spherical")
        HYPERBOLIC = pgettext_lazy("MirrorPreset", "Hyperbolic")
        HYPERBOLIC_OFFAXIS = pgettext_lazy("MirrorPreset", "Hyperbolic, off-axis")
        ELLIPSOIDAL = pgettext_lazy("MirrorPreset", "Ellipsoidal")
        CENTRAL_HYPERBOLIC = pgettext_lazy("MirrorPreset", "Central hyperbolic")
        NEAR_CENTRAL_HYPERBOLIC = pgettext_lazy(
            "MirrorPreset", "Near-central hyperbolic"
        )

    @classmethod
    def sweep_presets(cls):
        return [
            cls.SPHERICAL,
            cls.HYPERBOLIC_OFFAXIS,
            cls.ELLIPSOIDAL,
            cls.CENTRAL_HYPERBOLIC,
        ]


class NoiseKind(Enum):
    ANGLE = "angle"
    PIXEL = "pixel"

    class Labels:
        ANGLE = pgettext_lazy("NoiseKind", "Direction angle (degrees)")
        PIXEL = pgettext_lazy("NoiseKind", "Image point (pixels)")


class ExperimentKind(Enum):
    VP_FROM_DIRECTION = "vp-from-dir"
    DIRECTION_FROM_VP = "dir-from-vp"
    ABSOLUTE_ROTATION = "abs-rotation"
    ABSOLUTE_TRANSLATION = "abs-translation"
    RELATIVE_ROTATION = "relative-rotation"

    class Labels:
        VP_FROM_DIRECTION = pgettext_lazy(
            "ExperimentKind", "Vanishing points from direction"
        )
        DIRECTION_FROM_VP = pgettext_lazy(
            "ExperimentKind", "Direction from vanishing point"
        )
        ABSOLUTE_ROTATION = pgettext_lazy("ExperimentKind", "Absolute rotation")
        ABSOLUTE_TRANSLATION = pgettext_lazy("ExperimentKind", "Absolute translation")
        RELATIVE_ROTATION = pgettext_lazy("ExperimentKind", "Relative rotation")


class MirrorConfiguration(Enum):
    GENERAL = "general"
    GENERAL_AXIAL = "general_axial"
    SPHERICAL_AXIAL = "spherical_axial"
    ELLIPSOID_AXIAL = "ellipsoid_axial"
    CONICAL_AXIAL = "conical_axial"
    CYLINDRICAL_AXIAL = "cylindrical_axial"
    CENTRAL_HYPERBOLIC = "central_hyperbolic"
    CENTRAL_ELLIPSOIDAL = "central_ellipsoidal"

    class Labels:
        GENERAL = pgettext_lazy("MirrorConfiguration", "General")
        GENERAL_AXIAL = pgettext_lazy("MirrorConfiguration", "General axial")
        SPHERICAL_AXIAL = pgettext_lazy("MirrorConfiguration", "Spherical axial")
        ELLIPSOID_AXIAL = pgettext_lazy("MirrorConfiguration", "Ellipsoid axial")
        CONICAL_AXIAL = pgettext_lazy("MirrorConfiguration", "Conical axial")
        CYLINDRICAL_AXIAL = pgettext_lazy("MirrorConfiguration", "Cylindrical axial")
        CENTRAL_HYPERBOLIC = pgettext_lazy(
            "MirrorConfiguration", "Central with hyperboloidal mirror"
        )
        CENTRAL_ELLIPSOIDAL = pgettext_lazy(
            "MirrorConfiguration", "Central with ellipsoidal mirror"
        )

    @classmethod
    def central_configurations(cls):
        return [cls.CENTRAL_HYPERBOLIC, cls.CENTRAL_ELLIPSOIDAL]
