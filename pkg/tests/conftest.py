import math

from hypothesis import HealthCheck, settings, strategies as st

from curvedmag.geometry import SpaceModel

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CURVED = (SpaceModel.HYPERBOLIC, SpaceModel.SPHERICAL)

curved_models = st.sampled_from(CURVED)
angles = st.floats(0.0, 2.0 * math.pi, exclude_max=True)
fields = st.floats(-3.0, 3.0, allow_nan=False)


def interior_radius(model, lo=0.05):
    if model is SpaceModel.SPHERICAL:
        return st.floats(lo, math.pi - lo)
    return st.floats(lo, 3.0)


def interior_z(model):
    if model is SpaceModel.SPHERICAL:
        return st.floats(-1.3, 1.3)
    return st.floats(-2.0, 2.0)
