import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from deltaspec.model import config_from_json, delta, delta_prime

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def rule(expr: str) -> dict:
    return {"rule": {"type": "expr", "expr": expr}}


def symbolic(kind: str, support: dict, strengths: dict, potential: dict | None = None):
    doc = {"kind": kind, "support": support, "strengths": strengths}
    if potential is not None:
        doc["potential"] = potential
    return config_from_json(doc)


gaps = st.floats(min_value=0.05, max_value=5.0, allow_nan=False)
alphas = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False).filter(lambda a: abs(a) >= 1e-3)
betas = st.builds(
    lambda mag, sign: mag * sign,
    st.floats(min_value=0.05, max_value=10.0, allow_nan=False),
    st.sampled_from([-1.0, 1.0]),
)


@st.composite
def delta_configs(draw, max_points=6):
    n = draw(st.integers(1, max_points))
    d = draw(st.lists(gaps, min_size=n, max_size=n))
    return delta(list(np.cumsum(d)), draw(st.lists(alphas, min_size=n, max_size=n)))


@st.composite
def delta_prime_configs(draw, max_points=5):
    n = draw(st.integers(1, max_points))
    d = draw(st.lists(gaps, min_size=n, max_size=n))
    return delta_prime(list(np.cumsum(d)), draw(st.lists(betas, min_size=n, max_size=n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
