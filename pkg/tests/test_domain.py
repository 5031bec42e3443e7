import numpy as np
import pytest
from hypothesis import given, strategies as st

from heattrace.domain import (DomainError, delta, delta_bar, foot_point, make_domain, normal_extension,
                              shrunken_boundary, smoothstep)


def test_make_domain_defaults_and_validation():
    d = make_domain()
    assert d.bounds == (0.0, np.pi) and d.epsilon0 == 0.3
    with pytest.raises(DomainError):
        make_domain("disk")
    with pytest.raises(DomainError):
        make_domain("interval", (1.0, 1.0))
    with pytest.raises(DomainError):
        make_domain("interval", (0.0, 1.0), 0.6)
    with pytest.raises(DomainError):
        make_domain("rectangle", (0.0, 1.0))


def test_delta_values(dom):
    assert np.allclose(delta(dom, [0.0, 0.5, np.pi / 2, np.pi - 0.25]), [0.0, 0.5, np.pi / 2, 0.25])
    with pytest.raises(DomainError):
        delta(dom, 4.0)


def test_rectangle_delta():
    d = make_domain("rectangle", (0, 2, 0, 1), 0.2)
    assert np.allclose(delta(d, np.array([[1.0, 0.5], [0.1, 0.9]])), [0.5, 0.1])


@given(st.floats(0.0, np.pi))
def test_delta_bar_matches_distance_near_boundary_and_is_positive(x):
    d = make_domain()
    v, g, lap = delta_bar(d, x)
    dist = min(x, np.pi - x)
    if dist <= d.epsilon0:
        assert v == pytest.approx(dist, abs=1e-15)
        assert abs(g) == 1.0 and lap == 0.0
    assert v >= dist - 1e-15 or dist > d.epsilon0
    assert v <= 1.5 * d.epsilon0 + 1e-12
    if x > 0 and x < np.pi:
        assert v > 0


def test_delta_bar_derivatives_by_differencing(dom):
    x = np.linspace(0.05, np.pi - 0.05, 301)
    h = 1e-5
    v, g, lap = delta_bar(dom, x)
    vp, _, _ = delta_bar(dom, x + h)
    vm, _, _ = delta_bar(dom, x - h)
    far = np.abs(x - np.pi / 2) > 1e-3  # kink of the symmetric extension is outside the blend zones
    assert np.allclose(((vp - vm) / (2 * h))[far], g[far], atol=1e-6)
    assert np.allclose(((vp - 2 * v + vm) / h ** 2)[far], lap[far], atol=2e-3)


def test_delta_bar_plateau_is_flat(dom):
    v, g, lap = delta_bar(dom, np.pi / 2)
    assert v == pytest.approx(0.45) and g == 0.0


def test_smoothstep_endpoints():
    v, dv, d2v = smoothstep(np.array([-1.0, 0.0, 1.0, 2.0]))
    assert np.allclose(v, [1, 1, 0, 0]) and np.allclose(dv, 0) and np.allclose(d2v, 0)


@given(st.floats(0.0, 0.3), st.floats(0.01, 0.99))
def test_normal_extension_constant_along_normals(dist, t):
    d = make_domain()
    h = lambda side, tt: (1.0 if side == "left" else 2.0) * (1 + np.asarray(tt))
    assert normal_extension(d, h, dist, t) == pytest.approx(1 + t)
    assert normal_extension(d, h, np.pi - dist, t) == pytest.approx(2 * (1 + t))
    _, dx, d2x = normal_extension(d, h, dist, t, derivatives=True)
    assert dx == 0 and d2x == 0


def test_normal_extension_vanishes_in_the_middle(dom):
    assert normal_extension(dom, lambda s, t: np.ones_like(t), np.pi / 2, 0.5) == 0.0


def test_foot_point(dom):
    assert foot_point(dom, [0.1, 3.0]).tolist() == ["left", "right"]


def test_shrunken_boundary():
    d = make_domain()
    q = shrunken_boundary(d, 0.1)
    assert [n[0].coords[0] for n in q.nodes] == pytest.approx([0.1, np.pi - 0.1])
    assert q.total_weight == 2.0
    with pytest.raises(DomainError):
        shrunken_boundary(d, 0.5)
    r = make_domain("rectangle", (0, 2, 0, 1), 0.2)
    assert shrunken_boundary(r, 0.1).total_weight == pytest.approx(2 * (1.8 + 0.8))
