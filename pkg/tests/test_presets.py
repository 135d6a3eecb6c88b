"""Preset catalogue sanity: names, aliases, derived grids and configs."""

import pytest

from dispersia.presets import (
    DESK_EPSILONS,
    DESK_TAUS,
    PRESETS,
    REFERENCE_TAU,
    get_preset,
)


def test_catalogue_names():
    assert sorted(PRESETS) == [
        "kdv-a1", "kdv-a2", "kdv-a3/2",
        "schrodinger-a1", "schrodinger-a3/4", "schrodinger-a4/3",
    ]


@pytest.mark.parametrize("alias, target", [
    ("schrodinger-a0.75", "schrodinger-a3/4"),
    ("KdV-a1.5", "kdv-a3/2"),
    ("  schrodinger-a1  ", "schrodinger-a1"),
])
def test_aliases_resolve(alias, target):
    assert get_preset(alias) is PRESETS[target]


def test_unknown_preset_lists_known_names():
    with pytest.raises(KeyError, match="known presets"):
        get_preset("burgers-a1")


def test_desk_scales():
    assert DESK_EPSILONS == (2.0**-8, 2.0**-7, 2.0**-6, 2.0**-5, 2.0**-4)
    assert len(DESK_TAUS) == 7
    assert all(t1 < t2 for t1, t2 in zip(DESK_TAUS, DESK_TAUS[1:]))
    # the reference step sits an order of magnitude under the finest desk step
    assert REFERENCE_TAU <= min(DESK_TAUS) / 10


def test_model_uses_default_epsilon():
    p = get_preset("schrodinger-a1")
    m = p.model()
    assert m.kappa == 2
    assert m.epsilon == 2.0**-6
    assert p.model(0.25).epsilon == 0.25


def test_grid_resolves_small_epsilon():
    p = get_preset("schrodinger-a1")
    g = p.grid_for(2.0**-6)
    assert g.n == 2048
    assert g.h <= 2.0**-6  # mesh below epsilon, no resolution warning
    assert get_preset("kdv-a2").grid_for(0.25).n == 256


def test_solve_config_round():
    p = get_preset("kdv-a3/2")
    cfg = p.solve_config(epsilon=0.25, tau=0.1)
    assert cfg.model.kappa == 3
    assert cfg.model.coeffs == (1.0, 0.0)
    assert cfg.model.alpha == 1.5
    assert cfg.tau == 0.1
    assert cfg.z_final == 1.0
    assert cfg.step_count() == 10
