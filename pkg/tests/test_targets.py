import math

import numpy as np
import pytest

from pac_topopt.assembly import ConfigurationError
from pac_topopt.mesh import FacetTag
from pac_topopt.targets import (PRESET_IDS, TargetProfile, TargetSpec,
                                eval_target, eval_target_nodal, preset)


def test_all_profiles_vanish_at_left_edge():
    for spec in (
        TargetSpec(TargetProfile.PARABOLIC, 0.075, (0.0, 1.0), tuple(np.eye(2).ravel())),
        TargetSpec(TargetProfile.COSINE, 0.25, (0.0, 1.0), tuple(np.eye(2).ravel()), k_tar=2.0),
        TargetSpec(TargetProfile.TWIST, 0.1, (0.0, 0.0, 1.0), tuple(np.eye(3).ravel())),
    ):
        x = np.zeros(spec.dim)
        x[1:] = 0.37
        assert np.max(np.abs(eval_target(spec, x, 6.0))) == 0.0


def test_parabolic_value():
    spec = TargetSpec(TargetProfile.PARABOLIC, 0.075, (0.0, 1.0), tuple(np.eye(2).ravel()))
    # evaluated with Table-1 row-1 constants at the strip tip
    assert eval_target(spec, (6.0, 0.0), 6.0) == pytest.approx([0.0, 2.7], rel=1e-14)


def test_cosine_value():
    spec = TargetSpec(TargetProfile.COSINE, 0.25, (0.0, 1.0), tuple(np.eye(2).ravel()),
                      k_tar=2.0)
    got = eval_target(spec, (3.0, 0.0), 6.0)
    # c (1 - cos(pi)) = 2c at the midpoint for k = 2
    assert got == pytest.approx([0.0, 0.5], rel=1e-14)


def test_twist_value():
    spec = TargetSpec(TargetProfile.TWIST, 0.1, (0.0, 0.0, 1.0), tuple(np.eye(3).ravel()))
    assert eval_target(spec, (2.0, -3.0, 0.5), 6.0) == pytest.approx(
        [0.0, 0.0, -0.6], rel=1e-14)


def test_eval_matches_independent_formulas(rng):
    specs = [
        TargetSpec(TargetProfile.PARABOLIC, 0.02, (0.0, 1.0), tuple(np.eye(2).ravel())),
        TargetSpec(TargetProfile.COSINE, 1.0, (0.0, 1.0), tuple(np.eye(2).ravel()), k_tar=1.5),
        TargetSpec(TargetProfile.TWIST, 0.1, (0.0, 0.0, 1.0), tuple(np.eye(3).ravel())),
    ]
    length = 12.0
    oracles = [
        lambda x: np.array([0.0, 0.02 * x[0] ** 2]),
        lambda x: np.array([0.0, 1.0 * (1.0 - math.cos(1.5 * math.pi * x[0] / length))]),
        lambda x: np.array([0.0, 0.0, 0.1 * x[0] * x[1]]),
    ]
    for spec, oracle in zip(specs, oracles):
        points = rng.uniform(0.0, 6.0, size=(10, spec.dim))
        nodal = eval_target_nodal(spec, points, length)
        for p, row in zip(points, nodal):
            assert np.max(np.abs(eval_target(spec, p, length) - oracle(p))) <= 1e-14
            assert np.max(np.abs(row - oracle(p))) <= 1e-14


def test_spec_validation():
    eye2 = tuple(np.eye(2).ravel())
    with pytest.raises(ConfigurationError):
        TargetSpec(TargetProfile.PARABOLIC, -1.0, (0.0, 1.0), eye2)
    with pytest.raises(ConfigurationError):
        TargetSpec(TargetProfile.COSINE, 1.0, (0.0, 1.0), eye2)  # missing k
    with pytest.raises(ConfigurationError):
        TargetSpec(TargetProfile.PARABOLIC, 1.0, (0.0, 1.0),
                   (1.0, 0.5, -0.5, 1.0))  # not symmetric
    with pytest.raises(ConfigurationError):
        TargetSpec(TargetProfile.PARABOLIC, 1.0, (0.0, 1.0),
                   (-1.0, 0.0, 0.0, -1.0))  # not PSD


def test_preset_t1r1_fields():
    cfg = preset("T1R1")
    assert cfg.extents == ((0.0, 6.0), (-0.5, 0.5))
    assert cfg.target.profile is TargetProfile.PARABOLIC
    assert cfg.target.c_tar == 0.075
    assert np.allclose(cfg.target.weight_matrix(), np.eye(2))
    assert cfg.boundary.target == frozenset(
        {FacetTag.RIGHT, FacetTag.TOP, FacetTag.BOTTOM})
    assert cfg.epsilon == pytest.approx(1.0 / (8.0 * math.pi), rel=1e-15)
    assert cfg.gamma == 0.01
    assert cfg.tractions_stage1 == {FacetTag.RIGHT: (0.1, 0.0)}
    assert cfg.body_force_stage1 == (0.0, 0.0)
    assert cfg.tractions_stage2 == {}


def test_preset_t1r4_fields():
    cfg = preset("T1R4")
    assert cfg.extents == ((0.0, 12.0), (-0.5, 0.5))
    assert cfg.target.profile is TargetProfile.COSINE
    assert cfg.target.c_tar == 1.0
    assert cfg.target.k_tar == 1.5
    assert cfg.boundary.target == frozenset({FacetTag.TOP})
    assert np.allclose(cfg.target.weight_matrix(), np.eye(2))


def test_preset_t2r4_fields():
    cfg = preset("T2R4")
    assert cfg.extents == ((0.0, 6.0), (-3.0, 3.0), (0.0, 1.0))
    assert cfg.target.profile is TargetProfile.TWIST
    assert cfg.target.c_tar == 0.1
    w = np.zeros((3, 3))
    w[2, 2] = 1.0
    assert np.allclose(cfg.target.weight_matrix(), w)
    assert cfg.boundary.target == frozenset({FacetTag.RIGHT})
    assert cfg.epsilon == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-15)
    assert cfg.gamma == 0.02


def test_all_presets_validate():
    for pid in PRESET_IDS:
        cfg = preset(pid)
        cfg.validate()
        assert 0.0 < cfg.tau < cfg.epsilon ** 2 / cfg.gamma
        # default resolution targets h ~ eps/2
        for (lo, hi), n in zip(cfg.extents, cfg.resolution):
            h = (hi - lo) / n
            assert h == pytest.approx(cfg.epsilon / 2.0, rel=0.1)


def test_preset_scale():
    base = preset("T1R1").resolution
    half = preset("T1R1", scale=0.5).resolution
    for b, h in zip(base, half):
        assert h == pytest.approx(b / 2, abs=1.0)


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        preset("T9R9")
