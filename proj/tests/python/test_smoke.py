import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import qplas

SOURCE = Path(os.environ.get("QPLAS_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_version():
    assert qplas.__version__.count(".") == 2


def test_free_green_is_symmetric_and_outgoing():
    x, y = np.array([0.1, -0.2, 0.3]), np.array([1.0, 0.5, -0.4])
    g = np.asarray(qplas.g0(x, y, 1.3))
    assert g.shape == (3, 3)
    assert np.allclose(g, g.T, atol=0.0)
    assert np.allclose(np.asarray(qplas.g0(y, x, 1.3)), g.T)


def test_spectral_coincidence_limit():
    w = 0.8
    im = np.asarray(qplas.im_g0_spectral([0, 0, 1], [0, 0, 1], w))
    assert np.allclose(im, w / (6 * math.pi) * np.eye(3), rtol=1e-12, atol=1e-15)


def test_sphere_grid_size():
    g = qplas.sphere_grid([0, 0, 0], 1.0, 0.25)
    assert len(g) == 257
    assert g.voxel_volume() == pytest.approx(0.25**3)


def test_purcell_vacuum_and_drude():
    g = qplas.sphere_grid([0, 0, 0], 1.0, 0.25)
    vac = qplas.MediumSolver(g, {1: []}, 1.0)
    assert vac.purcell([0, 0, 1.6], [0, 0, 1]) == pytest.approx(1.0, abs=1e-10)
    metal = qplas.MediumSolver(g, {1: [(0.0, 2.0, 0.3)]}, 1.0)
    assert metal.purcell([0, 0, 1.6], [0, 0, 1]) > 1.0
    ident = metal.ldos_identity([0, 0, 1.6], [0, 0, 1.6])
    assert ident["relative_absorption"] < 1e-2
    assert ident["forms_difference"] < 1e-8


def test_run_validate_on_vacuum(tmp_path):
    code, report = qplas.run(SOURCE / "examples_scenes" / "vacuum.json", "validate", tmp_path)
    assert code == 0
    parsed = json.loads(report)
    assert all(c["pass"] for c in parsed["checks"])
    assert (tmp_path / "report.json").exists()


def test_bad_scene_raises_config_error():
    with pytest.raises(qplas.ConfigError, match="unknown material id 7"):
        qplas.load_scene(SOURCE / "tests" / "data" / "bad_material.json")
