import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from topopt.errors import ConstraintError, ParameterError, RunAborted, StructuralError
from topopt.grid_fem import ElastParams, GridMesh, LoadCase
from topopt.presets import build_preset
from topopt.simp import SimpConfig, oc_candidate, oc_update, run_simp


def _random_instance(seed, n=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 200))
    rho = rng.uniform(1e-3, 1.0, n)
    dc = -10.0 ** rng.uniform(-4, 2, n)
    cfg = SimpConfig(volfrac=float(np.clip(rho.mean() + rng.uniform(-0.1, 0.1), 0.05, 0.95)),
                     move=float(rng.uniform(0.05, 0.5)))
    # keep the target inside the reachable band
    lo = np.maximum(cfg.rho_min, rho - cfg.move).mean()
    hi = np.minimum(1.0, rho + cfg.move).mean()
    f = float(np.clip(cfg.volfrac, lo + 1e-3, hi - 1e-3))
    return rho, dc, SimpConfig(volfrac=f, move=cfg.move)


class TestOCUpdate:
    def test_uniform_fixed_point(self):
        rho = np.full(50, 0.3)
        new = oc_update(rho, np.full(50, -2.0), np.ones(50), SimpConfig(volfrac=0.3))
        np.testing.assert_allclose(new, rho, rtol=1e-6)

    def test_two_elements_against_root_find(self):
        rho = np.array([0.5, 0.5])
        dc = np.array([-4.0, -1.0])
        cfg = SimpConfig(volfrac=0.5, move=0.2, eta=0.5)

        def excess(lam):
            return np.clip(rho * np.sqrt(-dc / lam), 0.3, 0.7).sum() - 1.0

        lam = brentq(excess, 1e-3, 1e3, xtol=1e-15)
        expected = np.clip(rho * np.sqrt(-dc / lam), 0.3, 0.7)
        new = oc_update(rho, dc, np.ones(2), cfg)
        np.testing.assert_allclose(new, expected, rtol=1e-6)
        np.testing.assert_allclose(new, [2 / 3, 1 / 3], rtol=1e-6)
        assert new[0] > 0.5 > new[1]
        assert new.sum() == pytest.approx(1.0, rel=1e-6)

    def test_unreachable_target(self):
        rho = np.full(10, 0.9)
        with pytest.raises(ConstraintError):
            oc_update(rho, -np.ones(10), np.ones(10), SimpConfig(volfrac=0.2, move=0.1))

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            oc_update(np.ones(3), -np.ones(4), np.ones(3), SimpConfig(volfrac=0.5))

    def test_fixed_point_when_b_is_one(self):
        rng = np.random.default_rng(3)
        rho = rng.uniform(0.2, 0.8, 40)
        lam = 2.5
        dc = -lam * np.ones(40)  # B_i = 1 for every element at this multiplier
        new = oc_update(rho, dc, np.ones(40), SimpConfig(volfrac=float(rho.mean())))
        np.testing.assert_allclose(new, rho, rtol=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_properties(self, seed):
        rho, dc, cfg = _random_instance(seed)
        new = oc_update(rho, dc, np.ones_like(rho), cfg)
        assert abs(new.mean() - cfg.volfrac) <= 1e-6
        assert np.all(new >= np.maximum(cfg.rho_min, rho - cfg.move) - 1e-15)
        assert np.all(new <= np.minimum(1.0, rho + cfg.move) + 1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_volume_monotone_in_multiplier(self, seed):
        rho, dc, cfg = _random_instance(seed)
        lams = np.geomspace(1e-6, 1e6, 80)
        vols = [oc_candidate(rho, -dc, lam, cfg.move, cfg.eta, cfg.rho_min).sum() for lam in lams]
        assert np.all(np.diff(vols) <= 1e-12)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(volfrac=0.0), dict(volfrac=0.5, move=0.0),
                                    dict(volfrac=0.5, eta=1.5), dict(volfrac=0.5, rmin=0.0)])
    def test_rejects(self, kw):
        with pytest.raises(ParameterError):
            SimpConfig(**kw)


class TestRun:
    def test_small_run(self):
        mesh, lc = build_preset("cantilever", 24, 12)
        rho, rec = run_simp(mesh, ElastParams(nu=0.22), lc, SimpConfig(volfrac=0.4, rmin=1.5, max_iters=60))
        assert len(rec) >= 2
        assert np.all(np.abs(rec.column("volfrac") - 0.4) <= 1e-6)
        assert rec.compliance[-1] < rec.compliance[0]
        assert np.all((rho >= 1e-3) & (rho <= 1.0))
        if rec.converged:
            assert rec.rows[-1].change < 0.01

    def test_deterministic(self):
        mesh, lc = build_preset("cantilever", 16, 8)
        cfg = SimpConfig(volfrac=0.4, rmin=1.3, max_iters=25)
        r1, rec1 = run_simp(mesh, ElastParams(nu=0.22), lc, cfg)
        r2, rec2 = run_simp(mesh, ElastParams(nu=0.22), lc, cfg)
        assert rec1.rows == rec2.rows
        np.testing.assert_array_equal(r1, r2)

    def test_full_volume_stays_solid(self):
        mesh, lc = build_preset("cantilever", 12, 6)
        rho, rec = run_simp(mesh, ElastParams(), lc, SimpConfig(volfrac=1.0, max_iters=5))
        np.testing.assert_array_equal(rho, 1.0)
        assert np.all(rec.compliance == rec.compliance[0])
        assert rec.converged

    def test_penalization_reduces_gray(self):
        from topopt.diagnostics import gray_fraction

        mesh, lc = build_preset("cantilever", 32, 16)
        cfg = SimpConfig(volfrac=0.4, rmin=1.3, max_iters=80)
        rho3, _ = run_simp(mesh, ElastParams(nu=0.22, p=3.0), lc, cfg)
        rho1, _ = run_simp(mesh, ElastParams(nu=0.22, p=1.0), lc, cfg)
        assert gray_fraction(rho3) < gray_fraction(rho1)

    def test_structural_error_aborts(self):
        mesh = GridMesh(6, 3)
        lc = LoadCase([0, 1], {2 * mesh.node(6, 1) + 1: -1.0})
        with pytest.raises(RunAborted) as info:
            run_simp(mesh, ElastParams(), lc, SimpConfig(volfrac=0.5))
        assert isinstance(info.value.cause, StructuralError)
        assert len(info.value.record) == 0

    def test_abort_carries_partial_record(self, monkeypatch):
        import topopt.simp as simp

        real = simp.oc_update
        calls = []

        def flaky(*args):
            calls.append(1)
            if len(calls) == 3:
                raise ConstraintError("boom")
            return real(*args)

        monkeypatch.setattr(simp, "oc_update", flaky)
        mesh, lc = build_preset("cantilever", 8, 4)
        with pytest.raises(RunAborted) as info:
            run_simp(mesh, ElastParams(), lc, SimpConfig(volfrac=0.5))
        assert [r.iter for r in info.value.record.rows] == [1, 2]
