import math

import numpy as np
import pytest

import reference
from conftest import model_grid, model_id
from cahnfv.diagnostics import free_energy
from cahnfv.grid import Grid, PhaseField
from cahnfv.model import ConstantMobility, DegenerateMobility, DoubleWell, Logarithmic, ModelParams, WettingParams
from cahnfv.nlsolve import NonConvergence, SolverControls, oracle_root
from cahnfv.scheme1d import make_line_problem, residual, step_line
from cahnfv.scheme2d import OddEvenParallel, Sequential, line_problem, step_2d, sweep_col, sweep_row

CTRL = SolverControls()
HAND = ModelParams(DoubleWell(), ConstantMobility(1.0), 1.0)
MODELS = model_grid()
SWAP = {"left": "bottom", "bottom": "left", "right": "top", "top": "right"}


def random_field(rng, nx, ny, lx=1.0, ly=1.0, amp=0.6):
    g = Grid.rect(lx, ly, nx, ny)
    return PhaseField(g, rng.uniform(-amp, amp, (ny, nx)))


class TestSweeps:
    def test_uniform_unchanged(self):
        f = PhaseField(Grid.rect(1, 1, 5, 4), np.full((4, 5), 0.3))
        m = ModelParams(DoubleWell(), DegenerateMobility(), 0.1)
        assert np.array_equal(sweep_row(f, 2, m, CTRL, 0.1).values, f.values)
        assert np.array_equal(sweep_col(f, 5, m, CTRL, 0.1).values, f.values)
        new, rep = step_2d(f, m, CTRL, 0.1)
        assert np.array_equal(new.values, f.values)
        assert rep.sweep_energies[-1] == free_energy(f, m).total

    @pytest.mark.parametrize("model", MODELS, ids=model_id)
    def test_disjoint_and_conserving(self, model, rng):
        f = random_field(rng, 6, 5)
        for r in (1, 3, 5):
            new = sweep_row(f, r, model, CTRL, 0.05)
            mask = np.ones(f.values.shape, bool)
            mask[r - 1] = False
            assert np.array_equal(new.values[mask], f.values[mask])
            assert abs(new.values[r - 1].sum() - f.values[r - 1].sum()) <= 10 * CTRL.tol * 6
        for c in (1, 4, 6):
            new = sweep_col(f, c, model, CTRL, 0.05)
            mask = np.ones(f.values.shape, bool)
            mask[:, c - 1] = False
            assert np.array_equal(new.values[mask], f.values[mask])
            assert abs(new.values[:, c - 1].sum() - f.values[:, c - 1].sum()) <= 10 * CTRL.tol * 5

    @pytest.mark.parametrize("model", MODELS, ids=model_id)
    def test_line_residual_matches_loop_reference(self, model, rng):
        f = random_field(rng, 5, 4, 1.0, 0.8)
        g = f.grid
        for axis, k, ref in (("x", 1, reference.residual_row), ("x", 4, reference.residual_row),
                             ("y", 1, reference.residual_col), ("y", 3, reference.residual_col)):
            p = line_problem(f.values, axis, k - 1, g, model, 0.07)
            n = p.n
            cand = np.clip(p.phi_old + rng.normal(scale=0.1, size=n), -0.95, 0.95)
            ours = residual(p, cand)
            theirs = ref(f.values, k, cand, model, 0.07, g.dx, g.dy)
            assert np.max(np.abs(ours - theirs)) <= 1e-12 * max(1.0, np.max(np.abs(theirs)))

    def test_hand_sweeps_match_oracle(self):
        values = np.array([[0.3, -0.2, 0.5], [0.1, 0.6, -0.4], [-0.5, 0.2, 0.0]])
        f = PhaseField(Grid.rect(3, 3, 3, 3), values)
        new = sweep_row(f, 2, HAND, CTRL, 0.1)
        root = oracle_root(lambda x: reference.residual_row(values, 2, x, HAND, 0.1, 1.0, 1.0), values[1])
        assert np.max(np.abs(new.values[1] - root)) <= 1e-9
        new = sweep_col(f, 2, HAND, CTRL, 0.1)
        root = oracle_root(lambda x: reference.residual_col(values, 2, x, HAND, 0.1, 1.0, 1.0), values[:, 1])
        assert np.max(np.abs(new.values[:, 1] - root)) <= 1e-9

    @pytest.mark.parametrize("model", MODELS, ids=model_id)
    def test_random_sweeps_match_oracle(self, model, rng):
        values = rng.uniform(-0.7, 0.7, (3, 3))
        f = PhaseField(Grid.rect(1, 1, 3, 3), values)
        for k in (1, 2, 3):
            new = sweep_row(f, k, model, CTRL, 0.02)
            root = oracle_root(lambda x: reference.residual_row(values, k, x, model, 0.02, 1 / 3, 1 / 3), values[k - 1])
            assert np.max(np.abs(new.values[k - 1] - root)) <= 1e-9
            new = sweep_col(f, k, model, CTRL, 0.02)
            root = oracle_root(lambda x: reference.residual_col(values, k, x, model, 0.02, 1 / 3, 1 / 3), values[:, k - 1])
            assert np.max(np.abs(new.values[:, k - 1] - root)) <= 1e-9

    @pytest.mark.parametrize("walls", [(), ("bottom",), ("left", "top")])
    def test_transpose_symmetry(self, walls, rng):
        values = rng.uniform(-0.6, 0.6, (4, 6))
        f = PhaseField(Grid.rect(1.2, 0.8, 6, 4), values)
        ft = PhaseField(Grid.rect(0.8, 1.2, 4, 6), values.T.copy())
        wet = lambda ws: WettingParams(2.0, bool(ws), tuple(ws) or ("bottom",))
        m = ModelParams(DoubleWell(), DegenerateMobility(), 0.1, wet(walls))
        mt = ModelParams(DoubleWell(), DegenerateMobility(), 0.1, wet([SWAP[w] for w in walls]))
        for c in (1, 3, 6):
            a = sweep_col(f, c, m, CTRL, 0.01).values
            b = sweep_row(ft, c, mt, CTRL, 0.01).values.T
            assert np.allclose(a, b, rtol=0, atol=1e-13)

    def test_index_range(self, rng):
        f = random_field(rng, 4, 3)
        with pytest.raises(IndexError):
            sweep_row(f, 0, HAND, CTRL, 0.1)
        with pytest.raises(IndexError):
            sweep_col(f, 5, HAND, CTRL, 0.1)

    def test_failure_carries_location(self, rng):
        f = random_field(rng, 8, 8, amp=0.5)
        deep = ModelParams(Logarithmic(0.0, 1.0), ConstantMobility(), 0.1)
        with pytest.raises(NonConvergence) as exc:
            step_2d(f, deep, SolverControls(max_outer=10, continuation_levels=1), 100.0)
        assert exc.value.location[0] in ("row", "column")


class TestStep2D:
    @pytest.mark.parametrize("model", MODELS, ids=model_id)
    def test_structure(self, model, rng):
        f = random_field(rng, 10, 8, amp=0.5)
        n = f.grid.n_cells
        slack = 10 * CTRL.tol * n
        e0 = free_energy(f, model).total
        new, rep = step_2d(f, model, CTRL, 0.01)
        assert len(rep.row_energies) == 8 and len(rep.col_energies) == 10
        assert abs(new.values.sum() - f.values.sum()) <= slack
        if model.mobility.degenerate:
            assert np.max(np.abs(new.values)) <= 1 + 10 * CTRL.tol
        energies = [e0] + rep.sweep_energies
        assert np.max(np.diff(energies)) <= slack
        assert energies[-1] == pytest.approx(free_energy(new, model).total, abs=0)

    def test_row_sweep_noop_on_x_invariant(self):
        g = Grid.rect(1, 1, 8, 16)
        prof = 0.5 * np.cos(2 * np.pi * g.y)
        f = PhaseField(g, np.repeat(prof[:, None], 8, axis=1))
        m = ModelParams(DoubleWell(), DegenerateMobility(), 0.1)
        for r in range(1, 17):
            assert np.array_equal(sweep_row(f, r, m, CTRL, 0.01).values, f.values)

    def test_single_column_is_1d(self, rng):
        # one column has no transverse neighbours: the column sweep is the 1D step
        prof = rng.uniform(-0.6, 0.6, 12)
        g = Grid.rect(0.1, 1.0, 1, 12)
        m = ModelParams(Logarithmic(0.3, 1.0), DegenerateMobility(), 0.1, WettingParams(2.0, True, ("bottom", "top")))
        m1 = ModelParams(m.potential, m.mobility, 0.1, WettingParams(2.0, True, ("left", "right")))
        col = sweep_col(PhaseField(g, prof[:, None]), 1, m, CTRL, 0.01).values[:, 0]
        one = step_line(make_line_problem(prof, m1, 0.01, g.dy)).phi_new
        assert np.max(np.abs(col - one)) <= 1e-12

    def test_x_invariant_splitting_error_second_order(self):
        # columns see their neighbours one sub-step late; the gap to the
        # 1D step shrinks like dt^2
        g = Grid.rect(1, 1, 8, 16)
        prof = 0.5 * np.cos(2 * np.pi * g.y)
        f = PhaseField(g, np.repeat(prof[:, None], 8, axis=1))
        m = ModelParams(DoubleWell(), DegenerateMobility(), 0.1)
        gaps = []
        for dt in (1e-4, 1e-5):
            new, _ = step_2d(f, m, CTRL, dt)
            one = step_line(make_line_problem(prof, m, dt, g.dy)).phi_new
            gaps.append(np.max(np.abs(new.values - one[:, None])))
        assert gaps[1] < 1e-7
        assert gaps[0] / gaps[1] > 50

    def test_oddeven_thread_independent(self, rng):
        f = random_field(rng, 12, 10, amp=0.5)
        m = ModelParams(DoubleWell(), DegenerateMobility(), 0.1)
        outs = [step_2d(f, m, CTRL, 0.01, OddEvenParallel(w))[0].values for w in (1, 2, 5)]
        assert np.array_equal(outs[0], outs[1]) and np.array_equal(outs[0], outs[2])
        seq = step_2d(f, m, CTRL, 0.01, Sequential())[0].values
        assert abs(seq.sum() - outs[0].sum()) <= 10 * CTRL.tol * f.grid.n_cells
        assert not np.array_equal(seq, outs[0])

    def test_oddeven_structure(self, rng):
        f = random_field(rng, 12, 10, amp=0.5)
        m = ModelParams(Logarithmic(0.3, 1.0), DegenerateMobility(), 0.1, WettingParams(1.0, True, ("bottom",)))
        e0 = free_energy(f, m).total
        new, rep = step_2d(f, m, CTRL, 0.01, OddEvenParallel(3))
        assert len(rep.row_energies) == 2 and len(rep.col_energies) == 2
        assert np.max(np.diff([e0] + rep.sweep_energies)) <= 10 * CTRL.tol * f.grid.n_cells
        assert np.max(np.abs(new.values)) <= 1 + 10 * CTRL.tol

    def test_rejects_1d(self):
        with pytest.raises(ValueError):
            step_2d(PhaseField(Grid.line(1, 4), np.zeros(4)), HAND)
        with pytest.raises(ValueError):
            OddEvenParallel(0)
