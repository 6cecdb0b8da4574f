import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

import reference
from cahnfv.diagnostics import (
    BoundViolation,
    EnergyBreakdown,
    EnergyViolation,
    FitDegenerate,
    MassViolation,
    NoInterface,
    StepReport,
    check_step,
    convergence_order,
    explicit_steady_state,
    fit_circle,
    free_energy,
    l1_error,
    make_report,
    measure_contact_angle,
    zero_contour,
)
from cahnfv.grid import Grid, PhaseField
from cahnfv.model import ConstantMobility, DegenerateMobility, DoubleWell, Logarithmic, ModelParams, WettingParams
from cahnfv.nlsolve import SolverControls

DW = ModelParams(DoubleWell(), ConstantMobility(), 1.0)


def cap(nx=200, ny=100, radius=0.3, depth=0.0, shift=0.0, eps=0.01, lx=1.0, ly=0.5):
    """tanh droplet: circle of ``radius`` centred ``depth`` above the wall (negative is below)."""
    g = Grid.rect(lx, ly, nx, ny, (-lx / 2, 0.0))
    xx, yy = g.centers()
    d = radius - np.hypot(xx - shift, yy - depth)
    return PhaseField(g, np.tanh(d / (math.sqrt(2) * eps)))


def report(mass=0.0, lo=-0.5, hi=0.5, energy=1.0):
    return StepReport(0.0, mass, lo, hi, EnergyBreakdown(energy, 0.0, 0.0, 0.0, 0.0))


class TestFreeEnergy:
    def test_zero_field_bulk_only(self):
        for n in (3, 10, 57):
            e = free_energy(PhaseField(Grid.line(1.0, n), np.zeros(n)), DW)
            assert e.total == pytest.approx(0.25, rel=1e-14)
            assert e.gradient == 0.0 and e.wall == 0.0

    def test_two_cells(self):
        e = free_energy(PhaseField(Grid.line(2.0, 2), np.array([1.0, -1.0])), DW)
        assert e.gradient == pytest.approx(2.0, rel=1e-15)
        assert e.bulk == pytest.approx(0.0, abs=1e-15)
        assert e.total == pytest.approx(2.0, rel=1e-15)

    def test_right_angle_wall_vanishes(self):
        m = ModelParams(DoubleWell(), ConstantMobility(), 0.1, WettingParams(math.pi / 2))
        for c in (-0.9, 0.0, 0.4):
            assert abs(free_energy(PhaseField(Grid.rect(1, 1, 4, 5), np.full((5, 4), c)), m).wall) < 1e-15
            assert abs(free_energy(PhaseField(Grid.line(1, 4), np.full(4, c)), m).wall) < 1e-15

    @pytest.mark.parametrize(
        "model",
        [
            DW,
            ModelParams(Logarithmic(0.3, 1.0), DegenerateMobility(), 0.2, WettingParams(1.1)),
            ModelParams(Logarithmic(0.0, 1.0), DegenerateMobility(), 0.2, WettingParams(2.5)),
        ],
    )
    def test_matches_loop_reference(self, model, rng):
        phi = rng.uniform(-0.95, 0.95, 23)
        e = free_energy(PhaseField(Grid.line(2.3, 23), phi), model)
        assert e.total == pytest.approx(reference.energy_1d(phi, model, 0.1), rel=1e-13, abs=1e-14)
        assert e.total == pytest.approx(e.bulk_convex - e.bulk_concave + e.gradient_x + e.gradient_y + e.wall, rel=1e-15)

    def test_single_row_reduces_to_1d(self, rng):
        phi = rng.uniform(-0.9, 0.9, 17)
        m = ModelParams(Logarithmic(0.3, 1.0), DegenerateMobility(), 0.05)
        one = free_energy(PhaseField(Grid.line(1.7, 17), phi), m).total
        two = free_energy(PhaseField(Grid.rect(1.7, 1.0, 17, 1), phi[None, :]), m).total
        assert two == pytest.approx(one, rel=1e-14)

    def test_transpose_invariance(self, rng):
        phi = rng.uniform(-0.9, 0.9, (6, 9))
        m = ModelParams(DoubleWell(), DegenerateMobility(), 0.1, WettingParams(1.0, True, ("bottom", "left")))
        mt = ModelParams(DoubleWell(), DegenerateMobility(), 0.1, WettingParams(1.0, True, ("left", "bottom")))
        a = free_energy(PhaseField(Grid.rect(0.9, 1.2, 9, 6), phi), m)
        b = free_energy(PhaseField(Grid.rect(1.2, 0.9, 6, 9), phi.T.copy()), mt)
        assert a.total == pytest.approx(b.total, rel=1e-14)
        assert a.gradient_x == pytest.approx(b.gradient_y, rel=1e-14)

    def test_wall_weights(self):
        m = ModelParams(DoubleWell(), ConstantMobility(), 0.2, WettingParams(1.0, True, ("left", "bottom")))
        g = Grid.rect(2.0, 1.0, 4, 5)  # dx = 0.5, dy = 0.2
        e = free_energy(PhaseField(g, np.full((5, 4), 0.5)), m)
        fw = 0.2 * math.sqrt(2) / 2 * math.cos(1.0) * (0.5**3 / 3 - 0.5)
        assert e.wall == pytest.approx(5 * 0.2 * fw + 4 * 0.5 * fw, rel=1e-14)

    def test_log_clamp_counted(self):
        m = ModelParams(Logarithmic(0.3, 1.0), DegenerateMobility(), 0.1)
        e = free_energy(PhaseField(Grid.line(1, 4), np.array([-1.0, 0.0, 0.2, 1.0])), m)
        assert e.clamped_cells == 2 and math.isfinite(e.total)


class TestCheckStep:
    def test_identical_passes(self):
        r = report()
        assert check_step(r, r, n_cells=10, bounded=True, strict=True).ok

    def test_mass_violation(self):
        with pytest.raises(MassViolation) as exc:
            check_step(report(), report(mass=1e-3), SolverControls(tol=1e-10), n_cells=200, strict=True)
        assert exc.value.kind == "mass" and exc.value.magnitude == pytest.approx(1e-3)
        assert not check_step(report(), report(mass=1e-3), n_cells=200).mass_ok

    def test_energy_within_slack(self):
        v = check_step(report(energy=1.0), report(energy=1.0 + 5e-9), SolverControls(tol=1e-10), n_cells=200, strict=True)
        assert v.energy_ok and v.energy_increase == pytest.approx(5e-9, rel=1e-6)
        with pytest.raises(EnergyViolation):
            check_step(report(energy=1.0), report(energy=1.0 + 3e-7), SolverControls(tol=1e-10), n_cells=200, strict=True)

    def test_bounds_only_when_requested(self):
        assert check_step(report(), report(hi=1.5), n_cells=4).ok
        with pytest.raises(BoundViolation):
            check_step(report(), report(hi=1.5), n_cells=4, bounded=True, strict=True)

    def test_report_validates(self):
        with pytest.raises(ValueError):
            report(mass=float("nan"))

    def test_make_report(self):
        f = PhaseField(Grid.line(1, 4), np.array([0.5, -0.2, 0.1, 0.0]))
        r = make_report(f, DW, 0.3, 4, 1e-12)
        assert r.mass == pytest.approx(0.4) and r.phi_min == -0.2 and r.phi_max == 0.5
        assert len(r.row()) == 10 and r.row()[0] == 0.3


class TestSteadyState:
    def test_centre(self):
        assert explicit_steady_state(0.5, 0.1) == pytest.approx(2 / math.pi - 1, abs=1e-15)
        assert explicit_steady_state(0.5, 0.1) == pytest.approx(-0.3633802, abs=1e-7)

    def test_edge_and_outside(self):
        assert explicit_steady_state(0.5 + math.pi * 0.1, 0.1) == pytest.approx(-1.0, abs=1e-15)
        assert explicit_steady_state(0.0, 0.1) == -1.0

    def test_mass_matches_bump(self):
        # the steady state carries the same mass as the initial cosine bump
        x = np.linspace(0, 1, 200_001)
        eps = 0.1
        bump = np.where(np.abs(x - 0.5) <= math.pi * eps / 2, np.cos((x - 0.5) / eps) - 1, -1.0)
        assert trapezoid(explicit_steady_state(x, eps), x) == pytest.approx(trapezoid(bump, x), abs=1e-8)


class TestErrors:
    def test_l1_exact_sample(self):
        g = Grid.line(1.0, 50)
        f = PhaseField(g, explicit_steady_state(g.x, 0.1))
        assert l1_error(f, lambda x: explicit_steady_state(x, 0.1)) == 0.0

    def test_l1_offset(self):
        g = Grid.rect(1.0, 1.0, 7, 9)
        f = PhaseField(g, np.full((9, 7), 0.3))
        assert l1_error(f, lambda x, y: 0.0 * x) == pytest.approx(0.3, rel=1e-14)

    def test_orders(self):
        assert convergence_order([(0.04, 6.797e-3), (0.02, 7.136e-4)])[0] == pytest.approx(3.25, abs=0.005)
        assert convergence_order([(0.1, 1.112e-2), (0.05, 6.752e-3)])[0] == pytest.approx(0.72, abs=0.005)
        assert convergence_order([(1, 8.0), (0.5, 4.0), (0.25, 2.0)]) == [1.0, 1.0]

    def test_order_absent_for_zero_error(self):
        assert convergence_order([(1, 1e-3), (0.5, 0.0), (0.25, 1e-4)]) == [None, None]


class TestContactAngle:
    def test_semicircle(self):
        assert measure_contact_angle(cap(), 0.01) == pytest.approx(math.pi / 2, abs=0.02)

    @pytest.mark.parametrize("beta", [math.pi / 3, 5 * math.pi / 12, 7 * math.pi / 12, 2 * math.pi / 3])
    def test_constructed_caps(self, beta):
        # centre at depth -R cos(beta): the circle meets the wall at angle beta
        r = 0.3
        f = cap(radius=r, depth=-r * math.cos(beta), nx=300, ny=150)
        assert measure_contact_angle(f, 0.01) == pytest.approx(beta, abs=0.03)

    def test_translation_and_mirror(self):
        base = measure_contact_angle(cap(depth=-0.1), 0.01)
        moved = measure_contact_angle(cap(depth=-0.1, shift=0.105), 0.01)
        f = cap(depth=-0.1, shift=0.05)
        mirrored = PhaseField(f.grid, f.values[:, ::-1].copy())
        assert abs(moved - base) <= 1e-3
        assert abs(measure_contact_angle(mirrored, 0.01) - measure_contact_angle(f, 0.01)) <= 1e-3

    def test_contour_on_circle(self):
        pts = zero_contour(cap(radius=0.25, depth=0.1))
        assert np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1] - 0.1) - 0.25)) < 2e-3
        xc, yc, r = fit_circle(pts)
        assert (xc, yc, r) == pytest.approx((0.0, 0.1, 0.25), abs=1e-3)

    def test_no_interface(self):
        g = Grid.rect(1, 0.5, 20, 10, (-0.5, 0.0))
        with pytest.raises(NoInterface):
            measure_contact_angle(PhaseField(g, -np.ones((10, 20))), 0.01)

    def test_degenerate_fit(self):
        with pytest.raises(FitDegenerate):
            fit_circle(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]))
