import numpy as np
import pytest

from binoether.expr import Num, PhaseSpace, Var
from binoether.geometry import (
    MultiVectorField,
    PhasePoint,
    hamiltonian_vf,
    lie_derivative_mv,
    poisson_bracket,
)
from binoether.verify import (
    CheckConfig,
    CheckReport,
    CheckRecord,
    FlowError,
    SamplingError,
    SpectrumSample,
    Trajectory,
    check_compatibility,
    check_involution,
    check_jacobi,
    check_non_noether,
    check_symmetry,
    check_yang_baxter,
    conservation_drift,
    integrate_flow,
    sample_regular_points,
)
from helpers import dissipative_fields, random_polynomial, var

CFG = CheckConfig()


def rel(record):
    return record.residual / record.scale


def non_jacobi_bivector():
    """W(qi,pi) = qi*pi with the 2-dof perturbation W(q1,q2) = p1: regular
    almost everywhere but with a nonzero Jacobiator."""
    space = PhaseSpace.canonical(2)
    q1, q2 = var(space, "q1"), var(space, "q2")
    p1, p2 = var(space, "p1"), var(space, "p2")
    return space, MultiVectorField(
        space, 2, {(0, 2): q1 * p1, (1, 3): q2 * p2, (0, 1): p1}
    )


class TestConfigAndTypes:
    def test_config_validation(self):
        with pytest.raises(ValueError, match="samples"):
            CheckConfig(samples=4)
        with pytest.raises(ValueError, match="dt"):
            CheckConfig(dt=0.0)

    def test_trajectory_requires_uniform_steps(self):
        with pytest.raises(ValueError, match="uniform"):
            Trajectory(np.array([0.0, 0.1, 0.3]), np.zeros((3, 2)))

    def test_sampling_error_on_degenerate_bivector(self):
        space = PhaseSpace.canonical(1)
        zero_w = MultiVectorField(space, 2, {})
        with pytest.raises(SamplingError):
            sample_regular_points(zero_w, CFG)


class TestCheckJacobi:
    def test_friction_bivector_passes_exactly(self):
        _, W, _, _ = dissipative_fields(2)
        record = check_jacobi(W, CFG)
        assert record.passed and record.residual <= 1e-12

    def test_canonical_passes(self):
        space = PhaseSpace.canonical(2)
        Wc = MultiVectorField(space, 2, {(0, 2): Num(-1.0), (1, 3): Num(-1.0)})
        assert check_jacobi(Wc, CFG).passed

    def test_perturbed_bivector_fails(self):
        space, V = non_jacobi_bivector()
        # independent oracle: the Jacobiator of coordinate functions at one
        # point; {q1,{q2,p1}} + cyc = p1^2 for this V (nonzero)
        q1, q2, p1 = var(space, "q1"), var(space, "q2"), var(space, "p1")
        pt = PhasePoint((0.7, -0.4, 1.3, 0.9))
        J = (
            poisson_bracket(V, q1, poisson_bracket(V, q2, p1))
            + poisson_bracket(V, q2, poisson_bracket(V, p1, q1))
            + poisson_bracket(V, p1, poisson_bracket(V, q1, q2))
        )
        assert J.eval(pt) == pytest.approx(pt[2] ** 2, rel=1e-12)
        record = check_jacobi(V, CFG)
        assert not record.passed
        assert rel(record) > 1e-3


class TestCheckSymmetry:
    def test_friction_generator_passes_exactly(self):
        _, W, h, E = dissipative_fields(2)
        record = check_symmetry(E, W, h, CFG)
        assert record.passed
        assert record.residual == 0.0  # the two product terms cancel exactly

    def test_field_commutes_with_itself(self):
        _, W, h, _ = dissipative_fields(1)
        X = hamiltonian_vf(W, h)
        assert check_symmetry(X, W, h, CFG).passed

    def test_genuinely_broken_generator_fails(self):
        # E = q1*p1 d/dq1 has [E, W(h)] = p1(q1 - p1) d/dq1 != 0
        space, W, h, _ = dissipative_fields(1)
        E = MultiVectorField(space, 1, {(0,): var(space, "q1") * var(space, "p1")})
        record = check_symmetry(E, W, h, CFG)
        assert not record.passed
        assert rel(record) > 1e-2

    def test_translation_generator_commutes(self):
        # d/dq1 is a symmetry here (the evolution field depends only on the
        # momenta) - and a Noether one, since W is q-independent
        space, W, h, _ = dissipative_fields(1)
        E = MultiVectorField(space, 1, {(0,): Num(1.0)})
        assert check_symmetry(E, W, h, CFG).passed
        rec = check_non_noether(E, W, CFG)
        assert "Noether" in rec.notes and "non-Noether" not in rec.notes


class TestCheckNonNoether:
    def test_friction_generator_is_non_noether(self):
        # frozen hand expansion: [E, W] = 2p(p+q) d/dq ^ d/dp != 0
        _, W, _, E = dissipative_fields(1)
        record = check_non_noether(E, W, CFG)
        assert record.passed  # classification record always passes
        assert "non-Noether" in record.notes
        assert record.residual > 1.0

    def test_hamiltonian_generator_is_noether(self):
        rng = np.random.default_rng(1)
        space, W, _, _ = dissipative_fields(2)
        f = random_polynomial(rng, space, max_degree=2)
        E = hamiltonian_vf(W, f)
        record = check_non_noether(E, W, CFG)
        assert "Noether" in record.notes and "non-Noether" not in record.notes

    def test_zero_generator_is_noether(self):
        space, W, _, _ = dissipative_fields(1)
        E = MultiVectorField(space, 1, {})
        record = check_non_noether(E, W, CFG)
        assert record.residual == 0.0 and "Noether" in record.notes


class TestCheckYangBaxter:
    def test_friction_generator_passes(self):
        _, W, _, E = dissipative_fields(2)
        assert check_yang_baxter(E, W, CFG).passed

    def test_noether_generator_passes_trivially(self):
        space, W, _, _ = dissipative_fields(2)
        E = MultiVectorField(space, 1, {})
        record = check_yang_baxter(E, W, CFG)
        assert record.passed and record.residual == 0.0

    def test_two_dimensional_trivector_vanishes(self):
        # n = 1: any degree-3 multivector over a 2-dimensional space is zero,
        # so the condition holds for every generator
        space = PhaseSpace.canonical(1)
        Wc = MultiVectorField(space, 2, {(0, 1): Num(-1.0)})
        q1, p1 = var(space, "q1"), var(space, "p1")
        E = MultiVectorField(space, 1, {(0,): q1 * q1 * p1})
        record = check_yang_baxter(E, Wc, CFG)
        assert record.passed and record.residual == 0.0


class TestCheckCompatibility:
    def test_friction_pair_passes(self):
        _, W, _, E = dissipative_fields(2)
        What = lie_derivative_mv(E, W)
        mixed, deformed = check_compatibility(W, What, CFG)
        assert mixed.passed and deformed.passed

    def test_proportional_pair_passes(self):
        _, W, _, _ = dissipative_fields(2)
        mixed, deformed = check_compatibility(W, 3.0 * W, CFG)
        assert mixed.passed and deformed.passed

    def test_unrelated_bivectors_generally_fail(self):
        # V couples the blocks through q1*p2, so [W,V]^{q1 q2 p1} = -p1*p2
        space, W, _, _ = dissipative_fields(2)
        q1, q2 = var(space, "q1"), var(space, "q2")
        p1, p2 = var(space, "p1"), var(space, "p2")
        V = MultiVectorField(
            space, 2, {(0, 2): q1 * p1, (1, 3): q2 * p2, (0, 1): q1 * p2}
        )
        from binoether.geometry import schouten_bb

        # single-point cross-check of the bracket through the polarization
        # identity [W,V] = ([W+V,W+V] - [W,W] - [V,V]) / 2, with each
        # self-bracket measured independently through coordinate Jacobiators
        pt = PhasePoint((0.9, 0.6, 1.4, -1.1))
        coords = [Var(space.names[i], i) for i in range(4)]

        def jacobiator_component(U, i, j, k):
            f, g, h = coords[i], coords[j], coords[k]
            J = (
                poisson_bracket(U, f, poisson_bracket(U, g, h))
                + poisson_bracket(U, g, poisson_bracket(U, h, f))
                + poisson_bracket(U, h, poisson_bracket(U, f, g))
            )
            return J.eval(pt)

        T = schouten_bb(W, V)
        for idx in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
            brute = -(
                jacobiator_component(W + V, *idx)
                - jacobiator_component(W, *idx)
                - jacobiator_component(V, *idx)
            )
            got = T.component(idx).eval(pt)
            assert got == pytest.approx(brute, rel=1e-10, abs=1e-10)

        mixed, _ = check_compatibility(W, V, CFG)
        assert not mixed.passed


class TestIntegrateFlow:
    def test_closed_form_cross_check(self):
        space, W, h, _ = dissipative_fields(1)
        cfg = CheckConfig(t_end=1.0, dt=1e-3)
        traj = integrate_flow(W, h, PhasePoint((0.0, 1.0)), cfg)
        q_exact = 0.0 + 1.0 * (1 - np.exp(-1.0))
        p_exact = np.exp(-1.0)
        assert abs(traj.states[-1][0] - q_exact) <= 1e-8
        assert abs(traj.states[-1][1] - p_exact) <= 1e-8

    def test_constant_hamiltonian_freezes(self):
        space, W, _, _ = dissipative_fields(1)
        cfg = CheckConfig(t_end=0.5, dt=1e-2)
        traj = integrate_flow(W, Num(7.0), PhasePoint((0.3, 1.2)), cfg)
        assert np.all(traj.states == traj.states[0])

    def test_fixed_point_at_zero_momentum(self):
        # X vanishes at p = 0; W is degenerate there, so the regularity
        # monitor is switched off for this run
        space, W, h, _ = dissipative_fields(1)
        cfg = CheckConfig(t_end=0.5, dt=1e-2)
        traj = integrate_flow(
            W, h, PhasePoint((0.4, 0.0)), cfg, require_regular=False
        )
        assert np.all(traj.states == traj.states[0])

    def test_regularity_monitor_raises(self):
        space, W, h, _ = dissipative_fields(1)
        cfg = CheckConfig(t_end=0.5, dt=1e-2)
        with pytest.raises(FlowError, match="regularity"):
            integrate_flow(W, h, PhasePoint((0.4, 0.0)), cfg)

    def test_step_error_bound_raises(self):
        space, W, h, _ = dissipative_fields(1)
        cfg = CheckConfig(t_end=1.0, dt=0.1)
        with pytest.raises(FlowError, match="step error"):
            integrate_flow(W, h, PhasePoint((0.0, 1.0)), cfg, max_step_error=1e-12)

    def test_fourth_order_convergence(self):
        space, W, h, _ = dissipative_fields(1)
        errs = []
        for dt in (0.1, 0.05, 0.025):
            cfg = CheckConfig(t_end=1.0, dt=dt)
            traj = integrate_flow(W, h, PhasePoint((0.0, 1.0)), cfg, max_step_error=None)
            q_exact = 1 - np.exp(-1.0)
            p_exact = np.exp(-1.0)
            errs.append(
                max(abs(traj.states[-1][0] - q_exact), abs(traj.states[-1][1] - p_exact))
            )
        assert 12.0 <= errs[0] / errs[1] <= 20.0
        assert 12.0 <= errs[1] / errs[2] <= 20.0


class TestConservationDrift:
    def test_friction_model_conserves(self):
        space, W, h, E = dissipative_fields(2)
        record = conservation_drift(W, E, h, PhasePoint((0.1, -0.4, 1.3, 0.8)), CFG)
        assert record.passed
        assert rel(record) <= 1e-6

    def test_noether_generator_all_zero(self):
        space, W, h, E = dissipative_fields(2)
        zero_E = MultiVectorField(space, 1, {})
        cfg = CheckConfig(t_end=2.0, dt=5e-3)
        record = conservation_drift(W, zero_E, h, PhasePoint((0.1, -0.4, 1.3, 0.8)), cfg)
        assert record.passed and record.residual == 0.0

    def test_broken_generator_drifts(self):
        # E = q1*p1 d/dq1 fails the symmetry check and its root c = -p1
        # decays along the flow: the drift audit must catch it
        space, W, h, _ = dissipative_fields(1)
        E = MultiVectorField(space, 1, {(0,): var(space, "q1") * var(space, "p1")})
        assert not check_symmetry(E, W, h, CFG).passed
        cfg = CheckConfig(t_end=2.0, dt=5e-3)
        record = conservation_drift(W, E, h, PhasePoint((0.0, 1.0)), cfg)
        assert not record.passed
        assert rel(record) > 1e-2


class TestDriftRefinement:
    def test_drift_bounded_at_every_step_size(self):
        # c_i here are functions of the linear invariants p_i + q_i, which
        # every Runge-Kutta scheme preserves exactly, so the drift sits at
        # the rounding floor for all dt (never above the tolerance, and in
        # particular bounded at the default step)
        space, W, h, E = dissipative_fields(1)
        x0 = PhasePoint((0.2, 1.1))
        drifts = []
        for dt in (0.02, 0.005, 0.001):
            cfg = CheckConfig(t_end=5.0, dt=dt)
            record = conservation_drift(W, E, h, x0, cfg)
            drifts.append(rel(record))
        assert all(d <= 1e-12 for d in drifts), drifts
        assert drifts[-1] <= CheckConfig().drift_tol


class TestCheckInvolution:
    def test_friction_n2_passes_both_brackets(self):
        _, W, _, E = dissipative_fields(2)
        record = check_involution(W, E, CFG)
        assert record.passed
        assert rel(record) <= 1e-8

    def test_n1_vacuous_pair_set(self):
        _, W, _, E = dissipative_fields(1)
        record = check_involution(W, E, CFG)
        assert record.passed
        assert "single invariant" in record.notes

    def test_repeated_roots_skip_root_pairs(self):
        # a proportional deformation has all roots equal at every point
        space, W, _, _ = dissipative_fields(2)
        E_noether = MultiVectorField(space, 1, {})
        record = check_involution(W, E_noether, CFG)
        assert record.passed
        assert "skipped" in record.notes


class TestTheoremChainSoundness:
    def test_hypotheses_imply_conclusions(self):
        # whenever Jacobi + symmetry + Yang-Baxter pass, conservation and
        # involution must pass too; a counterexample would be a bug here
        for n in (1, 2, 3):
            space, W, h, E = dissipative_fields(n)
            hypotheses = [
                check_jacobi(W, CFG),
                check_symmetry(E, W, h, CFG),
                check_yang_baxter(E, W, CFG),
            ]
            if all(r.passed for r in hypotheses):
                x0 = PhasePoint(tuple(0.2 * (i + 1) for i in range(2 * n)))
                assert conservation_drift(W, E, h, x0, CFG).passed
                assert check_involution(W, E, CFG).passed


class TestReportSerialization:
    def _tiny_report(self):
        records = (
            CheckRecord("jacobi", "[W,W] = 0", 0.0, 1.25, True, 32, "ok"),
            CheckRecord("symmetry", "[E,W(h)] = 0", 3.5e-10, 2.0, True, 32),
        )
        samples = (SpectrumSample((1.0, 2.0), (-6.0,), (-6.0,)),)
        return CheckReport("demo", CheckConfig(), records, samples)

    def test_json_roundtrip(self):
        report = self._tiny_report()
        again = CheckReport.from_json(report.to_json())
        assert again == report
        assert again.verdict == report.verdict

    def test_verdict_is_conjunction_of_mandatory(self):
        report = self._tiny_report()
        failing = CheckRecord("drift", "d/dt = 0", 1.0, 1.0, False, 10)
        report2 = CheckReport("demo", CheckConfig(), report.records + (failing,))
        assert report.verdict and not report2.verdict
        informative = CheckRecord("note", "x", 1.0, 1.0, False, 10, mandatory=False)
        report3 = CheckReport("demo", CheckConfig(), report.records + (informative,))
        assert report3.verdict
