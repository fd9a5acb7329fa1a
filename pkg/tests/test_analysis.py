import io

import numpy as np
import pytest

from bimatrix import (
    Bimatrix,
    CxSystem,
    HermiteBimatrix,
    TimeDomain,
    antilinear_controllable,
    antilinear_lyapunov_reduced,
    antilinear_observable,
    antilinear_stabilizable_discrete,
    arrow,
    is_asymptotically_stable,
    is_controllable,
    is_detectable,
    is_observable,
    is_positive_definite,
    is_stabilizable,
    make_antilinear,
    make_normal,
    quadratic_form_real,
    solve_lyapunov,
    state_response,
    structure_report,
    transition_pair,
    unarrow,
)
from bimatrix.exceptions import (
    NoPositiveDefiniteSolutionError,
    NoUniqueSolutionError,
    SingularBimatrixError,
)

from helpers import (
    antilinear_series_pair,
    lift,
    rand_bimatrix,
    rand_cmatrix,
    rand_stable_system,
    rand_system,
    simulate_real_system,
)


class TestTransitionPair:
    def test_time_zero_is_identity(self, rng):
        sysm = rand_system(rng, 3, 1, 1, TimeDomain.CONTINUOUS)
        tp = transition_pair(sysm, 0.0)
        assert np.allclose(tp.phi1, np.eye(3))
        assert np.allclose(tp.phi2, 0)

    def test_antilinear_scalar_continuous_is_cosh_sinh(self):
        sysm = make_antilinear([[1.0]], [[1.0]], domain="continuous")
        tp = transition_pair(sysm, 1.3)
        assert np.allclose(tp.phi1, [[np.cosh(1.3)]])
        assert np.allclose(tp.phi2, [[np.sinh(1.3)]])

    def test_antilinear_continuous_matches_series(self, rng):
        a2 = rand_cmatrix(rng, 3, 3, scale=0.6)
        sysm = make_antilinear(a2, np.ones((3, 1)), domain="continuous")
        t = 0.9
        tp = transition_pair(sysm, t)
        phi1, phi2 = antilinear_series_pair(a2, t)
        assert np.allclose(tp.phi1, phi1, atol=1e-12)
        assert np.allclose(tp.phi2, phi2, atol=1e-12)

    def test_antilinear_discrete_odd_power(self, rng):
        a2 = rand_cmatrix(rng, 2, 2)
        sysm = make_antilinear(a2, np.ones((2, 1)), domain="discrete")
        tp = transition_pair(sysm, 3)
        m = np.conj(a2) @ a2
        assert np.allclose(tp.phi1, 0, atol=1e-13)
        assert np.allclose(tp.phi2, a2 @ m, atol=1e-12)

    def test_antilinear_discrete_even_power_has_no_conjugate_part(self, rng):
        a2 = rand_cmatrix(rng, 2, 2)
        sysm = make_antilinear(a2, np.ones((2, 1)), domain="discrete")
        tp = transition_pair(sysm, 4)
        m = np.conj(a2) @ a2
        assert np.allclose(tp.phi1, m @ m, atol=1e-12)
        assert np.allclose(tp.phi2, 0, atol=1e-13)

    def test_continuous_group_law(self, rng):
        sysm = rand_system(rng, 2, 1, 1, TimeDomain.CONTINUOUS, scale=0.5)
        a, b = 0.4, 1.1
        combined = transition_pair(sysm, a + b).as_bimatrix()
        product = transition_pair(sysm, a).as_bimatrix() @ transition_pair(
            sysm, b
        ).as_bimatrix()
        assert combined.allclose(product, atol=1e-10)

    def test_discrete_negative_time_needs_invertible_state_pair(self):
        sysm = make_antilinear([[0.0]], [[1.0]], domain="discrete")
        with pytest.raises(SingularBimatrixError):
            transition_pair(sysm, -1)
        inv = transition_pair(
            make_antilinear([[2.0]], [[1.0]], domain="discrete"), -2
        ).as_bimatrix()
        fwd = transition_pair(
            make_antilinear([[2.0]], [[1.0]], domain="discrete"), 2
        ).as_bimatrix()
        assert (inv @ fwd).allclose(Bimatrix.identity(1), atol=1e-12)

    def test_discrete_fractional_time_rejected(self):
        sysm = make_antilinear([[0.5]], [[1.0]], domain="discrete")
        with pytest.raises(ValueError):
            transition_pair(sysm, 0.5)


class TestStateResponse:
    def test_antilinear_decaying_direction(self):
        # x0 = j: cosh(t) j + sinh(t) conj(j) = j exp(-t)
        sysm = make_antilinear([[1.0]], [[1.0]], domain="continuous")
        times = np.linspace(0.0, 2.0, 21)
        trace = state_response(sysm, [1j], times)
        assert np.allclose(trace.states[:, 0], 1j * np.exp(-times), atol=1e-9)

    def test_antilinear_growing_direction(self):
        sysm = make_antilinear([[1.0]], [[1.0]], domain="continuous")
        times = np.linspace(0.0, 2.0, 21)
        trace = state_response(sysm, [1.0], times)
        assert np.allclose(trace.states[:, 0], np.exp(times), atol=1e-8)

    def test_discrete_recursion_golden(self):
        sysm = make_antilinear([[0.5]], [[1.0]], domain="discrete")
        trace = state_response(sysm, [1j], np.arange(3.0), u=np.zeros((3, 1)))
        # x1 = conj(0.5) conj(j) = -0.5j ; x2 = conj(0.5) conj(-0.5j) = 0.25j
        assert np.allclose(trace.states[:, 0], [1j, -0.5j, 0.25j])

    @pytest.mark.parametrize("domain", [TimeDomain.CONTINUOUS, TimeDomain.DISCRETE])
    def test_matches_real_representation_simulation(self, rng, domain):
        for _ in range(5):
            n, m, p = 3, 2, 2
            sysm = rand_system(rng, n, m, p, domain, scale=0.6)
            if domain.is_continuous:
                times = np.linspace(0.0, 1.5, 16)
            else:
                times = np.arange(8.0)
            x0 = rand_cmatrix(rng, n, 1).ravel()
            u = rand_cmatrix(rng, times.size, m)
            trace = state_response(sysm, x0, times, u)
            rep = sysm.real_representation()
            u_real = np.array([arrow(u[k]) for k in range(times.size)])
            states_r, outputs_r = simulate_real_system(
                rep.a, rep.b, rep.c, rep.d, arrow(x0), times, u_real,
                domain.is_continuous,
            )
            got = np.array([arrow(trace.states[k]) for k in range(times.size)])
            got_y = np.array([arrow(trace.outputs[k]) for k in range(times.size)])
            assert np.max(np.abs(got - states_r)) <= 1e-8
            assert np.max(np.abs(got_y - outputs_r)) <= 1e-8

    def test_zero_input_matches_ode_integration(self, rng):
        from scipy.integrate import solve_ivp

        sysm = rand_system(rng, 2, 1, 1, TimeDomain.CONTINUOUS, scale=0.5)
        times = np.linspace(0.0, 2.0, 9)
        x0 = rand_cmatrix(rng, 2, 1).ravel()
        trace = state_response(sysm, x0, times)
        rep_a = sysm.a.real_representation()
        sol = solve_ivp(
            lambda _, v: rep_a @ v, (0.0, 2.0), arrow(x0), t_eval=times,
            rtol=1e-11, atol=1e-12,
        )
        want = np.array([unarrow(sol.y[:, k]) for k in range(times.size)])
        assert np.max(np.abs(trace.states - want)) <= 1e-7

    def test_grid_validation(self, rng):
        sysm = rand_system(rng, 2, 1, 1, TimeDomain.DISCRETE)
        with pytest.raises(ValueError):
            state_response(sysm, [0, 0], [1.0, 2.0])
        with pytest.raises(ValueError):
            state_response(sysm, [0, 0], [0.0, 0.5, 1.0])
        with pytest.raises(ValueError):
            state_response(sysm, [0, 0], [])

    def test_input_shape_validation(self, rng):
        sysm = rand_system(rng, 2, 2, 1, TimeDomain.DISCRETE)
        with pytest.raises(Exception):
            state_response(sysm, [0, 0], np.arange(4.0), u=np.ones((4, 3)))

    def test_callable_input(self):
        sysm = make_normal([[-1.0]], [[1.0]], [[1.0]], domain="continuous")
        times = np.linspace(0.0, 1.0, 41)
        trace = state_response(sysm, [0.0], times, u=lambda t: [1.0])
        # step response of xdot = -x + 1
        assert np.allclose(trace.states[-1, 0], 1.0 - np.exp(-1.0), atol=1e-6)

    def test_csv_layout(self):
        sysm = make_normal([[-1.0]], [[1.0]], [[1.0]], domain="continuous")
        trace = state_response(sysm, [1.0], np.linspace(0.0, 1.0, 3))
        buf = io.StringIO()
        trace.write_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "t,x1_re,x1_im,u1_re,u1_im,y1_re,y1_im"
        assert len(lines) == 4
        assert lines[1].startswith("0.0,1.0,")


def _example_controllable_pair():
    a1 = np.array([[0.0, 1.0], [-5.0, -4.0]])
    b1 = np.array([[0.0], [1.0]])
    return make_normal(a1, b1, np.eye(2), domain="continuous")


class TestStructuralTests:
    def test_companion_pair_is_controllable(self):
        assert is_controllable(_example_controllable_pair())

    def test_zero_input_pair_is_uncontrollable(self, rng):
        sysm = CxSystem(
            rand_bimatrix(rng, 2, 2),
            Bimatrix.zeros(2, 1),
            rand_bimatrix(rng, 1, 2),
            Bimatrix.zeros(1, 1),
            TimeDomain.CONTINUOUS,
        )
        assert not is_controllable(sysm)

    def test_identity_output_pair_is_observable(self, rng):
        sysm = rand_system(rng, 3, 1, 3, TimeDomain.DISCRETE)
        sysm = CxSystem(sysm.a, sysm.b, Bimatrix.identity(3), Bimatrix.zeros(3, 1),
                        TimeDomain.DISCRETE)
        assert is_observable(sysm)

    def test_antilinear_reduced_controllability_agrees(self, rng):
        hits = 0
        for k in range(40):
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 3))
            a2 = rand_cmatrix(rng, n, n)
            b2 = np.zeros((n, m)) if k % 5 == 0 else rand_cmatrix(rng, n, m)
            sysm = make_antilinear(a2, b2, domain="discrete")
            full = bool(is_controllable(sysm))
            reduced = bool(antilinear_controllable(a2, b2))
            assert full == reduced
            hits += full
        assert 0 < hits < 40  # both outcomes exercised

    def test_antilinear_reduced_observability_agrees(self, rng):
        for k in range(30):
            n, p = int(rng.integers(1, 4)), int(rng.integers(1, 3))
            a2 = rand_cmatrix(rng, n, n)
            c2 = np.zeros((p, n)) if k % 5 == 0 else rand_cmatrix(rng, p, n)
            sysm = CxSystem(
                Bimatrix.antilinear(a2),
                Bimatrix.antilinear(rand_cmatrix(rng, n, 1)),
                Bimatrix.antilinear(c2),
                Bimatrix.zeros(p, 1),
                TimeDomain.DISCRETE,
            )
            assert bool(is_observable(sysm)) == bool(antilinear_observable(a2, c2))

    def test_duality(self, rng):
        for _ in range(10):
            sysm = rand_system(rng, 3, 2, 2, TimeDomain.CONTINUOUS)
            dual = CxSystem(sysm.a.H, sysm.c.H, sysm.b.H, sysm.d.H,
                            TimeDomain.CONTINUOUS)
            assert bool(is_observable(sysm)) == bool(is_controllable(dual))

    def test_stable_system_is_vacuously_stabilizable(self):
        sysm = CxSystem(
            Bimatrix.normal([[-1.0]]),
            Bimatrix.zeros(1, 1),
            Bimatrix.identity(1),
            Bimatrix.zeros(1, 1),
            TimeDomain.CONTINUOUS,
        )
        result = is_stabilizable(sysm)
        assert result and result.margin == np.inf
        assert is_detectable(sysm)

    def test_continuous_antilinear_stabilizable_iff_controllable(self, rng):
        for k in range(20):
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 3))
            a2 = rand_cmatrix(rng, n, n)
            b2 = np.zeros((n, m)) if k % 4 == 0 else rand_cmatrix(rng, n, m)
            sysm = make_antilinear(a2, b2, domain="continuous")
            assert bool(is_stabilizable(sysm)) == bool(is_controllable(sysm))

    def test_discrete_antilinear_stable_no_input_is_stabilizable(self, rng):
        a2 = rand_cmatrix(rng, 3, 3, scale=0.2)
        sysm = make_antilinear(a2, np.zeros((3, 1)), domain="discrete")
        assert is_stabilizable(sysm)
        assert antilinear_stabilizable_discrete(a2, np.zeros((3, 1)))

    def test_agreement_across_representations(self, rng):
        # the same PBH decision must come out of the doubled real system
        for _ in range(10):
            n, m, p = 2, 1, 1
            sysm = rand_system(rng, n, m, p, TimeDomain.CONTINUOUS)
            rep = sysm.real_representation()
            pts = np.linalg.eigvals(rep.a)
            scale = np.linalg.norm(np.hstack([rep.a, rep.b]), 2)
            ctrb_real = all(
                np.linalg.svd(
                    np.hstack([s * np.eye(2 * n) - rep.a, rep.b]), compute_uv=False
                )[-1] > 1e-8 * scale
                for s in pts
            )
            scale_o = np.linalg.norm(np.vstack([rep.a, rep.c]), 2)
            obsv_real = all(
                np.linalg.svd(
                    np.vstack([s * np.eye(2 * n) - rep.a, rep.c]), compute_uv=False
                )[-1] > 1e-8 * scale_o
                for s in pts
            )
            assert ctrb_real == bool(is_controllable(sysm))
            assert obsv_real == bool(is_observable(sysm))

    def test_report_implications(self, rng):
        for _ in range(10):
            sysm = rand_system(rng, 2, 1, 1,
                               rng.choice([TimeDomain.CONTINUOUS, TimeDomain.DISCRETE]))
            rep = structure_report(sysm)
            if rep.controllable.passed:
                assert rep.stabilizable.passed
            if rep.observable.passed:
                assert rep.detectable.passed
            assert set(rep.margins()) == {
                "controllable", "observable", "stabilizable", "detectable",
            }


class TestStability:
    def test_discrete_antilinear_golden(self):
        sysm = make_antilinear([[0.5j]], [[1.0]], domain="discrete")
        # rho(conj(A2) A2) = 0.25 < 1
        assert is_asymptotically_stable(sysm)

    def test_continuous_antilinear_never_stable(self, rng):
        for _ in range(10):
            a2 = rand_cmatrix(rng, int(rng.integers(1, 4)), 1)
            n = a2.shape[0]
            a2 = rand_cmatrix(rng, n, n)
            sysm = make_antilinear(a2, np.ones((n, 1)), domain="continuous")
            assert not is_asymptotically_stable(sysm)

    def test_normal_scalar(self):
        assert is_asymptotically_stable(
            make_normal([[-1.0]], [[1.0]], [[1.0]], domain="continuous")
        )

    def test_discrete_matches_spectral_radius_rule(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 5))
            a2 = rand_cmatrix(rng, n, n, scale=float(rng.uniform(0.1, 1.2)))
            sysm = make_antilinear(a2, np.ones((n, 1)), domain="discrete")
            rho = float(np.max(np.abs(np.linalg.eigvals(np.conj(a2) @ a2))))
            assert is_asymptotically_stable(sysm) == (rho < 1.0)


class TestLyapunov:
    def test_normal_scalar_golden(self):
        sysm = make_normal([[-1.0]], [[1.0]], [[1.0]], domain="continuous")
        p = solve_lyapunov(sysm, Bimatrix.normal([[1.0]]))
        # scalar balance: 2 p = 1
        assert np.allclose(p.first, [[0.5]])
        assert np.allclose(p.second, 0, atol=1e-14)

    def test_antilinear_discrete_scalar_golden(self):
        sysm = make_antilinear([[0.5]], [[1.0]], [[1.0]], domain="discrete")
        p = solve_lyapunov(sysm, Bimatrix.antilinear([[1.0]]))
        # 0.25 p - p = -1  =>  p = 4/3
        assert np.allclose(p.first, [[4.0 / 3.0]])
        assert np.allclose(p.second, 0, atol=1e-13)

    @pytest.mark.parametrize("domain", [TimeDomain.CONTINUOUS, TimeDomain.DISCRETE])
    def test_residual_in_pair_arithmetic(self, rng, domain):
        for _ in range(5):
            sysm = rand_stable_system(rng, 3, 1, 2, domain)
            c = rand_bimatrix(rng, 2, 3)
            p = solve_lyapunov(sysm, c)
            w = c.H @ c
            if domain.is_continuous:
                res = sysm.a.H @ p + p @ sysm.a + w
            else:
                res = sysm.a.H @ p @ sysm.a - p + w
            scale = np.linalg.norm(w.first) + np.linalg.norm(w.second)
            err = np.linalg.norm(res.first) + np.linalg.norm(res.second)
            assert err <= 1e-10 * max(1.0, scale)

    def test_lifted_form_residual(self, rng):
        sysm = rand_stable_system(rng, 3, 1, 3, TimeDomain.CONTINUOUS)
        c = Bimatrix.identity(3)
        p = solve_lyapunov(sysm, c)
        al = lift(sysm.a)
        cl = lift(c)
        pl = lift(p)
        res = al.conj().T @ pl + pl @ al + cl.conj().T @ cl
        assert np.linalg.norm(res) <= 1e-10 * max(1.0, np.linalg.norm(cl.conj().T @ cl))

    @pytest.mark.parametrize("domain", [TimeDomain.CONTINUOUS, TimeDomain.DISCRETE])
    def test_stability_iff_solvable_with_pd_solution(self, rng, domain):
        stable_seen = unstable_seen = 0
        for k in range(25):
            sysm = rand_system(rng, 2, 1, 2, domain,
                               scale=float(rng.uniform(0.2, 1.0)))
            if k % 2 == 0 and domain.is_continuous:
                # shift the state pair left so both outcomes appear
                shift = float(np.max(sysm.spectrum().values.real)) + 0.4
                sysm = CxSystem(
                    Bimatrix(sysm.a.first - shift * np.eye(2), sysm.a.second),
                    sysm.b, sysm.c, sysm.d, domain,
                )
            stable = is_asymptotically_stable(sysm)
            try:
                p = solve_lyapunov(sysm, Bimatrix.identity(2))
                solvable_pd = is_positive_definite(p)
            except NoUniqueSolutionError:
                solvable_pd = False
            assert stable == solvable_pd
            stable_seen += stable
            unstable_seen += not stable
        assert stable_seen and unstable_seen

    def test_decay_along_trajectories(self, rng):
        sysm = rand_stable_system(rng, 3, 1, 3, TimeDomain.CONTINUOUS)
        p = solve_lyapunov(sysm, Bimatrix.identity(3))
        x0 = rand_cmatrix(rng, 3, 1).ravel()
        trace = state_response(sysm, x0, np.linspace(0.0, 3.0, 40))
        v = [quadratic_form_real(p, trace.states[k]) for k in range(len(trace))]
        assert all(v[k + 1] <= v[k] + 1e-12 for k in range(len(v) - 1))

    def test_singular_operator_raises(self):
        # +1 and -1 eigenvalues sum to zero across the pair
        sysm = make_normal(np.diag([1.0, -1.0]), np.ones((2, 1)), np.eye(2),
                           domain="continuous")
        with pytest.raises(NoUniqueSolutionError):
            solve_lyapunov(sysm, Bimatrix.identity(2))


class TestAntilinearLyapunovReduced:
    def test_scalar_golden(self):
        p = antilinear_lyapunov_reduced(np.array([[0.5]]), np.array([[1.0], [0.5]]))
        # 0.0625 p - p = -1.25  =>  p = 4/3
        assert np.allclose(p, [[4.0 / 3.0]])

    def test_unstable_has_no_pd_solution(self):
        with pytest.raises(NoPositiveDefiniteSolutionError):
            antilinear_lyapunov_reduced(np.array([[2.0]]), np.array([[1.0]]))

    def test_agrees_with_pair_solution_via_stacked_weight(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            a2 = rand_cmatrix(rng, n, n, scale=0.4)
            c2 = rand_cmatrix(rng, 1, n)
            sysm = make_antilinear(a2, np.ones((n, 1)), domain="discrete")
            if not is_asymptotically_stable(sysm):
                continue
            p_pair = solve_lyapunov(sysm, Bimatrix.antilinear(c2))
            c_n = np.vstack([c2, np.conj(c2) @ a2])
            p_n = antilinear_lyapunov_reduced(a2, c_n)
            assert np.allclose(p_pair.first, p_n, atol=1e-9)
            assert np.allclose(p_pair.second, 0, atol=1e-9)
