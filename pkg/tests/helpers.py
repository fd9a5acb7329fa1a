"""Shared generators and independent oracles for the test suite.

Oracles here deliberately avoid the library code paths they are used to
check: series are summed term by term, simulations step the doubled real
system directly, and spectra come from the lifted matrices.
"""

import numpy as np
import scipy.linalg

from bimatrix import Bimatrix, CxSystem, TimeDomain


def rand_cmatrix(rng, rows, cols, scale=1.0):
    return scale * (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    )


def rand_bimatrix(rng, rows, cols, scale=1.0):
    return Bimatrix(
        rand_cmatrix(rng, rows, cols, scale), rand_cmatrix(rng, rows, cols, scale)
    )


def rand_system(rng, n, m, p, domain, scale=1.0):
    return CxSystem(
        rand_bimatrix(rng, n, n, scale),
        rand_bimatrix(rng, n, m, scale),
        rand_bimatrix(rng, p, n, scale),
        rand_bimatrix(rng, p, m, scale),
        domain,
    )


def rand_stable_system(rng, n, m, p, domain):
    """Random system scaled/shifted until asymptotically stable."""
    from bimatrix import is_asymptotically_stable

    for _ in range(100):
        sysm = rand_system(rng, n, m, p, domain)
        if domain in (TimeDomain.DISCRETE, "discrete"):
            rep = sysm.a.real_representation()
            rho = np.max(np.abs(np.linalg.eigvals(rep)))
            a = Bimatrix(
                sysm.a.first * (0.5 / max(rho, 0.5)),
                sysm.a.second * (0.5 / max(rho, 0.5)),
            )
        else:
            rep = sysm.a.real_representation()
            shift = np.max(np.linalg.eigvals(rep).real) + 0.5
            a = Bimatrix(sysm.a.first - shift * np.eye(n), sysm.a.second)
        sysm = CxSystem(a, sysm.b, sysm.c, sysm.d, domain)
        if is_asymptotically_stable(sysm):
            return sysm
    raise AssertionError("could not generate a stable system")


def rand_controllable_system(rng, n, m, p, domain, scale=1.0):
    from bimatrix import is_controllable

    for _ in range(100):
        sysm = rand_system(rng, n, m, p, domain, scale)
        if is_controllable(sysm):
            return sysm
    raise AssertionError("could not generate a controllable system")


def lift(bm):
    """Doubled-up complex matrix, assembled independently of the library."""
    a1, a2 = np.asarray(bm.first), np.asarray(bm.second)
    top = np.hstack([a1, np.conj(a2)])
    bot = np.hstack([a2, np.conj(a1)])
    return np.vstack([top, bot])


def antilinear_series_pair(a2, t, tol=1e-17, max_terms=300):
    """Transition pair of a conjugate-driven system by direct series summation.

    phi1 = sum_i t^(2i) / (2i)!  (conj(A2) A2)^i
    phi2 = A2 @ sum_i t^(2i+1) / (2i+1)! (conj(A2) A2)^i
    """
    a2 = np.asarray(a2, dtype=complex)
    n = a2.shape[0]
    m = np.conj(a2) @ a2
    phi1 = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for i in range(1, max_terms):
        term = term @ m * (t * t / ((2 * i - 1) * (2 * i)))
        phi1 = phi1 + term
        if np.linalg.norm(term) < tol * max(1.0, np.linalg.norm(phi1)):
            break
    acc = t * np.eye(n, dtype=complex)
    term = acc.copy()
    for i in range(1, max_terms):
        term = term @ m * (t * t / ((2 * i) * (2 * i + 1)))
        acc = acc + term
        if np.linalg.norm(term) < tol * max(1.0, np.linalg.norm(acc)):
            break
    phi2 = a2 @ acc
    return phi1, phi2


def simulate_real_system(ar, br, cr, dr, x0v, times, u_real, continuous):
    """Step the doubled real system directly (the oracle for state_response)."""
    n2 = ar.shape[0]
    m2 = br.shape[1]
    states = np.empty((len(times), n2))
    states[0] = x0v
    if continuous:
        for k in range(len(times) - 1):
            h = float(times[k + 1] - times[k])
            aug = np.zeros((n2 + m2, n2 + m2))
            aug[:n2, :n2] = ar
            aug[:n2, n2:] = br
            ex = scipy.linalg.expm(aug * h)
            states[k + 1] = ex[:n2, :n2] @ states[k] + ex[:n2, n2:] @ u_real[k]
    else:
        for k in range(len(times) - 1):
            states[k + 1] = ar @ states[k] + br @ u_real[k]
    outputs = np.array([cr @ states[k] + dr @ u_real[k] for k in range(len(times))])
    return states, outputs


def rand_stable_spectrum(rng, count, domain):
    """Conjugate-closed multiset of `count` values strictly in the stable region."""
    continuous = getattr(domain, "value", domain) == "continuous"
    vals = []
    while len(vals) < count:
        if count - len(vals) >= 2 and rng.uniform() < 0.6:
            if continuous:
                v = complex(-rng.uniform(0.5, 2.5), rng.uniform(0.3, 2.0))
            else:
                rho, th = rng.uniform(0.2, 0.8), rng.uniform(0.2, 2.9)
                v = rho * np.exp(1j * th)
            vals += [v, np.conj(v)]
        else:
            vals.append(
                complex(-rng.uniform(0.5, 2.5), 0.0)
                if continuous
                else complex(rng.uniform(0.1, 0.8) * rng.choice([-1.0, 1.0]), 0.0)
            )
    return np.asarray(vals, dtype=complex)


def multiset_close(got, want, rtol=1e-8):
    got = list(np.asarray(got, dtype=complex))
    for w in np.asarray(want, dtype=complex):
        j = min(range(len(got)), key=lambda i: abs(got[i] - w))
        if abs(got[j] - w) > rtol * (1.0 + abs(w)):
            return False
        got.pop(j)
    return len(got) == 0
