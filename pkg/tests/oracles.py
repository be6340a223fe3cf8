"""Slow reference implementations used only by the tests."""

import numpy as np


def envelope_loops(data, n_cons, m):
    """Triple loop over receivers, range and replica bins (interleave layout)."""
    n_c, n_r, _ = data.shape
    env = np.zeros((n_r, n_cons))
    for r in range(n_r):
        for l in range(n_cons):
            acc = 0.0
            for c in range(n_c):
                for k in range(m):
                    z = complex(data[c, r, l + k * n_cons])
                    acc += z.real * z.real + z.imag * z.imag
            env[r, l] = acc
    return env


def cfar_loops(env, window, guard, tau):
    """Per-cell CA-CFAR with truncated windows and the 8 eps sum(E) background floor."""
    n_r, n_l = env.shape
    floor = 8 * np.finfo(float).eps * float(np.sum(env))
    wh, gh = window // 2, guard // 2
    hits = set()
    for r in range(n_r):
        for l in range(n_l):
            total, count = 0.0, 0
            for rr in range(r - wh, r + wh + 1):
                for ll in range(l - wh, l + wh + 1):
                    if not (0 <= rr < n_r and 0 <= ll < n_l):
                        continue
                    if abs(rr - r) <= gh and abs(ll - l) <= gh:
                        continue
                    total += env[rr, ll]
                    count += 1
            mu = max(total / count if count else 0.0, floor)
            if mu > 0 and env[r, l] / mu > tau:
                hits.add((r, l))
    return hits


def matvec_loops(b, v):
    n_theta, n_virt = b.shape
    out = np.zeros(n_theta)
    for k in range(n_theta):
        acc = 0j
        for i in range(n_virt):
            acc += complex(b[k, i]) * complex(v[i])
        out[k] = abs(acc)
    return out


def random_frame_data(rng, n_c, n_r, n_d):
    return (rng.standard_normal((n_c, n_r, n_d)) + 1j * rng.standard_normal((n_c, n_r, n_d))).astype(np.complex64)


def random_envelope(rng, n_r, n_l):
    # exponential power with occasional strong cells, like noise plus targets
    env = rng.exponential(1.0, (n_r, n_l))
    spikes = rng.random((n_r, n_l)) < 0.05
    env[spikes] *= rng.uniform(5, 50, spikes.sum())
    return env
