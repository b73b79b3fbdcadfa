"""Pure-numpy implementations of the float64 hot kernels.

Signatures mirror the compiled ``_kernels`` extension exactly.
"""
import numpy as np


def gausspoly_eval(coeffs, a, b, mu, q, out):
    """out += P(q) exp(-a (q-mu)^2 / 2 + i b q), P with ascending ``coeffs``."""
    q = np.asarray(q, dtype=np.float64)
    env = np.exp(-0.5 * a * (q - mu) ** 2)
    mask = env > 0.0
    if not mask.any():
        return out
    qm = q[mask]
    acc = np.zeros(qm.shape, dtype=np.complex128)
    for c in coeffs[::-1]:
        acc = acc * qm + c
    out[mask] += acc * env[mask] * np.exp(1j * b * qm)
    return out


def zak_window_mass(values, weights, shift_kernel):
    """sum_{s,s'} K[s-s'] sum_i w_i v[s,i] conj(v[s',i]) for a (S, N) block.

    ``shift_kernel`` has length 2S-1 and index ``d + S - 1`` holds K(d).
    """
    v = np.asarray(values)
    gram = (v * weights) @ v.conj().T
    S = v.shape[0]
    d = np.arange(S)[:, None] - np.arange(S)[None, :]
    return float(np.real(np.sum(shift_kernel[d + S - 1] * gram)))
