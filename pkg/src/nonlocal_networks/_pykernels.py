"""NumPy implementations of the per-step kernels (fallback for the compiled core)."""
import numpy as np

ONE_TO_ONE = 0
ONE_TO_TWO_MAXFLUX = 1
ONE_TO_TWO_DISTRIBUTION = 2
TWO_TO_ONE_MAXFLUX = 3
TWO_TO_ONE_PRIORITY = 4


def lookahead(w_ext, gamma, n):
    """V[i] = sum_k gamma[k] * w_ext[i + k + 1] for i < n."""
    m = len(gamma)
    if len(w_ext) < n + m:
        raise IndexError("lookahead window runs past the supplied data")
    return np.correlate(w_ext[1 : n + m], gamma, mode="valid")


def coupling(tag, rho, va, vb, params):
    """Coupling term g evaluated cell-wise.

    params = (rho_max_a, rho_max_b, alpha_a, alpha_b, q_self, q_other, rho_other)
    where ``a``/``b`` are the (first/second) outgoing roads.
    """
    rmax_a, rmax_b, alpha_a, alpha_b, q_self, q_other, rho_other = params
    if tag == ONE_TO_ONE:
        return np.minimum(rho, rmax_a) * va
    if tag == ONE_TO_TWO_MAXFLUX:
        return np.minimum(alpha_a * rho, rmax_a) * va + np.minimum(alpha_b * rho, rmax_b) * vb
    if tag == ONE_TO_TWO_DISTRIBUTION:
        return np.minimum(
            rho * (alpha_a * va + alpha_b * vb),
            np.minimum(rmax_a * va / alpha_a, rmax_b * vb / alpha_b),
        )
    if tag == TWO_TO_ONE_MAXFLUX:
        return np.minimum(rho, max(q_self * rmax_a, rmax_a - rho_other)) * va
    if tag == TWO_TO_ONE_PRIORITY:
        return np.minimum(rho, min(q_self * rmax_a, q_self / q_other * rho_other)) * va
    raise ValueError(f"unknown coupling tag {tag}")


def godunov_interior(rho, v_max, rho_max):
    """min(D(rho_i), S(rho_{i+1})) at the n - 1 interior interfaces of a road."""
    sigma = 0.5 * rho_max
    fmax = sigma * v_max * (1.0 - sigma / rho_max)
    f = rho * v_max * (1.0 - rho / rho_max)
    demand = np.where(rho <= sigma, f, fmax)
    supply = np.where(rho <= sigma, fmax, f)
    return np.minimum(demand[:-1], supply[1:])


def update(rho, influx, flux, lam):
    """Conservative update with flux[i] at the right face of cell i and ``influx`` at the left face of cell 0."""
    out = np.empty_like(rho)
    out[0] = rho[0] - lam * (flux[0] - influx)
    out[1:] = rho[1:] - lam * (flux[1:] - flux[:-1])
    return out
