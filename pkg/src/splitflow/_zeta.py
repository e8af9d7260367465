"""Hurwitz zeta with analytic derivative in the exponent.

zeta(s, q) = sum_{k>=0} (q+k)^(-s), evaluated by a truncated direct sum
plus an Euler-Maclaurin tail.  The derivative d/ds zeta(s, q) is computed
by differentiating each term analytically, which the discrete power-law
likelihood equation needs; scipy exposes zeta but not its s-derivative.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidExponent

__all__ = ["hurwitz_zeta"]

# B_{2j} / (2j)! for the Euler-Maclaurin correction terms
_EM_COEFFS = (1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0)


def hurwitz_zeta(s: float, q, with_derivative: bool = False):
    """Evaluate zeta(s, q) and optionally its derivative with respect to s.

    Parameters
    ----------
    s : float
        Exponent, s > 1.
    q : float or array_like
        Offset(s), q >= 1.
    with_derivative : bool
        When True, also return d/ds zeta(s, q).

    Returns
    -------
    z : float or ndarray
    zprime : float or ndarray, only when ``with_derivative``
    """
    if not s > 1.0:
        raise InvalidExponent(f"hurwitz_zeta requires s > 1, got {s}")
    q_arr = np.atleast_1d(np.asarray(q, dtype=np.float64))
    if np.any(q_arr < 1.0):
        raise InvalidExponent("hurwitz_zeta requires q >= 1")
    scalar = np.isscalar(q) or np.ndim(q) == 0

    # Direct sum length: the E-M remainder scales like (q+M)^(-s-9), so
    # push q+M past both a fixed floor and a multiple of s.
    target = max(18.0, 1.6 * (s + 8.0))
    m_terms = np.maximum(0, np.ceil(target - q_arr)).astype(np.int64)
    m_max = int(m_terms.max())

    k = np.arange(m_max, dtype=np.float64)
    grid = q_arr[:, None] + k[None, :]            # (nq, m_max)
    mask = k[None, :] < m_terms[:, None]
    with np.errstate(over="ignore"):
        powers = np.where(mask, grid, 1.0) ** (-s)
    powers = np.where(mask, powers, 0.0)
    direct = powers.sum(axis=1)

    a = q_arr + m_terms                            # tail start, q + M
    log_a = np.log(a)
    a_pow = a ** (-s)

    # Euler-Maclaurin: integral + half-term + Bernoulli corrections
    integral = a ** (1.0 - s) / (s - 1.0)
    z = direct + integral + 0.5 * a_pow

    # rising factorials (s)_1, (s)_3, (s)_5, (s)_7 and their derivatives
    orders = (1, 3, 5, 7)
    corr = np.zeros_like(z)
    dcorr = np.zeros_like(z)
    for coeff, order in zip(_EM_COEFFS, orders):
        factors = s + np.arange(order)
        poch = float(np.prod(factors))
        term = coeff * poch * a ** (-s - order)
        corr += term
        if with_derivative:
            dpoch_over_poch = float(np.sum(1.0 / factors))
            dcorr += term * (dpoch_over_poch - log_a)
    z = z + corr

    if not with_derivative:
        return float(z[0]) if scalar else z

    dlog = np.where(mask, np.log(np.where(mask, grid, 1.0)), 0.0)
    d_direct = -(powers * dlog).sum(axis=1)
    d_integral = integral * (-log_a - 1.0 / (s - 1.0))
    d_half = -0.5 * log_a * a_pow
    zprime = d_direct + d_integral + d_half + dcorr
    if scalar:
        return float(z[0]), float(zprime[0])
    return z, zprime
