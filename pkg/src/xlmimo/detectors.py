"""Linear uplink symbol detectors and their SINRs.

Weight vectors are normalized to unit gain on the target user's channel
(w^H h_k = 1).  Projections are computed through QR / Cholesky solves;
no explicit matrix inverse is ever formed.  Condition guard: interference
matrices with condition number beyond 1e12 raise instead of silently
producing garbage weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import ChannelMatrix, ChannelVector
from .errors import (DegenerateChannelError, DomainError,
                     InsufficientApertureError, SingularInterferenceError,
                     UnservableUserError)
from .visibility import VisibilityRegion, vr_antenna_indices

COND_LIMIT = 1e12
GAIN_FLOOR = 1e-12

WA_SCHEMES = ("MRC", "ZF", "MMSE")


@dataclass(frozen=True)
class DetectorWeights:
    """Combining vector for one user plus the element subset it acts on.

    ``antenna_indices`` is None for whole-array detectors; otherwise it
    holds the sorted global element indices the weights refer to.
    """

    user: int
    weights: np.ndarray
    antenna_indices: np.ndarray | None
    scheme: str


@dataclass(frozen=True)
class LinkMetrics:
    """Per-user SINRs (linear), per-user rates (bits), and their sum."""

    sinr: np.ndarray
    rate_bits: np.ndarray
    sum_rate_bits: float


def _as_matrix(channels) -> np.ndarray:
    if isinstance(channels, ChannelMatrix):
        return channels.matrix
    return np.asarray(channels)


def _as_vector(h) -> np.ndarray:
    if isinstance(h, ChannelVector):
        return h.entries
    return np.asarray(h)


def _projected_channel(h: np.ndarray, interferers: np.ndarray) -> np.ndarray:
    """h minus its projection onto span(interferers), via reduced QR."""
    if interferers.shape[1] == 0:
        return h
    q, r = np.linalg.qr(interferers)
    diag = np.abs(np.diag(r))
    if diag.min() == 0.0 or diag.max() / diag.min() > COND_LIMIT:
        raise SingularInterferenceError("interference channels are rank deficient")
    return h - q @ (q.conj().T @ h)


def _unit_gain(h: np.ndarray, direction: np.ndarray) -> np.ndarray:
    gain = np.vdot(h, direction).real
    if gain <= GAIN_FLOOR * np.vdot(h, h).real:
        raise UnservableUserError("target channel lies in the interference span")
    return direction / gain


def mrc_weights(channels, k: int) -> DetectorWeights:
    """Maximum-ratio combining: w = h_k / ||h_k||^2."""
    H = _as_matrix(channels)
    h = H[:, k]
    energy = np.vdot(h, h).real
    if energy == 0.0:
        raise DegenerateChannelError(f"user {k} has a zero channel")
    return DetectorWeights(user=k, weights=h / energy, antenna_indices=None,
                           scheme="MRC")


def zf_weights(channels, k: int) -> DetectorWeights:
    """Zero forcing: project h_k away from all other users, unit gain."""
    H = _as_matrix(channels)
    h = H[:, k]
    if H.shape[0] < H.shape[1]:
        raise DomainError("zero forcing needs at least as many elements as users")
    proj = _projected_channel(h, np.delete(H, k, axis=1))
    return DetectorWeights(user=k, weights=_unit_gain(h, proj),
                           antenna_indices=None, scheme="ZF")


def mmse_weights(channels, k: int, rho: float) -> DetectorWeights:
    """Regularized nulling with ridge 1/rho; always well defined."""
    if rho <= 0:
        raise DomainError("rho must be positive")
    H = _as_matrix(channels)
    h = H[:, k]
    others = np.delete(H, k, axis=1)
    if others.shape[1] == 0:
        direction = h
    else:
        gram = others.conj().T @ others + np.eye(others.shape[1]) / rho
        direction = h - others @ cho_solve(cho_factor(gram), others.conj().T @ h)
    return DetectorWeights(user=k, weights=_unit_gain(h, direction),
                           antenna_indices=None, scheme="MMSE")


def sinr_of_weights(w: DetectorWeights, channels, k: int, rho: float) -> float:
    """Generic SINR of arbitrary weights: signal over interference plus noise.

    Channels are restricted to the weight vector's element subset.  The
    ratio is invariant to rescaling the weights.
    """
    H = _as_matrix(channels)
    if w.antenna_indices is not None:
        H = H[w.antenna_indices, :]
    if w.weights.shape[0] != H.shape[0]:
        raise DomainError("weight length does not match the channel subset")
    gains = np.abs(w.weights.conj() @ H) ** 2
    noise = float(np.vdot(w.weights, w.weights).real)
    interference = float(gains.sum() - gains[k])
    signal = float(gains[k])
    if signal == 0.0:
        return 0.0
    return rho * signal / (rho * interference + noise)


def _gram_sinr(G: np.ndarray, k: int, rho: float, ridge: float) -> float:
    """rho * (G_kk - g^H (G_others + ridge I)^-1 g) computed via Cholesky."""
    K = G.shape[0]
    mask = np.arange(K) != k
    g = G[mask, k]
    if g.size == 0:
        return rho * float(G[k, k].real)
    sub = G[np.ix_(mask, mask)] + ridge * np.eye(K - 1)
    try:
        factor = cho_factor(sub)
    except np.linalg.LinAlgError as exc:
        raise SingularInterferenceError(str(exc)) from exc
    residual = float(G[k, k].real - np.vdot(g, cho_solve(factor, g)).real)
    return rho * max(residual, 0.0)


def sinr_closed(channels, k: int, scheme: str, rho: float) -> float:
    """Closed-form SINR of the whole-array MRC / ZF / MMSE detectors."""
    H = _as_matrix(channels)
    G = H.conj().T @ H
    if scheme == "MRC":
        energy = float(G[k, k].real)
        if energy == 0.0:
            raise DegenerateChannelError(f"user {k} has a zero channel")
        cross = np.abs(G[k, :]) ** 2
        interference = float(cross.sum() - cross[k]) / energy
        return rho * energy / (rho * interference + 1.0)
    if scheme == "ZF":
        _guard_condition(G, k)
        return _gram_sinr(G, k, rho, ridge=0.0)
    if scheme == "MMSE":
        return _gram_sinr(G, k, rho, ridge=1.0 / rho)
    raise DomainError(f"unknown scheme {scheme!r}; expected one of {WA_SCHEMES}")


def _guard_condition(G: np.ndarray, k: int) -> None:
    mask = np.arange(G.shape[0]) != k
    sub = G[np.ix_(mask, mask)]
    if sub.size == 0:
        return
    eigs = np.linalg.eigvalsh(sub)
    if eigs[0] <= 0 or math.sqrt(eigs[-1] / eigs[0]) > COND_LIMIT:
        raise SingularInterferenceError("interference channels are rank deficient")


def _subset_zf(H_sub: np.ndarray, k: int, indices: np.ndarray,
               scheme: str) -> DetectorWeights:
    h = H_sub[:, k]
    proj = _projected_channel(h, np.delete(H_sub, k, axis=1))
    return DetectorWeights(user=k, weights=_unit_gain(h, proj),
                           antenna_indices=indices, scheme=scheme)


def vr_zf_weights(channels, vrs: Sequence[VisibilityRegion], k: int) -> DetectorWeights:
    """Zero forcing restricted to the elements of user k's visibility region."""
    H = _as_matrix(channels)
    idx = vr_antenna_indices(vrs[k].grid, vrs[k])
    if idx.size < H.shape[1]:
        raise InsufficientApertureError(
            f"VR holds {idx.size} elements; zero forcing needs >= {H.shape[1]}")
    return _subset_zf(H[idx, :], k, idx, "VR_ZF")


def vr_mmse_weights(channels, vrs: Sequence[VisibilityRegion], k: int,
                    rho: float) -> DetectorWeights:
    """Regularized nulling restricted to user k's visibility region.

    Works for arbitrarily small regions; the fallback when the region is
    too small for plain zero forcing.
    """
    if rho <= 0:
        raise DomainError("rho must be positive")
    H = _as_matrix(channels)
    idx = vr_antenna_indices(vrs[k].grid, vrs[k])
    H_sub = H[idx, :]
    h = H_sub[:, k]
    others = np.delete(H_sub, k, axis=1)
    gram = others.conj().T @ others + np.eye(others.shape[1]) / rho
    direction = h - others @ cho_solve(cho_factor(gram), others.conj().T @ h)
    return DetectorWeights(user=k, weights=_unit_gain(h, direction),
                           antenna_indices=idx, scheme="VR_MMSE")


def pzf_weights(channels, group: Sequence[int], vrs: Sequence[VisibilityRegion],
                i: int) -> DetectorWeights:
    """Partial zero forcing: null only the co-group users, on user i's region."""
    group = sorted(set(group))
    if i not in group:
        raise DomainError(f"user {i} is not in the group")
    H = _as_matrix(channels)
    idx = vr_antenna_indices(vrs[i].grid, vrs[i])
    if idx.size < len(group):
        raise InsufficientApertureError(
            f"VR holds {idx.size} elements; group of {len(group)} needs more")
    H_sub = H[idx, :]
    h = H_sub[:, i]
    others = H_sub[:, [j for j in group if j != i]]
    proj = _projected_channel(h, others)
    return DetectorWeights(user=i, weights=_unit_gain(h, proj),
                           antenna_indices=idx, scheme="PZF")


def sinr_closed_all(channels, scheme: str, rho: float) -> np.ndarray:
    """Closed-form SINRs of every user at once (one Gram factorization)."""
    H = _as_matrix(channels)
    G = H.conj().T @ H
    K = G.shape[0]
    out = np.empty(K)
    if scheme == "MRC":
        energies = np.diag(G).real
        if np.any(energies == 0.0):
            raise DegenerateChannelError("a user has a zero channel")
        cross = np.abs(G) ** 2
        interference = (cross.sum(axis=1) - np.diag(cross)) / energies
        return rho * energies / (rho * interference + 1.0)
    if scheme not in ("ZF", "MMSE"):
        raise DomainError(f"unknown scheme {scheme!r}; expected one of {WA_SCHEMES}")
    ridge = 0.0 if scheme == "ZF" else 1.0 / rho
    for k in range(K):
        if scheme == "ZF":
            _guard_condition(G, k)
        out[k] = _gram_sinr(G, k, rho, ridge)
    return out


def subset_closed_sinr(channels, rows: np.ndarray, k: int, rho: float,
                       scheme: str = "ZF", columns: Sequence[int] | None = None) -> float:
    """Closed-form SINR of nulling on a row subset against chosen columns.

    ``columns`` limits the nulled users (defaults to everyone); the
    returned value accounts only for those users, which for a full column
    set makes it the exact subset-restricted SINR and for a partial set
    the grouped-detection figure of merit.
    """
    H = _as_matrix(channels)[rows, :]
    cols = list(range(H.shape[1])) if columns is None else sorted(set(columns))
    if k not in cols:
        raise DomainError(f"target user {k} not among the columns")
    sub = H[:, cols]
    G = sub.conj().T @ sub
    pos = cols.index(k)
    if scheme == "ZF":
        _guard_condition(G, pos)
        return _gram_sinr(G, pos, rho, ridge=0.0)
    if scheme == "MMSE":
        return _gram_sinr(G, pos, rho, ridge=1.0 / rho)
    raise DomainError(f"unknown scheme {scheme!r}")


def sum_rate(sinrs) -> LinkMetrics:
    """Shannon rates log2(1 + SINR) per user and their sum."""
    sinr = np.asarray(sinrs, dtype=float)
    if np.any(sinr < 0):
        raise DomainError("SINRs must be non-negative")
    rates = np.log2(1.0 + sinr)
    return LinkMetrics(sinr=sinr, rate_bits=rates, sum_rate_bits=float(rates.sum()))


def favorable_propagation_ratio(h_k, h_i) -> float:
    """Residual MRC interference |h_k^H h_i|^2 / ||h_k||^2."""
    hk = _as_vector(h_k)
    hi = _as_vector(h_i)
    energy = float(np.vdot(hk, hk).real)
    if energy == 0.0:
        raise DegenerateChannelError("reference channel has no energy")
    return float(np.abs(np.vdot(hk, hi)) ** 2) / energy


def far_field_interference_ratio(m: int, delta_over_lambda: float,
                                 sin_psi_k: float, sin_psi_i: float) -> float:
    """Closed-form MRC interference of two unit-amplitude planar wavefronts.

    Dirichlet kernel sin^2(pi d/lambda M ds) / (M sin^2(pi d/lambda ds))
    with ds the sine-angle separation; equals M when the angles coincide.
    """
    x = math.pi * delta_over_lambda * (sin_psi_i - sin_psi_k)
    if abs(math.sin(x)) < 1e-12:
        return float(m)
    return math.sin(m * x) ** 2 / (m * math.sin(x) ** 2)
