"""Random channel generation for the four link classes of the duplex network.

Link classes and shapes (N antennas per RRU):
  g_dl[m, l]    DL-RRU m -> DL user l, length-N vector
  g_ul[n, k]    UL user k -> UL-RRU n, length-N vector
  g_uu[l, k]    UL user k -> DL user l, scalar (single-antenna terminals)
  g_cross[n, m] DL-RRU m -> UL-RRU n, N x N matrix (rows: rx, cols: tx)

Amplitude model: large-scale factor d**-alpha on raw meters times i.i.d.
CN(0, 1) small-scale entries (variance split evenly between real and
imaginary parts). Receivers know an estimate = truth - error, where the
error is i.i.d. CN(0, sigma2) per entry at a configured absolute power.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import NetworkLayout

# Distances below this are rejected rather than extrapolated.
MIN_GAIN_DISTANCE = 1.0


@dataclass(frozen=True)
class FadingParams:
    """Path-loss exponents, noise powers and estimation-error powers (watts)."""

    alpha_dl: float = 3.7
    alpha_ul: float = 3.7
    alpha_uu: float = 4.0      # UL user to DL user cross talk
    alpha_cross: float = 3.0   # DL-RRU to UL-RRU link
    noise_dl: float = 10.0 ** ((-83.0 - 30.0) / 10.0)
    noise_ul: float = 10.0 ** ((-83.0 - 30.0) / 10.0)
    est_error_dl: float = 10.0 ** ((-105.0 - 30.0) / 10.0)
    est_error_cross: float = 10.0 ** ((-105.0 - 30.0) / 10.0)
    reference_distance: float = 1.0  # divisor applied to d before d**-alpha


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all links, with optional estimate/error split."""

    g_dl: np.ndarray      # (M_dl, K_dl, N) complex
    g_ul: np.ndarray      # (M_ul, K_ul, N) complex
    g_uu: np.ndarray      # (K_dl, K_ul) complex
    g_cross: np.ndarray   # (M_ul, M_dl, N, N) complex
    est_dl: np.ndarray | None = None
    err_dl: np.ndarray | None = None
    est_ul: np.ndarray | None = None
    err_ul: np.ndarray | None = None
    est_cross: np.ndarray | None = None
    err_cross: np.ndarray | None = None

    @property
    def has_estimates(self) -> bool:
        return self.est_dl is not None


def large_scale_gain(distance: float, alpha: float, reference_distance: float = 1.0) -> float:
    """Amplitude factor (d/d_ref)**-alpha; the power factor is its square."""
    if distance < MIN_GAIN_DISTANCE:
        raise ValueError(
            f"distance {distance} m is below the {MIN_GAIN_DISTANCE} m validity floor"
        )
    if reference_distance <= 0.0:
        raise ValueError(f"reference_distance must be positive, got {reference_distance}")
    return float((distance / reference_distance) ** (-alpha))


def child_seed(root, *key: int) -> np.random.SeedSequence:
    """Deterministic child stream: indexes are appended to the spawn key.

    Streams depend only on (entropy, key), never on draw order, so parallel
    schedules reproduce serial results bit for bit.
    """
    root = as_seed_sequence(root)
    return np.random.SeedSequence(entropy=root.entropy, spawn_key=tuple(root.spawn_key) + key)


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _cn_unit(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1): variance 1/2 in each of the real and imaginary parts."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _pair_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(len(a), len(b)) Euclidean distances between two point sets."""
    diff = a[:, None, :] - b[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def draw_channels(layout: NetworkLayout, params: FadingParams, seed) -> ChannelSet:
    """Draw one small-scale realization of every link (no estimate split yet).

    Each link class consumes its own child stream of `seed`, so adding or
    reordering classes cannot silently shift another class's realization.
    """
    ss = as_seed_sequence(seed)
    n = layout.n_antennas
    dl_pos = np.asarray([r.position for r in layout.dl_rrus])
    ul_pos = np.asarray([r.position for r in layout.ul_rrus])

    d_ref = params.reference_distance
    amp_dl = _amplitudes(_pair_distances(dl_pos, layout.dl_users), params.alpha_dl, d_ref)
    amp_ul = _amplitudes(_pair_distances(ul_pos, layout.ul_users), params.alpha_ul, d_ref)
    amp_uu = _amplitudes(_pair_distances(layout.dl_users, layout.ul_users), params.alpha_uu, d_ref)
    amp_cross = _amplitudes(_pair_distances(ul_pos, dl_pos), params.alpha_cross, d_ref)

    g_dl = amp_dl[:, :, None] * _cn_unit(np.random.default_rng(child_seed(ss, 0)),
                                         (layout.m_dl, layout.k_dl, n))
    g_ul = amp_ul[:, :, None] * _cn_unit(np.random.default_rng(child_seed(ss, 1)),
                                         (layout.m_ul, layout.k_ul, n))
    g_uu = amp_uu * _cn_unit(np.random.default_rng(child_seed(ss, 2)),
                             (layout.k_dl, layout.k_ul))
    g_cross = amp_cross[:, :, None, None] * _cn_unit(
        np.random.default_rng(child_seed(ss, 3)), (layout.m_ul, layout.m_dl, n, n))
    return ChannelSet(g_dl=g_dl, g_ul=g_ul, g_uu=g_uu, g_cross=g_cross)


def _amplitudes(distances: np.ndarray, alpha: float, reference_distance: float) -> np.ndarray:
    if np.any(distances < MIN_GAIN_DISTANCE):
        bad = float(distances.min())
        raise ValueError(
            f"distance {bad} m is below the {MIN_GAIN_DISTANCE} m validity floor"
        )
    return (distances / reference_distance) ** (-alpha)


def split_estimate_error(channels: ChannelSet, params: FadingParams, seed) -> ChannelSet:
    """Attach (estimate, error) pairs to a drawn realization.

    Errors are additive CN(0, sigma2 I): est_error_dl on the user-side DL
    links and est_error_cross on the RRU-to-RRU links. The uplink user links
    are treated as perfectly known at their receivers (zero error), which
    keeps combiner quality independent of the cross-link error budget.
    """
    ss = as_seed_sequence(seed)
    err_dl = np.sqrt(params.est_error_dl) * _cn_unit(
        np.random.default_rng(child_seed(ss, 10)), channels.g_dl.shape)
    err_cross = np.sqrt(params.est_error_cross) * _cn_unit(
        np.random.default_rng(child_seed(ss, 11)), channels.g_cross.shape)
    err_ul = np.zeros_like(channels.g_ul)
    return replace(
        channels,
        est_dl=channels.g_dl - err_dl,
        err_dl=err_dl,
        est_ul=channels.g_ul - err_ul,
        err_ul=err_ul,
        est_cross=channels.g_cross - err_cross,
        err_cross=err_cross,
    )


# -- stacked views -----------------------------------------------------------


def stack_user_links(g: np.ndarray) -> np.ndarray:
    """(M, K, N) per-RRU vectors -> (M*N, K) matrix of stacked columns."""
    m, k, n = g.shape
    return g.transpose(0, 2, 1).reshape(m * n, k)


def stack_cross_links(g_cross: np.ndarray) -> np.ndarray:
    """(M_ul, M_dl, N, N) blocks -> (M_ul*N, M_dl*N) matrix, block [n, m]."""
    m_ul, m_dl, n, _ = g_cross.shape
    return g_cross.transpose(0, 2, 1, 3).reshape(m_ul * n, m_dl * n)


def dump_channels(channels: ChannelSet, path) -> None:
    """Debug dump of link magnitudes to a plain text file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# per-link mean |entry|^2\n")
        for name in ("g_dl", "g_ul", "g_uu", "g_cross"):
            arr = getattr(channels, name)
            axes = tuple(range(2, arr.ndim))
            power = np.abs(arr) ** 2
            mean = power.mean(axis=axes) if axes else power
            fh.write(f"[{name}]\n")
            for idx in np.ndindex(mean.shape):
                fh.write(" ".join(str(i) for i in idx) + f" {mean[idx]:.12e}\n")
