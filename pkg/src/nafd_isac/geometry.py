"""Planar network geometry: deployments, bistatic target paths, array steering.

All coordinates are meters in a fixed 2-D frame. Angles are radians,
counterclockwise from the +x axis, normalized to (-pi, pi].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

# Minimum spacing between any two placed nodes. Keeps d**-alpha gains finite.
MIN_NODE_SEPARATION = 1.0
_PLACEMENT_ATTEMPTS = 500


class PlacementError(RuntimeError):
    """Random deployment could not satisfy the minimum node separation."""


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    a = math.remainder(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class AntennaArray:
    """Element offsets (N, 2) in meters relative to the RRU reference point."""

    offsets: np.ndarray

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float)
        if offsets.ndim != 2 or offsets.shape[1] != 2 or offsets.shape[0] < 1:
            raise ValueError(f"offsets must have shape (N, 2), got {offsets.shape}")
        object.__setattr__(self, "offsets", offsets)

    @property
    def n_elements(self) -> int:
        return self.offsets.shape[0]

    @property
    def centroid(self) -> np.ndarray:
        return self.offsets.mean(axis=0)


def half_wavelength_ula(n_elements: int, wavelength: float, orientation: float) -> AntennaArray:
    """Centered uniform linear array with lambda/2 spacing along `orientation`."""
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    axis = np.array([math.cos(orientation), math.sin(orientation)])
    idx = np.arange(n_elements) - (n_elements - 1) / 2.0
    offsets = idx[:, None] * (wavelength / 2.0) * axis[None, :]
    return AntennaArray(offsets=offsets)


@dataclass(frozen=True)
class Rru:
    position: np.ndarray  # (2,)
    orientation: float
    array: AntennaArray


@dataclass
class NetworkLayout:
    """RRUs (split into downlink and uplink halves), user terminals and one target."""

    dl_rrus: list
    ul_rrus: list
    dl_users: np.ndarray  # (K_dl, 2)
    ul_users: np.ndarray  # (K_ul, 2)
    target: np.ndarray    # (2,)
    wavelength: float

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        pts = self.node_positions()
        if not np.all(np.isfinite(pts)):
            raise ValueError("layout contains non-finite coordinates")
        for rru in self.dl_rrus + self.ul_rrus:
            d = np.linalg.norm(rru.position - self.target)
            if d == 0.0:
                raise ValueError("target coincides with an RRU position")

    @property
    def m_dl(self) -> int:
        return len(self.dl_rrus)

    @property
    def m_ul(self) -> int:
        return len(self.ul_rrus)

    @property
    def k_dl(self) -> int:
        return self.dl_users.shape[0]

    @property
    def k_ul(self) -> int:
        return self.ul_users.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.dl_rrus[0].array.n_elements

    def node_positions(self) -> np.ndarray:
        """All node coordinates stacked, RRUs first, then users, then the target."""
        rows = [r.position for r in self.dl_rrus + self.ul_rrus]
        rows.extend(self.dl_users)
        rows.extend(self.ul_users)
        rows.append(self.target)
        return np.asarray(rows, dtype=float)

    def with_target(self, target) -> "NetworkLayout":
        """Copy of the layout with the target moved (RRUs and users unchanged)."""
        return NetworkLayout(
            dl_rrus=self.dl_rrus,
            ul_rrus=self.ul_rrus,
            dl_users=self.dl_users,
            ul_users=self.ul_users,
            target=np.asarray(target, dtype=float),
            wavelength=self.wavelength,
        )

    # -- serialization ------------------------------------------------------

    def to_document(self) -> dict:
        nodes = []
        for kind, rrus in (("dl_rru", self.dl_rrus), ("ul_rru", self.ul_rrus)):
            for r in rrus:
                nodes.append({
                    "kind": kind,
                    "x": float(r.position[0]),
                    "y": float(r.position[1]),
                    "orientation": float(r.orientation),
                })
        for kind, users in (("dl_user", self.dl_users), ("ul_user", self.ul_users)):
            for p in users:
                nodes.append({"kind": kind, "x": float(p[0]), "y": float(p[1])})
        nodes.append({"kind": "target", "x": float(self.target[0]), "y": float(self.target[1])})
        return {
            "schema": "nafd-isac-layout/1",
            "wavelength": float(self.wavelength),
            "n_antennas": int(self.n_antennas),
            "nodes": nodes,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "NetworkLayout":
        if doc.get("schema") != "nafd-isac-layout/1":
            raise ValueError(f"unsupported layout schema: {doc.get('schema')!r}")
        wavelength = float(doc["wavelength"])
        n_ant = int(doc["n_antennas"])
        dl_rrus, ul_rrus, dl_users, ul_users, target = [], [], [], [], None
        for node in doc["nodes"]:
            kind = node["kind"]
            pos = np.array([node["x"], node["y"]], dtype=float)
            if kind in ("dl_rru", "ul_rru"):
                ori = float(node["orientation"])
                rru = Rru(position=pos, orientation=ori,
                          array=half_wavelength_ula(n_ant, wavelength, ori))
                (dl_rrus if kind == "dl_rru" else ul_rrus).append(rru)
            elif kind == "dl_user":
                dl_users.append(pos)
            elif kind == "ul_user":
                ul_users.append(pos)
            elif kind == "target":
                target = pos
            else:
                raise ValueError(f"unknown node kind: {kind!r}")
        if target is None:
            raise ValueError("layout document has no target node")
        return cls(
            dl_rrus=dl_rrus,
            ul_rrus=ul_rrus,
            dl_users=np.asarray(dl_users, dtype=float).reshape(-1, 2),
            ul_users=np.asarray(ul_users, dtype=float).reshape(-1, 2),
            target=target,
            wavelength=wavelength,
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_document(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NetworkLayout":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))


# -- deployments ------------------------------------------------------------


def _draw_in_disk(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * math.sqrt(rng.random())
    ang = 2.0 * math.pi * rng.random()
    return np.array([r * math.cos(ang), r * math.sin(ang)])


def _place_separated(rng, radius, taken, label, min_sep=MIN_NODE_SEPARATION):
    for _ in range(_PLACEMENT_ATTEMPTS):
        p = _draw_in_disk(rng, radius)
        if all(np.linalg.norm(p - q) >= min_sep for q in taken):
            taken.append(p)
            return p
    raise PlacementError(
        f"could not place {label} with {min_sep} m separation "
        f"inside radius {radius} m after {_PLACEMENT_ATTEMPTS} attempts"
    )


def make_circle_deployment(m_total: int, circle_radius: float, k_ul: int, k_dl: int,
                           region_radius: float, seed, *, n_antennas: int = 16,
                           wavelength: float = SPEED_OF_LIGHT / 3.5e9) -> NetworkLayout:
    """Equally spaced RRUs on a circle, alternating DL/UL, users and target in a disk.

    RRU j sits at angle 2*pi*j/m_total; even j serve downlink, odd j uplink.
    Each RRU carries a centered lambda/2 ULA oriented tangentially to the circle.
    Users and the target are drawn uniformly in the disk of `region_radius`,
    resampled until every node pair is at least MIN_NODE_SEPARATION apart.
    """
    if m_total <= 0 or m_total % 2 != 0:
        raise ValueError(f"m_total must be a positive even count, got {m_total}")
    if circle_radius <= 0.0:
        raise ValueError(f"circle_radius must be positive, got {circle_radius}")
    if region_radius <= 0.0:
        raise ValueError(f"region_radius must be positive, got {region_radius}")
    rng = np.random.default_rng(seed)
    dl_rrus, ul_rrus, taken = [], [], []
    for j in range(m_total):
        ang = 2.0 * math.pi * j / m_total
        pos = circle_radius * np.array([math.cos(ang), math.sin(ang)])
        ori = wrap_angle(ang + math.pi / 2.0)  # tangential to the circle
        rru = Rru(position=pos, orientation=ori,
                  array=half_wavelength_ula(n_antennas, wavelength, ori))
        (dl_rrus if j % 2 == 0 else ul_rrus).append(rru)
        taken.append(pos)
    dl_users = [_place_separated(rng, region_radius, taken, f"dl_user {i}") for i in range(k_dl)]
    ul_users = [_place_separated(rng, region_radius, taken, f"ul_user {i}") for i in range(k_ul)]
    target = _place_separated(rng, region_radius, taken, "target")
    return NetworkLayout(
        dl_rrus=dl_rrus,
        ul_rrus=ul_rrus,
        dl_users=np.asarray(dl_users).reshape(-1, 2),
        ul_users=np.asarray(ul_users).reshape(-1, 2),
        target=target,
        wavelength=wavelength,
    )


def make_random_deployment(m_total: int, k_ul: int, k_dl: int, region_radius: float,
                           seed, *, n_antennas: int = 16,
                           wavelength: float = SPEED_OF_LIGHT / 3.5e9) -> NetworkLayout:
    """All nodes drawn uniformly in the disk; RRU array orientations random."""
    if m_total <= 0 or m_total % 2 != 0:
        raise ValueError(f"m_total must be a positive even count, got {m_total}")
    if region_radius <= 0.0:
        raise ValueError(f"region_radius must be positive, got {region_radius}")
    rng = np.random.default_rng(seed)
    taken = []
    dl_rrus, ul_rrus = [], []
    for j in range(m_total):
        kind = "dl_rru" if j % 2 == 0 else "ul_rru"
        pos = _place_separated(rng, region_radius, taken, f"{kind} {j // 2}")
        ori = wrap_angle(2.0 * math.pi * rng.random())
        rru = Rru(position=pos, orientation=ori,
                  array=half_wavelength_ula(n_antennas, wavelength, ori))
        (dl_rrus if j % 2 == 0 else ul_rrus).append(rru)
    dl_users = [_place_separated(rng, region_radius, taken, f"dl_user {i}") for i in range(k_dl)]
    ul_users = [_place_separated(rng, region_radius, taken, f"ul_user {i}") for i in range(k_ul)]
    target = _place_separated(rng, region_radius, taken, "target")
    return NetworkLayout(
        dl_rrus=dl_rrus,
        ul_rrus=ul_rrus,
        dl_users=np.asarray(dl_users).reshape(-1, 2),
        ul_users=np.asarray(ul_users).reshape(-1, 2),
        target=target,
        wavelength=wavelength,
    )


# -- bistatic target paths --------------------------------------------------


@dataclass(frozen=True)
class BistaticGeometry:
    """One transmit RRU -> target -> receive RRU path.

    d_tx: transmitter-to-target range, d_rx: target-to-receiver range,
    d_sum: bistatic range d_tx + d_rx. dod is the departure direction at the
    transmitter toward the target; doa is the look direction from the receiver
    toward the target.
    """

    d_tx: float
    d_rx: float
    d_sum: float
    dod: float
    doa: float


def bistatic_geometry(layout: NetworkLayout, m: int, n: int) -> BistaticGeometry:
    """Bistatic path from DL-RRU m via the target to UL-RRU n."""
    tx = layout.dl_rrus[m].position
    rx = layout.ul_rrus[n].position
    return bistatic_geometry_for_point(tx, rx, layout.target)


def bistatic_geometry_for_point(tx_pos, rx_pos, target) -> BistaticGeometry:
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    tgt = np.asarray(target, dtype=float)
    d_tx = float(np.linalg.norm(tgt - tx))
    d_rx = float(np.linalg.norm(tgt - rx))
    if d_tx == 0.0 or d_rx == 0.0:
        raise ValueError("target coincides with an RRU: bistatic geometry is singular")
    dod = wrap_angle(math.atan2(tgt[1] - tx[1], tgt[0] - tx[0]))
    doa = wrap_angle(math.atan2(tgt[1] - rx[1], tgt[0] - rx[0]))
    return BistaticGeometry(d_tx=d_tx, d_rx=d_rx, d_sum=d_tx + d_rx, dod=dod, doa=doa)


def steering_vector(array: AntennaArray, angle: float, wavelength: float) -> np.ndarray:
    """Narrowband plane-wave response exp(-j*2*pi*k.q/lambda) per element."""
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    k = np.array([math.cos(angle), math.sin(angle)])
    phase = -2.0 * math.pi * (array.offsets @ k) / wavelength
    return np.exp(1j * phase)


def steering_vectors(geom: BistaticGeometry, tx_array: AntennaArray,
                     rx_array: AntennaArray, wavelength: float):
    """Transmit (departure) and receive (arrival) steering vectors for a path."""
    a = steering_vector(tx_array, geom.dod, wavelength)
    b = steering_vector(rx_array, geom.doa, wavelength)
    return a, b
