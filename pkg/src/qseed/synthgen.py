"""Synthetic event generator: helical tracks through an ideal 10-layer barrel.

Emits the same CSV triplet (hits, particles, truth) that hitgraph.load_event
consumes, so the full pipeline runs without any external dataset. Output is a
pure function of the config: same seed, byte-identical files.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

# Approximate barrel layer radii in mm, innermost first.
DEFAULT_LAYER_RADII = (32.0, 72.0, 116.0, 172.0, 260.0, 360.0, 500.0, 660.0, 820.0, 1020.0)

# Layer index -> (volume_id, layer_id); volumes 8/13/17 mimic the barrel split.
def _volume_layer(layer_index: int) -> Tuple[int, int]:
    if layer_index < 4:
        return 8, 2 * layer_index + 2
    if layer_index < 8:
        return 13, 2 * (layer_index - 4) + 2
    return 17, 2 * (layer_index - 8) + 2


# |dz/ds| bound, roughly |eta| <~ 1.5
_TAN_LAMBDA_MAX = 2.1
_NOISE_Z_MAX = 1100.0


@dataclass
class GeneratorConfig:
    n_tracks: int = 20
    pt_range: Tuple[float, float] = (1.0, 5.0)
    noise_hits: int = 0
    b_field: float = 2.0  # tesla, along z
    layer_radii: Tuple[float, ...] = DEFAULT_LAYER_RADII
    z0_spread: float = 30.0  # mm, gaussian z-vertex spread
    smear_sigma: float = 0.0  # mm, optional gaussian hit smearing
    seed: int = 0

    def __post_init__(self) -> None:
        radii = tuple(self.layer_radii)
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("layer radii must be strictly increasing")
        if self.pt_range[0] <= 0 or self.pt_range[1] < self.pt_range[0]:
            raise ValueError("pt_range must be positive and ordered")
        if self.n_tracks < 0 or self.noise_hits < 0:
            raise ValueError("counts must be non-negative")
        self.layer_radii = radii


@dataclass
class EventData:
    """Row lists ready for CSV serialization."""

    hits: List[Tuple[int, float, float, float, int, int]]
    particles: List[Tuple[int, float, float, float]]
    truth: List[Tuple[int, int]]


def helix_radius_mm(pt: float, b_field: float) -> float:
    """Bending radius of a pt GeV track in a b_field tesla solenoid."""
    return pt / (0.3 * b_field) * 1000.0


def gen_event(cfg: GeneratorConfig) -> EventData:
    """Generate one event: helical signal tracks plus uniform noise hits.

    Track model: transverse circle of radius R through the origin, constant
    pitch in z. A layer is hit where the circle first crosses the layer
    cylinder; layers beyond the helix reach (2R < layer radius) get no hit.
    """
    rng = np.random.default_rng(cfg.seed)
    hits: List[Tuple[int, float, float, float, int, int]] = []
    particles: List[Tuple[int, float, float, float]] = []
    truth: List[Tuple[int, int]] = []
    hit_id = 1

    for track in range(cfg.n_tracks):
        particle_id = track + 1
        charge = 1.0 if rng.random() < 0.5 else -1.0
        pt = float(rng.uniform(cfg.pt_range[0], cfg.pt_range[1]))
        phi0 = float(rng.uniform(-math.pi, math.pi))
        z_vertex = float(rng.normal(0.0, cfg.z0_spread))
        tan_lambda = float(rng.uniform(-_TAN_LAMBDA_MAX, _TAN_LAMBDA_MAX))

        particles.append(
            (particle_id, pt * math.cos(phi0), pt * math.sin(phi0), pt * tan_lambda)
        )

        radius = helix_radius_mm(pt, cfg.b_field)
        # circle center perpendicular to the initial direction
        cx = -charge * radius * math.sin(phi0)
        cy = charge * radius * math.cos(phi0)
        alpha = math.atan2(cy, cx)

        for layer_index, layer_r in enumerate(cfg.layer_radii):
            half_chord = layer_r / (2.0 * radius)
            if half_chord > 1.0:
                continue  # helix never reaches this layer
            # asin form stays precise in the straight-line (large radius) limit
            turn = 2.0 * math.asin(half_chord)
            psi = alpha + math.pi + charge * turn
            x = cx + radius * math.cos(psi)
            y = cy + radius * math.sin(psi)
            z = z_vertex + tan_lambda * radius * turn
            if cfg.smear_sigma > 0.0:
                x += float(rng.normal(0.0, cfg.smear_sigma))
                y += float(rng.normal(0.0, cfg.smear_sigma))
                z += float(rng.normal(0.0, cfg.smear_sigma))
            volume_id, layer_id = _volume_layer(layer_index)
            hits.append((hit_id, x, y, z, volume_id, layer_id))
            truth.append((hit_id, particle_id))
            hit_id += 1

    for _ in range(cfg.noise_hits):
        layer_index = int(rng.integers(0, len(cfg.layer_radii)))
        layer_r = cfg.layer_radii[layer_index]
        phi = float(rng.uniform(-math.pi, math.pi))
        z = float(rng.uniform(-_NOISE_Z_MAX, _NOISE_Z_MAX))
        volume_id, layer_id = _volume_layer(layer_index)
        hits.append(
            (hit_id, layer_r * math.cos(phi), layer_r * math.sin(phi), z, volume_id, layer_id)
        )
        truth.append((hit_id, 0))
        hit_id += 1

    return EventData(hits=hits, particles=particles, truth=truth)


def write_event(
    data: EventData, hits_path: str, particles_path: str, truth_path: str
) -> None:
    """Serialize an event to the TrackML-convention CSV triplet."""
    with open(hits_path, "w", encoding="utf-8") as fh:
        fh.write("hit_id,x,y,z,volume_id,layer_id\n")
        for hit_id, x, y, z, vol, lay in data.hits:
            fh.write(f"{hit_id},{x!r},{y!r},{z!r},{vol},{lay}\n")
    with open(particles_path, "w", encoding="utf-8") as fh:
        fh.write("particle_id,px,py,pz\n")
        for pid, px, py, pz in data.particles:
            fh.write(f"{pid},{px!r},{py!r},{pz!r}\n")
    with open(truth_path, "w", encoding="utf-8") as fh:
        fh.write("hit_id,particle_id\n")
        for hit_id, pid in data.truth:
            fh.write(f"{hit_id},{pid}\n")


def event_paths(out_dir: str, event_id: int) -> Tuple[str, str, str]:
    stem = os.path.join(out_dir, f"event{event_id:09d}")
    return f"{stem}-hits.csv", f"{stem}-particles.csv", f"{stem}-truth.csv"
