"""Event ingestion and hit-graph construction.

Pipeline: load CSV triplet -> select barrel hits -> build doublets under the
geometric cuts -> truth-label edges -> section into 16 (8 phi x 2 z) subgraphs.
"""

from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DataError, ParseError, SchemaError

BARREL_VOLUMES = (8, 13, 17)
N_PHI_SECTORS = 8
N_Z_HALVES = 2
_WEDGE = math.pi / 4.0


@dataclass
class Hit:
    hit_id: int
    x: float
    y: float
    z: float
    volume_id: int
    layer_id: int
    r: float = field(init=False)
    phi: float = field(init=False)
    layer_index: int = -1

    def __post_init__(self) -> None:
        self.r = math.hypot(self.x, self.y)
        self.phi = math.atan2(self.y, self.x)


@dataclass
class Particle:
    particle_id: int
    px: float
    py: float
    pz: float

    @property
    def pt(self) -> float:
        return math.hypot(self.px, self.py)


@dataclass
class Event:
    hits: List[Hit]
    truth: Dict[int, int]  # hit_id -> particle_id (0 = noise)
    particles: Dict[int, Particle]


@dataclass
class SelectionCuts:
    """Doublet selection criteria; defaults follow the standard loose cuts."""

    pt_min: float = 1.0
    dphi_slope_max: float = 0.0006  # rad/mm in slope mode, rad in raw mode
    z0_max: float = 100.0
    eta_range: Tuple[float, float] = (-5.0, 5.0)
    cut_mode: str = "slope"  # "slope": |dphi|/dr, "raw": |dphi|
    pt_mode: str = "label"  # "label": pt cut at labeling, "filter": drop hits

    def __post_init__(self) -> None:
        if self.pt_min <= 0 or self.dphi_slope_max <= 0 or self.z0_max <= 0:
            raise ValueError("cut values must be positive")
        if self.eta_range[0] >= self.eta_range[1]:
            raise ValueError("eta_range must be an increasing pair")
        if self.cut_mode not in ("slope", "raw"):
            raise ValueError(f"unknown cut_mode {self.cut_mode!r}")
        if self.pt_mode not in ("label", "filter"):
            raise ValueError(f"unknown pt_mode {self.pt_mode!r}")


@dataclass
class Doublet:
    src_hit: int  # hit id of the inner hit (smaller r)
    dst_hit: int
    dphi: float
    dz: float
    dr: float
    z0: float
    eta: float
    label: Optional[bool] = None


@dataclass
class SubGraph:
    event_id: int
    sector: Tuple[int, int]  # (phi sector 0..7, z half 0..1)
    nodes: List[Tuple[float, float, float]]  # (r, phi, z) by local id
    edges: List[Tuple[int, int, int]]  # (src local, dst local, label 0/1)


@dataclass
class DoubletStats:
    pairs_considered: int = 0
    zero_dr_skipped: int = 0


@dataclass
class LabelStats:
    missing_truth: int = 0


# --- CSV loading -------------------------------------------------------------


def _read_rows(path: str, required: Sequence[str]) -> List[Dict[str, float]]:
    if not os.path.exists(path):
        raise IOError(f"no such file: {path}")
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing column '{col}'")
        for lineno, row in enumerate(reader, start=2):
            parsed = {}
            for col in required:
                cell = row[col]
                try:
                    parsed[col] = float(cell)
                except (TypeError, ValueError):
                    raise ParseError(
                        f"{path}:{lineno}: non-numeric value {cell!r} "
                        f"in column '{col}'"
                    )
            rows.append(parsed)
    return rows


def load_event(hits_path: str, particles_path: str, truth_path: str) -> Event:
    """Load a TrackML-convention CSV triplet into an Event."""
    hit_rows = _read_rows(
        hits_path, ["hit_id", "x", "y", "z", "volume_id", "layer_id"]
    )
    particle_rows = _read_rows(particles_path, ["particle_id", "px", "py", "pz"])
    truth_rows = _read_rows(truth_path, ["hit_id", "particle_id"])

    hits = [
        Hit(
            hit_id=int(r["hit_id"]),
            x=r["x"],
            y=r["y"],
            z=r["z"],
            volume_id=int(r["volume_id"]),
            layer_id=int(r["layer_id"]),
        )
        for r in hit_rows
    ]
    particles = {
        int(r["particle_id"]): Particle(
            int(r["particle_id"]), r["px"], r["py"], r["pz"]
        )
        for r in particle_rows
    }
    truth = {int(r["hit_id"]): int(r["particle_id"]) for r in truth_rows}
    return Event(hits=hits, truth=truth, particles=particles)


# --- selection and doublet building -----------------------------------------


def select_barrel_hits(event: Event) -> List[Hit]:
    """Keep barrel-volume hits and assign layer_index 0..N-1 by mean radius."""
    kept = [h for h in event.hits if h.volume_id in BARREL_VOLUMES]
    groups: Dict[Tuple[int, int], List[Hit]] = {}
    for h in kept:
        groups.setdefault((h.volume_id, h.layer_id), []).append(h)
    ordered = sorted(
        groups, key=lambda key: sum(h.r for h in groups[key]) / len(groups[key])
    )
    index = {key: i for i, key in enumerate(ordered)}
    for h in kept:
        h.layer_index = index[(h.volume_id, h.layer_id)]
    return kept


def wrap_phi(dphi: float) -> float:
    """Wrap an angle difference into (-pi, pi]."""
    while dphi <= -math.pi:
        dphi += 2.0 * math.pi
    while dphi > math.pi:
        dphi -= 2.0 * math.pi
    return dphi


def doublet_geometry(src: Hit, dst: Hit) -> Tuple[float, float, float, float, float]:
    """(dphi, dz, dr, z0, eta) for an inner->outer hit pair; dr must be > 0."""
    dphi = wrap_phi(dst.phi - src.phi)
    dz = dst.z - src.z
    dr = dst.r - src.r
    z0 = src.z - src.r * (dz / dr)
    theta = math.atan2(dr, dz)
    eta = -math.log(math.tan(theta / 2.0))
    return dphi, dz, dr, z0, eta


def passes_cuts(d: Doublet, cuts: SelectionCuts) -> bool:
    if cuts.cut_mode == "slope":
        if abs(d.dphi) / d.dr >= cuts.dphi_slope_max:
            return False
    else:
        if abs(d.dphi) >= cuts.dphi_slope_max:
            return False
    if abs(d.z0) >= cuts.z0_max:
        return False
    return cuts.eta_range[0] <= d.eta <= cuts.eta_range[1]


def build_doublets(
    hits: Sequence[Hit], cuts: SelectionCuts
) -> Tuple[List[Doublet], DoubletStats]:
    """All consecutive-layer hit pairs that survive the geometric cuts."""
    layers: Dict[int, List[Hit]] = {}
    for h in hits:
        if h.layer_index < 0:
            raise DataError(f"hit {h.hit_id} has no layer_index; select first")
        layers.setdefault(h.layer_index, []).append(h)

    stats = DoubletStats()
    doublets: List[Doublet] = []
    for k in sorted(layers):
        if k + 1 not in layers:
            continue
        for inner in layers[k]:
            for outer in layers[k + 1]:
                stats.pairs_considered += 1
                src, dst = (inner, outer) if inner.r <= outer.r else (outer, inner)
                if dst.r == src.r:
                    stats.zero_dr_skipped += 1
                    continue
                dphi, dz, dr, z0, eta = doublet_geometry(src, dst)
                d = Doublet(src.hit_id, dst.hit_id, dphi, dz, dr, z0, eta)
                if passes_cuts(d, cuts):
                    doublets.append(d)
    return doublets, stats


def label_edges(
    doublets: Sequence[Doublet],
    truth: Dict[int, int],
    particles: Dict[int, Particle],
    cuts: SelectionCuts,
) -> Tuple[List[Doublet], LabelStats]:
    """Set each doublet's truth label in place.

    True iff both hits map to the same non-noise particle whose pt exceeds
    cuts.pt_min. Hits missing from the truth map count as noise.
    """
    stats = LabelStats()
    for d in doublets:
        pid_a = truth.get(d.src_hit)
        pid_b = truth.get(d.dst_hit)
        if pid_a is None or pid_b is None:
            stats.missing_truth += 1
            d.label = False
            continue
        if pid_a != pid_b or pid_a == 0:
            d.label = False
            continue
        particle = particles.get(pid_a)
        d.label = particle is not None and particle.pt > cuts.pt_min
    return list(doublets), stats


def filter_low_pt_hits(
    hits: Sequence[Hit],
    truth: Dict[int, int],
    particles: Dict[int, Particle],
    pt_min: float,
) -> List[Hit]:
    """Stricter pt_mode="filter" variant: drop hits whose particle has
    pt <= pt_min. Noise hits (particle 0 or missing truth) are kept."""
    kept = []
    for h in hits:
        pid = truth.get(h.hit_id, 0)
        if pid == 0:
            kept.append(h)
            continue
        particle = particles.get(pid)
        if particle is None or particle.pt > pt_min:
            kept.append(h)
    return kept


# --- sectioning --------------------------------------------------------------


def sector_of(phi: float, z: float) -> Tuple[int, int]:
    """Sector of a hit: phi wedge [-pi + k*pi/4, -pi + (k+1)*pi/4), z half
    z < 0 / z >= 0. phi == pi wraps to the -pi boundary (sector 0)."""
    k = int((phi + math.pi) // _WEDGE)
    if k >= N_PHI_SECTORS:
        k = 0
    return k, 0 if z < 0 else 1


def section_graph(
    hits: Sequence[Hit], doublets: Sequence[Doublet], event_id: int = 0
) -> Tuple[List[SubGraph], int]:
    """Split one event into exactly 16 SubGraphs.

    Returns the subgraphs and the number of cross-sector edges dropped.
    """
    subgraphs = [
        SubGraph(event_id, (p, zh), [], [])
        for p in range(N_PHI_SECTORS)
        for zh in range(N_Z_HALVES)
    ]
    by_sector = {g.sector: g for g in subgraphs}

    local: Dict[int, Tuple[Tuple[int, int], int]] = {}
    for h in hits:
        sec = sector_of(h.phi, h.z)
        g = by_sector[sec]
        local[h.hit_id] = (sec, len(g.nodes))
        g.nodes.append((h.r, h.phi, h.z))

    dropped = 0
    for d in doublets:
        sec_a, src = local[d.src_hit]
        sec_b, dst = local[d.dst_hit]
        if sec_a != sec_b:
            dropped += 1
            continue
        by_sector[sec_a].edges.append((src, dst, int(bool(d.label))))
    return subgraphs, dropped


# --- subgraph serialization --------------------------------------------------

_DIR_RE = re.compile(r"^evt(\d+)_s(\d)(\d)$")


def subgraph_dirname(g: SubGraph) -> str:
    return f"evt{g.event_id}_s{g.sector[0]}{g.sector[1]}"


def write_subgraph(g: SubGraph, root: str) -> str:
    """Write nodes.csv and edges.csv under root/evt<ID>_s<PHI><Z>/."""
    path = os.path.join(root, subgraph_dirname(g))
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "nodes.csv"), "w", encoding="utf-8") as fh:
        fh.write("local_id,r,phi,z\n")
        for i, (r, phi, z) in enumerate(g.nodes):
            fh.write(f"{i},{float(r)!r},{float(phi)!r},{float(z)!r}\n")
    with open(os.path.join(path, "edges.csv"), "w", encoding="utf-8") as fh:
        fh.write("src,dst,label\n")
        for src, dst, label in g.edges:
            fh.write(f"{src},{dst},{label}\n")
    return path


def read_subgraph(path: str) -> SubGraph:
    """Inverse of write_subgraph; exact round trip."""
    name = os.path.basename(os.path.normpath(path))
    m = _DIR_RE.match(name)
    if not m:
        raise ParseError(f"{path}: directory name not of form evt<ID>_s<PHI><Z>")
    event_id, phi_sector, z_half = (int(s) for s in m.groups())

    nodes: List[Tuple[float, float, float]] = []
    nodes_path = os.path.join(path, "nodes.csv")
    with open(nodes_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.rstrip("\n")
            if lineno == 1:
                if text != "local_id,r,phi,z":
                    raise ParseError(f"{nodes_path}:1: bad header {text!r}")
                continue
            parts = text.split(",")
            if len(parts) != 4:
                raise ParseError(f"{nodes_path}:{lineno}: expected 4 fields")
            try:
                local_id = int(parts[0])
                r, phi, z = (float(p) for p in parts[1:])
            except ValueError as exc:
                raise ParseError(f"{nodes_path}:{lineno}: {exc}") from exc
            if local_id != len(nodes):
                raise ParseError(
                    f"{nodes_path}:{lineno}: local_id {local_id} out of order"
                )
            nodes.append((r, phi, z))

    edges: List[Tuple[int, int, int]] = []
    edges_path = os.path.join(path, "edges.csv")
    with open(edges_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.rstrip("\n")
            if lineno == 1:
                if text != "src,dst,label":
                    raise ParseError(f"{edges_path}:1: bad header {text!r}")
                continue
            parts = text.split(",")
            if len(parts) != 3:
                raise ParseError(f"{edges_path}:{lineno}: expected 3 fields")
            try:
                src, dst, label = (int(p) for p in parts)
            except ValueError as exc:
                raise ParseError(f"{edges_path}:{lineno}: {exc}") from exc
            if not (0 <= src < len(nodes) and 0 <= dst < len(nodes)):
                raise ParseError(
                    f"{edges_path}:{lineno}: edge endpoint out of range"
                )
            if label not in (0, 1):
                raise ParseError(f"{edges_path}:{lineno}: label must be 0 or 1")
            edges.append((src, dst, label))

    return SubGraph(event_id, (phi_sector, z_half), nodes, edges)
