"""Distance-d planar code geometry and its dual classical-spin lattice.

The code has rough (left/right) boundaries where the classical spins are glued
into single sites, and smooth (top/bottom) boundaries realized as the free
ends of the transfer sweep.  Qubits sit on the bonds of the spin lattice,
arranged in 2d-1 brickwork rows: even rows hold d horizontal qubits, odd rows
hold d-1 vertical qubits, giving N = d^2 + (d-1)^2.

Each bond is assigned a fixed slot on the effective transfer chain of
2d+2 sites: a horizontal qubit in column c acts on chain pair (2c+1, 2c+2),
a vertical one on (2c+2, 2c+3).  Every other module keys off this layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

ORIENT_H = "horizontal"
ORIENT_V = "vertical"

#: canonical spin ids for the two glued rough boundaries
SPIN_LEFT = 0
SPIN_RIGHT = 1


@dataclass(frozen=True)
class QubitSite:
    index: int
    row: int  # brickwork row, 0..2d-2 top to bottom
    col: int
    orientation: str


@dataclass(frozen=True)
class PlanarCodeLattice:
    d: int
    qubit_sites: tuple
    bonds: tuple  # bonds[q] = (spin_i, spin_j)
    n_spins: int
    contraction_rows: tuple  # rows of (bond_id, orientation), top to bottom
    chain_positions: tuple  # chain_positions[q] = left chain site of the gate
    rough_boundaries: tuple = ("left", "right")
    smooth_boundaries: tuple = ("top", "bottom")
    parent: Optional["PlanarCodeLattice"] = field(default=None, repr=False, compare=False)

    @property
    def n_qubits(self) -> int:
        return len(self.bonds)

    @property
    def slice_width(self) -> int:
        """Number of effective chain sites per transfer slice."""
        return 2 * self.d + 2

    def orientation(self, q: int) -> str:
        return self.qubit_sites[q].orientation

    def horizontal_qubits(self):
        return [s.index for s in self.qubit_sites if s.orientation == ORIENT_H]

    def vertical_qubits(self):
        return [s.index for s in self.qubit_sites if s.orientation == ORIENT_V]

    def plaquettes(self):
        """Qubit supports of the faces of the spin lattice.

        Faces live between spin rows R,R+1 and spin columns C,C+1; the two
        faces touching a glued boundary are triangles.  Bond-sign products
        around these faces are the gauge-invariant frustration pattern.
        """
        d = self.d
        faces = []
        for R in range(d - 1):
            for C in range(d):
                qs = [_h_id(d, R, C), _h_id(d, R + 1, C)]
                if C >= 1:
                    qs.append(_v_id(d, R, C - 1))
                if C <= d - 2:
                    qs.append(_v_id(d, R, C))
                faces.append(tuple(sorted(qs)))
        return faces

    def interior_stars(self):
        """Qubit supports of the stars of interior spins (X-type checks)."""
        star = {}
        for q, (i, j) in enumerate(self.bonds):
            for sp in (i, j):
                if sp not in (SPIN_LEFT, SPIN_RIGHT):
                    star.setdefault(sp, []).append(q)
        return [tuple(sorted(v)) for _, v in sorted(star.items())]

    def boundary_star(self, side: str):
        """All qubits adjacent to one glued boundary spin (a logical X string)."""
        sp = SPIN_LEFT if side == "left" else SPIN_RIGHT
        return tuple(q for q, (i, j) in enumerate(self.bonds) if sp in (i, j))

    def top_row_qubits(self):
        """Horizontal qubits of the top row (a logical Z string)."""
        return tuple(q for q in range(self.d))


def _h_id(d: int, R: int, C: int) -> int:
    """Qubit id of the horizontal bond in spin row R between columns C, C+1."""
    return R * (2 * d - 1) + C


def _v_id(d: int, R: int, C: int) -> int:
    """Qubit id of the vertical bond below spin row R at interior column C+1."""
    return R * (2 * d - 1) + d + C


def _interior_spin(d: int, R: int, C: int) -> int:
    """Spin id at row R, column C (1 <= C <= d-1)."""
    return 2 + R * (d - 1) + (C - 1)


def _spin_id(d: int, R: int, C: int) -> int:
    if C == 0:
        return SPIN_LEFT
    if C == d:
        return SPIN_RIGHT
    return _interior_spin(d, R, C)


def build_planar_code(d: int) -> PlanarCodeLattice:
    """Construct the distance-d planar code lattice with its dual-spin bonds."""
    if d < 2:
        raise ValueError(f"code distance d={d} must be >= 2")
    sites = []
    bonds = []
    chain_pos = []
    rows = []
    for r in range(2 * d - 1):
        row = []
        if r % 2 == 0:
            R = r // 2
            for C in range(d):
                q = len(bonds)
                assert q == _h_id(d, R, C)
                sites.append(QubitSite(q, r, C, ORIENT_H))
                bonds.append((_spin_id(d, R, C), _spin_id(d, R, C + 1)))
                chain_pos.append(2 * C + 1)
                row.append((q, ORIENT_H))
        else:
            R = (r - 1) // 2
            for C in range(d - 1):
                q = len(bonds)
                assert q == _v_id(d, R, C)
                sites.append(QubitSite(q, r, C, ORIENT_V))
                bonds.append((_interior_spin(d, R, C + 1), _interior_spin(d, R + 1, C + 1)))
                chain_pos.append(2 * C + 2)
                row.append((q, ORIENT_V))
        rows.append(tuple(row))
    lat = PlanarCodeLattice(
        d=d,
        qubit_sites=tuple(sites),
        bonds=tuple(bonds),
        n_spins=d * (d - 1) + 2,
        contraction_rows=tuple(rows),
        chain_positions=tuple(chain_pos),
    )
    assert lat.n_qubits == d * d + (d - 1) * (d - 1)
    return lat


def dual_lattice(lat: PlanarCodeLattice) -> PlanarCodeLattice:
    """Kramers-Wannier dual: spins move to the faces, orientations swap.

    The dual of the horizontal bond H(R, C) is the vertical crossing bond that
    connects the faces above and below it; in the dual sweep frame (rotated a
    quarter turn so its glued boundaries are again left/right) it occupies the
    diagonal slot at row C, column R.  Duals of vertical bonds land in the
    off-diagonal slots the same way.  Applying the map twice returns the
    original lattice object.
    """
    if lat.parent is not None:
        return lat.parent
    d = lat.d

    def dual_spin(R: int, C: int) -> int:
        # face between spin rows R, R+1 in column band C, in dual-frame ids
        if R < 0:
            return SPIN_LEFT  # original top boundary
        if R > d - 2:
            return SPIN_RIGHT  # original bottom boundary
        return 2 + C * (d - 1) + R

    sites = [None] * lat.n_qubits
    bonds = [None] * lat.n_qubits
    chain_pos = [0] * lat.n_qubits
    rows = []
    for rp in range(2 * d - 1):
        row = []
        if rp % 2 == 0:
            Rp = rp // 2
            for Cp in range(d):
                # dual-frame diagonal slot (Rp, Cp) holds the dual of H(Cp, Rp)
                q = _h_id(d, Cp, Rp)
                sites[q] = QubitSite(q, rp, Cp, ORIENT_V)
                bonds[q] = (dual_spin(Cp - 1, Rp), dual_spin(Cp, Rp))
                chain_pos[q] = 2 * Cp + 1
                row.append((q, ORIENT_V))
        else:
            Rp = (rp - 1) // 2
            for Cp in range(d - 1):
                q = _v_id(d, Cp, Rp)
                sites[q] = QubitSite(q, rp, Cp, ORIENT_H)
                bonds[q] = (dual_spin(Cp, Rp), dual_spin(Cp, Rp + 1))
                chain_pos[q] = 2 * Cp + 2
                row.append((q, ORIENT_H))
        rows.append(tuple(row))
    return PlanarCodeLattice(
        d=d,
        qubit_sites=tuple(sites),
        bonds=tuple(bonds),
        n_spins=d * (d - 1) + 2,
        contraction_rows=tuple(rows),
        chain_positions=tuple(chain_pos),
        rough_boundaries=lat.smooth_boundaries,
        smooth_boundaries=lat.rough_boundaries,
        parent=lat,
    )


def lattice_dump(lat: PlanarCodeLattice) -> str:
    """Human-readable site and bond tables for debugging."""
    lines = [
        f"planar code d={lat.d}: {lat.n_qubits} qubits, {lat.n_spins} spins, "
        f"slice width {lat.slice_width}",
        f"rough boundaries: {lat.rough_boundaries}, smooth: {lat.smooth_boundaries}",
        "site  row col orient      spin_i spin_j chain",
    ]
    for s in lat.qubit_sites:
        i, j = lat.bonds[s.index]
        lines.append(
            f"{s.index:4d} {s.row:4d} {s.col:3d} {s.orientation:11s} "
            f"{i:5d} {j:6d} {lat.chain_positions[s.index]:5d}"
        )
    return "\n".join(lines)
