"""Protein target descriptors computed from the amino-acid sequence.

Implements the classic scalar descriptors (aliphatic index, Boman
interaction index, Henderson-Hasselbalch net charge and isoelectric
point, Guruprasad instability index, molecular weight) plus mean
hydrophobicity over a pluggable registry of published scales and the
400-dimensional dipeptide composition.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .data import AMINO_ACIDS

__all__ = [
    "HydrophobicityScale",
    "HYDROPHOBICITY_SCALES",
    "aliphatic_index",
    "boman_index",
    "net_charge",
    "isoelectric_point",
    "instability_index",
    "hydrophobicity",
    "dipeptide_composition",
    "DIPEPTIDES",
    "sequence_scalars",
    "protein_descriptors",
]

WATER_MASS = 18.01528

# Average masses of the free amino acids (residue mass + one water), in Da.
FREE_AA_MASS = {
    "A": 89.0935, "R": 174.2017, "N": 132.1184, "D": 133.1032, "C": 121.1590,
    "E": 147.1293, "Q": 146.1451, "G": 75.0669, "H": 155.1552, "I": 131.1736,
    "L": 131.1736, "K": 146.1882, "M": 149.2124, "F": 165.1900, "P": 115.1310,
    "S": 105.0930, "T": 119.1197, "W": 204.2262, "Y": 181.1894, "V": 117.1469,
}

# Per-residue solubility values behind the Boman (2003) interaction index.
BOMAN_SCALE = {
    "A": -1.81, "R": 14.92, "N": 6.64, "D": 8.72, "C": -1.28,
    "Q": 5.54, "E": 6.81, "G": -0.94, "H": 4.66, "I": -4.92,
    "L": -4.92, "K": 5.55, "M": -2.35, "F": -2.98, "P": 0.0,
    "S": 3.40, "T": 2.57, "W": -2.33, "Y": 0.14, "V": -4.04,
}

# Lehninger pKa set: termini plus ionizable side chains.
PKA_LEHNINGER = {
    "nterm": 9.69, "cterm": 2.34,
    "D": 3.65, "E": 4.25, "C": 8.18, "Y": 10.07,
    "H": 6.00, "K": 10.53, "R": 12.48,
}
_NEGATIVE_SITES = ("D", "E", "C", "Y")
_POSITIVE_SITES = ("H", "K", "R")


@dataclass(frozen=True)
class HydrophobicityScale:
    """A named map from the 20 canonical residues to scale values."""

    name: str
    values: dict

    def __post_init__(self):
        missing = set(AMINO_ACIDS) - set(self.values)
        if missing:
            raise ValueError(f"scale {self.name!r} missing residues {sorted(missing)}")


HYDROPHOBICITY_SCALES = {
    scale.name: scale
    for scale in (
        HydrophobicityScale("KyteDoolittle", {
            "A": 1.8, "R": -4.5, "N": -3.5, "D": -3.5, "C": 2.5,
            "Q": -3.5, "E": -3.5, "G": -0.4, "H": -3.2, "I": 4.5,
            "L": 3.8, "K": -3.9, "M": 1.9, "F": 2.8, "P": -1.6,
            "S": -0.8, "T": -0.7, "W": -0.9, "Y": -1.3, "V": 4.2,
        }),
        HydrophobicityScale("HoppWoods", {
            "A": -0.5, "R": 3.0, "N": 0.2, "D": 3.0, "C": -1.0,
            "Q": 0.2, "E": 3.0, "G": 0.0, "H": -0.5, "I": -1.8,
            "L": -1.8, "K": 3.0, "M": -1.3, "F": -2.5, "P": 0.0,
            "S": 0.3, "T": -0.4, "W": -3.4, "Y": -2.3, "V": -1.5,
        }),
        HydrophobicityScale("Eisenberg", {
            "A": 0.62, "R": -2.53, "N": -0.78, "D": -0.90, "C": 0.29,
            "Q": -0.85, "E": -0.74, "G": 0.48, "H": -0.40, "I": 1.38,
            "L": 1.06, "K": -1.50, "M": 0.64, "F": 1.19, "P": 0.12,
            "S": -0.18, "T": -0.05, "W": 0.81, "Y": 0.26, "V": 1.08,
        }),
        HydrophobicityScale("Janin", {
            "A": 0.3, "R": -1.4, "N": -0.5, "D": -0.6, "C": 0.9,
            "Q": -0.7, "E": -0.7, "G": 0.3, "H": -0.1, "I": 0.7,
            "L": 0.5, "K": -1.8, "M": 0.4, "F": 0.5, "P": -0.3,
            "S": -0.1, "T": -0.2, "W": 0.3, "Y": -0.4, "V": 0.6,
        }),
        HydrophobicityScale("Engelman", {
            "A": 1.6, "R": -12.3, "N": -4.8, "D": -9.2, "C": 2.0,
            "Q": -4.1, "E": -8.2, "G": 1.0, "H": -3.0, "I": 3.1,
            "L": 2.8, "K": -8.8, "M": 3.4, "F": 3.7, "P": -0.2,
            "S": 0.6, "T": 1.2, "W": 1.9, "Y": -0.7, "V": 2.6,
        }),
    )
}

# Guruprasad (1990) dipeptide instability weight values, DIWV[first][second].
DIWV = {
    "A": {"A": 1.0, "C": 44.94, "E": 1.0, "D": -7.49, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": -7.49, "K": 1.0, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 1.0, "P": 20.26,
          "S": 1.0, "R": 1.0, "T": 1.0, "W": 1.0, "V": 1.0, "Y": 1.0},
    "C": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 20.26, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": 33.60, "K": 1.0, "M": 33.60, "L": 20.26, "N": 1.0, "Q": -6.54,
          "P": 20.26, "S": 1.0, "R": 1.0, "T": 33.60, "W": 24.68, "V": -6.54,
          "Y": 1.0},
    "E": {"A": 1.0, "C": 44.94, "E": 33.60, "D": 20.26, "G": 1.0, "F": 1.0,
          "I": 20.26, "H": -6.54, "K": 1.0, "M": 1.0, "L": 1.0, "N": 1.0,
          "Q": 20.26, "P": 20.26, "S": 20.26, "R": 1.0, "T": 1.0, "W": -14.03,
          "V": 1.0, "Y": 1.0},
    "D": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 1.0, "G": 1.0, "F": -6.54, "I": 1.0,
          "H": 1.0, "K": -7.49, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 1.0, "P": 1.0,
          "S": 20.26, "R": -6.54, "T": -14.03, "W": 1.0, "V": 1.0, "Y": 1.0},
    "G": {"A": -7.49, "C": 1.0, "E": -6.54, "D": 1.0, "G": 13.34, "F": 1.0,
          "I": -7.49, "H": 1.0, "K": -7.49, "M": 1.0, "L": 1.0, "N": -7.49,
          "Q": 1.0, "P": 1.0, "S": 1.0, "R": 1.0, "T": -7.49, "W": 13.34,
          "V": 1.0, "Y": -7.49},
    "F": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 13.34, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": 1.0, "K": -14.03, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 1.0,
          "P": 20.26, "S": 1.0, "R": 1.0, "T": 1.0, "W": 1.0, "V": 1.0,
          "Y": 33.601},
    "I": {"A": 1.0, "C": 1.0, "E": 44.94, "D": 1.0, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": 13.34, "K": -7.49, "M": 1.0, "L": 20.26, "N": 1.0, "Q": 1.0,
          "P": -1.88, "S": 1.0, "R": 1.0, "T": 1.0, "W": 1.0, "V": -7.49,
          "Y": 1.0},
    "H": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 1.0, "G": -9.37, "F": -9.37,
          "I": 44.94, "H": 1.0, "K": 24.68, "M": 1.0, "L": 1.0, "N": 24.68,
          "Q": 1.0, "P": -1.88, "S": 1.0, "R": 1.0, "T": -6.54, "W": -1.88,
          "V": 1.0, "Y": 44.94},
    "K": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 1.0, "G": -7.49, "F": 1.0,
          "I": -7.49, "H": 1.0, "K": 1.0, "M": 33.60, "L": -7.49, "N": 1.0,
          "Q": 24.64, "P": -6.54, "S": 1.0, "R": 33.60, "T": 1.0, "W": 1.0,
          "V": -7.49, "Y": 1.0},
    "M": {"A": 13.34, "C": 1.0, "E": 1.0, "D": 1.0, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": 58.28, "K": 1.0, "M": -1.88, "L": 1.0, "N": 1.0, "Q": -6.54,
          "P": 44.94, "S": 44.94, "R": -6.54, "T": -1.88, "W": 1.0, "V": 1.0,
          "Y": 24.68},
    "L": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 1.0, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": 1.0, "K": -7.49, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 33.60,
          "P": 20.26, "S": 1.0, "R": 20.26, "T": 1.0, "W": 24.68, "V": 1.0,
          "Y": 1.0},
    "N": {"A": 1.0, "C": -1.88, "E": 1.0, "D": 1.0, "G": -14.03, "F": -14.03,
          "I": 44.94, "H": 1.0, "K": 24.68, "M": 1.0, "L": 1.0, "N": 1.0,
          "Q": -6.54, "P": -1.88, "S": 1.0, "R": 1.0, "T": -7.49, "W": -9.37,
          "V": 1.0, "Y": 1.0},
    "Q": {"A": 1.0, "C": -6.54, "E": 20.26, "D": 20.26, "G": 1.0, "F": -6.54,
          "I": 1.0, "H": 1.0, "K": 1.0, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 20.26,
          "P": 20.26, "S": 44.94, "R": 1.0, "T": 1.0, "W": 1.0, "V": -6.54,
          "Y": -6.54},
    "P": {"A": 20.26, "C": -6.54, "E": 18.38, "D": -6.54, "G": 1.0, "F": 20.26,
          "I": 1.0, "H": 1.0, "K": 1.0, "M": -6.54, "L": 1.0, "N": 1.0,
          "Q": 20.26, "P": 20.26, "S": 20.26, "R": -6.54, "T": 1.0, "W": -1.88,
          "V": 20.26, "Y": 1.0},
    "S": {"A": 1.0, "C": 33.60, "E": 20.26, "D": 1.0, "G": 1.0, "F": 1.0, "I": 1.0,
          "H": 1.0, "K": 1.0, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 20.26, "P": 44.94,
          "S": 20.26, "R": 20.26, "T": 1.0, "W": 1.0, "V": 1.0, "Y": 1.0},
    "R": {"A": 1.0, "C": 1.0, "E": 1.0, "D": 1.0, "G": -7.49, "F": 1.0, "I": 1.0,
          "H": 20.26, "K": 1.0, "M": 1.0, "L": 1.0, "N": 13.34, "Q": 20.26,
          "P": 20.26, "S": 44.94, "R": 58.28, "T": 1.0, "W": 58.28, "V": 1.0,
          "Y": -6.54},
    "T": {"A": 1.0, "C": 1.0, "E": 20.26, "D": 1.0, "G": -7.49, "F": 13.34,
          "I": 1.0, "H": 1.0, "K": 1.0, "M": 1.0, "L": 1.0, "N": -14.03,
          "Q": -6.54, "P": 1.0, "S": 1.0, "R": 1.0, "T": 1.0, "W": -14.03,
          "V": 1.0, "Y": 1.0},
    "W": {"A": -14.03, "C": 1.0, "E": 1.0, "D": 1.0, "G": -9.37, "F": 1.0,
          "I": 1.0, "H": 24.68, "K": 1.0, "M": 24.68, "L": 13.34, "N": 13.34,
          "Q": 1.0, "P": 1.0, "S": 1.0, "R": 1.0, "T": -14.03, "W": 1.0,
          "V": -7.49, "Y": 1.0},
    "V": {"A": 1.0, "C": 1.0, "E": 1.0, "D": -14.03, "G": -7.49, "F": 1.0,
          "I": 1.0, "H": 1.0, "K": -1.88, "M": 1.0, "L": 1.0, "N": 1.0, "Q": 1.0,
          "P": 20.26, "S": 1.0, "R": 1.0, "T": -7.49, "W": 1.0, "V": 1.0,
          "Y": -6.54},
    "Y": {"A": 24.68, "C": 1.0, "E": -6.54, "D": 24.68, "G": -7.49, "F": 1.0,
          "I": 1.0, "H": 13.34, "K": 1.0, "M": 44.94, "L": 1.0, "N": 1.0,
          "Q": 1.0, "P": 13.34, "S": 1.0, "R": -15.91, "T": -7.49, "W": -9.37,
          "V": 1.0, "Y": 13.34},
}

DIPEPTIDES = tuple(a + b for a in AMINO_ACIDS for b in AMINO_ACIDS)


def _check_sequence(seq: str) -> str:
    if not isinstance(seq, str) or len(seq) < 1:
        raise ValueError("sequence must be a nonempty string")
    seq = seq.upper()
    bad = set(seq) - set(AMINO_ACIDS)
    if bad:
        raise ValueError(f"non-canonical residues {sorted(bad)} in sequence")
    return seq


def aliphatic_index(seq: str) -> float:
    """Relative volume of aliphatic side chains, in mole-percent units.

    X(Ala) + 2.9 X(Val) + 3.9 (X(Ile) + X(Leu)) with X in mole percent.
    """
    seq = _check_sequence(seq)
    scale = 100.0 / len(seq)
    return scale * (
        seq.count("A")
        + 2.9 * seq.count("V")
        + 3.9 * (seq.count("I") + seq.count("L"))
    )


def boman_index(seq: str) -> float:
    """Mean per-residue solubility value (protein interaction potential)."""
    seq = _check_sequence(seq)
    return sum(BOMAN_SCALE[r] for r in seq) / len(seq)


def net_charge(seq: str, pH: float = 7.0, pka: dict = PKA_LEHNINGER) -> float:
    """Henderson-Hasselbalch net charge of the sequence at a given pH.

    Sums the fractional charge of the N-terminus, the C-terminus and every
    ionizable side chain (D, E, C, Y negative; H, K, R positive).
    """
    seq = _check_sequence(seq)
    if not 0.0 < pH < 14.0:
        raise ValueError("pH must lie in (0, 14)")

    def positive(pka_value, count=1):
        return count / (1.0 + 10.0 ** (pH - pka_value))

    def negative(pka_value, count=1):
        return -count / (1.0 + 10.0 ** (pka_value - pH))

    charge = positive(pka["nterm"]) + negative(pka["cterm"])
    for residue in _POSITIVE_SITES:
        n = seq.count(residue)
        if n:
            charge += positive(pka[residue], n)
    for residue in _NEGATIVE_SITES:
        n = seq.count(residue)
        if n:
            charge += negative(pka[residue], n)
    return charge


def isoelectric_point(seq: str, pka: dict = PKA_LEHNINGER, tol: float = 1e-4) -> float:
    """pH at which the net charge vanishes, found by bisection on (0, 14).

    Charge is strictly decreasing in pH (the termini alone see to that);
    if it somehow fails to cross zero the nearest boundary is returned
    with a warning.
    """
    seq = _check_sequence(seq)
    lo, hi = 1e-9, 14.0 - 1e-9
    c_lo = net_charge(seq, lo, pka)
    c_hi = net_charge(seq, hi, pka)
    if c_lo < 0.0 or c_hi > 0.0:
        warnings.warn("net charge does not cross zero in (0, 14)", stacklevel=2)
        return lo if abs(c_lo) < abs(c_hi) else hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        c_mid = net_charge(seq, mid, pka)
        if abs(c_mid) < tol:
            return mid
        if c_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def instability_index(seq: str) -> float:
    """Guruprasad instability index: (10/L) * sum of DIWV over adjacent pairs."""
    seq = _check_sequence(seq)
    if len(seq) < 2:
        raise ValueError("instability index needs length >= 2")
    total = sum(DIWV[a][b] for a, b in zip(seq, seq[1:]))
    return 10.0 / len(seq) * total


def hydrophobicity(seq: str, scale="KyteDoolittle") -> float:
    """Mean per-residue value under a registered hydrophobicity scale."""
    seq = _check_sequence(seq)
    if isinstance(scale, str):
        try:
            scale = HYDROPHOBICITY_SCALES[scale]
        except KeyError:
            raise ValueError(
                f"unknown hydrophobicity scale {scale!r}; registered: "
                f"{sorted(HYDROPHOBICITY_SCALES)}"
            ) from None
    return sum(scale.values[r] for r in seq) / len(seq)


def dipeptide_composition(seq: str) -> np.ndarray:
    """Fractions of the 400 ordered residue pairs among adjacent positions."""
    seq = _check_sequence(seq)
    if len(seq) < 2:
        raise ValueError("dipeptide composition needs length >= 2")
    index = {aa: i for i, aa in enumerate(AMINO_ACIDS)}
    counts = np.zeros(400)
    for a, b in zip(seq, seq[1:]):
        counts[index[a] * 20 + index[b]] += 1.0
    return counts / (len(seq) - 1)


def sequence_scalars(seq: str) -> tuple:
    """(residue count, average molecular weight in Da)."""
    seq = _check_sequence(seq)
    mass = sum(FREE_AA_MASS[r] for r in seq) - (len(seq) - 1) * WATER_MASS
    return len(seq), mass


def protein_descriptors(seq: str, *, include_dipeptide=True) -> list:
    """All protein meta-features for one sequence as (name, value) pairs."""
    seq = _check_sequence(seq)
    length, weight = sequence_scalars(seq)
    out = [
        ("seq_length", float(length)),
        ("molecular_weight", weight),
        ("aliphatic_index", aliphatic_index(seq)),
        ("boman_index", boman_index(seq)),
        ("net_charge_ph7", net_charge(seq)),
        ("isoelectric_point", isoelectric_point(seq)),
        ("instability_index", instability_index(seq) if length >= 2 else 0.0),
    ]
    for name in sorted(HYDROPHOBICITY_SCALES):
        out.append((f"hydrophobicity_{name}", hydrophobicity(seq, name)))
    if include_dipeptide:
        dc = dipeptide_composition(seq) if length >= 2 else np.zeros(400)
        out.extend((f"dc_{pair}", float(v)) for pair, v in zip(DIPEPTIDES, dc))
    return out
