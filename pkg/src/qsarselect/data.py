"""Dataset model, CSV/FASTA ingestion, and median imputation.

A corpus is a collection of per-target regression datasets, each stored in
up to three feature representations, plus one protein record per target.
Datasets are immutable after construction and safe to share across workers.
"""

import csv
import re
from dataclasses import dataclass, field, replace

import numpy as np

BASICMOLPROP = "basicmolprop"
ALLMOLPROP = "allmolprop"
FPFCFP4 = "fpFCFP4"

REPRESENTATION_KINDS = (BASICMOLPROP, ALLMOLPROP, FPFCFP4)
CANONICAL_WIDTHS = {BASICMOLPROP: 43, ALLMOLPROP: 1447, FPFCFP4: 1024}

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"

# Tokens that look like missing-value markers but are rejected: only the
# empty string encodes a missing cell.
_BAD_TOKENS = {"na", "nan", "n/a", "null", "none", "inf", "-inf", "+inf"}


class EmptyDataset(ValueError):
    """CSV contains a header but no data rows."""


class BinaryViolation(ValueError):
    """Fingerprint dataset contains a value outside {0, 1}."""


class AllMissingColumn(ValueError):
    """A feature column has no observed values to impute from."""


@dataclass(frozen=True)
class Representation:
    """A feature encoding of compounds.

    ``expected_width`` defaults to the canonical width of the kind
    (43 / 1447 / 1024); smaller corpora may override it explicitly.
    """

    kind: str
    expected_width: int = 0

    def __post_init__(self):
        if self.kind not in REPRESENTATION_KINDS:
            raise ValueError(f"unknown representation kind: {self.kind!r}")
        if self.expected_width == 0:
            object.__setattr__(self, "expected_width", CANONICAL_WIDTHS[self.kind])
        if self.expected_width < 1:
            raise ValueError("expected_width must be >= 1")

    @property
    def is_fingerprint(self) -> bool:
        return self.kind == FPFCFP4


@dataclass(frozen=True)
class Dataset:
    """One target's compound-by-feature table plus activity response.

    ``missing_mask`` marks cells whose value is unobserved; the stored
    value behind a masked cell is 0 and carries no meaning until
    :func:`impute_median` fills it.
    """

    target_id: str
    representation: Representation
    feature_names: tuple
    features: np.ndarray
    missing_mask: np.ndarray
    activity: np.ndarray

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        mask = np.ascontiguousarray(self.missing_mask, dtype=bool)
        act = np.ascontiguousarray(self.activity, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if feats.shape[0] < 1:
            raise EmptyDataset(f"{self.target_id}: dataset has no rows")
        if feats.shape[0] != act.shape[0]:
            raise ValueError("row count of features must equal activity length")
        if mask.shape != feats.shape:
            raise ValueError("missing_mask shape must match features")
        if len(self.feature_names) != feats.shape[1]:
            raise ValueError("feature_names length must equal column count")
        for arr in (feats, mask, act):
            arr.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "missing_mask", mask)
        object.__setattr__(self, "activity", act)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_compounds(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def has_missing(self) -> bool:
        return bool(self.missing_mask.any())


@dataclass(frozen=True)
class ProteinTarget:
    """Protein record for one target: sequence, class hierarchy, name."""

    target_id: str
    sequence: str
    class_levels: tuple = field(default_factory=lambda: ("",) * 6)
    preferred_name: str = ""

    def __post_init__(self):
        seq = self.sequence.upper()
        if len(seq) < 1:
            raise ValueError(f"{self.target_id}: empty protein sequence")
        bad = set(seq) - set(AMINO_ACIDS)
        if bad:
            raise ValueError(
                f"{self.target_id}: non-canonical residues {sorted(bad)} in sequence"
            )
        levels = tuple(self.class_levels)
        if len(levels) != 6:
            raise ValueError("class_levels must hold exactly 6 entries (may be empty)")
        object.__setattr__(self, "sequence", seq)
        object.__setattr__(self, "class_levels", levels)


def _parse_cell(token: str, path, row_idx: int, col_name: str) -> float:
    text = token.strip()
    if text == "":
        return np.nan
    if text.lower() in _BAD_TOKENS:
        raise ValueError(
            f"{path}: row {row_idx}, column {col_name!r}: token {token!r} rejected "
            "(missing cells must be empty)"
        )
    try:
        value = float(text)
    except ValueError:
        raise ValueError(
            f"{path}: row {row_idx}, column {col_name!r}: non-numeric cell {token!r}"
        ) from None
    if not np.isfinite(value):
        raise ValueError(
            f"{path}: row {row_idx}, column {col_name!r}: non-finite cell {token!r}"
        )
    return value


def load_dataset(path, representation: Representation, *, allow_width_override=False) -> Dataset:
    """Load one dataset CSV (see file contract in the package docs).

    The file must be UTF-8, comma-separated, with a header row containing
    exactly one ``activity`` column; all other columns are features.  An
    empty cell marks a missing value; anything non-numeric is an error.

    Parameters
    ----------
    path : str or Path
        CSV file named ``<target_id>.<representation>.csv``.
    representation : Representation
        Expected representation; widths are checked against it.
    allow_width_override : bool
        Accept files whose feature count differs from
        ``representation.expected_width`` (the loaded width wins).
    """
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if header.count("activity") != 1:
            raise ValueError(f"{path}: header must contain exactly one 'activity' column")
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column names in header")
        act_idx = header.index("activity")
        feature_names = [h for i, h in enumerate(header) if i != act_idx]

        rows = []
        activity = []
        for row_idx, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {row_idx} has {len(row)} cells, expected {len(header)}"
                )
            act = _parse_cell(row[act_idx], path, row_idx, "activity")
            if np.isnan(act):
                raise ValueError(f"{path}: row {row_idx}: activity cell may not be empty")
            activity.append(act)
            rows.append(
                [
                    _parse_cell(tok, path, row_idx, header[i])
                    for i, tok in enumerate(row)
                    if i != act_idx
                ]
            )

    if not rows:
        raise EmptyDataset(f"{path}: no data rows")

    features = np.asarray(rows, dtype=np.float64)
    mask = np.isnan(features)
    features = np.where(mask, 0.0, features)

    width = features.shape[1]
    rep = representation
    if width != rep.expected_width:
        if not allow_width_override:
            raise ValueError(
                f"{path}: {width} feature columns, expected "
                f"{rep.expected_width} for {rep.kind} (pass allow_width_override "
                "to accept)"
            )
        rep = Representation(rep.kind, width)

    if rep.is_fingerprint:
        observed = features[~mask]
        if observed.size and not np.isin(observed, (0.0, 1.0)).all():
            bad = observed[~np.isin(observed, (0.0, 1.0))][0]
            raise BinaryViolation(f"{path}: fingerprint cell with value {bad!r}")

    target_id = _target_id_from_path(path)
    return Dataset(target_id, rep, tuple(feature_names), features, mask, np.asarray(activity))


def _target_id_from_path(path) -> str:
    stem = re.sub(r"\.csv$", "", str(path).rsplit("/", 1)[-1])
    for kind in REPRESENTATION_KINDS:
        suffix = "." + kind
        if stem.endswith(suffix):
            return stem[: -len(suffix)]
    return stem


def dataset_filename(target_id: str, representation: Representation) -> str:
    return f"{target_id}.{representation.kind}.csv"


def save_dataset(dataset: Dataset, path) -> None:
    """Write a dataset CSV that round-trips bit-exactly through load."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("activity",) + dataset.feature_names)
        for i in range(dataset.n_compounds):
            row = [repr(float(dataset.activity[i]))]
            for j in range(dataset.n_features):
                if dataset.missing_mask[i, j]:
                    row.append("")
                else:
                    row.append(repr(float(dataset.features[i, j])))
            writer.writerow(row)


def impute_median(dataset: Dataset, *, drop_all_missing=False) -> Dataset:
    """Replace each missing cell by the median of its column's observed values.

    Even-count medians use the arithmetic mean of the two middle values.
    A column with no observed values raises :class:`AllMissingColumn`
    unless ``drop_all_missing`` is set, in which case it is removed.
    """
    if not dataset.has_missing:
        return dataset

    feats = dataset.features.copy()
    mask = dataset.missing_mask
    dead_cols = []
    for j in range(feats.shape[1]):
        col_mask = mask[:, j]
        if not col_mask.any():
            continue
        present = feats[~col_mask, j]
        if present.size == 0:
            dead_cols.append(j)
            continue
        feats[col_mask, j] = np.median(present)

    names = dataset.feature_names
    if dead_cols:
        if not drop_all_missing:
            bad = ", ".join(names[j] for j in dead_cols)
            raise AllMissingColumn(f"{dataset.target_id}: all-missing column(s): {bad}")
        keep = [j for j in range(feats.shape[1]) if j not in set(dead_cols)]
        feats = feats[:, keep]
        names = tuple(names[j] for j in keep)

    return replace(
        dataset,
        representation=Representation(dataset.representation.kind, feats.shape[1]),
        feature_names=names,
        features=feats,
        missing_mask=np.zeros_like(feats, dtype=bool),
    )


def load_fasta(path) -> dict:
    """Read a FASTA file into an ordered ``{target_id: sequence}`` map."""
    sequences = {}
    current = None
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                if current is not None:
                    sequences[current] = "".join(chunks)
                current = line[1:].split()[0]
                if not current:
                    raise ValueError(f"{path}: FASTA header without an identifier")
                if current in sequences:
                    raise ValueError(f"{path}: duplicate FASTA id {current!r}")
                chunks = []
            else:
                if current is None:
                    raise ValueError(f"{path}: sequence data before any '>' header")
                chunks.append(line)
    if current is not None:
        sequences[current] = "".join(chunks)
    return sequences


GROUPINGS_HEADER = ("target_id", "L1", "L2", "L3", "L4", "L5", "L6", "preferred_name")


def load_groupings(path) -> dict:
    """Read the groupings CSV into ``{target_id: (levels, preferred_name)}``."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(h.strip() for h in next(reader))
        if header != GROUPINGS_HEADER:
            raise ValueError(
                f"{path}: header must be {','.join(GROUPINGS_HEADER)}, got {','.join(header)}"
            )
        for row_idx, row in enumerate(reader, start=1):
            if len(row) != len(GROUPINGS_HEADER):
                raise ValueError(f"{path}: row {row_idx} has {len(row)} cells")
            tid = row[0].strip()
            if not tid:
                raise ValueError(f"{path}: row {row_idx}: empty target_id")
            if tid in out:
                raise ValueError(f"{path}: duplicate target_id {tid!r}")
            out[tid] = (tuple(c.strip() for c in row[1:7]), row[7].strip())
    return out


def load_protein_targets(fasta_path, groupings_path) -> list:
    """Join FASTA sequences with groupings into :class:`ProteinTarget` records."""
    sequences = load_fasta(fasta_path)
    groupings = load_groupings(groupings_path)
    targets = []
    for tid, seq in sequences.items():
        levels, name = groupings.get(tid, (("",) * 6, ""))
        targets.append(ProteinTarget(tid, seq, levels, name))
    return targets


def save_protein_targets(targets, fasta_path, groupings_path) -> None:
    with open(fasta_path, "w", encoding="utf-8") as fh:
        for t in targets:
            fh.write(f">{t.target_id}\n")
            for i in range(0, len(t.sequence), 60):
                fh.write(t.sequence[i : i + 60] + "\n")
    with open(groupings_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(GROUPINGS_HEADER)
        for t in targets:
            writer.writerow((t.target_id,) + t.class_levels + (t.preferred_name,))
