"""SMILES dataset ingestion: plain lines or CSV, canonicalized and deduplicated."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from molopt.chem import canonical_smiles, parse_smiles
from molopt.chem.molecule import Molecule

log = logging.getLogger("molopt.harness")

SAMPLE_NAME = "moses_sample.smi"


class DataError(ValueError):
    """The dataset file is unreadable or holds no usable SMILES."""


@dataclass(frozen=True)
class DatasetRecord:
    smiles: str
    canonical: str
    prescore: float | None = None


class Dataset(list):
    """A list of DatasetRecord plus load diagnostics and the source hash."""

    def __init__(self, records=(), warnings: list[str] | None = None, sha256: str = "", source: str = ""):
        super().__init__(records)
        self.warnings = warnings or []
        self.sha256 = sha256
        self.source = source


def _rows(text: str) -> list[tuple[int, str]]:
    """(line number, SMILES cell) pairs, header and comments removed."""
    lines = [(n, ln) for n, ln in enumerate(text.splitlines(), 1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return []
    first = lines[0][1]
    delim = "," if "," in first else ("\t" if "\t" in first else None)
    if delim is None:
        rows = [(n, ln.split()[0]) for n, ln in lines]
        return rows[1:] if rows[0][1].lower() == "smiles" else rows
    # CSV: let the csv module own record boundaries (quoted cells may hold newlines).
    reader = csv.reader(io.StringIO(text), delimiter=delim)
    records = []
    for cells in reader:
        if cells and any(c.strip() for c in cells) and not cells[0].lstrip().startswith("#"):
            records.append((reader.line_num, [c.strip() for c in cells]))
    header = [c.lower() for c in records[0][1]]
    col, skip = 0, 0
    if "smiles" in header:
        col, skip = header.index("smiles"), 1
    elif not isinstance(parse_smiles(records[0][1][0]), Molecule):
        skip = 1  # a header without a smiles column: use the first column
    return [(n, cells[col]) for n, cells in records[skip:] if len(cells) > col]


def parse_dataset(text: str, source: str = "<memory>") -> Dataset:
    warnings, seen, records = [], set(), []
    for line_no, smi in _rows(text):
        mol = parse_smiles(smi)
        if not isinstance(mol, Molecule):
            msg = f"{source}:{line_no}: skipped unparseable SMILES {smi!r} ({'; '.join(mol.messages)})"
            warnings.append(msg)
            log.warning(msg)
            continue
        key = canonical_smiles(mol)
        if key in seen:
            continue
        seen.add(key)
        records.append(DatasetRecord(smi, key))
    if not records:
        raise DataError(f"{source}: no valid SMILES rows")
    return Dataset(records, warnings, hashlib.sha256(text.encode("utf-8")).hexdigest(), source)


def load_dataset(path: str | Path) -> Dataset:
    """Read one SMILES per row (plain or CSV with a header, auto-detected)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    return parse_dataset(text, str(path))


def sample_dataset() -> Dataset:
    """The bundled 2000-molecule MOSES sample (MIT licensed, see NOTICE.txt)."""
    res = resources.files("molopt.harness").joinpath("data").joinpath(SAMPLE_NAME)
    return parse_dataset(res.read_text(encoding="utf-8"), SAMPLE_NAME)
