"""Shared on-disk text formats: tagged datasets, catalogs, fingerprints.

Dataset files: "# role: GOLDEN|NOISY|SYNTHETIC" on line 1, then one
"<token>\\t<label>" line per token with a blank line between queries.
Catalog files: one entity per line, brands and product types in separate
files.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .core import (
    Catalog,
    Dataset,
    InvalidBioError,
    LabelTag,
    Source,
    TaggedQuery,
    bio_repair,
)
from .preprocess import EmptyQueryError, normalize_query


def write_dataset(dataset: Dataset, path: str | Path, header_role: Source | None = None) -> None:
    """Write a dataset file; header_role overrides the dataset role.

    Passing header_role=PREDICTED lets prediction dumps share the format.
    """
    role = header_role if header_role is not None else dataset.role
    if role is None:
        raise ValueError("dataset has no role; pass header_role explicitly")
    parts = [f"# role: {Source(role).value}\n"]
    for qi, query in enumerate(dataset.items):
        if qi:
            parts.append("\n")
        for tok, lab in zip(query.tokens, query.labels):
            parts.append(f"{tok}\t{lab.value}\n")
    Path(path).write_text("".join(parts), encoding="utf-8")


def read_dataset(path: str | Path, repair: bool = False) -> Dataset:
    """Read a dataset file; repair=True fixes orphan I- tags on ingestion."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# role:"):
        raise ValueError(f"{path}: first line must be a '# role: ...' header")
    role_text = lines[0].split(":", 1)[1].strip()
    try:
        header_role = Source(role_text)
    except ValueError:
        raise ValueError(f"{path}: unknown role {role_text!r}") from None

    items: list[TaggedQuery] = []
    tokens: list[str] = []
    labels: list[str] = []
    start_line = 2

    def flush(lineno: int) -> None:
        if not tokens:
            return
        labs = bio_repair(labels) if repair else tuple(labels)
        try:
            items.append(TaggedQuery(tuple(tokens), labs, header_role))  # type: ignore[arg-type]
        except (InvalidBioError, ValueError) as exc:
            raise ValueError(f"{path}: query starting at line {lineno}: {exc}") from None
        tokens.clear()
        labels.clear()

    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            flush(start_line)
            start_line = lineno + 1
            continue
        if not tokens:
            start_line = lineno
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<token>\\t<label>', got {line!r}")
        tok, lab = fields
        try:
            LabelTag(lab)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unknown label {lab!r}") from None
        tokens.append(tok)
        labels.append(lab)
    flush(start_line)

    # PREDICTED files load as role-less datasets; items keep their source.
    role = None if header_role is Source.PREDICTED else header_role
    return Dataset(tuple(items), role=role)


def _read_entries(path: Path) -> frozenset[str]:
    entries: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = normalize_query(line)
        except EmptyQueryError:
            raise ValueError(f"{path}:{lineno}: entry normalizes to nothing: {line!r}") from None
        entries.add(" ".join(tokens))
    if not entries:
        raise ValueError(f"{path}: no entries")
    return frozenset(entries)


def read_catalog(brands_path: str | Path, product_types_path: str | Path) -> Catalog:
    """Read the two catalog files, normalizing entries like queries."""
    return Catalog(
        brands=_read_entries(Path(brands_path)),
        product_types=_read_entries(Path(product_types_path)),
    )


def write_catalog(catalog: Catalog, brands_path: str | Path, product_types_path: str | Path) -> None:
    Path(brands_path).write_text(
        "".join(f"{entry}\n" for entry in sorted(catalog.brands)), encoding="utf-8"
    )
    Path(product_types_path).write_text(
        "".join(f"{entry}\n" for entry in sorted(catalog.product_types)), encoding="utf-8"
    )


def catalog_fingerprint(catalog: Catalog) -> str:
    """Content hash of a catalog, stored in model files to detect staleness."""
    digest = hashlib.sha256()
    for entry in sorted(catalog.brands):
        digest.update(entry.encode("utf-8"))
        digest.update(b"\n")
    digest.update(b"\x00")
    for entry in sorted(catalog.product_types):
        digest.update(entry.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()
