"""Reading and writing frame documents and the model catalog."""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
from pydantic import ValidationError

from gcelab.api.schemas import Catalog, CatalogEntry, FrameDocument
from gcelab.config import config
from gcelab.core.lie_frame import HermitianFrame
from gcelab.exceptions import FrameParseError, UnknownModelError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_json(path: Path) -> object:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as e:
        raise FrameParseError(f"file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise FrameParseError(f"{path} is not valid JSON: {e}") from e


def document_to_frame(document: FrameDocument, tolerance: Optional[float] = None) -> HermitianFrame:
    """Build a frame; frame invariants (Jacobi, hermitian, ...) are enforced by the constructor."""
    brackets = [(int(i) - 1, int(j) - 1, int(k) - 1, value) for i, j, k, value in document.brackets]
    return HermitianFrame.build(
        metric=np.array(document.metric, dtype=float),
        J=np.array(document.J, dtype=float),
        brackets=brackets,
        name=document.name,
        tolerance=tolerance if tolerance is not None else config.tolerance.default,
        jacobi_tolerance=config.tolerance.jacobi,
    )


def frame_to_document(frame: HermitianFrame, decimals: int = 15) -> FrameDocument:
    return FrameDocument(
        name=frame.name,
        dim=frame.dim,
        metric=np.round(frame.metric, decimals).tolist(),
        J=np.round(frame.J, decimals).tolist(),
        brackets=[[i + 1, j + 1, k + 1, round(value, decimals)] for i, j, k, value in frame.brackets],
    )


def load_frame_file(path: PathLike, tolerance: Optional[float] = None) -> HermitianFrame:
    path = Path(path)
    data = _read_json(path)
    try:
        document = FrameDocument.model_validate(data)
    except ValidationError as e:
        raise FrameParseError(f"{path}: {e.errors()[0]['msg']}") from e
    if not document.name:
        document.name = path.stem
    logger.debug(f"loaded frame '{document.name}' (dim {document.dim}) from {path}")
    return document_to_frame(document, tolerance)


@lru_cache(maxsize=8)
def _load_catalog_cached(path: str, mtime: float) -> Catalog:
    data = _read_json(Path(path))
    try:
        catalog = Catalog.model_validate(data)
    except ValidationError as e:
        raise FrameParseError(f"catalog {path}: {e.errors()[0]['msg']}") from e
    logger.info(f"loaded catalog with {len(catalog.models)} models from {path}")
    return catalog


def load_catalog(path: Optional[PathLike] = None) -> Catalog:
    path = Path(path) if path is not None else config.catalog.path
    if not path.is_file():
        raise FrameParseError(f"catalog not found: {path}")
    return _load_catalog_cached(str(path.resolve()), path.stat().st_mtime)


def get_entry(catalog: Catalog, name: str) -> CatalogEntry:
    entry = catalog.get(name)
    if entry is None:
        known = ", ".join(e.name for e in catalog.models)
        raise UnknownModelError(f"unknown model '{name}' (catalog has: {known})")
    return entry


def write_catalog(entries: Iterable[CatalogEntry], path: PathLike) -> Catalog:
    catalog = Catalog(models=list(entries))
    Path(path).write_text(json.dumps(catalog.model_dump(), indent=2, sort_keys=True) + "\n")
    logger.info(f"wrote {len(catalog.models)} models to {path}")
    return catalog


def model_names(catalog: Catalog) -> List[str]:
    return [entry.name for entry in catalog.models]


SASAKIAN_LABELS = {"sphere": "su2", "nil": "nil", "sl2": "sl2"}
PRODUCT_PROVENANCE = "Sasakian product with J xi1 = xi2 (alpha = i); GCE with parallel torsion"


def _entry(frame: HermitianFrame, **fields) -> CatalogEntry:
    document = frame_to_document(frame)
    return CatalogEntry(**document.model_dump(), **fields)


def standard_catalog_entries() -> List[CatalogEntry]:
    """Catalog entries rebuilt from the model constructors, in shipped order."""
    from gcelab.services.characteristic import CaseTag
    from gcelab.services.models import flat_frame, hopf_frame, line_kahler_frame, sasakian_model, sasakian_product

    entries = [
        _entry(
            flat_frame(2, name="flat_c2"),
            kind="flat",
            expected_case=CaseTag.NOT_APPLICABLE,
            provenance="abelian C^2 with its standard structure; Kähler, Lee form zero",
        )
    ]
    for kind in SASAKIAN_LABELS:
        entries.append(
            _entry(
                hopf_frame(kind),
                kind="hopf",
                expected_case=CaseTag.VAISMAN,
                factors=[kind, "line"],
                provenance=(
                    f"Sasakian {kind} factor times the Reeb line; "
                    "validated by check_sasakian and classify_metric"
                ),
            )
        )
    for first in SASAKIAN_LABELS:
        for second in SASAKIAN_LABELS:
            name = f"{SASAKIAN_LABELS[first]}x{SASAKIAN_LABELS[second]}"
            entries.append(
                _entry(
                    sasakian_product(sasakian_model(first), sasakian_model(second), name=name),
                    kind="product",
                    expected_case=CaseTag.SASAKIAN_PRODUCT,
                    factors=[first, second],
                    provenance=PRODUCT_PROVENANCE,
                )
            )
    entries.append(
        _entry(
            line_kahler_frame("nil"),
            kind="line_kahler",
            expected_case=CaseTag.SASAKI_LINE_KAHLER,
            factors=["nil", "line"],
            provenance="nil Sasakian factor times line times flat C; one eigenspace with a+ = 0",
        )
    )
    return entries
