#!/usr/bin/env python3
"""Rebuild gcelab/data/catalog.json from the model constructors, or check it."""

import logging
import sys
from pathlib import Path

import click
import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from gcelab.config import DEFAULT_CATALOG_PATH  # noqa: E402
from gcelab.services.characteristic import classify_metric  # noqa: E402
from gcelab.utils.catalog import (  # noqa: E402
    document_to_frame,
    load_catalog,
    standard_catalog_entries,
    write_catalog,
)

logger = logging.getLogger("build_catalog")


def _same_model(left, right) -> bool:
    a, b = document_to_frame(left), document_to_frame(right)
    return (
        left.kind == right.kind
        and left.expected_case == right.expected_case
        and left.factors == right.factors
        and np.allclose(a.metric, b.metric)
        and np.allclose(a.J, b.J)
        and np.allclose(a.structure, b.structure)
    )


@click.command()
@click.option("--output", type=click.Path(path_type=Path), default=DEFAULT_CATALOG_PATH, show_default=True)
@click.option("--check", is_flag=True, help="Compare with the existing file instead of writing.")
def main(output: Path, check: bool):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    entries = standard_catalog_entries()
    for entry in entries:
        case = classify_metric(document_to_frame(entry)).case_tag
        if case != entry.expected_case:
            logger.error(f"{entry.name}: classified as {case}, expected {entry.expected_case}")
            sys.exit(1)
        logger.info(f"{entry.name}: {case}")

    if not check:
        write_catalog(entries, output)
        return
    shipped = load_catalog(output)
    rebuilt = {entry.name: entry for entry in entries}
    stale = [e.name for e in shipped.models if e.name not in rebuilt or not _same_model(e, rebuilt[e.name])]
    missing = sorted(set(rebuilt) - {e.name for e in shipped.models})
    if stale or missing:
        logger.error(f"catalog out of date: changed {stale}, missing {missing}")
        sys.exit(1)
    logger.info(f"{output} matches the constructors ({len(entries)} models)")


if __name__ == "__main__":
    main()
