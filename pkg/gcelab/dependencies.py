"""Shared service instances for the CLI and scripts"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Optional

from gcelab.config import config

if TYPE_CHECKING:
    from gcelab.api.schemas import Catalog
    from gcelab.services.verification import VerificationService

catalog: Optional["Catalog"] = None
verification_service: Optional["VerificationService"] = None

logger = logging.getLogger(__name__)


def get_catalog() -> "Catalog":
    """Get or load the model catalog"""
    global catalog
    if catalog is None:
        from gcelab.utils.catalog import load_catalog

        catalog = load_catalog(config.catalog.path)
        logger.info(f"Loaded catalog with {len(catalog.models)} models from {config.catalog.path}")
    return catalog


def get_verification_service(**overrides) -> "VerificationService":
    """Get or create the verification service; overrides always build a fresh instance"""
    global verification_service
    from gcelab.services.verification import VerificationService

    if overrides:
        return VerificationService(catalog=get_catalog(), **overrides)
    if verification_service is None:
        verification_service = VerificationService(catalog=get_catalog())
        logger.info("Created VerificationService instance")
    return verification_service


def reset_services():
    """Reset all services - useful for testing"""
    global catalog, verification_service

    catalog = None
    verification_service = None

    logger.info("All services reset")


__all__ = [
    "get_catalog",
    "get_verification_service",
    "reset_services",
]
