from iacsmells.analysis.design import DESIGN_DETECTORS
from iacsmells.analysis.engine import (
    DESIGN,
    SECURITY,
    Detector,
    Smell,
    SmellReport,
    finalize,
    run,
    visit,
)
from iacsmells.analysis.security import SECURITY_DETECTORS

FAMILIES = {DESIGN: DESIGN_DETECTORS, SECURITY: SECURITY_DETECTORS}

# code -> label for all registered smells, in table order
SMELLS = {cls.code: cls.label for family in FAMILIES.values() for cls in family}


def family_codes(family: str) -> list:
    return sorted(cls.code for cls in FAMILIES[family])


def build_detectors(tech, family: str, config=None) -> list:
    """Instantiate the detectors of one smell family for a technology."""
    if family not in FAMILIES:
        raise ValueError(f"unknown smell family {family!r}")
    return [cls(tech, config) for cls in FAMILIES[family]]


def analyze(root, tech, family: str, config=None) -> SmellReport:
    return run(root, build_detectors(tech, family, config))


__all__ = [
    "DESIGN",
    "SECURITY",
    "FAMILIES",
    "SMELLS",
    "Detector",
    "Smell",
    "SmellReport",
    "analyze",
    "build_detectors",
    "family_codes",
    "finalize",
    "run",
    "visit",
]
