"""Bundled synthetic RR-interval sample records."""

from importlib import resources

SAMPLE_LABELS = ("chi01", "normal01", "yoga01")


def sample_record_paths() -> list[str]:
    """Filesystem paths of the three bundled synthetic records."""
    pkg = resources.files(__name__)
    return [str(pkg / f"{label}.txt") for label in SAMPLE_LABELS]
