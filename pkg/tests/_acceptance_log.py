"""Registry the acceptance tests report into; conftest prints it."""

ENTRIES: list[tuple[str, bool, float]] = []


def record(name: str, ok: bool, seconds: float) -> None:
    ENTRIES.append((name, ok, seconds))
