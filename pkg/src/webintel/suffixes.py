"""Public-suffix table with longest-match hostname splitting.

The table is loaded from a newline-delimited text file (one suffix per
line, ``//`` comments ignored). A hostname splits into
``(subdomains, second_level_domain, suffix)`` where the suffix is the
longest dot-suffix of the hostname present in the table.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable


class PublicSuffixList:
    def __init__(self, suffixes: Iterable[str]):
        cleaned = (s.strip().lower().lstrip(".") for s in suffixes)
        self._suffixes = frozenset(s for s in cleaned if s)
        self._tlds = frozenset(s for s in self._suffixes if "." not in s)

    @classmethod
    def from_file(cls, path: str | Path) -> "PublicSuffixList":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line for line in lines if line.strip() and not line.lstrip().startswith("//"))

    @classmethod
    def default(cls) -> "PublicSuffixList":
        return _default_table()

    def __contains__(self, suffix: str) -> bool:
        return suffix.lower() in self._suffixes

    def __len__(self) -> int:
        return len(self._suffixes)

    def is_tld(self, label: str) -> bool:
        """True when a single hostname label is itself a known TLD."""
        return label.lower() in self._tlds

    def split(self, hostname: str) -> tuple[list[str], str, str]:
        """Split ``hostname`` into (subdomains, second-level domain, suffix).

        Longest matching suffix wins. When nothing matches, the last label
        is treated as the domain and the suffix is empty.
        """
        labels = hostname.split(".")
        for i in range(len(labels) - 1):
            candidate = ".".join(labels[i:])
            if candidate in self._suffixes:
                sld = labels[i - 1] if i > 0 else ""
                return labels[: max(i - 1, 0)], sld, candidate
        if hostname in self._suffixes:
            return [], "", hostname
        return labels[:-1], labels[-1], ""


@lru_cache(maxsize=1)
def _default_table() -> PublicSuffixList:
    text = resources.files("webintel.data").joinpath("public_suffixes.txt").read_text("utf-8")
    lines = text.splitlines()
    return PublicSuffixList(
        line for line in lines if line.strip() and not line.lstrip().startswith("//")
    )
