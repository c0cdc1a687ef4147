"""Content checksums over the normalized token stream."""

from __future__ import annotations

import hashlib

from ..frontend.lexer import normalized_text


def digest(text: str) -> str:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


def checksum(source: str) -> str:
    """64-bit hex checksum, blind to layout and comments."""
    return digest(normalized_text(source))


def tasks_normalized(text: str) -> str:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].split()
        if line:
            lines.append(" ".join(line))
    return "\n".join(lines)


def project_checksum(sources: dict[str, str]) -> str:
    """Version id of a whole project: every file name plus its normalized text."""
    h = hashlib.blake2b(digest_size=8)
    for name in sorted(sources):
        text = sources[name]
        norm = tasks_normalized(text) if name.endswith(".cfg") else normalized_text(text)
        h.update(name.encode("utf-8") + b"\0" + norm.encode("utf-8") + b"\0")
    return h.hexdigest()
