"""Identifier-aware word splitting shared by tokenization and path keywords."""

from __future__ import annotations

import re

# Camel-case aware: "HTTPServer2x" -> HTTP, Server, 2, x
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")
_PLAIN_RE = re.compile(r"[A-Za-z0-9]+")


def split_words(text: str, *, split_camel: bool = True) -> list[str]:
    """Split text into lowercase words.

    Non-alphanumeric characters always separate words. With split_camel,
    case transitions and letter/digit boundaries also separate, so
    "PolynomialGaloisGroup" yields ["polynomial", "galois", "group"].
    """
    pattern = _CAMEL_RE if split_camel else _PLAIN_RE
    return [m.lower() for m in pattern.findall(text)]
