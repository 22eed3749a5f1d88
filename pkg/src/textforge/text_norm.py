"""Shared tokenizer: one definition of "word" for the vectorizer, the n-gram
models and the leakage filter.

All three consumers must agree on token boundaries, otherwise the
5-consecutive-token overlap test and the bag-of-words features would drift
apart.  Rules: NFC-normalize, lowercase, split on whitespace, split
punctuation off as separate tokens (apostrophes and hyphens survive inside a
word), and keep URLs/@-mentions whole.
"""

import unicodedata

_JOINERS = {"'", "’", "-"}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def _is_word_char(ch: str) -> bool:
    return not _is_punct(ch) and not ch.isspace()


def _keep_whole(chunk: str) -> bool:
    return chunk.startswith(("http", "www.", "@"))


def _split_chunk(chunk: str) -> list[str]:
    out: list[str] = []
    buf: list[str] = []
    n = len(chunk)
    for i, ch in enumerate(chunk):
        if _is_punct(ch):
            intra = (
                ch in _JOINERS
                and 0 < i < n - 1
                and _is_word_char(chunk[i - 1])
                and _is_word_char(chunk[i + 1])
            )
            if intra:
                buf.append(ch)
            else:
                if buf:
                    out.append("".join(buf))
                    buf = []
                out.append(ch)
        else:
            buf.append(ch)
    if buf:
        out.append("".join(buf))
    return out


def tokenize(text: str) -> list[str]:
    """Normalize ``text`` and return its token stream (possibly empty)."""
    norm = unicodedata.normalize("NFC", text).lower()
    tokens: list[str] = []
    for chunk in norm.split():
        if _keep_whole(chunk):
            tokens.append(chunk)
        else:
            tokens.extend(_split_chunk(chunk))
    return tokens


def join(tokens: list[str]) -> str:
    """Inverse-ish of :func:`tokenize`: space-join, so that
    ``tokenize(join(tokenize(t))) == tokenize(t)``."""
    return " ".join(tokens)
