"""Small shared helpers: thread-count resolution and atomic file writes."""

import os
import tempfile


def effective_threads():
    """Resolve the internal parallelism cap from ``CBPT_THREADS``.

    Unset or ``0`` means auto (one worker per CPU). Values below zero are
    treated as 1.
    """
    raw = os.environ.get("CBPT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temp file + rename so readers never
    observe a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
