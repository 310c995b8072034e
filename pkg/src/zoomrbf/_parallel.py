"""Worker-count setting shared by the neighbour queries."""
import os

_workers = None


def get_workers() -> int:
    if _workers is not None:
        return _workers
    env = os.environ.get("ZOOMRBF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def set_workers(n: int | None) -> None:
    """Cap the number of threads used by k-d tree queries (``None`` resets)."""
    global _workers
    if n is not None and n < 1:
        raise ValueError("thread count must be positive")
    _workers = n
