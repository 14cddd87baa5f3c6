import pathlib

import psutil


def directory(path: pathlib.Path) -> pathlib.Path:
    """Creates a results or cache directory with its parents and returns it.

    Raises:
        NotADirectoryError: if the path names an existing file.
    """
    if path.exists() and not path.is_dir():
        raise NotADirectoryError(f'Output path ‘{path}’ is not a directory')
    path.mkdir(parents=True, exist_ok=True)
    return path


def cpu_count() -> int:
    """Returns number of CPUs the process may run on."""
    try:
        return len(psutil.Process().cpu_affinity() or ()) or 1
    except (AttributeError, psutil.Error):
        # cpu_affinity is not available on every platform.
        return psutil.cpu_count() or 1


def format_elapsed(seconds: float) -> str:
    """Wall time of a run for the log; sub-second runs keep milliseconds."""
    if seconds < 60:
        return f'{seconds:.3f} s' if seconds < 1 else f'{seconds:.1f} s'
    num = int(seconds)
    minutes, secs = divmod(num, 60)
    if minutes < 60:
        return f'{minutes} min {secs:02} s'
    return f'{minutes // 60} h {minutes % 60:02} min {secs:02} s'
