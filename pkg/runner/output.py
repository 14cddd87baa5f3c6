"""CSV and text emission of command results.

Floats are written with their shortest round-trip representation so that
identical runs give byte-identical files.  Table files additionally carry
columns with four significant digits for reading next to printed tables.
"""

import csv
import math
import pathlib
import typing

from fem import stepper
from lib import config

Cell = typing.Union[None, str, int, float]


def format_value(value: Cell) -> str:
    """Formats a cell; None becomes an empty cell."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        return repr(value)
    return str(value)


def presentation(value: typing.Optional[float]) -> str:
    """Formats a number with four significant digits."""
    if value is None or math.isnan(value):
        return ''
    return f'{value:.4g}' if 1e-3 <= abs(value) < 1e4 else f'{value:.3e}'


def write_csv(path: pathlib.Path, header: typing.Sequence[str],
              rows: typing.Iterable[typing.Sequence[Cell]]) -> None:
    """Writes a CSV file with a header line.

    Raises:
        ValueError: if a row does not match the header.
    """
    with open(path, 'w', encoding='utf-8', newline='') as wr:
        writer = csv.writer(wr, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f'{path.name}: row of {len(row)} cells for '
                                 f'{len(header)} columns')
            writer.writerow([format_value(cell) for cell in row])


def write_provenance(path: pathlib.Path, cfg: config.RunConfig,
                     notes: typing.Sequence[str] = ()) -> None:
    """Writes every setting with where it came from.

    Lines have the form ‘key = value  # origin’ so the file can be edited
    into a configuration file.
    """
    width = max((len(key) for key, _, _ in cfg.provenance), default=0)
    with open(path, 'w', encoding='utf-8') as wr:
        wr.write(f'# {cfg.command} {cfg.case}\n')
        for key, value, origin in cfg.provenance:
            wr.write(f'{key:<{width}} = {value}  # {origin}\n')
        for note in notes:
            wr.write(f'# {note}\n')


def write_failure(path: pathlib.Path, label: str,
                  failure: stepper.NewtonFailure) -> None:
    """Appends a Newton failure with its residual history."""
    with open(path, 'a', encoding='utf-8') as wr:
        wr.write(f'{label}: {failure}\n')
        wr.write(f'  step {failure.step}, t = {failure.time!r}\n')
        for index, residual in enumerate(failure.history):
            wr.write(f'  {index:3} {residual!r}\n')

