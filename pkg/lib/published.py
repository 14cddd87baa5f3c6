"""Published reference values of the breakage experiments.

The numbers are inert constants used to put computed values next to the ones
previously reported for the same experiments.  Nothing here is recomputed;
competitor methods (VIM, MVIM, FVM, HPM, BLUES, APM) are not implemented and
only their reported numbers are kept.
"""

import math
import typing


class MomentTable(typing.NamedTuple):
    """Reported moment values and relative errors.

    Attributes:
        case: Case identifier.
        order: Moment multi-index.
        grids: Number of elements per axis of every column.
        times: Time of every row.
        values: Reported moment per row and grid.
        errors: Reported relative error per row and grid.
    """
    case: str
    order: tuple[int, ...]
    grids: tuple[int, ...]
    times: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]
    errors: tuple[tuple[float, ...], ...]

    def lookup(self, time: float,
               grid: int) -> typing.Optional[tuple[float, float]]:
        """Returns (value, relative error) reported at given time and grid."""
        if grid not in self.grids:
            return None
        col = self.grids.index(grid)
        for row, t in enumerate(self.times):
            if math.isclose(t, time, rel_tol=1e-9, abs_tol=1e-12):
                return self.values[row][col], self.errors[row][col]
        return None


def _table(case: str, order: tuple[int, ...], grids: tuple[int, ...],
           times: tuple[float, ...],
           rows: typing.Sequence[typing.Sequence[float]]) -> MomentTable:
    """Builds a table from rows of interleaved (value, error) pairs."""
    return MomentTable(case, order, grids, times,
                       tuple(tuple(row[0::2]) for row in rows),
                       tuple(tuple(row[1::2]) for row in rows))


_1D_GRIDS = (80, 160, 320)

# yapf: disable
MOMENTS: tuple[MomentTable, ...] = (
    _table('m1', (0,), _1D_GRIDS, (2.0, 4.0, 6.0, 8.0, 10.0), (
        (3.0088, 2.9199e-3, 3.0022, 7.2990e-4, 3.0005, 1.8225e-4),
        (5.0405, 8.1078e-3, 5.0101, 2.0288e-3, 5.0025, 5.0729e-4),
        (7.1111, 1.5875e-2, 7.0278, 3.9769e-3, 7.0070, 9.9468e-4),
        (9.2358, 2.6198e-2, 9.0592, 6.5730e-3, 9.0148, 1.6446e-3),
        (11.4295, 3.9046e-2, 11.1080, 9.8152e-3, 11.0270, 2.4571e-3),
    )),
    _table('m1', (1,), _1D_GRIDS, (2.0, 4.0, 6.0, 8.0, 10.0), (
        (1.0028, 2.7643e-3, 1.0007, 6.8521e-4, 1.0002, 1.6742e-4),
        (1.0076, 7.5516e-3, 1.0019, 1.8712e-3, 1.0005, 4.6614e-4),
        (1.0148, 1.4771e-2, 1.0036, 3.6345e-3, 1.0009, 9.0289e-4),
        (1.0245, 2.4541e-2, 1.0060, 5.9909e-3, 1.0015, 1.4837e-3),
        (1.0370, 3.6996e-2, 1.0090, 8.9525e-3, 1.0022, 2.2099e-3),
    )),
    _table('m2', (0,), _1D_GRIDS, (0.15, 0.3, 0.45, 0.6, 0.75), (
        (1.1685, 6.7832e-3, 1.1675, 7.6553e-3, 1.2398, 8.1714e-3),
        (1.4214, 5.0260e-3, 1.4165, 8.4154e-3, 1.4152, 9.3373e-3),
        (1.8306, 6.8034e-3, 1.8060, 6.7244e-3, 1.7986, 1.0747e-2),
        (2.6810, 7.2388e-2, 2.5278, 1.1126e-2, 2.4794, 8.2411e-3),
        (7.3156, 8.2891e-1, 4.7208, 1.8020e-1, 4.1591, 3.9767e-2),
    )),
    _table('m2', (1,), _1D_GRIDS, (0.15, 0.3, 0.45, 0.6, 0.75), (
        (0.9598, 4.0162e-2, 0.9596, 4.0430e-2, 0.9595, 4.0471e-2),
        (0.9601, 3.9899e-2, 0.9596, 4.0410e-2, 0.9595, 4.0517e-2),
        (0.9636, 3.6355e-2, 0.9599, 4.0127e-2, 0.9595, 4.0510e-2),
        (0.9670, 3.3028e-2, 0.9612, 3.8834e-2, 0.9597, 4.0280e-2),
        (1.0333, 3.3329e-2, 0.9707, 2.9326e-2, 0.9616, 3.8415e-2),
    )),
    _table('m3', (0,), _1D_GRIDS, (1.0, 2.0, 3.0, 4.0, 5.0), (
        (2.0022, 1.1187e-3, 2.0005, 2.4559e-4, 2.0001, 2.7344e-5),
        (3.0041, 1.3664e-3, 3.0010, 3.4126e-4, 3.0003, 8.5073e-5),
        (4.0061, 1.5290e-3, 4.0015, 3.8206e-4, 4.0004, 9.5491e-5),
        (5.0083, 1.6678e-3, 5.0021, 4.1663e-4, 5.0005, 1.0412e-4),
        (6.0107, 1.7903e-3, 6.0027, 4.4710e-4, 6.0007, 1.1171e-4),
    )),
    _table('m3', (1,), _1D_GRIDS, (1.0, 2.0, 3.0, 4.0, 5.0), (
        (1.0025, 2.4796e-3, 1.0002, 2.4480e-4, 0.9997, 3.1339e-4),
        (1.0034, 3.4059e-3, 1.0008, 8.4613e-4, 1.0002, 2.0768e-4),
        (1.0037, 3.6501e-3, 1.0009, 9.0809e-4, 1.0002, 2.2646e-4),
        (1.0038, 3.7598e-3, 1.0009, 9.3047e-4, 1.0002, 2.3141e-4),
        (1.0038, 3.7651e-3, 1.0009, 9.2367e-4, 1.0002, 2.2862e-4),
    )),
    _table('m4', (0,), _1D_GRIDS, (1.0, 2.0, 3.0, 4.0, 5.0), (
        (2.0029, 1.1584e-2, 2.0007, 1.0437e-2, 2.0001, 1.0151e-2),
        (3.0052, 1.5268e-2, 3.0013, 1.3952e-2, 3.0003, 1.3623e-2),
        (4.0076, 1.7159e-2, 4.0019, 1.5711e-2, 4.0005, 1.5349e-2),
        (5.0102, 1.8337e-2, 5.0026, 1.6779e-2, 5.0006, 1.6390e-2),
        (6.0130, 1.9154e-2, 6.0032, 1.7500e-2, 6.0008, 1.7087e-2),
    )),
    _table('m4', (1,), _1D_GRIDS, (1.0, 2.0, 3.0, 4.0, 5.0), (
        (1.0035, 3.4855e-3, 1.0005, 4.9590e-4, 0.9997, 2.5064e-4),
        (1.0045, 4.4717e-3, 1.0011, 1.1122e-3, 1.0003, 2.7416e-4),
        (1.0047, 4.7470e-3, 1.0012, 1.1819e-3, 1.0003, 2.9488e-4),
        (1.0049, 4.8763e-3, 1.0012, 1.2092e-3, 1.0003, 3.0108e-4),
        (1.0049, 4.8938e-3, 1.0012, 1.2056e-3, 1.0003, 2.9908e-4),
    )),
    _table('m5', (0, 0), (80, 120, 160), (0.6, 1.2, 1.8, 2.4, 3.0), (
        (2.82284, 8.16e-3, 2.81821, 6.5e-3, 2.81675, 5.98e-3),
        (4.6746, 1.62e-2, 4.66369, 1.38e-2, 4.66034, 1.31e-2),
        (6.54567, 2.28e-2, 6.52703, 1.98e-2, 6.52139, 1.89e-2),
        (8.43004, 2.81e-2, 8.40241, 2.46e-2, 8.39413, 2.37e-2),
        (10.324, 3.24e-2, 10.2862, 2.86e-2, 10.275, 2.75e-2),
    )),
    _table('m5', (1, 1), (80, 120, 160), (0.6, 1.2, 1.8, 2.4, 3.0), (
        (1.0113, 1.13e-2, 1.00989, 9.89e-3, 1.00944, 9.44e-3),
        (1.0175, 1.75e-2, 1.01572, 1.57e-2, 1.01517, 1.52e-2),
        (1.0217, 2.17e-2, 1.01957, 1.96e-2, 1.01893, 1.89e-2),
        (1.02462, 2.46e-2, 1.02222, 2.22e-2, 1.0215, 2.15e-2),
        (1.02616, 2.62e-2, 1.02411, 2.41e-2, 1.02332, 2.33e-2),
    )),
    _table('m6', (0, 0, 0), (15, 20, 25), (0.4, 0.8, 1.2, 1.6, 2.0), (
        (3.89905, 2.62e-2, 3.8675, 1.78e-2, 3.85306, 1.39e-2),
        (6.9867, 5.85e-2, 6.83627, 3.57e-2, 6.7907, 2.89e-2),
        (10.0945, 7.38e-2, 9.88797, 5.19e-2, 9.79495, 4.2e-2),
        (13.3592, 9.5e-2, 13.0095, 6.64e-2, 12.853, 5.35e-2),
        (16.722, 1.15e-1, 16.1918, 7.94e-2, 15.9563, 6.37e-2),
    )),
    _table('m6', (1, 1, 1), (15, 20, 25), (0.4, 0.8, 1.2, 1.6, 2.0), (
        (1.02564, 2.56e-2, 1.01939, 1.94e-2, 1.01652, 1.65e-2),
        (1.04262, 4.26e-2, 1.03228, 3.22e-2, 1.02758, 2.76e-2),
        (1.05674, 5.67e-2, 1.04247, 4.25e-2, 1.03602, 3.6e-2),
        (1.06895, 6.89e-2, 1.05086, 5.09e-2, 1.04272, 4.27e-2),
        (1.07989, 7.98e-2, 1.05803, 5.8e-2, 1.04825, 4.82e-2),
    )),
)
# yapf: enable


def moment_table(case: str,
                 order: typing.Sequence[int]) -> typing.Optional[MomentTable]:
    """Returns the reported table of one moment of a case if there is one."""
    key = tuple(order)
    for table in MOMENTS:
        if table.case == case and table.order == key:
            return table
    return None


class ErrorTable(typing.NamedTuple):
    """Reported errors of a refinement study for one polynomial degree.

    Attributes:
        case: Case identifier.
        degree: Polynomial degree of the elements.
        elements: Number of elements per axis of every row.
        errors: Reported error per norm and row.
        orders: Reported convergence order per norm for every row after the
            first, as printed.
    """
    case: str
    degree: int
    elements: tuple[int, ...]
    errors: dict[str, tuple[float, ...]]
    orders: dict[str, tuple[float, ...]]

    def lookup(self, norm: str, elements: int) -> typing.Optional[float]:
        if norm not in self.errors or elements not in self.elements:
            return None
        return self.errors[norm][self.elements.index(elements)]


# The printed multi-dimensional tables list the error relative to the exact
# solution under ‘Rel’; it is stored here as ‘RelL2’.
#
# yapf: disable
ERRORS: tuple[ErrorTable, ...] = (
    ErrorTable('c1', 1, (20, 40, 80, 160, 320), {
        'L2': (5.0971e-2, 1.2882e-2, 3.2293e-3, 8.0789e-4, 2.0201e-4),
        'RelLinf': (3.7500e-3, 9.3750e-4, 2.3437e-4, 5.8594e-5, 1.4648e-5),
        'H1': (6.2539e-1, 3.0119e-1, 1.4752e-1, 7.2971e-2, 3.6286e-2),
    }, {
        'L2': (1.98, 2.00, 2.00, 2.00),
        'RelLinf': (2.00, 2.00, 2.00, 2.00),
        'H1': (1.05, 1.03, 1.02, 1.01),
    }),
    ErrorTable('c2', 1, (80, 160, 320, 640, 1280), {
        'L2': (1.0424e-1, 2.9550e-2, 7.5001e-3, 1.8822e-3, 4.7099e-4),
        'RelLinf': (4.6160e-4, 1.1967e-4, 3.0466e-5, 7.6859e-6, 1.9302e-6),
        'H1': (5.1007, 2.7061, 1.3660, 6.8373e-1, 3.4172e-1),
    }, {
        'L2': (1.82, 1.98, 1.99, 2.00),
        'RelLinf': (1.95, 1.97, 1.99, 1.99),
        'H1': (0.91, 0.99, 1.00, 1.00),
    }),
    ErrorTable('c3', 1, (2, 4, 8, 16, 32), {
        'L2': (3.48014, 0.996604, 0.257915, 0.0648008, 0.0161848),
        'H1': (11.9988, 6.88312, 3.59375, 1.81799, 0.9117),
        'RelL2': (0.876857, 0.249286, 0.0645007, 0.0162056, 0.00404756),
    }, {'L2': (2.001,), 'H1': (0.996,), 'RelL2': (2.001,)}),
    ErrorTable('c3', 2, (2, 4, 8, 16, 32), {
        'L2': (0.573831, 0.0819333, 0.0106545, 0.00134638, 1.68756e-4),
        'H1': (4.45592, 1.39383, 0.371731, 0.0944768, 0.0237149),
        'RelL2': (0.144583, 0.0204944, 0.00266453, 0.000336707, 4.22033e-5),
    }, {'L2': (2.996,), 'H1': (1.994,), 'RelL2': (2.996,)}),
    ErrorTable('c3', 3, (2, 4, 8, 16, 32), {
        'L2': (0.262906, 0.0197745, 0.00131421, 8.4596e-5, 5.37065e-6),
        'H1': (2.45866, 0.345652, 0.0375924, 0.00417299, 0.000573742),
        'RelL2': (0.0662418, 0.0049463, 0.000328663, 2.11561e-5, 1.34311e-6),
    }, {'L2': (3.977,), 'H1': (2.863,), 'RelL2': (3.977,)}),
    ErrorTable('c4', 1, (1, 2, 4, 8), {
        'L2': (53.3902, 15.5819, 4.18123, 1.06363),
        'H1': (101.214, 53.5353, 26.8678, 13.3194),
        'RelL2': (9.02967, 1.99624, 0.523308, 0.133023),
    }, {'L2': (1.975,), 'H1': (1.012,), 'RelL2': (1.976,)}),
    ErrorTable('c4', 2, (1, 2, 4, 8), {
        'L2': (21.9696, 3.07934, 0.43134, 0.0556957),
        'H1': (69.2115, 22.0405, 6.97008, 1.86878),
        'RelL2': (3.71563, 0.394505, 0.053985, 0.00696557),
    }, {'L2': (2.953,), 'H1': (1.899,), 'RelL2': (2.954,)}),
    ErrorTable('c4', 3, (1, 2, 4, 8), {
        'L2': (9.43861, 1.17462, 0.0963823, 0.00661202),
        'H1': (43.3467, 10.88, 1.71704, 0.207545),
        'RelL2': (1.59631, 0.150484, 0.0120629, 0.000826931),
    }, {'L2': (3.866,), 'H1': (3.048,), 'RelL2': (3.867,)}),
)
# yapf: enable


def error_table(case: str, degree: int) -> typing.Optional[ErrorTable]:
    for table in ERRORS:
        if table.case == case and table.degree == degree:
            return table
    return None


class PointValues(typing.NamedTuple):
    """Reported solution values and absolute errors at one point.

    Attributes:
        case: Case identifier.
        x: The point.
        times: Time of every row.
        exact: Reported exact value per row.
        values: Reported numerical value per method and row.
        errors: Reported absolute error per method and row.
    """
    case: str
    x: float
    times: tuple[float, ...]
    exact: tuple[float, ...]
    values: dict[str, tuple[float, ...]]
    errors: dict[str, tuple[float, ...]]

    def row(self, time: float) -> typing.Optional[int]:
        for index, t in enumerate(self.times):
            if math.isclose(t, time, rel_tol=1e-9, abs_tol=1e-12):
                return index
        return None


# yapf: disable
POINT_VALUES: tuple[PointValues, ...] = (
    PointValues(
        'c1', 5.0, (0.3, 0.6, 0.9, 1.2, 1.5, 1.8),
        (0.00250, 0.00085, 0.00027, 8.084e-5, 2.329e-5, 6.519e-6),
        {
            'VIM': (0.00250, 0.00180, 0.01040, 0.05000, 0.17040, 0.45600),
            'MVIM': (0.00250, 0.00105, 0.00194, 0.00689, 0.01880, 0.04090),
            'FEM': (0.00250, 0.00085, 0.00027, 8.112e-5, 2.373e-5, 7.14e-6),
        },
        {
            'VIM': (1.855e-5, 1.028e-3, 1.019e-2, 5.032e-2, 1.704e-1,
                    4.560e-1),
            'MVIM': (4.175e-6, 2.003e-4, 1.670e-3, 6.815e-3, 1.886e-2,
                     4.098e-2),
            'FVM': (9.756e-6, 6.8776e-4, 2.138e-3, 7.485e-3, 2.424e-2,
                    1.356e-2),
            'FEM': (2.5319e-8, 8.2486e-8, 1.6618e-7, 2.8230e-7, 4.3395e-7,
                    6.2158e-7),
        }),
)
# yapf: enable


def point_values(case: str, x: float) -> typing.Optional[PointValues]:
    for table in POINT_VALUES:
        if table.case == case and math.isclose(table.x, x):
            return table
    return None


class MethodErrors(typing.NamedTuple):
    """Reported relative errors over time and CPU seconds of one method."""
    method: str
    errors: tuple[float, ...]
    cpu_seconds: float


# Relative errors of the number density on [0, 10] for case c1.
METHOD_CASE = 'c1'
# yapf: disable
METHOD_TIMES = (1.0, 1.5, 2.0, 2.5, 3.0)
METHOD_ERRORS: tuple[MethodErrors, ...] = (
    MethodErrors('HPM', (4.8030e-5, 2.6833e-4, 7.9302e-4, 1.6617e-3,
                         2.8746e-3), 5.96),
    MethodErrors('BLUES', (4.8030e-5, 2.6833e-4, 7.9302e-4, 1.6617e-3,
                           2.8746e-3), 11.81),
    MethodErrors('APM', (6.8014e-5, 7.5897e-5, 7.6001e-5, 7.0496e-5,
                         6.0488e-5), 22.78),
    MethodErrors('FEM', (3.6621e-6, 5.2734e-6, 6.5104e-6, 7.4737e-6,
                         8.2397e-6), 2.51),
)
# yapf: enable


class GridErrors(typing.NamedTuple):
    """Reported L¹ errors at the final time on non-uniform and random grids.

    Attributes:
        case: Case identifier.
        time: Time at which the errors were taken.
        elements: Number of elements of every row.
        errors: Reported error per (method, grid mode) and row.
        cpu_seconds: Reported CPU seconds per (method, grid mode).
    """
    case: str
    time: float
    elements: tuple[int, ...]
    errors: dict[tuple[str, str], tuple[float, ...]]
    cpu_seconds: dict[tuple[str, str], float]

    def lookup(self, method: str, mode: str,
               elements: int) -> typing.Optional[float]:
        values = self.errors.get((method, mode))
        if values is None or elements not in self.elements:
            return None
        return values[self.elements.index(elements)]


# yapf: disable
GRID_ERRORS = GridErrors(
    'c2', 10.0, (60, 120, 240, 480, 960),
    {
        ('existing', 'geometric'): (9.02e-2, 3.87e-2, 1.77e-2, 8.40e-3,
                                    4.09e-3),
        ('FEM', 'geometric'): (4.0071e-1, 1.3689e-1, 4.0138e-2, 1.0877e-2,
                               2.8316e-3),
        ('existing', 'random'): (0.35, 0.21, 0.19, 0.19, 0.19),
        ('FEM', 'random'): (4.0228e-1, 1.3701e-1, 4.0135e-2, 1.0877e-2,
                            2.8316e-3),
    },
    {
        ('existing', 'geometric'): 78.31,
        ('existing', 'random'): 83.92,
        ('FEM', 'geometric'): 47.97,
        ('FEM', 'random'): 47.97,
    })
# yapf: enable
