from fem import stepper
from lib import config

from . import output


def test_format_value():
    # yapf: disable
    tests = [
        (None, ''),
        (0.1, '0.1'),
        (1 / 3, '0.3333333333333333'),
        (1e-20, '1e-20'),
        (float('nan'), 'nan'),
        (3, '3'),
        (True, 'true'),
        ('m1', 'm1'),
    ]
    # yapf: enable
    got = []
    want = []
    for value, expected in tests:
        want.append(expected)
        got.append(output.format_value(value))
    assert want == got


def test_presentation():
    # yapf: disable
    tests = [
        (None, ''),
        (4.15912, '4.159'),
        (2.4571234e-3, '0.002457'),
        (3.9767e-5, '3.977e-05'),
        (12345.6, '1.235e+04'),
    ]
    # yapf: enable
    got = []
    want = []
    for value, expected in tests:
        want.append(expected)
        got.append(output.presentation(value))
    assert want == got


def test_write_csv(tmp_path):
    path = tmp_path / 'out.csv'
    output.write_csv(path, ('t', 'M0', 'note'), [[0.0, 1.0, None],
                                                 [0.5, 1.5, 'x,y']])
    assert path.read_text() == 't,M0,note\n0.0,1.0,\n0.5,1.5,"x,y"\n'
    try:
        output.write_csv(path, ('t',), [[0.0, 1.0]])
        assert False, 'expected ValueError'
    except ValueError as ex:
        assert str(ex) == 'out.csv: row of 2 cells for 1 columns'


def test_write_provenance(tmp_path):
    cfg = config.resolve('run', {
        'case': 'm1',
        'T': 0.5,
        'output_dir': str(tmp_path)
    })
    path = tmp_path / 'provenance.txt'
    output.write_provenance(path, cfg, ['a note'])
    lines = path.read_text().splitlines()
    assert lines[0] == '# run m1'
    assert lines[-1] == '# a note'
    got = {line.split('=')[0].strip(): line for line in lines[1:-1]}
    assert got['T'].endswith('= 0.5  # command line')
    assert got['tau'].endswith('= 0.001  # case')
    assert got['quad_points'].endswith('= automatic  # default')


def test_write_failure(tmp_path):
    path = tmp_path / 'failure.txt'
    failure = stepper.NewtonFailure('did not converge', [1.0, 0.25],
                                    time=0.002,
                                    step=2)
    output.write_failure(path, 'm1 N=8 r=1', failure)
    output.write_failure(path, 'm1 N=16 r=1', failure)
    lines = path.read_text().splitlines()
    assert lines[:4] == [
        'm1 N=8 r=1: did not converge',
        '  step 2, t = 0.002',
        '    0 1.0',
        '    1 0.25',
    ]
    assert lines[4] == 'm1 N=16 r=1: did not converge'
