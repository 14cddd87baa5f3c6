"""Kernel expression grammar.

Collision kernels:

    product           Π_a y_a z_a
    constant          1
    poly(<c>)         Π_a (y_a + c)^{1/3} (z_a + c)^{1/3}
    sum               y + z (one dimension only)
    zero              no collisions

Breakage kernels:

    binary_uniform              2/y (one dimension only)
    multi_uniform(<d>)          2^d / Π_a y_a
    dirac(<a>:<w>,…)            Π_a Σ_m w_m δ(x_a − a_m y_a)
    power(<c>,<p>,<q>)          c·x^p·y^q (one dimension only)
    tc3_literal                 (3/2) x^{1/2} y^{1/2}
    tc3_normalized              (5/2) x^{1/2} y^{−3/2}
    tc3_ternary                 (3/2) x^{−1/2} y^{−1/2}
    zero                        no fragments

Whitespace is ignored.  Parsing errors raise ValueError naming the offending
token.
"""

import re
import typing

from fem import kernel_algebra as ka

_CALL_RE = re.compile(r'^([a-z][a-z0-9_]*)(?:\((.*)\))?$')


def _split_call(text: str) -> tuple[str, typing.Optional[list[str]]]:
    """Splits ‘name(arg,…)’ into name and argument list.

    Returns:
        Name and arguments; arguments are None when there were no parentheses.
    Raises:
        ValueError: if the text is not a name optionally followed by
            a parenthesised argument list.
    """
    spec = ''.join(text.split())
    if not spec:
        raise ValueError('Empty kernel specification')
    match = _CALL_RE.search(spec)
    if not match:
        raise ValueError(f'Invalid kernel specification ‘{spec}’')
    name, args = match.groups()
    if args is None:
        return name, None
    return name, args.split(',') if args else []


def _parse_float(word: str) -> float:
    try:
        return float(word)
    except ValueError as ex:
        raise ValueError(f'Invalid number ‘{word}’') from ex


def _expect_args(name: str, args: typing.Optional[list[str]],
                 count: int) -> list[float]:
    if count == 0:
        if args:
            raise ValueError(f'Kernel ‘{name}’ takes no arguments')
        return []
    if args is None or len(args) != count:
        raise ValueError(f'Kernel ‘{name}’ expects {count} argument(s)')
    return [_parse_float(arg) for arg in args]


def _expect_one_dim(name: str, dim: int) -> None:
    if dim != 1:
        raise ValueError(f'Kernel ‘{name}’ is one-dimensional, not {dim}D')


def _uniform_term(coef: float, dim: int, first: ka.UnivariateFactor,
                  second: ka.UnivariateFactor) -> ka.SeparableTerm:
    return ka.SeparableTerm(coef, (first,) * dim, (second,) * dim)


def _check_dim(dim: int) -> None:
    if not 1 <= dim <= 3:
        raise ValueError(f'Unsupported dimension ‘{dim}’')


def parse_collision(text: str, dim: int) -> ka.CollisionKernel:
    """Parses a collision kernel expression for a `dim`-dimensional problem.

    Raises:
        ValueError: if the expression is malformed or does not fit `dim`.
    """
    _check_dim(dim)
    name, args = _split_call(text)
    one = ka.constant()
    terms: list[ka.SeparableTerm]
    if name == 'product':
        _expect_args(name, args, 0)
        identity = ka.monomial(1)
        terms = [_uniform_term(1.0, dim, identity, identity)]
    elif name == 'constant':
        _expect_args(name, args, 0)
        terms = [_uniform_term(1.0, dim, one, one)]
    elif name == 'poly':
        (shift,) = _expect_args(name, args, 1)
        root = ka.shifted_power(shift, 1 / 3)
        terms = [_uniform_term(1.0, dim, root, root)]
    elif name == 'sum':
        _expect_args(name, args, 0)
        _expect_one_dim(name, dim)
        identity = ka.monomial(1)
        terms = [
            ka.SeparableTerm(1.0, (identity,), (one,)),
            ka.SeparableTerm(1.0, (one,), (identity,)),
        ]
    elif name == 'zero':
        _expect_args(name, args, 0)
        terms = []
    else:
        raise ValueError(f'Unknown collision kernel ‘{name}’')
    return ka.CollisionKernel(_canonical(name, args), dim, tuple(terms))


def _parse_atoms(args: typing.Optional[list[str]]) -> list[tuple[float, float]]:
    if not args:
        raise ValueError('Kernel ‘dirac’ needs at least one atom')
    atoms = []
    for arg in args:
        ratio, sep, weight = arg.partition(':')
        if not sep:
            raise ValueError(f'Invalid atom ‘{arg}’; expected <ratio>:<weight>')
        atoms.append((_parse_float(ratio), _parse_float(weight)))
    return atoms


def parse_breakage(text: str, dim: int) -> ka.BreakageKernel:
    """Parses a breakage kernel expression for a `dim`-dimensional problem.

    Raises:
        ValueError: if the expression is malformed, does not fit `dim` or
            names an invalid Dirac atom.
    """
    _check_dim(dim)
    name, args = _split_call(text)
    canonical = _canonical(name, args)
    one = ka.constant()
    if name == 'dirac':
        return ka.DiracBreakage(canonical, dim, tuple(_parse_atoms(args)))
    terms: list[ka.SeparableTerm]
    if name == 'binary_uniform':
        _expect_args(name, args, 0)
        _expect_one_dim(name, dim)
        terms = [_uniform_term(2.0, 1, one, ka.monomial(-1))]
    elif name == 'multi_uniform':
        (count,) = _expect_args(name, args, 1)
        if count != dim:
            raise ValueError(f'Kernel ‘{canonical}’ is for dimension '
                             f'{count:g}, not {dim}')
        terms = [_uniform_term(2.0**dim, dim, one, ka.monomial(-1))]
    elif name == 'power':
        coef, outer, inner = _expect_args(name, args, 3)
        _expect_one_dim(name, dim)
        terms = [
            ka.SeparableTerm(coef, (ka.monomial(outer),), (ka.monomial(inner),))
        ]
    elif name == 'tc3_literal':
        _expect_args(name, args, 0)
        terms = [_uniform_term(1.5, dim, ka.monomial(0.5), ka.monomial(0.5))]
    elif name == 'tc3_normalized':
        _expect_args(name, args, 0)
        terms = [_uniform_term(2.5, dim, ka.monomial(0.5), ka.monomial(-1.5))]
    elif name == 'tc3_ternary':
        _expect_args(name, args, 0)
        terms = [_uniform_term(1.5, dim, ka.monomial(-0.5), ka.monomial(-0.5))]
    elif name == 'zero':
        _expect_args(name, args, 0)
        terms = []
    else:
        raise ValueError(f'Unknown breakage kernel ‘{name}’')
    return ka.SmoothBreakage(canonical, dim, tuple(terms))


def _canonical(name: str, args: typing.Optional[list[str]]) -> str:
    """Formats an expression without whitespace for use in file headers."""
    if args is None:
        return name
    return f'{name}({",".join(args)})'
