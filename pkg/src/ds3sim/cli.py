"""``sim`` command-line runner.

Exit status: 0 when every check passes, 1 when a check fails, 2 for bad configuration
or an unusable layout.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import protocols as pr
from .group import omega_power
from .lattice import LatticeLayout, LayoutError, ground_state, get_layout, load_layout

log = logging.getLogger('ds3sim')

COMMANDS = ('ground-state', 'r-matrix', 'f-matrix', 'fusion-check', 'exchange-check', 'commutator', 'dense',
            'full-report')
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
_LOG_LEVELS = {'error': logging.ERROR, 'info': logging.INFO, 'debug': logging.DEBUG}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    layout: LatticeLayout
    tolerance: float = 1e-10
    output: Path | None = None
    format: str = 'pretty'
    save_state: Path | None = None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='sim', description='D(S3) lattice anyon protocols.')
    p.add_argument('command', choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument('--layout', default=None, help='built-in layout name (default plaquette1)')
    src.add_argument('--layout-file', type=Path, default=None, help='JSON layout file')
    p.add_argument('--tolerance', type=float, default=1e-10)
    p.add_argument('--format', choices=('pretty', 'json'), default='pretty')
    p.add_argument('--output', type=Path, default=None, help='write output here instead of stdout')
    p.add_argument('--save-state', type=Path, default=None, help='ground-state: write the state vector as JSON')
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    if not (args.tolerance > 0 and math.isfinite(args.tolerance)):
        raise ConfigError(f"tolerance must be a positive number, got {args.tolerance}")
    layout = load_layout(args.layout_file) if args.layout_file else get_layout(args.layout or 'plaquette1')
    return RunConfig(args.command, layout, args.tolerance, args.output, args.format, args.save_state)


# -- pretty formatting --------------------------------------------------------

_OMEGA_SYMBOLS = {0: '1', 1: 'ω', 2: 'ω̄'}


def format_scalar(z: complex, tol: float = 1e-10) -> str:
    z = complex(z)
    if abs(z) < tol:
        return '0'
    for sign, prefix in ((1, ''), (-1, '-')):
        k = omega_power(sign * z, tol)
        if k is not None:
            return prefix + _OMEGA_SYMBOLS[k]
    if abs(z.imag) < tol:
        return f'{z.real:.6g}'
    return f'{z.real:.6g}{z.imag:+.6g}i'


def format_matrix(m, tol: float = 1e-10) -> str:
    """Rows of ``m``; a real matrix of small rationals is printed as ``(1/d) [integers]``."""
    m = np.asarray(m, dtype=complex)
    prefix, cells = '', None
    if np.all(np.abs(m.imag) < tol):
        for d in (1, 2, 3, 4, 6, 8, 12):
            scaled = m.real * d
            if np.all(np.abs(scaled - np.round(scaled)) < tol * d):
                cells = [[str(int(x)) for x in row] for row in np.round(scaled)]
                prefix = '' if d == 1 else f'(1/{d}) '
                break
    if cells is None:
        cells = [[format_scalar(x, tol) for x in row] for row in m]
    width = max(len(c) for row in cells for c in row)
    pad = ' ' * len(prefix)
    return '\n'.join((prefix if i == 0 else pad) + '[' + '  '.join(c.rjust(width) for c in row) + ']'
                     for i, row in enumerate(cells))


def _pretty_checks(checks) -> list[str]:
    return [f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}: residual {c.residual:.3e}" for c in checks]


def render_pretty(report: pr.ProtocolReport, extra: dict, tol: float) -> str:
    out = []
    for title, lines in extra.get('sections', []):
        out.append(title)
        out.extend('  ' + ln for ln in lines)
    if report.r is not None:
        out.append('R^GG (fusion channels A, B, G):')
        out.append(format_matrix(np.diag(report.r.diagonal), tol))
    if report.f is not None:
        out.append('squared F matrix:')
        out.append(format_matrix(report.f.real, tol))
    if report.sign_family is not None:
        sf = report.sign_family
        out.append(f'sign family: {len(sf.candidates)} candidates, '
                   f'min ||[R, F]||_F = {sf.min_commutator_norm:.12g}')
    out.append('checks:')
    out.extend(_pretty_checks(report.checks))
    out.append('result: ' + ('PASS' if report.passed else 'FAIL'))
    return '\n'.join(out) + '\n'


def render_json(report: pr.ProtocolReport, extra: dict) -> str:
    data = report.to_json()
    if 'ground_state' in extra:
        data['ground_state'] = extra['ground_state']
    return json.dumps(data, indent=2, sort_keys=False) + '\n'


# -- commands -----------------------------------------------------------------

def _check(name, residual, tol):
    return pr.Check(name, bool(residual < tol), float(residual))


def cmd_ground_state(cfg: RunConfig, rep: pr.ProtocolReport, extra: dict):
    gs = ground_state(cfg.layout)
    res = gs.stabilizer_residuals()
    for name, r in res.items():
        rep.checks.append(_check(f'stabilizer {name}', r, cfg.tolerance))
    rep.checks.append(pr.Check('unique_ground_state', gs.degeneracy == 1, float(gs.degeneracy - 1)))
    extra['ground_state'] = {'energy': gs.energy, 'degeneracy': gs.degeneracy,
                             'num_qudits': cfg.layout.num_qudits}
    extra['sections'] = [(f'layout {cfg.layout.name}: {cfg.layout.num_qudits} qudits',
                          [f'energy {gs.energy:.12g}', f'degeneracy {gs.degeneracy}'])]
    if cfg.save_state is not None:
        cfg.save_state.write_text(json.dumps(gs.state.to_json()))
        log.info('wrote ground state to %s', cfg.save_state)


def cmd_r_matrix(cfg, rep, extra):
    rep.r = pr.extract_R(cfg.layout, tol=cfg.tolerance)
    rep.checks.append(_check('r_matrix', np.max(np.abs(rep.r.diagonal - pr.R_MATRIX_EXPECTED)), cfg.tolerance))
    rep.checks.append(_check('r_state_norms', np.max(np.abs(rep.r.state_norms - 1)), cfg.tolerance))


def cmd_f_matrix(cfg, rep, extra):
    rep.f = pr.extract_F_squared(cfg.layout, tol=cfg.tolerance)
    rep.checks.append(_check('f_squared', np.max(np.abs(rep.f.f_matrix - pr.F_SQUARED_EXPECTED)), cfg.tolerance))


def cmd_fusion_check(cfg, rep, extra):
    for label, d in pr.fusion_check(cfg.layout).items():
        rep.checks.append(_check(f'fusion_{label}', d, cfg.tolerance))


def cmd_exchange_check(cfg, rep, extra):
    ex = pr.verify_exchange_relation(cfg.tolerance)
    rep.checks.append(pr.Check('exchange_relation', ex['passed'], ex['max_residual']))
    extra['sections'] = [('exchange relation', [f"{ex['positions']} nonzero positions",
                                                f"identical sparsity: {ex['same_pattern']}"])]


def cmd_commutator(cfg, rep, extra):
    ctx = pr.ProtocolContext(cfg.layout)
    rep.r = pr.extract_R(ctx, tol=cfg.tolerance)
    rep.f = pr.extract_F_squared(ctx, tol=cfg.tolerance)
    rep.sign_family = pr.enumerate_sign_family(rep.f.real, rep.r.diagonal, tol=cfg.tolerance)
    rep.checks.append(_check('sign_family_count', abs(len(rep.sign_family.candidates) - 8), 0.5))
    rep.checks.append(_check('commutator_norm', abs(rep.sign_family.min_commutator_norm - math.sqrt(6)),
                             cfg.tolerance))


def cmd_dense(cfg, rep, extra):
    ctx = pr.ProtocolContext(cfg.layout)
    full_r, full_f = pr.extract_R(ctx, tol=cfg.tolerance), pr.extract_F_squared(ctx, tol=cfg.tolerance)
    rep.r, rep.f = pr.run_dense_protocols(cfg.layout)
    rep.checks.append(_check('dense_r_matrix', np.max(np.abs(rep.r.diagonal - full_r.diagonal)), cfg.tolerance))
    rep.checks.append(_check('dense_f_squared', np.max(np.abs(rep.f.f_matrix - full_f.f_matrix)), cfg.tolerance))


def cmd_full_report(cfg, rep, extra):
    full = pr.full_report(cfg.layout, tol=cfg.tolerance)
    rep.r, rep.f, rep.sign_family = full.r, full.f, full.sign_family
    rep.checks.extend(full.checks)


_HANDLERS = {
    'ground-state': cmd_ground_state,
    'r-matrix': cmd_r_matrix,
    'f-matrix': cmd_f_matrix,
    'fusion-check': cmd_fusion_check,
    'exchange-check': cmd_exchange_check,
    'commutator': cmd_commutator,
    'dense': cmd_dense,
    'full-report': cmd_full_report,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    rep, extra = pr.ProtocolReport(), {}
    _HANDLERS[cfg.command](cfg, rep, extra)
    text = render_json(rep, extra) if cfg.format == 'json' else render_pretty(rep, extra, cfg.tolerance)
    return (EXIT_OK if rep.passed else EXIT_FAIL), text


def _setup_logging():
    level = os.environ.get('SIM_LOG', 'error').lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.ERROR), stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    if level not in _LOG_LEVELS:
        log.warning('unknown SIM_LOG level %r, using error', level)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        code, text = run(cfg)
    except (ConfigError, LayoutError) as exc:
        print(f'sim: error: {exc}', file=sys.stderr)
        return EXIT_CONFIG
    except pr.ProtocolError as exc:
        print(f'sim: protocol failed: {exc}', file=sys.stderr)
        return EXIT_FAIL
    if cfg.output is not None:
        try:
            cfg.output.write_text(text)
        except OSError as exc:
            print(f'sim: error: cannot write {cfg.output}: {exc}', file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return code


if __name__ == '__main__':
    sys.exit(main())
