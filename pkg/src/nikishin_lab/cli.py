"""
Command-line experiment runner.

Every command writes CSV tables (15 significant digits, fixed column order),
a JSON summary tagged ``"schema": "v1"`` and, unless ``--no-figures`` is
given, matplotlib figures rendered with the Agg backend.

Exit status: 0 on success, 1 on input errors, 2 when a checked claim fails.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

import numpy

from .demos import DEMOS, demo_descriptor
from .errors import (ClaimViolation, InputError, LabError, NullspaceTooLarge,
                     ValidationError, ZeroCountMismatch)
from .nikishin import system_from_descriptor, system_to_descriptor

__all__ = ['ExperimentPlan', 'main', 'run', 'load_descriptor',
           'emit_report', 'COMMANDS', 'SCHEMA']

SCHEMA = 'v1'
COMMANDS = ('system-build', 'hp-solve', 'hp-scan', 'quad-table',
            'markov-rate', 'reduce-verify', 'equilibrium-solve',
            'asymptotics')


@dataclass
class ExperimentPlan:
    """Validated command, system, parameters and output directory."""

    command: str
    system: object = None
    system_source: str = None
    params: dict = field(default_factory=dict)
    out: str = '.'
    tol: float = None
    seed: int = 0
    figures: bool = True


# ==============
# Input parsing
# ==============

def load_descriptor(path):
    """Mixed system from a JSON descriptor file or ``demo:<name>``."""
    if path.startswith('demo:'):
        name = path[5:]
        if name not in DEMOS:
            raise InputError(f"unknown demo {name!r}; choose from "
                             f"{sorted(DEMOS)}")
        d = demo_descriptor(name)
    else:
        try:
            with open(path) as fh:
                d = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise InputError(f"cannot parse {path}: {exc}")
    return system_from_descriptor(d)


def _ints(text, name):
    try:
        vals = tuple(int(v) for v in str(text).split(',') if v.strip())
    except ValueError:
        raise InputError(f"{name} must be comma-separated integers")
    if not vals or min(vals) < 0:
        raise InputError(f"{name} must be non-empty and non-negative")
    return vals


def _floats(text, name):
    try:
        return tuple(float(v) for v in str(text).split(',') if v.strip())
    except ValueError:
        raise InputError(f"{name} must be comma-separated reals")


def _complexes(text, name):
    try:
        return tuple(complex(v.strip().replace(' ', ''))
                     for v in str(text).split(',') if v.strip())
    except ValueError:
        raise InputError(f"{name} must be comma-separated complex numbers "
                         "such as 3j,1.5+0.5j,-2")


# ==========
# Reporting
# ==========

def _fmt(v):
    if isinstance(v, (bool, numpy.bool_)):
        return 'true' if v else 'false'
    if isinstance(v, (int, numpy.integer)):
        return str(int(v))
    if isinstance(v, (float, numpy.floating)):
        return f"{float(v):.15g}"
    if isinstance(v, (tuple, list)):
        return ' '.join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (numpy.integer,)):
        return int(v)
    if isinstance(v, (numpy.floating, float)):
        return float(f"{float(v):.15g}")
    if isinstance(v, (complex, numpy.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, numpy.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, numpy.bool_):
        return bool(v)
    return v


def emit_report(out, tables=None, summary=None, figures=None):
    """Write ``name.csv`` for each ``(header, rows)`` table, ``summary.json``
    and ``name.png`` for each figure callback; returns the written paths."""
    os.makedirs(out, exist_ok=True)
    paths = []
    for name, (header, rows) in (tables or {}).items():
        p = os.path.join(out, f"{name}.csv")
        with open(p, 'w', newline='') as fh:
            w = csv.writer(fh, lineterminator='\n')
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        paths.append(p)
    if summary is not None:
        p = os.path.join(out, 'summary.json')
        body = {'schema': SCHEMA}
        body.update(_jsonable(summary))
        with open(p, 'w') as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write('\n')
        paths.append(p)
    if figures:
        import matplotlib
        matplotlib.use('Agg')
        import matplotlib.pyplot as plt
        for name, draw in figures.items():
            fig, ax = plt.subplots(figsize=(6, 4))
            draw(ax)
            fig.tight_layout()
            p = os.path.join(out, f"{name}.png")
            fig.savefig(p, dpi=110)
            plt.close(fig)
            paths.append(p)
    return paths


def _write_dat(out, name, rows):
    """Two-column whitespace table for gnuplot."""
    p = os.path.join(out, f"{name}.dat")
    with open(p, 'w') as fh:
        for a, b in rows:
            fh.write(f"{_fmt(a)} {_fmt(b)}\n")
    return p


# =========
# Commands
# =========

def _require_system(plan):
    if plan.system is None:
        raise InputError(f"{plan.command} needs --system")
    return plan.system


def _cmd_system_build(plan):
    mix = _require_system(plan)
    rows = []
    for side, S in (('S1', mix.S1), ('S2', mix.S2)):
        for k in range(S.m + 1):
            s0k = S.s(0, k)
            h = S.sigma(k).hull
            rows.append((side, k, h.a, h.b, s0k.mass))
    desc = system_to_descriptor(mix)
    with open(os.path.join(plan.out, 'system.json'), 'w') as fh:
        json.dump(desc, fh, indent=2, sort_keys=True)
        fh.write('\n')
    summary = {'command': plan.command, 'm1': mix.m1, 'm2': mix.m2,
               'masses': {f"{r[0]}:s0{r[1]}": r[4] for r in rows}}
    return {'masses': (['side', 'k', 'a_k', 'b_k', 'mass_s0k'], rows)}, \
        summary, None


def _cmd_hp_solve(plan):
    from .hermite_pade import (MultiIndex2, monic_normalize,
                               orthogonality_residuals, solve_mixed,
                               zeros_in_hull)
    mix = _require_system(plan)
    n = MultiIndex2(plan.params['n1'], plan.params['n2'])
    try:
        form = solve_mixed(mix, n)
    except NullspaceTooLarge as exc:
        raise ClaimViolation('perfectness', str(exc))
    if form.report.normal and min(n.n1) >= 1:
        form = monic_normalize(form)
    res = orthogonality_residuals(form)
    worst = float(numpy.max(res)) if numpy.size(res) else 0.0
    try:
        zeros = zeros_in_hull(form)
    except ZeroCountMismatch as exc:
        raise ClaimViolation('orthogonality zeros', str(exc))
    coeff_rows = [(k, i, float(c)) for k, ck in enumerate(form.coeffs)
                  for i, c in enumerate(ck)]
    zero_rows = [(i, float(x)) for i, x in enumerate(zeros)]
    tol = plan.tol if plan.tol is not None else 1e-8
    summary = {'command': plan.command, 'multi_index': str(n),
               'normal': form.report.normal,
               'achieved_degrees': form.report.achieved_degrees,
               'singular_gap': form.report.singular_gap,
               'orthogonality_residual': worst, 'zero_count': len(zeros),
               'basis': 'chebyshev in t = (x - c)/h'}
    if not form.report.normal:
        raise ClaimViolation('perfectness',
                             f"index {n} is not normal")
    if worst > tol:
        raise ClaimViolation('orthogonality',
                             f"residual {worst:.3e} exceeds {tol:.1e}")

    def draw(ax):
        h = mix.sigma0.hull
        xs = numpy.linspace(h.a, h.b, 801)[1:-1]
        ax.plot(xs, numpy.real(form.evaluate_extended(xs)), lw=1)
        ax.plot(zeros, numpy.zeros(len(zeros)), 'o', ms=3)
        ax.axhline(0, color='k', lw=0.5)
        ax.set_xlabel('x')
        ax.set_ylabel('A_n(x)')
        ax.set_title(f"form {n}")
    return {'coefficients': (['k', 'i', 'chebyshev_coeff'], coeff_rows),
            'zeros': (['i', 'x'], zero_rows)}, summary, {'form': draw}


def _cmd_hp_scan(plan):
    from .hermite_pade import normality_scan
    mix = _require_system(plan)
    reps = normality_scan(mix, plan.params['max_total'])
    rows = []
    for r in reps:
        rows.append((','.join(map(str, r.multi_index.n1)),
                     ','.join(map(str, r.multi_index.n2)),
                     ','.join(map(str, r.achieved_degrees)), r.nullity,
                     r.singular_gap, r.normal))
    bad = [str(r.multi_index) for r in reps if not r.normal]
    summary = {'command': plan.command, 'indices': len(reps),
               'all_normal': not bad, 'non_normal': bad,
               'min_gap': min((r.singular_gap for r in reps), default=1.0)}

    def draw(ax):
        sizes = [r.multi_index.size1 for r in reps]
        ax.semilogy(sizes, [r.singular_gap for r in reps], 'o', ms=3)
        ax.set_xlabel('|n1|')
        ax.set_ylabel('singular gap')
    tables = {'scan': (['n1', 'n2', 'degrees', 'nullity', 'gap', 'normal'],
                       rows)}
    if bad:
        emit_report(plan.out, tables, summary)
        raise ClaimViolation('perfectness',
                             f"non-normal indices: {', '.join(bad[:5])}")
    return tables, summary, {'scan_gap': draw}


def _type2_sys(mix):
    if mix.m1 != 0:
        raise InputError("type II commands need a system with m1 = 0")
    return mix.S2


def _cmd_quad_table(plan):
    from .simquad import build_rule, exactness_test
    S = _type2_sys(_require_system(plan))
    n = plan.params['n']
    if len(n) != S.m + 1:
        raise InputError(f"--n needs {S.m + 1} components")
    rule = build_rule(S, n)
    worst = exactness_test(rule, S, n)
    rows = [(','.join(map(str, n)), k, float(x), float(rule.weights[k, i]))
            for k in range(S.m + 1) for i, x in enumerate(rule.nodes)]
    tol = plan.tol if plan.tol is not None else 1e-8
    shape = all(v == n[0] + 1 for v in n[1:])
    signs_ok = all(numpy.all(numpy.sign(rule.weights[k])
                             == numpy.sign(S.s(0, k).mass))
                   for k in range(S.m + 1))
    summary = {'command': plan.command, 'n': list(n),
               'exactness_residual': worst, 'sign_pattern_checked': shape,
               'signs_match': signs_ok}
    if worst > tol:
        raise ClaimViolation('quadrature exactness',
                             f"residual {worst:.3e} exceeds {tol:.1e}")
    if shape and not signs_ok:
        raise ClaimViolation('quadrature weight signs',
                             "weights do not share the sign of s_{0,k}")

    def draw(ax):
        for k in range(S.m + 1):
            ax.plot(rule.nodes, rule.weights[k], 'o-', ms=3, label=f"k={k}")
        ax.set_xlabel('node')
        ax.set_ylabel('weight')
        ax.legend()
    return {'quad_table': (['n', 'k', 'node', 'weight'], rows)}, summary, \
        {'quad_weights': draw}


def _cmd_markov_rate(plan):
    from .simquad import DEFAULT_RATE_PROBES, diagonal_indices, markov_rate
    S = _type2_sys(_require_system(plan))
    probes = plan.params.get('probes') or DEFAULT_RATE_PROBES
    seq = diagonal_indices(S.m, plan.params['max_size'])
    rep = markov_rate(S, seq, probes)
    rows = []
    for i, n in enumerate(rep.indices):
        for q, z in enumerate(rep.compact_probes):
            rows.append((sum(n), ','.join(map(str, n)), z.real, z.imag,
                         rep.errors[i, q], rep.roots[i, q], rep.delta_K))
    slack = plan.tol if plan.tol is not None else 0.05
    worst = float(rep.roots.max())
    summary = {'command': plan.command, 'delta_K': rep.delta_K,
               'max_root': worst, 'final_roots': rep.roots[-1],
               'slack': slack}
    _write_dat(plan.out, 'rate', [(sum(n), float(rep.roots[i].max()))
                                  for i, n in enumerate(rep.indices)])
    if worst > rep.delta_K + slack:
        raise ClaimViolation('Markov rate',
                             f"root {worst:.4f} exceeds delta_K + slack = "
                             f"{rep.delta_K + slack:.4f}")

    def draw(ax):
        for q, z in enumerate(rep.compact_probes):
            ax.plot(rep.sizes, rep.roots[:, q], 'o-', ms=3, label=f"z={z}")
        ax.axhline(rep.delta_K, color='k', ls='--', lw=1, label='delta_K')
        ax.set_xlabel('|n|')
        ax.set_ylabel('e_n^(1/2|n|)')
        ax.legend(fontsize=7)
    return {'markov_rate': (['size', 'n', 'probe_re', 'probe_im', 'e_n',
                             'root', 'delta_K'], rows)}, summary, \
        {'markov_rate': draw}


def _bindings_hash(case):
    parts = []
    for key in sorted(case.bindings):
        v = case.bindings[key]
        if hasattr(v, 'generators'):
            parts.append((key, [g.descriptor() for g in v.generators]))
        elif hasattr(v, 'descriptor'):
            parts.append((key, v.descriptor()))
        elif callable(v):
            parts.append((key, getattr(v, '__name__', 'function')))
        else:
            parts.append((key, v))
    blob = json.dumps(parts, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _cmd_reduce_verify(plan):
    from .reduction import (DEFAULT_PROBES, IDENTITY_IDS, default_case,
                            identity_tolerance, verify_identity)
    ids = plan.params.get('ids') or IDENTITY_IDS
    probes = plan.params.get('probes') or DEFAULT_PROBES
    rows, worst, failed = [], {}, []
    for cid in ids:
        case = default_case(cid)
        w, table = verify_identity(case, probes, return_table=True)
        tol = plan.tol if plan.tol is not None else identity_tolerance(cid)
        h = _bindings_hash(case)
        for z, r in table:
            rows.append((cid, h, z.real, z.imag, r, tol))
        worst[cid] = w
        if w > tol:
            failed.append(cid)
    summary = {'command': plan.command, 'worst': worst, 'failed': failed}
    tables = {'identities': (['id', 'bindings_hash', 'probe_re', 'probe_im',
                              'residual', 'tol'], rows)}
    if failed:
        emit_report(plan.out, tables, summary)
        raise ClaimViolation('measure identities',
                             f"residual above tolerance for {failed}")

    def draw(ax):
        ax.semilogy(range(len(worst)), [max(v, 1e-20) for v in
                                        worst.values()], 'o')
        ax.set_xticks(range(len(worst)), list(worst), rotation=45,
                      fontsize=7)
        ax.set_ylabel('max residual')
    return tables, summary, {'identities': draw}


def _cmd_equilibrium_solve(plan):
    from .equilibrium import (TOL_EQ, build_interaction,
                              equilibrium_residual, solve_vector_equilibrium,
                              system_supports)
    mix = _require_system(plan)
    p1 = plan.params.get('p1') or tuple([1.0 / (mix.m1 + 1)] * (mix.m1 + 1))
    p2 = plan.params.get('p2') or tuple([1.0 / (mix.m2 + 1)] * (mix.m2 + 1))
    inter = build_interaction(p1, p2)
    sol = solve_vector_equilibrium(inter, system_supports(mix),
                                   grid=plan.params.get('grid', 512),
                                   seed=plan.params.get('seed'))
    resid = equilibrium_residual(sol)
    tables = {}
    for j, mu in zip(sol.labels, sol.measures):
        rows = [(i, float(a), float(b), float(w))
                for i, (a, b, w) in enumerate(zip(mu.edges_left,
                                                  mu.edges_right,
                                                  mu.masses))]
        tables[f"component_{j}"] = (['cell', 'left', 'right', 'mass'], rows)
    tol = plan.tol if plan.tol is not None else TOL_EQ
    summary = {'command': plan.command, 'labels': sol.labels,
               'w': {str(j): sol.constant(j) for j in sol.labels},
               'J': sol.energy, 'residual': resid, 'tol_eq': tol,
               'interaction': inter.matrix, 'P': {str(k): v for k, v
                                                   in inter.P.items()}}
    if resid > tol:
        raise ClaimViolation('equilibrium conditions',
                             f"residual {resid:.3e} exceeds {tol:.1e}")

    def draw(ax):
        for j, mu in zip(sol.labels, sol.measures):
            ax.step(mu.grid, mu.masses / mu.widths, where='mid', lw=1,
                    label=f"mu_{j}")
        ax.set_yscale('log')
        ax.set_xlabel('x')
        ax.set_ylabel('density')
        ax.legend()
    return tables, summary, {'equilibrium': draw}


def _cmd_asymptotics(plan):
    from .equilibrium import nth_root_compare, period_step, ratio_experiment
    from .hermite_pade import MultiIndex2
    mix = _require_system(plan)
    probes = plan.params.get('probes') or (2.5j, -2.0, 1.5 + 1j)
    kind = plan.params.get('kind', 'nth-root')
    count = plan.params.get('count', 6)
    start = plan.params.get('start', 2)
    s1, s2 = period_step(mix.m1, mix.m2)
    base1 = tuple(start * a for a in s1)
    base2 = tuple(start * a for a in s2)
    # |n1| = |n2| + 1: add one to the last smallest entry of n1
    base1 = list(base1)
    base1[0] += sum(base2) + 1 - sum(base1)
    base = MultiIndex2(tuple(base1), base2)
    if base.size1 != base.size2 + 1 or min(base.n1) < 0:
        raise InputError("could not form a starting index from --start")
    ray = [MultiIndex2(tuple(a + i * b for a, b in zip(base.n1, s1)),
                       tuple(a + i * b for a, b in zip(base.n2, s2)))
           for i in range(count + 1)]
    rows = []
    if kind == 'nth-root':
        sizes, gaps, G = nth_root_compare(
            mix, ray, probes, root=plan.params.get('root', 'n1'))
        for i, n in enumerate(ray):
            for q, z in enumerate(probes):
                rows.append((str(n), sizes[i], z.real, z.imag, G[q],
                             gaps[i, q]))
        header = ['index', 'size1', 'probe_re', 'probe_im', 'G', 'gap']
        monotone = bool(numpy.all(numpy.diff(gaps, axis=0) < 0))
        series = gaps
        claim = 'n-th root asymptotics'
    elif kind == 'ratio':
        norm = 'orthonormal' if mix.m1 == mix.m2 == 0 else 'monic'
        r = ratio_experiment(mix, base, count, probes, step=(s1, s2),
                             normalization=norm)
        for i in range(count):
            for q, z in enumerate(probes):
                d = r['differences'][i - 1, q] if i else float('nan')
                rows.append((str(r['indices'][i]), z.real, z.imag,
                             r['ratios'][i, q].real, r['ratios'][i, q].imag,
                             d))
        header = ['index', 'probe_re', 'probe_im', 'ratio_re', 'ratio_im',
                  'difference']
        monotone = bool(numpy.all(numpy.diff(r['differences'], axis=0) < 0))
        series = r['differences']
        claim = 'ratio asymptotics'
    else:
        raise InputError("--kind must be nth-root or ratio")
    summary = {'command': plan.command, 'kind': kind,
               'indices': [str(n) for n in ray], 'decreasing': monotone}
    tables = {f"asymptotics_{kind}": (header, rows)}
    if not monotone and plan.params.get('check', True):
        emit_report(plan.out, tables, summary)
        raise ClaimViolation(claim, "trend is not decreasing at every probe")

    def draw(ax):
        for q, z in enumerate(probes):
            ax.semilogy(numpy.arange(len(series)), series[:, q], 'o-', ms=3,
                        label=f"z={z}")
        ax.set_xlabel('step')
        ax.set_ylabel('gap' if kind == 'nth-root' else '|r_{i+1} - r_i|')
        ax.legend(fontsize=7)
    return tables, summary, {f"asymptotics_{kind}": draw}


_DISPATCH = {
    'system-build': _cmd_system_build,
    'hp-solve': _cmd_hp_solve,
    'hp-scan': _cmd_hp_scan,
    'quad-table': _cmd_quad_table,
    'markov-rate': _cmd_markov_rate,
    'reduce-verify': _cmd_reduce_verify,
    'equilibrium-solve': _cmd_equilibrium_solve,
    'asymptotics': _cmd_asymptotics,
}


def run(plan):
    """Execute a plan; returns the list of written paths."""
    if plan.command not in _DISPATCH:
        raise InputError(f"unknown command {plan.command!r}")
    os.makedirs(plan.out, exist_ok=True)
    numpy.random.seed(plan.seed)
    tables, summary, figures = _DISPATCH[plan.command](plan)
    summary = dict(summary)
    summary['seed'] = plan.seed
    if plan.system_source is not None:
        summary['system'] = plan.system_source
    return emit_report(plan.out, tables, summary,
                       figures if plan.figures else None)


# ====
# Main
# ====

def _parser():
    p = argparse.ArgumentParser(prog='nikishin-lab',
                                description=__doc__.strip().splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--system', help="JSON descriptor or demo:<name> "
                        f"({', '.join(sorted(DEMOS))})")
    common.add_argument('--out', default='.', help='output directory')
    common.add_argument('--tol', type=float, default=None,
                        help='override the command tolerance')
    common.add_argument('--seed', type=int, default=0)
    common.add_argument('--no-figures', action='store_true')
    sub = p.add_subparsers(dest='command', required=True)
    sub.add_parser('system-build', parents=[common])
    s = sub.add_parser('hp-solve', parents=[common])
    s.add_argument('--n1', required=True)
    s.add_argument('--n2', required=True)
    s = sub.add_parser('hp-scan', parents=[common])
    s.add_argument('--max-total', type=int, default=6)
    s = sub.add_parser('quad-table', parents=[common])
    s.add_argument('--n', required=True)
    s = sub.add_parser('markov-rate', parents=[common])
    s.add_argument('--max-size', type=int, default=18)
    s.add_argument('--probes')
    s = sub.add_parser('reduce-verify', parents=[common])
    s.add_argument('--id', action='append', dest='ids')
    s.add_argument('--probes')
    s = sub.add_parser('equilibrium-solve', parents=[common])
    s.add_argument('--p1')
    s.add_argument('--p2')
    s.add_argument('--grid', type=int, default=512)
    s = sub.add_parser('asymptotics', parents=[common])
    s.add_argument('--kind', choices=('nth-root', 'ratio'),
                   default='nth-root')
    s.add_argument('--start', type=int, default=2)
    s.add_argument('--count', type=int, default=6)
    s.add_argument('--root', choices=('n1', 'n2'), default='n1',
                   help='n-th root exponent 1/|n1| or 1/|n2|')
    s.add_argument('--probes')
    return p


def _plan_from_args(a):
    params = {}
    c = a.command
    if c == 'hp-solve':
        params['n1'] = _ints(a.n1, '--n1')
        params['n2'] = _ints(a.n2, '--n2')
    elif c == 'hp-scan':
        if a.max_total < 1:
            raise InputError("--max-total must be >= 1")
        params['max_total'] = a.max_total
    elif c == 'quad-table':
        params['n'] = _ints(a.n, '--n')
    elif c == 'markov-rate':
        if a.max_size < 1:
            raise InputError("--max-size must be >= 1")
        params['max_size'] = a.max_size
        if a.probes:
            params['probes'] = _complexes(a.probes, '--probes')
    elif c == 'reduce-verify':
        params['ids'] = tuple(a.ids) if a.ids else None
        if a.probes:
            params['probes'] = _complexes(a.probes, '--probes')
    elif c == 'equilibrium-solve':
        if a.p1:
            params['p1'] = _floats(a.p1, '--p1')
        if a.p2:
            params['p2'] = _floats(a.p2, '--p2')
        if a.grid < 8:
            raise InputError("--grid must be >= 8")
        params['grid'] = a.grid
    elif c == 'asymptotics':
        params.update(kind=a.kind, start=a.start, count=a.count, root=a.root)
        if a.count < 2 or a.start < 1:
            raise InputError("--count must be >= 2 and --start >= 1")
        if a.probes:
            params['probes'] = _complexes(a.probes, '--probes')
    if c == 'reduce-verify' and params['ids']:
        from .reduction import IDENTITY_IDS
        unknown = [i for i in params['ids'] if i not in IDENTITY_IDS]
        if unknown:
            raise InputError(f"unknown identity ids {unknown}")
    system = load_descriptor(a.system) if a.system else None
    return ExperimentPlan(c, system, a.system, params, a.out, a.tol, a.seed,
                          not a.no_figures)


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for claims here
        return 0 if exc.code in (0, None) else 1
    try:
        plan = _plan_from_args(args)
        run(plan)
    except ClaimViolation as exc:
        print(f"claim violated: {exc}", file=sys.stderr)
        return 2
    except (InputError, ValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except LabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
