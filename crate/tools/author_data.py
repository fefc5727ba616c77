#!/usr/bin/env python3
"""Regenerate the bundled manifold data under data/ using SnapPy.

Usage: python3 tools/author_data.py [outdir]

Writes one .tri file per manifold plus data/reference.json, which records
values computed independently by SnapPy (volumes, cusp shapes, maximal cusp
translations, horoball counts) that the Rust test-suite uses as oracles.

Requires: snappy (pip install snappy).
"""
import cmath
import itertools
import json
import math
import os
import sys
from collections import Counter

import numpy as np
import snappy
from spherogram import Crossing, Link
from spherogram.links.tangles import (BraidTangle, CapTangle, CupTangle,
                                      IdentityBraid, RationalTangle)


def pretzel(p):
    t = RationalTangle(1, p)
    return (t + t + t).numerator_closure().exterior()


def ring_link():
    """Figure-eight knot (closed 3-braid s1 S2 s1 S2) with a crossing circle
    around two similarly oriented strands. Cusp 0 is the knot, cusp 1 the
    crossing circle; (1, p) filling on cusp 1 adds 2p crossings."""
    bot = IdentityBraid(2) | CupTangle() | IdentityBraid(1)
    mid = BraidTangle([2, 1, 1, 2], 5)
    top = IdentityBraid(2) | CapTangle() | IdentityBraid(1)
    return (BraidTangle([1, -2, 1, -2], 3) * top * mid * bot).braid_closure()


def cuboctahedral_link():
    """Alternating 4-component link whose projection graph is the
    cuboctahedron (triangular and square checkerboard regions)."""
    verts = []
    for i, j in itertools.combinations(range(3), 2):
        for s1 in (1, -1):
            for s2 in (1, -1):
                v = [0, 0, 0]
                v[i], v[j] = s1, s2
                verts.append(np.array(v, float))
    n = len(verts)
    adj = {a: [b for b in range(n) if a != b and
               abs(np.linalg.norm(verts[a] - verts[b]) - math.sqrt(2)) < 1e-9]
           for a in range(n)}
    rot = {}
    for a in range(n):
        nv = verts[a] / np.linalg.norm(verts[a])
        t = verts[adj[a][0]] - verts[a]
        t -= nv * np.dot(t, nv)
        e1 = t / np.linalg.norm(t)
        e2 = np.cross(nv, e1)

        def ang(b, a=a, e1=e1, e2=e2):
            t = verts[b] - verts[a]
            return math.atan2(np.dot(t, e2), np.dot(t, e1))
        rot[a] = sorted(adj[a], key=ang)
    off = {0: 0}
    stack = [0]
    while stack:
        a = stack.pop()
        for b in adj[a]:
            under_a = (rot[a].index(b) + off[a]) % 2 == 0
            ob = 0 if (rot[b].index(a) % 2 == 0) == (not under_a) else 1
            if b in off:
                assert off[b] == ob
            else:
                off[b] = ob
                stack.append(b)
    cs = [Crossing(k) for k in range(n)]
    done = set()
    for a in range(n):
        for b in adj[a]:
            if (b, a) in done:
                continue
            done.add((a, b))
            cs[a][(rot[a].index(b) + off[a]) % 4] = cs[b][(rot[b].index(a) + off[b]) % 4]
    link = Link(cs)
    assert len(link.link_components) == 4 and link.is_alternating()
    return link


def smallest_geometric(M, trials=200):
    best = None
    for _ in range(trials):
        N = M.copy()
        N.randomize()
        N.simplify()
        if N.solution_type() != 'all tetrahedra positively oriented':
            continue
        key = (N.num_tetrahedra(), N.fundamental_group(False, False, False).num_generators())
        if best is None or key < best[0]:
            best = (key, N.copy())
    return best[1]


def log_rows(M):
    shapes = [complex(z) for z in M.tetrahedra_shapes('rect')]
    rows = []
    for (A, B, c) in M.gluing_equations(form='rect'):
        s = sum(a * cmath.log(z) + b * cmath.log(1 - z) for a, b, z in zip(A, B, shapes))
        rows.append((list(A), list(B), s))
    return shapes, rows


def row_text(A, B, total, target):
    m = (target - total) / (math.pi * 1j)
    mi = round(m.real)
    assert abs(m - mi) < 1e-8, (m, A, B)
    pairs = ' '.join(f'{a} {b}' for a, b in zip(A, B))
    return f'{pairs} {mi}'


def write_tri(path, name, M, source, extra=()):
    M = M.copy()
    n = M.num_tetrahedra()
    M._choose_generators(False, False)
    info = M._choose_generators_info()
    G = M.fundamental_group(simplify_presentation=False,
                            fillings_may_affect_generators=False,
                            minimize_number_of_generators=False)
    assert G.num_generators() <= 26
    shapes, rows = log_rows(M)
    ncusps = M.num_cusps()
    lines = [f'# {name}: {source}',
             f'# authored by tools/author_data.py with SnapPy {snappy.__version__}; regenerate rather than edit',
             f'manifold {name}', f'tetrahedra {n}']
    for A, B, s in rows[:n]:
        lines.append('edge ' + row_text(A, B, s, 2j * math.pi))
    for k in range(ncusps):
        A, B, s = rows[n + 2 * k]
        lines.append(f'cusp {k} meridian ' + row_text(A, B, s, 0))
        A, B, s = rows[n + 2 * k + 1]
        lines.append(f'cusp {k} longitude ' + row_text(A, B, s, 0))
    lines.extend(extra)
    base = [i for i, d in enumerate(info) if d['generator_path'] == -1][0]
    lines.append(f'base {base}')
    for i, d in enumerate(info):
        nb = ' '.join(str(x) for x in d['neighbors'])
        gl = ' '.join(''.join(str(x) for x in g) for g in d['gluings'])
        ge = ' '.join(str(x) for x in d['generators'])
        lines.append(f'tet {i} neighbors {nb} gluings {gl} generators {ge}')
    for k, (mw, lw) in enumerate(G.peripheral_curves()):
        lines.append(f'peripheral {k} meridian {mw}')
        lines.append(f'peripheral {k} longitude {lw}')
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    return M


def reduce_mod(c, tm, tl):
    A = np.array([[tm.real, tl.real], [tm.imag, tl.imag]])
    x, y = np.linalg.solve(A, [c.real, c.imag])
    return (round(x - math.floor(x + 1e-9), 6) % 1.0, round(y - math.floor(y + 1e-9), 6) % 1.0)


def horoball_counts(M, cutoff):
    C = M.cusp_neighborhood()
    C.set_displacement(C.stopping_displacement())
    tm, tl = (complex(t) for t in C.translations())
    seen = set()
    for b in C.horoballs(cutoff):
        d = 2 * float(b['radius'])
        x, y = reduce_mod(complex(b['center']), tm, tl)
        seen.add((x, y, round(d, 6)))
    counts = Counter(round(k[2], 4) for k in seen)
    return {f'{d:.4f}': c for d, c in sorted(counts.items(), reverse=True)}


def cusp_record(M):
    shapes = [complex(s) for s in M.cusp_info('shape')]
    return [{'shape': [s.real, s.imag]} for s in shapes]


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), '..', 'data')
    os.makedirs(out, exist_ok=True)
    ref = {'snappy_version': snappy.__version__, 'manifolds': {}}

    knots = {
        'fig8': (snappy.Manifold('4_1'), 'figure-eight knot complement, census 4_1'),
        'p333': (pretzel(3), '(3,3,3) pretzel knot complement'),
        'p555': (pretzel(5), '(5,5,5) pretzel knot complement'),
        'p777': (pretzel(7), '(7,7,7) pretzel knot complement'),
    }
    for name, (M, src) in knots.items():
        write_tri(os.path.join(out, f'{name}.tri'), name, M, src)
        tm, tl = (complex(t) for t in M.cusp_translations()[0])
        area = M.cusp_areas()[0]
        rec = {'volume': float(M.volume()), 'cusps': cusp_record(M),
               'max_cusp': {'meridian_length': abs(tm), 'longitude_length': abs(tl),
                            'area': float(area), 'width': float(area) / abs(tl)},
               'horoball_counts_0.2': horoball_counts(M, 0.2)}
        ref['manifolds'][name] = rec

    alt = snappy.Manifold('4_1')
    alt._two_to_three(0, 0)
    assert alt.num_tetrahedra() == 3 and alt.solution_type() == 'all tetrahedra positively oriented'
    write_tri(os.path.join(out, 'fig8_alt.tri'), 'fig8_alt', alt,
              'figure-eight knot complement, alternate triangulation')
    ref['manifolds']['fig8_alt'] = {'volume': float(alt.volume()), 'tetrahedra': alt.num_tetrahedra()}

    W = snappy.Manifold('L5a1')
    write_tri(os.path.join(out, 'whitehead.tri'), 'whitehead', W, 'Whitehead link complement, L5a1')
    ref['manifolds']['whitehead'] = {'volume': float(W.volume()), 'cusps': cusp_record(W)}

    F = smallest_geometric(cuboctahedral_link().exterior())
    write_tri(os.path.join(out, 'fig7link.tri'), 'fig7link', F,
              'alternating 4-component link with cuboctahedral projection (L12a2008)')
    ref['manifolds']['fig7link'] = {'volume': float(F.volume()), 'cusps': cusp_record(F),
                                    'tetrahedra': F.num_tetrahedra()}

    R = ring_link().exterior()
    write_tri(os.path.join(out, 'twistfamily.tri'), 'twistfamily', R,
              'figure-eight knot plus a crossing circle around two parallel strands (L6a1)',
              extra=['drilled 1', 'framing_shift 0 4'])
    series = []
    for p in range(5, 26):
        N = R.copy()
        N.dehn_fill((1, p), 1)
        vol = float(N.volume())
        # the filled manifold is the closed braid s1^(2k) s1 S2 s1 S2 for k = p or -p;
        # its own longitude is the corrected class lambda + 4 p mu
        K = None
        for k in (p, -p):
            cand = snappy.Link(braid_closure=[1 if k > 0 else -1] * (2 * abs(k)) + [1, -2, 1, -2]).exterior()
            if abs(cand.volume() - vol) < 1e-8:
                K = cand
        assert K is not None, p
        for _ in range(100):
            if K.solution_type() == 'all tetrahedra positively oriented':
                break
            K.randomize()
        area = float(K.cusp_areas()[0])
        tm, tl = (complex(t) for t in K.cusp_translations()[0])
        series.append({'p': p, 'volume': vol, 'area': area, 'meridian_length': abs(tm),
                       'eta_length': abs(tl), 'width': area / abs(tl)})
    ref['manifolds']['twistfamily'] = {'volume': float(R.volume()), 'cusps': cusp_record(R),
                                       'series': series}

    with open(os.path.join(out, 'reference.json'), 'w') as f:
        json.dump(ref, f, indent=1, sort_keys=True)
        f.write('\n')


if __name__ == '__main__':
    main()
