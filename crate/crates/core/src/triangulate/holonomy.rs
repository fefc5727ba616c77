use super::parse::parse_complex;
use super::words::{cyclic_reduce, inverse_word, parse_word, renumber, substitute, word_to_string, Word};
use super::{Combinatorics, IdealTriangulation, ShapeVector};
use crate::error::{Error, Result};
use crate::hmodel::{BoundaryPoint, MoebiusMap, C64};
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};

/// Relator residual accepted when building or reading a representation.
const RELATOR_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeripheralWords {
    pub meridian: Word,
    pub longitude: Word,
    /// False for a Dehn-filled cusp.
    pub complete: bool,
}

/// Generators as Möbius maps plus relators and peripheral words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyRep {
    pub generators: Vec<MoebiusMap>,
    pub relators: Vec<Word>,
    pub cusps: Vec<PeripheralWords>,
    /// Further group elements used as extra search moves (face pairings removed by simplification).
    pub extra: Vec<Word>,
}

impl HolonomyRep {
    pub fn letter(&self, l: i32) -> MoebiusMap {
        let g = self.generators[(l.unsigned_abs() - 1) as usize];
        if l > 0 {
            g
        } else {
            g.inverse()
        }
    }

    /// Left-to-right product of the letters of `w`.
    pub fn evaluate(&self, w: &[i32]) -> MoebiusMap {
        let mut m = MoebiusMap::identity();
        for (i, &l) in w.iter().enumerate() {
            m = m * self.letter(l);
            if i % 16 == 15 {
                m = m.renormalized();
            }
        }
        m.renormalized()
    }

    /// Largest relative distance of a relator image from +-identity.
    pub fn relator_residual(&self) -> f64 {
        self.relators
            .iter()
            .map(|r| {
                let m = self.evaluate(r);
                m.distance(&MoebiusMap::identity()) / m.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Conjugates every generator by `c` (g -> c g c^-1).
    pub fn conjugate(&self, c: &MoebiusMap) -> HolonomyRep {
        let ci = c.inverse();
        let mut out = self.clone();
        out.generators = self.generators.iter().map(|g| (*c * *g * ci).renormalized()).collect();
        out
    }

    fn check_words(&self) -> Result<()> {
        let g = self.generators.len() as u32;
        let all = self.relators.iter().chain(self.extra.iter()).chain(self.cusps.iter().flat_map(|c| [&c.meridian, &c.longitude]));
        for w in all {
            if let Some(l) = w.iter().find(|l| l.unsigned_abs() > g) {
                return Err(Error::Invalid(format!("word uses generator {} of {g}", l.unsigned_abs())));
            }
        }
        Ok(())
    }
}

/// Chart of a complete cusp: sends its parabolic fixed point to infinity with the meridian translating by 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspChart {
    pub cusp: usize,
    pub to_chart: MoebiusMap,
    pub fixed_point: BoundaryPoint,
    pub t_mu: C64,
    pub t_lambda: C64,
}

/// Translation part of a (numerically) parabolic map fixing infinity.
fn translation_of(m: &MoebiusMap, tol: f64) -> Result<C64> {
    if m.c.norm() > tol * m.norm() {
        return Err(Error::Invalid("peripheral element does not fix the cusp point".into()));
    }
    Ok(m.b / m.d)
}

pub fn cusp_chart(rep: &HolonomyRep, k: usize, tol: f64) -> Result<CuspChart> {
    let words = rep.cusps.get(k).ok_or_else(|| Error::Invalid(format!("no cusp {k}")))?;
    if !words.complete {
        return Err(Error::FilledCusp(k));
    }
    let a = rep.evaluate(&words.meridian);
    let b = rep.evaluate(&words.longitude);
    let tr = a.trace();
    if (tr * tr - 4.0).norm() > 1e3 * tol * a.norm().powi(2).max(1.0) {
        return Err(Error::Invalid(format!("meridian of cusp {k} is not parabolic (trace {tr})")));
    }
    let (j, fixed_point) = if a.c.norm() <= 1e-12 * a.norm() {
        (MoebiusMap::identity(), BoundaryPoint::Infinity)
    } else {
        let p = (a.a - a.d) / (a.c * 2.0);
        let i = C64::new(0.0, 1.0);
        (MoebiusMap { a: C64::new(0.0, 0.0), b: i, c: i, d: -i * p }, BoundaryPoint::Finite(p))
    };
    let ji = j.inverse();
    let loose = 1e3 * tol;
    let mu_raw = translation_of(&(j * a * ji), loose)?;
    let la_raw = translation_of(&(j * b * ji), loose)?;
    if mu_raw.norm() == 0.0 {
        return Err(Error::Invalid(format!("meridian of cusp {k} is trivial")));
    }
    // z -> z / mu_raw
    let s = (C64::new(1.0, 0.0) / mu_raw).sqrt();
    let scale = MoebiusMap { a: s, b: C64::new(0.0, 0.0), c: C64::new(0.0, 0.0), d: C64::new(1.0, 0.0) / s };
    let t_lambda = la_raw / mu_raw;
    if t_lambda.im.abs() <= tol {
        return Err(Error::Invalid(format!("degenerate cusp lattice at cusp {k}")));
    }
    Ok(CuspChart { cusp: k, to_chart: (scale * j).renormalized(), fixed_point, t_mu: C64::new(1.0, 0.0), t_lambda })
}

/// Translations of mu and lambda on the reference cross-section (meridian normalized to 1).
pub fn cusp_translations(tri: &IdealTriangulation, s: &ShapeVector, cusp: usize) -> Result<(C64, C64)> {
    if cusp >= tri.cusps.len() {
        return Err(Error::Invalid(format!("no cusp {cusp}")));
    }
    if !tri.cusps[cusp].is_complete() {
        return Err(Error::FilledCusp(cusp));
    }
    let rep = build_holonomy(tri, s)?;
    let ch = cusp_chart(&rep, cusp, 1e-9)?;
    Ok((ch.t_mu, ch.t_lambda))
}

fn std_positions(z: C64) -> [BoundaryPoint; 4] {
    [
        BoundaryPoint::Infinity,
        BoundaryPoint::Finite(C64::new(0.0, 0.0)),
        BoundaryPoint::Finite(C64::new(1.0, 0.0)),
        BoundaryPoint::Finite(z),
    ]
}

fn develop(comb: &Combinatorics, z: &[C64]) -> Result<Vec<[BoundaryPoint; 4]>> {
    let n = comb.tets.len();
    let mut pos: Vec<Option<[BoundaryPoint; 4]>> = vec![None; n];
    pos[comb.base] = Some(std_positions(z[comb.base]));
    let mut queue = VecDeque::from([comb.base]);
    while let Some(t) = queue.pop_front() {
        let pt = pos[t].expect("placed");
        for f in 0..4 {
            if comb.tets[t].generators[f] != 0 {
                continue;
            }
            let s = comb.tets[t].neighbors[f];
            if pos[s].is_some() {
                continue;
            }
            let perm = comb.tets[t].gluings[f];
            let mut known = [None; 4];
            for v in (0..4).filter(|&v| v != f) {
                known[perm[v]] = Some(pt[v]);
            }
            let std = std_positions(z[s]);
            let ks: Vec<usize> = (0..4).filter(|&k| known[k].is_some()).collect();
            let g = MoebiusMap::triple_to_triple(
                [std[ks[0]], std[ks[1]], std[ks[2]]],
                [known[ks[0]].unwrap(), known[ks[1]].unwrap(), known[ks[2]].unwrap()],
            )?;
            let mut p = [BoundaryPoint::Infinity; 4];
            for k in 0..4 {
                p[k] = known[k].unwrap_or_else(|| g.apply(std[k]));
            }
            pos[s] = Some(p);
            queue.push_back(s);
        }
    }
    pos.into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::Invalid(format!("tetrahedron {i} not reached by the spanning tree"))))
        .collect()
}

/// Map taking the neighbor across face f of t onto its developed position next to t.
fn face_map(comb: &Combinatorics, pos: &[[BoundaryPoint; 4]], t: usize, f: usize) -> Result<MoebiusMap> {
    let s = comb.tets[t].neighbors[f];
    let perm = comb.tets[t].gluings[f];
    let vs: Vec<usize> = (0..4).filter(|&v| v != f).collect();
    MoebiusMap::triple_to_triple(
        [pos[s][perm[vs[0]]], pos[s][perm[vs[1]]], pos[s][perm[vs[2]]]],
        [pos[t][vs[0]], pos[t][vs[1]], pos[t][vs[2]]],
    )
}

/// Relators read off by walking around each edge class.
fn edge_relators(comb: &Combinatorics) -> Vec<Word> {
    let n = comb.tets.len();
    let mut seen: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut out = Vec::new();
    for t0 in 0..n {
        for a0 in 0..4 {
            for b0 in (a0 + 1)..4 {
                if seen.contains(&(t0, a0, b0)) {
                    continue;
                }
                let others: Vec<usize> = (0..4).filter(|&v| v != a0 && v != b0).collect();
                let (f0, g0) = (others[0], others[1]);
                let (mut t, mut a, mut b, mut f, mut g) = (t0, a0, b0, f0, g0);
                let mut word = Vec::new();
                for _ in 0..(6 * n + 6) {
                    seen.insert((t, a.min(b), a.max(b)));
                    let gen = comb.tets[t].generators[f];
                    if gen != 0 {
                        word.push(gen);
                    }
                    let perm = comb.tets[t].gluings[f];
                    let s = comb.tets[t].neighbors[f];
                    let (na, nb, nf, ng) = (perm[a], perm[b], perm[g], perm[f]);
                    t = s;
                    a = na;
                    b = nb;
                    f = nf;
                    g = ng;
                    if t == t0 && ((a, b) == (a0, b0) || (a, b) == (b0, a0)) && f == f0 {
                        break;
                    }
                }
                let w = cyclic_reduce(&word);
                if !w.is_empty() {
                    out.push(w);
                }
            }
        }
    }
    out
}

struct Presentation {
    num_gens: usize,
    relators: Vec<Word>,
    peripheral: Vec<(Word, Word)>,
    /// Expressions for the original generators.
    originals: Vec<Word>,
}

/// Longest replacement word accepted by a Tietze move; longer ones bloat the
/// peripheral words and amplify rounding in their matrices.
const MAX_REPLACEMENT: usize = 3;

/// Tietze moves: drop a generator that occurs exactly once in a short relator.
fn simplify(p: &mut Presentation) {
    loop {
        let mut choice: Option<(usize, i32)> = None;
        let mut best_len = usize::MAX;
        for (ri, r) in p.relators.iter().enumerate() {
            if r.len() >= best_len || r.len() > MAX_REPLACEMENT + 1 {
                continue;
            }
            for g in 1..=p.num_gens as i32 {
                if r.iter().filter(|l| l.abs() == g).count() == 1 {
                    choice = Some((ri, g));
                    best_len = r.len();
                    break;
                }
            }
        }
        let Some((ri, g)) = choice else { break };
        let r = p.relators.remove(ri);
        let pos = r.iter().position(|l| l.abs() == g).unwrap();
        // r = u x^e v = 1 with x^e = u^-1 v^-1
        let u = &r[..pos];
        let v = &r[pos + 1..];
        let mut xe = inverse_word(u);
        xe.extend(inverse_word(v));
        let x = if r[pos] > 0 { xe } else { inverse_word(&xe) };
        for rel in &mut p.relators {
            *rel = cyclic_reduce(&substitute(rel, g, &x));
        }
        p.relators.retain(|r| !r.is_empty());
        for (m, l) in &mut p.peripheral {
            *m = substitute(m, g, &x);
            *l = substitute(l, g, &x);
        }
        for o in &mut p.originals {
            *o = substitute(o, g, &x);
        }
    }
    // dedupe relators
    let mut uniq: Vec<Word> = Vec::new();
    for r in p.relators.drain(..) {
        if !uniq.contains(&r) {
            uniq.push(r);
        }
    }
    p.relators = uniq;
}

/// Develops the triangulation from its base tetrahedron and reads off a presentation of the holonomy.
pub fn build_holonomy(tri: &IdealTriangulation, s: &ShapeVector) -> Result<HolonomyRep> {
    let comb = tri
        .combinatorics
        .as_ref()
        .ok_or_else(|| Error::Invalid("triangulation file carries no gluing data (`tet` lines)".into()))?;
    if s.z.len() != tri.n {
        return Err(Error::Invalid("shape vector does not match the triangulation".into()));
    }
    let pos = develop(comb, &s.z)?;
    let ngen = comb.num_generators();
    let mut raw: Vec<Option<MoebiusMap>> = vec![None; ngen];
    let mut inconsistency: f64 = 0.0;
    for t in 0..tri.n {
        for f in 0..4 {
            let g = comb.tets[t].generators[f];
            if g > 0 {
                raw[(g - 1) as usize] = Some(face_map(comb, &pos, t, f)?);
            }
        }
    }
    let raw: Vec<MoebiusMap> = raw
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.ok_or_else(|| Error::Invalid(format!("generator {} has no face", i + 1))))
        .collect::<Result<_>>()?;
    for t in 0..tri.n {
        for f in 0..4 {
            let g = comb.tets[t].generators[f];
            let expect = match g {
                0 => MoebiusMap::identity(),
                g if g > 0 => continue,
                g => raw[(-g - 1) as usize].inverse(),
            };
            let m = face_map(comb, &pos, t, f)?;
            inconsistency = inconsistency.max(m.distance(&expect) / m.norm().max(1.0));
        }
    }
    if inconsistency > RELATOR_TOL {
        return Err(Error::DevelopmentInconsistent(inconsistency));
    }

    let mut peripheral = Vec::new();
    for (k, c) in tri.cusps.iter().enumerate() {
        let (m, l) = c
            .peripheral
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("cusp {k} has no peripheral words")))?;
        peripheral.push((parse_word(m)?, parse_word(l)?));
    }
    let mut pres = Presentation {
        num_gens: ngen,
        relators: edge_relators(comb),
        peripheral,
        originals: (1..=ngen as i32).map(|g| vec![g]).collect(),
    };
    simplify(&mut pres);

    // keep generators that still occur as themselves
    let kept: Vec<i32> = (1..=ngen as i32).filter(|&g| pres.originals[(g - 1) as usize] == vec![g]).collect();
    let mut map = vec![0i32; ngen];
    for (new, &old) in kept.iter().enumerate() {
        map[(old - 1) as usize] = new as i32 + 1;
    }
    let generators: Vec<MoebiusMap> = kept.iter().map(|&g| raw[(g - 1) as usize]).collect();
    let extra: Vec<Word> = (1..=ngen as i32)
        .filter(|g| !kept.contains(g))
        .map(|g| renumber(&pres.originals[(g - 1) as usize], &map))
        .filter(|w| !w.is_empty())
        .collect();
    let rep = HolonomyRep {
        generators,
        relators: pres.relators.iter().map(|r| renumber(r, &map)).collect(),
        cusps: pres
            .peripheral
            .iter()
            .zip(&tri.cusps)
            .map(|((m, l), c)| PeripheralWords {
                meridian: renumber(m, &map),
                longitude: renumber(l, &map),
                complete: c.is_complete(),
            })
            .collect(),
        extra,
    };
    let res = rep.relator_residual();
    if res > RELATOR_TOL {
        return Err(Error::DevelopmentInconsistent(res));
    }
    for (k, c) in rep.cusps.iter().enumerate() {
        let a = rep.evaluate(&c.meridian);
        let b = rep.evaluate(&c.longitude);
        let comm = a * b * a.inverse() * b.inverse();
        let r = comm.distance(&MoebiusMap::identity()) / comm.norm().max(1.0);
        if r > RELATOR_TOL {
            return Err(Error::Invalid(format!("peripheral words of cusp {k} do not commute ({r:e})")));
        }
    }
    Ok(rep)
}

fn fmt_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

pub fn write_holonomy(rep: &HolonomyRep) -> String {
    let mut out = String::new();
    for g in &rep.generators {
        out += &format!("gen {} {} {} {}\n", fmt_complex(g.a), fmt_complex(g.b), fmt_complex(g.c), fmt_complex(g.d));
    }
    for r in &rep.relators {
        out += &format!("relator {}\n", word_to_string(r));
    }
    for (k, c) in rep.cusps.iter().enumerate() {
        out += &format!("cusp {k} meridian {}\n", word_to_string(&c.meridian));
        out += &format!("cusp {k} longitude {}\n", word_to_string(&c.longitude));
    }
    out
}

pub fn parse_holonomy(text: &str) -> Result<HolonomyRep> {
    let mut generators = Vec::new();
    let mut relators = Vec::new();
    let mut cusps: Vec<(Option<Word>, Option<Word>)> = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last = ln;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let word = |s: &str| parse_word(s).map_err(|e| Error::parse(ln, e.to_string()));
        match toks[0] {
            "gen" => {
                if toks.len() != 5 {
                    return Err(Error::parse(ln, "expected `gen a b c d`"));
                }
                let v: Vec<C64> = toks[1..]
                    .iter()
                    .map(|t| parse_complex(t).map_err(|e| Error::parse(ln, e.to_string())))
                    .collect::<Result<_>>()?;
                generators.push(MoebiusMap::new(v[0], v[1], v[2], v[3]).map_err(|e| Error::parse(ln, e.to_string()))?);
            }
            "relator" => {
                if toks.len() != 2 {
                    return Err(Error::parse(ln, "expected `relator <word>`"));
                }
                relators.push(word(toks[1])?);
            }
            "cusp" => {
                if toks.len() != 4 {
                    return Err(Error::parse(ln, "expected `cusp <k> meridian|longitude <word>`"));
                }
                let k: usize = toks[1].parse().map_err(|_| Error::parse(ln, "bad cusp index"))?;
                while cusps.len() <= k {
                    cusps.push((None, None));
                }
                match toks[2] {
                    "meridian" => cusps[k].0 = Some(word(toks[3])?),
                    "longitude" => cusps[k].1 = Some(word(toks[3])?),
                    w => return Err(Error::parse(ln, format!("expected meridian or longitude, found {w:?}"))),
                }
            }
            other => return Err(Error::parse(ln, format!("unknown keyword {other:?}"))),
        }
    }
    if generators.is_empty() {
        return Err(Error::parse(last.max(1), "no generators"));
    }
    let cusps = cusps
        .into_iter()
        .enumerate()
        .map(|(k, c)| match c {
            (Some(meridian), Some(longitude)) => Ok(PeripheralWords { meridian, longitude, complete: true }),
            _ => Err(Error::parse(last, format!("cusp {k} needs both peripheral words"))),
        })
        .collect::<Result<_>>()?;
    let rep = HolonomyRep { generators, relators, cusps, extra: Vec::new() };
    rep.check_words().map_err(|e| Error::parse(last, e.to_string()))?;
    let res = rep.relator_residual();
    if res > RELATOR_TOL {
        return Err(Error::DevelopmentInconsistent(res));
    }
    Ok(rep)
}
