//! Horoball diagrams seen from a cusp: enumeration, embeddedness, tangencies and symmetries.
//!
//! Coordinates: chart i sends cusp i to infinity with the meridian translating by 1. A diagram
//! rescales chart i by the cusp scale t_i so the ball at infinity has height 1; a cusp-j ball
//! given by the chart matrix (a b; c d) then has diameter t_i t_j / |c|^2.

use crate::error::{Error, Result};
use crate::hmodel::{horoball_distance, Horoball, MoebiusMap, SpacePoint, Tolerance, C64};
use crate::manifold::Manifold;
use crate::triangulate::words::{concat, free_reduce, inverse_word, power, word_to_string, Word};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Offset of the fundamental parallelogram, so centers on its edges land on one side.
const EDGE_SHIFT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumOptions {
    /// Words are expanded while their ball diameter stays above prune_factor * cutoff.
    pub prune_factor: f64,
    pub initial_depth: usize,
    pub max_depth: usize,
    pub max_nodes: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { prune_factor: 0.5, initial_depth: 4, max_depth: 64, max_nodes: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: C64,
    pub diameter: f64,
    pub word: String,
    pub cusp: usize,
}

impl Ball {
    pub fn horoball(&self) -> Horoball {
        Horoball::finite(self.center, self.diameter).expect("positive diameter")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub mu: C64,
    pub lambda: C64,
}

impl Lattice {
    pub fn vector(&self, m: i64, n: i64) -> C64 {
        self.mu * m as f64 + self.lambda * n as f64
    }

    /// Length of a shortest nonzero lattice vector (Gauss reduction).
    pub fn shortest(&self) -> f64 {
        let (mut a, mut b) = (self.mu, self.lambda);
        if a.norm() > b.norm() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            let k = (b * a.conj()).re / a.norm_sqr();
            b -= a * k.round();
            if b.norm() >= a.norm() {
                return a.norm();
            }
            std::mem::swap(&mut a, &mut b);
        }
    }

    /// Whether a group element, in the chart of this lattice, moves infinity.
    ///
    /// In a discrete group containing these translations every such element has
    /// |c| >= 1 / shortest(), so anything well below that is round-off on a parabolic.
    pub fn moves_infinity(&self, s: &MoebiusMap) -> bool {
        s.c.norm() * self.shortest() >= 0.5
    }

    /// Real coordinates of z in the basis (mu, lambda).
    pub fn coords(&self, z: C64) -> (f64, f64) {
        let det = self.mu.re * self.lambda.im - self.mu.im * self.lambda.re;
        let x = (z.re * self.lambda.im - z.im * self.lambda.re) / det;
        let y = (self.mu.re * z.im - self.mu.im * z.re) / det;
        (x, y)
    }

    /// Representative of z in the fundamental parallelogram and the lattice vector removed.
    pub fn reduce(&self, z: C64) -> (C64, (i64, i64)) {
        let (x, y) = self.coords(z);
        let m = (x + EDGE_SHIFT).floor() as i64;
        let n = (y + EDGE_SHIFT).floor() as i64;
        (z - self.vector(m, n), (m, n))
    }

    /// Lattice vectors v = m mu + n lambda with |v - z0| <= r, in a fixed order.
    pub fn points_in_disk(&self, z0: C64, r: f64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        if !(r >= 0.0) || !r.is_finite() {
            return out;
        }
        // distance from v to z0 in coordinates is bounded via the dual basis
        let (cx, cy) = self.coords(z0);
        let area = (self.mu.conj() * self.lambda).im.abs();
        let rx = r * self.lambda.norm() / area;
        let ry = r * self.mu.norm() / area;
        for n in (cy - ry).ceil() as i64..=(cy + ry).floor() as i64 {
            for m in (cx - rx).ceil() as i64..=(cx + rx).floor() as i64 {
                if (self.vector(m, n) - z0).norm() <= r {
                    out.push((m, n));
                }
            }
        }
        out
    }
}

/// How the search ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Deepest word length explored.
    pub depth: usize,
    /// Depth after which no new ball was added.
    pub stable_since: usize,
    pub nodes: usize,
    /// No unexplored word survived pruning.
    pub exhausted: bool,
    /// Searches run, each with the previous balls added as moves.
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoroballDiagram {
    pub manifold: String,
    pub cusp: usize,
    /// Scale per cusp index; ignored for filled cusps.
    pub scales: Vec<f64>,
    pub cutoff: f64,
    pub balls: Vec<Ball>,
    pub lattice: Lattice,
    pub verified: bool,
    pub certificates: Vec<Certificate>,
}

impl HoroballDiagram {
    /// Balls of diameter 1 (tangent to the ball at infinity).
    pub fn full_sized(&self, tol: f64) -> usize {
        self.balls.iter().filter(|b| (b.diameter - 1.0).abs() <= tol).count()
    }

    pub fn max_diameter(&self) -> Option<f64> {
        self.balls.first().map(|b| b.diameter)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "manifold": self.manifold,
            "cusp": self.cusp,
            "scales": self.scales,
            "cutoff": self.cutoff,
            "balls": self.balls.iter().map(|b| serde_json::json!({
                "re": b.center.re, "im": b.center.im, "diameter": b.diameter, "word": b.word, "cusp": b.cusp,
            })).collect::<Vec<_>>(),
            "lattice": {
                "mu": [self.lattice.mu.re, self.lattice.mu.im],
                "lambda": [self.lattice.lambda.re, self.lattice.lambda.im],
            },
            "verified": self.verified,
        })
    }

    /// Overhead view of one fundamental domain plus a margin.
    pub fn to_svg(&self) -> String {
        let corners = [C64::new(0.0, 0.0), self.lattice.mu, self.lattice.mu + self.lattice.lambda, self.lattice.lambda];
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for c in &corners {
            x0 = x0.min(c.re);
            x1 = x1.max(c.re);
            y0 = y0.min(c.im);
            y1 = y1.max(c.im);
        }
        let pad = 0.6;
        let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
        let px = 600.0 / (x1 - x0).max(y1 - y0);
        let tx = |x: f64| (x - x0) * px;
        let ty = |y: f64| (y1 - y) * px;
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n",
            (x1 - x0) * px,
            (y1 - y0) * px
        );
        let pts: Vec<String> = corners.iter().map(|c| format!("{:.2},{:.2}", tx(c.re), ty(c.im))).collect();
        s += &format!("<polygon points=\"{}\" fill=\"none\" stroke=\"gray\"/>\n", pts.join(" "));
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
        for (m, n) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)] {
            let v = self.lattice.vector(m, n);
            for b in &self.balls {
                let c = b.center + v;
                let r = b.diameter / 2.0;
                if c.re + r < x0 || c.re - r > x1 || c.im + r < y0 || c.im - r > y1 {
                    continue;
                }
                s += &format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"{}\"/>\n",
                    tx(c.re),
                    ty(c.im),
                    r * px,
                    palette[b.cusp % palette.len()]
                );
            }
        }
        s += "</svg>\n";
        s
    }
}

/// A chart matrix C_i g C_j^-1 for a cusp-j ball seen from cusp i, with the word g.
#[derive(Clone, Debug)]
struct Node {
    m: MoebiusMap,
    word: Word,
    center: C64,
    diameter: f64,
}

struct PairSearch<'a> {
    moves: Vec<(MoebiusMap, Word)>,
    lat_i: Lattice,
    lat_j: Lattice,
    per_i: (&'a [i32], &'a [i32]),
    per_j: (&'a [i32], &'a [i32]),
    /// Chart diameter of the ball with matrix c-entry c is height / |c|^2.
    height: f64,
    grid: f64,
}

struct PairResult {
    balls: Vec<Node>,
    cert: Certificate,
    verified: bool,
}

fn translation_word(per: (&[i32], &[i32]), m: i64, n: i64) -> Word {
    concat(&[&power(per.0, m), &power(per.1, n)])
}

impl PairSearch<'_> {
    /// Moves the center into the fundamental domain of chart i and the pole into that of chart j.
    fn normalize(&self, m: MoebiusMap, word: Word) -> Option<Node> {
        let m = m.renormalized();
        if m.c.norm() <= 1e-9 * m.norm() {
            return None;
        }
        let (_, (p, q)) = self.lat_i.reduce(m.a / m.c);
        let v = self.lat_i.vector(p, q);
        let m = MoebiusMap { a: m.a - v * m.c, b: m.b - v * m.d, c: m.c, d: m.d };
        let (_, (r, s)) = self.lat_j.reduce(-m.d / m.c);
        let sigma = self.lat_j.vector(r, s);
        let m = MoebiusMap { a: m.a, b: m.a * sigma + m.b, c: m.c, d: m.c * sigma + m.d }.renormalized();
        let word = free_reduce(&concat(&[&translation_word(self.per_i, -p, -q), &word, &translation_word(self.per_j, r, s)]));
        let center = m.a / m.c;
        Some(Node { m, word, center, diameter: self.height / m.c.norm_sqr() })
    }

    fn key(&self, z: C64) -> (i64, i64) {
        let (x, y) = self.lat_i.coords(z);
        ((x / self.grid).round() as i64, (y / self.grid).round() as i64)
    }

    fn find(&self, grid: &HashMap<(i64, i64), Vec<usize>>, nodes: &[Node], z: C64) -> Option<usize> {
        let (kx, ky) = self.key(z);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ix) = grid.get(&(kx + dx, ky + dy)) {
                    for &i in ix {
                        let (x, y) = self.lat_i.coords(nodes[i].center - z);
                        if x.abs() <= self.grid && y.abs() <= self.grid {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    /// Images S T_v B of ball B with diameter at least `thr`, over moves S and lattice translations v.
    fn children(&self, b: &Node, thr: f64) -> Vec<Node> {
        let mut out = Vec::new();
        for (s, sw) in &self.moves {
            let r = (b.diameter / thr).sqrt() / s.c.norm();
            let z0 = -s.d / s.c - b.center;
            for (p, q) in self.lat_i.points_in_disk(z0, r) {
                let v = self.lat_i.vector(p, q);
                let tb = MoebiusMap { a: b.m.a + v * b.m.c, b: b.m.b + v * b.m.d, c: b.m.c, d: b.m.d };
                let word = concat(&[sw, &translation_word(self.per_i, p, q), &b.word]);
                if let Some(n) = self.normalize(*s * tb, word) {
                    if n.diameter >= thr {
                        out.push(n);
                    }
                }
            }
        }
        out
    }

    /// Greedy ascent to a large ball, used to seed searches between different cusps.
    fn climb(&self, mut b: Node) -> Node {
        for _ in 0..64 {
            let mut best: Option<Node> = None;
            for (s, sw) in &self.moves {
                let z0 = -s.d / s.c - b.center;
                let (x, y) = self.lat_i.coords(z0);
                for (p, q) in [(x.floor(), y.floor()), (x.ceil(), y.floor()), (x.floor(), y.ceil()), (x.ceil(), y.ceil())] {
                    let v = self.lat_i.vector(p as i64, q as i64);
                    let tb = MoebiusMap { a: b.m.a + v * b.m.c, b: b.m.b + v * b.m.d, c: b.m.c, d: b.m.d };
                    let word = concat(&[sw, &translation_word(self.per_i, p as i64, q as i64), &b.word]);
                    if let Some(n) = self.normalize(*s * tb, word) {
                        if best.as_ref().is_none_or(|bb| n.diameter > bb.diameter) {
                            best = Some(n);
                        }
                    }
                }
            }
            match best {
                Some(n) if n.diameter > b.diameter * (1.0 + 1e-9) => b = n,
                _ => break,
            }
        }
        b
    }

    fn run(&self, seeds: Vec<Node>, prune: f64, opts: &EnumOptions) -> PairResult {
        let mut nodes: Vec<Node> = Vec::new();
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut frontier: Vec<Node> = Vec::new();
        let mut expand_seeds: Vec<Node> = Vec::new();
        for s in seeds {
            if s.diameter >= prune {
                if self.find(&grid, &nodes, s.center).is_none() {
                    grid.entry(self.key(s.center)).or_default().push(nodes.len());
                    nodes.push(s.clone());
                    frontier.push(s);
                }
            } else {
                expand_seeds.push(s);
            }
        }
        frontier.extend(expand_seeds);
        let mut depth = 0;
        let mut checkpoint = opts.initial_depth.max(1);
        let mut last: Option<usize> = None;
        let mut stable_since = 0;
        let mut reported = 0;
        let (exhausted, verified) = loop {
            if frontier.is_empty() {
                break (true, true);
            }
            if depth >= opts.max_depth || nodes.len() > opts.max_nodes {
                break (false, false);
            }
            depth += 1;
            let mut next = Vec::new();
            for b in &frontier {
                if nodes.len() > opts.max_nodes {
                    break;
                }
                for n in self.children(b, prune) {
                    if self.find(&grid, &nodes, n.center).is_some() {
                        continue;
                    }
                    grid.entry(self.key(n.center)).or_default().push(nodes.len());
                    nodes.push(n.clone());
                    next.push(n);
                }
            }
            frontier = next;
            let c = nodes.len();
            if c != reported {
                reported = c;
                stable_since = depth;
            }
            if depth == checkpoint {
                if last == Some(c) {
                    break (frontier.is_empty(), true);
                }
                last = Some(c);
                checkpoint *= 2;
            }
        };
        let cert = Certificate { depth, stable_since, nodes: nodes.len(), exhausted, rounds: 1 };
        PairResult { balls: nodes, cert, verified }
    }
}

fn pair_search<'a>(m: &'a Manifold, i: usize, j: usize, height: f64) -> Result<PairSearch<'a>> {
    let ci = m.chart(i)?;
    let cj = m.chart(j)?;
    let rep = &m.holonomy;
    let lat_i = Lattice { mu: ci.t_mu, lambda: ci.t_lambda };
    let mut words: Vec<Word> = Vec::new();
    for k in 1..=rep.num_generators() as i32 {
        words.push(vec![k]);
        words.push(vec![-k]);
    }
    for w in &rep.extra {
        words.push(w.clone());
        words.push(inverse_word(w));
    }
    let mut moves = Vec::new();
    for w in words {
        let s = m.in_chart(i, &rep.evaluate(&w))?;
        if lat_i.moves_infinity(&s) {
            moves.push((s, w));
        }
    }
    let pi = &rep.cusps[i];
    let pj = &rep.cusps[j];
    Ok(PairSearch {
        moves,
        lat_i,
        lat_j: Lattice { mu: cj.t_mu, lambda: cj.t_lambda },
        per_i: (&pi.meridian, &pi.longitude),
        per_j: (&pj.meridian, &pj.longitude),
        height,
        grid: 10.0 * m.tol.geometric,
    })
}

impl PairSearch<'_> {
    /// Adds the group elements of the given diagonal balls (and their inverses) as moves.
    fn add_moves(&mut self, nodes: &[Node], known: &mut Vec<C64>) -> usize {
        let mut added = 0;
        for n in nodes {
            if known.iter().any(|z| (z - n.center).norm() <= self.grid) {
                continue;
            }
            known.push(n.center);
            self.moves.push((n.m, n.word.clone()));
            self.moves.push((n.m.inverse(), inverse_word(&n.word)));
            added += 1;
        }
        added
    }
}

/// Rounds of re-running a search with its own balls as extra moves.
const CLOSURE_ROUNDS: usize = 6;

/// Cusp-j balls in chart i with chart diameter at least `report`, for cusp-j height `height`.
///
/// A diagonal ball is the image of infinity under a group element with a large isometric sphere,
/// so the elements of the balls found feed back in as moves until nothing new appears.
fn search(m: &Manifold, i: usize, j: usize, height: f64, report: f64, opts: &EnumOptions, with_diagonal: bool) -> Result<PairResult> {
    let mut ps = pair_search(m, i, j, height)?;
    let prune = report * opts.prune_factor;
    let mut known = Vec::new();
    if i != j || with_diagonal {
        let diag = diagonal_moves(m, i, opts)?;
        ps.add_moves(&diag, &mut known);
    }
    let mut result: Option<PairResult> = None;
    for round in 0..CLOSURE_ROUNDS {
        let seeds = if i == j {
            // children of the ball at infinity: one per move, translations act trivially on it
            ps.moves.iter().filter_map(|(s, w)| ps.normalize(*s, w.clone())).collect()
        } else {
            let t = m.transfer(i, j)?;
            match ps.normalize(t, Vec::new()) {
                Some(n) => vec![ps.climb(n)],
                None => return Err(Error::Invalid(format!("cusps {i} and {j} share a fixed point"))),
            }
        };
        let mut r = ps.run(seeds, prune, opts);
        if let Some(prev) = &result {
            r.cert.depth = r.cert.depth.max(prev.cert.depth);
        }
        r.cert.rounds = round + 1;
        let added = if i == j { ps.add_moves(&r.balls, &mut known) } else { 0 };
        let done = added == 0 || !r.verified;
        result = Some(r);
        if done {
            break;
        }
    }
    let mut r = result.expect("at least one round");
    r.balls.retain(|n| n.diameter >= report);
    Ok(r)
}

/// Elements of the largest diagonal balls of chart i (unit height), found with an adaptive cutoff.
fn diagonal_moves(m: &Manifold, i: usize, opts: &EnumOptions) -> Result<Vec<Node>> {
    let mut thr = 1.0;
    for _ in 0..30 {
        let r = search(m, i, i, 1.0, thr, opts, false)?;
        if let Some(best) = r.balls.iter().map(|n| n.diameter).reduce(f64::max) {
            let r = search(m, i, i, 1.0, best * opts.prune_factor, opts, false)?;
            return Ok(r.balls);
        }
        thr /= 4.0;
    }
    Err(Error::IncreaseDepth(format!("no ball found in chart {i}")))
}

/// Rank of each value after merging runs whose consecutive gaps are below `tol`.
fn cluster_ranks(values: &[f64], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0; values.len()];
    let mut rank = 0;
    for w in 0..idx.len() {
        if w > 0 && values[idx[w]] - values[idx[w - 1]] > tol {
            rank += 1;
        }
        ranks[idx[w]] = rank;
    }
    ranks
}

fn sort_balls(balls: &mut Vec<Ball>) {
    const TOL: f64 = 1e-7;
    let d = cluster_ranks(&balls.iter().map(|b| -b.diameter).collect::<Vec<_>>(), TOL);
    let x = cluster_ranks(&balls.iter().map(|b| b.center.re).collect::<Vec<_>>(), TOL);
    let y = cluster_ranks(&balls.iter().map(|b| b.center.im).collect::<Vec<_>>(), TOL);
    let mut keyed: Vec<_> = balls.drain(..).enumerate().map(|(k, b)| ((d[k], x[k], y[k], b.cusp), b)).collect();
    keyed.sort_by_key(|(key, _)| *key);
    balls.extend(keyed.into_iter().map(|(_, b)| b));
}

/// Horoball diagram of cusp `cusp` at the given scales, keeping balls of diameter at least `cutoff`.
pub fn enumerate(m: &Manifold, cusp: usize, scales: &[f64], cutoff: f64, opts: &EnumOptions) -> Result<HoroballDiagram> {
    if !(cutoff > 0.0) {
        return Err(Error::Invalid("cutoff must be positive".into()));
    }
    if scales.len() != m.num_cusps() {
        return Err(Error::Invalid(format!("expected {} scales, got {}", m.num_cusps(), scales.len())));
    }
    let chart = m.chart(cusp)?;
    let ti = scales[cusp];
    let mut balls = Vec::new();
    let mut certificates = Vec::new();
    let mut verified = true;
    for j in m.complete_cusps() {
        let tj = scales[j];
        if !(tj > 0.0 && ti > 0.0) {
            return Err(Error::Invalid(format!("scale of cusp {j} must be positive")));
        }
        let r = search(m, cusp, j, tj, cutoff / ti, opts, true)?;
        verified &= r.verified;
        certificates.push(r.cert);
        for n in r.balls {
            let d = n.diameter * ti;
            if d >= cutoff {
                balls.push(Ball { center: n.center * ti, diameter: d, word: word_to_string(&n.word), cusp: j });
            }
        }
    }
    sort_balls(&mut balls);
    Ok(HoroballDiagram {
        manifold: m.name.clone(),
        cusp,
        scales: scales.to_vec(),
        cutoff,
        balls,
        lattice: Lattice { mu: chart.t_mu * ti, lambda: chart.t_lambda * ti },
        verified,
        certificates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntry {
    /// Largest cusp-j ball diameter in chart i at unit scales.
    pub diameter: f64,
    /// Its center in chart i.
    pub center: C64,
    pub word: String,
    pub verified: bool,
}

/// Largest ball of each cusp seen from each cusp, at unit scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxDiameters {
    entries: Vec<Vec<Option<MaxEntry>>>,
}

impl MaxDiameters {
    pub fn get(&self, i: usize, j: usize) -> Option<&MaxEntry> {
        self.entries.get(i)?.get(j)?.as_ref()
    }

    pub fn verified(&self) -> bool {
        self.entries.iter().flatten().flatten().all(|e| e.verified)
    }
}

/// For each pair of complete cusps, the largest cusp-j ball in chart i with all cusp heights 1.
pub fn max_diameters(m: &Manifold, opts: &EnumOptions) -> Result<MaxDiameters> {
    let n = m.num_cusps();
    let mut entries = vec![vec![None; n]; n];
    let cusps = m.complete_cusps();
    for &i in &cusps {
        for &j in &cusps {
            let mut thr = 1.0;
            for _ in 0..30 {
                let r = search(m, i, j, 1.0, thr, opts, false)?;
                if let Some(best) = r.balls.iter().max_by(|a, b| a.diameter.total_cmp(&b.diameter)) {
                    entries[i][j] = Some(MaxEntry {
                        diameter: best.diameter,
                        center: best.center,
                        word: word_to_string(&best.word),
                        verified: r.verified,
                    });
                    break;
                }
                thr /= 4.0;
            }
            if entries[i][j].is_none() {
                return Err(Error::IncreaseDepth(format!("no ball of cusp {j} found in chart {i}")));
            }
        }
    }
    Ok(MaxDiameters { entries })
}

/// Scale at which the single cusp k becomes maximal (first self-tangency).
pub fn maximal_scale(max: &MaxDiameters, k: usize) -> Option<f64> {
    max.get(k, k).map(|e| 1.0 / e.diameter.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Embeddedness {
    Embedded { min_distance: f64 },
    /// Nodes are 0 for the ball at infinity and k + 1 for balls[k].
    Overlap { a: usize, b: usize, translation: (i64, i64), distance: f64, depth: usize },
}

impl Embeddedness {
    pub fn is_embedded(&self) -> bool {
        matches!(self, Embeddedness::Embedded { .. })
    }
}

/// Smallest signed distance between ball a and lattice translates of ball b, with the translation.
fn nearest_translate(lat: &Lattice, a: &Ball, b: &Ball, same: bool) -> Option<(f64, (i64, i64))> {
    let reach = 2.0 * (a.diameter * b.diameter).sqrt() + 1e-9;
    let mut best: Option<(f64, (i64, i64))> = None;
    for (m, n) in lat.points_in_disk(a.center - b.center, reach) {
        if same && (m, n) == (0, 0) {
            continue;
        }
        let hb = Horoball::finite(b.center + lat.vector(m, n), b.diameter).ok()?;
        if let Ok(d) = horoball_distance(&a.horoball(), &hb) {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, (m, n)));
            }
        }
    }
    best
}

/// Pairwise check of the diagram, including against the ball at infinity.
pub fn embeddedness(diagram: &HoroballDiagram, tol: &Tolerance) -> Result<Embeddedness> {
    if !diagram.verified {
        return Err(Error::Unverified);
    }
    let depth = diagram.certificates.iter().map(|c| c.depth).max().unwrap_or(0);
    let mut min = f64::INFINITY;
    for (k, b) in diagram.balls.iter().enumerate() {
        let d = (1.0 / b.diameter).ln();
        if d < -tol.tangency {
            return Ok(Embeddedness::Overlap { a: 0, b: k + 1, translation: (0, 0), distance: d, depth });
        }
        min = min.min(d);
    }
    for (x, a) in diagram.balls.iter().enumerate() {
        for (y, b) in diagram.balls.iter().enumerate().skip(x) {
            if let Some((d, t)) = nearest_translate(&diagram.lattice, a, b, x == y) {
                if d < -tol.tangency {
                    return Ok(Embeddedness::Overlap { a: x + 1, b: y + 1, translation: t, distance: d, depth });
                }
                min = min.min(d);
            }
        }
    }
    Ok(Embeddedness::Embedded { min_distance: min })
}

/// Checks every complete cusp's diagram at the given scales.
pub fn embedded_at(m: &Manifold, scales: &[f64], opts: &EnumOptions) -> Result<Embeddedness> {
    let mut min = f64::INFINITY;
    for k in m.complete_cusps() {
        let d = enumerate(m, k, scales, 0.5, opts)?;
        match embeddedness(&d, &m.tol)? {
            Embeddedness::Embedded { min_distance } => min = min.min(min_distance),
            overlap => return Ok(overlap),
        }
    }
    Ok(Embeddedness::Embedded { min_distance: min })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyEdge {
    /// 0 is the ball at infinity, k + 1 is balls[k].
    pub a: usize,
    pub b: usize,
    /// Lattice translation applied to ball b.
    pub translation: (i64, i64),
    pub point: SpacePoint,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyGraph {
    pub nodes: usize,
    pub edges: Vec<TangencyEdge>,
}

impl TangencyGraph {
    pub fn neighbors_of_infinity(&self) -> Vec<usize> {
        self.edges.iter().filter(|e| e.a == 0).map(|e| e.b).collect()
    }
}

/// Point where two tangent finite balls touch.
pub fn tangency_point(p: C64, d1: f64, q: C64, d2: f64) -> SpacePoint {
    let s = d1 / (d1 + d2);
    SpacePoint::new(p + (q - p) * s, d1 / 2.0 + (d2 - d1) / 2.0 * s)
}

/// All tangent pairs among the diagram balls and the ball at infinity.
pub fn tangencies(diagram: &HoroballDiagram, tol: &Tolerance) -> Result<TangencyGraph> {
    if !embeddedness(diagram, tol)?.is_embedded() {
        return Err(Error::Invalid("tangency graph needs an embedded diagram".into()));
    }
    let mut edges = Vec::new();
    for (k, b) in diagram.balls.iter().enumerate() {
        let d = (1.0 / b.diameter).ln();
        if d.abs() < tol.tangency {
            edges.push(TangencyEdge { a: 0, b: k + 1, translation: (0, 0), point: SpacePoint::new(b.center, 1.0), distance: d });
        }
    }
    let lat = &diagram.lattice;
    for (x, a) in diagram.balls.iter().enumerate() {
        for (y, b) in diagram.balls.iter().enumerate().skip(x) {
            let reach = (a.diameter * b.diameter).sqrt() * (1.0 + 10.0 * tol.tangency);
            for (m, n) in lat.points_in_disk(a.center - b.center, reach) {
                // one of each +-v pair for a ball against its own translates
                if x == y && (m < 0 || (m == 0 && n <= 0)) {
                    continue;
                }
                let q = b.center + lat.vector(m, n);
                let hb = Horoball::finite(q, b.diameter)?;
                let d = horoball_distance(&a.horoball(), &hb)?;
                if d.abs() < tol.tangency {
                    let point = tangency_point(a.center, a.diameter, q, b.diameter);
                    edges.push(TangencyEdge { a: x + 1, b: y + 1, translation: (m, n), point, distance: d });
                }
            }
        }
    }
    Ok(TangencyGraph { nodes: diagram.balls.len() + 1, edges })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Peripheral class (p, q) of the direction p mu + q lambda.
    pub direction: (i64, i64),
    pub order: u32,
    pub translation: C64,
    pub verified: bool,
}

/// Whether translating by (p mu + q lambda) / n maps the ball pattern onto itself.
pub fn detect_symmetry(diagram: &HoroballDiagram, direction: (i64, i64), order: u32, tol: &Tolerance) -> Result<SymmetryReport> {
    if !diagram.verified {
        return Err(Error::Unverified);
    }
    if order == 0 {
        return Err(Error::Invalid("symmetry order must be positive".into()));
    }
    if direction == (0, 0) {
        return Err(Error::ZeroSlope);
    }
    let lat = &diagram.lattice;
    let translation = lat.vector(direction.0, direction.1) / order as f64;
    let eps = tol.tangency * lat.mu.norm().max(lat.lambda.norm()).max(1.0);
    let matches = |z: C64, d: f64| {
        diagram.balls.iter().any(|b| {
            if (b.diameter - d).abs() > eps {
                return false;
            }
            let (x, y) = lat.coords(b.center - z);
            (x - x.round()).abs() * lat.mu.norm() + (y - y.round()).abs() * lat.lambda.norm() <= eps
        })
    };
    let verified = diagram.balls.iter().all(|b| matches(b.center + translation, b.diameter));
    Ok(SymmetryReport { direction, order, translation, verified })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> Lattice {
        Lattice { mu: C64::new(1.0, 0.0), lambda: C64::new(0.3, 2.0) }
    }

    #[test]
    fn reduce_lands_in_parallelogram() {
        let l = lattice();
        let z = C64::new(5.7, -3.1);
        let (r, (m, n)) = l.reduce(z);
        let (x, y) = l.coords(r);
        assert!((-EDGE_SHIFT..1.0).contains(&x) && (-EDGE_SHIFT..1.0).contains(&y));
        assert!((r + l.vector(m, n) - z).norm() < 1e-12);
    }

    #[test]
    fn disk_points_match_brute_force() {
        let l = lattice();
        let z0 = C64::new(0.4, 1.3);
        let r = 3.7;
        let got = l.points_in_disk(z0, r);
        let mut want = Vec::new();
        for n in -20..=20 {
            for m in -20..=20 {
                if (l.vector(m, n) - z0).norm() <= r {
                    want.push((m, n));
                }
            }
        }
        let mut g = got.clone();
        g.sort();
        want.sort();
        assert_eq!(g, want);
    }

    #[test]
    fn tangency_point_lies_on_both_spheres() {
        let (p, q) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let t = tangency_point(p, 1.0, q, 1.0);
        assert!((t.z - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((t.h - 0.5).abs() < 1e-15);
        // diameters 1 and 1/4 tangent at distance 1/2
        let q = C64::new(0.5, 0.0);
        let t = tangency_point(p, 1.0, q, 0.25);
        for (c, d) in [(p, 1.0), (q, 0.25)] {
            let r = d / 2.0;
            let dist = ((t.z - c).norm_sqr() + (t.h - r).powi(2)).sqrt();
            assert!((dist - r).abs() < 1e-14);
        }
    }

    fn synthetic(balls: Vec<(f64, f64, f64)>) -> HoroballDiagram {
        HoroballDiagram {
            manifold: "synthetic".into(),
            cusp: 0,
            scales: vec![1.0],
            cutoff: 0.1,
            balls: balls
                .into_iter()
                .map(|(x, y, d)| Ball { center: C64::new(x, y), diameter: d, word: "1".into(), cusp: 0 })
                .collect(),
            lattice: Lattice { mu: C64::new(1.0, 0.0), lambda: C64::new(0.0, 2.0) },
            verified: true,
            certificates: vec![],
        }
    }

    #[test]
    fn symmetry_examples() {
        let tol = Tolerance::default();
        let d = synthetic(vec![(0.0, 0.0, 1.0), (0.0, 1.0, 1.0)]);
        assert!(detect_symmetry(&d, (0, 1), 2, &tol).unwrap().verified);
        assert!(detect_symmetry(&d, (0, 1), 1, &tol).unwrap().verified);
        let d = synthetic(vec![(0.0, 0.0, 1.0), (0.0, 0.7, 0.5)]);
        assert!(!detect_symmetry(&d, (0, 1), 2, &tol).unwrap().verified);
    }

    #[test]
    fn embeddedness_examples() {
        let tol = Tolerance::default();
        assert!(embeddedness(&synthetic(vec![(0.0, 0.0, 1.0)]), &tol).unwrap().is_embedded());
        assert!(!embeddedness(&synthetic(vec![(0.0, 0.0, 1.1)]), &tol).unwrap().is_embedded());
        let mut d = synthetic(vec![]);
        d.verified = false;
        assert_eq!(embeddedness(&d, &tol), Err(Error::Unverified));
    }

    #[test]
    fn tangency_graph_of_unit_row() {
        let tol = Tolerance::default();
        let d = synthetic(vec![(0.0, 0.0, 1.0), (0.0, 1.0, 1.0)]);
        let g = tangencies(&d, &tol).unwrap();
        assert_eq!(g.neighbors_of_infinity(), vec![1, 2]);
        // each ball touches its mu-translate, and the two touch along lambda in two ways
        assert_eq!(g.edges.len(), 2 + 2 + 2);
    }
}
