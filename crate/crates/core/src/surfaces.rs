//! Totally geodesic surface candidates: plane orbits, invariance and embeddedness, boundary
//! slopes, essential n-gons, the width theorems and Dehn-filled twist families.

use crate::cusps::{balance_with, slope_length, CuspShape, WidthReport};
use crate::error::{Error, Result};
use crate::hmodel::{apply_plane_within, BoundaryPoint, GeodesicPlane, MoebiusMap, PlanePlaneRelation, Tolerance, C64};
use crate::horoballs::{self, EnumOptions, HoroballDiagram, Lattice};
use crate::manifold::Manifold;
use crate::triangulate::words::{concat, inverse_word, power, word_to_string, Word};
use crate::triangulate::{solve_shapes_from, IdealTriangulation, SolveOptions};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Freeness {
    Free,
    Semifree,
    TotallyKnotted,
    Unknown,
}

/// A seed plane for a conjectured totally geodesic surface, given in the chart of cusp `chart`
/// (meridian translation 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCandidate {
    #[serde(default)]
    pub name: Option<String>,
    pub seed: GeodesicPlane,
    #[serde(default)]
    pub chart: usize,
    pub orientable: Option<bool>,
    pub freeness: Freeness,
    #[serde(default)]
    pub claimed_slope: Option<(i64, i64)>,
}

impl SurfaceCandidate {
    pub fn from_json(text: &str) -> Result<SurfaceCandidate> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("candidate: {e}")))
    }

    pub fn load(path: &Path) -> Result<SurfaceCandidate> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        SurfaceCandidate::from_json(&text)
    }
}

/// Group elements acting in one chart, optionally modulo the cusp lattice.
#[derive(Clone, Debug)]
pub struct PlaneGroup {
    pub moves: Vec<(MoebiusMap, Word)>,
    pub lattice: Option<Lattice>,
    /// Words of the lattice generators, used to keep orbit words exact.
    pub lattice_words: (Word, Word),
}

impl PlaneGroup {
    /// Group generated by `gens` (and inverses), with words a, b, ...
    pub fn new(gens: &[MoebiusMap], lattice: Option<Lattice>) -> PlaneGroup {
        let mut moves = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            let l = k as i32 + 1;
            moves.push((*g, vec![l]));
            moves.push((g.inverse(), vec![-l]));
        }
        PlaneGroup { moves, lattice, lattice_words: (Vec::new(), Vec::new()) }
    }

    /// The holonomy in the chart of `cusp`, modulo its peripheral lattice.
    pub fn from_manifold(m: &Manifold, cusp: usize) -> Result<PlaneGroup> {
        let chart = m.chart(cusp)?;
        let lattice = Lattice { mu: chart.t_mu, lambda: chart.t_lambda };
        let rep = &m.holonomy;
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
            let s = m.in_chart(cusp, &rep.evaluate(&w))?;
            if lattice.moves_infinity(&s) {
                moves.push((s, w));
            }
        }
        let p = &rep.cusps[cusp];
        Ok(PlaneGroup {
            moves,
            lattice: Some(lattice),
            lattice_words: (p.meridian.clone(), p.longitude.clone()),
        })
    }

    fn translation_word(&self, m: i64, n: i64) -> Word {
        concat(&[&power(&self.lattice_words.0, m), &power(&self.lattice_words.1, n)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    /// Hemispheres smaller than this are dropped.
    pub min_radius: f64,
    pub initial_depth: usize,
    pub max_depth: usize,
    pub max_planes: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { min_radius: 0.05, initial_depth: 4, max_depth: 48, max_planes: 20_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneLift {
    pub plane: GeodesicPlane,
    /// Group element carrying the seed to this lift.
    pub word: String,
}

/// Evidence that the orbit of the seed is not a locally finite family of planes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitWitness {
    /// Element sending one orbit plane to a distinct, nearly coincident one (or to a plane with irrational direction).
    pub word: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneLiftSet {
    pub planes: Vec<PlaneLift>,
    pub min_radius: f64,
    pub lattice: Option<Lattice>,
    pub verified: bool,
    pub depth: usize,
    pub witness: Option<OrbitWitness>,
}

impl PlaneLiftSet {
    /// A lift set given directly, e.g. a synthetic configuration.
    pub fn from_planes(planes: Vec<GeodesicPlane>, lattice: Option<Lattice>) -> PlaneLiftSet {
        PlaneLiftSet {
            planes: planes.into_iter().map(|plane| PlaneLift { plane, word: "1".into() }).collect(),
            min_radius: 0.0,
            lattice,
            verified: true,
            depth: 0,
            witness: None,
        }
    }

    /// Coordinates multiplied by `t` (chart coordinates to a diagram at cusp scale t).
    pub fn scaled(&self, t: f64) -> PlaneLiftSet {
        let mut out = self.clone();
        for p in &mut out.planes {
            p.plane = match p.plane {
                GeodesicPlane::Vertical { base, dir } => GeodesicPlane::Vertical { base: base * t, dir },
                GeodesicPlane::Hemisphere { center, radius } => GeodesicPlane::Hemisphere { center: center * t, radius: radius * t },
            };
        }
        out.min_radius *= t;
        out.lattice = self.lattice.map(|l| Lattice { mu: l.mu * t, lambda: l.lambda * t });
        out
    }

    pub fn verticals(&self) -> impl Iterator<Item = &GeodesicPlane> {
        self.planes.iter().map(|p| &p.plane).filter(|p| matches!(p, GeodesicPlane::Vertical { .. }))
    }
}

/// Primitive lattice vector (m, n) parallel to `dir`, if one with small coefficients exists.
pub fn rational_direction(lat: &Lattice, dir: C64) -> Option<(i64, i64)> {
    let d = dir / dir.norm();
    let mut best: Option<((i64, i64), f64)> = None;
    for n in 0..=64i64 {
        for m in -64..=64i64 {
            if (m, n) == (0, 0) || gcd(m, n) != 1 || (n == 0 && m < 0) {
                continue;
            }
            let w = lat.vector(m, n);
            if (d.conj() * w).im.abs() <= 1e-7 * w.norm() && best.is_none_or(|(_, l)| w.norm() < l) {
                best = Some(((m, n), w.norm()));
            }
        }
    }
    best.map(|(v, _)| v)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// (x, y, g) with a x + b y = g = gcd(a, b).
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum(), 0, a.abs())
    } else {
        let (x, y, g) = ext_gcd(b, a % b);
        (y, x - (a / b) * y, g)
    }
}

/// Canonical form of a plane modulo the lattice, with the lattice vector subtracted.
enum Canon {
    Vertical { plane: GeodesicPlane, shift: (i64, i64) },
    Hemisphere { plane: GeodesicPlane, shift: (i64, i64) },
    /// Vertical plane whose direction is not a lattice direction.
    Irrational,
}

fn canonicalize(p: &GeodesicPlane, lat: Option<&Lattice>) -> Canon {
    match (p.canonical(), lat) {
        (GeodesicPlane::Hemisphere { center, radius }, Some(l)) => {
            let (c, shift) = l.reduce(center);
            Canon::Hemisphere { plane: GeodesicPlane::Hemisphere { center: c, radius }, shift }
        }
        (h @ GeodesicPlane::Hemisphere { .. }, None) => Canon::Hemisphere { plane: h, shift: (0, 0) },
        (GeodesicPlane::Vertical { base, dir }, Some(l)) => {
            let Some((m, n)) = rational_direction(l, dir) else { return Canon::Irrational };
            let w = l.vector(m, n);
            let d = w / w.norm();
            // u completes w to a basis, so its offset across the line is one spacing
            let (x, y, _) = ext_gcd(m, n);
            let (um, un) = (-y, x);
            let u = l.vector(um, un);
            let su = (d.conj() * u).im;
            let s = (d.conj() * base).im;
            let k = ((s / su) + 1e-9).floor() as i64;
            let offset = s - k as f64 * su;
            let plane = GeodesicPlane::Vertical { base: d * C64::new(0.0, offset), dir: d };
            Canon::Vertical { plane, shift: (k * um, k * un) }
        }
        (GeodesicPlane::Vertical { base, dir }, None) => {
            let d = if dir.re < 0.0 || (dir.re == 0.0 && dir.im < 0.0) { -dir } else { dir };
            let offset = (d.conj() * base).im;
            let plane = GeodesicPlane::Vertical { base: d * C64::new(0.0, offset), dir: d };
            Canon::Vertical { plane, shift: (0, 0) }
        }
    }
}

fn plane_key(p: &GeodesicPlane, lat: Option<&Lattice>, cell: f64) -> (i64, i64, i64, i64) {
    let q = |x: f64| (x / cell).round() as i64;
    match *p {
        GeodesicPlane::Hemisphere { center, radius } => {
            let (x, y) = lat.map_or((center.re, center.im), |l| l.coords(center));
            (0, q(x), q(y), q(radius))
        }
        GeodesicPlane::Vertical { base, dir } => (1, q(dir.arg()), q((dir.conj() * base).im), 0),
    }
}

fn same_plane(p: &GeodesicPlane, q: &GeodesicPlane, eps: f64) -> bool {
    match (*p, *q) {
        (GeodesicPlane::Hemisphere { center: c1, radius: r1 }, GeodesicPlane::Hemisphere { center: c2, radius: r2 }) => {
            (c1 - c2).norm() <= eps * r1.max(1.0) && (r1 - r2).abs() <= eps * r1.max(1.0)
        }
        (GeodesicPlane::Vertical { base: b1, dir: d1 }, GeodesicPlane::Vertical { base: b2, dir: d2 }) => {
            (d1 - d2).norm() <= eps && (d1.conj() * (b2 - b1)).im.abs() <= eps * (1.0 + b1.norm())
        }
        _ => false,
    }
}

struct PlaneIndex {
    cell: f64,
    map: HashMap<(i64, i64, i64, i64), Vec<usize>>,
}

impl PlaneIndex {
    fn find(&self, planes: &[PlaneLift], p: &GeodesicPlane, lat: Option<&Lattice>) -> Option<usize> {
        let (t, a, b, c) = plane_key(p, lat, self.cell);
        for da in -1..=1 {
            for db in -1..=1 {
                for dc in -1..=1 {
                    if let Some(ix) = self.map.get(&(t, a + da, b + db, c + dc)) {
                        if let Some(&i) = ix.iter().find(|&&i| same_plane(&planes[i].plane, p, self.cell)) {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, p: &GeodesicPlane, lat: Option<&Lattice>, i: usize) {
        self.map.entry(plane_key(p, lat, self.cell)).or_default().push(i);
    }
}

/// Lattice translations v for which S(P + v) can be a hemisphere of radius >= min_radius (or
/// vertical). None when there would be more than `limit` of them.
fn useful_translations(lat: &Lattice, p: &GeodesicPlane, s: &MoebiusMap, min_radius: f64, limit: usize) -> Option<Vec<(i64, i64)>> {
    let pole = -s.d / s.c;
    let c2 = s.c.norm_sqr();
    let cell = (lat.mu.conj() * lat.lambda).im.abs();
    let span = lat.mu.norm() + lat.lambda.norm();
    let too_many = |r: f64| std::f64::consts::PI * (r + span) * (r + span) / cell > limit as f64;
    match *p {
        GeodesicPlane::Hemisphere { center, radius } => {
            let r = (radius * radius + radius / (c2 * min_radius)).sqrt();
            if too_many(r) {
                return None;
            }
            Some(lat.points_in_disk(pole - center, r))
        }
        GeodesicPlane::Vertical { base, dir } => {
            let reach = 1.0 / (2.0 * c2 * min_radius);
            let period = match rational_direction(lat, dir) {
                Some((m, n)) => lat.vector(m, n).norm(),
                None => return Some(Vec::new()),
            };
            let z0 = pole - base;
            let r = (reach * reach + period * period).sqrt();
            if too_many(r) {
                return None;
            }
            Some(
                lat.points_in_disk(z0, r)
                    .into_iter()
                    .filter(|&(m, n)| (dir.conj() * (lat.vector(m, n) - z0)).im.abs() <= reach)
                    .collect(),
            )
        }
    }
}

const MAX_WORD: usize = 4096;

/// Orbit of `seed` under the group, keeping hemispheres of radius at least `min_radius`, modulo the lattice.
pub fn orbit_planes(group: &PlaneGroup, seed: &GeodesicPlane, opts: &OrbitOptions, tol: &Tolerance) -> PlaneLiftSet {
    let lat = group.lattice.as_ref();
    let mut planes: Vec<PlaneLift> = Vec::new();
    let mut index = PlaneIndex { cell: (tol.geometric * 1e3).max(1e-7), map: HashMap::new() };
    let mut witness = None;
    let mut words: Vec<Word> = Vec::new();

    // Err(None): the word would be unreasonably long, so the search stops unverified
    let mut add = |p: &GeodesicPlane, word: Word, planes: &mut Vec<PlaneLift>, words: &mut Vec<Word>| -> std::result::Result<Option<usize>, Option<OrbitWitness>> {
        let (plane, shift) = match canonicalize(p, lat) {
            Canon::Irrational => {
                return Err(Some(OrbitWitness { word: word_to_string(&word), reason: "vertical plane with irrational direction".into() }))
            }
            Canon::Vertical { plane, shift, .. } | Canon::Hemisphere { plane, shift } => (plane, shift),
        };
        if index.find(planes, &plane, lat).is_some() {
            return Ok(None);
        }
        let letters = shift.0.unsigned_abs() as usize * group.lattice_words.0.len().max(1)
            + shift.1.unsigned_abs() as usize * group.lattice_words.1.len().max(1);
        if word.len() + letters > MAX_WORD {
            return Err(None);
        }
        let word = concat(&[&group.translation_word(-shift.0, -shift.1), &word]);
        index.insert(&plane, lat, planes.len());
        planes.push(PlaneLift { plane, word: word_to_string(&word) });
        words.push(word);
        Ok(Some(planes.len() - 1))
    };

    let mut frontier = Vec::new();
    let mut overflow = false;
    match add(seed, Vec::new(), &mut planes, &mut words) {
        Ok(Some(i)) => frontier.push(i),
        Ok(None) => {}
        Err(w) => {
            witness = w;
            overflow = witness.is_none();
        }
    }
    let mut depth = 0;
    let mut checkpoint = opts.initial_depth.max(1);
    let mut last = None;
    let mut verified = false;
    while witness.is_none() && !overflow {
        if frontier.is_empty() {
            verified = true;
            break;
        }
        if depth >= opts.max_depth || planes.len() > opts.max_planes {
            break;
        }
        depth += 1;
        let mut next = Vec::new();
        'outer: for &i in &frontier {
            let p = planes[i].plane;
            let w = words[i].clone();
            for (s, sw) in &group.moves {
                let shifts = match lat {
                    Some(l) if s.c.norm() > 0.0 => match useful_translations(l, &p, s, opts.min_radius, opts.max_planes) {
                        Some(v) => v,
                        None => {
                            overflow = true;
                            break 'outer;
                        }
                    },
                    _ => vec![(0, 0)],
                };
                for (m, n) in shifts {
                    let v = lat.map_or(C64::new(0.0, 0.0), |l| l.vector(m, n));
                    let g = *s * MoebiusMap::translation(v);
                    let img = apply_plane_within(&g, &p, tol.tangency);
                    if let GeodesicPlane::Hemisphere { radius, .. } = img {
                        if radius < opts.min_radius {
                            continue;
                        }
                    }
                    let word = concat(&[sw, &group.translation_word(m, n), &w]);
                    match add(&img, word, &mut planes, &mut words) {
                        Ok(Some(k)) => {
                            next.push(k);
                            if planes.len() > opts.max_planes {
                                break 'outer;
                            }
                        }
                        Ok(None) => {}
                        Err(wit) => {
                            overflow = wit.is_none();
                            witness = wit;
                            break 'outer;
                        }
                    }
                }
            }
        }
        frontier = next;
        if depth == checkpoint && !overflow {
            if last == Some(planes.len()) {
                verified = true;
                break;
            }
            last = Some(planes.len());
            checkpoint *= 2;
        }
    }
    if !verified && witness.is_none() {
        witness = closest_pair(&planes, &words, lat);
    }
    PlaneLiftSet { planes, min_radius: opts.min_radius, lattice: group.lattice, verified: verified && witness.is_none(), depth, witness }
}

/// Two distinct hemispheres that nearly coincide, as evidence of an accumulating orbit.
fn closest_pair(planes: &[PlaneLift], words: &[Word], lat: Option<&Lattice>) -> Option<OrbitWitness> {
    let cell = 1e-3;
    let mut buckets: HashMap<(i64, i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in planes.iter().enumerate() {
        buckets.entry(plane_key(&p.plane, lat, cell)).or_default().push(i);
    }
    let mut keys: Vec<_> = buckets.keys().cloned().collect();
    keys.sort();
    for k in keys {
        let ix = &buckets[&k];
        if ix.len() >= 2 {
            let (a, b) = (ix[0], ix[1]);
            let g = concat(&[&words[b], &inverse_word(&words[a])]);
            return Some(OrbitWitness { word: word_to_string(&g), reason: "maps an orbit plane onto a distinct nearby plane".into() });
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingWitness {
    pub a: usize,
    pub b: usize,
    /// Lattice translation applied to plane b.
    pub translation: (i64, i64),
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    Embedded,
    Immersed { witness: CrossingWitness },
    NotInvariant { witness: OrbitWitness },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Embedded => "embedded",
            Classification::Immersed { .. } => "immersed",
            Classification::NotInvariant { .. } => "not_invariant",
        }
    }
}

/// Lattice translates of q near p that could meet it.
fn nearby_translates(lat: &Lattice, p: &GeodesicPlane, q: &GeodesicPlane) -> Vec<(i64, i64)> {
    use GeodesicPlane::*;
    match (*p, *q) {
        (Hemisphere { center: c1, radius: r1 }, Hemisphere { center: c2, radius: r2 }) => {
            lat.points_in_disk(c1 - c2, (r1 + r2) * 1.001 + 1e-9)
        }
        (Vertical { base, dir }, Hemisphere { center, radius }) | (Hemisphere { center, radius }, Vertical { base, dir }) => {
            let sign = if matches!(p, Vertical { .. }) { 1.0 } else { -1.0 };
            let period = rational_direction(lat, dir).map_or(lat.mu.norm().max(lat.lambda.norm()), |(m, n)| lat.vector(m, n).norm());
            // translate the hemisphere (or, reversed, the line) into a window around the other plane
            let z0 = (base - center) * sign;
            lat.points_in_disk(z0, (radius * radius * 1.01 + period * period).sqrt() + 1e-9)
                .into_iter()
                .filter(|&(m, n)| (dir.conj() * (lat.vector(m, n) - z0)).im.abs() <= radius * 1.001 + 1e-9)
                .collect()
        }
        (Vertical { .. }, Vertical { .. }) => vec![(0, 0)],
    }
}

/// Pairwise relations of the orbit (with lattice translates); embedded iff nothing crosses.
pub fn classify(liftset: &PlaneLiftSet, tol: &Tolerance) -> Result<Classification> {
    if let Some(w) = &liftset.witness {
        return Ok(Classification::NotInvariant { witness: w.clone() });
    }
    if !liftset.verified {
        return Err(Error::Unverified);
    }
    let planes = &liftset.planes;
    for a in 0..planes.len() {
        for b in a..planes.len() {
            let p = &planes[a].plane;
            let q = &planes[b].plane;
            let shifts = match &liftset.lattice {
                Some(l) => nearby_translates(l, p, q),
                None => vec![(0, 0)],
            };
            for (m, n) in shifts {
                if a == b && (m, n) == (0, 0) {
                    continue;
                }
                let v = liftset.lattice.map_or(C64::new(0.0, 0.0), |l| l.vector(m, n));
                let q = translate(q, v);
                if let PlanePlaneRelation::Crossing { angle } = horoballs_free_relation(p, &q, tol) {
                    return Ok(Classification::Immersed { witness: CrossingWitness { a, b, translation: (m, n), angle } });
                }
            }
        }
    }
    Ok(Classification::Embedded)
}

fn horoballs_free_relation(p: &GeodesicPlane, q: &GeodesicPlane, tol: &Tolerance) -> PlanePlaneRelation {
    crate::hmodel::plane_plane_relation(p, q, tol)
}

fn translate(p: &GeodesicPlane, v: C64) -> GeodesicPlane {
    match *p {
        GeodesicPlane::Vertical { base, dir } => GeodesicPlane::Vertical { base: base + v, dir },
        GeodesicPlane::Hemisphere { center, radius } => GeodesicPlane::Hemisphere { center: center + v, radius },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub classification: Classification,
    pub liftset: PlaneLiftSet,
}

/// Orbit of the candidate's seed in its chart, then classification.
pub fn verify_invariant(m: &Manifold, candidate: &SurfaceCandidate, opts: &OrbitOptions) -> Result<Verification> {
    let group = PlaneGroup::from_manifold(m, candidate.chart)?;
    let liftset = orbit_planes(&group, &candidate.seed, opts, &m.tol);
    let classification = classify(&liftset, &m.tol)?;
    Ok(Verification { classification, liftset })
}

/// Common direction of the vertical planes as a primitive class (p, q) in the (mu, lambda) basis.
pub fn boundary_slope(liftset: &PlaneLiftSet, cusp: &CuspShape) -> Result<(i64, i64)> {
    let lat = Lattice { mu: cusp.t_mu, lambda: cusp.t_lambda };
    let mut slope = None;
    for p in liftset.verticals() {
        if let GeodesicPlane::Vertical { dir, .. } = *p {
            let s = rational_direction(&lat, dir).ok_or_else(|| Error::Invalid("vertical plane with irrational direction".into()))?;
            let s = if s.1 < 0 || (s.1 == 0 && s.0 < 0) { (-s.0, -s.1) } else { s };
            match slope {
                None => slope = Some(s),
                Some(t) if t != s => return Err(Error::Invalid(format!("vertical planes in directions {t:?} and {s:?}"))),
                _ => {}
            }
        }
    }
    slope.ok_or(Error::MissesCusp)
}

/// The candidate's plane orbit seen from cusp `k`: the seed is carried over from its own chart.
pub fn liftset_at_cusp(m: &Manifold, candidate: &SurfaceCandidate, k: usize, opts: &OrbitOptions) -> Result<PlaneLiftSet> {
    let seed = crate::hmodel::apply_plane(&m.transfer(k, candidate.chart)?, &candidate.seed);
    let group = PlaneGroup::from_manifold(m, k)?;
    Ok(orbit_planes(&group, &seed, opts, &m.tol))
}

/// Cusp index with the candidate's slope there, if it meets the cusp.
pub type CuspSlope = (usize, Option<(i64, i64)>);

/// Boundary slope of the candidate on every complete cusp (None where it misses the cusp).
pub fn boundary_slopes(m: &Manifold, candidate: &SurfaceCandidate, opts: &OrbitOptions) -> Result<Vec<CuspSlope>> {
    let mut out = Vec::new();
    for k in m.complete_cusps() {
        let ls = liftset_at_cusp(m, candidate, k, opts)?;
        match boundary_slope(&ls, &m.cusp_shape(k)?) {
            Ok(s) => out.push((k, Some(s))),
            Err(Error::MissesCusp) => out.push((k, None)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NGonWitness {
    pub n: usize,
    /// planes[k] and planes[k + 1] are tangent at balls[k] (indices mod n).
    pub planes: Vec<GeodesicPlane>,
    pub balls: Vec<BoundaryPoint>,
}

/// Whether `z` is the center of a diagram ball (or a lattice translate of one).
fn ball_at(diagram: &HoroballDiagram, z: C64, eps: f64) -> bool {
    let lat = &diagram.lattice;
    diagram.balls.iter().any(|b| {
        let (x, y) = lat.coords(z - b.center);
        let off = lat.vector(x.round() as i64, y.round() as i64) - (z - b.center);
        off.norm() <= eps
    })
}

/// Tangency point of p and q when it is a horoball center (infinity counts through the diagram's own ball).
fn tangency_at_ball(p: &GeodesicPlane, q: &GeodesicPlane, diagram: &HoroballDiagram, tol: &Tolerance) -> Option<BoundaryPoint> {
    match crate::hmodel::plane_plane_relation(p, q, tol) {
        PlanePlaneRelation::Tangent { point: BoundaryPoint::Infinity } => Some(BoundaryPoint::Infinity),
        PlanePlaneRelation::Tangent { point: BoundaryPoint::Finite(z) } => {
            let scale = diagram.lattice.mu.norm().max(1.0);
            ball_at(diagram, z, 1e3 * tol.tangency * scale).then_some(BoundaryPoint::Finite(z))
        }
        _ => None,
    }
}

/// Irreducible cycles of planes, consecutive ones tangent at horoball centers, through the ball at
/// infinity of the diagram's cusp, reported once per deck translation class. `liftset` must be in
/// the diagram's coordinates.
pub fn find_ngons(liftset: &PlaneLiftSet, diagram: &HoroballDiagram, max_n: usize, tol: &Tolerance) -> Vec<NGonWitness> {
    let lat = diagram.lattice;
    let verticals: Vec<GeodesicPlane> = liftset.verticals().cloned().collect();
    if verticals.is_empty() || max_n < 2 {
        return Vec::new();
    }
    let rmax = liftset
        .planes
        .iter()
        .filter_map(|p| match p.plane {
            GeodesicPlane::Hemisphere { radius, .. } => Some(radius),
            _ => None,
        })
        .fold(0.0, f64::max);
    let span = lat.mu.norm().max(lat.lambda.norm());
    let reach = 2.0 * rmax * max_n as f64 + 2.0 * span;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for va in &verticals {
        let GeodesicPlane::Vertical { base, dir } = *va else { continue };
        // every plane lift near the segment of va through base
        let mut lifts: Vec<GeodesicPlane> = Vec::new();
        for p in &liftset.planes {
            let anchor = match p.plane {
                GeodesicPlane::Vertical { base: b, .. } => b,
                GeodesicPlane::Hemisphere { center, .. } => center,
            };
            for (m, n) in lat.points_in_disk(base - anchor, reach) {
                let q = translate(&p.plane, lat.vector(m, n));
                if let GeodesicPlane::Vertical { base: b, dir: d } = q {
                    // parallel lines, kept once per offset
                    if lifts.iter().any(|x| same_plane(x, &q, 1e-9)) || (d.conj() * (b - base)).re.abs() > span {
                        continue;
                    }
                }
                if !lifts.iter().any(|x| same_plane(x, &q, 1e-9)) {
                    lifts.push(q);
                }
            }
        }
        let Some(a) = lifts.iter().position(|x| same_plane(x, va, 1e-9)) else { continue };
        let n = lifts.len();
        let mut adj: Vec<Vec<(usize, BoundaryPoint)>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if let Some(pt) = tangency_at_ball(&lifts[i], &lifts[j], diagram, tol) {
                    adj[i].push((j, pt));
                    adj[j].push((i, pt));
                }
            }
        }
        // cycles a -> (via infinity) b -> ... -> a
        for &(b, pt) in &adj[a] {
            if pt != BoundaryPoint::Infinity {
                continue;
            }
            let mut path = vec![a, b];
            let mut points = vec![pt];
            extend_cycles(&adj, &lifts, &mut path, &mut points, max_n, diagram, tol, &mut |path, points| {
                let key = cycle_key(path, points, &lifts, &lat);
                if seen.insert(key) {
                    out.push(NGonWitness { n: path.len(), planes: path.iter().map(|&i| lifts[i]).collect(), balls: points.to_vec() });
                }
            });
        }
        let _ = dir;
    }
    out.sort_by_key(|w| w.n);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_cycles(
    adj: &[Vec<(usize, BoundaryPoint)>],
    lifts: &[GeodesicPlane],
    path: &mut Vec<usize>,
    points: &mut Vec<BoundaryPoint>,
    max_n: usize,
    diagram: &HoroballDiagram,
    tol: &Tolerance,
    emit: &mut dyn FnMut(&[usize], &[BoundaryPoint]),
) {
    let last = *path.last().expect("nonempty");
    let first = path[0];
    for &(next, pt) in &adj[last] {
        if points.iter().any(|p| p.approx_eq(pt, 1e-7)) {
            continue;
        }
        if next == first {
            if path.len() >= 2 && path.len() <= max_n && points.len() + 1 == path.len() {
                points.push(pt);
                if irreducible(path, lifts, diagram, tol) {
                    emit(path, points);
                }
                points.pop();
            }
            continue;
        }
        if path.contains(&next) || path.len() >= max_n {
            continue;
        }
        path.push(next);
        points.push(pt);
        extend_cycles(adj, lifts, path, points, max_n, diagram, tol, emit);
        path.pop();
        points.pop();
    }
}

/// No two non-consecutive members touch at a horoball center.
fn irreducible(path: &[usize], lifts: &[GeodesicPlane], diagram: &HoroballDiagram, tol: &Tolerance) -> bool {
    let n = path.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if tangency_at_ball(&lifts[path[i]], &lifts[path[j]], diagram, tol).is_some() {
                return false;
            }
        }
    }
    true
}

/// Cycle identity modulo deck translations: reduced tangency points and planes, order-free.
fn cycle_key(path: &[usize], points: &[BoundaryPoint], lifts: &[GeodesicPlane], lat: &Lattice) -> Vec<(i64, i64, i64)> {
    let q = |x: f64| (x * 1e6).round() as i64;
    let mut key: Vec<(i64, i64, i64)> = points
        .iter()
        .map(|p| match p {
            BoundaryPoint::Infinity => (i64::MAX, 0, 0),
            BoundaryPoint::Finite(z) => {
                let (r, _) = lat.reduce(*z);
                let (x, y) = lat.coords(r);
                (0, q(x), q(y))
            }
        })
        .collect();
    for &i in path {
        key.push(match lifts[i] {
            GeodesicPlane::Hemisphere { center, radius } => {
                let (r, _) = lat.reduce(center);
                let (x, y) = lat.coords(r);
                (1, q(x) * 1_000_003 + q(y), q(radius))
            }
            GeodesicPlane::Vertical { .. } => (2, 0, 0),
        });
    }
    key.push((path.len() as i64, 0, 0));
    key.sort();
    key
}

/// A hand-made configuration of planes and horoballs in one cusp chart, for exercising the n-gon search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFixture {
    #[serde(default)]
    pub name: Option<String>,
    pub lattice: Lattice,
    pub planes: Vec<GeodesicPlane>,
    /// Horoballs as (center, diameter); the ball at infinity has height 1.
    pub balls: Vec<(C64, f64)>,
}

impl SyntheticFixture {
    pub fn from_json(text: &str) -> Result<SyntheticFixture> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("fixture: {e}")))
    }

    pub fn liftset(&self) -> PlaneLiftSet {
        PlaneLiftSet::from_planes(self.planes.clone(), Some(self.lattice))
    }

    pub fn diagram(&self) -> HoroballDiagram {
        HoroballDiagram {
            manifold: self.name.clone().unwrap_or_else(|| "synthetic".into()),
            cusp: 0,
            scales: vec![1.0],
            cutoff: 0.0,
            balls: self
                .balls
                .iter()
                .map(|&(center, diameter)| horoballs::Ball { center, diameter, word: "1".into(), cusp: 0 })
                .collect(),
            lattice: self.lattice,
            verified: true,
            certificates: Vec::new(),
        }
    }

    pub fn ngons(&self, max_n: usize, tol: &Tolerance) -> Vec<NGonWitness> {
        find_ngons(&self.liftset(), &self.diagram(), max_n, tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthTheoremReport {
    pub manifold: String,
    pub candidate: Option<String>,
    pub classification: Classification,
    /// Per complete cusp: boundary slope of the surface, if it meets the cusp.
    pub slopes: Vec<(usize, Option<(i64, i64)>)>,
    pub widths: Option<WidthReport>,
    pub width: Option<f64>,
    pub ngons: Vec<NGonWitness>,
    pub clauses: Vec<Clause>,
}

impl WidthTheoremReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn count(&self, n: usize) -> usize {
        self.ngons.iter().filter(|w| w.n == n).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub orbit: OrbitOptions,
    pub enumeration: EnumOptions,
    pub max_n: usize,
    /// Diagram cutoff used for the n-gon search.
    pub cutoff: f64,
    /// Tolerance of the w = 1 test.
    pub width_tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { orbit: OrbitOptions::default(), enumeration: EnumOptions::default(), max_n: 4, cutoff: 0.2, width_tol: 1e-6 }
    }
}

fn clause(name: &str, verdict: Verdict, detail: String) -> Clause {
    Clause { name: name.into(), verdict, detail }
}

/// Classifies the candidate, measures balanced widths of its boundary curves and checks the width theorems.
pub fn width_theorem_report(m: &Manifold, candidate: &SurfaceCandidate, opts: &ReportOptions) -> Result<WidthTheoremReport> {
    let ver = verify_invariant(m, candidate, &opts.orbit)?;
    let mut report = WidthTheoremReport {
        manifold: m.name.clone(),
        candidate: candidate.name.clone(),
        classification: ver.classification.clone(),
        slopes: Vec::new(),
        widths: None,
        width: None,
        ngons: Vec::new(),
        clauses: Vec::new(),
    };
    if !matches!(ver.classification, Classification::Embedded) {
        report.clauses.push(clause(
            "totally_geodesic_embedded",
            Verdict::Skipped,
            format!("candidate is {}; theorem clauses apply to embedded surfaces", ver.classification.name()),
        ));
        return Ok(report);
    }
    let cusps = m.complete_cusps();
    let mut liftsets = Vec::new();
    for &k in &cusps {
        let ls = if k == candidate.chart { ver.liftset.clone() } else { liftset_at_cusp(m, candidate, k, &opts.orbit)? };
        let slope = match boundary_slope(&ls, &m.cusp_shape(k)?) {
            Ok(s) => Some(s),
            Err(Error::MissesCusp) => None,
            Err(e) => return Err(e),
        };
        report.slopes.push((k, slope));
        liftsets.push(ls);
    }
    if let Some(claim) = candidate.claimed_slope {
        let got = report.slopes.iter().find(|(k, _)| *k == candidate.chart).and_then(|(_, s)| *s);
        let ok = got.is_some_and(|s| s == claim || s == (-claim.0, -claim.1));
        report.clauses.push(clause("claimed_slope", if ok { Verdict::Pass } else { Verdict::Fail }, format!("claimed {claim:?}, found {got:?}")));
    }
    // designated curves: boundary l-curves where present, longitudes elsewhere
    let curves: Vec<(i64, i64)> = report
        .slopes
        .iter()
        .map(|(_, s)| match s {
            Some((p, q)) if q.abs() == 1 => (p * q, 1),
            _ => (0, 1),
        })
        .collect();
    let max = horoballs::max_diameters(m, &opts.enumeration)?;
    let widths = balance_with(m, &cusps, &curves, &max)?;
    let w = widths.common_width();
    let mut scales = vec![0.0; m.num_cusps()];
    for (i, &k) in cusps.iter().enumerate() {
        scales[k] = widths.scales[i];
    }
    for (i, &k) in cusps.iter().enumerate() {
        if report.slopes[i].1.is_none() {
            continue;
        }
        let diagram = horoballs::enumerate(m, k, &scales, opts.cutoff, &opts.enumeration)?;
        let ls = liftsets[i].scaled(scales[k]);
        report.ngons.extend(find_ngons(&ls, &diagram, opts.max_n, &m.tol));
    }
    report.widths = Some(widths);
    report.width = Some(w);
    let bigons = report.count(2);
    let trigons = report.count(3);
    report.clauses.push(clause("no_bigon", if bigons == 0 { Verdict::Pass } else { Verdict::Fail }, format!("{bigons} bigon(s)")));
    report.clauses.push(clause(
        "width_at_least_one",
        if w >= 1.0 - opts.width_tol { Verdict::Pass } else { Verdict::Fail },
        format!("w = {w}"),
    ));
    let below_two = match candidate.freeness {
        Freeness::Free | Freeness::Semifree => {
            if w <= 2.0 - opts.width_tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        _ => Verdict::Skipped,
    };
    report.clauses.push(clause("width_below_two", below_two, format!("w = {w}, freeness {:?}", candidate.freeness)));
    let unit = (w - 1.0).abs() < opts.width_tol;
    report.clauses.push(clause(
        "unit_width_iff_trigon",
        if unit == (trigons > 0) { Verdict::Pass } else { Verdict::Fail },
        format!("|w - 1| = {:e}, {trigons} 3-gon(s)", (w - 1.0).abs()),
    ));
    let parity = if trigons > 0 && candidate.orientable == Some(true) { Verdict::Fail } else { Verdict::Pass };
    report.clauses.push(clause("trigon_parity", parity, format!("orientable {:?}, {trigons} 3-gon(s)", candidate.orientable)));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistPoint {
    pub p: i64,
    pub width: f64,
    pub eta_length: f64,
    pub area: f64,
    pub meridian_length: f64,
    pub volume: f64,
    /// The filled knot cusp's class eta_p = lambda + s p mu.
    pub eta: (i64, i64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistSeries {
    pub knot_cusp: usize,
    pub drilled_cusp: usize,
    pub framing_shift: i64,
    pub points: Vec<TwistPoint>,
    /// Values of p whose filling did not give a usable structure.
    pub skipped: Vec<(i64, String)>,
}

impl TwistSeries {
    /// Smallest p from which every later computed width is below 1.
    pub fn below_one_from(&self) -> Option<i64> {
        let mut from = None;
        for pt in self.points.iter().rev() {
            if pt.width < 1.0 {
                from = Some(pt.p);
            } else {
                break;
            }
        }
        from
    }
}

/// Fills the drilled cusp along (1, p) for each p and measures the knot's maximal cusp.
pub fn twist_series(tri: &IdealTriangulation, ps: &[i64], tol: &Tolerance, opts: &EnumOptions) -> Result<TwistSeries> {
    if ps.is_empty() {
        return Err(Error::Invalid("empty range of p".into()));
    }
    let drilled = tri.drilled_cusp().ok_or_else(|| Error::Invalid("no drilled cusp in the triangulation".into()))?;
    let knot = (0..tri.num_cusps()).find(|&k| k != drilled).ok_or_else(|| Error::Invalid("no knot cusp".into()))?;
    let s = tri.cusps[knot].framing_shift.unwrap_or(0);
    let mut series = TwistSeries { knot_cusp: knot, drilled_cusp: drilled, framing_shift: s, points: Vec::new(), skipped: Vec::new() };
    let mut warm: Option<Vec<C64>> = None;
    for &p in ps {
        let filled = tri.with_filling(drilled, 1, p)?;
        let init = warm.clone().unwrap_or_else(|| vec![C64::from_polar(1.0, std::f64::consts::PI / 3.0); tri.n]);
        let point = solve_shapes_from(&filled, &init, &SolveOptions::default())
            .and_then(|sh| {
                if !sh.geometric {
                    return Err(Error::Invalid("no geometric solution".into()));
                }
                warm = Some(sh.z.clone());
                let m = Manifold::from_shapes(filled.clone(), sh, *tol)?;
                let max = horoballs::max_diameters(&m, opts)?;
                let d = max.get(knot, knot).ok_or(Error::IncreaseDepth("no horoball".into()))?.diameter;
                let shape = m.cusp_shape(knot)?.at_scale(1.0 / d.sqrt());
                let eta = (s * p, 1);
                let eta_length = slope_length(&shape, eta.0, eta.1)?;
                // spacing of the eta-lines, measured along the meridian (which meets eta once)
                let e = shape.vector(eta.0, eta.1) * shape.scale;
                let u = shape.vector(1, 0) * shape.scale;
                Ok(TwistPoint {
                    p,
                    width: (u * e.conj()).im.abs() / e.norm(),
                    eta_length,
                    area: shape.area(),
                    meridian_length: slope_length(&shape, 1, 0)?,
                    volume: m.volume().unwrap_or(f64::NAN),
                    eta,
                })
            });
        match point {
            Ok(pt) => series.points.push(pt),
            Err(e) => series.skipped.push((p, e.to_string())),
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn translation_orbit_of_vertical() {
        let g = PlaneGroup::new(&[MoebiusMap::translation(c(2.0, 0.0))], None);
        let seed = GeodesicPlane::vertical(c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        let opts = OrbitOptions { max_depth: 3, initial_depth: 8, ..Default::default() };
        let ls = orbit_planes(&g, &seed, &opts, &Tolerance::default());
        let mut xs: Vec<f64> = ls
            .planes
            .iter()
            .map(|p| match p.plane {
                GeodesicPlane::Vertical { base, .. } => base.re,
                _ => panic!("hemisphere in a translation orbit"),
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn trivial_group_orbit_is_seed() {
        let g = PlaneGroup::new(&[MoebiusMap::identity()], None);
        let seed = GeodesicPlane::hemisphere(c(0.3, 0.1), 0.7).unwrap();
        let ls = orbit_planes(&g, &seed, &OrbitOptions::default(), &Tolerance::default());
        assert_eq!(ls.planes.len(), 1);
        assert!(ls.verified);
    }

    #[test]
    fn vertical_canonical_form_mod_lattice() {
        let lat = Lattice { mu: c(1.0, 0.0), lambda: c(0.3, 2.0) };
        let p = GeodesicPlane::vertical(c(0.2, 0.0), lat.lambda).unwrap();
        let q = translate(&p, lat.vector(3, -2) + lat.lambda * 0.37);
        let (Canon::Vertical { plane: a, .. }, Canon::Vertical { plane: b, .. }) =
            (canonicalize(&p, Some(&lat)), canonicalize(&q, Some(&lat)))
        else {
            panic!("expected verticals")
        };
        assert_eq!(rational_direction(&lat, lat.lambda), Some((0, 1)));
        assert!(same_plane(&a, &b, 1e-12));
    }

    #[test]
    fn synthetic_slope() {
        let shape = CuspShape::new(0, c(1.0, 0.0), c(0.0, 3.0), 1.0).unwrap();
        let ls = PlaneLiftSet::from_planes(vec![GeodesicPlane::vertical(c(0.0, 0.5), c(1.0, 0.0)).unwrap()], None);
        assert_eq!(boundary_slope(&ls, &shape), Ok((1, 0)));
        let empty = PlaneLiftSet::from_planes(vec![GeodesicPlane::hemisphere(c(0.0, 0.0), 1.0).unwrap()], None);
        assert_eq!(boundary_slope(&empty, &shape), Err(Error::MissesCusp));
    }

    fn trigon_fixture() -> SyntheticFixture {
        SyntheticFixture {
            name: None,
            lattice: Lattice { mu: c(1.0, 0.0), lambda: c(0.0, 2.0) },
            planes: vec![
                GeodesicPlane::vertical(c(0.0, 0.0), c(0.0, 1.0)).unwrap(),
                GeodesicPlane::vertical(c(1.0, 0.0), c(0.0, 1.0)).unwrap(),
                GeodesicPlane::hemisphere(c(0.5, 0.0), 0.5).unwrap(),
            ],
            balls: vec![(c(0.0, 0.0), 1.0)],
        }
    }

    #[test]
    fn synthetic_trigon() {
        let f = trigon_fixture();
        let tol = Tolerance::default();
        let three = f.ngons(3, &tol);
        assert_eq!(three.len(), 1, "{three:?}");
        assert_eq!(three[0].n, 3);
        assert!(three[0].balls.contains(&BoundaryPoint::Infinity));
        assert!(f.ngons(4, &tol).iter().all(|w| w.n != 2));
    }

    #[test]
    fn synthetic_trigon_is_embedded() {
        let f = trigon_fixture();
        assert_eq!(classify(&f.liftset(), &Tolerance::default()), Ok(Classification::Embedded));
    }

    #[test]
    fn ext_gcd_identity() {
        for (a, b) in [(3, 5), (0, 1), (1, 0), (-4, 7), (6, -1)] {
            let (x, y, g) = ext_gcd(a, b);
            assert_eq!(a * x + b * y, g);
        }
    }
}
