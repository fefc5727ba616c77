//! Upper half-space geometry: Möbius maps acting on the sphere at infinity,
//! horoballs and geodesic planes.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerances shared by the whole toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub geometric: f64,
    pub residual: f64,
    pub tangency: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { geometric: 1e-9, residual: 1e-12, tangency: 1e-7 }
    }
}

impl Tolerance {
    pub fn new(geometric: f64, residual: f64, tangency: f64) -> Result<Self> {
        if !(geometric > 0.0 && residual > 0.0 && tangency > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if tangency <= geometric {
            return Err(Error::Invalid("tangency tolerance must exceed the geometric one".into()));
        }
        Ok(Tolerance { geometric, residual, tangency })
    }

    pub fn with_geometric(self, geometric: f64) -> Result<Self> {
        let tangency = self.tangency.max(geometric * 10.0);
        Tolerance::new(geometric, self.residual, tangency)
    }
}

/// A point of the sphere at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(C64),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(self) -> Option<C64> {
        match self {
            BoundaryPoint::Finite(z) => Some(z),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn approx_eq(self, other: BoundaryPoint, tol: f64) -> bool {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (a - b).norm() <= tol * (1.0 + a.norm()),
            _ => false,
        }
    }
}

impl From<C64> for BoundaryPoint {
    fn from(z: C64) -> Self {
        BoundaryPoint::Finite(z)
    }
}

/// A point of hyperbolic space: horizontal coordinate and height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub z: C64,
    pub h: f64,
}

impl SpacePoint {
    pub fn new(z: C64, h: f64) -> Self {
        SpacePoint { z, h }
    }

    fn euclid(self, other: SpacePoint) -> f64 {
        ((self.z - other.z).norm_sqr() + (self.h - other.h).powi(2)).sqrt()
    }
}

/// Orientation-preserving isometry as an element of SL(2,C); M and -M act identically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MoebiusMap {
    /// Normalizes to determinant one. Rejects |det| <= 1e-14.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() > 1e-14) {
            return Err(Error::DegenerateMatrix(det.norm()));
        }
        let s = det.sqrt();
        Ok(MoebiusMap { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        MoebiusMap { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    pub fn translation(t: C64) -> Self {
        MoebiusMap { a: ONE, b: t, c: ZERO, d: ONE }
    }

    /// z -> k z + t
    pub fn affine(k: C64, t: C64) -> Result<Self> {
        MoebiusMap::new(k, t, ZERO, ONE)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn neg(&self) -> Self {
        MoebiusMap { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Entrywise distance to `other`, minimized over the sign ambiguity.
    pub fn distance(&self, other: &MoebiusMap) -> f64 {
        let plus = (self.a - other.a).norm_sqr()
            + (self.b - other.b).norm_sqr()
            + (self.c - other.c).norm_sqr()
            + (self.d - other.d).norm_sqr();
        let minus = (self.a + other.a).norm_sqr()
            + (self.b + other.b).norm_sqr()
            + (self.c + other.c).norm_sqr()
            + (self.d + other.d).norm_sqr();
        plus.min(minus).sqrt()
    }

    pub fn approx_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        self.distance(other) <= tol * self.norm().max(1.0)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&MoebiusMap::identity(), tol)
    }

    /// Re-imposes det = 1 after accumulated rounding.
    pub fn renormalized(&self) -> Self {
        let s = self.det().sqrt();
        MoebiusMap { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    pub fn compose(&self, other: &MoebiusMap) -> Self {
        *self * *other
    }

    /// The point sent to infinity, i.e. -d/c.
    pub fn pole(&self) -> BoundaryPoint {
        self.inverse().apply(BoundaryPoint::Infinity)
    }

    pub fn apply(&self, z: BoundaryPoint) -> BoundaryPoint {
        apply_boundary(self, z)
    }

    /// The map sending 0, infinity, 1 to p, q, r.
    pub fn from_triple(p: BoundaryPoint, q: BoundaryPoint, r: BoundaryPoint) -> Result<Self> {
        Ok(to_standard(p, q, r)?.inverse())
    }

    /// The map sending (p0, p1, p2) to (q0, q1, q2).
    pub fn triple_to_triple(p: [BoundaryPoint; 3], q: [BoundaryPoint; 3]) -> Result<Self> {
        let a = to_standard(p[0], p[1], p[2])?;
        let b = to_standard(q[0], q[1], q[2])?;
        Ok((b.inverse() * a).renormalized())
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, o: MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// The map sending p, q, r to 0, infinity, 1.
fn to_standard(p: BoundaryPoint, q: BoundaryPoint, r: BoundaryPoint) -> Result<MoebiusMap> {
    use BoundaryPoint::*;
    let (a, b, c, d) = match (p, q, r) {
        (Finite(p), Finite(q), Finite(r)) => (r - q, -p * (r - q), r - p, -q * (r - p)),
        (Infinity, Finite(q), Finite(r)) => (ZERO, r - q, ONE, -q),
        (Finite(p), Infinity, Finite(r)) => (ONE, -p, ZERO, r - p),
        (Finite(p), Finite(q), Infinity) => (ONE, -p, ONE, -q),
        _ => return Err(Error::Invalid("triple contains repeated points".into())),
    };
    MoebiusMap::new(a, b, c, d)
}

/// Relative threshold below which c z + d counts as zero.
const POLE_EPS: f64 = 4.0 * f64::EPSILON;

pub fn apply_boundary(m: &MoebiusMap, z: BoundaryPoint) -> BoundaryPoint {
    match z {
        BoundaryPoint::Infinity => {
            if m.c == ZERO {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Finite(m.a / m.c)
            }
        }
        BoundaryPoint::Finite(z) => {
            let den = m.c * z + m.d;
            if den.norm() <= POLE_EPS * ((m.c * z).norm() + m.d.norm()) {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Finite((m.a * z + m.b) / den)
            }
        }
    }
}

/// Action on a point of hyperbolic space (quaternion formula).
pub fn apply_space(m: &MoebiusMap, p: SpacePoint) -> SpacePoint {
    let w = m.c * p.z + m.d;
    let den = w.norm_sqr() + m.c.norm_sqr() * p.h * p.h;
    let num = (m.a * p.z + m.b) * w.conj() + m.a * m.c.conj() * p.h * p.h;
    SpacePoint { z: num / den, h: p.h / den }
}

/// Horoball: finite center with Euclidean diameter, or infinity with the height of its boundary plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    pub center: BoundaryPoint,
    pub size: f64,
}

impl Horoball {
    pub fn new(center: BoundaryPoint, size: f64) -> Result<Self> {
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::Invalid(format!("horoball size must be positive, got {size}")));
        }
        Ok(Horoball { center, size })
    }

    pub fn finite(center: C64, diameter: f64) -> Result<Self> {
        Horoball::new(BoundaryPoint::Finite(center), diameter)
    }

    pub fn at_infinity(height: f64) -> Result<Self> {
        Horoball::new(BoundaryPoint::Infinity, height)
    }

    /// The image of the height-one ball at infinity under `m`.
    pub fn from_matrix(m: &MoebiusMap) -> Horoball {
        if m.c == ZERO {
            Horoball { center: BoundaryPoint::Infinity, size: m.a.norm_sqr() }
        } else {
            Horoball { center: BoundaryPoint::Finite(m.a / m.c), size: 1.0 / m.c.norm_sqr() }
        }
    }

    /// A matrix taking the height-one ball at infinity to this ball.
    pub fn to_matrix(&self) -> MoebiusMap {
        match self.center {
            BoundaryPoint::Infinity => {
                let s = self.size.sqrt();
                MoebiusMap { a: C64::new(s, 0.0), b: ZERO, c: ZERO, d: C64::new(1.0 / s, 0.0) }
            }
            BoundaryPoint::Finite(y) => {
                let s = C64::new(1.0 / self.size.sqrt(), 0.0);
                MoebiusMap { a: y * s, b: -ONE / s, c: s, d: ZERO }
            }
        }
    }

    /// Highest point for a finite ball; a point on the boundary plane otherwise.
    pub fn top(&self) -> SpacePoint {
        match self.center {
            BoundaryPoint::Finite(z) => SpacePoint::new(z, self.size),
            BoundaryPoint::Infinity => SpacePoint::new(ZERO, self.size),
        }
    }
}

pub fn apply_horoball(m: &MoebiusMap, b: &Horoball) -> Horoball {
    match b.center {
        BoundaryPoint::Infinity => {
            let k = m.c.norm_sqr();
            if m.c == ZERO {
                Horoball { center: BoundaryPoint::Infinity, size: b.size * m.a.norm_sqr() }
            } else {
                Horoball { center: BoundaryPoint::Finite(m.a / m.c), size: 1.0 / (k * b.size) }
            }
        }
        BoundaryPoint::Finite(y) => match apply_boundary(m, b.center) {
            BoundaryPoint::Infinity => {
                // m(y) = infinity: the image is the horizontal plane of height 1/(|c|^2 d)
                Horoball { center: BoundaryPoint::Infinity, size: 1.0 / (m.c.norm_sqr() * b.size) }
            }
            center => {
                let w = m.c * y + m.d;
                Horoball { center, size: b.size / w.norm_sqr() }
            }
        },
    }
}

/// Signed hyperbolic distance between horoballs; zero when tangent.
pub fn horoball_distance(b1: &Horoball, b2: &Horoball) -> Result<f64> {
    use BoundaryPoint::*;
    match (b1.center, b2.center) {
        (Infinity, Infinity) => Err(Error::NestedHoroballs),
        (Finite(p), Finite(q)) => {
            let e = (p - q).norm();
            if e == 0.0 {
                return Err(Error::NestedHoroballs);
            }
            Ok(2.0 * (e / (b1.size * b2.size).sqrt()).ln())
        }
        (Finite(_), Infinity) => Ok((b2.size / b1.size).ln()),
        (Infinity, Finite(_)) => Ok((b1.size / b2.size).ln()),
    }
}

/// Flat distance on the horosphere bounding `b` between two of its points.
pub fn horosphere_arc_length(b: &Horoball, x: SpacePoint, y: SpacePoint, tol: f64) -> Result<f64> {
    for p in [x, y] {
        let off = match b.center {
            BoundaryPoint::Infinity => (p.h - b.size).abs() / b.size,
            BoundaryPoint::Finite(c) => {
                let r = b.size / 2.0;
                (p.euclid(SpacePoint::new(c, r)) - r).abs() / r
            }
        };
        if off > tol.max(1e-12) || p.h <= 0.0 {
            return Err(Error::OffHorosphere(off));
        }
    }
    Ok(x.euclid(y) / (x.h * y.h).sqrt())
}

/// Totally geodesic plane: a vertical half-plane or a hemisphere orthogonal to the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeodesicPlane {
    Vertical { base: C64, dir: C64 },
    Hemisphere { center: C64, radius: f64 },
}

impl GeodesicPlane {
    pub fn vertical(base: C64, dir: C64) -> Result<Self> {
        let n = dir.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Invalid("vertical plane needs a nonzero direction".into()));
        }
        Ok(GeodesicPlane::Vertical { base, dir: dir / n })
    }

    pub fn hemisphere(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("hemisphere radius must be positive, got {radius}")));
        }
        Ok(GeodesicPlane::Hemisphere { center, radius })
    }

    /// Point of the boundary circle/line closest to the origin is used as base for verticals.
    pub fn canonical(self) -> Self {
        match self {
            GeodesicPlane::Vertical { base, dir } => {
                let dir = if dir.re < 0.0 || (dir.re == 0.0 && dir.im < 0.0) { -dir } else { dir };
                let foot = base - dir * (dir.conj() * base).re;
                GeodesicPlane::Vertical { base: foot, dir }
            }
            h => h,
        }
    }

    /// Boundary sample at parameter t in [0,1) (a full turn for circles; a bounded segment for lines).
    pub fn boundary_sample(&self, t: f64) -> C64 {
        match *self {
            GeodesicPlane::Vertical { base, dir } => base + dir * (10.0 * (t - 0.5)),
            GeodesicPlane::Hemisphere { center, radius } => {
                center + C64::from_polar(radius, 2.0 * std::f64::consts::PI * t)
            }
        }
    }

    /// Distance of a boundary point from the boundary circle/line (relative for circles).
    pub fn boundary_defect(&self, z: C64) -> f64 {
        match *self {
            GeodesicPlane::Vertical { base, dir } => (dir.conj() * (z - base)).im.abs(),
            GeodesicPlane::Hemisphere { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }

    pub fn contains_boundary(&self, z: BoundaryPoint, tol: f64) -> bool {
        match (self, z) {
            (GeodesicPlane::Vertical { .. }, BoundaryPoint::Infinity) => true,
            (GeodesicPlane::Hemisphere { .. }, BoundaryPoint::Infinity) => false,
            (p, BoundaryPoint::Finite(w)) => {
                let scale = match p {
                    GeodesicPlane::Hemisphere { radius, .. } => radius.max(1.0),
                    _ => 1.0 + w.norm(),
                };
                p.boundary_defect(w) <= tol * scale
            }
        }
    }

    /// Hermitian form H with boundary {z : (z,1)^* H (z,1) = 0}, stored as (A, B, C) with H = [[A, B], [conj B, C]].
    fn hermitian(&self) -> (f64, C64, f64) {
        match *self {
            GeodesicPlane::Hemisphere { center, radius } => {
                (1.0, -center, center.norm_sqr() - radius * radius)
            }
            GeodesicPlane::Vertical { base, dir } => {
                // i(conj(u) z - u conj(z)) + i(u conj(b) - conj(u) b) = 0
                let alpha = C64::new(0.0, -1.0) * dir;
                let beta = -2.0 * (dir * base.conj()).im;
                (0.0, alpha, beta)
            }
        }
    }
}

pub fn apply_plane(m: &MoebiusMap, p: &GeodesicPlane) -> GeodesicPlane {
    apply_plane_within(m, p, 1e-12)
}

/// As `apply_plane`, treating the plane as passing through the pole of `m` when its
/// boundary misses the pole by at most `eps` (relative).
pub fn apply_plane_within(m: &MoebiusMap, p: &GeodesicPlane, eps: f64) -> GeodesicPlane {
    let pole = m.pole();
    let through_pole = match pole {
        BoundaryPoint::Infinity => matches!(p, GeodesicPlane::Vertical { .. }),
        BoundaryPoint::Finite(w) => {
            let scale = match p {
                GeodesicPlane::Hemisphere { radius, .. } => *radius,
                GeodesicPlane::Vertical { .. } => 1.0 + w.norm(),
            };
            p.boundary_defect(w) <= eps * scale
        }
    };
    if through_pole {
        // image is a line; map two other boundary points
        let (u, v) = match (*p, pole) {
            (GeodesicPlane::Vertical { base, dir }, BoundaryPoint::Infinity) => (base, base + dir),
            (GeodesicPlane::Vertical { dir, .. }, BoundaryPoint::Finite(w)) => (w + dir, w - dir),
            (GeodesicPlane::Hemisphere { center, .. }, BoundaryPoint::Finite(w)) => {
                let r = w - center;
                let rot = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
                (center + r * rot, center + r * rot * rot)
            }
            (GeodesicPlane::Hemisphere { .. }, BoundaryPoint::Infinity) => unreachable!(),
        };
        let fu = apply_boundary(m, u.into()).finite().expect("finite image");
        let fv = apply_boundary(m, v.into()).finite().expect("finite image");
        let dir = (fv - fu) / (fv - fu).norm();
        return GeodesicPlane::Vertical { base: fu, dir }.canonical();
    }
    let (a, b, c) = p.hermitian();
    // H' = N^* H N with N = m^{-1}
    let n = m.inverse();
    let h = [[C64::new(a, 0.0), b], [b.conj(), C64::new(c, 0.0)]];
    let nm = [[n.a, n.b], [n.c, n.d]];
    let mut hn = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            hn[i][j] = h[i][0] * nm[0][j] + h[i][1] * nm[1][j];
        }
    }
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = nm[0][i].conj() * hn[0][j] + nm[1][i].conj() * hn[1][j];
        }
    }
    let a2 = out[0][0].re;
    let b2 = out[0][1];
    let c2 = out[1][1].re;
    let center = -b2 / a2;
    let r2 = center.norm_sqr() - c2 / a2;
    GeodesicPlane::Hemisphere { center, radius: r2.max(0.0).sqrt() }
}

/// How a geodesic plane meets a horoball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "lowercase")]
pub enum PlaneBallRelation {
    Disjoint,
    Tangent { point: SpacePoint },
    /// `top` is the highest point of the intersection; height is infinite for a vertical plane and the ball at infinity.
    Crossing { top: SpacePoint },
}

impl PlaneBallRelation {
    /// True when the plane reaches above the equator of a finite ball (height above its radius).
    pub fn above_equator(&self, b: &Horoball) -> bool {
        match (self, b.center) {
            (PlaneBallRelation::Crossing { top }, BoundaryPoint::Finite(_)) => top.h > b.size / 2.0,
            (PlaneBallRelation::Crossing { .. }, BoundaryPoint::Infinity) => true,
            _ => false,
        }
    }
}

pub fn plane_ball_relation(p: &GeodesicPlane, b: &Horoball, tol: &Tolerance) -> PlaneBallRelation {
    let tt = tol.tangency;
    match (*p, b.center) {
        (GeodesicPlane::Vertical { base, dir }, BoundaryPoint::Infinity) => {
            let _ = dir;
            PlaneBallRelation::Crossing { top: SpacePoint::new(base, f64::INFINITY) }
        }
        (GeodesicPlane::Hemisphere { center, radius }, BoundaryPoint::Infinity) => {
            let h = b.size;
            if (radius - h).abs() <= tt * h {
                PlaneBallRelation::Tangent { point: SpacePoint::new(center, h) }
            } else if radius > h {
                PlaneBallRelation::Crossing { top: SpacePoint::new(center, radius) }
            } else {
                PlaneBallRelation::Disjoint
            }
        }
        (GeodesicPlane::Vertical { base, dir }, BoundaryPoint::Finite(c)) => {
            let r = b.size / 2.0;
            let along = (dir.conj() * (c - base)).re;
            let foot = base + dir * along;
            let delta = (c - foot).norm();
            if (delta - r).abs() <= tt * r {
                PlaneBallRelation::Tangent { point: SpacePoint::new(foot, r) }
            } else if delta < r {
                let h = r + (r * r - delta * delta).sqrt();
                PlaneBallRelation::Crossing { top: SpacePoint::new(foot, h) }
            } else {
                PlaneBallRelation::Disjoint
            }
        }
        (GeodesicPlane::Hemisphere { center, radius }, BoundaryPoint::Finite(c)) => {
            let r = b.size / 2.0;
            let dz = c - center;
            let dist = (dz.norm_sqr() + r * r).sqrt();
            let scale = radius.max(r);
            let ext = dist - (radius + r);
            let int = dist - (radius - r).abs();
            let unit = |t: f64| SpacePoint::new(center + dz * (t / dist), r * t / dist);
            if ext.abs() <= tt * scale {
                PlaneBallRelation::Tangent { point: unit(radius) }
            } else if int.abs() <= tt * scale {
                let t = if radius >= r { radius } else { -radius };
                PlaneBallRelation::Tangent { point: unit(t) }
            } else if ext > 0.0 || int < 0.0 {
                PlaneBallRelation::Disjoint
            } else {
                // circle of intersection of the two spheres; report its highest point
                let a = (dist * dist + radius * radius - r * r) / (2.0 * dist);
                let rho = (radius * radius - a * a).max(0.0).sqrt();
                let ez = r / dist;
                let ehor = dz / dist;
                let cz = a * ez;
                let chor = center + ehor * a;
                let s = (1.0 - ez * ez).max(0.0).sqrt();
                if s == 0.0 {
                    return PlaneBallRelation::Crossing { top: SpacePoint::new(chor, cz) };
                }
                // w = (zhat - ez e)/s; horizontal part -ez*ehor/s, vertical part s
                let top = SpacePoint::new(chor - ehor * (rho * ez / s), cz + rho * s);
                PlaneBallRelation::Crossing { top }
            }
        }
    }
}

/// How two geodesic planes meet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "lowercase")]
pub enum PlanePlaneRelation {
    Equal,
    Disjoint,
    Tangent { point: BoundaryPoint },
    Crossing { angle: f64 },
}

/// Classifies two planes from their boundary circles via the inversive distance.
pub fn plane_plane_relation(p: &GeodesicPlane, q: &GeodesicPlane, tol: &Tolerance) -> PlanePlaneRelation {
    use GeodesicPlane::*;
    let eq_tol = tol.geometric * 100.0;
    match (*p, *q) {
        (Vertical { base: b1, dir: u1 }, Vertical { base: b2, dir: u2 }) => {
            let sin = (u1.conj() * u2).im;
            let cos = (u1.conj() * u2).re;
            if sin.abs() <= eq_tol {
                let gap = (u1.conj() * (b2 - b1)).im.abs();
                if gap <= eq_tol * (1.0 + b1.norm()) {
                    PlanePlaneRelation::Equal
                } else {
                    PlanePlaneRelation::Tangent { point: BoundaryPoint::Infinity }
                }
            } else {
                PlanePlaneRelation::Crossing { angle: sin.abs().atan2(cos.abs()) }
            }
        }
        (Vertical { base, dir }, Hemisphere { center, radius })
        | (Hemisphere { center, radius }, Vertical { base, dir }) => {
            let signed = (dir.conj() * (center - base)).im;
            let i = signed.abs() / radius;
            let foot = center - dir * C64::new(0.0, signed);
            if (i - 1.0).abs() <= tol.tangency {
                PlanePlaneRelation::Tangent { point: BoundaryPoint::Finite(foot) }
            } else if i > 1.0 {
                PlanePlaneRelation::Disjoint
            } else {
                PlanePlaneRelation::Crossing { angle: i.acos() }
            }
        }
        (Hemisphere { center: s1, radius: r1 }, Hemisphere { center: s2, radius: r2 }) => {
            let scale = r1.max(r2);
            if (s1 - s2).norm() <= eq_tol * scale && (r1 - r2).abs() <= eq_tol * scale {
                return PlanePlaneRelation::Equal;
            }
            let i = ((s1 - s2).norm_sqr() - r1 * r1 - r2 * r2) / (2.0 * r1 * r2);
            if (i.abs() - 1.0).abs() <= tol.tangency {
                // tangency point lies on the line of centers
                let dist = (s2 - s1).norm();
                let dir = if dist > 0.0 { (s2 - s1) / dist } else { ONE };
                let point = if i > 0.0 || r1 >= r2 { s1 + dir * r1 } else { s1 - dir * r1 };
                PlanePlaneRelation::Tangent { point: BoundaryPoint::Finite(point) }
            } else if i.abs() > 1.0 {
                PlanePlaneRelation::Disjoint
            } else {
                PlanePlaneRelation::Crossing { angle: i.acos() }
            }
        }
    }
}
