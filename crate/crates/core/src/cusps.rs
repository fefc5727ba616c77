//! Flat cusp tori: slope lengths, l-curves, widths and balanced cusp expansion.

use crate::error::{Error, Result};
use crate::hmodel::C64;
use crate::horoballs::{self, EnumOptions, MaxDiameters};
use crate::manifold::Manifold;
use serde::{Deserialize, Serialize};

/// Lattice of a cusp cross-section at reference height 1, together with a scale t
/// (lengths at scale t are the reference lengths times t).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspShape {
    pub cusp: usize,
    pub t_mu: C64,
    pub t_lambda: C64,
    pub scale: f64,
}

impl CuspShape {
    pub fn new(cusp: usize, t_mu: C64, t_lambda: C64, scale: f64) -> Result<CuspShape> {
        if !(scale > 0.0) {
            return Err(Error::Invalid("cusp scale must be positive".into()));
        }
        let s = CuspShape { cusp, t_mu, t_lambda, scale };
        if !(s.reference_area() > 1e-14 * (t_mu.norm() * t_lambda.norm())) {
            return Err(Error::Invalid("degenerate cusp lattice".into()));
        }
        Ok(s)
    }

    pub fn at_scale(&self, scale: f64) -> CuspShape {
        CuspShape { scale, ..*self }
    }

    pub fn reference_area(&self) -> f64 {
        (self.t_mu.conj() * self.t_lambda).im.abs()
    }

    pub fn area(&self) -> f64 {
        self.reference_area() * self.scale * self.scale
    }

    /// p mu + q lambda at reference height.
    pub fn vector(&self, p: i64, q: i64) -> C64 {
        self.t_mu * p as f64 + self.t_lambda * q as f64
    }

    /// tau = t_lambda / t_mu.
    pub fn shape(&self) -> C64 {
        self.t_lambda / self.t_mu
    }
}

/// The l-curve lambda + k mu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LCurve {
    pub k: i64,
}

impl LCurve {
    pub fn longitude() -> LCurve {
        LCurve { k: 0 }
    }

    /// Slope (p, q) = (k, 1).
    pub fn slope(&self) -> (i64, i64) {
        (self.k, 1)
    }
}

pub fn slope_length(shape: &CuspShape, p: i64, q: i64) -> Result<f64> {
    if p == 0 && q == 0 {
        return Err(Error::ZeroSlope);
    }
    Ok(shape.vector(p, q).norm() * shape.scale)
}

/// Width with respect to an arbitrary slope: area / length.
pub fn slope_width(shape: &CuspShape, p: i64, q: i64) -> Result<f64> {
    Ok(shape.area() / slope_length(shape, p, q)?)
}

pub fn width(shape: &CuspShape, curve: LCurve) -> f64 {
    let (p, q) = curve.slope();
    shape.area() / (shape.vector(p, q).norm() * shape.scale)
}

/// Shortest l-curve; ties go to smaller |k|, then to positive k.
pub fn minimal_l_curve(shape: &CuspShape) -> LCurve {
    let mu = shape.t_mu.norm();
    let window = (shape.t_lambda.norm() / mu).ceil() as i64 + 1;
    let mut best = LCurve { k: 0 };
    let mut best_len = shape.vector(0, 1).norm();
    for k in -window..=window {
        let len = shape.vector(k, 1).norm();
        let tie = (len - best_len).abs() <= 1e-12 * best_len;
        let better_tie = k.abs() < best.k.abs() || (k.abs() == best.k.abs() && k > best.k);
        if (!tie && len < best_len) || (tie && better_tie) {
            best = LCurve { k };
            best_len = len;
        }
    }
    best
}

pub fn intersection_number(c1: (i64, i64), c2: (i64, i64)) -> i64 {
    (c1.0 * c2.1 - c2.0 * c1.1).abs()
}

/// A pair of horoballs at (numerically) zero distance certifying maximality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyWitness {
    /// Chart in which the pair is seen; the other ball is the cusp's ball at infinity.
    pub chart_cusp: usize,
    pub other_cusp: usize,
    pub center: C64,
    pub diameter: f64,
    pub word: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    /// Complete cusps, in order.
    pub cusps: Vec<usize>,
    pub widths: Vec<f64>,
    pub curves: Vec<(i64, i64)>,
    pub scales: Vec<f64>,
    pub balanced: bool,
    pub witness: Option<TangencyWitness>,
    /// Iterations used by the bisection.
    pub iterations: usize,
}

impl WidthReport {
    pub fn common_width(&self) -> f64 {
        self.widths.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Expands all complete cusps, keeping the widths of the chosen l-curves equal, until the first tangency.
///
/// `curves` gives the designated slope per complete cusp; `None` means longitudes.
pub fn balance_cusps(m: &Manifold, curves: Option<&[(i64, i64)]>, opts: &EnumOptions) -> Result<WidthReport> {
    let cusps = m.complete_cusps();
    if cusps.is_empty() {
        return Err(Error::Invalid("no complete cusp".into()));
    }
    let curves: Vec<(i64, i64)> = match curves {
        Some(c) if c.len() == cusps.len() => c.to_vec(),
        Some(_) => return Err(Error::Invalid("one curve per complete cusp is required".into())),
        None => vec![(0, 1); cusps.len()],
    };
    let max = horoballs::max_diameters(m, opts)?;
    balance_with(m, &cusps, &curves, &max)
}

pub(crate) fn balance_with(m: &Manifold, cusps: &[usize], curves: &[(i64, i64)], max: &MaxDiameters) -> Result<WidthReport> {
    let shapes: Vec<CuspShape> = cusps.iter().map(|&k| m.cusp_shape(k)).collect::<Result<_>>()?;
    // t_i = w * c_i with c_i = L_i / A_i at reference scale
    let coef: Vec<f64> = shapes
        .iter()
        .zip(curves)
        .map(|(s, &(p, q))| Ok(slope_length(s, p, q)? / s.reference_area()))
        .collect::<Result<_>>()?;
    let n = cusps.len();
    let d = |a: usize, b: usize| max.get(cusps[a], cusps[b]).map(|e| e.diameter).unwrap_or(0.0);
    let feasible = |w: f64| {
        (0..n).all(|a| (0..n).all(|b| w * coef[a] * w * coef[b] * d(a, b) <= 1.0))
    };
    let mut hi = f64::INFINITY;
    for (a, &ca) in coef.iter().enumerate().take(n) {
        let daa = d(a, a);
        if daa > 0.0 {
            hi = hi.min(1.5 / (ca * daa.sqrt()));
        }
    }
    if !hi.is_finite() {
        return Err(Error::IncreaseDepth("no horoball found to bound the cusp expansion".into()));
    }
    let mut lo = 0.0;
    let mut iterations = 0;
    while iterations < 60 && hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let w = lo;
    let scales: Vec<f64> = coef.iter().map(|c| w * c).collect();
    // the active constraint
    let mut best = (0, 0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let v = scales[a] * scales[b] * d(a, b);
            if v > best.2 {
                best = (a, b, v);
            }
        }
    }
    let witness = max.get(cusps[best.0], cusps[best.1]).map(|e| TangencyWitness {
        chart_cusp: cusps[best.0],
        other_cusp: cusps[best.1],
        center: e.center * scales[best.0],
        diameter: best.2,
        word: e.word.clone(),
        distance: -(best.2.ln()),
    });
    let widths: Vec<f64> = shapes
        .iter()
        .zip(curves)
        .zip(&scales)
        .map(|((s, &(p, q)), &t)| slope_width(&s.at_scale(t), p, q))
        .collect::<Result<_>>()?;
    let balanced = witness.as_ref().is_some_and(|w| w.distance.abs() < m.tol.tangency);
    Ok(WidthReport { cusps: cusps.to_vec(), widths, curves: curves.to_vec(), scales, balanced, witness, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(mu: C64, la: C64) -> CuspShape {
        CuspShape::new(0, mu, la, 1.0).unwrap()
    }

    #[test]
    fn slope_examples() {
        let s = lattice(C64::new(1.0, 0.0), C64::new(0.0, 6.0));
        assert!((slope_length(&s, 1, 1).unwrap() - 37f64.sqrt()).abs() < 1e-14);
        let l1 = slope_length(&s, 1, 0).unwrap();
        assert!((slope_length(&s.at_scale(2.0), 1, 0).unwrap() - 2.0 * l1).abs() < 1e-14);
        assert_eq!(slope_length(&s, 0, 0), Err(Error::ZeroSlope));
    }

    #[test]
    fn width_examples() {
        let s = lattice(C64::new(1.0, 0.0), C64::new(0.0, 6.0));
        assert!((width(&s, LCurve::longitude()) - 1.0).abs() < 1e-14);
        assert!((slope_width(&s, 1, 0).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn minimal_curve_examples() {
        let one = C64::new(1.0, 0.0);
        assert_eq!(minimal_l_curve(&lattice(one, C64::new(0.3, 5.0))).k, 0);
        assert_eq!(minimal_l_curve(&lattice(one, C64::new(-3.6, 4.0))).k, 4);
        assert_eq!(minimal_l_curve(&lattice(one, C64::new(0.5, 1.0))).k, 0);
        assert_eq!(minimal_l_curve(&lattice(one, C64::new(-0.5, 1.0))).k, 0);
        assert_eq!(minimal_l_curve(&lattice(one, C64::new(1.5, 1.0))).k, -1);
        assert_eq!(minimal_l_curve(&lattice(one, C64::new(-1.5, 1.0))).k, 1);
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(intersection_number((1, 0), (0, 1)), 1);
        assert_eq!(intersection_number((3, 1), (-1, 1)), 4);
        assert_eq!(intersection_number((2, 5), (2, 5)), 0);
    }
}
