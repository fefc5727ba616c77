use super::{EquationRow, IdealTriangulation, RowKind};
use crate::error::{Error, Result};
use crate::hmodel::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Active rows for the current filling state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationSystem {
    pub n: usize,
    pub rows: Vec<EquationRow>,
}

impl EquationSystem {
    /// Edge rows, then per cusp: meridian and longitude completeness rows, or the filling row.
    pub fn from_triangulation(tri: &IdealTriangulation) -> EquationSystem {
        let mut rows = tri.edges.clone();
        for c in &tri.cusps {
            match c.filling {
                None => {
                    rows.push(c.meridian.clone());
                    rows.push(c.longitude.clone());
                }
                Some((p, q)) => rows.push(EquationRow::combine(p, &c.meridian, q, &c.longitude, RowKind::Filling)),
            }
        }
        EquationSystem { n: tri.n, rows }
    }

    /// Row values minus targets, with Log z_i = w_i and principal Log(1 - z_i).
    pub fn residuals_log(&self, w: &[C64]) -> Vec<C64> {
        let one = C64::new(1.0, 0.0);
        let l1: Vec<C64> = w.iter().map(|&wi| (one - wi.exp()).ln()).collect();
        self.rows
            .iter()
            .map(|r| {
                let mut s = C64::new(0.0, (r.m as f64) * PI - r.kind.target());
                for i in 0..self.n {
                    if r.a[i] != 0 {
                        s += w[i] * r.a[i] as f64;
                    }
                    if r.b[i] != 0 {
                        s += l1[i] * r.b[i] as f64;
                    }
                }
                s
            })
            .collect()
    }

    pub fn residuals(&self, z: &[C64]) -> Vec<C64> {
        let w: Vec<C64> = z.iter().map(|z| z.ln()).collect();
        self.residuals_log(&w)
    }

    pub fn max_residual(&self, z: &[C64]) -> f64 {
        self.residuals(z).iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    fn jacobian_log(&self, w: &[C64]) -> DMatrix<C64> {
        let one = C64::new(1.0, 0.0);
        // d/dw Log(1 - e^w) = -z/(1 - z)
        let dl1: Vec<C64> = w.iter().map(|&wi| {
            let z = wi.exp();
            -z / (one - z)
        }).collect();
        DMatrix::from_fn(self.rows.len(), self.n, |r, i| {
            let row = &self.rows[r];
            C64::new(row.a[i] as f64, 0.0) + dl1[i] * row.b[i] as f64
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeVector {
    pub z: Vec<C64>,
    pub residual: f64,
    pub geometric: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 100, restarts: 20, seed: 0x5eed }
    }
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Gauss-Newton in logarithmic shape parameters with halving line search.
fn newton(sys: &EquationSystem, w0: Vec<C64>, opts: &SolveOptions) -> (Vec<C64>, f64, usize) {
    let mut w = w0;
    let mut f = sys.residuals_log(&w);
    let mut res = max_norm(&f);
    let mut iters = 0;
    while res >= opts.tol && iters < opts.max_iter {
        let j = sys.jacobian_log(&w);
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|x| -x));
        let svd = j.svd(true, true);
        let delta = match svd.solve(&rhs, 1e-13) {
            Ok(d) => d,
            Err(_) => break,
        };
        iters += 1;
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-6 {
            let trial: Vec<C64> = w.iter().zip(delta.iter()).map(|(a, d)| a + d * step).collect();
            if trial.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                step *= 0.5;
                continue;
            }
            let ft = sys.residuals_log(&trial);
            let rt = max_norm(&ft);
            if rt.is_finite() && (rt < res || step < 1.0 / 64.0 && rt < 10.0 * res) {
                w = trial;
                f = ft;
                improved = rt < res;
                res = rt;
                break;
            }
            step *= 0.5;
        }
        if !improved && step <= 1e-6 {
            break;
        }
    }
    (w, res, iters)
}

/// Solves with the default initial guess e^{i pi/3} and seeded random restarts.
pub fn solve_shapes(tri: &IdealTriangulation) -> Result<ShapeVector> {
    let z0 = vec![C64::from_polar(1.0, PI / 3.0); tri.n];
    solve_shapes_from(tri, &z0, &SolveOptions::default())
}

/// Solves starting from `init`, falling back to random restarts in the upper half disk of radius 3.
pub fn solve_shapes_from(tri: &IdealTriangulation, init: &[C64], opts: &SolveOptions) -> Result<ShapeVector> {
    if init.len() != tri.n {
        return Err(Error::Invalid(format!("initial guess has {} shapes, expected {}", init.len(), tri.n)));
    }
    let sys = EquationSystem::from_triangulation(tri);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_residual = f64::INFINITY;
    let mut fallback: Option<ShapeVector> = None;
    let mut total_iters = 0;
    for attempt in 0..=opts.restarts {
        let w0: Vec<C64> = if attempt == 0 {
            init.iter().map(|z| z.ln()).collect()
        } else {
            (0..tri.n)
                .map(|_| {
                    let r = 3.0 * rng.gen::<f64>().sqrt().max(0.05);
                    let t = PI * rng.gen_range(0.02..0.98);
                    C64::from_polar(r, t).ln()
                })
                .collect()
        };
        let (w, res, iters) = newton(&sys, w0, opts);
        total_iters += iters;
        best_residual = best_residual.min(res);
        // the stored m values assume principal arguments
        let branch_ok = w.iter().all(|x| x.im > -PI && x.im <= PI);
        if res < opts.tol && branch_ok {
            let z: Vec<C64> = w.iter().map(|x| x.exp()).collect();
            let geometric = z.iter().all(|z| z.im > 0.0);
            let sv = ShapeVector { z, residual: res, geometric, iterations: if attempt == 0 { iters } else { total_iters } };
            if geometric {
                return Ok(sv);
            }
            if fallback.is_none() {
                fallback = Some(sv);
            }
        }
    }
    fallback.ok_or(Error::NoConvergence { best_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulate::parse_triangulation;

    const FIG8: &str = "manifold fig8\ntetrahedra 2\nedge 2 -1 2 -1 0\nedge -2 1 -2 1 4\n\
        cusp 0 meridian 1 0 1 -1 -1\ncusp 0 longitude 0 0 4 -2 -2\n";

    #[test]
    fn figure_eight_shapes() {
        let t = parse_triangulation(FIG8).unwrap();
        let s = solve_shapes(&t).unwrap();
        // unique upper half-plane root of z^2 - z + 1
        let oracle = C64::new(0.5, 3f64.sqrt() / 2.0);
        for z in &s.z {
            assert!((z - oracle).norm() < 1e-12);
            assert!((z * z - z + 1.0).norm() < 1e-12);
        }
        assert!(s.geometric);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn warm_start_is_fixed_point() {
        let t = parse_triangulation(FIG8).unwrap();
        let s = solve_shapes(&t).unwrap();
        let again = solve_shapes_from(&t, &s.z, &SolveOptions::default()).unwrap();
        assert!(again.iterations <= 2);
        assert!((again.z[0] - s.z[0]).norm() < 1e-13);
    }

    #[test]
    fn restarts_recover_from_bad_guess() {
        let t = parse_triangulation(FIG8).unwrap();
        let bad = vec![C64::new(0.01, -2.5), C64::new(-2.0, 0.1)];
        let s = solve_shapes_from(&t, &bad, &SolveOptions::default()).unwrap();
        assert!(s.geometric);
    }
}
