//! Tries vertical seed planes through horoball centers and prints their classification.
use cuspkit::cusps::balance_cusps;
use cuspkit::hmodel::{GeodesicPlane, Tolerance, C64};
use cuspkit::horoballs::{enumerate, EnumOptions};
use cuspkit::surfaces::*;
use cuspkit::Manifold;
use std::time::Instant;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or("../../data/p333.tri".into());
    let cusp: usize = args.next().map_or(Ok(0), |s| s.parse())?;
    let m = Manifold::load(path.as_ref(), Tolerance::default())?;
    let opts = EnumOptions::default();
    let r = balance_cusps(&m, None, &opts)?;
    let mut scales = vec![0.0; m.num_cusps()];
    for (k, &c) in r.cusps.iter().enumerate() {
        scales[c] = r.scales[k];
    }
    let d = enumerate(&m, cusp, &scales, 0.3, &opts)?;
    let t = scales[cusp];
    let shape = m.cusp_shape(cusp)?;
    let mut centers: Vec<C64> = d.balls.iter().map(|b| b.center / t).collect();
    centers.push(C64::new(0.0, 0.0));
    let group = PlaneGroup::from_manifold(&m, cusp)?;
    let orbit = OrbitOptions::default();
    let kmax: i64 = args.next().map_or(Ok(2), |s| s.parse())?;
    let slopes: Vec<(i64, i64)> = std::iter::once((1, 0)).chain((-kmax..=kmax).map(|k| (k, 1))).collect();
    for (p, q) in slopes {
        let dir = shape.vector(p, q) / t;
        let mut seen = Vec::new();
        for &z in &centers {
            let off = (dir.conj() * z).im / dir.norm();
            if seen.iter().any(|&o: &f64| (o - off).abs() < 1e-6) {
                continue;
            }
            seen.push(off);
            let seed = GeodesicPlane::vertical(z, dir)?;
            let t0 = Instant::now();
            let ls = orbit_planes(&group, &seed, &orbit, &m.tol);
            let c = classify(&ls, &m.tol);
            println!(
                "slope ({p},{q}) through {z:.6}: {:?} planes {} depth {} {:?}",
                c.as_ref().map(|c| c.name()),
                ls.planes.len(),
                ls.depth,
                t0.elapsed()
            );
            if let Ok(Classification::Embedded) | Ok(Classification::Immersed { .. }) = c {
                println!("  seed {}", serde_json::to_string(&seed)?);
                let cand = SurfaceCandidate {
                    name: None,
                    seed,
                    chart: cusp,
                    orientable: None,
                    freeness: Freeness::Unknown,
                    claimed_slope: None,
                };
                if matches!(c, Ok(Classification::Embedded)) {
                    println!("  slopes {:?}", boundary_slopes(&m, &cand, &orbit));
                }
            }
        }
    }
    Ok(())
}
