use super::ShapeVector;
use crate::hmodel::C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

const TERMS: usize = 40;

/// zeta(2n) for n = 1..TERMS.
fn zeta_even() -> &'static [f64; TERMS] {
    static Z: OnceLock<[f64; TERMS]> = OnceLock::new();
    Z.get_or_init(|| {
        let mut z = [0.0; TERMS];
        z[0] = PI * PI / 6.0;
        z[1] = PI.powi(4) / 90.0;
        for (i, slot) in z.iter_mut().enumerate().skip(2) {
            let s = 2 * (i + 1) as i32;
            let k_max = 200;
            let mut acc = 0.0;
            for k in (1..=k_max).rev() {
                acc += (k as f64).powi(-s);
            }
            // Euler-Maclaurin tail
            let k = k_max as f64;
            acc += k.powi(1 - s) / (s - 1) as f64 - 0.5 * k.powi(-s);
            *slot = acc;
        }
        z
    })
}

/// Clausen function Cl2(x) = -integral_0^x ln|2 sin(t/2)| dt.
pub fn clausen(x: f64) -> f64 {
    // reduce to [-pi, pi]
    let mut t = x.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t == 0.0 || t.abs() == PI {
        return 0.0;
    }
    let z = zeta_even();
    let r = (t / (2.0 * PI)).powi(2);
    let mut pow = r;
    let mut sum = 0.0;
    for (i, zeta) in z.iter().enumerate() {
        let n = (i + 1) as f64;
        let term = zeta / (n * (2.0 * n + 1.0)) * pow;
        sum += term;
        if term < 1e-18 {
            break;
        }
        pow *= r;
    }
    t - t * t.abs().ln() + t * sum
}

/// Lobachevsky function Λ(θ) = Cl2(2θ)/2.
pub fn lobachevsky(theta: f64) -> f64 {
    0.5 * clausen(2.0 * theta)
}

/// Signed volume of an ideal tetrahedron with shape z.
pub fn tetrahedron_volume(z: C64) -> f64 {
    let one = C64::new(1.0, 0.0);
    if z.im == 0.0 || z == one {
        return 0.0;
    }
    let z1 = one / (one - z);
    let z2 = one - one / z;
    lobachevsky(z.arg()) + lobachevsky(z1.arg()) + lobachevsky(z2.arg())
}

pub fn volume(s: &ShapeVector) -> f64 {
    s.z.iter().map(|&z| tetrahedron_volume(z)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: partial sum of the Fourier series of Λ.
    fn lobachevsky_series(theta: f64, n: usize) -> f64 {
        0.5 * (1..=n).map(|k| (2.0 * k as f64 * theta).sin() / (k as f64).powi(2)).sum::<f64>()
    }

    #[test]
    fn matches_fourier_series() {
        for &th in &[0.1, 0.4, PI / 3.0, 1.2, 2.0, 2.9, -0.7] {
            let a = lobachevsky(th);
            let b = lobachevsky_series(th, 2_000_000);
            assert!((a - b).abs() < 1e-9, "theta {th}: {a} vs {b}");
        }
    }

    #[test]
    fn regular_ideal_tetrahedron() {
        let z = C64::from_polar(1.0, PI / 3.0);
        let oracle = 3.0 * lobachevsky_series(PI / 3.0, 2_000_000);
        assert!((tetrahedron_volume(z) - oracle).abs() < 1e-9);
        assert!((tetrahedron_volume(z) - 1.0149416064096536).abs() < 1e-14);
    }

    #[test]
    fn degenerate_and_negative() {
        assert_eq!(tetrahedron_volume(C64::new(2.0, 0.0)), 0.0);
        let z = C64::new(0.3, 0.8);
        assert!((tetrahedron_volume(z.conj()) + tetrahedron_volume(z)).abs() < 1e-15);
    }
}
