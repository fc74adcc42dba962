//! Direction sets on the unit sphere.

use rand::Rng;
use rand_distr::StandardNormal;

/// `k` directions at uniform angular spacing, starting at angle 0.
pub fn uniform_circle(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            vec![th.cos(), th.sin()]
        })
        .collect()
}

/// Fibonacci lattice on the 2-sphere.
pub fn fibonacci_sphere(k: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..k)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = golden * i as f64;
            vec![r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

pub fn random_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Low-discrepancy directions where available: uniform spacing for `n = 2`,
/// Fibonacci points for `n = 3`, seeded Gaussian directions otherwise.
pub fn default_directions<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    match n {
        1 => (0..k).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => uniform_circle(k),
        3 => fibonacci_sphere(k),
        _ => (0..k).map(|_| random_direction(n, rng)).collect(),
    }
}

/// Surface measure of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    // 2 pi^{n/2} / Gamma(n/2), via the recurrence A_{n} = 2 pi / (n - 2) * A_{n-2}.
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn directions_are_unit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            for d in default_directions(n, 17, &mut rng) {
                assert!((norm(&d) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
