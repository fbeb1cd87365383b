//! Seeded sampling helpers. All randomness in the crate flows through
//! `ChaCha8Rng` with explicit 64-bit seeds so reports are reproducible.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::Rat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a stream-specific seed so independent tasks get independent,
/// reproducible generators.
pub fn derived_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .rotate_left(31)
}

/// A random rational in `[-radius, radius]` with denominator `2^16`.
pub fn rat_in_symmetric_box(rng: &mut ChaCha8Rng, radius: &Rat) -> Rat {
    const DEN: i64 = 1 << 16;
    let k: i64 = rng.gen_range(-DEN..=DEN);
    radius * Rat::new(BigInt::from(k), BigInt::from(DEN))
}

/// A random rational point in the box `center + [-radius, radius]^n`.
pub fn rat_point_in_box(rng: &mut ChaCha8Rng, center: &[Rat], radius: &Rat) -> Vec<Rat> {
    center
        .iter()
        .map(|c| c + rat_in_symmetric_box(rng, radius))
        .collect()
}

/// A random float point in `[-1, 1]^n` scaled per coordinate.
pub fn f64_point_in_box(rng: &mut ChaCha8Rng, half_widths: &[f64]) -> Vec<f64> {
    half_widths
        .iter()
        .map(|&h| rng.gen_range(-1.0..=1.0) * h)
        .collect()
}

/// A random control vector in the closed unit ball of `R^m`.
pub fn control_in_unit_ball(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    // Sample in the cube and reject until inside the ball; fine for small m.
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2 <= 1.0 {
            return v;
        }
    }
}

/// A random unit-speed control vector on the sphere of `R^m`.
pub fn control_on_unit_sphere(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v = control_in_unit_ball(rng, m);
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2 > 1e-4 {
            let norm = norm2.sqrt();
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use num_traits::Signed;

    #[test]
    fn deterministic_given_seed() {
        let mut a = rng(7);
        let mut b = rng(7);
        let r = rat(2);
        assert_eq!(rat_in_symmetric_box(&mut a, &r), rat_in_symmetric_box(&mut b, &r));
    }

    #[test]
    fn stays_in_box() {
        let mut g = rng(1);
        let r = rat(3);
        for _ in 0..100 {
            let x = rat_in_symmetric_box(&mut g, &r);
            assert!(x.abs() <= r);
        }
    }

    #[test]
    fn controls_in_ball() {
        let mut g = rng(2);
        for _ in 0..50 {
            let u = control_in_unit_ball(&mut g, 3);
            assert!(u.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12);
        }
    }
}
