//! Seeded random test objects.

use crate::form::{binomial8, AltForm};
use crate::Mat8;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_form<R: Rng + ?Sized>(k: usize, rng: &mut R) -> AltForm {
    let comp = (0..binomial8(k)).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    AltForm::new(k, comp).expect("length matches")
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R) -> Mat8 {
    Mat8::from_fn(|_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R) -> Mat8 {
    let m = random_matrix(rng);
    (m + m.transpose()) * 0.5
}

pub fn random_antisymmetric<R: Rng + ?Sized>(rng: &mut R) -> Mat8 {
    let m = random_matrix(rng);
    (m - m.transpose()) * 0.5
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 8] {
    std::array::from_fn(|_| rng.sample(StandardNormal))
}

/// `exp(A)` with a Gaussian direction `A` rescaled to Frobenius norm in
/// `[max_norm/2, max_norm]`; determinant is always positive.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> Mat8 {
    let a = random_matrix(rng);
    let target = max_norm * rng.random_range(0.5..=1.0);
    let a = a * (target / a.norm());
    a.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frames_are_well_conditioned_and_reproducible() {
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let e = random_frame(&mut r1, 0.5);
            assert_eq!(e, random_frame(&mut r2, 0.5));
            assert!(e.determinant() > 0.0);
            let sv = e.singular_values();
            assert!(sv.max() / sv.min() < std::f64::consts::E);
        }
    }
}
