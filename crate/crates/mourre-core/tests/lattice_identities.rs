//! The conjugate-operator commutators have closed forms; these tests verify
//! the assembled band matrices reproduce them to rounding on random draws,
//! for both window kinds.

use mourre_core::band::{LatticeWindow, WindowKind};
use mourre_core::lattice::{check_a0_commutator, check_a0_identity, check_ak_first_commutator};
use mourre_core::model::ModelParams;
use mourre_core::seq::MatrixSequence;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Deterministic per-site noise in `[-1, 1]` (splitmix64 finalizer), so a
/// sequence closure needs no captured RNG state.
fn site_noise(seed: u64, n: i64, salt: u64) -> f64 {
    let mut z = seed
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ salt.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Random Hermitian-valued sequence with a mild polynomial falloff.
fn random_potential(seed: u64) -> MatrixSequence {
    MatrixSequence::new(format!("noise-{seed}"), move |n| {
        let decay = 1.0 / (1.0 + n.unsigned_abs() as f64).sqrt();
        let d1 = site_noise(seed, n, 1) * decay;
        let d2 = site_noise(seed, n, 2) * decay;
        let off = Complex64::new(site_noise(seed, n, 3), site_noise(seed, n, 4)) * decay;
        [
            [Complex64::new(d1, 0.0), off],
            [off.conj(), Complex64::new(d2, 0.0)],
        ]
    })
}

fn windows() -> [LatticeWindow; 2] {
    [
        LatticeWindow::new(WindowKind::Bilateral, 80),
        LatticeWindow::new(WindowKind::Unilateral, 160),
    ]
}

#[test]
fn order_zero_identity_holds_in_the_interior_for_gapless_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10 {
        let r = rng.random_range(0.3..2.0);
        let p = ModelParams::new(
            0.0,
            Complex64::from_polar(r, rng.random_range(0.0..TAU)),
            Complex64::from_polar(r, rng.random_range(0.0..TAU)),
        )
        .unwrap();
        for window in windows() {
            let report = check_a0_identity(&p, window, 4).expect("gapless model");
            assert!(
                report.interior_defect <= 1e-12,
                "trial {trial}, {window:?}: interior defect {:.3e}",
                report.interior_defect
            );
            assert!(report.interior_defect <= report.full_defect);
        }
    }
}

#[test]
fn order_k_potential_commutator_matches_its_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..10 {
        let p = ModelParams::new(
            rng.random_range(-2.0..2.0),
            Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(0.0..TAU)),
            Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(0.0..TAU)),
        )
        .unwrap();
        let seq = random_potential(1000 + trial);
        for k in 1..=4usize {
            for window in windows() {
                let defect = check_ak_first_commutator(&p, k, &seq, window).unwrap();
                let scale = 1.0 + p.ab_product() * window.site_count() as f64;
                assert!(
                    defect <= 1e-12 * scale,
                    "trial {trial}, k = {k}, {window:?}: defect {defect:.3e}"
                );
            }
        }
    }
}

#[test]
fn order_zero_potential_commutator_matches_its_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for trial in 0..10 {
        let r = rng.random_range(0.3..2.0);
        let p = ModelParams::new(
            0.0,
            Complex64::from_polar(r, rng.random_range(0.0..TAU)),
            Complex64::from_polar(r, rng.random_range(0.0..TAU)),
        )
        .unwrap();
        let seq = random_potential(2000 + trial);
        for window in windows() {
            let defect = check_a0_commutator(&p, &seq, window).unwrap();
            let scale = 1.0 + p.ab_product() * window.site_count() as f64;
            assert!(
                defect <= 1e-12 * scale,
                "trial {trial}, {window:?}: defect {defect:.3e}"
            );
        }
    }
}
