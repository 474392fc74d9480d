use std::time::Instant;
use two_centers::coords::{CartesianState, ChargeConfig};
use two_centers::dynamics::{cartesian_state_on_level, integrate};
use two_centers::separation::{hamiltonian, EnergyMomentum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    // Criterion 7 scale probe: 100 runs x 4 presets, s_max 100, tol 1e-10.
    let presets = [(1.0, 1.0), (-1.0, 1.0), (1.0, 3.0), (-1.0, 0.5)];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t0 = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    let mut total_samples = 0usize;
    for (z1, z2) in presets {
        let c = ChargeConfig::new(z1, z2).unwrap();
        for _ in 0..100 {
            let s0 = loop {
                let s = CartesianState::new(
                    rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0),
                    rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5));
                let (r1, r2) = s.focal_distances();
                if r1 < 0.3 || r2 < 0.3 { continue; }
                let e = hamiltonian(&s, &c).unwrap();
                if (0.2..=5.0).contains(&e) { break s; }
            };
            let tr = integrate(&s0, &c, 100.0, 1e-10).unwrap();
            let (de, dk) = tr.max_drift();
            worst.0 = worst.0.max(de);
            worst.1 = worst.1.max(dk);
            total_samples += tr.samples.len();
        }
    }
    println!("400 runs in {:?}; worst E drift {:.3e}, worst K drift {:.3e}, avg samples {}",
        t0.elapsed(), worst.0, worst.1, total_samples / 400);

    // Criterion 6 probe: bounded orbit s_max = 1000.
    let c = ChargeConfig::new(-1.0, 0.5).unwrap();
    let em = EnergyMomentum::new(0.1, 0.5);
    let state = cartesian_state_on_level(&em, &c, 1.15, -0.6).unwrap();
    let t1 = Instant::now();
    let tr = integrate(&state, &c, 1000.0, 1e-10).unwrap();
    let xmax = tr.samples.iter().map(|p| p.separated.x).fold(0.0f64, f64::max);
    let x3 = 2.5 - 1.25f64.sqrt();
    println!("bounded orbit: {:?}, {} samples, x_max - x3 = {:.3e}, term {:?}",
        t1.elapsed(), tr.samples.len(), xmax - x3, tr.termination);
    let (de, dk) = tr.max_drift();
    println!("bounded drift E {:.3e} K {:.3e}", de, dk);
}
