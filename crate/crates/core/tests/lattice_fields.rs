use approx::assert_relative_eq;
use digimc::lattice::{fourier_mode_power, free_dispersion, lattice_potential};
use digimc::{LatticeGeometry, MomentumMode};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

fn all_modes(g: &LatticeGeometry) -> Vec<MomentumMode> {
    (0..g.n_sites())
        .map(|s| {
            let labels: Vec<i64> = g.site_coords(s).iter().map(|&c| c as i64).collect();
            MomentumMode::new(g, &labels).unwrap()
        })
        .collect()
}

fn random_field(rng: &mut Pcg64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
}

#[test]
fn parseval_and_momentum_space_potential() {
    let mut rng = Pcg64::seed_from_u64(12);
    for (dims, extent) in [(2, 4), (1, 6), (2, 3), (3, 2)] {
        let g = LatticeGeometry::new(dims, extent).unwrap();
        let modes = all_modes(&g);
        for _ in 0..100 {
            let phi = random_field(&mut rng, g.n_sites());
            let m2 = rng.random_range(0.1..2.0);
            let powers: Vec<f64> = modes
                .iter()
                .map(|q| fourier_mode_power(&g, &phi, q).unwrap())
                .collect();
            let norm: f64 = phi.iter().map(|p| p * p).sum();
            assert_relative_eq!(powers.iter().sum::<f64>(), norm, max_relative = 1e-10);

            // V = sum_q (omega_q^2 / 2) |phi~_q|^2 with omega_q^2 = m^2 + 4 sum sin^2(q/2)
            let v: f64 = modes
                .iter()
                .zip(&powers)
                .map(|(q, p)| 0.5 * free_dispersion(q, m2).unwrap() * p)
                .sum();
            assert_relative_eq!(
                v,
                lattice_potential(&g, m2, &phi).unwrap(),
                max_relative = 1e-10
            );

            for (q, p) in modes.iter().zip(&powers) {
                assert_eq!(fourier_mode_power(&g, &phi, &q.negated()).unwrap(), *p);
            }
        }
    }
}

#[test]
fn translations_and_sign_flips_are_symmetries() {
    let mut rng = Pcg64::seed_from_u64(13);
    let g = LatticeGeometry::new(2, 4).unwrap();
    let modes = all_modes(&g);
    for _ in 0..20 {
        // integer-valued fields keep every sum exact
        let phi: Vec<f64> = (0..16).map(|_| rng.random_range(-5..=5) as f64).collect();
        let shift = [rng.random_range(0..4), rng.random_range(0..4)];
        let moved: Vec<f64> = (0..16)
            .map(|s| {
                let c = g.site_coords(s);
                let from = g
                    .site_index(&[(c[0] + shift[0]) % 4, (c[1] + shift[1]) % 4])
                    .unwrap();
                phi[from]
            })
            .collect();
        let flipped: Vec<f64> = phi.iter().map(|p| -p).collect();
        let v = lattice_potential(&g, 1.0, &phi).unwrap();
        assert_eq!(lattice_potential(&g, 1.0, &moved).unwrap(), v);
        assert_eq!(lattice_potential(&g, 1.0, &flipped).unwrap(), v);
        for q in &modes {
            let p = fourier_mode_power(&g, &phi, q).unwrap();
            assert_relative_eq!(
                fourier_mode_power(&g, &moved, q).unwrap(),
                p,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }
}
