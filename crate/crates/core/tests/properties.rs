//! Invariants and analytic oracles checked on randomized inputs.

mod common;

use common::*;
use proptest::prelude::*;
use twophoton::measure::{self, image_metrics};
use twophoton::optics::{compose, g_kernel, kernel_of, unitarity_defect, ElementSpec};
use twophoton::sources::{self, hermitian_defect, reduced_coherence, schmidt_spectrum};
use twophoton::{Arm, BiphotonMixture, Complex64, Grid, Profile, SinglePhotonPure};

const LAMBDA: f64 = 5e-7;

fn free_space(d: f64, g: &Grid) -> twophoton::Kernel {
    kernel_of(&ElementSpec::FreeSpace { distance: d, wavelength: LAMBDA }, g, g).unwrap()
}

// Intensity rms width; for a Gaussian beam of waist w it equals w / 2.
fn rms_width(g: &Grid, field: &[Complex64]) -> f64 {
    let i: Vec<f64> = field.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = i.iter().sum();
    let x = g.points();
    let mean: f64 = x.iter().zip(&i).map(|(x, v)| x * v).sum::<f64>() / total;
    (x.iter().zip(&i).map(|(x, v)| (x - mean).powi(2) * v).sum::<f64>() / total).sqrt()
}

#[test]
fn gaussian_beam_spreads_like_the_paraxial_oracle() {
    let g = Grid::new(256, 2e-6, 0.0).unwrap();
    let w0 = 2e-5;
    let zr = std::f64::consts::PI * w0 * w0 / LAMBDA;
    let beam = Profile::Gaussian { waist: w0, center: 0.0 }.sample(&g).unwrap();
    for d in [2e-3, 5e-3, 1e-2] {
        let out = free_space(d, &g).apply(&beam).unwrap();
        let expected = w0 * (1.0 + (d / zr).powi(2)).sqrt();
        let got = 2.0 * rms_width(&g, &out);
        assert!((got - expected).abs() / expected < 0.02, "d = {d}: {got} vs {expected}");
    }
}

#[test]
fn free_space_is_a_semigroup_on_a_gaussian_beam() {
    let g = Grid::new(256, 2e-6, 0.0).unwrap();
    let beam = Profile::Gaussian { waist: 2e-5, center: 1e-5 }.sample(&g).unwrap();
    let (d1, d2) = (3e-3, 4e-3);
    let two = compose(&free_space(d2, &g), &free_space(d1, &g)).unwrap().apply(&beam).unwrap();
    let one = free_space(d1 + d2, &g).apply(&beam).unwrap();
    let peak = one.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // Interior half of the window, away from truncation at the edges.
    let err = (64..192).map(|i| (two[i] - one[i]).norm()).fold(0.0, f64::max) / peak;
    assert!(err < 0.01, "semigroup error {err}");
}

#[test]
fn fourier_system_is_unitary_at_the_matched_focal_length() {
    for n in [16usize, 64, 128] {
        let dx = 1e-5;
        let g = Grid::new(n, dx, 0.0).unwrap();
        let f = dx * dx * n as f64 / LAMBDA;
        let k = kernel_of(&ElementSpec::FourierSystem { focal_length: f, wavelength: LAMBDA }, &g, &g).unwrap();
        assert!(unitarity_defect(&k).unwrap() < 1e-10);
    }
}

#[test]
fn uniform_entangled_state_has_full_schmidt_number() {
    let g = grid(32);
    let phi = SinglePhotonPure::from_amplitude(g, vec![Complex64::new(1.0, 0.0); 32]).unwrap();
    let sp = schmidt_spectrum(&sources::entangled_delta(&phi));
    assert!((sp.participation - 32.0).abs() < 1e-9);
    assert!((sp.entropy - 32f64.ln()).abs() < 1e-9);
}

// Partial entanglement: weight w of the entangled pair, 1 - w of the
// correlated mixture, observed in a small ghost-diffraction layout.
fn blend_visibility(w: f64) -> f64 {
    let n = 64;
    let dx = 1e-5;
    let g = Grid::new(n, dx, 0.0).unwrap();
    let f = dx * dx * n as f64 / LAMBDA;
    let fourier = kernel_of(&ElementSpec::FourierSystem { focal_length: f, wavelength: LAMBDA }, &g, &g).unwrap();
    let slits = Profile::DoubleSlit { width: 2e-5, separation: 8e-5, center: 0.0 }.sample(&g).unwrap();
    let mask = kernel_of(&ElementSpec::Mask(slits), &g, &g).unwrap();
    let pin = Profile::Pinhole { at: 5e-6 }.sample(&g).unwrap();
    let pinhole = kernel_of(&ElementSpec::Mask(pin), &g, &g).unwrap();
    let k1 = compose(&pinhole, &compose(&fourier, &mask).unwrap()).unwrap();
    let amp = Profile::Gaussian { waist: 2e-4, center: 0.0 }.sample(&g).unwrap();
    let phi = SinglePhotonPure::from_amplitude(g, amp).unwrap();
    let gamma = phi.intensity();
    let ent = BiphotonMixture::from(sources::entangled_delta(&phi));
    let cor = sources::localized_pair_mixture(&sources::correlated_from_intensity(&gamma, &g).unwrap());
    let m = BiphotonMixture::blend(w, &ent, &cor).unwrap();
    let p = measure::mixture_marginal(&m, &k1, &fourier, Arm::Two).unwrap();
    image_metrics(&p, 24..40).unwrap().visibility
}

#[test]
fn blend_visibility_grows_with_entangled_weight() {
    let v: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|w| blend_visibility(*w)).collect();
    assert!(v[0] < 1e-9, "{v:?}");
    assert!(v.windows(2).all(|p| p[1] > p[0]), "{v:?}");
    assert!(v[4] > 0.9, "{v:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nearest_index_inverts_point(n in 1usize..200, dx in 1e-7f64..1e-2, c in -1e-2f64..1e-2, frac in 0.0f64..1.0) {
        let g = Grid::new(n, dx, c).unwrap();
        let i = ((n - 1) as f64 * frac) as usize;
        prop_assert_eq!(g.nearest_index(g.point(i)).unwrap(), i);
    }

    #[test]
    fn bucket_kernel_is_hermitian(seed in any::<u64>(), n in 2usize..24) {
        let mut r = rng(seed);
        let g = grid(n);
        let gk = g_kernel(&random_kernel(&mut r, g));
        let scale = gk.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(hermitian_defect(&gk) <= 1e-12 * scale);
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>(), n in 2usize..20) {
        let mut r = rng(seed);
        let g = grid(n);
        let (a, b, c) = (random_kernel(&mut r, g), random_kernel(&mut r, g), random_kernel(&mut r, g));
        let left = compose(&compose(&c, &b).unwrap(), &a).unwrap();
        let right = compose(&c, &compose(&b, &a).unwrap()).unwrap();
        let scale = left.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = (left.matrix() - right.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12 * scale);
    }

    #[test]
    fn factorizable_gate_changes_nothing(seed in any::<u64>(), n in 2usize..24) {
        let mut r = rng(seed);
        let g = grid(n);
        let s = sources::factorizable(&random_state(&mut r, g), &random_state(&mut r, g));
        let (k1, k2) = (random_kernel(&mut r, g), random_kernel(&mut r, g));
        for arm in [Arm::One, Arm::Two] {
            let k = if arm == Arm::One { &k1 } else { &k2 };
            let p = measure::biphoton_singles(&s, k, arm).unwrap();
            let q = measure::biphoton_marginal(&s, &k1, &k2, arm).unwrap();
            prop_assert!(max_rel(q.values(), p.values()) <= 1e-10);
        }
    }

    #[test]
    fn entangled_closed_form_matches_joint(seed in any::<u64>(), n in 2usize..24) {
        let mut r = rng(seed);
        let g = grid(n);
        let phi = random_state(&mut r, g);
        let (k1, k2) = (random_kernel(&mut r, g), random_kernel(&mut r, g));
        let closed = measure::entangled_marginal_closed(&phi, &k2, &k1).unwrap();
        let brute = measure::biphoton_marginal(&sources::entangled_delta(&phi), &k1, &k2, Arm::Two).unwrap();
        prop_assert!(max_rel(closed.values(), brute.values()) <= 1e-9);
    }

    #[test]
    fn densities_are_normalized(seed in any::<u64>(), n in 2usize..24) {
        let mut r = rng(seed);
        let g = grid(n);
        let s = sources::entangled_delta(&random_state(&mut r, g));
        let (k1, k2) = (random_kernel(&mut r, g), random_kernel(&mut r, g));
        let j = measure::biphoton_joint(&s, &k1, &k2).unwrap();
        prop_assert!((j.integral() - 1.0).abs() < 1e-12);
        let p = measure::biphoton_singles(&s, &k2, Arm::Two).unwrap();
        prop_assert!((p.integral() - 1.0).abs() < 1e-12);
        prop_assert!(p.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn reduced_coherence_has_unit_trace(seed in any::<u64>(), n in 2usize..24) {
        let mut r = rng(seed);
        let g = grid(n);
        let s = sources::factorizable(&random_state(&mut r, g), &random_state(&mut r, g));
        for arm in [Arm::One, Arm::Two] {
            let c = reduced_coherence(&s, arm);
            let tr: f64 = c.coherence().diagonal().iter().map(|z| z.re).sum::<f64>() * g.dx();
            prop_assert!((tr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spdc_schmidt_number_falls_as_phase_matching_widens(w in 4.0f64..10.0, ratio in 1.2f64..2.0) {
        let g = Grid::new(96, 1.0, 0.0).unwrap();
        let pump = Profile::Gaussian { waist: w, center: 0.0 }.sample(&g).unwrap();
        let k = |b: f64| {
            let s = sources::spdc_amplitude(&sources::SpdcParams { pump: pump.clone(), pm_width: b }, &g).unwrap();
            schmidt_spectrum(&s).participation
        };
        let b = 1.5;
        prop_assert!(k(b * ratio) < k(b));
    }
}
