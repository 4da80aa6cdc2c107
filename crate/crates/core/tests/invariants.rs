use proptest::prelude::*;
use randinfo::channels::sample_points_rho;
use randinfo::wls::{assemble, spectral_check, wce_exact};
use randinfo::{DrawRng, InfoDraw, ModelSpace, Spectrum};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weight_scaling_and_reordering(seed in any::<u64>(), n in 2usize..6, extra in 4usize..30, log_lambda in -3.0f64..3.0, rot in 0usize..64) {
        let spectrum = Spectrum::power_law(1.0, 48).unwrap();
        let model = ModelSpace::trig(spectrum.clone());
        let draw = sample_points_rho(&model, n, 2 * n + extra, &mut DrawRng::new(seed)).unwrap();
        let base = assemble(&draw, &model, n).unwrap();
        let chk = spectral_check(&base);
        prop_assume!(chk.pass);

        let lambda = 10f64.powf(log_lambda);
        let mut scaled = draw.clone();
        scaled.weights.iter_mut().for_each(|w| *w *= lambda);
        let sc = spectral_check(&assemble(&scaled, &model, n).unwrap());
        prop_assert!((sc.alpha_hat - lambda.sqrt() * chk.alpha_hat).abs() <= 1e-10 * sc.alpha_hat);
        prop_assert!((sc.beta_hat - lambda.sqrt() * chk.beta_hat).abs() <= 1e-10 * sc.beta_hat);

        let mut functionals = draw.functionals.clone();
        let mut weights = draw.weights.clone();
        let r = rot % functionals.len();
        functionals.rotate_left(r);
        weights.rotate_left(r);
        let rotated = InfoDraw { functionals, weights, ..draw.clone() };
        let pm = assemble(&rotated, &model, n).unwrap();
        let w0 = wce_exact(&base, &spectrum).value;
        let w1 = wce_exact(&pm, &spectrum).value;
        prop_assert!((w0 - w1).abs() <= 1e-12 * w0.max(1.0));
    }
}
