//! The least-squares engine against independent dense computations.

use nalgebra::DMatrix;
use rand::Rng;
use randinfo::channels::{sample_fourier, sample_gaussian, sample_points_rho};
use randinfo::experiments::config::{DensityChoice, Oversample, TrialConfig};
use randinfo::experiments::run_concentration;
use randinfo::wls::{assemble, concentration_stat, local_error, solve, spectral_check, sup_error, wce_bound, wce_exact};
use randinfo::{Channel, CoefVector, DrawRng, InfoDraw, InfoMatrices, ModelSpace, Spectrum, SpectrumKind};

fn draw_for(channel: Channel, model: &ModelSpace, n: usize, big_n: usize, rng: &mut DrawRng) -> InfoDraw {
    match channel {
        Channel::Fourier => sample_fourier(&model.spectrum, n, big_n, rng).unwrap(),
        Channel::Point => sample_points_rho(model, n, big_n, rng).unwrap(),
        Channel::Gauss => sample_gaussian(model, n, big_n, rng, true).unwrap(),
    }
}

fn setup(channel: Channel, m: usize, n: usize, big_n: usize, seed: u64) -> (ModelSpace, InfoDraw, InfoMatrices) {
    let spectrum = Spectrum::power_law(1.0, m).unwrap();
    let model = ModelSpace::new(spectrum, channel.basis());
    let mut rng = DrawRng::new(seed);
    let draw = draw_for(channel, &model, n, big_n, &mut rng);
    let mats = assemble(&draw, &model, n).unwrap();
    (model, draw, mats)
}

/// Largest singular value of `[-G^+ T_raw D; D]` by a dense SVD.
fn block_svd_wce(mats: &InfoMatrices, spectrum: &Spectrum) -> f64 {
    let (_, n, m) = mats.dims();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m - n, ((n + 1)..=m).map(|k| spectrum.sigma_or_zero(k))));
    let pinv = mats.g().clone().pseudo_inverse(1e-12).unwrap();
    let head = -(pinv * mats.t_raw() * &d);
    let mut block = DMatrix::zeros(m, m - n);
    block.view_mut((0, 0), (n, m - n)).copy_from(&head);
    block.view_mut((n, 0), (m - n, m - n)).copy_from(&d);
    block.singular_values().max()
}

/// Random `c` with `||c||_H = 1`.
fn unit_h(spectrum: &Spectrum, rng: &mut DrawRng) -> CoefVector {
    let m = spectrum.dim();
    let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    CoefVector(u.iter().enumerate().map(|(k, x)| spectrum.sigma_or_zero(k + 1) * x / norm).collect())
}

fn error_of(model: &ModelSpace, draw: &InfoDraw, mats: &InfoMatrices, c: &CoefVector) -> f64 {
    local_error(mats, c, &draw.measure(model, c).unwrap()).unwrap()
}

#[test]
fn wce_matches_dense_block_svd() {
    for (i, channel) in [Channel::Fourier, Channel::Point, Channel::Gauss].into_iter().enumerate() {
        for seed in 0..4 {
            let (model, _, mats) = setup(channel, 48, 6, 40, 100 * i as u64 + seed);
            if !spectral_check(&mats).pass {
                continue;
            }
            let fast = wce_exact(&mats, &model.spectrum).value;
            let dense = block_svd_wce(&mats, &model.spectrum);
            assert!((fast - dense).abs() <= 1e-9 * dense, "{channel:?} seed {seed}: {fast} vs {dense}");
        }
    }
}

#[test]
fn random_unit_vectors_bound_wce_from_below() {
    for channel in [Channel::Fourier, Channel::Point, Channel::Gauss] {
        let (model, draw, mats) = setup(channel, 64, 8, 60, 7);
        assert!(spectral_check(&mats).pass);
        let wce = wce_exact(&mats, &model.spectrum).value;
        let mut rng = DrawRng::new(99);
        let mut best: f64 = 0.0;
        for _ in 0..200 {
            let c = unit_h(&model.spectrum, &mut rng);
            let e = error_of(&model, &draw, &mats, &c);
            assert!(e <= wce * (1.0 + 1e-10), "{channel:?}: {e} > {wce}");
            best = best.max(e);
        }
        assert!(best > 0.0);

        // Power iteration on E^T E where column k of E is the error of
        // sigma_k e_k, built only from solve().
        let m = model.dim();
        let cols: Vec<Vec<f64>> = (1..=m)
            .map(|k| {
                let mut c = vec![0.0; m];
                c[k - 1] = model.spectrum.sigma_or_zero(k);
                let c = CoefVector(c);
                let rec = solve(&mats, &draw.measure(&model, &c).unwrap()).unwrap();
                c.0.iter().zip(&rec.0).map(|(a, b)| a - b).collect()
            })
            .collect();
        let e = DMatrix::from_fn(m, m, |r, k| cols[k][r]);
        let mut v = nalgebra::DVector::from_iterator(m, (0..m).map(|_| rng.random_range(-1.0..1.0)));
        for _ in 0..300 {
            v = (e.transpose() * (&e * &v)).normalize();
        }
        let est = (&e * &v).norm();
        assert!(est <= wce * (1.0 + 1e-9) && est >= wce / 1.2, "{channel:?}: power {est}, wce {wce}");
        assert!(best.max(est) >= wce / 1.2);
    }
}

#[test]
fn exact_on_the_head_space_for_every_channel() {
    for channel in [Channel::Fourier, Channel::Point, Channel::Gauss] {
        for seed in 0..5 {
            let (model, draw, mats) = setup(channel, 40, 5, 30, seed);
            if !spectral_check(&mats).pass {
                continue;
            }
            let mut rng = DrawRng::new(seed + 1000);
            let mut c = vec![0.0; 40];
            c[..5].iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
            let c = CoefVector(c);
            let err = error_of(&model, &draw, &mats, &c);
            assert!(err <= 1e-9 * c.l2_norm(), "{channel:?}: {err}");
        }
    }
}

#[test]
fn local_inequality_on_random_functions() {
    for channel in [Channel::Fourier, Channel::Point, Channel::Gauss] {
        let (model, draw, mats) = setup(channel, 64, 8, 80, 21);
        let check = spectral_check(&mats);
        assert!(check.pass);
        let bound = wce_bound(&check, &model.spectrum, 8);
        let mut rng = DrawRng::new(5);
        for _ in 0..100 {
            let c = unit_h(&model.spectrum, &mut rng);
            let tail = CoefVector(c.0.iter().enumerate().map(|(k, x)| if k < 8 { 0.0 } else { *x }).collect());
            let tail_h = model.norms(&tail).unwrap().1;
            let e = error_of(&model, &draw, &mats, &c);
            assert!(e <= bound * tail_h + 1e-9, "{channel:?}: {e} > {}", bound * tail_h);
        }
        assert!(wce_exact(&mats, &model.spectrum).value <= bound + 1e-9);
    }
}

#[test]
fn sup_error_dominates_l2_and_grows_under_refinement() {
    let spectrum = Spectrum::power_law(1.5, 64).unwrap();
    let model = ModelSpace::trig(spectrum.clone());
    let draw = sample_points_rho(&model, 8, 60, &mut DrawRng::new(4)).unwrap();
    let mats = assemble(&draw, &model, 8).unwrap();
    let c = CoefVector((1..=64).map(|k| spectrum.sigma_or_zero(k) * (k as f64).cos()).collect());
    let y = draw.measure(&model, &c).unwrap();
    let l2 = local_error(&mats, &c, &y).unwrap();
    let mut prev = 0.0;
    for g in [128, 256, 512, 1024, 2048] {
        let s = sup_error(&model, &mats, &c, &y, g).unwrap();
        assert!(s >= prev - 1e-12, "grid {g}: {s} < {prev}");
        prev = s;
    }
    assert!(prev >= l2, "sup {prev} < L2 {l2}");
}

#[test]
fn plain_gaussian_head_is_well_conditioned() {
    let n = 16;
    let model = ModelSpace::coordinate(Spectrum::power_law(1.0, 64).unwrap());
    let mut good = 0;
    for t in 0..100 {
        let draw = sample_gaussian(&model, n, 2 * n, &mut DrawRng::new(t), false).unwrap();
        let mats = assemble(&draw, &model, n).unwrap();
        let alpha = spectral_check(&mats).alpha_hat / ((2 * n) as f64).sqrt();
        good += (alpha >= 0.2) as usize;
    }
    assert!(good >= 95, "{good} of 100");
}

#[test]
fn fourier_concentration_with_many_draws() {
    let spectrum = Spectrum::geometric(0.5, 40).unwrap();
    let model = ModelSpace::coordinate(spectrum.clone());
    let draw = sample_fourier(&spectrum, 4, 10_000, &mut DrawRng::new(8)).unwrap();
    let stat = concentration_stat(&draw, &model, 4).unwrap();
    assert!(stat < 0.1, "{stat}");

    let mut cfg = TrialConfig::new(Channel::Fourier, DensityChoice::Rho, SpectrumKind::Geometric { q: 0.5 }, vec![4]);
    cfg.oversample = Oversample::Explicit { count: 10_000 };
    cfg.m = Some(40);
    cfg.trials = 20;
    let r = run_concentration(&cfg).unwrap();
    assert_eq!(r.groups[0].fraction_below_half, 1.0);
}

fn concentration_pair() -> (randinfo::experiments::trials::ConcentrationGroup, randinfo::experiments::trials::ConcentrationGroup) {
    let n = 64;
    let run = |rule| {
        let mut cfg = TrialConfig::new(Channel::Fourier, DensityChoice::Rho, SpectrumKind::PowerLaw { alpha: 1.0 }, vec![n]);
        cfg.oversample = rule;
        cfg.trials = 100;
        cfg.seed = 12;
        run_concentration(&cfg).unwrap().groups.remove(0)
    };
    (run(Oversample::Explicit { count: n }), run(Oversample::Ceil { c: 5.0 }))
}

#[test]
fn undersampling_deviates_more() {
    let (low, high) = concentration_pair();
    assert!(low.stat.median > 2.0 * high.stat.median, "{} vs {}", low.stat.median, high.stat.median);
}

#[test]
#[ignore = "fails: at N = 5 n ln n the fraction is itself zero, for the same reason as the test below"]
fn undersampling_concentrates_worse() {
    let (low, high) = concentration_pair();
    println!(
        "N = n: fraction {:.2}, median {:.3}; N = 5 n ln n: fraction {:.2}, median {:.3}",
        low.fraction_below_half, low.stat.median, high.fraction_below_half, high.stat.median
    );
    assert!(low.fraction_below_half + 0.2 <= high.fraction_below_half);
}

#[test]
#[ignore = "fails at this N: Fourier head counts are Poisson with mean near 8, so the relative deviation is of order one"]
fn oversampled_concentration_below_one_half() {
    let mut cfg = TrialConfig::new(Channel::Fourier, DensityChoice::Rho, SpectrumKind::PowerLaw { alpha: 1.0 }, vec![32]);
    cfg.trials = 100;
    let g = run_concentration(&cfg).unwrap().groups.remove(0);
    assert!(g.fraction_below_half >= 0.95, "{}", g.fraction_below_half);
}
