use mapfilt_core::allpass::{map_frf, verify_smap, CepstralParams};
use mapfilt_core::factorize::{bauer_factorize, spectral_root_grid};
use mapfilt_core::linalg::from_rows;
use mapfilt_core::privacy::{mlip, CriterionContext};
use mapfilt_core::sim::{simulate_var, VarModel};
use mapfilt_core::spectral::{conditional_spectrum, spectrum_to_acvf, FreqGrid, SpectrumKind};
use mapfilt_core::{Real, Series32};

const A: [[f64; 4]; 4] = [
    [0.5, 0.1, 0.0, 0.0],
    [0.2, 0.4, 0.1, 0.0],
    [0.1, 0.2, 0.6, 0.2],
    [0.0, 0.1, 0.2, 0.5],
];
const THETA: [f64; 5] = [0.4, -0.7, 0.2, 0.9, -0.3];

fn model<T: Real>() -> VarModel<T> {
    let a: Vec<Vec<f64>> = A.iter().map(|r| r.to_vec()).collect();
    let eye: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    VarModel::new(vec![from_rows(&a).unwrap()], from_rows(&eye).unwrap()).unwrap()
}

/// Privacy of a fixed filter designed from the model spectrum, and how far it
/// is from preserving the spectrum its roots factor.
fn design<T: Real>() -> (f64, f64) {
    let grid = FreqGrid::<T>::new(128).unwrap();
    let joint = model::<T>().spectrum(&grid).unwrap();
    let cond = conditional_spectrum(&joint, 2).unwrap();
    let sx = joint.select(&[0, 1], SpectrumKind::Marginal).unwrap();
    let factor = bauer_factorize(&spectrum_to_acvf(&sx, 24).unwrap(), 400, &grid).unwrap();
    let roots = spectral_root_grid(&factor, &grid).unwrap();
    let theta = CepstralParams::new(2, 1, THETA.iter().map(|&v| nalgebra::convert(v)).collect()).unwrap();
    let ctx = CriterionContext::new(cond, roots.clone()).unwrap();
    let p = mlip(&theta, &ctx).unwrap();
    let frf = map_frf(&theta, &roots).unwrap();
    (p.as_f64(), verify_smap(&frf, &roots.spectrum()).unwrap().as_f64())
}

#[test]
fn single_precision_tracks_double() {
    let (p64, e64) = design::<f64>();
    let (p32, e32) = design::<f32>();
    assert!((0.0..=1.0).contains(&p64));
    assert!((p64 - p32).abs() < 1e-3, "{p64} vs {p32}");
    assert!(e64 < 1e-8, "{e64}");
    assert!(e32 < 1e-3, "{e32}");
}

#[test]
fn single_precision_simulation_runs() {
    let x: Series32 = simulate_var(&model::<f32>(), 500, 3, 100).unwrap();
    assert_eq!((x.len(), x.dim()), (500, 4));
    assert!(x.values().iter().all(|v| v.is_finite()));
}
