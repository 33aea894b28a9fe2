use diagforge::carpenter::DiagonalSpec;
use diagforge::schurhorn::{
    synth_diagonal_discrete, synth_diagonal_tracial, DiscreteSpectrum, TargetBlock, TracialSpectrum,
};
use diagforge::{Complex64, Rational};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn tracial_synthesis_matches_dense_conjugation() {
    let values = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
    let spectrum = TracialSpectrum::new(values, vec![Rational::new(1, 3); 3]).unwrap();
    let blocks = vec![
        TargetBlock::new(c(0.5, 0.0), Rational::new(1, 3)),
        TargetBlock::new(c(0.0, 0.5), Rational::new(1, 3)),
        TargetBlock::new(c(0.5, 0.5), Rational::new(1, 3)),
    ];
    let eps = 0.02;
    let s = synth_diagonal_tracial(&spectrum, &blocks, eps).unwrap();
    let u = s.unitary.unitary_dense();
    let d = s.unitary.dim;
    assert_eq!(d % 3, 0);
    let dense = s.unitary.normal_dense().conjugate_by(&u).diag();
    // Blocks occupy consecutive thirds of the model.
    let third = d / 3;
    for (i, z) in dense.iter().enumerate() {
        assert!((z - blocks[i / third].value).norm() < eps, "entry {i}: {z}");
    }
    assert!(u.unitarity_residual() < 1e-9);
    let fast = s.unitary.diagonal();
    assert!(fast.iter().zip(&dense).all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn discrete_synthesis_respects_spectrum_and_eps() {
    let spectrum = DiscreteSpectrum::new(vec![(c(0.5, 0.25), 1)], vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
    let target = DiagonalSpec::new(vec![c(0.75, 0.0)], vec![c(0.25, 0.25), c(0.5, 0.0)]).unwrap();
    let eps = 0.05;
    let s = synth_diagonal_discrete(&spectrum, &target, eps).unwrap();
    assert!(s.spectrum_matches);
    assert!(s.necessity.holds);
    let realized = s.unitary.diagonal();
    let expected = target.truncate(s.dim).unwrap();
    let worst = realized.iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst < eps, "{worst}");
    assert!((worst - s.diag_residual).abs() < 1e-12);
    assert!(s.unitary.unitarity_residual() < 1e-9);
}

#[test]
fn target_outside_the_hull_is_rejected() {
    let spectrum = DiscreteSpectrum::new(vec![], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let target = DiagonalSpec::real(&[], &[2.0]).unwrap();
    assert!(synth_diagonal_discrete(&spectrum, &target, 0.05).is_err());
}
