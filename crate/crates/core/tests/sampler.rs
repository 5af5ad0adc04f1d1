use nalgebra::DMatrix;
use num_complex::Complex64;
use roymax::sampler::*;
use roymax::*;

const REAL: DivisionAlgebra = DivisionAlgebra::Real;
const COMPLEX: DivisionAlgebra = DivisionAlgebra::Complex;
const QUAT: DivisionAlgebra = DivisionAlgebra::Quaternion;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let ea = EmpiricalCdf::new(a.to_vec()).unwrap();
    let eb = EmpiricalCdf::new(b.to_vec()).unwrap();
    a.iter()
        .chain(b)
        .map(|&x| (ea.eval(x) - eb.eval(x)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rank_one_wishart_is_chi_square() {
    let spec = GaussianMatrixSpec::standard(5, 1, REAL);
    let mut rng = RngStream::new(3, 0).rng();
    let draws: Vec<f64> = (0..100_000)
        .map(|_| sample_singular_wishart_spectrum(&spec, &mut rng).unwrap().values()[0])
        .collect();
    // chi-square(5): mean 5, variance 10
    let se = (10.0 / draws.len() as f64).sqrt();
    assert!((mean(&draws) - 5.0).abs() < 3.0 * se, "{}", mean(&draws));
}

#[test]
fn eigenvalues_sum_to_frobenius_norm() {
    for beta in [REAL, COMPLEX, QUAT] {
        let spec = GaussianMatrixSpec::new(4, 2, beta, vec![0.5, 1.0, 2.0, 3.0]).unwrap();
        let mut a = RngStream::new(9, 1).rng();
        let mut b = RngStream::new(9, 1).rng();
        for _ in 0..50 {
            let spectrum = sample_singular_wishart_spectrum(&spec, &mut a).unwrap();
            let x = spec.draw(&mut b);
            let norm = frobenius_sq(&x, beta);
            assert!((spectrum.trace() - norm).abs() < 1e-10 * norm, "beta={}", beta.beta());
            assert_eq!(spectrum.dim(), 2);
            assert!(spectrum.values().iter().all(|&v| v > 0.0));
        }
    }
}

#[test]
fn wishart_moments_match_variance_convention() {
    let (m, n) = (4usize, 2usize);
    for beta in [REAL, COMPLEX, QUAT] {
        let spec = GaussianMatrixSpec::standard(m, n, beta);
        let mut rng = RngStream::new(21, beta.beta() as u64).rng();
        let draws = 40_000;
        let (mut first, mut second) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
        for _ in 0..draws {
            let s = sample_singular_wishart_spectrum(&spec, &mut rng).unwrap();
            first.push(s.trace());
            second.push(s.values().iter().map(|v| v * v).sum::<f64>());
        }
        // E tr W = mn and E tr W² = mn(m + n − 1 + 2/β).
        let (mf, nf) = (m as f64, n as f64);
        let expected_second = mf * nf * (mf + nf - 1.0 + beta.alpha());
        let se1 = (first.iter().map(|v| (v - mf * nf).powi(2)).sum::<f64>() / draws as f64 / draws as f64).sqrt();
        let se2 = (second.iter().map(|v| (v - expected_second).powi(2)).sum::<f64>() / draws as f64 / draws as f64).sqrt();
        assert!((mean(&first) - mf * nf).abs() < 4.0 * se1, "beta={} trace {}", beta.beta(), mean(&first));
        assert!(
            (mean(&second) - expected_second).abs() < 4.0 * se2,
            "beta={} second moment {} vs {expected_second}",
            beta.beta(),
            mean(&second)
        );
    }
}

#[test]
fn full_product_has_rank_n() {
    for beta in [REAL, COMPLEX, QUAT] {
        let spec = GaussianMatrixSpec::standard(6, 2, beta);
        let mut rng = RngStream::new(4, 0).rng();
        for _ in 0..100 {
            let values = full_wishart_spectrum(&spec, &mut rng);
            assert_eq!(values.len(), 6);
            assert!(values[2].abs() < 1e-8 * values[0], "beta={} {values:?}", beta.beta());
        }
    }
}

#[test]
fn complex_gram_matrices_are_hermitian() {
    let spec = GaussianMatrixSpec::standard(5, 3, COMPLEX);
    let mut rng = RngStream::new(5, 0).rng();
    for _ in 0..100 {
        let x = spec.draw(&mut rng);
        let gram = x.adjoint() * &x;
        assert!(hermitian_defect(&gram) < 1e-10);
        assert!(gram.diagonal().iter().all(|z| z.im.abs() < 1e-10));
    }
}

#[test]
fn quaternion_eigenvalues_come_in_pairs() {
    let spec = GaussianMatrixSpec::standard(5, 3, QUAT);
    let mut rng = RngStream::new(6, 0).rng();
    for _ in 0..100 {
        let x: DMatrix<Complex64> = spec.draw(&mut rng);
        let mut values: Vec<f64> = (x.adjoint() * &x).symmetric_eigen().eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(values.len(), 6);
        for pair in values.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-8 * values[0].max(1.0), "{values:?}");
        }
    }
}

#[test]
fn identical_seeds_reproduce_bitwise() {
    let model = RatioModel::MoorePenrose { p_dim: 8, m: 4, n: 2, beta: QUAT };
    let a = sample_largest(&model, 2500, 77).unwrap();
    let b = sample_largest(&model, 2500, 77).unwrap();
    let c = sample_largest(&model, 2500, 78).unwrap();
    assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_ne!(a, c);
}

#[test]
fn common_rescaling_of_both_covariances_is_invisible() {
    let dims = ProblemDims::real(3, 2, 10).unwrap();
    let sigma = vec![1.0 / 3.0, 0.5, 1.0];
    let base = RatioModel::FMatrix { dims, scale1: sigma.clone(), scale2: vec![1.0; 3] };
    let scaled = RatioModel::FMatrix {
        dims,
        scale1: sigma.iter().map(|s| s * 7.0).collect(),
        scale2: vec![7.0; 3],
    };
    let n = 10_000;
    let a = sample_largest(&base, n, 1).unwrap();
    let b = sample_largest(&scaled, n, 2).unwrap();
    let critical = 1.628 * (2.0 / n as f64).sqrt();
    assert!(two_sample_ks(&a, &b) < critical);
}

#[test]
fn upper_five_percent_point_of_10_5_3() {
    let model = RatioModel::f_matrix_identity(ProblemDims::real(5, 3, 10).unwrap());
    let n = 200_000;
    let ecdf = EmpiricalCdf::new(sample_largest(&model, n, 12).unwrap()).unwrap();
    let tail = ecdf.upper_tail(7.63);
    let se = (0.05 * 0.95 / n as f64).sqrt();
    assert!((tail - 0.05).abs() < 4.0 * se, "{tail}");
}

#[test]
fn moore_penrose_complex_matches_analytic() {
    let model = RatioModel::MoorePenrose { p_dim: 6, m: 4, n: 2, beta: COMPLEX };
    let samples = sample_largest(&model, 20_000, 31).unwrap();
    let dims = ProblemDims::new(4, 2, 6, COMPLEX).unwrap();
    let scale = ScaleSpectrum::identity(4);
    let d = ks_distance(&samples, |x| cdf_largest_finite(x, &dims, &scale).map(|v| v.probability)).unwrap();
    assert!(d < ks_critical_value(samples.len(), 0.01), "{d}");
}

#[test]
fn moore_penrose_matches_constructive_f_matrix() {
    let n = 20_000;
    let a = sample_largest(&RatioModel::MoorePenrose { p_dim: 10, m: 5, n: 3, beta: REAL }, n, 40).unwrap();
    let b = sample_largest(&RatioModel::f_matrix_identity(ProblemDims::real(5, 3, 10).unwrap()), n, 41).unwrap();
    assert!(two_sample_ks(&a, &b) < 1.628 * (2.0 / n as f64).sqrt());
}

#[test]
fn ks_distance_of_exact_draws_and_negative_control() {
    let dims = ProblemDims::real(5, 3, 10).unwrap();
    let scale = ScaleSpectrum::identity(5);
    let trunc = TruncationPolicy::default();
    let n = 2000;
    // Stratified inverse-transform draws from the analytic law.
    let samples: Vec<f64> = (0..n)
        .map(|i| quantile((i as f64 + 0.5) / n as f64, &dims, &scale, &trunc).unwrap().x)
        .collect();
    let cdf = |x: f64| cdf_largest(x, &dims, &scale, &trunc).map(|v| v.probability);
    let critical = ks_critical_value(n, 0.01);
    assert!(ks_distance(&samples, cdf).unwrap() < critical);
    let shifted = |x: f64| cdf_largest(x / 1.2, &dims, &scale, &trunc).map(|v| v.probability);
    assert!(ks_distance(&samples, shifted).unwrap() > critical);
}

#[test]
fn empty_samples_are_rejected() {
    assert!(matches!(ks_distance(&[], |_| Ok(0.5)), Err(Error::EmptySample)));
}
