use nalgebra::DMatrix;
use selfsim::eig;
use selfsim::ifs::make_bernoulli;
use selfsim::ulam::{
    build_ulam, build_ulam_with, eigenpair_near, full_spectrum_with_cutoff, make_partition,
    match_eigenvalues, stationary, stationary_density, Jitter,
};
use selfsim::{Complex64, Error, Execution};

#[test]
fn dense_spectrum_matches_schur_oracle() {
    let model = make_bernoulli(0.8).unwrap();
    let partition = make_partition(&model.support(), 80, None).unwrap();
    let op = build_ulam(&model, &partition).unwrap();
    let ours = eig::eigenvalues(&op.matrix).unwrap();
    let oracle: Vec<Complex64> = op.matrix.clone().schur().complex_eigenvalues().iter().copied().collect();
    let mut oracle = oracle;
    eig::sort_by_modulus(&mut oracle);
    let pairs = match_eigenvalues(&ours, &oracle, 0.3);
    assert!(!pairs.is_empty());
    for (a, b, d) in pairs {
        assert!(d < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn half_parameter_on_dyadic_cells_is_uniform() {
    let model = make_bernoulli(0.5).unwrap();
    let partition = make_partition(&model.support(), 64, None).unwrap();
    let op = build_ulam(&model, &partition).unwrap();
    let run = stationary(&op, 10_000, 1e-14);
    assert!(run.converged);
    for (_, d) in stationary_density(&partition, &run.distribution) {
        assert!((d - 0.5).abs() < 1e-12);
    }
}

#[test]
fn sequential_and_parallel_builds_match() {
    let model = make_bernoulli(0.7).unwrap();
    let jitter = Jitter { seed: 9, amplitude: 1e-3 };
    let partition = make_partition(&model.support(), 300, Some(jitter)).unwrap();
    let a = build_ulam_with(&model, &partition, Execution::Sequential).unwrap();
    let b = build_ulam_with(&model, &partition, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eigenvectors_satisfy_their_equations() {
    let model = make_bernoulli(0.8).unwrap();
    let partition = make_partition(&model.support(), 120, None).unwrap();
    let op = build_ulam(&model, &partition).unwrap();
    let spec = full_spectrum_with_cutoff(&op, 0.6).unwrap();
    assert_eq!(spec.leading_pairs.len(), 3);
    let m = op.matrix.map(|x| Complex64::new(x, 0.0));
    for pair in &spec.leading_pairs {
        let r = nalgebra::DVector::from_vec(pair.right.clone());
        let l = nalgebra::DVector::from_vec(pair.left.clone());
        assert!((&m * &r - &r * pair.lambda).norm() < 1e-8);
        assert!((m.transpose() * &l - &l * pair.lambda).norm() < 1e-8);
    }
    let near = eigenpair_near(&op, &spec.eigenvalues, Complex64::new(0.64, 0.0)).unwrap();
    assert!((near.lambda.re - 0.64).abs() < 2e-2);
}

#[test]
fn rejects_bad_partitions() {
    let model = make_bernoulli(0.8).unwrap();
    let s = model.support();
    assert!(matches!(
        make_partition(&s, 10, Some(Jitter { seed: 1, amplitude: 0.2 })),
        Err(Error::JitterTooLarge { .. })
    ));
    assert!(make_partition(&s, 1, None).is_err());
    let big = make_partition(&s, 2001, None).unwrap();
    let op = selfsim::UlamOperator {
        partition: big,
        matrix: DMatrix::zeros(1, 1),
    };
    assert!(full_spectrum_with_cutoff(&op, 0.5).is_err());
}
