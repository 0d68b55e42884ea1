use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rlrt_core::covariance::{sample_covariance, shrink, DataMatrix};
use rlrt_core::linalg::{sym_eigen, sym_eigenvalues, SymMatrix};
use rlrt_core::ShrinkageParams;

fn random_data(rng: &mut StdRng, n: usize, p: usize) -> DataMatrix {
    DataMatrix::new(n, p, (0..n * p).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

fn brute_force(x: &DataMatrix) -> Vec<f64> {
    let (n, p) = (x.n(), x.p());
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            mean[j] += x.row(i)[j] / n as f64;
        }
    }
    let mut s = vec![0.0; p * p];
    for j in 0..p {
        for k in 0..p {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (x.row(i)[j] - mean[j]) * (x.row(i)[k] - mean[k]);
            }
            s[j * p + k] = acc / (n - 1) as f64;
        }
    }
    s
}

#[test]
fn matches_double_loop() {
    let mut rng = StdRng::seed_from_u64(21);
    for (n, p) in [(5, 3), (2, 1), (7, 9), (30, 13)] {
        let x = random_data(&mut rng, n, p);
        let s = sample_covariance(&x);
        assert_eq!(s.n_tilde, n - 1);
        for (a, b) in s.matrix.as_slice().iter().zip(brute_force(&x)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn row_permutation_invariant() {
    let mut rng = StdRng::seed_from_u64(22);
    let x = random_data(&mut rng, 9, 4);
    let mut rows: Vec<Vec<f64>> = (0..9).map(|i| x.row(i).to_vec()).collect();
    rows.reverse();
    rows.swap(0, 4);
    let y = DataMatrix::from_rows(&rows).unwrap();
    let (a, b) = (sample_covariance(&x), sample_covariance(&y));
    for (u, v) in a.matrix.as_slice().iter().zip(b.matrix.as_slice()) {
        assert!((u - v).abs() < 1e-13);
    }
}

#[test]
fn rotation_equivariant() {
    // S(XQ) = Qᵀ S(X) Q
    let mut rng = StdRng::seed_from_u64(23);
    let p = 6;
    let x = random_data(&mut rng, 15, p);
    let q = sym_eigen(&SymMatrix::from_fn(p, |i, j| ((i * 7 + j * 7) % 5) as f64 - 2.0))
        .unwrap()
        .vectors;
    let lhs = sample_covariance(&x.rotate_columns(&q).unwrap());
    let rhs = sample_covariance(&x).matrix.congruence(&q).unwrap();
    for (u, v) in lhs.matrix.as_slice().iter().zip(rhs.as_slice()) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn shrinkage_maps_the_spectrum() {
    let mut rng = StdRng::seed_from_u64(24);
    let x = random_data(&mut rng, 12, 7);
    let s = sample_covariance(&x);
    let l = sym_eigenvalues(&s.matrix).unwrap();
    for lambda in [0.05, 0.3, 0.5, 0.9, 1.0] {
        let params = ShrinkageParams::new(lambda).unwrap();
        let shrunk = sym_eigenvalues(&shrink(&s, params).matrix).unwrap();
        for (a, b) in shrunk.iter().zip(&l) {
            assert!((a - params.psi(*b)).abs() < 1e-10);
        }
    }
}

#[test]
fn mean_shift_invariant() {
    let mut rng = StdRng::seed_from_u64(25);
    let x = random_data(&mut rng, 10, 3);
    let shifted: Vec<f64> = x
        .values()
        .chunks(3)
        .flat_map(|r| [r[0] + 100.0, r[1] - 3.0, r[2] + 0.5])
        .collect();
    let y = DataMatrix::new(10, 3, shifted).unwrap();
    let (a, b) = (sample_covariance(&x), sample_covariance(&y));
    for (u, v) in a.matrix.as_slice().iter().zip(b.matrix.as_slice()) {
        assert!((u - v).abs() < 1e-10);
    }
}
