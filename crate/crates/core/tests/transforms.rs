use approx::assert_abs_diff_eq;
use demix::transforms::{Basis, BasisKind, ConstituentVector, Dictionary};
use proptest::prelude::*;

fn dct_matrix(n: usize) -> Vec<Vec<f64>> {
    // dct_matrix(n)[i][k]: sample i of the k-th orthonormal cosine atom.
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let c = if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 }.sqrt();
                    c * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos()
                })
                .collect()
        })
        .collect()
}

#[test]
fn identity_dct_dictionary_matches_explicit_matrix() {
    let n = 16;
    let c = dct_matrix(n);
    let dict = Dictionary::from_kinds(BasisKind::Identity, BasisKind::Dct, n).unwrap();
    let t: Vec<f64> = (0..2 * n).map(|j| ((j * 7 + 3) % 11) as f64 - 5.0).collect();
    let x = dict.apply(&t).unwrap();
    for i in 0..n {
        let expect = t[i] + (0..n).map(|k| c[i][k] * t[n + k]).sum::<f64>();
        assert_abs_diff_eq!(x[i], expect, epsilon = 1e-12);
    }

    let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let back = dict.adjoint(&y).unwrap();
    for i in 0..n {
        assert_abs_diff_eq!(back.w()[i], y[i], epsilon = 1e-12);
        let expect: f64 = (0..n).map(|r| c[r][i] * y[r]).sum();
        assert_abs_diff_eq!(back.z()[i], expect, epsilon = 1e-12);
    }
}

#[test]
fn dense_materialization_is_orthogonal() {
    for kind in [BasisKind::Identity, BasisKind::Dct, BasisKind::Haar] {
        let n = 32;
        let d = Basis::new(kind, n).unwrap().to_dense();
        for a in 0..n {
            for b in 0..n {
                let g: f64 = (0..n).map(|i| d[i * n + a] * d[i * n + b]).sum();
                assert_abs_diff_eq!(g, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn haar_atoms_are_piecewise_constant() {
    let n = 16;
    let b = Basis::new(BasisKind::Haar, n).unwrap();
    let mut e = vec![0.0; n];
    // Finest-scale wavelet 3 lives on samples 6 and 7.
    e[n / 2 + 3] = 1.0;
    let atom = b.apply(&e).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (i, v) in atom.iter().enumerate() {
        let expect = match i {
            6 => h,
            7 => -h,
            _ => 0.0,
        };
        assert_abs_diff_eq!(*v, expect, epsilon = 1e-14);
    }
}

fn kind() -> impl Strategy<Value = BasisKind> {
    prop_oneof![Just(BasisKind::Identity), Just(BasisKind::Dct), Just(BasisKind::Haar)]
}

fn sized_vec() -> impl Strategy<Value = Vec<f64>> {
    (1u32..=9).prop_flat_map(|p| prop::collection::vec(-10.0f64..10.0, 1usize << p))
}

proptest! {
    #[test]
    fn analysis_inverts_synthesis(k in kind(), x in sized_vec()) {
        let b = Basis::new(k, x.len()).unwrap();
        let back = b.adjoint(&b.apply(&x).unwrap()).unwrap();
        for (a, c) in back.iter().zip(&x) {
            prop_assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn transforms_preserve_energy(k in kind(), x in sized_vec()) {
        let b = Basis::new(k, x.len()).unwrap();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!((norm(&b.apply(&x).unwrap()) - norm(&x)).abs() < 1e-10 * norm(&x).max(1.0));
    }

    #[test]
    fn frame_operator_is_twice_identity(p in kind(), q in kind(), x in sized_vec()) {
        let d = Dictionary::from_kinds(p, q, x.len()).unwrap();
        let back = d.apply(&d.adjoint(&x).unwrap()).unwrap();
        for (a, c) in back.iter().zip(&x) {
            prop_assert!((a - 2.0 * c).abs() < 1e-10);
        }
    }

    #[test]
    fn dictionary_adjoint_identity(p in kind(), q in kind(), x in sized_vec(), seed in 0u64..1000) {
        let n = x.len();
        let d = Dictionary::from_kinds(p, q, n).unwrap();
        let t: Vec<f64> = (0..2 * n).map(|j| ((j as u64 * 2654435761 + seed) % 97) as f64 / 48.0 - 1.0).collect();
        let lhs: f64 = d.apply(&t).unwrap().iter().zip(&x).map(|(a, b)| a * b).sum();
        let rhs: f64 = d.adjoint(&x).unwrap().iter().zip(&t).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn constituent_vector_halves(w in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        let z: Vec<f64> = w.iter().map(|v| -2.0 * v).collect();
        let t = ConstituentVector::from_parts(&w, &z).unwrap();
        prop_assert_eq!(t.w(), &w[..]);
        prop_assert_eq!(t.z(), &z[..]);
        prop_assert_eq!(t.len(), 2 * w.len());
    }
}
