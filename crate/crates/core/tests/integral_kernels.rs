mod common;

use proptest::prelude::*;
use stratsim::coeffs::{build_tensor, IntegralSpec, Weights, SCHEME_FAMILIES};
use stratsim::kernels::{
    ito_double, ito_expansion, sample_batch, strat_double, strat_single, strat_tensor,
    strat_to_ito, BatchSampler, Order, QLevels,
};
use stratsim::noise::{sample_noise, NoiseMatrix, StreamKey};
use stratsim::Error;

fn w(s: &str) -> Weights {
    s.parse().unwrap()
}

fn spec(s: &str, comps: &[usize]) -> IntegralSpec {
    IntegralSpec::new(w(s), comps.to_vec()).unwrap()
}

fn noise_from(seed: u64, m: usize, qmax: usize) -> NoiseMatrix {
    let z = common::normals(seed, m * (qmax + 1));
    NoiseMatrix::from_rows(z.chunks(qmax + 1).map(<[f64]>::to_vec).collect()).unwrap()
}

fn within_3se(values: &[f64], want: f64) -> bool {
    let (mean, se) = common::mean_se(values);
    (mean - want).abs() <= 3.0 * se
}

#[test]
fn single_integral_examples() {
    let nm = NoiseMatrix::from_rows(vec![vec![2.0, 0.0, 0.0]]).unwrap();
    assert_eq!(strat_single(0, &nm, 1, 1.0).unwrap(), 2.0);
    let nm = NoiseMatrix::from_rows(vec![vec![1.0, 3f64.sqrt(), 0.0]]).unwrap();
    assert!((strat_single(1, &nm, 1, 1.0).unwrap() + 1.0).abs() < 1e-15);
    assert!(matches!(
        strat_single(3, &nm, 1, 1.0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn single_integral_moments() {
    let n = 1_000_000;
    let z = common::normals(11, 3 * n);
    let mut v0 = Vec::with_capacity(n);
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    let delta: f64 = 0.7;
    for c in z.chunks(3) {
        let nm = NoiseMatrix::from_rows(vec![c.to_vec()]).unwrap();
        v0.push(strat_single(0, &nm, 1, delta).unwrap());
        v1.push(strat_single(1, &nm, 1, delta).unwrap());
        v2.push(strat_single(2, &nm, 1, 1.0).unwrap());
    }
    for v in [&v0, &v1] {
        assert!(within_3se(v, 0.0));
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    assert!(within_3se(&sq(&v0), delta));
    assert!(within_3se(&sq(&v1), delta.powi(3) / 3.0));
    let (var2, _) = common::mean_se(&sq(&v2));
    assert!((var2 - 0.2).abs() <= 0.002, "Var I2 = {var2}");
}

#[test]
fn double_examples() {
    let (a, b, delta) = (0.7, -1.3, 0.4);
    let nm = NoiseMatrix::from_rows(vec![vec![a], vec![b]]).unwrap();
    let v = strat_double(&w("00"), &nm, 1, 2, 0, delta).unwrap();
    assert!((v - delta * a * b / 2.0).abs() < 1e-16);
    let nm = noise_from(3, 1, 30);
    for q in [0, 1, 5, 30] {
        let v = strat_double(&w("00"), &nm, 1, 1, q, delta).unwrap();
        assert!(
            (v - delta * nm.zeta(1, 0).powi(2) / 2.0).abs() < 1e-15,
            "q = {q}"
        );
    }
    // Weighted forms read two indices past q.
    assert!(strat_double(&w("01"), &noise_from(1, 2, 3), 1, 2, 2, 1.0).is_err());
    assert!(strat_double(&w("000"), &nm, 1, 1, 2, 1.0).is_err());
}

#[test]
fn double_tail_matches_analytic_error() {
    let n = 100_000;
    let (lo, hi) = (2, 20);
    let d: Vec<f64> = (0..n as u64)
        .map(|p| {
            let nm = sample_noise(StreamKey::new(77, p, 0), 2, hi);
            let a = strat_double(&w("00"), &nm, 1, 2, hi, 1.0).unwrap();
            let b = strat_double(&w("00"), &nm, 1, 2, lo, 1.0).unwrap();
            (a - b).powi(2)
        })
        .collect();
    let want: f64 = 0.5
        * (lo + 1..=hi)
            .map(|i| 1.0 / (4 * i * i - 1) as f64)
            .sum::<f64>();
    assert!(within_3se(&d, want), "{:?} vs {want}", common::mean_se(&d));
}

#[test]
fn double_matches_tensor_contraction() {
    // k = 2 through the dense contraction, against the closed form.
    for q in [0, 1, 4, 9] {
        let t = build_tensor(&IntegralSpec::distinct(w("00")), q, 0.3).unwrap();
        for seed in 0..20 {
            let nm = noise_from(seed, 2, q);
            for (i1, i2) in [(1, 2), (2, 1), (1, 1)] {
                let a = strat_double(&w("00"), &nm, i1, i2, q, 0.3).unwrap();
                let b = strat_tensor(&spec("00", &[i1, i2]), &nm, &t).unwrap();
                assert!(
                    (a - b).abs() <= 1e-14 * (1.0 + a.abs()),
                    "q={q} ({i1},{i2})"
                );
            }
        }
    }
}

#[test]
fn tensor_examples() {
    let delta: f64 = 0.6;
    let t = build_tensor(&IntegralSpec::distinct(w("000")), 0, delta).unwrap();
    let nm = NoiseMatrix::from_rows(vec![vec![0.5], vec![-1.5], vec![2.0]]).unwrap();
    let v = strat_tensor(&spec("000", &[1, 2, 3]), &nm, &t).unwrap();
    assert!((v - delta.powf(1.5) / 6.0 * 0.5 * -1.5 * 2.0).abs() < 1e-15);
    let t = build_tensor(&IntegralSpec::distinct(w("0100")), 3, delta).unwrap();
    assert_eq!(
        strat_tensor(&spec("0100", &[1, 2, 1, 2]), &NoiseMatrix::zeros(2, 3), &t).unwrap(),
        0.0
    );
    assert!(matches!(
        strat_tensor(&spec("0010", &[1, 2, 1, 2]), &NoiseMatrix::zeros(2, 3), &t),
        Err(Error::TensorMismatch(_))
    ));
}

#[test]
fn tensor_mean_with_repeated_component() {
    // E[I(1,1,2) ζ_{j3}^{(2)}] = Σ_j C_{j3 j j}.
    let q = 6;
    let t = build_tensor(&IntegralSpec::distinct(w("000")), q, 1.0).unwrap();
    let s = spec("000", &[1, 1, 2]);
    let n = 100_000;
    for j3 in [0, 1] {
        let want: f64 = (0..=q).map(|j| t.get(&[j, j, j3]).unwrap()).sum();
        let v: Vec<f64> = (0..n as u64)
            .map(|p| {
                let nm = sample_noise(StreamKey::new(31, p, j3 as u64), 2, q);
                strat_tensor(&s, &nm, &t).unwrap() * nm.zeta(2, j3)
            })
            .collect();
        assert!(
            within_3se(&v, want),
            "j3={j3}: {:?} vs {want}",
            common::mean_se(&v)
        );
    }
}

#[test]
fn distinct_tensor_variance_is_coefficient_norm() {
    let n = 100_000;
    for (fam, q) in [("000", 4), ("010", 3), ("0000", 2)] {
        let t = build_tensor(&IntegralSpec::distinct(w(fam)), q, 1.0).unwrap();
        let comps: Vec<usize> = (1..=fam.len()).collect();
        let s = spec(fam, &comps);
        let want: f64 = t.scaled_values().iter().map(|c| c * c).sum();
        let sq: Vec<f64> = (0..n as u64)
            .map(|p| {
                strat_tensor(&s, &sample_noise(StreamKey::new(8, p, 0), fam.len(), q), &t)
                    .unwrap()
                    .powi(2)
            })
            .collect();
        assert!(
            within_3se(&sq, want),
            "{fam}: {:?} vs {want}",
            common::mean_se(&sq)
        );
    }
}

#[test]
fn double_moments() {
    let n = 100_000;
    let delta = 0.8;
    let same: Vec<f64> = (0..n as u64)
        .map(|p| {
            strat_double(
                &w("00"),
                &sample_noise(StreamKey::new(4, p, 0), 2, 3),
                1,
                1,
                3,
                delta,
            )
            .unwrap()
        })
        .collect();
    assert!(within_3se(&same, delta / 2.0));
    let cross: Vec<f64> = (0..n as u64)
        .map(|p| {
            strat_double(
                &w("00"),
                &sample_noise(StreamKey::new(4, p, 0), 2, 3),
                1,
                2,
                3,
                delta,
            )
            .unwrap()
        })
        .collect();
    assert!(within_3se(&cross, 0.0));
}

#[test]
fn ito_expansion_examples() {
    for q in [0, 1, 5, 20] {
        let t = build_tensor(&IntegralSpec::distinct(w("00")), q, 0.5).unwrap();
        for seed in 0..50 {
            let nm = noise_from(seed, 2, q);
            let strat = strat_double(&w("00"), &nm, 1, 1, q, 0.5).unwrap();
            let ito = ito_expansion(&spec("00", &[1, 1]), &nm, &t).unwrap();
            assert!((strat - ito - 0.25).abs() <= 1e-13 * (1.0 + strat.abs()));
            let strat = strat_double(&w("00"), &nm, 2, 1, q, 0.5).unwrap();
            let ito = ito_expansion(&spec("00", &[2, 1]), &nm, &t).unwrap();
            assert!((strat - ito).abs() <= 1e-13 * (1.0 + strat.abs()));
        }
    }
    let t = build_tensor(&IntegralSpec::distinct(w("0")), 0, 0.5).unwrap();
    let nm = noise_from(1, 1, 0);
    let a = ito_expansion(&spec("0", &[1]), &nm, &t).unwrap();
    assert!((a - strat_single(0, &nm, 1, 0.5).unwrap()).abs() < 1e-15);
}

#[test]
fn ito_expansion_is_centred() {
    // Itô integrals have mean zero whatever the component pattern.
    let q = 4;
    let t = build_tensor(&IntegralSpec::distinct(w("0000")), q, 1.0).unwrap();
    let n = 50_000;
    for comps in [[1, 1, 2, 2], [1, 2, 1, 2], [1, 1, 1, 1]] {
        let s = spec("0000", &comps);
        let v: Vec<f64> = (0..n as u64)
            .map(|p| ito_expansion(&s, &sample_noise(StreamKey::new(6, p, 0), 2, q), &t).unwrap())
            .collect();
        assert!(within_3se(&v, 0.0), "{comps:?}: {:?}", common::mean_se(&v));
    }
}

#[test]
fn strat_to_ito_examples() {
    assert_eq!(strat_to_ito(&w("00"), 1.0, 2, 2, 0.5).unwrap(), 0.75);
    assert_eq!(strat_to_ito(&w("10"), 1.0, 1, 2, 0.5).unwrap(), 1.0);
    assert_eq!(strat_to_ito(&w("01"), 0.0, 1, 1, 2.0).unwrap(), 1.0);
    assert_eq!(strat_to_ito(&w("10"), 0.0, 1, 1, 2.0).unwrap(), 1.0);
    assert!(matches!(
        strat_to_ito(&w("000"), 0.0, 1, 1, 2.0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn ito_double_is_centred() {
    let n = 100_000;
    for fam in ["00", "01", "10"] {
        let v: Vec<f64> = (0..n as u64)
            .map(|p| {
                ito_double(
                    &w(fam),
                    &sample_noise(StreamKey::new(12, p, 0), 1, 8),
                    1,
                    1,
                    6,
                    1.0,
                )
                .unwrap()
            })
            .collect();
        assert!(within_3se(&v, 0.0), "{fam}: {:?}", common::mean_se(&v));
    }
}

#[test]
fn batch_families_follow_order() {
    let q = QLevels::uniform(Order::TwoHalf, 2);
    let nm = sample_noise(StreamKey::new(1, 0, 0), 2, 4);
    let full = sample_batch(Order::TwoHalf, &nm, &q, 0.1).unwrap();
    for f in SCHEME_FAMILIES {
        assert!(full.contains(f), "{f}");
        assert_eq!(full.family(f).unwrap().len(), 2usize.pow(f.len() as u32));
    }
    let two = sample_batch(Order::Two, &nm, &q, 0.1).unwrap();
    for f in ["001", "100", "010", "00000", "2"] {
        assert!(!two.contains(f), "{f}");
    }
    for f in ["0", "1", "00", "01", "10", "000", "0000"] {
        assert!(two.contains(f), "{f}");
        assert_eq!(two.family(f), full.family(f), "{f}");
    }
    // Joint realization: every value comes from the one noise matrix.
    assert_eq!(full.get("0", &[2]).unwrap(), 0.1f64.sqrt() * nm.zeta(2, 0));
    let again = sample_batch(Order::TwoHalf, &nm, &q, 0.1).unwrap();
    assert_eq!(again.family("00100"), full.family("00100"));
    assert!(matches!(
        sample_batch(Order::TwoHalf, &nm, &QLevels::new(), 0.1),
        Err(Error::MissingQ(_))
    ));
    let sampler = BatchSampler::new(Order::One, 1, &QLevels::new().with("00", 3), 0.1).unwrap();
    assert_eq!(sampler.qmax(), 3);
}

proptest! {
    #[test]
    fn double_antisymmetry(seed: u64, q in 0usize..25, delta in 1e-3f64..4.0) {
        let nm = noise_from(seed, 2, q);
        let a = strat_double(&w("00"), &nm, 1, 2, q, delta).unwrap();
        let b = strat_double(&w("00"), &nm, 2, 1, q, delta).unwrap();
        let want = delta * nm.zeta(1, 0) * nm.zeta(2, 0);
        prop_assert!((a + b - want).abs() <= 1e-13 * (1.0 + want.abs() + a.abs()));
    }

    #[test]
    fn ito_strat_pathwise(seed: u64, q in 0usize..12, delta in 1e-3f64..4.0, same: bool) {
        let nm = noise_from(seed, 2, q);
        let i2 = if same { 1 } else { 2 };
        let t = build_tensor(&IntegralSpec::distinct(w("00")), q, delta).unwrap();
        let strat = strat_double(&w("00"), &nm, 1, i2, q, delta).unwrap();
        let ito = ito_expansion(&spec("00", &[1, i2]), &nm, &t).unwrap();
        let shift = if same { delta / 2.0 } else { 0.0 };
        prop_assert!((ito - (strat - shift)).abs() <= 1e-13 * (strat.abs() + shift).max(1e-300) + 1e-15 * delta);
        prop_assert_eq!(strat_to_ito(&w("00"), strat, 1, i2, delta).unwrap(), strat - shift);
    }
}
