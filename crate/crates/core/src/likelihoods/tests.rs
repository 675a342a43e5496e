use super::*;
use crate::diffmap::fd_check_default;
use crate::linalg::{materialize, DenseMatrix, FnOperator, Rng};

fn fd_jacobian(map: &dyn crate::diffmap::DifferentiableMap, s: &[f64]) -> DenseMatrix {
    let h = 1e-6;
    let mut j = DenseMatrix::zeros(map.dim_out(), map.dim_in());
    for k in 0..map.dim_in() {
        let step = h * s[k].abs().max(1e-3);
        let mut p = s.to_vec();
        let mut m = s.to_vec();
        p[k] += step;
        m[k] -= step;
        let fp = map.apply(&p).unwrap();
        let fm = map.apply(&m).unwrap();
        for i in 0..map.dim_out() {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    j
}

/// (likelihood, sampler of admissible inputs)
fn families(rng: &mut Rng) -> Vec<(Likelihood, Box<dyn Fn(&mut Rng) -> Vec<f64>>)> {
    let n = 3;
    vec![
        (
            Likelihood::normal(rng.standard_normal(n), vec![0.09, 0.5, 2.0]).unwrap(),
            Box::new(move |r: &mut Rng| r.standard_normal(n)),
        ),
        (
            Likelihood::poisson(vec![0.0, 3.0, 7.0]).unwrap(),
            Box::new(move |r: &mut Rng| (0..n).map(|_| 0.2 + 5.0 * r.uniform()).collect()),
        ),
        (
            Likelihood::new(Family::InverseGamma { alpha: vec![2.0, 1.0, 4.0] }, vec![3.0, 1.0, 0.5])
                .unwrap(),
            Box::new(move |r: &mut Rng| (0..n).map(|_| 0.3 + 3.0 * r.uniform()).collect()),
        ),
        (
            Likelihood::new(Family::StudentT { theta: 3.0 }, rng.standard_normal(n)).unwrap(),
            Box::new(move |r: &mut Rng| r.standard_normal(n)),
        ),
        (
            Likelihood::new(Family::Bernoulli, vec![0.0, 1.0, 1.0]).unwrap(),
            Box::new(move |r: &mut Rng| (0..n).map(|_| 0.05 + 0.9 * r.uniform()).collect()),
        ),
        (
            Likelihood::variable_noise_normal(rng.standard_normal(n)).unwrap(),
            Box::new(move |r: &mut Rng| {
                let mut s = r.standard_normal(n);
                s.extend((0..n).map(|_| 0.3 + 2.0 * r.uniform()));
                s
            }),
        ),
    ]
}

#[test]
fn transform_examples() {
    let lh = Likelihood::normal(vec![0.0], vec![0.09]).unwrap();
    let x = lh.transform().unwrap().apply(&[0.5]).unwrap();
    assert!((x[0] - 0.5 / 0.3).abs() < 1e-12);

    let lh = Likelihood::new(Family::InverseGamma { alpha: vec![2.0] }, vec![1.0]).unwrap();
    let x = lh.transform().unwrap().apply(&[std::f64::consts::E]).unwrap();
    assert!((x[0] - 3f64.sqrt()).abs() < 1e-12);

    let lh = Likelihood::poisson(vec![1.0]).unwrap();
    assert_eq!(lh.transform().unwrap().apply(&[4.0]).unwrap(), vec![4.0]);

    let lh = Likelihood::variable_noise_normal(vec![0.0]).unwrap();
    assert_eq!(lh.transform().unwrap().apply(&[0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    let lh = Likelihood::variable_noise_normal(vec![1.0]).unwrap();
    let x = lh.transform().unwrap().apply(&[0.0, 4.0]).unwrap();
    assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5 * 4f64.ln()).abs() < 1e-15);
}

#[test]
fn energy_examples() {
    let lh = Likelihood::normal(vec![0.7, -0.2], vec![0.3, 1.0]).unwrap();
    assert_eq!(lh.energy(&[0.7, -0.2]).unwrap(), 0.0);
    let lh = Likelihood::poisson(vec![0.0]).unwrap();
    assert_eq!(lh.energy(&[2.5]).unwrap(), 2.5);
    let lh = Likelihood::variable_noise_normal(vec![0.4]).unwrap();
    assert_eq!(lh.energy(&[0.4, 1.0]).unwrap(), 0.0);
}

#[test]
fn bad_data_rejected() {
    assert!(matches!(Likelihood::poisson(vec![1.5]), Err(Error::BadData(_))));
    assert!(matches!(Likelihood::poisson(vec![-1.0]), Err(Error::BadData(_))));
    assert!(Likelihood::new(Family::Bernoulli, vec![0.5]).is_err());
    assert!(Likelihood::normal(vec![1.0], vec![0.0]).is_err());
    assert!(Likelihood::normal(vec![1.0, 2.0], vec![1.0]).is_err());
    let lh = Likelihood::poisson(vec![1.0]).unwrap();
    assert!(matches!(lh.energy(&[-1.0]), Err(Error::DomainError(_))));
}

#[test]
fn poisson_floor_is_counted() {
    let lh = Likelihood::poisson(vec![2.0]).unwrap();
    let before = poisson_floor_hits();
    let e = lh.energy(&[0.0]).unwrap();
    assert!(e.is_finite());
    assert!(poisson_floor_hits() > before);
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = Rng::new(7);
    for (lh, sample) in families(&mut rng) {
        for _ in 0..5 {
            let s = sample(&mut rng);
            let g = lh.grad(&s).unwrap();
            for k in 0..s.len() {
                let h = 1e-6 * s[k].abs().max(0.1);
                let mut p = s.clone();
                let mut m = s.clone();
                p[k] += h;
                m[k] -= h;
                let fd = (lh.energy(&p).unwrap() - lh.energy(&m).unwrap()) / (2.0 * h);
                let err = (fd - g[k]).abs() / g[k].abs().max(1e-3);
                assert!(err < 1e-6, "{:?} component {k}: {fd} vs {}", lh.families(), g[k]);
            }
        }
    }
}

#[test]
fn metric_root_identities() {
    let mut rng = Rng::new(9);
    for (lh, sample) in families(&mut rng) {
        if matches!(lh.families()[0], Family::VariableNoiseNormal) {
            continue;
        }
        let x = lh.transform().unwrap();
        for _ in 0..5 {
            let s = sample(&mut rng);
            let j = fd_jacobian(x.as_ref(), &s);
            let m = j.transpose() * &j;
            let want = lh.fisher_diag(&s).unwrap();
            for a in 0..s.len() {
                for b in 0..s.len() {
                    let w = if a == b { want[a] } else { 0.0 };
                    let err = (m[(a, b)] - w).abs() / want[a].max(want[b]);
                    assert!(err < 1e-6, "{:?}: {} vs {w}", lh.families(), m[(a, b)]);
                }
            }
        }
    }
}

#[test]
fn transforms_pass_fd_check() {
    let mut rng = Rng::new(10);
    for (lh, sample) in families(&mut rng) {
        let x = lh.transform().unwrap();
        let s = sample(&mut rng);
        let r = fd_check_default(x.as_ref(), &s, &mut rng).unwrap();
        assert!(r.passed(), "{:?} {r:?}", lh.families());
    }
}

#[test]
fn variable_noise_expectation_identity() {
    let (m, v): (f64, f64) = (0.3, 2.0);
    let mut rng = Rng::new(12);
    let n = 200_000;
    let mut acc = [0.0; 3];
    for _ in 0..n {
        let d = m + v.sqrt() * rng.normal();
        let lh = Likelihood::variable_noise_normal(vec![d]).unwrap();
        let (_, jac) = lh.transform().unwrap().linearize(&[m, v]).unwrap();
        let j = materialize(&jac, 2).unwrap();
        let g = j.transpose() * j;
        acc[0] += g[(0, 0)];
        acc[1] += g[(0, 1)];
        acc[2] += g[(1, 1)];
    }
    let mean: Vec<f64> = acc.iter().map(|a| a / n as f64).collect();
    assert!((mean[0] * v - 1.0).abs() < 1e-12);
    assert!(mean[1].abs() < 0.01 / v);
    assert!((mean[2] * 2.0 * v * v - 1.0).abs() < 0.01);
}

#[test]
fn stacking_rules() {
    let mut rng = Rng::new(1);
    let a = Likelihood::normal(vec![0.1, 0.2], vec![0.5, 0.5]).unwrap();
    let b = Likelihood::normal(vec![-0.3, 1.0], vec![0.2, 3.0]).unwrap();
    let single = Likelihood::stack_shared(vec![a.clone()]).unwrap();
    let s = rng.standard_normal(2);
    assert_eq!(single.energy(&s).unwrap(), a.energy(&s).unwrap());

    let both = Likelihood::stack_shared(vec![a.clone(), b.clone()]).unwrap();
    let dense = |lh: &Likelihood| {
        let (_, j) = lh.transform().unwrap().linearize(&s).unwrap();
        let op = FnOperator::symmetric(2, {
            let j: std::sync::Arc<dyn crate::linalg::ImplicitOperator> = std::sync::Arc::from(j);
            move |v: &[f64]| j.apply_adjoint(&j.apply(v))
        });
        materialize(&op, 2).unwrap()
    };
    let diff = dense(&both) - (dense(&a) + dense(&b));
    assert!(diff.amax() < 1e-12);
    assert_eq!(
        both.energy(&s).unwrap(),
        a.energy(&s).unwrap() + b.energy(&s).unwrap()
    );

    let mixed = Likelihood::stack_partitioned(vec![
        a.clone(),
        Likelihood::poisson(vec![1.0, 2.0, 3.0]).unwrap(),
    ])
    .unwrap();
    assert_eq!(mixed.dim_in(), 5);
    assert_eq!(mixed.transform().unwrap().dim_out(), 5);
    assert_eq!(mixed.dim_x(), 5);
}

#[test]
fn normalization_constants() {
    use std::f64::consts::PI;
    let lh = Likelihood::normal(vec![0.0], vec![0.09]).unwrap();
    assert!((lh.normalization() - 0.5 * (2.0 * PI * 0.09).ln()).abs() < 1e-14);
    let lh = Likelihood::poisson(vec![3.0]).unwrap();
    assert!((lh.normalization() - 6f64.ln()).abs() < 1e-12);
}
