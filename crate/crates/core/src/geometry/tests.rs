use std::sync::Arc;

use super::*;
use crate::diffmap;
use crate::likelihoods::Likelihood;
use crate::linalg::dense::inverse_spd;
use crate::linalg::{adjoint_probe, materialize, DenseMatrix, DenseOperator, Rng};

fn lognormal() -> Model {
    let f = diffmap::compose(diffmap::exp(1), diffmap::affine_scalar(1, 3.0, 0.0)).unwrap();
    Model::new(f, Likelihood::normal_iid(vec![0.5], 0.3).unwrap()).unwrap()
}

fn linear(dim: usize, ndata: usize, seed: u64) -> (Model, DenseMatrix) {
    let mut rng = Rng::new(seed);
    let a = DenseMatrix::from_fn(ndata, dim, |_, _| rng.normal());
    let f = diffmap::linear(Arc::new(DenseOperator(a.clone())), "A");
    let data = rng.standard_normal(ndata);
    (Model::new(f, Likelihood::normal_iid(data, 1.0).unwrap()).unwrap(), a)
}

fn product2d() -> Model {
    let f = diffmap::product(
        diffmap::select(2, vec![0]).unwrap(),
        diffmap::compose(diffmap::exp(1), diffmap::select(2, vec![1]).unwrap()).unwrap(),
    )
    .unwrap();
    Model::new(f, Likelihood::normal_iid(vec![-0.3], 0.1).unwrap()).unwrap()
}

fn constant_x(dim: usize) -> Model {
    Model::new(
        diffmap::constant(dim, vec![0.2]),
        Likelihood::normal_iid(vec![0.0], 1.0).unwrap(),
    )
    .unwrap()
}

fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> DenseMatrix {
    let h = 1e-6;
    let f0 = f(x);
    let mut j = DenseMatrix::zeros(f0.len(), x.len());
    for k in 0..x.len() {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[k] += h;
        m[k] -= h;
        let (fp, fm) = (f(&p), f(&m));
        for i in 0..f0.len() {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

#[test]
fn lognormal_metric_at_origin() {
    let m = lognormal();
    let v = m.metric_mvp(&[0.0], &[1.0]).unwrap();
    assert!((v[0] - 101.0).abs() < 1e-12);
    let dense = materialize(&m.metric(&[0.0]).unwrap(), 1).unwrap();
    assert!((dense[(0, 0)] - 101.0).abs() < 1e-12);
}

#[test]
fn constant_model_metric_is_identity() {
    let m = constant_x(3);
    assert_eq!(m.metric_mvp(&[0.1, 0.2, 0.3], &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
}

#[test]
fn metric_matches_fd_jacobian() {
    let m = product2d();
    let xi = [0.4, -0.3];
    let x = m.xi_transform().clone();
    let j = fd_jacobian(|p| x.apply(p).unwrap(), &xi);
    let want = j.transpose() * j + DenseMatrix::identity(2, 2);
    let got = materialize(&m.metric(&xi).unwrap(), 2).unwrap();
    assert!((got - &want).amax() / want.amax() < 1e-6);
    let op = m.metric(&xi).unwrap();
    assert!(adjoint_probe(&op, &mut Rng::new(0), 10) < 1e-10);
}

#[test]
fn gtilde_properties() {
    let m = lognormal();
    let ep = ExpansionPoint::new(&m, &[-1.0]).unwrap();
    assert_eq!(gtilde(&m, &[-1.0], &ep).unwrap(), vec![0.0]);
    let a_bar = 10.0 * (-3.0f64).exp();
    let want = 0.5 + a_bar * ((-1.5f64).exp() - (-3.0f64).exp()) / 0.3;
    assert!((gtilde(&m, &[-0.5], &ep).unwrap()[0] - want).abs() < 1e-14);

    let (lin, a) = linear(3, 4, 2);
    let xb = [0.1, -0.2, 0.3];
    let ep = ExpansionPoint::new(&lin, &xb).unwrap();
    let xi = [0.5, 0.4, -0.9];
    let d: Vec<f64> = xi.iter().zip(&xb).map(|(p, q)| p - q).collect();
    let mbar = a.transpose() * &a + DenseMatrix::identity(3, 3);
    let want = crate::linalg::dense::mat_vec(&mbar, &d);
    let got = gtilde(&lin, &xi, &ep).unwrap();
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn gtilde_jacobian_at_expansion_point_is_metric() {
    let m = product2d();
    let xb = [0.3, -0.5];
    let ep = ExpansionPoint::new(&m, &xb).unwrap();
    let j = fd_jacobian(|p| gtilde(&m, p, &ep).unwrap(), &xb);
    let mbar = materialize(&ep.metric(), 2).unwrap();
    assert!((j - &mbar).amax() / mbar.amax() < 1e-6);
}

#[test]
fn transformed_metric_is_identity() {
    for (m, xb) in [(lognormal(), vec![-0.6]), (product2d(), vec![-0.5, -0.5])] {
        let ep = ExpansionPoint::new(&m, &xb).unwrap();
        let t = DenseTransform::new(&ep).unwrap();
        let j = fd_jacobian(|p| t.apply(&m, p, &ep).unwrap(), &xb);
        // Posterior metric in the transformed coordinates.
        let jinv = j.try_inverse().unwrap();
        let mbar = materialize(&ep.metric(), xb.len()).unwrap();
        let g = jinv.transpose() * mbar * jinv;
        let dim = xb.len();
        let err = (g - DenseMatrix::identity(dim, dim)).amax();
        assert!(err < 1e-8, "{err:e}");
        assert!(t.apply(&m, &xb, &ep).unwrap().iter().all(|v| *v == 0.0));
    }
    let m = constant_x(2);
    let ep = ExpansionPoint::new(&m, &[0.5, 0.1]).unwrap();
    let t = DenseTransform::new(&ep).unwrap();
    let y = t.apply(&m, &[1.0, 1.0], &ep).unwrap();
    assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.9).abs() < 1e-15);
}

#[test]
fn prior_limit_residual_is_eta1() {
    let m = constant_x(3);
    let ep = ExpansionPoint::new(&m, &[0.0, 1.0, 2.0]).unwrap();
    let mut rng = Rng::new(5);
    let mut shadow = rng.clone();
    let draws = draw_residual(&m, &ep, &mut rng, &SamplerConfig::default(), false).unwrap();
    let (eta1, _) = sample_z(&ep, &mut shadow);
    assert_eq!(draws[0].r, eta1);
}

#[test]
fn lognormal_inversion_is_tight() {
    let m = lognormal();
    let ep = ExpansionPoint::new(&m, &[-0.6]).unwrap();
    let cfg = SamplerConfig {
        tol: 1e-9,
        ..Default::default()
    };
    let mut rng = Rng::new(17);
    for _ in 0..20 {
        let d = draw_residual(&m, &ep, &mut rng, &cfg, true).unwrap();
        assert!(d.iter().all(|x| x.misfit <= 1e-10), "{d:?}");
    }
}

#[test]
fn linear_model_residual_covariances() {
    let (m, _) = linear(3, 5, 8);
    let ep = ExpansionPoint::new(&m, &[0.2, 0.0, -0.1]).unwrap();
    let cov_want = inverse_spd(&materialize(&ep.metric(), 3).unwrap()).unwrap();
    let cfg = SamplerConfig::default();
    let mut rng = Rng::new(1);
    let n = 10_000;
    for geo in [true, false] {
        let mut acc = DenseMatrix::zeros(3, 3);
        for _ in 0..n {
            let d = if geo {
                draw_residual(&m, &ep, &mut rng, &cfg, false).unwrap()
            } else {
                draw_mgvi_residual(&ep, &mut rng, &cfg, false).unwrap()
            };
            let r = nalgebra::DVector::from_column_slice(&d[0].r);
            acc += &r * r.transpose();
        }
        acc /= n as f64;
        for i in 0..3 {
            for j in 0..3 {
                let scale = (cov_want[(i, i)] * cov_want[(j, j)]).sqrt();
                assert!((acc[(i, j)] - cov_want[(i, j)]).abs() <= 0.05 * scale);
            }
        }
    }
}
