use super::DifferentiableMap;
use crate::error::Result;
use crate::linalg::vector::{dot, norm, sub};
use crate::linalg::Rng;

/// Outcome of a finite-difference and adjoint consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    pub max_rel_error_tangent: f64,
    pub max_rel_error_adjoint: f64,
    pub probes: usize,
    pub tol_tangent: f64,
    pub tol_adjoint: f64,
}

impl FdReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error_tangent <= self.tol_tangent
            && self.max_rel_error_adjoint <= self.tol_adjoint
    }
}

/// Compares the tangent action with central differences of step
/// `h (|xi| + 1)` and checks `<J v, u> = <v, J^T u>` on `probes` random
/// directions.
pub fn fd_check(
    map: &dyn DifferentiableMap,
    xi: &[f64],
    h: f64,
    tol: f64,
    probes: usize,
    rng: &mut Rng,
) -> Result<FdReport> {
    let step = h * (norm(xi) + 1.0);
    let (value, jac) = map.linearize(xi)?;
    let value_scale = norm(&value);
    let mut worst_t = 0.0_f64;
    let mut worst_a = 0.0_f64;
    for _ in 0..probes {
        let v = rng.standard_normal(map.dim_in());
        let u = rng.standard_normal(map.dim_out());
        let jv = jac.apply(&v);
        let plus: Vec<f64> = xi.iter().zip(&v).map(|(x, d)| x + step * d).collect();
        let minus: Vec<f64> = xi.iter().zip(&v).map(|(x, d)| x - step * d).collect();
        let fd: Vec<f64> = sub(&map.apply(&plus)?, &map.apply(&minus)?)
            .into_iter()
            .map(|d| d / (2.0 * step))
            .collect();
        // Absolute floor keeps vanishing derivatives from dividing noise by
        // noise.
        let denom = norm(&jv).max(norm(&fd)).max(1e-9 * (value_scale + 1.0));
        worst_t = worst_t.max(norm(&sub(&jv, &fd)) / denom);

        let jtu = jac.apply_adjoint(&u);
        let lhs = dot(&jv, &u);
        let rhs = dot(&v, &jtu);
        let scale = (norm(&jv) * norm(&u)).max(norm(&v) * norm(&jtu)) + 1e-300;
        worst_a = worst_a.max((lhs - rhs).abs() / scale);
    }
    Ok(FdReport {
        max_rel_error_tangent: worst_t,
        max_rel_error_adjoint: worst_a,
        probes,
        tol_tangent: tol,
        tol_adjoint: 1e-10,
    })
}

/// Defaults: `h = 1e-5`, tolerance `1e-6`, 10 probes.
pub fn fd_check_default(map: &dyn DifferentiableMap, xi: &[f64], rng: &mut Rng) -> Result<FdReport> {
    fd_check(map, xi, 1e-5, 1e-6, 10, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffmap::{affine_scalar, exp, MapRef};
    use crate::error::Result;
    use crate::linalg::{FnOperator, OperatorRef};
    use std::sync::Arc;

    struct NegatedCotangent(MapRef);

    impl DifferentiableMap for NegatedCotangent {
        fn dim_in(&self) -> usize {
            self.0.dim_in()
        }
        fn dim_out(&self) -> usize {
            self.0.dim_out()
        }
        fn name(&self) -> String {
            "broken".into()
        }
        fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
            self.0.apply(xi)
        }
        fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
            let (v, j) = self.0.linearize(xi)?;
            let j: Arc<dyn crate::linalg::ImplicitOperator> = Arc::from(j);
            let (jf, ja) = (j.clone(), j.clone());
            let op = FnOperator::new(
                j.dim_in(),
                j.dim_out(),
                move |v| jf.apply(v),
                move |u| ja.apply_adjoint(u).into_iter().map(|x| -x).collect(),
            );
            Ok((v, Box::new(op)))
        }
    }

    #[test]
    fn linear_map_is_exact() {
        let mut rng = Rng::new(0);
        let r = fd_check_default(affine_scalar(4, 2.0, 1.0).as_ref(), &[0.1, 0.2, 0.3, 0.4], &mut rng)
            .unwrap();
        assert!(r.max_rel_error_tangent < 1e-9 && r.max_rel_error_adjoint < 1e-15);
    }

    #[test]
    fn exp_tangent_error_small() {
        let mut rng = Rng::new(1);
        let r = fd_check_default(exp(3).as_ref(), &[0.5, -1.0, 2.0], &mut rng).unwrap();
        assert!(r.max_rel_error_tangent <= 1e-6, "{r:?}");
        assert!(r.passed());
    }

    #[test]
    fn negated_cotangent_fails() {
        let mut rng = Rng::new(2);
        let broken = NegatedCotangent(exp(3));
        let r = fd_check_default(&broken, &[0.5, -1.0, 2.0], &mut rng).unwrap();
        assert!(r.max_rel_error_adjoint > 0.1);
        assert!(!r.passed());
    }
}
