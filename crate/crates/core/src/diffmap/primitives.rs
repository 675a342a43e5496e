//! Primitive differentiable maps and combinators.

use std::sync::Arc;

use super::{DifferentiableMap, MapRef};
use crate::error::{Error, Result};
use crate::linalg::{ImplicitOperator, OperatorRef};

/// Diagonal linear operator.
#[derive(Clone, Debug)]
pub struct DiagonalOperator(pub Vec<f64>);

impl ImplicitOperator for DiagonalOperator {
    fn dim_in(&self) -> usize {
        self.0.len()
    }
    fn dim_out(&self) -> usize {
        self.0.len()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.iter().zip(v).map(|(d, x)| d * x).collect()
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
    }
}

// ---------------------------------------------------------------------------
// Linear maps

struct Linear {
    op: Arc<dyn ImplicitOperator>,
    label: String,
}

impl DifferentiableMap for Linear {
    fn dim_in(&self) -> usize {
        self.op.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.op.dim_out()
    }
    fn name(&self) -> String {
        self.label.clone()
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.op.apply(xi))
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        Ok((self.op.apply(xi), Box::new(self.op.clone())))
    }
}

/// Wraps a linear operator (DFT, convolution, response) as a map.
pub fn linear(op: Arc<dyn ImplicitOperator>, label: impl Into<String>) -> MapRef {
    Arc::new(Linear {
        op,
        label: label.into(),
    })
}

pub fn identity(n: usize) -> MapRef {
    linear(Arc::new(crate::linalg::IdentityOperator(n)), "id")
}

struct Affine {
    scale: Vec<f64>,
    shift: Vec<f64>,
}

impl DifferentiableMap for Affine {
    fn dim_in(&self) -> usize {
        self.scale.len()
    }
    fn dim_out(&self) -> usize {
        self.scale.len()
    }
    fn name(&self) -> String {
        "affine".into()
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(xi
            .iter()
            .zip(&self.scale)
            .zip(&self.shift)
            .map(|((x, a), b)| a * x + b)
            .collect())
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        Ok((
            self.apply(xi)?,
            Box::new(DiagonalOperator(self.scale.clone())),
        ))
    }
}

/// Elementwise `scale * x + shift`.
pub fn affine(scale: Vec<f64>, shift: Vec<f64>) -> Result<MapRef> {
    if scale.len() != shift.len() {
        return Err(Error::mismatch("affine", scale.len(), shift.len()));
    }
    Ok(Arc::new(Affine { scale, shift }))
}

pub fn affine_scalar(n: usize, scale: f64, shift: f64) -> MapRef {
    Arc::new(Affine {
        scale: vec![scale; n],
        shift: vec![shift; n],
    })
}

struct Constant {
    dim_in: usize,
    value: Vec<f64>,
}

impl DifferentiableMap for Constant {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.value.len()
    }
    fn name(&self) -> String {
        "const".into()
    }
    fn apply(&self, _xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value.clone())
    }
    fn linearize(&self, _xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let (n, m) = (self.dim_in, self.value.len());
        let zero = crate::linalg::FnOperator::new(n, m, move |_| vec![0.0; m], move |_| vec![0.0; n]);
        Ok((self.value.clone(), Box::new(zero)))
    }
}

/// Map ignoring its input.
pub fn constant(dim_in: usize, value: Vec<f64>) -> MapRef {
    Arc::new(Constant { dim_in, value })
}

// ---------------------------------------------------------------------------
// Pointwise nonlinearities

/// A scalar function with its derivative, applied elementwise.
pub trait ScalarFunction: Send + Sync {
    fn name(&self) -> String;
    /// Value and derivative; `DomainError` outside the domain.
    fn eval(&self, t: f64) -> Result<(f64, f64)>;
}

struct Pointwise {
    n: usize,
    f: Arc<dyn ScalarFunction>,
}

impl Pointwise {
    fn eval_all(&self, xi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut val = Vec::with_capacity(xi.len());
        let mut der = Vec::with_capacity(xi.len());
        for &t in xi {
            let (v, d) = self.f.eval(t)?;
            val.push(v);
            der.push(d);
        }
        Ok((val, der))
    }
}

impl DifferentiableMap for Pointwise {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        self.f.name()
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_all(xi)?.0)
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let (v, d) = self.eval_all(xi)?;
        Ok((v, Box::new(DiagonalOperator(d))))
    }
}

pub fn pointwise(n: usize, f: Arc<dyn ScalarFunction>) -> MapRef {
    Arc::new(Pointwise { n, f })
}

struct Exp;
impl ScalarFunction for Exp {
    fn name(&self) -> String {
        "exp".into()
    }
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let e = t.exp();
        if !e.is_finite() {
            return Err(Error::DomainError(format!("exp overflow at {t}")));
        }
        Ok((e, e))
    }
}

struct Log;
impl ScalarFunction for Log {
    fn name(&self) -> String {
        "log".into()
    }
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::DomainError(format!("log of {t}")));
        }
        Ok((t.ln(), 1.0 / t))
    }
}

struct Sqrt;
impl ScalarFunction for Sqrt {
    fn name(&self) -> String {
        "sqrt".into()
    }
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::DomainError(format!("sqrt of {t}")));
        }
        let s = t.sqrt();
        Ok((s, 0.5 / s))
    }
}

struct Sigmoid;
impl ScalarFunction for Sigmoid {
    fn name(&self) -> String {
        "sigmoid".into()
    }
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let s = if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        };
        Ok((s, s * (1.0 - s)))
    }
}

struct Power(f64);
impl ScalarFunction for Power {
    fn name(&self) -> String {
        format!("pow{}", self.0)
    }
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let p = self.0;
        let integral = p.fract() == 0.0;
        if !integral && t < 0.0 || p < 1.0 && t == 0.0 {
            return Err(Error::DomainError(format!("{t}^{p}")));
        }
        if integral && p.abs() < i32::MAX as f64 {
            let k = p as i32;
            Ok((t.powi(k), p * t.powi(k - 1)))
        } else {
            Ok((t.powf(p), p * t.powf(p - 1.0)))
        }
    }
}

pub fn exp(n: usize) -> MapRef {
    pointwise(n, Arc::new(Exp))
}
pub fn log(n: usize) -> MapRef {
    pointwise(n, Arc::new(Log))
}
pub fn sqrt(n: usize) -> MapRef {
    pointwise(n, Arc::new(Sqrt))
}
/// Logistic function `1 / (1 + e^{-t})`.
pub fn sigmoid(n: usize) -> MapRef {
    pointwise(n, Arc::new(Sigmoid))
}
pub fn power(n: usize, p: f64) -> MapRef {
    pointwise(n, Arc::new(Power(p)))
}

// ---------------------------------------------------------------------------
// Combinators

fn common_input(maps: &[MapRef], context: &str) -> Result<usize> {
    let first = maps
        .first()
        .ok_or_else(|| Error::BadShape(format!("{context} of no maps")))?;
    for m in maps {
        if m.dim_in() != first.dim_in() {
            return Err(Error::mismatch(context, first.dim_in(), m.dim_in()));
        }
    }
    Ok(first.dim_in())
}

struct Sum {
    parts: Vec<MapRef>,
}

struct SumOperator(Vec<OperatorRef>);

impl ImplicitOperator for SumOperator {
    fn dim_in(&self) -> usize {
        self.0[0].dim_in()
    }
    fn dim_out(&self) -> usize {
        self.0[0].dim_out()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.0[0].apply(v);
        for op in &self.0[1..] {
            crate::linalg::vector::add_assign(&mut out, &op.apply(v));
        }
        out
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.0[0].apply_adjoint(u);
        for op in &self.0[1..] {
            crate::linalg::vector::add_assign(&mut out, &op.apply_adjoint(u));
        }
        out
    }
}

impl DifferentiableMap for Sum {
    fn dim_in(&self) -> usize {
        self.parts[0].dim_in()
    }
    fn dim_out(&self) -> usize {
        self.parts[0].dim_out()
    }
    fn name(&self) -> String {
        let names: Vec<_> = self.parts.iter().map(|p| p.name()).collect();
        format!("({})", names.join(" + "))
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.parts[0].apply(xi)?;
        for p in &self.parts[1..] {
            crate::linalg::vector::add_assign(&mut out, &p.apply(xi)?);
        }
        Ok(out)
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let mut out: Option<Vec<f64>> = None;
        let mut ops = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            let (v, j) = p.linearize(xi)?;
            match out.as_mut() {
                None => out = Some(v),
                Some(o) => crate::linalg::vector::add_assign(o, &v),
            }
            ops.push(j);
        }
        Ok((out.expect("nonempty"), Box::new(SumOperator(ops))))
    }
}

/// Elementwise sum of maps sharing input and output spaces.
pub fn add(parts: Vec<MapRef>) -> Result<MapRef> {
    common_input(&parts, "add")?;
    let out = parts[0].dim_out();
    if let Some(p) = parts.iter().find(|p| p.dim_out() != out) {
        return Err(Error::mismatch("add output", out, p.dim_out()));
    }
    Ok(Arc::new(Sum { parts }))
}

struct Product {
    a: MapRef,
    b: MapRef,
}

struct ProductOperator {
    va: Vec<f64>,
    vb: Vec<f64>,
    ja: OperatorRef,
    jb: OperatorRef,
}

impl ImplicitOperator for ProductOperator {
    fn dim_in(&self) -> usize {
        self.ja.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.va.len()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let da = self.ja.apply(v);
        let db = self.jb.apply(v);
        (0..self.va.len())
            .map(|i| da[i] * self.vb[i] + self.va[i] * db[i])
            .collect()
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let ua: Vec<f64> = u.iter().zip(&self.vb).map(|(x, y)| x * y).collect();
        let ub: Vec<f64> = u.iter().zip(&self.va).map(|(x, y)| x * y).collect();
        let mut out = self.ja.apply_adjoint(&ua);
        crate::linalg::vector::add_assign(&mut out, &self.jb.apply_adjoint(&ub));
        out
    }
}

impl DifferentiableMap for Product {
    fn dim_in(&self) -> usize {
        self.a.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.a.dim_out()
    }
    fn name(&self) -> String {
        format!("({} * {})", self.a.name(), self.b.name())
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let a = self.a.apply(xi)?;
        let b = self.b.apply(xi)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x * y).collect())
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let (va, ja) = self.a.linearize(xi)?;
        let (vb, jb) = self.b.linearize(xi)?;
        let out = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
        Ok((out, Box::new(ProductOperator { va, vb, ja, jb })))
    }
}

/// Elementwise product of two maps on the same input.
pub fn product(a: MapRef, b: MapRef) -> Result<MapRef> {
    common_input(&[a.clone(), b.clone()], "product")?;
    if a.dim_out() != b.dim_out() {
        return Err(Error::mismatch("product output", a.dim_out(), b.dim_out()));
    }
    Ok(Arc::new(Product { a, b }))
}

/// Block operator: stacked outputs (`shared_input`) or block diagonal.
struct BlockOperator {
    blocks: Vec<OperatorRef>,
    shared_input: bool,
}

impl ImplicitOperator for BlockOperator {
    fn dim_in(&self) -> usize {
        if self.shared_input {
            self.blocks[0].dim_in()
        } else {
            self.blocks.iter().map(|b| b.dim_in()).sum()
        }
    }
    fn dim_out(&self) -> usize {
        self.blocks.iter().map(|b| b.dim_out()).sum()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim_out());
        let mut offset = 0;
        for b in &self.blocks {
            if self.shared_input {
                out.extend(b.apply(v));
            } else {
                out.extend(b.apply(&v[offset..offset + b.dim_in()]));
                offset += b.dim_in();
            }
        }
        out
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_in()];
        let (mut uo, mut vo) = (0, 0);
        for b in &self.blocks {
            let part = b.apply_adjoint(&u[uo..uo + b.dim_out()]);
            uo += b.dim_out();
            if self.shared_input {
                crate::linalg::vector::add_assign(&mut out, &part);
            } else {
                out[vo..vo + b.dim_in()].copy_from_slice(&part);
                vo += b.dim_in();
            }
        }
        out
    }
}

struct Stack {
    parts: Vec<MapRef>,
    shared_input: bool,
}

impl Stack {
    fn inputs<'a>(&self, xi: &'a [f64]) -> Vec<&'a [f64]> {
        let mut offset = 0;
        self.parts
            .iter()
            .map(|p| {
                if self.shared_input {
                    xi
                } else {
                    let s = &xi[offset..offset + p.dim_in()];
                    offset += p.dim_in();
                    s
                }
            })
            .collect()
    }
}

impl DifferentiableMap for Stack {
    fn dim_in(&self) -> usize {
        if self.shared_input {
            self.parts[0].dim_in()
        } else {
            self.parts.iter().map(|p| p.dim_in()).sum()
        }
    }
    fn dim_out(&self) -> usize {
        self.parts.iter().map(|p| p.dim_out()).sum()
    }
    fn name(&self) -> String {
        let names: Vec<_> = self.parts.iter().map(|p| p.name()).collect();
        let sep = if self.shared_input { ", " } else { " ⊕ " };
        format!("[{}]", names.join(sep))
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim_out());
        for (p, x) in self.parts.iter().zip(self.inputs(xi)) {
            out.extend(p.apply(x)?);
        }
        Ok(out)
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let mut out = Vec::with_capacity(self.dim_out());
        let mut blocks = Vec::with_capacity(self.parts.len());
        for (p, x) in self.parts.iter().zip(self.inputs(xi)) {
            let (v, j) = p.linearize(x)?;
            out.extend(v);
            blocks.push(j);
        }
        Ok((
            out,
            Box::new(BlockOperator {
                blocks,
                shared_input: self.shared_input,
            }),
        ))
    }
}

/// Maps on a shared input with concatenated outputs.
pub fn stack(parts: Vec<MapRef>) -> Result<MapRef> {
    common_input(&parts, "stack")?;
    Ok(Arc::new(Stack {
        parts,
        shared_input: true,
    }))
}

/// Maps on consecutive blocks of the input, outputs concatenated.
pub fn direct_sum(parts: Vec<MapRef>) -> Result<MapRef> {
    if parts.is_empty() {
        return Err(Error::BadShape("direct sum of no maps".into()));
    }
    Ok(Arc::new(Stack {
        parts,
        shared_input: false,
    }))
}

struct SelectOperator {
    dim_in: usize,
    indices: Arc<Vec<usize>>,
}

impl ImplicitOperator for SelectOperator {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.indices.len()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| v[i]).collect()
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_in];
        for (&i, &x) in self.indices.iter().zip(u) {
            out[i] += x;
        }
        out
    }
}

/// Picks `indices` out of the input; also used for masks.
pub fn select(dim_in: usize, indices: Vec<usize>) -> Result<MapRef> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= dim_in) {
        return Err(Error::BadShape(format!(
            "selection index {bad} out of range {dim_in}"
        )));
    }
    let label = format!("select[{}]", indices.len());
    Ok(linear(
        Arc::new(SelectOperator {
            dim_in,
            indices: Arc::new(indices),
        }),
        label,
    ))
}

/// Contiguous slice `[start, start + len)` of the input.
pub fn slice(dim_in: usize, start: usize, len: usize) -> Result<MapRef> {
    select(dim_in, (start..start + len).collect())
}

/// Copies a scalar input to `n` outputs.
pub fn broadcast(n: usize) -> MapRef {
    select(1, vec![0; n]).expect("index 0 is valid")
}

/// Sum of all input entries.
pub fn sum_reduce(n: usize) -> MapRef {
    let op = crate::linalg::FnOperator::new(
        n,
        1,
        |v| vec![v.iter().sum()],
        move |u| vec![u[0]; n],
    );
    linear(Arc::new(op), "sum")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffmap::{compose, fd_check_default, jvp};
    use crate::linalg::Rng;

    fn all_primitives() -> Vec<(MapRef, bool)> {
        // (map, needs positive input)
        vec![
            (identity(3), false),
            (affine(vec![2.0, -1.0, 0.5], vec![1.0, 0.0, 3.0]).unwrap(), false),
            (exp(3), false),
            (log(3), true),
            (sqrt(3), true),
            (sigmoid(3), false),
            (power(3, 4.0), false),
            (power(3, 2.5), true),
            (add(vec![exp(3), power(3, 3.0), identity(3)]).unwrap(), false),
            (product(exp(3), sigmoid(3)).unwrap(), false),
            (stack(vec![exp(3), sum_reduce(3), sigmoid(3)]).unwrap(), false),
            (direct_sum(vec![exp(1), sigmoid(2)]).unwrap(), false),
            (select(3, vec![2, 0, 0]).unwrap(), false),
            (sum_reduce(3), false),
            (compose(broadcast(4), sum_reduce(3)).unwrap(), false),
            (constant(3, vec![1.0, 2.0]), false),
        ]
    }

    #[test]
    fn primitives_pass_fd_check() {
        let mut rng = Rng::new(3);
        for (map, positive) in all_primitives() {
            for _ in 0..5 {
                let mut x = rng.standard_normal(map.dim_in());
                if positive {
                    x.iter_mut().for_each(|v| *v = v.abs() + 0.5);
                }
                let rep = fd_check_default(map.as_ref(), &x, &mut rng).unwrap();
                assert!(rep.passed(), "{}: {rep:?}", map.name());
            }
        }
    }

    #[test]
    fn domain_guards() {
        assert!(matches!(log(1).apply(&[0.0]), Err(Error::DomainError(_))));
        assert!(matches!(sqrt(1).apply(&[-1.0]), Err(Error::DomainError(_))));
        assert!(exp(1).apply(&[1000.0]).is_err());
    }

    #[test]
    fn simple_values() {
        assert_eq!(exp(2).apply(&[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(affine_scalar(1, 2.0, 1.0).apply(&[1.0]).unwrap(), vec![3.0]);
        assert_eq!(broadcast(3).apply(&[2.0]).unwrap(), vec![2.0; 3]);
        assert_eq!(sigmoid(1).apply(&[0.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn stack_tangent_is_concatenation() {
        let parts = vec![exp(2), sigmoid(2), power(2, 3.0)];
        let s = stack(parts.clone()).unwrap();
        let x = [0.3, -0.7];
        let v = [1.1, 0.4];
        let want: Vec<f64> = parts
            .iter()
            .flat_map(|p| jvp(p.as_ref(), &x, &v).unwrap())
            .collect();
        assert_eq!(jvp(s.as_ref(), &x, &v).unwrap(), want);
    }

    #[test]
    fn tangent_is_linear() {
        let m = product(exp(2), power(2, 3.0)).unwrap();
        let (_, j) = m.linearize(&[0.2, -0.4]).unwrap();
        let v = [0.3, 1.2];
        let w = [-0.8, 0.5];
        let combo: Vec<f64> = v.iter().zip(&w).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let lhs = j.apply(&combo);
        let jv = j.apply(&v);
        let jw = j.apply(&w);
        for i in 0..2 {
            assert!((lhs[i] - (2.0 * jv[i] - 3.0 * jw[i])).abs() < 1e-12);
        }
    }
}
