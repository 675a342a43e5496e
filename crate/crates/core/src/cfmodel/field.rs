//! Real fields from amplitude spectra by Hermitian harmonic synthesis.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;

use super::spectrum::{AmplitudeSpectrum, KBins, SpectrumParams};
use crate::diffmap::DifferentiableMap;
use crate::error::{Error, Result};
use crate::linalg::fft::{fft, Direction};
use crate::linalg::{Grid, ImplicitOperator, OperatorRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ModeRole {
    Zero,
    /// Real part of a conjugate pair; holds the flat index of the partner.
    Real(usize),
    /// Imaginary part of the pair whose real slot is given.
    Imag(usize),
    SelfConjugate,
}

/// The linear map from real per-mode coefficients to a real field,
/// `s_x = sum_k h_k e^{2 pi i k x}` with Hermitian `h`.
///
/// For each pair `(k, -k)` the coefficient at the smaller flat index is
/// the real part and the partner's is the imaginary part, with
/// `h_k = (a + i b) / sqrt(2)`, so every nonzero mode contributes its
/// coefficient variance to the field variance.
#[derive(Clone, Debug)]
pub struct HarmonicSynthesis {
    grid: Grid,
    roles: Vec<ModeRole>,
}

impl HarmonicSynthesis {
    pub fn new(grid: &Grid) -> Self {
        let roles = (0..grid.size())
            .map(|i| {
                let j = grid.negated_index(i);
                if i == 0 {
                    ModeRole::Zero
                } else if i == j {
                    ModeRole::SelfConjugate
                } else if i < j {
                    ModeRole::Real(j)
                } else {
                    ModeRole::Imag(j)
                }
            })
            .collect();
        HarmonicSynthesis {
            grid: grid.clone(),
            roles,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let n = self.grid.size();
        let mut h = vec![Complex64::new(0.0, 0.0); n];
        for (i, role) in self.roles.iter().enumerate() {
            match *role {
                ModeRole::Zero | ModeRole::SelfConjugate => h[i] = Complex64::new(c[i], 0.0),
                ModeRole::Real(j) => {
                    h[i] = Complex64::new(c[i], c[j]) / SQRT_2;
                    h[j] = h[i].conj();
                }
                ModeRole::Imag(_) => {}
            }
        }
        let s = fft(&h, &self.grid, Direction::Adjoint).expect("grid was validated");
        s.iter().map(|z| z.re * n as f64).collect()
    }

    fn analyze(&self, u: &[f64]) -> Vec<f64> {
        let field: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let big_u = fft(&field, &self.grid, Direction::Forward).expect("grid was validated");
        self.roles
            .iter()
            .enumerate()
            .map(|(i, role)| match *role {
                ModeRole::Zero | ModeRole::SelfConjugate => big_u[i].re,
                ModeRole::Real(_) => SQRT_2 * big_u[i].re,
                ModeRole::Imag(j) => SQRT_2 * big_u[j].im,
            })
            .collect()
    }
}

impl ImplicitOperator for HarmonicSynthesis {
    fn dim_in(&self) -> usize {
        self.grid.size()
    }
    fn dim_out(&self) -> usize {
        self.grid.size()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.synthesize(v)
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.analyze(u)
    }
}

/// `s = synth(A(|k|) xi_k)` for given amplitudes, linear in the
/// excitations.
pub fn correlated_field(amplitude: &[f64], excitations: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let bins = KBins::new(grid);
    if amplitude.len() != bins.len() + 1 || excitations.len() != grid.size() {
        return Err(Error::BadShape(format!(
            "correlated field on {} modes needs {} amplitudes and {} excitations",
            grid.size(),
            bins.len() + 1,
            grid.size()
        )));
    }
    let coeff: Vec<f64> = excitations
        .iter()
        .zip(&bins.bin_of)
        .map(|(x, b)| x * amplitude[b.map_or(0, |b| b + 1)])
        .collect();
    Ok(HarmonicSynthesis::new(grid).synthesize(&coeff))
}

/// The full correlated-field model: latents are the spectrum latents
/// followed by one excitation per grid point, output is the field.
pub struct CorrelatedField {
    spectrum: Arc<AmplitudeSpectrum>,
    synth: Arc<HarmonicSynthesis>,
    /// Amplitude slot (0 for the zero mode) of every mode.
    slot: Vec<usize>,
}

impl CorrelatedField {
    pub fn new(params: SpectrumParams, grid: &Grid) -> Result<Self> {
        let spectrum = AmplitudeSpectrum::new(params, grid)?;
        let slot = spectrum.bins().bin_of.iter().map(|b| b.map_or(0, |b| b + 1)).collect();
        Ok(CorrelatedField {
            spectrum: Arc::new(spectrum),
            synth: Arc::new(HarmonicSynthesis::new(grid)),
            slot,
        })
    }

    pub fn spectrum(&self) -> &Arc<AmplitudeSpectrum> {
        &self.spectrum
    }

    pub fn grid(&self) -> &Grid {
        self.synth.grid()
    }

    pub fn spectrum_dim(&self) -> usize {
        self.spectrum.dim_in()
    }

    fn split<'a>(&self, xi: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        xi.split_at(self.spectrum_dim())
    }
}

struct FieldJacobian {
    amp_jac: OperatorRef,
    synth: Arc<HarmonicSynthesis>,
    weights: Vec<f64>,
    excitations: Vec<f64>,
    slot: Vec<usize>,
    n_amp: usize,
}

impl ImplicitOperator for FieldJacobian {
    fn dim_in(&self) -> usize {
        self.amp_jac.dim_in() + self.weights.len()
    }
    fn dim_out(&self) -> usize {
        self.weights.len()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (vp, ve) = v.split_at(self.amp_jac.dim_in());
        let da = self.amp_jac.apply(vp);
        let coeff: Vec<f64> = (0..self.weights.len())
            .map(|k| self.weights[k] * ve[k] + da[self.slot[k]] * self.excitations[k])
            .collect();
        self.synth.synthesize(&coeff)
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let c = self.synth.analyze(u);
        let mut da = vec![0.0; self.n_amp];
        for k in 0..c.len() {
            da[self.slot[k]] += c[k] * self.excitations[k];
        }
        let mut out = self.amp_jac.apply_adjoint(&da);
        out.extend(c.iter().zip(&self.weights).map(|(c, w)| c * w));
        out
    }
}

impl DifferentiableMap for CorrelatedField {
    fn dim_in(&self) -> usize {
        self.spectrum_dim() + self.synth.grid().size()
    }
    fn dim_out(&self) -> usize {
        self.synth.grid().size()
    }
    fn name(&self) -> String {
        format!("correlated_field{:?}", self.synth.grid().shape())
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let (xp, xe) = self.split(xi);
        let amp = self.spectrum.apply(xp)?;
        let coeff: Vec<f64> = xe.iter().zip(&self.slot).map(|(x, &s)| x * amp[s]).collect();
        Ok(self.synth.synthesize(&coeff))
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let (xp, xe) = self.split(xi);
        let (amp, amp_jac) = self.spectrum.linearize(xp)?;
        let weights: Vec<f64> = self.slot.iter().map(|&s| amp[s]).collect();
        let coeff: Vec<f64> = xe.iter().zip(&weights).map(|(x, w)| x * w).collect();
        let value = self.synth.synthesize(&coeff);
        Ok((
            value,
            Box::new(FieldJacobian {
                amp_jac,
                synth: self.synth.clone(),
                weights,
                excitations: xe.to_vec(),
                slot: self.slot.clone(),
                n_amp: amp.len(),
            }),
        ))
    }
}
