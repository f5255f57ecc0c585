//! Truncated number-basis evaluation of the cat transfer.
//!
//! The photon cat is expanded up to `⌈α² + 6α + 10⌉` quanta, split on a
//! beamsplitter of angle g (`|n⟩|0⟩ → Σ_j √C(n,j) cos^{n−j}g (−sin g)^j
//! |n−j⟩|j⟩`), the photon mode is traced out, and the LRSPP state goes
//! through the amplitude-damping channel of transmissivity η.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CatState, StateError};

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpectrum {
    /// Density-matrix eigenvalues in decreasing order.
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    /// `−Σ λ ln λ` over the positive eigenvalues.
    pub entropy: f64,
    pub cutoff: usize,
}

pub fn cutoff(alpha: f64) -> usize {
    let a = alpha.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![1.0]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let mut row = vec![1.0; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        t.push(row);
    }
    t
}

/// Photon-number amplitudes of `N(|α⟩ + e^{iφ}|−α⟩)`, renormalized on the
/// truncated basis.
pub fn cat_amplitudes(cat: &CatState, dim: usize) -> Vec<Complex64> {
    let phase = Complex64::from_polar(1.0, cat.phi);
    let mut coh = 1.0;
    let mut out = Vec::with_capacity(dim);
    for n in 0..dim {
        if n > 0 {
            coh *= cat.alpha / (n as f64).sqrt();
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        out.push((1.0 + phase * sign) * coh);
    }
    let norm = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    out.into_iter().map(|c| c / norm).collect()
}

/// LRSPP density matrix after the coupler (before loss).
pub fn transferred_density(cat: &CatState, g: f64) -> DMatrix<Complex64> {
    let dim = cutoff(cat.alpha) + 1;
    let psi = cat_amplitudes(cat, dim);
    let binom = binomial_table(dim);
    let (s, c) = g.sin_cos();
    // amp[(m, j)]: m photons left in the input mode, j in the LRSPP mode.
    let mut amp = DMatrix::<Complex64>::zeros(dim, dim);
    for (n, &pn) in psi.iter().enumerate() {
        for j in 0..=n {
            let coeff = binom[n][j].sqrt() * c.powi((n - j) as i32) * (-s).powi(j as i32);
            amp[(n - j, j)] += pn * coeff;
        }
    }
    // ρ_b = Σ_m amp[m, j] amp[m, j']^*
    amp.transpose() * amp.map(|z| z.conj())
}

/// Amplitude damping with transmissivity `eta`.
pub fn amplitude_damping(rho: &DMatrix<Complex64>, eta: f64) -> DMatrix<Complex64> {
    let dim = rho.nrows();
    let binom = binomial_table(2 * dim);
    let loss = 1.0 - eta;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for m in 0..dim {
        for mp in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            let lmax = dim - m.max(mp);
            for l in 0..lmax {
                let w = (binom[m + l][l] * binom[mp + l][l]).sqrt()
                    * eta.powf(0.5 * (m + mp) as f64)
                    * loss.powi(l as i32);
                acc += rho[(m + l, mp + l)] * w;
            }
            out[(m, mp)] = acc;
        }
    }
    out
}

/// Spectrum of the LRSPP state for transfer angle `g` followed by loss
/// `eta = e^{−2κ0 x}`.
pub fn propagate(cat: &CatState, g: f64, eta: f64) -> Result<FockSpectrum, StateError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(StateError::Domain(format!(
            "transmissivity {eta} outside [0, 1]"
        )));
    }
    let rho = amplitude_damping(&transferred_density(cat, g), eta);
    let dim = rho.nrows();
    let trace = (0..dim).map(|i| rho[(i, i)].re).sum();
    let mut eigenvalues: Vec<f64> = rho.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let entropy = eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum();
    Ok(FockSpectrum {
        eigenvalues,
        trace,
        entropy,
        cutoff: dim - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_preserves_trace() {
        let rho = transferred_density(&CatState::even(2.0), 0.7);
        let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damping_preserves_trace() {
        let rho = transferred_density(&CatState::even(1.5), 1.1);
        let out = amplitude_damping(&rho, 0.4);
        let tr: f64 = (0..out.nrows()).map(|i| out[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_loss_gives_vacuum() {
        let spec = propagate(&CatState::even(2.0), 1.0, 0.0).unwrap();
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(spec.entropy.abs() < 1e-10);
    }
}
