//! Entanglement and mixedness functionals of a two-qubit state.
//!
//! Units: entanglement of formation in bits, von Neumann entropy in nats.

use crate::numerics::{
    eig_noise_floor, hermitian_eig, psd_sqrt_from_eig, sigma_yy, singular_values, CMat4, HermEig,
};
use crate::states::DensityMatrix;

/// Square roots of the eigenvalues of ρρ̃, descending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WoottersSpectrum {
    pub lambdas: [f64; 4],
}

impl WoottersSpectrum {
    pub fn concurrence(&self) -> f64 {
        let [l1, l2, l3, l4] = self.lambdas;
        (l1 - l2 - l3 - l4).max(0.0)
    }
}

/// Every measure for one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureReport {
    pub purity: f64,
    pub linear_entropy: f64,
    /// nats
    pub von_neumann: f64,
    pub concurrence: f64,
    pub tangle: f64,
    /// bits
    pub eof: f64,
    pub negativity: f64,
}

impl MeasureReport {
    /// (name, value) pairs in a fixed order.
    pub fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("purity", self.purity),
            ("linear_entropy", self.linear_entropy),
            ("von_neumann", self.von_neumann),
            ("concurrence", self.concurrence),
            ("tangle", self.tangle),
            ("eof", self.eof),
            ("negativity", self.negativity),
        ]
    }
}

/// ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
pub fn spin_flip(rho: &DensityMatrix) -> CMat4 {
    spin_flip_matrix(rho.matrix())
}

fn spin_flip_matrix(m: &CMat4) -> CMat4 {
    let y = sigma_yy();
    y * m.conj() * y
}

pub fn wootters_lambdas(rho: &DensityMatrix) -> WoottersSpectrum {
    wootters_from_eig(rho, &rho.eig())
}

// The λ's are the singular values of √ρ·√ρ̃: (√ρ√ρ̃)(√ρ√ρ̃)† = √ρ ρ̃ √ρ,
// which is similar to ρρ̃. √ρ̃ is the spin flip of √ρ.
fn wootters_from_eig(rho: &DensityMatrix, eig: &HermEig) -> WoottersSpectrum {
    let sqrt_rho = psd_sqrt_from_eig(eig, eig_noise_floor(rho.matrix()))
        .expect("validated state is PSD");
    let sqrt_flip = spin_flip_matrix(&sqrt_rho);
    WoottersSpectrum {
        lambdas: singular_values(&(sqrt_rho * sqrt_flip)),
    }
}

pub fn concurrence(rho: &DensityMatrix) -> f64 {
    wootters_lambdas(rho).concurrence()
}

pub fn tangle(rho: &DensityMatrix) -> f64 {
    concurrence(rho).powi(2)
}

/// Binary Shannon entropy in bits, with h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// E_F as a function of the tangle.
pub fn eof_from_tangle(tau: f64) -> f64 {
    let tau = tau.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - tau).sqrt()) / 2.0)
}

pub fn eof(rho: &DensityMatrix) -> f64 {
    eof_from_tangle(tangle(rho))
}

/// Tr ρ².
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
    rho.matrix().0.iter().map(|z| z.norm_sqr()).sum()
}

pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    linear_entropy_from_purity(purity(rho))
}

pub fn linear_entropy_from_purity(p: f64) -> f64 {
    4.0 / 3.0 * (1.0 - p)
}

fn entropy_of_spectrum(eigenvalues: &[f64; 4]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}

/// −Tr ρ ln ρ in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eig().eigenvalues)
}

/// Partial transpose over the second qubit.
pub fn partial_transpose(m: &CMat4) -> CMat4 {
    let mut out = CMat4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for ap in 0..2 {
                for bp in 0..2 {
                    out[(2 * a + bp, 2 * ap + b)] = m[(2 * a + b, 2 * ap + bp)];
                }
            }
        }
    }
    out
}

/// Sum of the magnitudes of the negative eigenvalues of ρ^{T_B}.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose(rho.matrix());
    let eig = hermitian_eig(&pt).expect("partial transpose of a state is Hermitian");
    eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum()
}

pub fn measure_report(rho: &DensityMatrix) -> MeasureReport {
    let eig = rho.eig();
    let purity = purity(rho);
    let concurrence = wootters_from_eig(rho, &eig).concurrence();
    let tangle = concurrence * concurrence;
    MeasureReport {
        purity,
        linear_entropy: linear_entropy_from_purity(purity),
        von_neumann: entropy_of_spectrum(&eig.eigenvalues),
        concurrence,
        tangle,
        eof: eof_from_tangle(tangle),
        negativity: negativity(rho),
    }
}
