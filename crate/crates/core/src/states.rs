//! Validated two-qubit density matrices and the named state families:
//! Bell states, Werner states, the diagonal-plus-coherence ansatz and the
//! maximally entangled mixed states (MEMS).
//!
//! Basis ordering is |00⟩, |01⟩, |10⟩, |11⟩ throughout.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, CMat4, HermEig, C64, HERM_TOL, PSD_CLAMP};

/// Tolerance on |Tr ρ − 1|.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on the ansatz normalization x + y + a + b + γ = 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A Hermitian, unit-trace, positive semi-definite 4×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMat4,
}

impl DensityMatrix {
    /// Validates `raw` without repairing it.
    pub fn new(raw: CMat4) -> Result<Self> {
        Self::validate(&raw)?;
        Ok(Self { mat: raw })
    }

    fn validate(raw: &CMat4) -> Result<HermEig> {
        if !raw.is_finite() {
            return Err(Error::NotHermitian {
                deviation: f64::NAN,
            });
        }
        let deviation = raw.hermiticity_defect();
        if deviation > HERM_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = raw.trace();
        let trace_dev = (trace - C64::new(1.0, 0.0)).norm();
        if trace_dev > TRACE_TOL {
            return Err(Error::TraceNotOne {
                trace: trace.re,
                deviation: trace_dev,
            });
        }
        let eig = hermitian_eig(raw)?;
        if eig.min() < -PSD_CLAMP {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min(),
            });
        }
        Ok(eig)
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat4 {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn eig(&self) -> HermEig {
        hermitian_eig(&self.mat).expect("validated state is Hermitian")
    }

    /// Eigenvalues ascending with tiny negative rounding clamped to zero.
    pub fn spectrum(&self) -> [f64; 4] {
        self.eig().eigenvalues.map(|l| l.max(0.0))
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.eig().eigenvalues.iter().filter(|&&l| l > threshold).count()
    }

    /// Convex combination (1 − w)·self + w·other.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange {
                name: "w",
                value: w,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let m = self.mat.scale(1.0 - w) + other.mat.scale(w);
        DensityMatrix::new(m.hermitian_part())
    }

    /// (U ρ U†) for a unitary U.
    pub fn conjugate_by(&self, u: &CMat4) -> Result<DensityMatrix> {
        DensityMatrix::new((*u * self.mat * u.adjoint()).hermitian_part())
    }

    /// Short hex digest of the exact matrix entries.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for z in &self.mat.0 {
            hasher.update(z.re.to_le_bytes());
            hasher.update(z.im.to_le_bytes());
        }
        let bytes = hasher.finalize();
        bytes[..8].iter().fold(String::with_capacity(16), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// The four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// Unnormalized amplitudes (the 1/√2 is applied by the projector).
    fn amplitudes(self) -> [f64; 4] {
        match self {
            BellKind::PhiPlus => [1.0, 0.0, 0.0, 1.0],
            BellKind::PhiMinus => [1.0, 0.0, 0.0, -1.0],
            BellKind::PsiPlus => [0.0, 1.0, 1.0, 0.0],
            BellKind::PsiMinus => [0.0, 1.0, -1.0, 0.0],
        }
    }
}

pub fn bell(kind: BellKind) -> DensityMatrix {
    let v = kind.amplitudes();
    let mut m = CMat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = C64::new(0.5 * v[i] * v[j], 0.0);
        }
    }
    DensityMatrix::new(m).expect("Bell projector is a state")
}

pub fn maximally_mixed() -> DensityMatrix {
    DensityMatrix::new(CMat4::identity().scale(0.25)).expect("I/4 is a state")
}

/// |ψ⟩⟨ψ| / ⟨ψ|ψ⟩.
pub fn pure_from_vector(psi: [C64; 4]) -> Result<DensityMatrix> {
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::ZeroVector);
    }
    let mut m = CMat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = psi[i] * psi[j].conj() / norm2;
        }
    }
    DensityMatrix::new(m)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// ((1 − γ)/4)·I + γ·|Φ₊⟩⟨Φ₊|.
pub fn werner(gamma: f64) -> Result<DensityMatrix> {
    check_gamma(gamma)?;
    let d = (1.0 - gamma) / 4.0;
    let h = gamma / 2.0;
    let mut m = CMat4::from_real_diagonal([d + h, d, d, d + h]);
    m[(0, 3)] = C64::new(h, 0.0);
    m[(3, 0)] = C64::new(h, 0.0);
    DensityMatrix::new(m)
}

/// Branch function of the MEMS family: γ/2 for γ ≥ 2/3, else 1/3.
pub fn mems_g(gamma: f64) -> f64 {
    if gamma >= 2.0 / 3.0 {
        gamma / 2.0
    } else {
        1.0 / 3.0
    }
}

/// Maximally entangled mixed state: diagonal (g, 1 − 2g, 0, g) with
/// coherence γ/2 between |00⟩ and |11⟩.
pub fn mems(gamma: f64) -> Result<DensityMatrix> {
    check_gamma(gamma)?;
    let g = mems_g(gamma);
    let mut m = CMat4::from_real_diagonal([g, 1.0 - 2.0 * g, 0.0, g]);
    m[(0, 3)] = C64::new(gamma / 2.0, 0.0);
    m[(3, 0)] = C64::new(gamma / 2.0, 0.0);
    DensityMatrix::new(m)
}

/// Diagonal populations x, y, a, b plus a |Φ₊⟩ weight γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnsatzParams {
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl AnsatzParams {
    pub fn new(x: f64, y: f64, a: f64, b: f64, gamma: f64) -> Result<Self> {
        let p = Self { x, y, a, b, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("x", self.x),
            ("y", self.y),
            ("a", self.a),
            ("b", self.b),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        let sum = self.x + self.y + self.a + self.b + self.gamma;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NormalizationViolated { sum });
        }
        Ok(())
    }

    /// Parameters that reproduce `mems(gamma)` (b = 0 throughout).
    pub fn mems(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if gamma >= 2.0 / 3.0 {
            Self::new(0.0, 0.0, 1.0 - gamma, 0.0, gamma)
        } else {
            let x = 1.0 / 3.0 - gamma / 2.0;
            Self::new(x, x, 1.0 / 3.0, 0.0, gamma)
        }
    }

    /// S_L of the ansatz state in closed form.
    pub fn linear_entropy(&self) -> f64 {
        let Self { x, y, a, b, gamma } = *self;
        4.0 / 3.0 * (1.0 - a * a - b * b - x * x - y * y - gamma * (x + y) - gamma * gamma)
    }

    /// Concurrence of the ansatz state in closed form.
    pub fn concurrence(&self) -> f64 {
        (self.gamma - 2.0 * (self.a * self.b).sqrt()).max(0.0)
    }
}

/// Diagonal (x + γ/2, a, b, y + γ/2) with corner coherences γ/2.
pub fn ansatz(p: &AnsatzParams) -> Result<DensityMatrix> {
    p.validate()?;
    let h = p.gamma / 2.0;
    let mut m = CMat4::from_real_diagonal([p.x + h, p.a, p.b, p.y + h]);
    m[(0, 3)] = C64::new(h, 0.0);
    m[(3, 0)] = C64::new(h, 0.0);
    DensityMatrix::new(m)
}

/// Parses the plain-text matrix format: four rows of four `re,im` entries,
/// whitespace separated. Blank lines and `#` comments are ignored.
pub fn parse_matrix_text(text: &str) -> Result<CMat4> {
    let mut m = CMat4::zeros();
    let mut row = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if row == 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: "more than four matrix rows".into(),
            });
        }
        let entries: Vec<&str> = content.split_whitespace().collect();
        if entries.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 4 entries, found {}", entries.len()),
            });
        }
        for (col, entry) in entries.iter().enumerate() {
            m[(row, col)] = parse_complex(entry).map_err(|msg| Error::Parse { line: line_no, msg })?;
        }
        row += 1;
    }
    if row != 4 {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected 4 matrix rows, found {row}"),
        });
    }
    Ok(m)
}

fn parse_complex(entry: &str) -> std::result::Result<C64, String> {
    let (re, im) = entry
        .split_once(',')
        .ok_or_else(|| format!("entry `{entry}` is not of the form re,im"))?;
    let re: f64 = re
        .parse()
        .map_err(|_| format!("bad real part `{re}` in `{entry}`"))?;
    let im: f64 = im
        .parse()
        .map_err(|_| format!("bad imaginary part `{im}` in `{entry}`"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("non-finite entry `{entry}`"));
    }
    Ok(C64::new(re, im))
}

/// Writes a matrix in the text format. Entries use the shortest
/// representation that parses back to the same bits.
pub fn format_matrix_text(m: &CMat4) -> String {
    let mut out = String::new();
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
