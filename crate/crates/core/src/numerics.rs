//! Fixed-size dense complex matrices for one and two qubits.
//!
//! Everything here is a pure function of value inputs. The 4×4 Hermitian
//! eigensolver is a cyclic complex Jacobi method, and singular values come
//! from one-sided (Hestenes) Jacobi, which keeps small singular values
//! accurate to working precision instead of to its square root.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on ‖h − h†‖_F (relative to max(1, ‖h‖_F)) for Hermitian inputs.
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalues down to −PSD_CLAMP are treated as rounding noise and clamped to 0.
pub const PSD_CLAMP: f64 = 1e-10;
/// Reconstruction tolerance of the eigensolver.
pub const RECON_TOL: f64 = 1e-12;
/// Jacobi stopping threshold on off-diagonal mass relative to ‖H‖_F.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues whose magnitude is below this multiple of machine epsilon
/// (scaled by max(1, ‖h‖_F)) are numerically zero.
pub const EIG_NOISE_ULPS: f64 = 64.0;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

macro_rules! square_matrix {
    ($name:ident, $n:expr) => {
        /// Row-major square complex matrix.
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name(pub [C64; $n * $n]);

        impl $name {
            pub const DIM: usize = $n;

            pub fn zeros() -> Self {
                Self([ZERO; $n * $n])
            }

            pub fn identity() -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m[(i, i)] = ONE;
                }
                m
            }

            pub fn from_real_diagonal(d: [f64; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m[(i, i)] = C64::new(d[i], 0.0);
                }
                m
            }

            pub fn from_rows(rows: [[C64; $n]; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m[(i, j)] = rows[i][j];
                    }
                }
                m
            }

            pub fn from_real_rows(rows: [[f64; $n]; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m[(i, j)] = C64::new(rows[i][j], 0.0);
                    }
                }
                m
            }

            pub fn mul(&self, other: &Self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for k in 0..$n {
                        let a = self[(i, k)];
                        if a == ZERO {
                            continue;
                        }
                        for j in 0..$n {
                            out[(i, j)] += a * other[(k, j)];
                        }
                    }
                }
                out
            }

            pub fn adjoint(&self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        out[(j, i)] = self[(i, j)].conj();
                    }
                }
                out
            }

            pub fn conj(&self) -> Self {
                Self(self.0.map(|z| z.conj()))
            }

            pub fn transpose(&self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        out[(j, i)] = self[(i, j)];
                    }
                }
                out
            }

            pub fn trace(&self) -> C64 {
                (0..$n).map(|i| self[(i, i)]).sum()
            }

            pub fn scale(&self, s: f64) -> Self {
                Self(self.0.map(|z| z * s))
            }

            /// Frobenius norm.
            pub fn norm(&self) -> f64 {
                self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            }

            /// Frobenius distance ‖a − b‖_F.
            pub fn frobenius(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .zip(other.0.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            }

            /// ‖h − h†‖_F.
            pub fn hermiticity_defect(&self) -> f64 {
                self.frobenius(&self.adjoint())
            }

            /// (h + h†)/2.
            pub fn hermitian_part(&self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                    }
                }
                out
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }
        }

        impl Index<(usize, usize)> for $name {
            type Output = C64;
            #[inline]
            fn index(&self, (i, j): (usize, usize)) -> &C64 {
                &self.0[i * $n + j]
            }
        }

        impl IndexMut<(usize, usize)> for $name {
            #[inline]
            fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
                &mut self.0[i * $n + j]
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(mut self, rhs: Self) -> Self {
                for (a, b) in self.0.iter_mut().zip(rhs.0) {
                    *a += b;
                }
                self
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(mut self, rhs: Self) -> Self {
                for (a, b) in self.0.iter_mut().zip(rhs.0) {
                    *a -= b;
                }
                self
            }
        }

        impl Mul for $name {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                $name::mul(&self, &rhs)
            }
        }
    };
}

square_matrix!(CMat2, 2);
square_matrix!(CMat4, 4);

impl CMat2 {
    pub fn pauli_x() -> Self {
        Self::from_real_rows([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows([[1.0, 0.0], [0.0, -1.0]])
    }
}

/// Kronecker product in the computational basis |00⟩, |01⟩, |10⟩, |11⟩:
/// the first factor acts on the left (most significant) qubit.
pub fn kron(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut out = CMat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// σ_y ⊗ σ_y, which is real: anti-diagonal (−1, 1, 1, −1).
pub fn sigma_yy() -> CMat4 {
    kron(&CMat2::pauli_y(), &CMat2::pauli_y())
}

/// Eigen-decomposition of a Hermitian 4×4 matrix.
#[derive(Clone, Copy, Debug)]
pub struct HermEig {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    /// Unitary; column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMat4,
}

impl HermEig {
    /// V f(Λ) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat4 {
        let v = &self.eigenvectors;
        let mut out = CMat4::zeros();
        for k in 0..4 {
            let w = f(self.eigenvalues[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..4 {
                let vik = v[(i, k)] * w;
                for j in 0..4 {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMat4 {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[3]
    }
}

/// Rotation that diagonalizes the Hermitian 2×2 block [[app, apq], [apq*, aqq]].
///
/// Returns the unitary G = [[c, s], [−s·ū, c·ū]] (u = apq/|apq|) as its four
/// entries in row-major order, so that G† B G is diagonal.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> [C64; 4] {
    let mag = apq.norm();
    let u = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ub = u.conj();
    [C64::new(c, 0.0), C64::new(s, 0.0), -ub * s, ub * c]
}

/// A ← A·G on columns p, q.
#[inline]
fn rotate_columns(a: &mut CMat4, p: usize, q: usize, g: &[C64; 4]) {
    for k in 0..4 {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g[0] + akq * g[2];
        a[(k, q)] = akp * g[1] + akq * g[3];
    }
}

/// A ← G†·A on rows p, q.
#[inline]
fn rotate_rows(a: &mut CMat4, p: usize, q: usize, g: &[C64; 4]) {
    for k in 0..4 {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g[0].conj() * apk + g[2].conj() * aqk;
        a[(q, k)] = g[1].conj() * apk + g[3].conj() * aqk;
    }
}

fn off_diagonal_norm(a: &CMat4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigensolver (cyclic complex Jacobi). Eigenvalues ascending.
pub fn hermitian_eig(h: &CMat4) -> Result<HermEig> {
    let scale = h.norm().max(1.0);
    let defect = h.hermiticity_defect();
    if !(defect <= HERM_TOL * scale) {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let mut a = h.hermitian_part();
    let mut v = CMat4::identity();
    let stop = JACOBI_TOL * h.norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= stop {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[(p, q)];
                if apq == ZERO {
                    continue;
                }
                let g = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                rotate_columns(&mut a, p, q, &g);
                rotate_rows(&mut a, p, q, &g);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                rotate_columns(&mut v, p, q, &g);
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = CMat4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = a[(src, src)].re;
        for i in 0..4 {
            eigenvectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Magnitude below which an eigenvalue of `h` is indistinguishable from zero.
pub fn eig_noise_floor(h: &CMat4) -> f64 {
    EIG_NOISE_ULPS * f64::EPSILON * h.norm().max(1.0)
}

/// Principal square root of a Hermitian PSD matrix.
pub fn psd_sqrt(h: &CMat4) -> Result<CMat4> {
    let eig = hermitian_eig(h)?;
    psd_sqrt_from_eig(&eig, eig_noise_floor(h))
}

/// Square root from an existing decomposition; eigenvalues at or below
/// `floor` in magnitude are taken as exactly zero.
pub fn psd_sqrt_from_eig(eig: &HermEig, floor: f64) -> Result<CMat4> {
    if eig.min() < -PSD_CLAMP {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.reconstruct_with(|l| if l <= floor { 0.0 } else { l.sqrt() }))
}

/// Singular values of a 4×4 complex matrix, descending, by one-sided Jacobi.
pub fn singular_values(m: &CMat4) -> [f64; 4] {
    let mut a = *m;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..3 {
            for q in (p + 1)..4 {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for k in 0..4 {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                if gamma == ZERO || gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let g = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut a, p, q, &g);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [0.0; 4];
    for (j, s) in sv.iter_mut().enumerate() {
        *s = (0..4).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt();
    }
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}
