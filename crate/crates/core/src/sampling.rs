//! Seeded random two-qubit states.
//!
//! Samples are produced in fixed-size chunks. Chunk `c` of a run with seed
//! `s` draws from its own `ChaCha8Rng` seeded with `s ^ splitmix64(c)`, so
//! the output depends only on `(kind, count, seed)` and never on how chunks
//! are scheduled across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{measure_report, MeasureReport};
use crate::numerics::{hermitian_eig, kron, CMat2, CMat4, C64};
use crate::states::{mems, DensityMatrix};

/// Samples per chunk (and per independent generator stream).
pub const CHUNK_LEN: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleKind {
    /// Hilbert–Schmidt measure: Ginibre 4×4.
    GinibreFull,
    /// Ginibre 4×k, giving rank-k states.
    GinibreRank(usize),
    /// Ginibre with rank cycling 1, 2, 3, 4 over the sample index.
    GinibreMixedRanks,
    /// Dirichlet-weighted mixture of m Haar-random pure states.
    PureMixture(usize),
    /// (1 − w)·base + w·Ginibre, w uniform on (0, eps].
    PerturbAbout { base: DensityMatrix, eps: f64 },
    /// As `PerturbAbout` with base mems(γ), γ uniform on [0, 1] per sample.
    PerturbMemsFamily { eps: f64 },
}

impl EnsembleKind {
    fn validate(&self) -> Result<()> {
        match *self {
            EnsembleKind::GinibreRank(k) if !(1..=4).contains(&k) => Err(Error::InvalidEnsemble(
                format!("rank {k} not in 1..=4"),
            )),
            EnsembleKind::PureMixture(m) if !(1..=6).contains(&m) => Err(Error::InvalidEnsemble(
                format!("mixture size {m} not in 1..=6"),
            )),
            EnsembleKind::PerturbAbout { eps, .. } | EnsembleKind::PerturbMemsFamily { eps }
                if !(eps > 0.0 && eps <= 1.0) =>
            {
                Err(Error::InvalidEnsemble(format!("eps {eps} not in (0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    count: usize,
    seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidEnsemble("count must be at least 1".into()));
        }
        kind.validate()?;
        Ok(Self { kind, count, seed })
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunks(&self) -> usize {
        self.count.div_ceil(CHUNK_LEN)
    }

    /// Draws the sample with global index `index` from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> DensityMatrix {
        let drawn = match &self.kind {
            EnsembleKind::GinibreFull => ginibre_state(rng, 4),
            EnsembleKind::GinibreRank(k) => ginibre_state(rng, *k),
            EnsembleKind::GinibreMixedRanks => ginibre_state(rng, 1 + index % 4),
            EnsembleKind::PureMixture(m) => pure_mixture_state(rng, *m),
            EnsembleKind::PerturbAbout { base, eps } => perturb_about(base, *eps, rng),
            EnsembleKind::PerturbMemsFamily { eps } => {
                let gamma: f64 = rng.random();
                mems(gamma).and_then(|base| perturb_about(&base, *eps, rng))
            }
        };
        drawn.expect("validated ensemble yields physical states")
    }
}

/// SplitMix64 finalizer, used to derive per-chunk subseeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ splitmix64(chunk as u64))
}

/// Complex normal with E|z|² = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// ρ = G·G†/Tr(G·G†) with G a 4×k complex Ginibre matrix.
pub fn ginibre_state<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&rank) {
        return Err(Error::OutOfRange {
            name: "rank",
            value: rank as f64,
            lo: 1.0,
            hi: 4.0,
        });
    }
    loop {
        let mut g = [[C64::new(0.0, 0.0); 4]; 4];
        for row in g.iter_mut() {
            for z in row.iter_mut().take(rank) {
                *z = complex_gaussian(rng);
            }
        }
        let mut m = CMat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = (0..rank).map(|k| g[i][k] * g[j][k].conj()).sum();
            }
        }
        let tr = m.trace().re;
        if tr > 0.0 {
            return DensityMatrix::new(m.scale(1.0 / tr));
        }
    }
}

/// Haar-random unit vector in C⁴.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R) -> [C64; 4] {
    loop {
        let v: [C64; 4] = std::array::from_fn(|_| complex_gaussian(rng));
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.map(|z| z / n);
        }
    }
}

/// Convex mixture of m Haar-random pure states with flat Dirichlet weights.
pub fn pure_mixture_state<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<DensityMatrix> {
    if !(1..=6).contains(&m) {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            lo: 1.0,
            hi: 6.0,
        });
    }
    let weights: Vec<f64> = loop {
        let w: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            break w.into_iter().map(|x| x / total).collect();
        }
    };
    let mut acc = CMat4::zeros();
    for w in weights {
        let v = haar_vector(rng);
        for i in 0..4 {
            for j in 0..4 {
                acc[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    DensityMatrix::new(acc.hermitian_part())
}

/// (1 − w)·base + w·σ with σ a full-rank Ginibre state and w uniform on (0, eps].
pub fn perturb_about<R: Rng + ?Sized>(
    base: &DensityMatrix,
    eps: f64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let w = eps * (1.0 - rng.random::<f64>());
    let sigma = ginibre_state(rng, 4)?;
    base.mix(&sigma, w)
}

/// A Ginibre state confined to the support of `rho` (eigenvectors with
/// eigenvalue above `threshold`).
pub fn ginibre_in_support<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    threshold: f64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let eig = rho.eig();
    let mut projector = CMat4::zeros();
    for k in 0..4 {
        if eig.eigenvalues[k] > threshold {
            for i in 0..4 {
                for j in 0..4 {
                    projector[(i, j)] += eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)].conj();
                }
            }
        }
    }
    loop {
        let g = ginibre_state(rng, 4)?;
        let m = (projector * *g.matrix() * projector).hermitian_part();
        let tr = m.trace().re;
        if tr > 1e-12 {
            return DensityMatrix::new(m.scale(1.0 / tr));
        }
    }
}

/// exp(iεH) for a random GUE-like Hermitian H with ‖H‖_F ≈ 1.
pub fn unitary_near_identity<R: Rng + ?Sized>(eps: f64, rng: &mut R) -> CMat4 {
    let mut h = CMat4::zeros();
    for z in h.0.iter_mut() {
        *z = complex_gaussian(rng);
    }
    let h = h.hermitian_part();
    let h = h.scale(1.0 / h.norm().max(f64::MIN_POSITIVE));
    let eig = hermitian_eig(&h).expect("Hermitian by construction");
    let mut u = CMat4::zeros();
    for k in 0..4 {
        let phase = C64::from_polar(1.0, eps * eig.eigenvalues[k]);
        for i in 0..4 {
            for j in 0..4 {
                u[(i, j)] += eig.eigenvectors[(i, k)] * phase * eig.eigenvectors[(j, k)].conj();
            }
        }
    }
    u
}

/// Moves weight between the nonzero eigenvalues of `rho` (by at most about
/// `eps` each), keeping its eigenvectors and its kernel.
pub fn perturb_spectrum<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    eps: f64,
    threshold: f64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let eig = rho.eig();
    let support: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > threshold).collect();
    let mut p = eig.eigenvalues.map(|l| l.max(0.0));
    if support.len() > 1 {
        let mut z: Vec<f64> = support.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        z.iter_mut().for_each(|v| *v -= mean);
        for (&k, dz) in support.iter().zip(z) {
            p[k] = (p[k] + eps * dz).max(0.0);
        }
    }
    let total: f64 = p.iter().sum();
    let m = crate::numerics::HermEig {
        eigenvalues: p.map(|l| l / total),
        eigenvectors: eig.eigenvectors,
    }
    .reconstruct();
    DensityMatrix::new(m.hermitian_part())
}

/// Haar-random single-qubit unitary.
pub fn haar_unitary2<R: Rng + ?Sized>(rng: &mut R) -> CMat2 {
    loop {
        let (a, b) = (complex_gaussian(rng), complex_gaussian(rng));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n == 0.0 {
            continue;
        }
        let (a, b) = (a / n, b / n);
        let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        return CMat2::from_rows([[a * phase, -b.conj() * phase], [b * phase, a.conj() * phase]]);
    }
}

/// U_A ⊗ U_B with independent Haar factors.
pub fn random_local_unitary<R: Rng + ?Sized>(rng: &mut R) -> CMat4 {
    let ua = haar_unitary2(rng);
    let ub = haar_unitary2(rng);
    kron(&ua, &ub)
}

/// Runs `step` over every sample chunk (in parallel), returning one
/// accumulator per chunk in chunk order.
pub fn fold_chunks<A, I, F>(spec: &EnsembleSpec, init: I, step: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, usize, DensityMatrix) + Sync,
{
    (0..spec.chunks())
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(spec.seed, chunk);
            let mut acc = init();
            let start = chunk * CHUNK_LEN;
            let end = (start + CHUNK_LEN).min(spec.count);
            for index in start..end {
                let rho = spec.draw(index, &mut rng);
                step(&mut acc, index, rho);
            }
            acc
        })
        .collect()
}

/// Maps every sample through `f`, in sample order.
pub fn map_samples<T, F>(spec: &EnsembleSpec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, DensityMatrix) -> T + Sync,
{
    fold_chunks(spec, Vec::new, |acc, index, rho| acc.push(f(index, rho)))
        .into_iter()
        .flatten()
        .collect()
}

/// The states of an ensemble together with their measures, in sample order.
pub fn sample_batch(spec: &EnsembleSpec) -> Vec<(DensityMatrix, MeasureReport)> {
    map_samples(spec, |_, rho| {
        let report = measure_report(&rho);
        (rho, report)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{linear_entropy, purity, tangle};

    #[test]
    fn rank_one_ginibre_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let r = ginibre_state(&mut rng, 1).unwrap();
            assert!(linear_entropy(&r) <= 1e-10);
        }
    }

    #[test]
    fn hilbert_schmidt_mean_purity() {
        // E[Tr ρ²] = (N + K)/(N K + 1) = 8/17 for N = K = 4
        let spec = EnsembleSpec::new(EnsembleKind::GinibreFull, 10_000, 42).unwrap();
        let mean: f64 =
            map_samples(&spec, |_, r| purity(&r)).iter().sum::<f64>() / spec.count() as f64;
        assert!((mean - 8.0 / 17.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn ginibre_rank_matches_request() {
        for k in 1..=4 {
            let spec = EnsembleSpec::new(EnsembleKind::GinibreRank(k), 2000, 7 + k as u64).unwrap();
            let hits = map_samples(&spec, |_, r| r.rank(1e-9) == k)
                .into_iter()
                .filter(|&ok| ok)
                .count();
            assert!(hits as f64 >= 0.999 * spec.count() as f64, "rank {k}: {hits}");
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        assert_eq!(ginibre_state(&mut a, 4).unwrap(), ginibre_state(&mut b, 4).unwrap());
        assert_eq!(
            pure_mixture_state(&mut a, 3).unwrap(),
            pure_mixture_state(&mut b, 3).unwrap()
        );
        let base = mems(0.5).unwrap();
        assert_eq!(
            perturb_about(&base, 0.1, &mut a).unwrap(),
            perturb_about(&base, 0.1, &mut b).unwrap()
        );
    }

    #[test]
    fn pure_mixture_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(linear_entropy(&pure_mixture_state(&mut rng, 1).unwrap()) < 1e-10);
        for _ in 0..100 {
            pure_mixture_state(&mut rng, 6).unwrap();
        }
        assert!(pure_mixture_state(&mut rng, 0).is_err());
        assert!(pure_mixture_state(&mut rng, 7).is_err());
    }

    #[test]
    fn perturbation_stays_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base = mems(0.5).unwrap();
        for &eps in &[1e-6, 1e-3, 0.05] {
            for _ in 0..200 {
                let r = perturb_about(&base, eps, &mut rng).unwrap();
                assert!(r.matrix().frobenius(base.matrix()) <= 2.0 * eps);
                if eps == 0.05 {
                    assert!((tangle(&r) - 0.25).abs() <= 0.2);
                }
            }
        }
        assert!(perturb_about(&base, 0.0, &mut rng).is_err());
        assert!(perturb_about(&base, 1.5, &mut rng).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::new(EnsembleKind::GinibreFull, 0, 1).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::GinibreRank(5), 1, 1).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::PureMixture(0), 1, 1).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::PerturbMemsFamily { eps: 0.0 }, 1, 1).is_err());
        assert!(EnsembleSpec::new(
            EnsembleKind::PerturbAbout {
                base: mems(0.3).unwrap(),
                eps: 2.0
            },
            1,
            1
        )
        .is_err());
    }

    #[test]
    fn batch_is_exact_length_and_deterministic() {
        let spec = EnsembleSpec::new(EnsembleKind::GinibreMixedRanks, 1300, 3).unwrap();
        let a = sample_batch(&spec);
        assert_eq!(a.len(), 1300);
        let b = sample_batch(&spec);
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| sample_batch(&spec));
        assert_eq!(a, c);
        for (_, r) in &a {
            assert!(r.tangle <= 1.0 + 1e-12 && r.linear_entropy <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn support_states_stay_in_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = mems(0.4).unwrap();
        for _ in 0..50 {
            let s = ginibre_in_support(&base, 1e-12, &mut rng).unwrap();
            // |10⟩ is outside the support of mems(γ)
            assert!(s.get(2, 2).norm() < 1e-14);
        }
    }

    #[test]
    fn local_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let u = random_local_unitary(&mut rng);
            assert!((u.adjoint() * u).frobenius(&CMat4::identity()) < 1e-13);
        }
    }
}
