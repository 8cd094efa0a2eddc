//! Local diagonal filters (Procrustean-type concentration).
//!
//! A filter A⊗B with A = diag(a0, a1), B = diag(b0, b1) maps
//! ρ ↦ (A⊗B)ρ(A⊗B)†/p, succeeding with probability p = Tr[(A⊗B)ρ(A⊗B)†].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{linear_entropy, tangle};
use crate::states::DensityMatrix;

/// Success probabilities at or below this are treated as zero.
pub const MIN_SUCCESS: f64 = 1e-14;
/// Tangles closer than this are considered tied in [`best_filter`].
pub const TANGLE_TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LocalFilter {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

impl LocalFilter {
    pub fn new(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self> {
        for (name, value) in [("a0", a0), ("a1", a1), ("b0", b0), ("b1", b1)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Self { a0, a1, b0, b1 })
    }

    pub fn identity() -> Self {
        Self {
            a0: 1.0,
            a1: 1.0,
            b0: 1.0,
            b1: 1.0,
        }
    }

    /// A = diag(κ, 1), B = diag(1, κ): damps |00⟩ and |11⟩ by κ, |01⟩ by κ².
    pub fn symmetric(kappa: f64) -> Result<Self> {
        Self::new(kappa, 1.0, 1.0, kappa)
    }

    /// Identity on A, B = diag(1, κ).
    pub fn one_sided(kappa: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, kappa)
    }

    /// Diagonal of A⊗B in the computational basis.
    pub fn diagonal(&self) -> [f64; 4] {
        [
            self.a0 * self.b0,
            self.a0 * self.b1,
            self.a1 * self.b0,
            self.a1 * self.b1,
        ]
    }

    /// Applying `self` then `other` equals applying the entrywise product.
    pub fn compose(&self, other: &LocalFilter) -> LocalFilter {
        LocalFilter {
            a0: self.a0 * other.a0,
            a1: self.a1 * other.a1,
            b0: self.b0 * other.b0,
            b1: self.b1 * other.b1,
        }
    }

    fn key(&self) -> [f64; 4] {
        [self.a0, self.a1, self.b0, self.b1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterOutcome {
    pub state: DensityMatrix,
    pub success_prob: f64,
}

pub fn apply_filter(rho: &DensityMatrix, f: &LocalFilter) -> Result<FilterOutcome> {
    let d = f.diagonal();
    let mut m = *rho.matrix();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] *= d[i] * d[j];
        }
    }
    let p = m.trace().re;
    if !(p > MIN_SUCCESS) {
        return Err(Error::VanishingSuccess { prob: p });
    }
    let state = DensityMatrix::new(m.scale(1.0 / p))?;
    Ok(FilterOutcome {
        state,
        success_prob: p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub filter: LocalFilter,
    pub linear_entropy: f64,
    pub tangle: f64,
    pub success_prob: f64,
}

/// Measures the outcome of every filter in `schedule`, in order. Filters
/// whose success probability vanishes on `start` are skipped.
pub fn trajectory(start: &DensityMatrix, schedule: &[LocalFilter]) -> Result<Vec<TrajectoryPoint>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty filter schedule".into()));
    }
    let mut out = Vec::with_capacity(schedule.len());
    for f in schedule {
        match apply_filter(start, f) {
            Ok(o) => out.push(TrajectoryPoint {
                filter: *f,
                linear_entropy: linear_entropy(&o.state),
                tangle: tangle(&o.state),
                success_prob: o.success_prob,
            }),
            Err(Error::VanishingSuccess { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Which qubits a κ-schedule filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterMode {
    TwoSided,
    OneSided,
}

/// `steps` values of κ geometric from 1 down to `kappa_min`.
pub fn kappa_schedule(steps: usize, kappa_min: f64) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..steps)
            .map(|i| kappa_min.powf(i as f64 / (steps - 1) as f64))
            .collect(),
    }
}

/// The default κ sweep (1 → 1e-3) as filters of the requested mode.
pub fn default_schedule(steps: usize, mode: FilterMode) -> Result<Vec<(f64, LocalFilter)>> {
    kappa_schedule(steps, 1e-3)
        .into_iter()
        .map(|k| {
            let f = match mode {
                FilterMode::TwoSided => LocalFilter::symmetric(k)?,
                FilterMode::OneSided => LocalFilter::one_sided(k)?,
            };
            Ok((k, f))
        })
        .collect()
}

/// Exhaustive search over filters with entries in {1/g, 2/g, …, 1} for the
/// largest output tangle. Ties (within `TANGLE_TIE`) go to the higher
/// success probability, then to the lexicographically smaller filter.
pub fn best_filter(
    start: &DensityMatrix,
    grid_resolution: usize,
) -> Result<(LocalFilter, FilterOutcome)> {
    if grid_resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 2, got {grid_resolution}"
        )));
    }
    let g = grid_resolution;
    let level = |i: usize| (i + 1) as f64 / g as f64;
    let total = g.pow(4);
    let candidates: Vec<Option<(LocalFilter, FilterOutcome, f64)>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let f = LocalFilter {
                a0: level(idx / (g * g * g)),
                a1: level((idx / (g * g)) % g),
                b0: level((idx / g) % g),
                b1: level(idx % g),
            };
            apply_filter(start, &f)
                .ok()
                .map(|o| (f, o, tangle(&o.state)))
        })
        .collect();

    let mut best: Option<(LocalFilter, FilterOutcome, f64)> = None;
    for cand in candidates.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((bf, bo, bt)) => {
                let (f, o, t) = (&cand.0, &cand.1, cand.2);
                if t > bt + TANGLE_TIE {
                    true
                } else if t < bt - TANGLE_TIE {
                    false
                } else if o.success_prob != bo.success_prob {
                    o.success_prob > bo.success_prob
                } else {
                    f.key() < bf.key()
                }
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.map(|(f, o, _)| (f, o))
        .ok_or(Error::VanishingSuccess { prob: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::concurrence;
    use crate::states::{ansatz, bell, maximally_mixed, mems, AnsatzParams, BellKind};

    /// Closed form for mems(γ ≥ 2/3) under the symmetric κ filter:
    /// γ' |Φ₊⟩⟨Φ₊| + (1 − γ')|01⟩⟨01| with γ' = γ/(γ + (1 − γ)κ²).
    fn filtered_gamma(gamma: f64, kappa: f64) -> f64 {
        gamma / (gamma + (1.0 - gamma) * kappa * kappa)
    }

    #[test]
    fn identity_filter() {
        let rho = mems(0.7).unwrap();
        let o = apply_filter(&rho, &LocalFilter::identity()).unwrap();
        assert_eq!(o.success_prob, 1.0);
        assert!(o.state.matrix().frobenius(rho.matrix()) < 1e-15);
    }

    #[test]
    fn symmetric_filter_matches_closed_form() {
        for &gamma in &[0.7, 0.8, 0.95] {
            for &kappa in &[0.5, 0.1, 1e-3] {
                let o = apply_filter(&mems(gamma).unwrap(), &LocalFilter::symmetric(kappa).unwrap())
                    .unwrap();
                let gp = filtered_gamma(gamma, kappa);
                assert!((concurrence(&o.state) - gp).abs() < 1e-12);
                let want_p = gamma * kappa * kappa + (1.0 - gamma) * kappa.powi(4);
                assert!((o.success_prob - want_p).abs() < 1e-15);
            }
        }
        let o = apply_filter(&mems(0.8).unwrap(), &LocalFilter::symmetric(1e-3).unwrap()).unwrap();
        assert!(tangle(&o.state) >= 0.999);
        assert!(linear_entropy(&o.state) <= 1e-3);
    }

    #[test]
    fn unbalancing_a_bell_state_lowers_tangle() {
        for &k in &[0.9, 0.5, 0.1] {
            let f = LocalFilter::new(k, 1.0, 1.0, 1.0).unwrap();
            let o = apply_filter(&bell(BellKind::PhiPlus), &f).unwrap();
            let want = 2.0 * k / (1.0 + k * k);
            assert!((concurrence(&o.state) - want).abs() < 1e-12);
            assert!(tangle(&o.state) < 1.0);
        }
    }

    #[test]
    fn vanishing_success_is_reported() {
        let z = crate::numerics::C64::new(0.0, 0.0);
        let one = crate::numerics::C64::new(1.0, 0.0);
        let rho = crate::states::pure_from_vector([one, z, z, z]).unwrap();
        let f = LocalFilter::new(1e-8, 1.0, 1e-8, 1.0).unwrap();
        assert!(matches!(apply_filter(&rho, &f), Err(Error::VanishingSuccess { .. })));
        let pts = trajectory(&rho, &[f, LocalFilter::identity()]).unwrap();
        assert_eq!(pts.len(), 1);
    }

    #[test]
    fn filter_validation() {
        assert!(LocalFilter::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(LocalFilter::new(1.1, 1.0, 1.0, 1.0).is_err());
        assert!(LocalFilter::symmetric(0.5).is_ok());
    }

    #[test]
    fn trajectories() {
        let kappas = [1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.05, 0.01];
        let sched: Vec<_> = kappas.iter().map(|&k| LocalFilter::symmetric(k).unwrap()).collect();
        let pts = trajectory(&mems(0.8).unwrap(), &sched).unwrap();
        assert_eq!(pts.len(), kappas.len());
        assert!(pts.windows(2).all(|w| w[1].tangle > w[0].tangle));

        let pts = trajectory(&mems(0.4).unwrap(), &sched).unwrap();
        assert!(pts.last().unwrap().tangle > 0.16);

        let start = mems(0.55).unwrap();
        let pts = trajectory(&start, &[LocalFilter::identity()]).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].tangle - tangle(&start)).abs() < 1e-15);
        assert!((pts[0].linear_entropy - linear_entropy(&start)).abs() < 1e-15);
        assert!(trajectory(&start, &[]).is_err());
    }

    #[test]
    fn schedules() {
        let k = kappa_schedule(100, 1e-3);
        assert_eq!(k.len(), 100);
        assert_eq!(k[0], 1.0);
        assert!((k[99] - 1e-3).abs() < 1e-15);
        assert_eq!(kappa_schedule(1, 1e-3), vec![1.0]);
        let s = default_schedule(3, FilterMode::OneSided).unwrap();
        assert_eq!(s[0].1, LocalFilter::identity());
    }

    #[test]
    fn best_filter_cases() {
        let (f, o) = best_filter(&bell(BellKind::PhiPlus), 5).unwrap();
        assert_eq!(f, LocalFilter::identity());
        assert!((tangle(&o.state) - 1.0).abs() < 1e-12);

        let (_, o) = best_filter(&mems(0.8).unwrap(), 20).unwrap();
        assert!(tangle(&o.state) >= 0.99);

        let (_, o) = best_filter(&maximally_mixed(), 6).unwrap();
        assert_eq!(tangle(&o.state), 0.0);

        assert!(best_filter(&maximally_mixed(), 1).is_err());
    }

    #[test]
    fn filters_never_entangle_diagonal_states() {
        let rho = ansatz(&AnsatzParams::new(0.1, 0.2, 0.3, 0.4, 0.0).unwrap()).unwrap();
        for &k in &[1.0, 0.5, 0.01] {
            for f in [
                LocalFilter::symmetric(k).unwrap(),
                LocalFilter::new(k, 0.3, 1.0, k).unwrap(),
            ] {
                let o = apply_filter(&rho, &f).unwrap();
                assert_eq!(tangle(&o.state), 0.0);
            }
        }
    }

    #[test]
    fn success_prob_is_one_only_for_scalar_action() {
        let rho = mems(0.5).unwrap(); // support excludes |10⟩
        let f = LocalFilter::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(apply_filter(&rho, &f).unwrap().success_prob, 1.0);
        let f = LocalFilter::new(1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(apply_filter(&rho, &f).unwrap().success_prob < 1.0);
    }

    #[test]
    fn composition() {
        let rho = mems(0.6).unwrap();
        let f = LocalFilter::new(0.3, 0.9, 0.7, 0.5).unwrap();
        let g = LocalFilter::new(0.8, 0.2, 1.0, 0.6).unwrap();
        let two_step = apply_filter(&apply_filter(&rho, &f).unwrap().state, &g).unwrap();
        let one_step = apply_filter(&rho, &f.compose(&g)).unwrap();
        assert!(two_step.state.matrix().frobenius(one_step.state.matrix()) < 1e-12);
        assert_eq!(f.compose(&g), g.compose(&f));
    }
}
