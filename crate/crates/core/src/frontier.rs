//! The tangle–mixedness plane: analytic Werner and MEMS curves, the
//! closed-form envelope, Monte Carlo scans and envelope certification.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{
    linear_entropy, measure_report, tangle, von_neumann_entropy, MeasureReport,
};
use crate::sampling::{
    fold_chunks, ginibre_in_support, perturb_about, perturb_spectrum, unitary_near_identity,
    EnsembleSpec,
};
use crate::states::{mems, mems_g, werner, DensityMatrix};

/// Linear entropy of mems(2/3), where the two MEMS branches meet.
pub const BRANCH_ENTROPY: f64 = 16.0 / 27.0;
/// Linear entropy of mems(0); beyond it the envelope is zero.
pub const SEPARABLE_ENTROPY: f64 = 8.0 / 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MixednessMetric {
    /// (4/3)(1 − Tr ρ²)
    Linear,
    /// −Tr ρ ln ρ / ln 4
    VonNeumannNormalized,
}

impl MixednessMetric {
    pub fn name(self) -> &'static str {
        match self {
            MixednessMetric::Linear => "linear",
            MixednessMetric::VonNeumannNormalized => "von-neumann-normalized",
        }
    }

    pub fn of_report(self, r: &MeasureReport) -> f64 {
        match self {
            MixednessMetric::Linear => r.linear_entropy,
            MixednessMetric::VonNeumannNormalized => r.von_neumann / 4f64.ln(),
        }
    }

    pub fn of_state(self, rho: &DensityMatrix) -> f64 {
        match self {
            MixednessMetric::Linear => linear_entropy(rho),
            MixednessMetric::VonNeumannNormalized => von_neumann_entropy(rho) / 4f64.ln(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub gamma: f64,
    pub tangle: f64,
    pub linear_entropy: f64,
}

fn gamma_grid(n: usize) -> Result<impl Iterator<Item = f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "curve needs at least 2 points, got {n}"
        )));
    }
    Ok((0..n).map(move |i| i as f64 / (n - 1) as f64))
}

/// Closed-form MEMS point: τ = γ², S_L = (2/3)[4g(2 − 3g) − γ²].
pub fn mems_point(gamma: f64) -> CurvePoint {
    let g = mems_g(gamma);
    CurvePoint {
        gamma,
        tangle: gamma * gamma,
        linear_entropy: 2.0 / 3.0 * (4.0 * g * (2.0 - 3.0 * g) - gamma * gamma),
    }
}

/// `n` MEMS points with γ uniform on [0, 1].
pub fn mems_curve(n: usize) -> Result<Vec<CurvePoint>> {
    Ok(gamma_grid(n)?.map(mems_point).collect())
}

/// `n` Werner points with γ uniform on [0, 1], measured from the states.
pub fn werner_curve(n: usize) -> Result<Vec<CurvePoint>> {
    gamma_grid(n)?
        .map(|gamma| {
            let rho = werner(gamma)?;
            Ok(CurvePoint {
                gamma,
                tangle: tangle(&rho),
                linear_entropy: linear_entropy(&rho),
            })
        })
        .collect()
}

/// Largest tangle any state can have at mixedness `s`.
///
/// Only the linear-entropy envelope is known in closed form. Upper MEMS
/// branch (γ ≥ 2/3): S_L = (8/3)(γ − γ²). Lower branch: S_L = 8/9 − 2γ²/3.
pub fn envelope_tangle(metric: MixednessMetric, s: f64) -> Result<f64> {
    if metric != MixednessMetric::Linear {
        return Err(Error::UnsupportedMetric(metric.name()));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(linear_envelope(s))
}

/// Linear-entropy envelope, tolerant of rounding just outside [0, 1].
pub fn linear_envelope(s: f64) -> f64 {
    if s <= BRANCH_ENTROPY {
        let gamma = (1.0 + (1.0 - 1.5 * s.max(0.0)).sqrt()) / 2.0;
        gamma * gamma
    } else if s < SEPARABLE_ENTROPY {
        4.0 / 3.0 - 1.5 * s
    } else {
        0.0
    }
}

/// Tangle of the MEMS family member whose mixedness equals `s`, or `None`
/// when `s` lies outside the family's range.
///
/// For `Linear` this is the analytic envelope. For `VonNeumannNormalized`
/// the entropy of mems(γ) decreases monotonically in γ, so γ is found by
/// bisection.
pub fn mems_family_tangle(metric: MixednessMetric, s: f64) -> Option<f64> {
    let mix = |gamma: f64| metric.of_state(&mems(gamma).expect("γ in [0, 1]"));
    let (hi_mix, lo_mix) = (mix(0.0), mix(1.0));
    if !(lo_mix..=hi_mix).contains(&s) {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mix(mid) > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    Some(gamma * gamma)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeBin {
    pub lo: f64,
    pub hi: f64,
    pub max_tangle: Option<f64>,
    /// Digest of the state that attained `max_tangle`.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierEnvelope {
    pub metric: MixednessMetric,
    pub bins: Vec<EnvelopeBin>,
    pub samples_total: usize,
}

impl FrontierEnvelope {
    pub fn occupied(&self) -> impl Iterator<Item = &EnvelopeBin> {
        self.bins.iter().filter(|b| b.max_tangle.is_some())
    }
}

/// One sampled point of a scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub tangle: f64,
    pub mixedness: f64,
}

fn bin_index(s: f64, bins: usize) -> usize {
    ((s * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

#[derive(Default)]
struct ScanChunk {
    points: Vec<ScanPoint>,
    best: Vec<Option<(f64, DensityMatrix)>>,
}

fn scan_impl(
    spec: &EnsembleSpec,
    metric: MixednessMetric,
    bins: usize,
    keep_points: bool,
) -> Result<(FrontierEnvelope, Vec<ScanPoint>)> {
    if bins < 10 {
        return Err(Error::InvalidArgument(format!(
            "scan needs at least 10 bins, got {bins}"
        )));
    }
    let chunks = fold_chunks(
        spec,
        || ScanChunk {
            points: Vec::new(),
            best: vec![None; bins],
        },
        |acc, _, rho| {
            let r = measure_report(&rho);
            let s = metric.of_report(&r);
            if keep_points {
                acc.points.push(ScanPoint {
                    tangle: r.tangle,
                    mixedness: s,
                });
            }
            let slot = &mut acc.best[bin_index(s, bins)];
            if slot.as_ref().is_none_or(|(t, _)| r.tangle > *t) {
                *slot = Some((r.tangle, rho));
            }
        },
    );

    let mut best: Vec<Option<(f64, DensityMatrix)>> = vec![None; bins];
    let mut points = Vec::new();
    for chunk in chunks {
        points.extend(chunk.points);
        for (merged, candidate) in best.iter_mut().zip(chunk.best) {
            if let Some((t, rho)) = candidate {
                if merged.as_ref().is_none_or(|(mt, _)| t > *mt) {
                    *merged = Some((t, rho));
                }
            }
        }
    }

    let width = 1.0 / bins as f64;
    let bins = best
        .into_iter()
        .enumerate()
        .map(|(i, b)| EnvelopeBin {
            lo: i as f64 * width,
            hi: if i + 1 == bins { 1.0 } else { (i + 1) as f64 * width },
            max_tangle: b.as_ref().map(|(t, _)| *t),
            witness: b.map(|(_, rho)| rho.digest()),
        })
        .collect();
    Ok((
        FrontierEnvelope {
            metric,
            bins,
            samples_total: spec.count(),
        },
        points,
    ))
}

/// Per-bin running maximum of the tangle over an ensemble.
pub fn scan(spec: &EnsembleSpec, metric: MixednessMetric, bins: usize) -> Result<FrontierEnvelope> {
    scan_impl(spec, metric, bins, false).map(|(env, _)| env)
}

/// As [`scan`], also returning every sampled point in sample order.
pub fn scan_with_points(
    spec: &EnsembleSpec,
    metric: MixednessMetric,
    bins: usize,
) -> Result<(FrontierEnvelope, Vec<ScanPoint>)> {
    scan_impl(spec, metric, bins, true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    /// max over samples of τ − envelope(S_L); positive means above the envelope.
    pub max_violation: f64,
    /// The sample attaining `max_violation`, kept only when it exceeds `tolerance`.
    pub violating_state: Option<DensityMatrix>,
    pub samples_total: usize,
    pub tolerance: f64,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

/// Signed excess of a state's tangle over the linear-entropy envelope.
pub fn envelope_violation(rho: &DensityMatrix) -> f64 {
    let r = measure_report(rho);
    r.tangle - linear_envelope(r.linear_entropy)
}

/// Checks every sample of every ensemble against the analytic envelope.
pub fn certify_all(specs: &[EnsembleSpec], tolerance: f64) -> Result<CertificationReport> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let mut worst: Option<(f64, DensityMatrix)> = None;
    let mut total = 0;
    for spec in specs {
        total += spec.count();
        let chunks = fold_chunks(
            spec,
            || None::<(f64, DensityMatrix)>,
            |acc, _, rho| {
                let v = envelope_violation(&rho);
                if acc.as_ref().is_none_or(|(w, _)| v > *w) {
                    *acc = Some((v, rho));
                }
            },
        );
        for (v, rho) in chunks.into_iter().flatten() {
            if worst.as_ref().is_none_or(|(w, _)| v > *w) {
                worst = Some((v, rho));
            }
        }
    }
    let (max_violation, state) = worst.ok_or_else(|| {
        Error::InvalidArgument("certification needs at least one ensemble".into())
    })?;
    Ok(CertificationReport {
        max_violation,
        violating_state: (max_violation > tolerance).then_some(state),
        samples_total: total,
        tolerance,
    })
}

pub fn certify(spec: &EnsembleSpec, tolerance: f64) -> Result<CertificationReport> {
    certify_all(std::slice::from_ref(spec), tolerance)
}

/// Settings for [`hill_climb`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClimbConfig {
    pub metric: MixednessMetric,
    pub steps: usize,
    /// Allowed |mixedness − start mixedness|.
    pub band: f64,
    pub eps_start: f64,
    pub eps_end: f64,
}

impl Default for ClimbConfig {
    fn default() -> Self {
        Self {
            metric: MixednessMetric::Linear,
            steps: 2000,
            band: 1e-3,
            eps_start: 0.1,
            eps_end: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClimbResult {
    pub state: DensityMatrix,
    pub start_tangle: f64,
    pub tangle: f64,
    pub start_mixedness: f64,
    pub mixedness: f64,
    pub accepted: usize,
}

/// Eigenvalues above this are treated as the support when proposing
/// support-preserving moves.
const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Greedy search for more tangle at (nearly) fixed mixedness.
///
/// Proposals cycle through four moves, each scaled by an eps that shrinks
/// geometrically over the run: mixing with a full-rank Ginibre state
/// (`perturb_about`), mixing with a random state inside the current support,
/// a random unitary exp(iεH), and a reshuffle of the nonzero eigenvalues.
/// Mixing alone cannot climb: concurrence is convex, so a mixture is only
/// more entangled if the admixed state is. A proposal is accepted when it
/// raises the tangle and keeps the mixedness within `band` of the start.
pub fn hill_climb<R: Rng + ?Sized>(
    start: &DensityMatrix,
    config: &ClimbConfig,
    rng: &mut R,
) -> Result<ClimbResult> {
    if config.steps == 0 {
        return Err(Error::InvalidArgument("hill_climb needs at least one step".into()));
    }
    if !(config.eps_start > 0.0 && config.eps_end > 0.0 && config.eps_start <= 1.0) {
        return Err(Error::InvalidArgument("eps schedule must lie in (0, 1]".into()));
    }
    let metric = config.metric;
    let start_tangle = tangle(start);
    let start_mixedness = metric.of_state(start);

    let mut current = *start;
    let mut current_tangle = start_tangle;
    let mut current_mixedness = start_mixedness;
    let mut accepted = 0;
    let ratio = config.eps_end / config.eps_start;

    for step in 0..config.steps {
        let frac = if config.steps > 1 {
            step as f64 / (config.steps - 1) as f64
        } else {
            0.0
        };
        let eps = config.eps_start * ratio.powf(frac);
        let candidate = match step % 4 {
            0 => perturb_about(&current, eps, rng)?,
            1 => {
                let w = eps * (1.0 - rng.random::<f64>());
                let sigma = ginibre_in_support(&current, SUPPORT_THRESHOLD, rng)?;
                current.mix(&sigma, w)?
            }
            2 => current.conjugate_by(&unitary_near_identity(eps, rng))?,
            _ => perturb_spectrum(&current, eps, SUPPORT_THRESHOLD, rng)?,
        };
        let t = tangle(&candidate);
        if t <= current_tangle {
            continue;
        }
        let s = metric.of_state(&candidate);
        if (s - start_mixedness).abs() <= config.band {
            current = candidate;
            current_tangle = t;
            current_mixedness = s;
            accepted += 1;
        }
    }

    Ok(ClimbResult {
        state: current,
        start_tangle,
        tangle: current_tangle,
        start_mixedness,
        mixedness: current_mixedness,
        accepted,
    })
}
