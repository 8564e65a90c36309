//! Distribution plumbing shared by the zero and eigenphase experiments:
//! matrix sizing, unit-mean normalization, conductor splits, CDF
//! discrepancy, histograms, and the numerical search for the excised-model
//! cutoff constant.

use rayon::prelude::*;

use crate::ensembles::{self, EnsembleSample, Group};
use crate::error::{Error, Result};

/// Matrix size matched to a family truncated at discriminants <= x:
/// round(log(sqrt(M) x / (2 pi e))) with M the form's level, doubled for the
/// groups whose spectrum is conjugation-paired so the mean density of phases
/// above 0 matches the mean density of zeros.
pub fn n_std(x: f64, level: i64, group: Group) -> Result<usize> {
    let arg = (level as f64).sqrt() * x / (2.0 * std::f64::consts::PI * std::f64::consts::E);
    let raw = arg.ln();
    if !raw.is_finite() || raw < 1.0 {
        return Err(Error::Invalid(format!(
            "x = {x} too small for level {level}: log {raw:.3} < 1"
        )));
    }
    let base = raw.round() as usize;
    Ok(if group.has_paired_spectrum() { 2 * base } else { base })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    LowestZero,
    LowestPhase,
    CentralValue,
    LambdaAtOne,
}

/// A finite sample keyed by discriminant (arithmetic side) or draw index
/// (matrix side), with the normalization it has undergone, if any.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    pub kind: SampleKind,
    samples: Vec<(i64, f64)>,
    normalization: Option<f64>,
}

impl EmpiricalDistribution {
    pub fn new(kind: SampleKind, samples: Vec<(i64, f64)>) -> Result<EmpiricalDistribution> {
        if samples.is_empty() {
            return Err(Error::Invalid("empty sample set".into()));
        }
        if let Some((k, v)) = samples.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite sample {v} at key {k}")));
        }
        Ok(EmpiricalDistribution { kind, samples, normalization: None })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty sets
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(_, v)| v)
    }

    pub fn samples(&self) -> &[(i64, f64)] {
        &self.samples
    }

    pub fn mean(&self) -> f64 {
        self.values().sum::<f64>() / self.len() as f64
    }

    /// The mean divided out by normalize_to_unit_mean, if it was applied.
    pub fn normalization(&self) -> Option<f64> {
        self.normalization
    }

    pub fn normalize_to_unit_mean(&self) -> Result<EmpiricalDistribution> {
        let mean = self.mean();
        if !(mean > 0.0) {
            return Err(Error::Invalid(format!("cannot normalize: sample mean {mean} not positive")));
        }
        Ok(EmpiricalDistribution {
            kind: self.kind,
            samples: self.samples.iter().map(|&(k, v)| (k, v / mean)).collect(),
            normalization: Some(mean),
        })
    }

    /// Split at the median of the key ordering, the "small conductor" half
    /// first; an odd straggler goes to the small half.
    pub fn split_small_large(&self) -> Result<(EmpiricalDistribution, EmpiricalDistribution)> {
        if self.len() < 2 {
            return Err(Error::Invalid("need at least 2 samples to split".into()));
        }
        let mut sorted = self.samples.clone();
        sorted.sort_by_key(|&(k, _)| k);
        let cut = sorted.len().div_ceil(2);
        let large = sorted.split_off(cut);
        Ok((
            EmpiricalDistribution { kind: self.kind, samples: sorted, normalization: self.normalization },
            EmpiricalDistribution { kind: self.kind, samples: large, normalization: self.normalization },
        ))
    }
}

/// Fraction of v that is <= x.
fn ecdf(sorted: &[f64], x: f64) -> f64 {
    let count = sorted.partition_point(|&s| s <= x);
    count as f64 / sorted.len() as f64
}

/// Area between two empirical CDFs approximated by a piecewise-constant
/// rule: each consecutive pair of eval points contributes
/// |F_a(mid) - F_b(mid)| times the interval width.
pub fn cdf_discrepancy(a: &[f64], b: &[f64], eval_points: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Invalid("cdf_discrepancy needs nonempty samples".into()));
    }
    if eval_points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("eval points must be strictly increasing".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in eval_points.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        total += (ecdf(&sa, mid) - ecdf(&sb, mid)).abs() * (w[1] - w[0]);
    }
    Ok(total)
}

/// Two-sample Kolmogorov-Smirnov statistic, sup |F_a - F_b|.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut worst = 0.0f64;
    for &x in sa.iter().chain(sb.iter()) {
        worst = worst.max((ecdf(&sa, x) - ecdf(&sb, x)).abs());
    }
    worst
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((p / 100.0) * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// 40 equally spaced evaluation points spanning the pooled 1st to 99th
/// percentile range of the two samples.
pub fn default_eval_points(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut pool: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    pool.sort_by(f64::total_cmp);
    let lo = percentile(&pool, 1.0);
    let mut hi = percentile(&pool, 99.0);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let n = 40;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// Histogram normalized to integrate to 1 over the samples that land in
/// range; out-of-range samples are ignored.
pub fn density_histogram(values: &[f64], n_bins: usize, range: (f64, f64)) -> Result<Vec<HistogramBin>> {
    let (lo, hi) = range;
    if n_bins == 0 || !(hi > lo) {
        return Err(Error::Invalid(format!("bad histogram request: {n_bins} bins over [{lo}, {hi}]")));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    let mut in_range = 0usize;
    for &v in values {
        if v >= lo && v <= hi {
            let idx = (((v - lo) / width) as usize).min(n_bins - 1);
            counts[idx] += 1;
            in_range += 1;
        }
    }
    if in_range == 0 {
        return Err(Error::Invalid("no samples in histogram range".into()));
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| HistogramBin {
            lo: lo + width * i as f64,
            hi: lo + width * (i + 1) as f64,
            density: c as f64 / (in_range as f64 * width),
        })
        .collect())
}

/// How "the lowest eigenvalue" is read off a phase list. The paired-spectrum
/// groups make the two readings agree; for U(N) the smallest positive phase
/// mirrors "first zero above the central point" and is the default. Phases
/// are taken on the circle, so a draw with no phase in (0, pi] contributes
/// its smallest phase plus 2 pi rather than nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseConvention {
    SmallestPositive,
    SmallestAbsolute,
}

pub fn lowest_phase(phases: &[f64], convention: PhaseConvention) -> Option<f64> {
    match convention {
        PhaseConvention::SmallestPositive => phases
            .iter()
            .map(|t| t.rem_euclid(2.0 * std::f64::consts::PI))
            .min_by(f64::total_cmp),
        PhaseConvention::SmallestAbsolute => {
            phases.iter().map(|t| t.abs()).min_by(f64::total_cmp)
        }
    }
}

pub fn lowest_phase_distribution(
    samples: &[EnsembleSample],
    convention: PhaseConvention,
) -> Result<EmpiricalDistribution> {
    let pairs = samples
        .iter()
        .map(|s| {
            lowest_phase(&s.eigenphases, convention)
                .map(|p| (s.draw_index as i64, p))
                .ok_or_else(|| Error::Invalid("sample with no eigenphases".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalDistribution::new(SampleKind::LowestPhase, pairs)
}

pub fn lambda_distribution(samples: &[EnsembleSample]) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(
        SampleKind::LambdaAtOne,
        samples.iter().map(|s| (s.draw_index as i64, s.lambda_at_one)).collect(),
    )
}

/// Monte Carlo mean of the lowest positive eigenphase over n_samples draws.
pub fn mean_lowest_eigenphase(group: Group, n: usize, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Invalid("n_samples must be positive".into()));
    }
    let total: f64 = (0..n_samples as u64)
        .into_par_iter()
        .map(|d| {
            let s = ensembles::sample(group, n, seed, d)?;
            lowest_phase(&s.eigenphases, PhaseConvention::SmallestPositive)
                .ok_or_else(|| Error::Invalid("draw with no eigenphases".into()))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a + b))?;
    Ok(total / n_samples as f64)
}

/// Which experiment the cutoff search compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffMode {
    /// Lowest zeros against lowest eigenphases of the excised ensemble; the
    /// zero side is fixed while the eigenphase side depends on the cutoff.
    ZerosVsExcised,
    /// Central values against characteristic polynomial values at 1, both
    /// normalized to unit mean and both truncated at the candidate cutoff.
    ValuesVsCharpoly,
}

#[derive(Debug, Clone)]
pub struct CutoffSearchConfig {
    /// Weight of the modeled family; sets the cutoff scale exp((1-k) n_std/2).
    pub weight: u32,
    /// Undoubled matrix size; draws come from SO(2 n_std).
    pub n_std: usize,
    /// Size of the common pool of draws reused across candidates.
    pub pool: usize,
    pub seed: u64,
    /// Candidates keeping fewer than this many samples on either side are
    /// marked infeasible and excluded from the argmin.
    pub min_kept: usize,
}

#[derive(Debug, Clone)]
pub struct CutoffSearchResult {
    pub mode: CutoffMode,
    pub candidates: Vec<f64>,
    /// One entry per candidate; infinity marks an infeasible candidate.
    pub discrepancies: Vec<f64>,
    /// Matrix-side samples surviving each candidate's cutoff.
    pub kept: Vec<usize>,
    pub argmin: f64,
}

/// Grid search for the cutoff constant. One pool of plain SO(2 n_std) draws
/// is shared by every candidate (common random numbers keep the discrepancy
/// curve smooth), and the evaluation points are fixed once from the
/// untruncated data so the curve is comparable across candidates.
pub fn estimate_c_std(
    observed: &EmpiricalDistribution,
    grid: &[f64],
    mode: CutoffMode,
    cfg: &CutoffSearchConfig,
) -> Result<CutoffSearchResult> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty candidate grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("candidate grid must be strictly increasing".into()));
    }
    let pool: Vec<EnsembleSample> = (0..cfg.pool as u64)
        .into_par_iter()
        .map(|d| ensembles::sample(Group::SpecialOrthogonal, 2 * cfg.n_std, cfg.seed, d))
        .collect::<Result<Vec<_>>>()?;
    let scale = (((1.0 - cfg.weight as f64) * cfg.n_std as f64) / 2.0).exp();

    let (obs_norm, matrix_all, eval_points) = match mode {
        CutoffMode::ZerosVsExcised => {
            let obs: Vec<f64> = observed.normalize_to_unit_mean()?.values().collect();
            let phases: Vec<(f64, f64)> = pool
                .iter()
                .map(|s| {
                    (
                        lowest_phase(&s.eigenphases, PhaseConvention::SmallestPositive).unwrap_or(0.0),
                        s.lambda_at_one,
                    )
                })
                .collect();
            let all_norm = {
                let mean = phases.iter().map(|&(p, _)| p).sum::<f64>() / phases.len() as f64;
                phases.iter().map(|&(p, _)| p / mean).collect::<Vec<_>>()
            };
            let pts = default_eval_points(&obs, &all_norm);
            (obs, phases, pts)
        }
        CutoffMode::ValuesVsCharpoly => {
            let obs: Vec<f64> = observed.normalize_to_unit_mean()?.values().collect();
            let lambdas: Vec<f64> = pool.iter().map(|s| s.lambda_at_one).collect();
            let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
            let lam_norm: Vec<(f64, f64)> = lambdas.iter().map(|&l| (l / mean, l / mean)).collect();
            let pts = default_eval_points(&obs, &lam_norm.iter().map(|&(l, _)| l).collect::<Vec<_>>());
            (obs, lam_norm, pts)
        }
    };

    let mut discrepancies = Vec::with_capacity(grid.len());
    let mut kept_counts = Vec::with_capacity(grid.len());
    for &c in grid {
        let cutoff = c * scale;
        match mode {
            CutoffMode::ZerosVsExcised => {
                // excise on the raw lambda scale, then renormalize survivors
                let kept: Vec<f64> =
                    matrix_all.iter().filter(|&&(_, l)| l >= cutoff).map(|&(p, _)| p).collect();
                kept_counts.push(kept.len());
                if kept.len() < cfg.min_kept {
                    discrepancies.push(f64::INFINITY);
                    continue;
                }
                let mean = kept.iter().sum::<f64>() / kept.len() as f64;
                if !(mean > 0.0) {
                    discrepancies.push(f64::INFINITY);
                    continue;
                }
                let kept_norm: Vec<f64> = kept.iter().map(|p| p / mean).collect();
                discrepancies.push(cdf_discrepancy(&obs_norm, &kept_norm, &eval_points)?);
            }
            CutoffMode::ValuesVsCharpoly => {
                // both sides already unit-mean; truncate both at the cutoff
                let kept_obs: Vec<f64> = obs_norm.iter().copied().filter(|&v| v >= cutoff).collect();
                let kept_lam: Vec<f64> =
                    matrix_all.iter().map(|&(l, _)| l).filter(|&l| l >= cutoff).collect();
                kept_counts.push(kept_lam.len());
                if kept_obs.len() < cfg.min_kept || kept_lam.len() < cfg.min_kept {
                    discrepancies.push(f64::INFINITY);
                    continue;
                }
                discrepancies.push(cdf_discrepancy(&kept_obs, &kept_lam, &eval_points)?);
            }
        }
    }

    let argmin_idx = discrepancies
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NonConvergence {
            what: "cutoff search",
            detail: format!("all {} candidates infeasible (pool {}, min kept {})", grid.len(), cfg.pool, cfg.min_kept),
        })?;
    Ok(CutoffSearchResult {
        mode,
        candidates: grid.to_vec(),
        discrepancies,
        kept: kept_counts,
        argmin: grid[argmin_idx],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, CMatrix};

    fn dist(kind: SampleKind, pairs: &[(i64, f64)]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(kind, pairs.to_vec()).unwrap()
    }

    #[test]
    fn n_std_reproduces_quoted_sizes() {
        assert_eq!(n_std(40_000.0, 3, Group::Unitary).unwrap(), 8);
        assert_eq!(n_std(40_000.0, 3, Group::SpecialOrthogonal).unwrap(), 16);
        assert_eq!(n_std(1e6, 3, Group::Unitary).unwrap(), 12);
        assert_eq!(n_std(1e6, 3, Group::SpecialOrthogonal).unwrap(), 24);
        assert_eq!(n_std(1e6, 3, Group::UnitarySymplectic).unwrap(), 24);
        assert!(n_std(10.0, 3, Group::Unitary).is_err());
        // monotone nondecreasing in x
        let mut prev = 0;
        for e in 2..8 {
            let v = n_std(10f64.powi(e), 3, Group::Unitary).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn normalization_basics() {
        let d = dist(SampleKind::LowestZero, &[(5, 2.0), (8, 2.0), (12, 2.0)]);
        let n = d.normalize_to_unit_mean().unwrap();
        assert!(n.values().all(|v| (v - 1.0).abs() < 1e-15));
        assert_eq!(n.normalization(), Some(2.0));

        let d = dist(SampleKind::LowestZero, &[(1, 0.3), (2, 1.7), (3, 2.9)]);
        let n = d.normalize_to_unit_mean().unwrap();
        assert!((n.mean() - 1.0).abs() < 1e-12);
        // commutes with positive scaling
        let scaled = dist(SampleKind::LowestZero, &[(1, 3.0 * 0.3), (2, 3.0 * 1.7), (3, 3.0 * 2.9)]);
        let ns = scaled.normalize_to_unit_mean().unwrap();
        for (a, b) in n.values().zip(ns.values()) {
            assert!((a - b).abs() < 1e-14);
        }

        let zero = dist(SampleKind::CentralValue, &[(1, 0.0), (2, 0.0)]);
        assert!(zero.normalize_to_unit_mean().is_err());
        assert!(EmpiricalDistribution::new(SampleKind::LowestZero, vec![]).is_err());
        assert!(EmpiricalDistribution::new(SampleKind::LowestZero, vec![(1, f64::NAN)]).is_err());
    }

    #[test]
    fn split_follows_discriminant_order() {
        let d = dist(SampleKind::LowestZero, &[(12, 3.0), (5, 1.0), (13, 4.0), (8, 2.0)]);
        let (small, large) = d.split_small_large().unwrap();
        assert_eq!(small.samples(), &[(5, 1.0), (8, 2.0)]);
        assert_eq!(large.samples(), &[(12, 3.0), (13, 4.0)]);

        let odd = dist(SampleKind::LowestZero, &[(1, 1.0), (2, 2.0), (3, 3.0)]);
        let (s, l) = odd.split_small_large().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(l.len(), 1);

        let tiny = dist(SampleKind::LowestZero, &[(1, 1.0)]);
        assert!(tiny.split_small_large().is_err());
    }

    #[test]
    fn discrepancy_geometry() {
        let a = vec![0.0; 200];
        let b = vec![1.0; 200];
        let pts: Vec<f64> = (0..41).map(|i| i as f64 / 40.0).collect();
        let d = cdf_discrepancy(&a, &b, &pts).unwrap();
        assert!((d - 1.0).abs() < 0.03, "point-mass separation gave {d}");
        assert_eq!(cdf_discrepancy(&a, &a, &pts).unwrap(), 0.0);
        let dba = cdf_discrepancy(&b, &a, &pts).unwrap();
        assert!((d - dba).abs() < 1e-15, "not symmetric");
        assert!(cdf_discrepancy(&a, &b, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn eval_points_span_percentiles() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
        let pts = default_eval_points(&a, &b);
        assert_eq!(pts.len(), 40);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts[0] >= 0.0 && pts[39] <= 149.0);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let bins = density_histogram(&[0.5], 1, (0.0, 2.0)).unwrap();
        assert!((bins[0].density - 0.5).abs() < 1e-15);

        let vals: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let bins = density_histogram(&vals, 17, (0.0, 1.0)).unwrap();
        let integral: f64 = bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert!((integral - 1.0).abs() < 1e-12);

        assert!(density_histogram(&vals, 0, (0.0, 1.0)).is_err());
        assert!(density_histogram(&vals, 5, (1.0, 1.0)).is_err());
        assert!(density_histogram(&vals, 5, (7.0, 9.0)).is_err());
    }

    #[test]
    fn phase_conventions() {
        let phases = [-2.0, -0.4, 1.3];
        assert_eq!(lowest_phase(&phases, PhaseConvention::SmallestPositive), Some(1.3));
        assert!((lowest_phase(&phases, PhaseConvention::SmallestAbsolute).unwrap() - 0.4).abs() < 1e-15);
        // all-negative draw wraps around instead of vanishing
        let neg = [-2.0, -0.4];
        let w = lowest_phase(&neg, PhaseConvention::SmallestPositive).unwrap();
        assert!((w - (2.0 * std::f64::consts::PI - 2.0)).abs() < 1e-12);
        assert_eq!(lowest_phase(&[], PhaseConvention::SmallestPositive), None);
    }

    #[test]
    fn mean_lowest_phase_shrinks_with_size_and_reproduces() {
        let one = mean_lowest_eigenphase(Group::SpecialOrthogonal, 10, 1, 4).unwrap();
        let s = sample(Group::SpecialOrthogonal, 10, 4, 0).unwrap();
        assert_eq!(one, lowest_phase(&s.eigenphases, PhaseConvention::SmallestPositive).unwrap());

        let small = mean_lowest_eigenphase(Group::SpecialOrthogonal, 10, 300, 21).unwrap();
        let big = mean_lowest_eigenphase(Group::SpecialOrthogonal, 40, 300, 21).unwrap();
        assert!(small > big, "lowest phase should shrink with n: {small} vs {big}");
        let again = mean_lowest_eigenphase(Group::SpecialOrthogonal, 10, 300, 21).unwrap();
        assert_eq!(small, again);
    }

    #[test]
    fn haar_invariance_under_fixed_left_factor() {
        // phases of A and of F A should be indistinguishable for fixed F
        let n = 6;
        let draws = 5000u64;
        let mut f = CMatrix::identity(n);
        let (c, s) = (1.0f64.cos(), 1.0f64.sin());
        f.set(0, 0, c.into());
        f.set(0, 1, (-s).into());
        f.set(1, 0, s.into());
        f.set(1, 1, c.into());
        let mut plain = Vec::new();
        let mut rotated = Vec::new();
        for d in 0..draws {
            let mut rng = crate::ensembles::stream_rng(88, d);
            let a = crate::ensembles::haar_special_orthogonal(n, &mut rng);
            let fa = f.mul(&a);
            plain.push(lowest_phase(&crate::ensembles::eigenphases(&a).unwrap(), PhaseConvention::SmallestPositive).unwrap());
            rotated.push(lowest_phase(&crate::ensembles::eigenphases(&fa).unwrap(), PhaseConvention::SmallestPositive).unwrap());
        }
        let ks = ks_statistic(&plain, &rotated);
        // 1% critical value for two samples of 5000
        let crit = 1.628 * (2.0 / draws as f64).sqrt();
        assert!(ks < crit, "KS {ks:.4} exceeds {crit:.4}");
    }

    #[test]
    fn cutoff_search_is_deterministic_and_attains_minimum() {
        let pool: Vec<_> = (0..400u64)
            .map(|d| sample(Group::SpecialOrthogonal, 8, 500, d).unwrap())
            .collect();
        let obs = lowest_phase_distribution(&pool, PhaseConvention::SmallestPositive).unwrap();
        let cfg = CutoffSearchConfig { weight: 2, n_std: 4, pool: 400, seed: 913, min_kept: 40 };
        let grid = [0.5, 1.0, 2.0, 4.0];
        let r1 = estimate_c_std(&obs, &grid, CutoffMode::ZerosVsExcised, &cfg).unwrap();
        let r2 = estimate_c_std(&obs, &grid, CutoffMode::ZerosVsExcised, &cfg).unwrap();
        assert_eq!(r1.discrepancies, r2.discrepancies);
        assert_eq!(r1.argmin, r2.argmin);
        let best = r1.discrepancies.iter().copied().filter(|d| d.is_finite()).fold(f64::INFINITY, f64::min);
        let at = grid.iter().position(|&c| c == r1.argmin).unwrap();
        assert_eq!(r1.discrepancies[at], best);
        assert_eq!(r1.kept.len(), grid.len());
        // acceptance counts shrink as the cutoff rises
        for w in r1.kept.windows(2) {
            assert!(w[0] >= w[1]);
        }

        let single = estimate_c_std(&obs, &[1.7], CutoffMode::ZerosVsExcised, &cfg).unwrap();
        assert_eq!(single.argmin, 1.7);
    }

    #[test]
    fn cutoff_search_values_mode_and_infeasibility() {
        let pool: Vec<_> = (0..300u64)
            .map(|d| sample(Group::SpecialOrthogonal, 8, 77, d).unwrap())
            .collect();
        let vals = lambda_distribution(&pool).unwrap();
        let cfg = CutoffSearchConfig { weight: 2, n_std: 4, pool: 300, seed: 78, min_kept: 30 };
        let r = estimate_c_std(&vals, &[0.5, 1.0, 2.0], CutoffMode::ValuesVsCharpoly, &cfg).unwrap();
        assert!(r.discrepancies.iter().all(|d| d.is_finite()));
        // a structurally similar sample should sit closer than a shifted one
        let shifted = EmpiricalDistribution::new(
            SampleKind::CentralValue,
            pool.iter().map(|s| (s.draw_index as i64, s.lambda_at_one + 40.0)).collect(),
        )
        .unwrap();
        let rs = estimate_c_std(&shifted, &[0.5, 1.0, 2.0], CutoffMode::ValuesVsCharpoly, &cfg).unwrap();
        let best = r.discrepancies.iter().copied().fold(f64::INFINITY, f64::min);
        let best_shifted = rs.discrepancies.iter().copied().filter(|d| d.is_finite()).fold(f64::INFINITY, f64::min);
        assert!(best < best_shifted);

        // absurd candidates keep nothing and are excluded; all-absurd errors out
        let r = estimate_c_std(&vals, &[0.5, 1e9], CutoffMode::ZerosVsExcised, &cfg).unwrap();
        assert!(r.discrepancies[1].is_infinite());
        assert_eq!(r.argmin, 0.5);
        assert!(estimate_c_std(&vals, &[1e9], CutoffMode::ZerosVsExcised, &cfg).is_err());
        assert!(estimate_c_std(&vals, &[], CutoffMode::ZerosVsExcised, &cfg).is_err());
        assert!(estimate_c_std(&vals, &[2.0, 1.0], CutoffMode::ZerosVsExcised, &cfg).is_err());
    }
}
