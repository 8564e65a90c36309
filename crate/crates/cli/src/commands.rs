//! The experiment drivers. Mathematics lives in the library; this file is
//! orchestration: coefficient and result caches, CSV emission, manifests,
//! and plot scripts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use num_complex::Complex64;
use rayon::prelude::*;

use twistzeros::ensembles::{self, EnsembleSample, Group};
use twistzeros::lfunc::{TwistFamily, ZeroList};
use twistzeros::newforms::{self, FamilySelector, Newform};
use twistzeros::shimura::HalfIntegralLift;
use twistzeros::stats::{
    self, CutoffMode, CutoffSearchConfig, EmpiricalDistribution, PhaseConvention, SampleKind,
};
use twistzeros::Error;

use crate::manifest::RunManifest;

/// Resolved global settings shared by every command.
pub struct Ctx {
    pub seed: u64,
    pub out: PathBuf,
    pub cache: PathBuf,
    pub tolerance: f64,
}

impl Ctx {
    pub fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        fs::create_dir_all(&self.cache)
            .with_context(|| format!("creating {}", self.cache.display()))?;
        Ok(())
    }

    fn base_manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::new(command);
        m.seed = self.seed;
        m.tolerances.insert("tolerance".into(), self.tolerance);
        m
    }
}

fn file_label(label: &str) -> String {
    label.replace('.', "_")
}

fn invalid(msg: String) -> anyhow::Error {
    Error::Invalid(msg).into()
}

// ---------------------------------------------------------------- caches

/// Coefficient cache, one file per form, rows `n,re,im` from n = 1. A run
/// needing fewer terms reads a prefix; a run needing more appends the tail,
/// so the file only ever grows.
fn load_family_cached(form: &Newform, n_terms: usize, cache: &Path) -> Result<TwistFamily> {
    let path = cache.join(format!("coeffs_{}.csv", file_label(form.label)));
    let mut existing: Vec<Complex64> = Vec::new();
    if path.exists() {
        for (idx, line) in fs::read_to_string(&path)?.lines().enumerate() {
            let mut it = line.split(',');
            let (n, re, im) = (it.next(), it.next(), it.next());
            let parsed = (|| -> Option<(usize, f64, f64)> {
                Some((n?.parse().ok()?, re?.parse().ok()?, im?.parse().ok()?))
            })();
            match parsed {
                Some((n, re, im)) if n == idx + 1 => existing.push(Complex64::new(re, im)),
                _ => {
                    return Err(Error::CoefficientFile {
                        path: path.clone(),
                        reason: format!("line {}: bad cache row {line:?}", idx + 1),
                    }
                    .into())
                }
            }
        }
    }
    if existing.len() >= n_terms {
        existing.truncate(n_terms);
        return Ok(TwistFamily::from_coefficients(form, existing)?);
    }
    let full = form.coefficients(n_terms)?;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(&path)?;
    let mut block = String::new();
    for (i, c) in full.iter().enumerate().skip(existing.len()) {
        writeln!(block, "{},{},{}", i + 1, c.re, c.im).unwrap();
    }
    f.write_all(block.as_bytes())?;
    Ok(TwistFamily::from_coefficients(form, full)?)
}

fn family_for(
    label: &str,
    x_max: i64,
    t_max: f64,
    family_param: i64,
    cache: &Path,
) -> Result<(Newform, FamilySelector, TwistFamily)> {
    let form = Newform::by_label(label)
        .ok_or_else(|| invalid(format!("unknown form label {label:?}")))?;
    let sel = form.family_selector(family_param)?;
    let n_terms = TwistFamily::required_terms(form.level, form.weight, x_max, t_max);
    let family = load_family_cached(&form, n_terms, cache)?;
    Ok((form, sel, family))
}

/// Zero cache: append-only rows `label,D,central_zero,t1,..,tk`, keyed by
/// everything that affects the values.
fn zeros_with_cache(
    family: &TwistFamily,
    form: &Newform,
    sel: FamilySelector,
    family_param: i64,
    x_max: i64,
    count: usize,
    t_max: f64,
    ctx: &Ctx,
) -> Result<BTreeMap<i64, ZeroList>> {
    let path = ctx.cache.join(format!(
        "zeros_{}_p{}_n{}_t{}.csv",
        file_label(form.label),
        family_param,
        count,
        t_max
    ));
    let mut have: BTreeMap<i64, ZeroList> = BTreeMap::new();
    if path.exists() {
        for line in fs::read_to_string(&path)?.lines() {
            let mut it = line.split(',');
            let label = it.next().unwrap_or_default().to_string();
            let d: i64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::CoefficientFile { path: path.clone(), reason: format!("bad row {line:?}") }
            })?;
            let central: u8 = it.next().and_then(|s| s.parse().ok()).unwrap_or(0);
            let ordinates: Vec<f64> = it.map(|s| s.parse()).collect::<Result<_, _>>()?;
            have.insert(d, ZeroList { label, d, ordinates, central_zero: central != 0 });
        }
    }
    let targets: Vec<_> = newforms::family_discriminants(form, sel, x_max)
        .into_iter()
        .filter(|d| !have.contains_key(&d.get()))
        .collect();
    if !targets.is_empty() {
        let fresh: Vec<ZeroList> = targets
            .par_iter()
            .map(|&d| family.twist(d)?.lowest_zeros(count, t_max, None))
            .collect::<twistzeros::Result<Vec<_>>>()?;
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        let mut block = String::new();
        for z in &fresh {
            write!(block, "{},{},{}", z.label, z.d, z.central_zero as u8).unwrap();
            for t in &z.ordinates {
                write!(block, ",{t}").unwrap();
            }
            block.push('\n');
        }
        f.write_all(block.as_bytes())?;
        have.extend(fresh.into_iter().map(|z| (z.d, z)));
    }
    Ok(have)
}

/// Central-value cache: append-only rows `label,D,re,im`.
fn values_with_cache(
    family: &TwistFamily,
    form: &Newform,
    sel: FamilySelector,
    family_param: i64,
    x_max: i64,
    ctx: &Ctx,
) -> Result<BTreeMap<i64, (f64, f64)>> {
    let path = ctx
        .cache
        .join(format!("values_{}_p{}.csv", file_label(form.label), family_param));
    let mut have: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    if path.exists() {
        for line in fs::read_to_string(&path)?.lines() {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::CoefficientFile {
                    path: path.clone(),
                    reason: format!("bad row {line:?}"),
                }
                .into());
            }
            have.insert(parts[1].parse()?, (parts[2].parse()?, parts[3].parse()?));
        }
    }
    let targets: Vec<_> = newforms::family_discriminants(form, sel, x_max)
        .into_iter()
        .filter(|d| !have.contains_key(&d.get()))
        .collect();
    if !targets.is_empty() {
        let fresh: Vec<(i64, Complex64)> = targets
            .par_iter()
            .map(|&d| Ok((d.get(), family.twist(d)?.central_value()?)))
            .collect::<twistzeros::Result<Vec<_>>>()?;
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        let mut block = String::new();
        for (d, v) in &fresh {
            writeln!(block, "{},{},{},{}", form.label, d, v.re, v.im).unwrap();
        }
        f.write_all(block.as_bytes())?;
        have.extend(fresh.into_iter().map(|(d, v)| (d, (v.re, v.im))));
    }
    Ok(have)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

// -------------------------------------------------------------- commands

pub fn sample_ensemble(
    ctx: &Ctx,
    group: &str,
    n: usize,
    count: usize,
    full_phases: bool,
) -> Result<RunManifest> {
    let group: Group = group.parse()?;
    if group.has_paired_spectrum() && n % 2 != 0 {
        return Err(invalid(format!("{group} needs an even size, got {n}")));
    }
    if n == 0 || count == 0 {
        return Err(invalid("size and count must be positive".into()));
    }
    let samples: Vec<EnsembleSample> = (0..count as u64)
        .into_par_iter()
        .map(|d| ensembles::sample(group, n, ctx.seed, d))
        .collect::<twistzeros::Result<Vec<_>>>()?;

    let mut csv = String::from("group,n,seed,draw,theta_min,lambda_at_one\n");
    for s in &samples {
        let theta = stats::lowest_phase(&s.eigenphases, PhaseConvention::SmallestPositive)
            .expect("n >= 1 phases");
        writeln!(csv, "{},{},{},{},{},{}", group, n, s.seed, s.draw_index, theta, s.lambda_at_one)
            .unwrap();
    }
    let out_csv = ctx.out.join(format!("samples_{}_{}.csv", group.label(), n));
    write_file(&out_csv, &csv)?;

    let mut m = ctx.base_manifest("sample-ensemble");
    m.modes.insert("group".into(), group.label().into());
    m.counts.insert("draws".into(), count as u64);
    m.counts.insert("matrix_size".into(), n as u64);
    m.record_output(&out_csv);

    if full_phases {
        let mut csv = String::from("draw,index,theta\n");
        for s in &samples {
            for (i, t) in s.eigenphases.iter().enumerate() {
                writeln!(csv, "{},{},{}", s.draw_index, i, t).unwrap();
            }
        }
        let path = ctx.out.join(format!("phases_{}_{}.csv", group.label(), n));
        write_file(&path, &csv)?;
        m.record_output(&path);
    }
    println!("wrote {} draws from {}({}) to {}", count, group.label(), n, out_csv.display());
    Ok(m)
}

pub fn compute_zeros(
    ctx: &Ctx,
    label: &str,
    x_max: i64,
    count: usize,
    t_max: Option<f64>,
    family_param: i64,
) -> Result<RunManifest> {
    let t_max = t_max.unwrap_or(2.0 + 1.5 * count as f64);
    let (form, sel, family) = family_for(label, x_max, t_max, family_param, &ctx.cache)?;
    let rows = zeros_with_cache(&family, &form, sel, family_param, x_max, count, t_max, ctx)?;

    let mut csv = String::from("label,D");
    for i in 1..=count {
        write!(csv, ",t{i}").unwrap();
    }
    csv.push('\n');
    let mut n_rows = 0u64;
    let mut lowest_sum = 0.0;
    for (d, z) in rows.range(..=x_max) {
        write!(csv, "{},{}", z.label, d).unwrap();
        for t in &z.ordinates {
            write!(csv, ",{t}").unwrap();
        }
        csv.push('\n');
        n_rows += 1;
        lowest_sum += z.ordinates.first().copied().unwrap_or(f64::NAN);
    }
    if n_rows == 0 {
        return Err(invalid(format!("no admissible discriminants up to {x_max} for {label}")));
    }
    let out_csv = ctx.out.join(format!("zeros_{}.csv", file_label(label)));
    write_file(&out_csv, &csv)?;

    let mut m = ctx.base_manifest("compute-zeros");
    m.label = Some(label.into());
    m.x_max = Some(x_max);
    m.counts.insert("twists".into(), n_rows);
    m.counts.insert("zeros_per_twist".into(), count as u64);
    m.tolerances.insert("t_max".into(), t_max);
    m.numbers.insert("mean_lowest_zero".into(), lowest_sum / n_rows as f64);
    m.record_output(&out_csv);
    println!("wrote {} twists of {} to {}", n_rows, label, out_csv.display());
    Ok(m)
}

pub fn central_values(
    ctx: &Ctx,
    label: &str,
    x_max: i64,
    method: &str,
    family_param: i64,
) -> Result<RunManifest> {
    let mut m = ctx.base_manifest("central-values");
    m.label = Some(label.into());
    m.x_max = Some(x_max);
    m.modes.insert("method".into(), method.into());

    let mut csv = String::from("label,D,re,im\n");
    let n_rows;
    match method {
        "direct" => {
            let (form, sel, family) = family_for(label, x_max, 0.0, family_param, &ctx.cache)?;
            let rows = values_with_cache(&family, &form, sel, family_param, x_max, ctx)?;
            n_rows = rows.range(..=x_max).count() as u64;
            for (d, (re, im)) in rows.range(..=x_max) {
                writeln!(csv, "{},{},{},{}", label, d, re, im).unwrap();
            }
        }
        "kz" => {
            let mut lift = HalfIntegralLift::build(label, x_max)?;
            let (form, sel, family) = family_for(label, x_max, 0.0, family_param, &ctx.cache)?;
            let discs = newforms::family_discriminants(&form, sel, x_max);
            let reference = discs
                .iter()
                .find(|d| lift.coefficient(d.get()).map_or(false, |c| c != 0))
                .copied()
                .ok_or_else(|| invalid(format!("no nonzero lift coefficient up to {x_max}")))?;
            let kappa = lift.calibrate_kappa(&family, reference)?;
            n_rows = discs.len() as u64;
            for d in &discs {
                writeln!(csv, "{},{},{},0", label, d.get(), lift.central_value_kz(*d)?).unwrap();
            }
            m.numbers.insert("kappa".into(), kappa);
            m.numbers.insert("reference_d".into(), reference.get() as f64);
        }
        other => {
            return Err(invalid(format!("unknown method {other:?}, expected direct or kz")));
        }
    }
    if n_rows == 0 {
        return Err(invalid(format!("no admissible discriminants up to {x_max} for {label}")));
    }
    let out_csv = ctx.out.join(format!("values_{}_{}.csv", file_label(label), method));
    write_file(&out_csv, &csv)?;
    m.counts.insert("twists".into(), n_rows);
    m.record_output(&out_csv);
    println!("wrote {} central values of {} ({}) to {}", n_rows, label, method, out_csv.display());
    Ok(m)
}

pub fn estimate_cutoff(
    ctx: &Ctx,
    label: &str,
    x_max: i64,
    grid: &str,
    mode: &str,
    matrices: usize,
    min_kept: usize,
    family_param: i64,
) -> Result<RunManifest> {
    let mode = match mode {
        "zeros" => CutoffMode::ZerosVsExcised,
        "values" => CutoffMode::ValuesVsCharpoly,
        other => return Err(invalid(format!("unknown mode {other:?}, expected zeros or values"))),
    };
    let grid: Vec<f64> = grid
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| invalid(format!("bad grid: {e}")))?;

    let form = Newform::by_label(label)
        .ok_or_else(|| invalid(format!("unknown form label {label:?}")))?;
    if !form.is_self_dual() {
        return Err(invalid(format!(
            "{label} twists are not self-dual; the excised orthogonal model does not apply"
        )));
    }
    let observed = match mode {
        CutoffMode::ZerosVsExcised => {
            let t_max = 3.5;
            let (form, sel, family) = family_for(label, x_max, t_max, family_param, &ctx.cache)?;
            let rows = zeros_with_cache(&family, &form, sel, family_param, x_max, 1, t_max, ctx)?;
            EmpiricalDistribution::new(
                SampleKind::LowestZero,
                rows.range(..=x_max).map(|(&d, z)| (d, z.ordinates[0])).collect(),
            )?
        }
        CutoffMode::ValuesVsCharpoly => {
            let (form, sel, family) = family_for(label, x_max, 0.0, family_param, &ctx.cache)?;
            let rows = values_with_cache(&family, &form, sel, family_param, x_max, ctx)?;
            EmpiricalDistribution::new(
                SampleKind::CentralValue,
                rows.range(..=x_max)
                    .map(|(&d, &(re, im))| (d, Complex64::new(re, im).norm()))
                    .collect(),
            )?
        }
    };
    let base_n = stats::n_std(x_max as f64, form.level, Group::Unitary)?;
    let cfg = CutoffSearchConfig {
        weight: form.weight,
        n_std: base_n,
        pool: matrices,
        seed: ctx.seed,
        min_kept,
    };
    let result = stats::estimate_c_std(&observed, &grid, mode, &cfg)?;

    let mut csv = String::from("c_candidate,discrepancy\n");
    for (c, d) in result.candidates.iter().zip(&result.discrepancies) {
        writeln!(csv, "{c},{d}").unwrap();
    }
    let out_csv = ctx.out.join(format!("cutoff_curve_{}.csv", file_label(label)));
    write_file(&out_csv, &csv)?;

    let mut m = ctx.base_manifest("estimate-cutoff");
    m.label = Some(label.into());
    m.x_max = Some(x_max);
    m.modes.insert(
        "mode".into(),
        match mode {
            CutoffMode::ZerosVsExcised => "zeros_vs_excised".into(),
            CutoffMode::ValuesVsCharpoly => "values_vs_charpoly".into(),
        },
    );
    m.counts.insert("matrices".into(), matrices as u64);
    m.counts.insert("observations".into(), observed.len() as u64);
    m.counts.insert("candidates".into(), grid.len() as u64);
    m.counts.insert("min_kept".into(), min_kept as u64);
    m.numbers.insert("n_std".into(), base_n as f64);
    m.numbers.insert("argmin_c_std".into(), result.argmin);
    m.record_output(&out_csv);
    println!(
        "argmin c_std = {} over {} candidates (n_std = {}, SO({}) pool of {})",
        result.argmin,
        grid.len(),
        base_n,
        2 * base_n,
        matrices
    );
    Ok(m)
}

pub fn compare(
    ctx: &Ctx,
    label: &str,
    x_max: i64,
    matrices: usize,
    bins: usize,
    family_param: i64,
) -> Result<RunManifest> {
    let t_max = 3.5;
    let (form, sel, family) = family_for(label, x_max, t_max, family_param, &ctx.cache)?;
    let rows = zeros_with_cache(&family, &form, sel, family_param, x_max, 1, t_max, ctx)?;
    let zero_dist = EmpiricalDistribution::new(
        SampleKind::LowestZero,
        rows.range(..=x_max).map(|(&d, z)| (d, z.ordinates[0])).collect(),
    )?;
    let zero_norm = zero_dist.normalize_to_unit_mean()?;

    let base_n = stats::n_std(x_max as f64, form.level, Group::Unitary)?;
    let (group, dim) = if form.is_self_dual() {
        (Group::SpecialOrthogonal, 2 * base_n)
    } else {
        (Group::Unitary, base_n)
    };
    let samples: Vec<EnsembleSample> = (0..matrices as u64)
        .into_par_iter()
        .map(|d| ensembles::sample(group, dim, ctx.seed, d))
        .collect::<twistzeros::Result<Vec<_>>>()?;
    let phase_dist = stats::lowest_phase_distribution(&samples, PhaseConvention::SmallestPositive)?;
    let phase_norm = phase_dist.normalize_to_unit_mean()?;

    let (small, large) = zero_norm.split_small_large()?;

    let zero_scale = zero_norm.normalization().unwrap();
    let mut csv = String::from("D,lowest_zero,normalized\n");
    for &(d, v) in zero_norm.samples() {
        writeln!(csv, "{},{},{}", d, v * zero_scale, v).unwrap();
    }
    let zeros_csv = ctx.out.join(format!("compare_{}_zeros.csv", file_label(label)));
    write_file(&zeros_csv, &csv)?;

    let phase_scale = phase_norm.normalization().unwrap();
    let mut csv = String::from("draw,theta_min,normalized\n");
    for &(d, v) in phase_norm.samples() {
        writeln!(csv, "{},{},{}", d, v * phase_scale, v).unwrap();
    }
    let phases_csv = ctx.out.join(format!("compare_{}_phases.csv", file_label(label)));
    write_file(&phases_csv, &csv)?;

    let hi = zero_norm
        .values()
        .chain(phase_norm.values())
        .fold(0.0f64, f64::max)
        * 1.02;
    let mut density_files = Vec::new();
    for (name, dist) in [("zero", &zero_norm), ("phase", &phase_norm)] {
        let values: Vec<f64> = dist.values().collect();
        let table = stats::density_histogram(&values, bins, (0.0, hi))?;
        let mut csv = String::from("bin_lo,bin_hi,density\n");
        for b in &table {
            writeln!(csv, "{},{},{}", b.lo, b.hi, b.density).unwrap();
        }
        let path = ctx.out.join(format!("compare_{}_{}_density.csv", file_label(label), name));
        write_file(&path, &csv)?;
        density_files.push(path);
    }

    let mut csv = String::from("half,count,mean_normalized\n");
    writeln!(csv, "small,{},{}", small.len(), small.mean()).unwrap();
    writeln!(csv, "large,{},{}", large.len(), large.mean()).unwrap();
    let split_csv = ctx.out.join(format!("compare_{}_split.csv", file_label(label)));
    write_file(&split_csv, &csv)?;

    // the script renders from the CSVs alone
    let gp = format!(
        "set datafile separator \",\"\n\
         set xlabel \"normalized lowest zero / eigenphase\"\n\
         set ylabel \"density\"\n\
         set key top right\n\
         plot \"{}\" skip 1 using (($1+$2)/2):3 with lines title \"{} lowest zeros\", \\\n\
              \"{}\" skip 1 using (($1+$2)/2):3 with lines title \"{}({}) lowest phases\"\n",
        density_files[0].file_name().unwrap().to_string_lossy(),
        label,
        density_files[1].file_name().unwrap().to_string_lossy(),
        group.label(),
        dim,
    );
    let gp_path = ctx.out.join(format!("compare_{}.gp", file_label(label)));
    write_file(&gp_path, &gp)?;

    let mut m = ctx.base_manifest("compare");
    m.label = Some(label.into());
    m.x_max = Some(x_max);
    m.modes.insert("group".into(), format!("{}({})", group.label(), dim));
    m.counts.insert("twists".into(), zero_norm.len() as u64);
    m.counts.insert("matrices".into(), matrices as u64);
    m.counts.insert("bins".into(), bins as u64);
    m.numbers.insert("mean_lowest_zero".into(), zero_scale);
    m.numbers.insert("mean_lowest_phase".into(), phase_scale);
    m.numbers.insert("mean_small_half".into(), small.mean());
    m.numbers.insert("mean_large_half".into(), large.mean());
    for p in [&zeros_csv, &phases_csv, &density_files[0], &density_files[1], &split_csv, &gp_path] {
        m.record_output(p);
    }
    println!(
        "{}: {} twists vs {} draws from {}({}); small-half mean {:.4}, large-half mean {:.4}",
        label,
        zero_norm.len(),
        matrices,
        group.label(),
        dim,
        small.mean(),
        large.mean()
    );
    Ok(m)
}
