//! Fourier coefficients of the six forms under study.
//!
//! Three generation routes, matched to what each form admits:
//! eta quotients for the two weight <= 3 forms, quaternary theta series
//! split into two-variable factors for the weights 4, 6, 8, and a shipped
//! fixture file for the one form with non-real coefficients. Everything is
//! exact integer (or fixture-supplied complex) arithmetic up to the final
//! division by n^((k-1)/2).
//!
//! Coefficient lists are 1-based in spirit: `v[i]` holds a_{i+1}.

use crate::arith::{gcd, kronecker, FundamentalDiscriminant};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

/// a_n of q^(sum d_i e_i / 24) prod_i prod_n (1 - q^(d_i n))^(e_i).
///
/// Each (1 - q^(dn)) factor expands by the pentagonal number theorem into
/// a sparse +-1 series, so the truncated product costs about
/// n_max * sqrt(n_max) per factor.
pub fn coeffs_eta_product(factors: &[(u32, u32)], n_max: usize) -> Result<Vec<i64>> {
    let lead: u64 = factors.iter().map(|&(d, e)| d as u64 * e as u64).sum();
    if lead == 0 || lead % 24 != 0 {
        return Err(Error::EtaLeadingPower(lead));
    }
    let shift = (lead / 24) as usize;
    let mut out = vec![0i64; n_max];
    if n_max < shift {
        return Ok(out);
    }
    let m = n_max - shift;
    let mut dense = vec![0i64; m + 1];
    dense[0] = 1;
    for &(d, e) in factors {
        let sparse = pentagonal_factor(d as usize, m);
        for _ in 0..e {
            dense = mul_sparse(&dense, &sparse, m);
        }
    }
    for n in shift..=n_max.min(shift + m) {
        if n >= 1 {
            out[n - 1] = dense[n - shift];
        }
    }
    Ok(out)
}

/// prod_{n>=1} (1 - q^(dn)) = sum_k (-1)^k q^(d k(3k-1)/2), truncated.
fn pentagonal_factor(d: usize, n_max: usize) -> Vec<(usize, i64)> {
    let mut terms = vec![(0usize, 1i64)];
    for k in 1.. {
        let g1 = k * (3 * k - 1) / 2 * d;
        let g2 = k * (3 * k + 1) / 2 * d;
        let sign = if k % 2 == 1 { -1 } else { 1 };
        if g1 > n_max {
            break;
        }
        terms.push((g1, sign));
        if g2 <= n_max {
            terms.push((g2, sign));
        }
    }
    terms.sort_unstable();
    terms
}

fn mul_sparse(dense: &[i64], sparse: &[(usize, i64)], n_max: usize) -> Vec<i64> {
    let mut out = vec![0i64; n_max + 1];
    for (i, &c) in dense.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for &(j, s) in sparse {
            if i + j > n_max {
                break;
            }
            out[i + j] += c * s;
        }
    }
    out
}

/// Weight 4, level 7: the quaternary theta series
/// (1/c) sum (2a^2 + 2ab - 3b^2) q^(Q(a,b) + Q(c,d)), Q(x,y) = x^2 + xy + 2y^2,
/// computed as a product of two binary theta series. The constant c is read
/// off as the raw q^1 coefficient so that a_1 = 1.
pub fn coeffs_theta_7_4(n_max: usize) -> Vec<i128> {
    let weighted = binary_theta(n_max, 1, 2, |x, y| 2 * x * x + 2 * x * y - 3 * y * y);
    let plain = binary_theta(n_max, 1, 2, |_, _| 1);
    normalize_theta(conv(&weighted, &plain, n_max))
}

/// Weight 6, level 3: weighted theta on Q(x,y) = x^2 - xy + y^2 in four
/// variables, rearranged as T4 * T0 - 2 (2 T2 - T11)^2 where the T's are
/// binary theta series with polynomial weights 1, a^2, ab, a^4 - 2a^3 b +
/// 3a^2 b^2 - 2a b^3 + b^4.
pub fn coeffs_theta_3_6(n_max: usize) -> Vec<i128> {
    let t4 = binary_theta(n_max, -1, 1, |a, b| {
        a * a * a * a - 2 * a * a * a * b + 3 * a * a * b * b - 2 * a * b * b * b + b * b * b * b
    });
    let t0 = binary_theta(n_max, -1, 1, |_, _| 1);
    let t2 = binary_theta(n_max, -1, 1, |a, _| a * a);
    let t11 = binary_theta(n_max, -1, 1, |a, b| a * b);
    let u: Vec<i128> = t2.iter().zip(&t11).map(|(&s, &p)| 2 * s - p).collect();
    let mut raw = conv(&t4, &t0, n_max);
    let u2 = conv(&u, &u, n_max);
    for (r, c) in raw.iter_mut().zip(&u2) {
        *r -= 2 * c;
    }
    normalize_theta(raw)
}

/// Weight 8, level 3: as above with the sextic weight
/// P1(a,b) = 2a^6 - 6a^5 b - 15a^4 b^2 + 40a^3 b^3 - 15a^2 b^4 - 6a b^5 + 2b^6
/// on one factor and the plain theta on the other.
pub fn coeffs_theta_3_8(n_max: usize) -> Vec<i128> {
    let p1 = binary_theta(n_max, -1, 1, |a, b| {
        let (a2, b2) = (a * a, b * b);
        2 * a2 * a2 * a2 - 6 * a2 * a2 * a * b - 15 * a2 * a2 * b2 + 40 * a2 * a * b2 * b
            - 15 * a2 * b2 * b2
            - 6 * a * b2 * b2 * b
            + 2 * b2 * b2 * b2
    });
    let t0 = binary_theta(n_max, -1, 1, |_, _| 1);
    normalize_theta(conv(&p1, &t0, n_max))
}

/// sum over (x, y) with x^2 + sxy + t y^2 <= n_max of w(x, y) q^(that form).
/// Index = exponent, starting at the constant term.
fn binary_theta(n_max: usize, s: i128, t: i128, w: impl Fn(i128, i128) -> i128) -> Vec<i128> {
    let mut out = vec![0i128; n_max + 1];
    let n = n_max as f64;
    // complete the square: (x + sy/2)^2 + (t - s^2/4) y^2 <= n
    let lead = t as f64 - (s * s) as f64 / 4.0;
    let ymax = (n / lead).sqrt() as i128 + 2;
    for y in -ymax..=ymax {
        let rest = n - lead * (y * y) as f64;
        if rest < 0.0 {
            continue;
        }
        let half = rest.sqrt();
        let center = -(s as f64) * y as f64 / 2.0;
        let (xlo, xhi) = (
            (center - half).floor() as i128 - 2,
            (center + half).ceil() as i128 + 2,
        );
        for x in xlo..=xhi {
            let q = x * x + s * x * y + t * y * y;
            if (0..=n_max as i128).contains(&q) {
                out[q as usize] += w(x, y);
            }
        }
    }
    out
}

/// Truncated product, skipping zero entries on both sides. The theta factors
/// are supported only on represented values of the form, so this saves a lot.
fn conv(a: &[i128], b: &[i128], n_max: usize) -> Vec<i128> {
    let nz = |v: &[i128]| -> Vec<(usize, i128)> {
        v.iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, c))
            .collect()
    };
    let (an, bn) = (nz(a), nz(b));
    let mut out = vec![0i128; n_max + 1];
    for &(i, av) in &an {
        for &(j, bv) in &bn {
            if i + j > n_max {
                break;
            }
            out[i + j] += av * bv;
        }
    }
    out
}

/// Divide the raw series by its own q^1 coefficient and shift to 1-based.
/// Fixing the constant this way (rather than hardcoding it) keeps a_1 = 1
/// by construction; every division must be exact.
fn normalize_theta(raw: Vec<i128>) -> Vec<i128> {
    assert_eq!(raw[0], 0, "theta series has a constant term");
    let c = raw[1];
    assert!(c > 0, "raw q^1 coefficient is {c}, expected positive");
    raw[1..]
        .iter()
        .map(|&v| {
            assert_eq!(v % c, 0, "raw coefficient {v} not divisible by {c}");
            v / c
        })
        .collect()
}

/// Reads `n,re,im` CSV rows with contiguous n from 1; validates a_1 = 1.
pub fn load_coeffs_file(path: &Path) -> Result<Vec<Complex64>> {
    let bad = |reason: String| Error::CoefficientFile {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "n,re,im" => {}
        Some(h) => return Err(bad(format!("expected header n,re,im, found {h:?}"))),
        None => return Err(bad("empty file".into())),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Option<f64> { s?.trim().parse().ok() };
        let n = cols
            .next()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| bad(format!("line {}: malformed index", lineno + 2)))?;
        let (re, im) = match (parse(cols.next()), parse(cols.next()), cols.next()) {
            (Some(re), Some(im), None) => (re, im),
            _ => return Err(bad(format!("line {}: malformed row", lineno + 2))),
        };
        if n != out.len() + 1 {
            return Err(bad(format!(
                "line {}: index {} out of order (expected {})",
                lineno + 2,
                n,
                out.len() + 1
            )));
        }
        out.push(Complex64::new(re, im));
    }
    if out.is_empty() {
        return Err(bad("no coefficient rows".into()));
    }
    if (out[0] - 1.0).norm() > 1e-12 {
        return Err(bad(format!("a_1 = {}, expected 1", out[0])));
    }
    Ok(out)
}

/// lambda_n = a_n / n^((k-1)/2).
pub fn normalized_coeffs(a: &[Complex64], k: u32) -> Vec<Complex64> {
    let mu = (k as f64 - 1.0) / 2.0;
    a.iter()
        .enumerate()
        .map(|(i, &c)| c / ((i + 1) as f64).powf(mu))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientProvider {
    EtaProduct { factors: Vec<(u32, u32)> },
    Theta74,
    Theta36,
    Theta38,
    File { path: PathBuf },
}

impl CoefficientProvider {
    pub fn coefficients(&self, n_max: usize) -> Result<Vec<Complex64>> {
        let real = |v: f64| Complex64::new(v, 0.0);
        Ok(match self {
            CoefficientProvider::EtaProduct { factors } => coeffs_eta_product(factors, n_max)?
                .into_iter()
                .map(|c| real(c as f64))
                .collect(),
            CoefficientProvider::Theta74 => to_complex(coeffs_theta_7_4(n_max)),
            CoefficientProvider::Theta36 => to_complex(coeffs_theta_3_6(n_max)),
            CoefficientProvider::Theta38 => to_complex(coeffs_theta_3_8(n_max)),
            CoefficientProvider::File { path } => {
                let all = load_coeffs_file(path)?;
                if all.len() < n_max {
                    return Err(Error::CoefficientFile {
                        path: path.clone(),
                        reason: format!("holds {} coefficients, need {}", all.len(), n_max),
                    });
                }
                all[..n_max].to_vec()
            }
        })
    }
}

fn to_complex(v: Vec<i128>) -> Vec<Complex64> {
    // beyond ~9e15 the f64 image is rounded; only the normalized values are
    // consumed downstream, so relative accuracy is what matters
    v.into_iter().map(|c| Complex64::new(c as f64, 0.0)).collect()
}

/// Family symmetry class of the quadratic-twist family attached to a form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Principal,
    SelfCm,
    NonSelfDual,
}

#[derive(Debug, Clone)]
pub struct Newform {
    pub label: &'static str,
    pub weight: u32,
    pub level: i64,
    pub kind: FormKind,
    /// Sign of the completed functional equation of the base form. None
    /// means it has to be calibrated numerically.
    pub epsilon: Option<Complex64>,
    pub provider: CoefficientProvider,
    chi_table: OnceLock<Vec<Complex64>>,
}

pub const LABELS: [&str; 6] = [
    "11.2.a.a",
    "7.4.a.a",
    "3.6.a.a",
    "3.8.a.a",
    "13.2.e.a",
    "7.3.b.a",
];

impl Newform {
    pub fn by_label(label: &str) -> Option<Newform> {
        let (weight, level, kind, provider) = match label {
            "11.2.a.a" => (
                2,
                11,
                FormKind::Principal,
                CoefficientProvider::EtaProduct {
                    factors: vec![(1, 2), (11, 2)],
                },
            ),
            "7.4.a.a" => (4, 7, FormKind::Principal, CoefficientProvider::Theta74),
            "3.6.a.a" => (6, 3, FormKind::Principal, CoefficientProvider::Theta36),
            "3.8.a.a" => (8, 3, FormKind::Principal, CoefficientProvider::Theta38),
            "13.2.e.a" => (
                2,
                13,
                FormKind::NonSelfDual,
                CoefficientProvider::File {
                    path: PathBuf::from(concat!(
                        env!("CARGO_MANIFEST_DIR"),
                        "/data/13_2_e_a.csv"
                    )),
                },
            ),
            "7.3.b.a" => (
                3,
                7,
                FormKind::SelfCm,
                CoefficientProvider::EtaProduct {
                    factors: vec![(1, 3), (7, 3)],
                },
            ),
            _ => return None,
        };
        let epsilon = match kind {
            // even weight, principal: read the Fricke eigenvalue off a_M
            FormKind::Principal => {
                let a = provider
                    .coefficients(level as usize)
                    .expect("generated coefficients");
                Some(principal_epsilon(weight, level, a[level as usize - 1].re))
            }
            // positive central value of the base form, verified numerically
            // in the functional-equation tests
            FormKind::SelfCm => Some(Complex64::new(1.0, 0.0)),
            FormKind::NonSelfDual => None,
        };
        let label: &'static str = LABELS
            .iter()
            .find(|&&l| l == label)
            .expect("label in table");
        Some(Newform {
            label,
            weight,
            level,
            kind,
            epsilon,
            provider,
            chi_table: OnceLock::new(),
        })
    }

    pub fn all() -> Vec<Newform> {
        LABELS.iter().map(|l| Newform::by_label(l).unwrap()).collect()
    }

    pub fn is_self_dual(&self) -> bool {
        self.kind != FormKind::NonSelfDual
    }

    pub fn coefficients(&self, n_max: usize) -> Result<Vec<Complex64>> {
        self.provider.coefficients(n_max)
    }

    pub fn lambdas(&self, n_max: usize) -> Result<Vec<Complex64>> {
        Ok(normalized_coeffs(&self.coefficients(n_max)?, self.weight))
    }

    pub fn lambdas_real(&self, n_max: usize) -> Result<Vec<f64>> {
        assert!(self.is_self_dual(), "{} has complex coefficients", self.label);
        Ok(self
            .lambdas(n_max)?
            .into_iter()
            .map(|c| c.re)
            .collect())
    }

    /// Nebentypus character, as a function on the integers (0 off the
    /// coprime residues). For the non-self-dual form it is reconstructed
    /// from the coefficients themselves via conj(a_p) = conj(chi(p)) a_p.
    pub fn chi(&self, n: i64) -> Complex64 {
        let r = n.rem_euclid(self.level);
        match self.kind {
            FormKind::Principal => {
                Complex64::new(if gcd(r, self.level) == 1 { 1.0 } else { 0.0 }, 0.0)
            }
            FormKind::SelfCm => Complex64::new(kronecker(n, self.level) as f64, 0.0),
            FormKind::NonSelfDual => self.chi_table()[r as usize],
        }
    }

    fn chi_table(&self) -> &[Complex64] {
        self.chi_table.get_or_init(|| {
            let a = self
                .coefficients(200)
                .expect("coefficients for character reconstruction");
            build_character_table(&a, self.level).expect("consistent character")
        })
    }
}

/// How a twist family selects its discriminants. Principal forms keep the
/// twists whose functional-equation sign comes out +1, self-CM forms pick a
/// residue-or-nonresidue class via kronecker(D, M), and the non-self-dual
/// form fixes a residue class mod M outright.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySelector {
    Principal { epsilon: i32 },
    SelfCm { sign: i32 },
    NonSelfDual { residue: i64 },
}

impl FamilySelector {
    pub fn admits(&self, d: FundamentalDiscriminant, level: i64) -> bool {
        let d = d.get();
        if gcd(d, level) != 1 {
            return false;
        }
        match *self {
            FamilySelector::Principal { epsilon } => kronecker(d, level) as i32 == epsilon,
            FamilySelector::SelfCm { sign } => kronecker(d, level) as i32 == sign,
            FamilySelector::NonSelfDual { residue } => d.rem_euclid(level) == residue,
        }
    }
}

pub fn is_admissible(form: &Newform, d: FundamentalDiscriminant, sel: FamilySelector) -> bool {
    sel.admits(d, form.level)
}

/// Ascending admissible discriminants of the family, up to and including
/// x_max.
pub fn family_discriminants(
    form: &Newform,
    sel: FamilySelector,
    x_max: i64,
) -> Vec<FundamentalDiscriminant> {
    crate::arith::fundamental_discriminants(x_max)
        .into_iter()
        .filter(|&d| sel.admits(d, form.level))
        .collect()
}

impl Newform {
    /// Admissibility selector for this form's twist family. `parameter` is
    /// ignored for principal forms, the residue-or-not sign for self-CM
    /// families, and the target residue class mod M for the non-self-dual
    /// family.
    pub fn family_selector(&self, parameter: i64) -> Result<FamilySelector> {
        match self.kind {
            FormKind::Principal => {
                let eps = self
                    .epsilon
                    .ok_or_else(|| Error::Invalid(format!("{}: epsilon unknown", self.label)))?;
                if (eps.im).abs() > 1e-9 || (eps.re.abs() - 1.0).abs() > 1e-9 {
                    return Err(Error::Invalid(format!(
                        "{}: principal family needs a real unit epsilon, got {eps}",
                        self.label
                    )));
                }
                Ok(FamilySelector::Principal {
                    epsilon: eps.re.round() as i32,
                })
            }
            FormKind::SelfCm => {
                if parameter != 1 && parameter != -1 {
                    return Err(Error::Invalid(format!(
                        "self-CM family parameter must be +1 or -1, got {parameter}"
                    )));
                }
                Ok(FamilySelector::SelfCm {
                    sign: parameter as i32,
                })
            }
            FormKind::NonSelfDual => {
                let r = parameter.rem_euclid(self.level);
                if gcd(r, self.level) != 1 {
                    return Err(Error::Invalid(format!(
                        "residue {parameter} not invertible mod {}",
                        self.level
                    )));
                }
                Ok(FamilySelector::NonSelfDual { residue: r })
            }
        }
    }
}

/// epsilon_f * chi_f(D) * psi_D(-M): the sign of the completed functional
/// equation of the twisted L-function. Requires epsilon on the form
/// (calibrated numerically for the non-self-dual case).
pub fn sign_of_functional_equation(
    form: &Newform,
    d: FundamentalDiscriminant,
) -> Result<Complex64> {
    let eps = form
        .epsilon
        .ok_or_else(|| Error::Invalid(format!("{}: epsilon not yet calibrated", form.label)))?;
    if gcd(d.get(), form.level) != 1 {
        return Err(Error::Invalid(format!(
            "chi({}) undefined: gcd with level {} exceeds 1",
            d.get(),
            form.level
        )));
    }
    let sign = eps * form.chi(d.get()) * kronecker(d.get(), -form.level) as f64;
    debug_assert!((sign.norm() - 1.0).abs() < 1e-10);
    Ok(sign)
}

fn principal_epsilon(weight: u32, level: i64, a_level: f64) -> Complex64 {
    assert!(weight % 2 == 0);
    let half = (level as f64).powi(weight as i32 / 2 - 1);
    let w = -a_level / half;
    assert!(
        (w.abs() - 1.0).abs() < 1e-9,
        "a_M = {a_level} is not +-M^(k/2-1)"
    );
    let parity = if (weight / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(parity * w.round(), 0.0)
}

/// chi(p) = a_p / conj(a_p) at primes with a_p != 0, snapped to (M-1)-th
/// roots of unity, then closed multiplicatively over (Z/M)*.
fn build_character_table(a: &[Complex64], m: i64) -> Result<Vec<Complex64>> {
    let m_us = m as usize;
    let mut table: Vec<Option<Complex64>> = vec![None; m_us];
    table[1 % m_us] = Some(Complex64::new(1.0, 0.0));
    let mut primes = Vec::new();
    'outer: for p in 2..=a.len() as i64 {
        for d in 2..p {
            if d * d > p {
                break;
            }
            if p % d == 0 {
                continue 'outer;
            }
        }
        primes.push(p);
    }
    for &p in &primes {
        if p % m == 0 {
            continue;
        }
        let ap = a[p as usize - 1];
        if ap.norm() < 1e-9 {
            continue;
        }
        let raw = ap / ap.conj();
        let snapped = snap_root_of_unity(raw, m - 1).ok_or_else(|| {
            Error::Invalid(format!("chi({p}) = {raw} is not a root of unity"))
        })?;
        let slot = &mut table[(p % m) as usize];
        match slot {
            None => *slot = Some(snapped),
            Some(v) if (*v - snapped).norm() < 1e-9 => {}
            Some(v) => {
                return Err(Error::Invalid(format!(
                    "character inconsistent at {p} mod {m}: {v} vs {snapped}"
                )))
            }
        }
    }
    // close under multiplication
    loop {
        let mut changed = false;
        for r1 in 1..m_us {
            for r2 in r1..m_us {
                if let (Some(v1), Some(v2)) = (table[r1], table[r2]) {
                    let r = (r1 * r2) % m_us;
                    let v = v1 * v2;
                    match &mut table[r] {
                        None => {
                            table[r] = Some(v);
                            changed = true;
                        }
                        Some(old) if (*old - v).norm() < 1e-9 => {}
                        Some(old) => {
                            return Err(Error::Invalid(format!(
                                "character inconsistent at residue {r}: {old} vs {v}"
                            )))
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); m_us];
    for r in 1..m_us {
        out[r] = table[r].ok_or_else(|| {
            Error::Invalid(format!("residue {r} mod {m} not reached by any prime"))
        })?;
    }
    Ok(out)
}

fn snap_root_of_unity(z: Complex64, order: i64) -> Option<Complex64> {
    let tau = 2.0 * std::f64::consts::PI;
    let j = (z.arg() / tau * order as f64).round();
    let snapped = Complex64::from_polar(1.0, j * tau / order as f64);
    ((z - snapped).norm() < 1e-6).then_some(snapped)
}
