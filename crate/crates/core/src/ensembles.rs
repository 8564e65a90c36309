//! Haar-random matrices from U(N), SO(N) and USp(2N).
//!
//! Sampling follows the QR recipe: fill a matrix with independent Gaussians,
//! orthogonalize, and correct by the phases of R's diagonal so the result is
//! exactly Haar rather than merely orthogonal with a biased first column. The
//! unitary and special-orthogonal samplers share one complex Householder QR
//! (a real input stays real throughout); the symplectic sampler runs modified
//! Gram-Schmidt over quaternion entries and then expands each quaternion into
//! its 2x2 complex block.
//!
//! Eigenphases come from diagonalizing the Hermitian combination
//! (A+A*)/2 + mix*(A-A*)/(2i) by cyclic Jacobi sweeps. For a unitary A with
//! eigenvalue e^{it} that combination has eigenvalue cos t + mix*sin t, so an
//! irrational mix constant separates conjugate pairs and the eigenvectors of
//! the combination diagonalize A itself. Each phase is read off as a Rayleigh
//! quotient and checked against the unit circle.
//!
//! Every sample is addressed by (seed, draw_index): the RNG is a fixed-seed
//! ChaCha8 with the draw index as its stream number, so draws are
//! reproducible individually and in any order, and the excised rejection
//! sampler consumes draw indices one per attempt. With cutoff 0 it therefore
//! reproduces the plain sequence bit for bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Mixing constant for the Hermitian combination fed to Jacobi. Any
/// irrational value works; this is 1/golden ratio.
const JACOBI_MIX: f64 = 0.618_033_988_749_894_9;

/// Off-diagonal mass threshold (relative to the Frobenius norm) at which a
/// Jacobi sweep is considered converged.
const JACOBI_TOLERANCE: f64 = 1e-14;

const UNIT_CIRCLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Unitary,
    SpecialOrthogonal,
    UnitarySymplectic,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Unitary => "U",
            Group::SpecialOrthogonal => "SO",
            Group::UnitarySymplectic => "USp",
        }
    }

    /// Phases of SO and USp matrices come in conjugate pairs, which doubles
    /// the matrix size the statistics dictionary assigns to them.
    pub fn has_paired_spectrum(self) -> bool {
        !matches!(self, Group::Unitary)
    }
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Group> {
        match s {
            "U" | "u" | "unitary" => Ok(Group::Unitary),
            "SO" | "so" | "orthogonal" => Ok(Group::SpecialOrthogonal),
            "USp" | "usp" | "symplectic" => Ok(Group::UnitarySymplectic),
            other => Err(Error::Invalid(format!("unknown ensemble {other:?}, expected U, SO or USp"))),
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Dense row-major complex matrix; just enough linear algebra for sampling.
#[derive(Debug, Clone)]
pub struct CMatrix {
    n: usize,
    a: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> CMatrix {
        CMatrix { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik != Complex64::new(0.0, 0.0) {
                    for j in 0..n {
                        out.a[i * n + j] += aik * rhs.a[k * n + j];
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.a[j * n + i] = self.a[i * n + j].conj();
            }
        }
        out
    }

    /// max |(A*A - I)_{ij}|, the working definition of "is unitary".
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let prod = self.adjoint().mul(self);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod.get(i, j) - want).norm());
            }
        }
        worst
    }

    pub fn max_imag(&self) -> f64 {
        self.a.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// One stream per draw: sample k is identical whether or not samples
/// 0..k-1 were ever generated.
pub fn stream_rng(seed: u64, draw_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    rng
}

fn complex_ginibre(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for v in m.a.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    }
    m
}

fn real_ginibre(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for v in m.a.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(re, 0.0);
    }
    m
}

/// Householder QR returning Q with the Haar phase correction diag(r_jj/|r_jj|)
/// already folded in. Returns None when a diagonal of R vanishes exactly
/// (probability zero; caller redraws).
fn qr_phase_corrected(mut a: CMatrix) -> Option<CMatrix> {
    let n = a.n;
    let mut q = CMatrix::identity(n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut norm2 = 0.0;
        for i in k..n {
            norm2 += a.get(i, k).norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            return None;
        }
        let x0 = a.get(k, k);
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        // v = x - alpha e_k, chosen so the leading entry never cancels
        for i in k..n {
            v[i] = a.get(i, k);
        }
        v[k] -= alpha;
        let vnorm2: f64 = v[k..n].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            let beta = 2.0 / vnorm2;
            // A <- (I - beta v v*) A on the trailing block
            for j in k..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in k..n {
                    dot += v[i].conj() * a.get(i, j);
                }
                let f = beta * dot;
                for i in k..n {
                    let cur = a.get(i, j);
                    a.set(i, j, cur - f * v[i]);
                }
            }
            // Q <- Q (I - beta v v*)
            for i in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for j in k..n {
                    dot += q.get(i, j) * v[j];
                }
                let f = beta * dot;
                for j in k..n {
                    let cur = q.get(i, j);
                    q.set(i, j, cur - f * v[j].conj());
                }
            }
        }
        let r_kk = a.get(k, k);
        if r_kk.norm() == 0.0 {
            return None;
        }
        let lambda = r_kk / r_kk.norm();
        for i in 0..n {
            let cur = q.get(i, k);
            q.set(i, k, cur * lambda);
        }
    }
    Some(q)
}

/// Haar measure on U(n).
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(n >= 1);
    loop {
        if let Some(q) = qr_phase_corrected(complex_ginibre(n, rng)) {
            return q;
        }
    }
}

/// Haar measure on SO(n): real QR gives Haar on O(n); a draw landing in the
/// det = -1 coset is pushed back by negating a fixed column, which is a
/// measure-preserving bijection between the cosets.
pub fn haar_special_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(n >= 1);
    loop {
        if let Some(mut q) = qr_phase_corrected(real_ginibre(n, rng)) {
            if det_lu(&q).re < 0.0 {
                for i in 0..n {
                    let cur = q.get(i, 0);
                    q.set(i, 0, -cur);
                }
            }
            return q;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Quat {
    a: Complex64,
    b: Complex64,
}

impl Quat {
    fn zero() -> Quat {
        Quat { a: Complex64::new(0.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }
    fn mul(self, o: Quat) -> Quat {
        // (a1 + b1 j)(a2 + b2 j) with j z = conj(z) j
        Quat {
            a: self.a * o.a - self.b * o.b.conj(),
            b: self.a * o.b + self.b * o.a.conj(),
        }
    }
    fn conj(self) -> Quat {
        Quat { a: self.a.conj(), b: -self.b }
    }
    fn norm_sqr(self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
    fn scale(self, s: f64) -> Quat {
        Quat { a: self.a * s, b: self.b * s }
    }
    fn sub(self, o: Quat) -> Quat {
        Quat { a: self.a - o.a, b: self.b - o.b }
    }
}

/// Haar measure on USp(n) for even n, via quaternion Gram-Schmidt on an
/// (n/2)-dimensional quaternion Ginibre matrix. Normalization makes R's
/// diagonal real and positive, which is exactly the phase fix the compact
/// symplectic group needs. Each quaternion q = a + bj embeds as the block
/// [[a, b], [-conj(b), conj(a)]].
pub fn haar_unitary_symplectic(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(n >= 2 && n % 2 == 0, "USp needs even dimension, got {n}");
    let m = n / 2;
    loop {
        // columns of quaternions
        let mut cols: Vec<Vec<Quat>> = (0..m)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let g: [f64; 4] = [
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                        ];
                        Quat {
                            a: Complex64::new(g[0], g[1]) * 0.5,
                            b: Complex64::new(g[2], g[3]) * 0.5,
                        }
                    })
                    .collect()
            })
            .collect();
        let mut failed = false;
        for j in 0..m {
            // two orthogonalization passes keep the defect near machine epsilon
            for _ in 0..2 {
                for i in 0..j {
                    let mut dot = Quat::zero();
                    for k in 0..m {
                        dot = Quat {
                            a: dot.a + cols[i][k].conj().mul(cols[j][k]).a,
                            b: dot.b + cols[i][k].conj().mul(cols[j][k]).b,
                        };
                    }
                    for k in 0..m {
                        let sub = cols[i][k].mul(dot);
                        cols[j][k] = cols[j][k].sub(sub);
                    }
                }
            }
            let norm2: f64 = cols[j].iter().map(|q| q.norm_sqr()).sum();
            if norm2 == 0.0 {
                failed = true;
                break;
            }
            let inv = 1.0 / norm2.sqrt();
            for k in 0..m {
                cols[j][k] = cols[j][k].scale(inv);
            }
        }
        if failed {
            continue;
        }
        let mut out = CMatrix::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            for (i, q) in col.iter().enumerate() {
                out.set(2 * i, 2 * j, q.a);
                out.set(2 * i, 2 * j + 1, q.b);
                out.set(2 * i + 1, 2 * j, -q.b.conj());
                out.set(2 * i + 1, 2 * j + 1, q.a.conj());
            }
        }
        return out;
    }
}

/// det via LU with partial pivoting.
fn det_lu(a: &CMatrix) -> Complex64 {
    let n = a.n;
    let mut m = a.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = m.get(k, k).norm();
        for i in k + 1..n {
            let v = m.get(i, k).norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            det = -det;
        }
        let d = m.get(k, k);
        det *= d;
        for i in k + 1..n {
            let f = m.get(i, k) / d;
            if f != Complex64::new(0.0, 0.0) {
                for j in k + 1..n {
                    let cur = m.get(i, j);
                    m.set(i, j, cur - f * m.get(k, j));
                }
            }
        }
    }
    det
}

/// |det(I - A)|, the characteristic polynomial of A evaluated at 1.
pub fn char_poly_at_one(a: &CMatrix) -> f64 {
    let n = a.n;
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            m.set(i, j, want - a.get(i, j));
        }
    }
    det_lu(&m).norm()
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix; returns the
/// accumulated eigenvector matrix (columns).
fn jacobi_eigenvectors(b: &mut CMatrix) -> Result<CMatrix> {
    let n = b.n;
    let mut v = CMatrix::identity(n);
    if n < 2 {
        return Ok(v);
    }
    let fro: f64 = b.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..40 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += b.get(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() < JACOBI_TOLERANCE * fro {
            return Ok(v);
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = b.get(p, q);
                let habs = beta.norm();
                if habs < 1e-300 {
                    continue;
                }
                let u = beta / habs; // phase that makes the pivot real
                let alpha = b.get(p, p).re;
                let gamma = b.get(q, q).re;
                let tau = (gamma - alpha) / (2.0 * habs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p <- c col_p - conj(u) s col_q, col_q <- s col_p + conj(u) c col_q
                let (cu, su) = (u.conj() * c, u.conj() * s);
                for i in 0..n {
                    let bp = b.get(i, p);
                    let bq = b.get(i, q);
                    b.set(i, p, bp * c - bq * su);
                    b.set(i, q, bp * s + bq * cu);
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, vp * c - vq * su);
                    v.set(i, q, vp * s + vq * cu);
                }
                // rows: row_p <- c row_p - u s row_q, row_q <- s row_p + u c row_q
                let (cu2, su2) = (u * c, u * s);
                for j in 0..n {
                    let bp = b.get(p, j);
                    let bq = b.get(q, j);
                    b.set(p, j, bp * c - bq * su2);
                    b.set(q, j, bp * s + bq * cu2);
                }
            }
        }
    }
    Err(Error::NonConvergence {
        what: "Jacobi eigenphase iteration",
        detail: format!("off-diagonal mass not below {JACOBI_TOLERANCE} after 40 sweeps"),
    })
}

/// Eigenphases of a unitary matrix, ascending in (-pi, pi].
pub fn eigenphases(a: &CMatrix) -> Result<Vec<f64>> {
    let n = a.n;
    let adj = a.adjoint();
    let mut b = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let h = (a.get(i, j) + adj.get(i, j)) * 0.5;
            let s = (a.get(i, j) - adj.get(i, j)) * Complex64::new(0.0, -0.5);
            b.set(i, j, h + s * JACOBI_MIX);
        }
    }
    let v = jacobi_eigenvectors(&mut b)?;
    let av = a.mul(&v);
    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        let mut lambda = Complex64::new(0.0, 0.0);
        for i in 0..n {
            lambda += v.get(i, j).conj() * av.get(i, j);
        }
        if (lambda.norm() - 1.0).abs() > UNIT_CIRCLE_TOLERANCE {
            return Err(Error::NonConvergence {
                what: "eigenphase extraction",
                detail: format!("Rayleigh quotient {lambda} is off the unit circle"),
            });
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((av.get(i, j) - lambda * v.get(i, j)).norm());
        }
        if worst > 1e-7 {
            return Err(Error::NonConvergence {
                what: "eigenphase extraction",
                detail: format!("eigenvector residual {worst:.2e} at column {j}"),
            });
        }
        phases.push(lambda.im.atan2(lambda.re));
    }
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// One Haar draw reduced to the quantities the statistics need.
#[derive(Debug, Clone)]
pub struct EnsembleSample {
    pub group: Group,
    pub n: usize,
    pub eigenphases: Vec<f64>,
    pub lambda_at_one: f64,
    pub seed: u64,
    pub draw_index: u64,
}

pub fn sample(group: Group, n: usize, seed: u64, draw_index: u64) -> Result<EnsembleSample> {
    let mut rng = stream_rng(seed, draw_index);
    let m = match group {
        Group::Unitary => haar_unitary(n, &mut rng),
        Group::SpecialOrthogonal => haar_special_orthogonal(n, &mut rng),
        Group::UnitarySymplectic => haar_unitary_symplectic(n, &mut rng),
    };
    let eigenphases = eigenphases(&m)?;
    let lambda_at_one = char_poly_at_one(&m);
    Ok(EnsembleSample { group, n, eigenphases, lambda_at_one, seed, draw_index })
}

/// Excised orthogonal model: SO(2 n_std) conditioned on the characteristic
/// polynomial at 1 clearing the discretization-derived cutoff.
#[derive(Debug, Clone, Copy)]
pub struct ExcisedConfig {
    pub c_std: f64,
    /// Weight k of the modeled family; enters the cutoff exponent.
    pub weight: u32,
    pub n_std: usize,
}

impl ExcisedConfig {
    /// cutoff = c_std * exp((1-k) n_std / 2), the matrix-side image of the
    /// minimum nonzero central value.
    pub fn cutoff(&self) -> f64 {
        self.c_std * (((1.0 - self.weight as f64) * self.n_std as f64) / 2.0).exp()
    }
}

/// Rejection-sample one accepted draw, consuming one draw index per attempt
/// starting at start_draw. The accepted sample's draw_index records where the
/// scan stopped, so callers can continue with draw_index + 1.
pub fn sample_excised(
    cfg: &ExcisedConfig,
    seed: u64,
    start_draw: u64,
    max_attempts: usize,
) -> Result<EnsembleSample> {
    let cutoff = cfg.cutoff();
    for k in 0..max_attempts {
        let s = sample(Group::SpecialOrthogonal, 2 * cfg.n_std, seed, start_draw + k as u64)?;
        if s.lambda_at_one >= cutoff {
            return Ok(s);
        }
    }
    Err(Error::RejectionStarved { accepted: 0, attempts: max_attempts })
}

/// A batch of accepted draws over consecutive draw indices.
pub fn sample_excised_batch(
    cfg: &ExcisedConfig,
    seed: u64,
    count: usize,
    max_attempts: usize,
) -> Result<Vec<EnsembleSample>> {
    let cutoff = cfg.cutoff();
    let mut out = Vec::with_capacity(count);
    for attempt in 0..max_attempts {
        let s = sample(Group::SpecialOrthogonal, 2 * cfg.n_std, seed, attempt as u64)?;
        if s.lambda_at_one >= cutoff {
            out.push(s);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(Error::RejectionStarved { accepted: out.len(), attempts: max_attempts })
}
