//! Regenerates data/13_2_e_a.csv: Fourier coefficients of the weight-2
//! level-13 newform whose nebentypus is the order-6 character with
//! chi(2) = zeta_6 = e^(i pi/3).
//!
//! Everything runs in exact arithmetic over Q(zeta_12) so the fixture's
//! provenance is fully checkable. The space M_2(13, chi) has dimension 3,
//! spanned by two weight-2 Eisenstein series and the square of a weight-1
//! Eisenstein series for an odd character chi_1 with chi_1^2 = chi. The
//! Hecke operator T_2 acts triangularly in that basis; its cuspidal
//! eigenvector is the newform. Coefficients at primes come from the
//! convolution square, the rest by Hecke multiplicativity, and the two
//! routes are cross-checked exactly for n <= 2000.
//!
//!   cargo run --release -p twistzeros --example generate_13_2_e_a [n_max]
//!
//! Verifications performed before writing anything: the T_2 expansion of
//! the square holds for n = 0..10, the eigenvector combination has zero
//! constant term (it really is a cusp form), a_2 and a_3 equal the known
//! values -1 - zeta_6 and -2 + 2 zeta_6, all coefficients lie in
//! Z[zeta_6], conj(a_n) = conj(chi(n)) a_n, and |a_p| <= 2 sqrt(p).

use std::io::Write;

// ---------------------------------------------------------------------------
// exact arithmetic in Z[zeta_12] and Q(zeta_12), zeta = e^(i pi/6),
// minimal polynomial x^4 - x^2 + 1

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Z12([i128; 4]);

impl Z12 {
    const ZERO: Z12 = Z12([0; 4]);
    const ONE: Z12 = Z12([1, 0, 0, 0]);

    fn from_int(v: i128) -> Z12 {
        Z12([v, 0, 0, 0])
    }

    fn add(self, o: Z12) -> Z12 {
        Z12([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    fn sub(self, o: Z12) -> Z12 {
        Z12([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }

    fn neg(self) -> Z12 {
        Z12([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }

    fn scale(self, v: i128) -> Z12 {
        Z12([self.0[0] * v, self.0[1] * v, self.0[2] * v, self.0[3] * v])
    }

    fn mul(self, o: Z12) -> Z12 {
        let mut d = [0i128; 7];
        for i in 0..4 {
            if self.0[i] == 0 {
                continue;
            }
            for j in 0..4 {
                d[i + j] += self.0[i] * o.0[j];
            }
        }
        // z^4 = z^2 - 1, z^5 = z^3 - z, z^6 = -1
        let mut c = [d[0], d[1], d[2], d[3]];
        c[2] += d[4];
        c[0] -= d[4];
        c[3] += d[5];
        c[1] -= d[5];
        c[0] -= d[6];
        Z12(c)
    }

    /// Complex conjugation, i.e. zeta -> zeta^11.
    fn conj(self) -> Z12 {
        let [c0, c1, c2, c3] = self.0;
        Z12([c0 + c2, c1, -c2, -c1 - c3])
    }

    fn is_zero(self) -> bool {
        self == Z12::ZERO
    }

    /// Embedding with zeta = e^(i pi/6).
    fn to_complex(self) -> (f64, f64) {
        let [c0, c1, c2, c3] = self.0.map(|v| v as f64);
        let h = 3.0f64.sqrt() / 2.0;
        (c0 + c1 * h + c2 * 0.5, c1 * 0.5 + c2 * h + c3)
    }
}

/// zeta^k for any k.
fn zeta_pow(k: i64) -> Z12 {
    let mut z = Z12::ONE;
    let step = Z12([0, 1, 0, 0]);
    for _ in 0..k.rem_euclid(12) {
        z = z.mul(step);
    }
    z
}

#[derive(Clone, Copy, Debug)]
struct Q12 {
    num: Z12,
    den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Q12 {
    const ZERO: Q12 = Q12 {
        num: Z12::ZERO,
        den: 1,
    };
    const ONE: Q12 = Q12 {
        num: Z12::ONE,
        den: 1,
    };

    fn new(num: Z12, den: i128) -> Q12 {
        assert!(den != 0);
        let mut q = Q12 { num, den };
        if q.den < 0 {
            q.num = q.num.neg();
            q.den = -q.den;
        }
        let mut g = q.den;
        for c in q.num.0 {
            g = gcd(g, c);
        }
        if g > 1 {
            q.num = Z12(q.num.0.map(|c| c / g));
            q.den /= g;
        }
        q
    }

    fn from_z(z: Z12) -> Q12 {
        Q12 { num: z, den: 1 }
    }

    fn add(self, o: Q12) -> Q12 {
        Q12::new(
            self.num.scale(o.den).add(o.num.scale(self.den)),
            self.den * o.den,
        )
    }

    fn sub(self, o: Q12) -> Q12 {
        self.add(o.neg())
    }

    fn neg(self) -> Q12 {
        Q12 {
            num: self.num.neg(),
            den: self.den,
        }
    }

    fn mul(self, o: Q12) -> Q12 {
        Q12::new(self.num.mul(o.num), self.den * o.den)
    }

    fn inv(self) -> Q12 {
        assert!(!self.num.is_zero(), "division by zero in Q(zeta_12)");
        // columns of m are the coordinates of num * zeta^j; Cramer's rule
        // solves num * u = 1
        let mut m = [[0i128; 4]; 4];
        for (j, col) in m.iter_mut().enumerate() {
            *col = self.num.mul(zeta_pow(j as i64)).0;
        }
        let mt = transpose(m);
        let det = det4(mt);
        assert!(det != 0, "zeta_12 multiplication matrix is singular");
        let e0 = [1, 0, 0, 0];
        let mut u = [0i128; 4];
        for (j, uj) in u.iter_mut().enumerate() {
            let mut mj = mt;
            for r in 0..4 {
                mj[r][j] = e0[r];
            }
            *uj = det4(mj);
        }
        Q12::new(Z12(u).scale(self.den), det)
    }

    fn div(self, o: Q12) -> Q12 {
        self.mul(o.inv())
    }

    fn is_zero(self) -> bool {
        self.num.is_zero()
    }

    fn eq(self, o: Q12) -> bool {
        self.sub(o).is_zero()
    }

    /// The underlying algebraic integer, if the denominator has cleared.
    fn as_integral(self) -> Option<Z12> {
        (self.den == 1).then_some(self.num)
    }
}

fn transpose(m: [[i128; 4]; 4]) -> [[i128; 4]; 4] {
    let mut t = [[0i128; 4]; 4];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[j][i] = v;
        }
    }
    t
}

fn det4(m: [[i128; 4]; 4]) -> i128 {
    let det3 = |m: [[i128; 3]; 3]| -> i128 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut acc = 0i128;
    for c in 0..4 {
        let mut minor = [[0i128; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for k in 0..4 {
                if k == c {
                    continue;
                }
                minor[r - 1][cc] = m[r][k];
                cc += 1;
            }
        }
        let sign = if c % 2 == 0 { 1 } else { -1 };
        acc += sign * m[0][c] * det3(minor);
    }
    acc
}

// ---------------------------------------------------------------------------
// Dirichlet characters mod 13 through the primitive root 2

const LEVEL: usize = 13;

/// dlog[a] = discrete log of a base 2 mod 13, dlog[1] = 0.
fn dlog_table() -> [i64; LEVEL] {
    let mut t = [0i64; LEVEL];
    let mut pow = 1usize;
    for e in 0..12 {
        t[pow] = e;
        pow = pow * 2 % LEVEL;
    }
    t
}

/// chi_j(a) = zeta_12^(j * dlog a); chi_j(13 Z) = 0.
fn character(j: i64, dlog: &[i64; LEVEL]) -> Vec<Z12> {
    (0..LEVEL)
        .map(|a| {
            if a == 0 {
                Z12::ZERO
            } else {
                zeta_pow(j * dlog[a])
            }
        })
        .collect()
}

fn chi_at(chi: &[Z12], n: usize) -> Z12 {
    chi[n % LEVEL]
}

// ---------------------------------------------------------------------------
// Eisenstein series

/// Weight-1 series for an odd character psi mod 13:
/// constant -B_{1,psi}/2, a_n = sum_{d | n} psi(d).
/// B_{1,psi} = (1/13) sum_a psi(a) a.
fn eisenstein_weight1(psi: &[Z12], n_max: usize) -> (Q12, Vec<Z12>) {
    let mut b1 = Z12::ZERO;
    for a in 1..LEVEL {
        b1 = b1.add(psi[a].scale(a as i128));
    }
    let constant = Q12::new(b1.neg(), 2 * LEVEL as i128);
    let mut coeffs = vec![Z12::ZERO; n_max + 1];
    for d in 1..=n_max {
        let c = chi_at(psi, d);
        if c.is_zero() {
            continue;
        }
        for m in (d..=n_max).step_by(d) {
            coeffs[m] = coeffs[m].add(c);
        }
    }
    (constant, coeffs)
}

/// Weight-2 series with a_n = sum_{d | n} chi(d) d and constant
/// -B_{2,chi}/4, B_{2,chi} = (1/13) sum chi(a) a^2 - sum chi(a) a.
fn eisenstein_weight2_a(chi: &[Z12], n_max: usize) -> (Q12, Vec<Z12>) {
    let mut s2 = Z12::ZERO;
    let mut s1 = Z12::ZERO;
    for a in 1..LEVEL {
        s2 = s2.add(chi[a].scale((a * a) as i128));
        s1 = s1.add(chi[a].scale(a as i128));
    }
    let b2 = Q12::new(s2, LEVEL as i128).sub(Q12::from_z(s1));
    let constant = b2.neg().mul(Q12::new(Z12::ONE, 4));
    let mut coeffs = vec![Z12::ZERO; n_max + 1];
    for d in 1..=n_max {
        let c = chi_at(chi, d);
        if c.is_zero() {
            continue;
        }
        for m in (d..=n_max).step_by(d) {
            coeffs[m] = coeffs[m].add(c.scale(d as i128));
        }
    }
    (constant, coeffs)
}

/// Weight-2 series with a_n = sum_{d | n} chi(n/d) d and zero constant.
fn eisenstein_weight2_b(chi: &[Z12], n_max: usize) -> (Q12, Vec<Z12>) {
    let mut coeffs = vec![Z12::ZERO; n_max + 1];
    for e in 1..=n_max {
        let c = chi_at(chi, e);
        if c.is_zero() {
            continue;
        }
        for (t, m) in (e..=n_max).step_by(e).enumerate() {
            coeffs[m] = coeffs[m].add(c.scale((t + 1) as i128));
        }
    }
    (Q12::ZERO, coeffs)
}

/// Coefficient n of the product of two weight-1 series (constant, coeffs).
fn product_coeff(f: &(Q12, Vec<Z12>), g: &(Q12, Vec<Z12>), n: usize) -> Q12 {
    let mut inner = Z12::ZERO;
    for i in 1..n {
        inner = inner.add(f.1[i].mul(g.1[n - i]));
    }
    let mut out = Q12::from_z(inner);
    if n == 0 {
        return f.0.mul(g.0);
    }
    out = out.add(f.0.mul(Q12::from_z(g.1[n])));
    out = out.add(g.0.mul(Q12::from_z(f.1[n])));
    out
}

// ---------------------------------------------------------------------------

fn solve3(mut m: [[Q12; 4]; 3]) -> Option<[Q12; 3]> {
    for col in 0..3 {
        let pivot = (col..3).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col];
        for r in 0..3 {
            if r == col {
                continue;
            }
            let factor = m[r][col].div(p);
            for c in col..4 {
                m[r][c] = m[r][c].sub(factor.mul(m[col][c]));
            }
        }
    }
    Some([
        m[0][3].div(m[0][0]),
        m[1][3].div(m[1][1]),
        m[2][3].div(m[2][2]),
    ])
}

struct Eigenspace {
    v1: Q12,
    v2: Q12,
    scale: Q12, // a_1 of the unnormalized combination
    ea: (Q12, Vec<Z12>),
    eb: (Q12, Vec<Z12>),
    g: Vec<Q12>, // product series, dense up to cross-check bound
    e1: (Q12, Vec<Z12>),
    e2: (Q12, Vec<Z12>),
}

/// Builds the T_2 eigenbasis from the weight-1 pair (j1, j2); returns None
/// if the square degenerates into the Eisenstein span.
fn try_pair(
    j1: i64,
    j2: i64,
    chi: &[Z12],
    dlog: &[i64; LEVEL],
    n_max: usize,
    dense: usize,
) -> Option<Eigenspace> {
    let e1 = eisenstein_weight1(&character(j1, dlog), n_max);
    let e2 = eisenstein_weight1(&character(j2, dlog), n_max);
    let ea = eisenstein_weight2_a(chi, n_max);
    let eb = eisenstein_weight2_b(chi, n_max);

    let g: Vec<Q12> = (0..=dense).map(|n| product_coeff(&e1, &e2, n)).collect();
    let chi2 = Q12::from_z(chi_at(chi, 2));
    let t2g = |n: usize| -> Q12 {
        // (T_2 h)_n = h_{2n} + 2 chi(2) h_{n/2}
        let mut v = g[2 * n];
        if n % 2 == 0 {
            v = v.add(chi2.mul(g[n / 2]).mul(Q12::new(Z12::from_int(2), 1)));
        }
        v
    };
    let ea_at = |n: usize| -> Q12 {
        if n == 0 {
            ea.0
        } else {
            Q12::from_z(ea.1[n])
        }
    };
    let eb_at = |n: usize| -> Q12 {
        if n == 0 {
            eb.0
        } else {
            Q12::from_z(eb.1[n])
        }
    };

    // solve (T_2 g) = x EA + y EB + z g from the first three coefficients
    let rows: Vec<[Q12; 4]> = (0..3)
        .map(|n| [ea_at(n), eb_at(n), g[n], t2g(n)])
        .collect();
    let [x, y, z] = solve3([rows[0], rows[1], rows[2]])?;

    // overdetermined: the expansion must continue to hold
    for n in 3..=10 {
        let lhs = x
            .mul(ea_at(n))
            .add(y.mul(eb_at(n)))
            .add(z.mul(g[n]));
        if !lhs.eq(t2g(n)) {
            return None;
        }
    }

    // Eisenstein T_2 eigenvalues; z must avoid both, else the square has no
    // cuspidal component
    let two = Q12::new(Z12::from_int(2), 1);
    let lam_a = Q12::ONE.add(two.mul(chi2));
    let lam_b = chi2.add(two);
    if z.sub(lam_a).is_zero() || z.sub(lam_b).is_zero() {
        return None;
    }
    let v1 = x.div(z.sub(lam_a));
    let v2 = y.div(z.sub(lam_b));

    // cuspidality: zero constant term, nonzero leading coefficient
    let f0 = v1.mul(ea.0).add(g[0]);
    assert!(f0.is_zero(), "eigenvector combination is not a cusp form");
    let scale = v1.mul(ea_at(1)).add(v2.mul(eb_at(1))).add(g[1]);
    if scale.is_zero() {
        return None;
    }
    Some(Eigenspace {
        v1,
        v2,
        scale,
        ea,
        eb,
        g,
        e1,
        e2,
    })
}

fn main() {
    let n_max: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("n_max must be an integer"))
        .unwrap_or(42_000);
    assert!(n_max >= 20, "need at least 20 coefficients for the T_2 check");
    let dense = 2_000.min(n_max);

    let dlog = dlog_table();
    // nebentypus: chi(2) = zeta_12^2 = zeta_6, so j = 2
    let chi = character(2, &dlog);
    assert_eq!(chi_at(&chi, 2), zeta_pow(2));

    // odd pairs (j1, j2) with chi_{j1} chi_{j2} = chi
    let pairs = [(1, 1), (3, 11), (5, 9), (7, 7), (9, 5), (11, 3)];
    let mut space = None;
    for &(j1, j2) in &pairs {
        if let Some(s) = try_pair(j1, j2, &chi, &dlog, n_max, dense) {
            eprintln!("weight-1 pair ({j1}, {j2}) spans the cusp line");
            space = Some(s);
            break;
        }
    }
    let sp = space.expect("no weight-1 pair produced a cuspidal component");

    // dense route: f = (v1 EA + v2 EB + E1^2) / scale, exact
    let f_dense: Vec<Q12> = (0..=dense)
        .map(|n| {
            let ea = if n == 0 {
                sp.ea.0
            } else {
                Q12::from_z(sp.ea.1[n])
            };
            let eb = if n == 0 {
                sp.eb.0
            } else {
                Q12::from_z(sp.eb.1[n])
            };
            sp.v1
                .mul(ea)
                .add(sp.v2.mul(eb))
                .add(sp.g[n])
                .div(sp.scale)
        })
        .collect();

    let zeta6 = zeta_pow(2);
    let expect_a2 = Z12::from_int(-1).sub(zeta6); // -1 - zeta_6
    let expect_a3 = Z12::from_int(-2).add(zeta6.scale(2)); // -2 + 2 zeta_6
    assert!(f_dense[1].eq(Q12::ONE));
    assert!(f_dense[2].eq(Q12::from_z(expect_a2)), "a_2 mismatch");
    assert!(f_dense[3].eq(Q12::from_z(expect_a3)), "a_3 mismatch");

    // prime route: coefficients at primes from the convolution, everything
    // else by the Hecke recursion
    let mut spf = vec![0usize; n_max + 1]; // smallest prime factor
    for i in 2..=n_max {
        if spf[i] == 0 {
            for m in (i..=n_max).step_by(i) {
                if spf[m] == 0 {
                    spf[m] = i;
                }
            }
        }
    }

    let mut a = vec![Q12::ZERO; n_max + 1];
    a[1] = Q12::ONE;
    for p in 2..=n_max {
        if spf[p] != p {
            continue;
        }
        let ea = Q12::from_z(sp.ea.1[p]);
        let eb = Q12::from_z(sp.eb.1[p]);
        let gp = product_coeff(&sp.e1, &sp.e2, p);
        a[p] = sp.v1.mul(ea).add(sp.v2.mul(eb)).add(gp).div(sp.scale);
    }
    for n in 2..=n_max {
        let p = spf[n];
        if p == n {
            continue; // prime, already set
        }
        let mut pe = p;
        let mut m = n / p;
        while m % p == 0 {
            pe *= p;
            m /= p;
        }
        a[n] = if m > 1 {
            a[pe].mul(a[m])
        } else {
            // n = p^e with e >= 2: a_n = a_p a_{n/p} - chi(p) p a_{n/p^2}
            let chip = Q12::from_z(chi_at(&chi, p)).mul(Q12::new(Z12::from_int(p as i128), 1));
            a[p].mul(a[n / p]).sub(chip.mul(a[n / p / p]))
        };
    }

    // the two routes must agree exactly
    for n in 1..=dense {
        assert!(a[n].eq(f_dense[n]), "route mismatch at n = {n}");
    }

    // integrality, parity, duality, and the Ramanujan bound
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let int = a[n]
            .as_integral()
            .unwrap_or_else(|| panic!("a_{n} is not an algebraic integer: {:?}", a[n]));
        assert!(
            int.0[1] == 0 && int.0[3] == 0,
            "a_{n} leaves Z[zeta_6]: {int:?}"
        );
        if n % LEVEL != 0 {
            let twisted = chi_at(&chi, n).conj().mul(int);
            assert_eq!(int.conj(), twisted, "conj(a_{n}) != conj(chi(n)) a_{n}");
        }
        let (re, im) = int.to_complex();
        if spf[n] == n {
            let bound = 2.0 * (n as f64).sqrt() + 1e-9;
            assert!(re.hypot(im) <= bound, "|a_{n}| > 2 sqrt({n})");
        }
        rows.push((n, re, im));
    }

    let out_path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/13_2_e_a.csv");
    std::fs::create_dir_all(concat!(env!("CARGO_MANIFEST_DIR"), "/data")).unwrap();
    let mut out = std::io::BufWriter::new(std::fs::File::create(out_path).unwrap());
    writeln!(out, "n,re,im").unwrap();
    for (n, re, im) in &rows {
        writeln!(out, "{n},{re},{im}").unwrap();
    }
    out.into_inner().unwrap();
    println!("wrote {} coefficients to {}", rows.len(), out_path);
    println!(
        "a_2 = {:?} -> ({}, {})",
        a[2].num,
        rows[1].1,
        rows[1].2
    );
}
