//! Kronecker symbols, fundamental discriminants, and twist families.
//!
//! Twists are always by the real primitive character psi_D = (D/.) attached
//! to a fundamental discriminant D > 1 coprime to the level. The functional
//! equation of the twisted L-function picks up the factor psi_D(-M), so
//! family membership (and hence the forced sign) is controlled entirely by
//! congruence conditions on D; see [`FamilySelector`].

/// Kronecker symbol (a/b), defined for all integers.
///
/// Completely multiplicative in b, with (a/2) = 0, +1, -1 according to
/// a mod 8 being even, +-1, +-3, and (a/-1) = sign(a) for a != 0.
/// (a/0) is 1 for a = +-1 and 0 otherwise.
pub fn kronecker(a: i64, b: i64) -> i32 {
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a & 1 == 0 && b & 1 == 0 {
        return 0;
    }
    let mut a = a;
    let mut b = b;
    let mut k = 1i32;
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    let mut v = 0u32;
    while b & 1 == 0 {
        b >>= 1;
        v += 1;
    }
    if v & 1 == 1 {
        k *= mod8_sign(a);
    }
    if a < 0 {
        a = -a;
        if b & 3 == 3 {
            k = -k;
        }
    }
    a %= b;
    // ordinary Jacobi from here: a >= 0, b odd > 0
    while a != 0 {
        let mut v = 0u32;
        while a & 1 == 0 {
            a >>= 1;
            v += 1;
        }
        if v & 1 == 1 {
            k *= mod8_sign(b);
        }
        if a & 3 == 3 && b & 3 == 3 {
            k = -k;
        }
        let t = b % a;
        b = a;
        a = t;
    }
    if b == 1 {
        k
    } else {
        0
    }
}

/// (a/2) as a function of a mod 8.
fn mod8_sign(a: i64) -> i32 {
    match a.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

fn is_squarefree(mut m: i64) -> bool {
    debug_assert!(m > 0);
    let mut p = 2i64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// True for d > 1 of the shape d = 1 mod 4 squarefree, or d = 4m with
/// m = 2, 3 mod 4 squarefree. Negative discriminants are out of scope.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d <= 1 {
        return false;
    }
    if d.rem_euclid(4) == 1 {
        is_squarefree(d)
    } else if d % 4 == 0 {
        let m = d / 4;
        matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
    } else {
        false
    }
}

/// A positive fundamental discriminant, d > 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Option<Self> {
        if is_fundamental_discriminant(d) {
            Some(FundamentalDiscriminant(d))
        } else {
            None
        }
    }

    pub fn get(self) -> i64 {
        self.0
    }

    /// psi_D(n), the real primitive character of conductor D.
    pub fn chi(self, n: i64) -> i32 {
        kronecker(self.0, n)
    }

    pub fn coprime_to(self, m: i64) -> bool {
        gcd(self.0, m) == 1
    }
}

impl std::fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// All fundamental discriminants 1 < d <= x, ascending.
pub fn fundamental_discriminants(x: i64) -> Vec<FundamentalDiscriminant> {
    (2..=x.max(1))
        .filter(|&d| is_fundamental_discriminant(d))
        .map(FundamentalDiscriminant)
        .collect()
}

/// Which discriminants belong to the twist family of a form.
///
/// All variants additionally require gcd(D, level) = 1.
///
/// * `Principal` (trivial nebentypus, self-dual): psi_D(M) epsilon = +1,
///   so every member has forced sign +1.
/// * `SelfCm` (quadratic nebentypus, self-dual): psi_D(M) equal to a chosen
///   sign; the central values are real either way.
/// * `NonSelfDual` (complex nebentypus): D in a fixed residue class mod M,
///   which pins the argument of the functional-equation sign.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilySelector {
    Principal { epsilon: i32 },
    SelfCm { sign: i32 },
    NonSelfDual { residue: i64 },
}

/// Family membership test for a fundamental discriminant.
pub fn is_admissible(level: i64, d: FundamentalDiscriminant, sel: FamilySelector) -> bool {
    if !d.coprime_to(level) {
        return false;
    }
    match sel {
        FamilySelector::Principal { epsilon } => {
            debug_assert!(epsilon == 1 || epsilon == -1);
            d.chi(level) * epsilon == 1
        }
        FamilySelector::SelfCm { sign } => {
            debug_assert!(sign == 1 || sign == -1);
            d.chi(level) == sign
        }
        FamilySelector::NonSelfDual { residue } => d.get().rem_euclid(level) == residue.rem_euclid(level),
    }
}

/// Admissible discriminants of the family up to `x_max`, ascending.
pub fn admissible_discriminants(
    level: i64,
    sel: FamilySelector,
    x_max: i64,
) -> Vec<FundamentalDiscriminant> {
    fundamental_discriminants(x_max)
        .into_iter()
        .filter(|&d| is_admissible(level, d, sel))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Kronecker oracle: factor the bottom argument and take the
    /// product of Legendre symbols computed by Euler's criterion.
    fn kronecker_brute(a: i64, n: i64) -> i32 {
        fn mod_pow(mut b: i64, mut e: i64, m: i64) -> i64 {
            let mut acc = 1i64;
            b = b.rem_euclid(m);
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % m;
                }
                b = b * b % m;
                e >>= 1;
            }
            acc
        }
        fn legendre(a: i64, p: i64) -> i32 {
            let r = mod_pow(a, (p - 1) / 2, p);
            if r == 0 {
                0
            } else if r == 1 {
                1
            } else {
                -1
            }
        }
        if n == 0 {
            return if a.abs() == 1 { 1 } else { 0 };
        }
        let mut k = 1i32;
        let mut m = n;
        if m < 0 {
            m = -m;
            if a < 0 {
                k = -k;
            }
        }
        let mut p = 2i64;
        while p * p <= m {
            while m % p == 0 {
                m /= p;
                k *= if p == 2 { mod8_sign(a) } else { legendre(a, p) };
            }
            p += 1;
        }
        if m > 1 {
            k *= if m == 2 { mod8_sign(a) } else { legendre(a, m) };
        }
        k
    }

    #[test]
    fn kronecker_pinned_values() {
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(5, 5), 0);
        assert_eq!(kronecker(12, 11), 1);
        assert_eq!(kronecker(-1, 11), -1);
        assert_eq!(kronecker(-1, 13), 1);
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(0, 1), 1);
        assert_eq!(kronecker(0, 5), 0);
        assert_eq!(kronecker(7, 0), 0);
        assert_eq!(kronecker(-1, 0), 1);
    }

    #[test]
    fn kronecker_matches_brute_force() {
        for a in -500..=500 {
            for n in -500..=500 {
                assert_eq!(
                    kronecker(a, n),
                    kronecker_brute(a, n),
                    "mismatch at ({a}/{n})"
                );
            }
        }
    }

    #[test]
    fn kronecker_positive_discriminant_at_minus_one() {
        for d in fundamental_discriminants(10_000) {
            assert_eq!(kronecker(d.get(), -1), 1, "D = {d}");
        }
    }

    #[test]
    fn kronecker_periodicity_mod_d() {
        // psi_D has conductor D for fundamental D
        for d in fundamental_discriminants(200) {
            for n in 1..3 * d.get() {
                assert_eq!(d.chi(n), d.chi(n + d.get()), "D = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn fundamental_discriminants_small_table() {
        let got: Vec<i64> = fundamental_discriminants(21).iter().map(|d| d.get()).collect();
        assert_eq!(got, vec![5, 8, 12, 13, 17, 21]);
        assert!(fundamental_discriminants(4).is_empty());
    }

    #[test]
    fn fundamental_discriminants_match_brute_filter() {
        // definition applied literally, term by term, to 2..=x
        let brute: Vec<i64> = (2..=5000)
            .filter(|&d| {
                let sf = |m: i64| (2..).take_while(|p| p * p <= m).all(|p| m % (p * p) != 0);
                (d % 4 == 1 && sf(d)) || (d % 4 == 0 && (d / 4 % 4 == 2 || d / 4 % 4 == 3) && sf(d / 4))
            })
            .collect();
        let got: Vec<i64> = fundamental_discriminants(5000).iter().map(|d| d.get()).collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn discriminant_constructor_rejects_non_fundamental() {
        assert!(FundamentalDiscriminant::new(1).is_none());
        assert!(FundamentalDiscriminant::new(-3).is_none());
        assert!(FundamentalDiscriminant::new(4).is_none());
        assert!(FundamentalDiscriminant::new(9).is_none());
        assert!(FundamentalDiscriminant::new(14).is_none());
        assert!(FundamentalDiscriminant::new(16).is_none());
        assert!(FundamentalDiscriminant::new(5).is_some());
        assert!(FundamentalDiscriminant::new(8).is_some());
        assert!(FundamentalDiscriminant::new(40).is_some());
    }

    #[test]
    fn admissibility_by_family() {
        let d5 = FundamentalDiscriminant::new(5).unwrap();
        let d8 = FundamentalDiscriminant::new(8).unwrap();
        let d40 = FundamentalDiscriminant::new(40).unwrap();
        // level 11, epsilon +1: psi_5(11) = (5/11) = +1
        assert!(is_admissible(11, d5, FamilySelector::Principal { epsilon: 1 }));
        // (8/11) = -1
        assert!(!is_admissible(11, d8, FamilySelector::Principal { epsilon: 1 }));
        // self-CM at level 7: (8/7) = (1/7) = +1
        assert!(is_admissible(7, d8, FamilySelector::SelfCm { sign: 1 }));
        assert!(!is_admissible(7, d8, FamilySelector::SelfCm { sign: -1 }));
        // non-self-dual at level 13: 40 = 1 mod 13
        assert!(is_admissible(13, d40, FamilySelector::NonSelfDual { residue: 1 }));
        assert!(!is_admissible(13, d5, FamilySelector::NonSelfDual { residue: 1 }));
        // discriminants sharing a factor with the level are never admissible
        let d13 = FundamentalDiscriminant::new(13).unwrap();
        assert!(!is_admissible(13, d13, FamilySelector::NonSelfDual { residue: 0 }));
    }

    #[test]
    fn admissible_sweep_is_filtered_ascending() {
        let ds = admissible_discriminants(11, FamilySelector::Principal { epsilon: 1 }, 500);
        assert!(!ds.is_empty());
        assert!(ds.windows(2).all(|w| w[0] < w[1]));
        assert!(ds
            .iter()
            .all(|d| d.chi(11) == 1 && d.coprime_to(11) && is_fundamental_discriminant(d.get())));
    }
}
