//! Linear polynomial families and their admissibility: no single prime may
//! divide the product of the family's values at every integer.
//!
//! Two certifiers are provided. The residue test is complete for linear
//! families: a prime `p` is an obstruction exactly when the root classes of
//! the polynomials cover all residues mod `p`, and since one linear
//! polynomial removes at most one class, only `p <= family size` (plus any
//! prime dividing both coefficients of a member) can obstruct. The
//! coprimality shortcut checks `gcd(P(1), P(P(1))) = 1` on exact unbounded
//! integers; it is sufficient only, so a gcd above 1 is reported as
//! inconclusive, never as a refutation.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, is_prime, pow_mod};
use crate::error::Error;

/// A linear integer polynomial `a*x + b` with `a >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearPolynomial {
    pub a: u64,
    pub b: i64,
}

impl LinearPolynomial {
    pub fn new(a: u64, b: i64) -> Result<Self, Error> {
        if a == 0 {
            return Err(Error::invalid("leading coefficient must be >= 1"));
        }
        Ok(LinearPolynomial { a, b })
    }

    /// `a*x + b` as an exact integer; `None` when the magnitude leaves i128.
    pub fn eval(&self, x: u64) -> Option<i128> {
        (self.a as i128)
            .checked_mul(x as i128)?
            .checked_add(self.b as i128)
    }
}

impl std::fmt::Display for LinearPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.a, self.b) {
            (1, 0) => write!(f, "x"),
            (1, b) if b > 0 => write!(f, "x+{b}"),
            (1, b) => write!(f, "x{b}"),
            (a, 0) => write!(f, "{a}x"),
            (a, b) if b > 0 => write!(f, "{a}x+{b}"),
            (a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// A nonempty list of linear polynomials, optionally tagged with the `d`
/// it was generated from (coefficients `kd+1`, constant terms 1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialFamily {
    polys: Vec<LinearPolynomial>,
    d: Option<u64>,
}

impl PolynomialFamily {
    pub fn from_polys(polys: Vec<LinearPolynomial>) -> Result<Self, Error> {
        if polys.is_empty() {
            return Err(Error::invalid("family must be nonempty"));
        }
        Ok(PolynomialFamily { polys, d: None })
    }

    pub fn polys(&self) -> &[LinearPolynomial] {
        &self.polys
    }

    pub fn family_size(&self) -> usize {
        self.polys.len()
    }

    pub fn d(&self) -> Option<u64> {
        self.d
    }
}

/// The family `{(kd+1)x + 1 : 0 <= k < family_size}` in increasing
/// coefficient order.
pub fn build_family(d: u64, family_size: u64) -> Result<PolynomialFamily, Error> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if family_size < 2 {
        return Err(Error::invalid("family_size must be >= 2"));
    }
    let polys = (0..family_size)
        .map(|k| {
            let a = k
                .checked_mul(d)
                .and_then(|kd| kd.checked_add(1))
                .ok_or(Error::Overflow("family coefficient"))?;
            Ok(LinearPolynomial { a, b: 1 })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(PolynomialFamily { polys, d: Some(d) })
}

/// Which certifier produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Residue,
    Coprimality,
    Both,
}

/// Outcome of an admissibility check. `Inconclusive` can only come from the
/// one-directional coprimality shortcut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    Inconclusive,
}

/// The exact pair `(P(1), P(P(1)))` and its gcd, computed on unbounded
/// integers (never reduced before the gcd).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimalityCertificate {
    pub p_of_one: BigUint,
    pub p_of_p_of_one: BigUint,
    pub gcd: BigUint,
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    pub method: Method,
    /// Smallest prime covering every residue class; present iff the verdict
    /// is `NotAdmissible`.
    pub obstruction_prime: Option<u64>,
    pub certificate: Option<CoprimalityCertificate>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }
}

/// Candidate obstruction primes: all `p <= m` plus every prime dividing
/// `gcd(a_i, b_i)` for some member (such a member vanishes mod `p`
/// everywhere, so `p` can obstruct regardless of the family size).
fn candidate_primes(fam: &PolynomialFamily) -> Vec<u64> {
    let m = fam.family_size() as u64;
    let mut candidates: Vec<u64> = (2..=m).filter(|&p| is_prime(p)).collect();
    for poly in fam.polys() {
        let g = gcd(poly.a, poly.b.unsigned_abs());
        if g > 1 {
            for &(p, _) in factorize(g, None).factors() {
                if !candidates.contains(&p) {
                    candidates.push(p);
                }
            }
        }
    }
    candidates.sort_unstable();
    candidates
}

/// Does `p` divide the product of the family's values at every integer?
/// True exactly when every residue class mod `p` contains a root.
fn prime_obstructs(fam: &PolynomialFamily, p: u64) -> bool {
    // A member with both coefficients divisible by p vanishes mod p
    // everywhere; handle that before sizing anything by p.
    for poly in fam.polys() {
        if poly.a % p == 0 && poly.b.rem_euclid(p as i64) == 0 {
            return true;
        }
    }
    if p > fam.family_size() as u64 {
        return false; // m polynomials cover at most m < p classes
    }
    let mut covered = vec![false; p as usize];
    for poly in fam.polys() {
        let a = poly.a % p;
        let b = poly.b.rem_euclid(p as i64) as u64;
        if a == 0 {
            continue; // never 0 mod p (b != 0 here)
        }
        // Unique root of a*x + b mod p.
        let inv = pow_mod(a, p - 2, p);
        let root = ((p - b % p) % p * inv) % p;
        covered[root as usize] = true;
    }
    covered.iter().all(|&c| c)
}

/// Complete admissibility test by residue coverage over the candidate
/// primes. `NotAdmissible` reports the smallest obstruction prime.
pub fn check_admissible_residue(fam: &PolynomialFamily) -> AdmissibilityReport {
    for p in candidate_primes(fam) {
        if prime_obstructs(fam, p) {
            return AdmissibilityReport {
                verdict: Verdict::NotAdmissible,
                method: Method::Residue,
                obstruction_prime: Some(p),
                certificate: None,
            };
        }
    }
    AdmissibilityReport {
        verdict: Verdict::Admissible,
        method: Method::Residue,
        obstruction_prime: None,
        certificate: None,
    }
}

/// Sufficient-only shortcut for families with all constant terms 1:
/// `P(x) = prod(a_i x + 1)`, admissible when `gcd(P(1), P(P(1))) = 1`.
/// A gcd above 1 yields `Inconclusive`.
pub fn check_admissible_coprimality(fam: &PolynomialFamily) -> Result<AdmissibilityReport, Error> {
    if fam.polys().iter().any(|poly| poly.b != 1) {
        return Err(Error::invalid(
            "coprimality shortcut requires every constant term to be 1",
        ));
    }
    let p_of_one: BigUint = fam
        .polys()
        .iter()
        .map(|poly| BigUint::from(poly.a) + 1u32)
        .product();
    let p_of_p_of_one: BigUint = fam
        .polys()
        .iter()
        .map(|poly| BigUint::from(poly.a) * &p_of_one + 1u32)
        .product();
    let g = p_of_one.gcd(&p_of_p_of_one);
    let verdict = if g == BigUint::from(1u32) {
        Verdict::Admissible
    } else {
        Verdict::Inconclusive
    };
    Ok(AdmissibilityReport {
        verdict,
        method: Method::Coprimality,
        obstruction_prime: None,
        certificate: Some(CoprimalityCertificate {
            p_of_one,
            p_of_p_of_one,
            gcd: g,
        }),
    })
}

/// All `n <= n_limit` at which at least `min_hits` members are
/// simultaneously prime, with the indices of the prime members.
/// Requires an admissible family (residue method) and `min_hits >= 2`.
pub fn scan_simultaneous_primes(
    fam: &PolynomialFamily,
    n_limit: u64,
    min_hits: usize,
) -> Result<Vec<(u64, Vec<usize>)>, Error> {
    if min_hits < 2 {
        return Err(Error::invalid("min_hits must be >= 2"));
    }
    if !check_admissible_residue(fam).is_admissible() {
        return Err(Error::invalid(
            "family is not admissible; simultaneous-prime scan refused",
        ));
    }
    use rayon::prelude::*;
    let hits: Vec<Option<(u64, Vec<usize>)>> = (1..=n_limit)
        .into_par_iter()
        .map(|n| -> Result<Option<(u64, Vec<usize>)>, Error> {
            let mut indices = Vec::new();
            for (i, poly) in fam.polys().iter().enumerate() {
                match poly.eval(n) {
                    // Primality beyond 64 bits cannot be certified here;
                    // refuse rather than silently drop possible hits.
                    Some(v) if v > u64::MAX as i128 => {
                        return Err(Error::Overflow("family value a*n + b"))
                    }
                    None => return Err(Error::Overflow("family value a*n + b")),
                    Some(v) if v >= 2 && is_prime(v as u64) => indices.push(i),
                    Some(_) => {}
                }
            }
            Ok((indices.len() >= min_hits).then_some((n, indices)))
        })
        .collect::<Result<_, Error>>()?;
    Ok(hits.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn polys(pairs: &[(u64, i64)]) -> PolynomialFamily {
        PolynomialFamily::from_polys(
            pairs
                .iter()
                .map(|&(a, b)| LinearPolynomial::new(a, b).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn build_family_examples() {
        let f = build_family(1, 2).unwrap();
        assert_eq!(
            f.polys(),
            &[
                LinearPolynomial { a: 1, b: 1 },
                LinearPolynomial { a: 2, b: 1 }
            ]
        );

        let f = build_family(2, 50).unwrap();
        let coeffs: Vec<u64> = f.polys().iter().map(|p| p.a).collect();
        assert_eq!(coeffs[0], 1);
        assert_eq!(coeffs[1], 3);
        assert_eq!(coeffs[49], 99);
        assert!(coeffs.windows(2).all(|w| w[1] == w[0] + 2));

        let f = build_family(3, 3).unwrap();
        let coeffs: Vec<u64> = f.polys().iter().map(|p| p.a).collect();
        assert_eq!(coeffs, vec![1, 4, 7]);
    }

    #[test]
    fn build_family_rejects_bad_arguments() {
        assert!(matches!(
            build_family(0, 50),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(build_family(3, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn residue_finds_even_obstruction() {
        // n(n+1) is always even.
        let report = check_admissible_residue(&polys(&[(1, 0), (1, 1)]));
        assert_eq!(report.verdict, Verdict::NotAdmissible);
        assert_eq!(report.obstruction_prime, Some(2));
    }

    #[test]
    fn residue_accepts_single_polynomial() {
        let report = check_admissible_residue(&polys(&[(1, 1)]));
        assert!(report.is_admissible());
    }

    #[test]
    fn size_50_families_are_admissible_both_ways() {
        for d in 1..=12u64 {
            let fam = build_family(d, 50).unwrap();
            assert!(
                check_admissible_residue(&fam).is_admissible(),
                "residue d={d}"
            );
            let cop = check_admissible_coprimality(&fam).unwrap();
            assert!(cop.is_admissible(), "coprimality d={d}");
            let cert = cop.certificate.unwrap();
            assert_eq!(cert.gcd, BigUint::from(1u32));
        }
    }

    #[test]
    fn coprimality_certificate_for_singleton() {
        let report = check_admissible_coprimality(&polys(&[(1, 1)])).unwrap();
        assert!(report.is_admissible());
        let cert = report.certificate.unwrap();
        assert_eq!(cert.p_of_one, BigUint::from(2u32));
        assert_eq!(cert.p_of_p_of_one, BigUint::from(3u32));
        assert_eq!(cert.gcd, BigUint::from(1u32));
    }

    #[test]
    fn coprimality_rejects_nonunit_constant_terms() {
        assert!(matches!(
            check_admissible_coprimality(&polys(&[(1, 0), (1, 1)])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn full_residue_cover_has_small_obstruction() {
        // {x, x+1, ..., x+p-1} covers every class mod p.
        for p in [2u64, 3, 5, 7] {
            let fam = PolynomialFamily::from_polys(
                (0..p)
                    .map(|b| LinearPolynomial { a: 1, b: b as i64 })
                    .collect(),
            )
            .unwrap();
            let report = check_admissible_residue(&fam);
            assert_eq!(report.verdict, Verdict::NotAdmissible);
            assert!(report.obstruction_prime.unwrap() <= p);
        }
    }

    #[test]
    fn scan_examples() {
        let fam = polys(&[(1, 1), (2, 1)]);
        let hits = scan_simultaneous_primes(&fam, 6, 2).unwrap();
        let ns: Vec<u64> = hits.iter().map(|(n, _)| *n).collect();
        assert_eq!(ns, vec![1, 2, 6]); // (2,3), (3,5), (7,13)
        assert!(hits.iter().all(|(_, idx)| idx == &vec![0, 1]));

        let fam = build_family(2, 50).unwrap();
        assert!(!scan_simultaneous_primes(&fam, 100, 2).unwrap().is_empty());

        let fam = polys(&[(1, 1), (2, 1)]);
        assert!(scan_simultaneous_primes(&fam, 50, 3).unwrap().is_empty());
    }

    #[test]
    fn scan_rejects_inadmissible_family() {
        let fam = polys(&[(1, 0), (1, 1)]);
        assert!(matches!(
            scan_simultaneous_primes(&fam, 10, 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    /// Independent fixed-divisor oracle: evaluate the product of family
    /// values over a full period and test divisibility directly.
    fn brute_force_obstruction(fam: &PolynomialFamily, candidates: &[u64]) -> Option<u64> {
        let period: u64 = candidates.iter().product();
        for &p in candidates {
            let all_divisible = (0..period).all(|n| {
                let prod = fam.polys().iter().fold(1i128, |acc, poly| {
                    acc * poly.eval(n).unwrap().rem_euclid(p as i128) % p as i128
                });
                prod.rem_euclid(p as i128) == 0
            });
            if all_divisible {
                return Some(p);
            }
        }
        None
    }

    proptest! {
        #[test]
        fn residue_check_matches_brute_force(
            coeffs in proptest::collection::vec((1u64..10, -10i64..10), 1..=5)
        ) {
            let fam = polys(&coeffs);
            let candidates = super::candidate_primes(&fam);
            // The published cross-check window: small families, primes <= 7.
            prop_assume!(candidates.iter().all(|&p| p <= 7));
            let report = check_admissible_residue(&fam);
            let brute = brute_force_obstruction(&fam, &candidates);
            match brute {
                Some(p) => {
                    prop_assert_eq!(report.verdict, Verdict::NotAdmissible);
                    prop_assert_eq!(report.obstruction_prime, Some(p));
                }
                None => prop_assert!(report.is_admissible()),
            }
        }

        #[test]
        fn coprimality_success_implies_residue_success(
            d in 1u64..30, size in 2u64..20
        ) {
            let fam = build_family(d, size).unwrap();
            let cop = check_admissible_coprimality(&fam).unwrap();
            if cop.is_admissible() {
                prop_assert!(check_admissible_residue(&fam).is_admissible());
            }
        }
    }
}
