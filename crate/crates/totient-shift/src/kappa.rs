//! Shift-bound evaluation: for each `d`, the maximum of
//! `d*(k1-k2)/g * rad(a1*a2/g)` over ordered coefficient pairs
//! `a_i = k_i*d + 1` of the size-50 family, together with the maximizing
//! pair and the closed-form cubic bound.
//!
//! The batch path factors every `a = k*d + 1` once through a shared
//! smallest-prime-factor sieve and forms `rad(a1*a2/g)` as the product of
//! the union of the two prime sets; `rad(a1*a2/g) = rad(a1*a2)` because
//! every prime of `g` survives in `a1*a2/g = (a1/g)*a2`.

use serde::{Deserialize, Serialize};

use crate::arith::{build_spf, factorize, gcd, radical, SpfTable};
use crate::error::Error;

/// One ordered pair `k1 > k2` of the family for a given `d`, with every
/// derived quantity computed exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCandidate {
    pub d: u64,
    pub k1: u64,
    pub k2: u64,
    /// `k1*d + 1`
    pub a1: u64,
    /// `k2*d + 1`
    pub a2: u64,
    /// `gcd(a1, a2)`; always coprime to `d` and a divisor of `k1 - k2`.
    pub g: u64,
    /// `a1 / g`
    pub a1p: u64,
    /// `a2 / g`
    pub a2p: u64,
    /// `rad(a1p * a2p)`
    pub s: u64,
    /// `d*(k1-k2)/g * rad(a1*a2/g)`
    pub pair_value: u64,
    /// `s * (a1p - a2p)`; never exceeds `pair_value`.
    pub pair_h: u64,
}

/// The shift bound for one `d`: its value, the maximizing pair and the
/// closed-form bound `(f-1)d((f-2)d+1)((f-1)d+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaRow {
    pub d: u64,
    pub kappa: u64,
    pub argmax: PairCandidate,
    pub trivial_bound: u64,
    pub family_size: u64,
}

fn checked_coefficient(k: u64, d: u64) -> Result<u64, Error> {
    k.checked_mul(d)
        .and_then(|kd| kd.checked_add(1))
        .ok_or(Error::Overflow("family coefficient k*d + 1"))
}

/// Product of the union of two sorted, duplicate-free prime lists.
fn union_product(left: &[u64], right: &[u64]) -> u128 {
    let mut product: u128 = 1;
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        let p = if left[i] < right[j] {
            let p = left[i];
            i += 1;
            p
        } else if right[j] < left[i] {
            let p = right[j];
            j += 1;
            p
        } else {
            let p = left[i];
            i += 1;
            j += 1;
            p
        };
        product *= p as u128;
    }
    for &p in &left[i..] {
        product *= p as u128;
    }
    for &p in &right[j..] {
        product *= p as u128;
    }
    product
}

fn distinct_primes(n: u64, table: Option<&SpfTable>) -> Vec<u64> {
    factorize(n, table)
        .factors()
        .iter()
        .map(|&(p, _)| p)
        .collect()
}

/// Builds one pair candidate with all derived fields. Requires `k1 > k2`.
pub fn pair_candidate(d: u64, k1: u64, k2: u64) -> Result<PairCandidate, Error> {
    pair_candidate_with(d, k1, k2, None)
}

pub(crate) fn pair_candidate_with(
    d: u64,
    k1: u64,
    k2: u64,
    table: Option<&SpfTable>,
) -> Result<PairCandidate, Error> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if k1 <= k2 {
        return Err(Error::invalid(format!(
            "need k1 > k2, got k1={k1}, k2={k2}"
        )));
    }
    let a1 = checked_coefficient(k1, d)?;
    let a2 = checked_coefficient(k2, d)?;
    let g = gcd(a1, a2);
    let a1p = a1 / g;
    let a2p = a2 / g;
    // g divides a1 - a2 = d*(k1-k2) and is coprime to d (it divides kd+1),
    // hence divides k1 - k2.
    debug_assert_eq!((k1 - k2) % g, 0);
    debug_assert_eq!(gcd(g, d), 1);
    let k_diff = (k1 - k2) / g;

    let primes1 = distinct_primes(a1, table);
    let primes2 = distinct_primes(a2, table);
    let rad_union = union_product(&primes1, &primes2);

    let s_wide = if g == 1 {
        rad_union
    } else {
        radical(&factorize(a1p, table)) as u128 * radical(&factorize(a2p, table)) as u128
    };
    let s = u64::try_from(s_wide).map_err(|_| Error::Overflow("radical s(a1, a2)"))?;

    let value_wide = (d as u128 * k_diff as u128)
        .checked_mul(rad_union)
        .ok_or(Error::Overflow("pair value"))?;
    let pair_value = u64::try_from(value_wide).map_err(|_| Error::Overflow("pair value"))?;
    let h_wide = s_wide
        .checked_mul((a1p - a2p) as u128)
        .ok_or(Error::Overflow("pair shift h"))?;
    let pair_h = u64::try_from(h_wide).map_err(|_| Error::Overflow("pair shift h"))?;

    Ok(PairCandidate {
        d,
        k1,
        k2,
        a1,
        a2,
        g,
        a1p,
        a2p,
        s,
        pair_value,
        pair_h,
    })
}

/// Generalized closed-form bound `(f-1)d((f-2)d+1)((f-1)d+1)`; the
/// family-size-50 instance is `49d(48d+1)(49d+1)`.
pub fn trivial_bound_general(d: u64, family_size: u64) -> Result<u64, Error> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if family_size < 2 {
        return Err(Error::invalid("family_size must be >= 2"));
    }
    let f = family_size as u128;
    let d = d as u128;
    // Each parenthesized factor is a product of two 64-bit values and so
    // fits u128 on its own; only the final products need checking.
    let wide = ((f - 1) * d)
        .checked_mul((f - 2) * d + 1)
        .and_then(|v| v.checked_mul((f - 1) * d + 1))
        .ok_or(Error::Overflow("trivial bound"))?;
    u64::try_from(wide).map_err(|_| Error::Overflow("trivial bound"))
}

/// `49d(48d+1)(49d+1)`.
pub fn trivial_bound(d: u64) -> Result<u64, Error> {
    trivial_bound_general(d, 50)
}

/// Evaluates the shift bound for `d` over the default size-50 family.
pub fn kappa(d: u64, family_size: u64) -> Result<KappaRow, Error> {
    kappa_with_table(d, family_size, None)
}

pub(crate) fn kappa_with_table(
    d: u64,
    family_size: u64,
    shared: Option<&SpfTable>,
) -> Result<KappaRow, Error> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if family_size < 2 {
        return Err(Error::invalid("family_size must be >= 2"));
    }
    let limit = checked_coefficient(family_size - 1, d)?;

    // Reuse the caller's sieve when it covers all coefficients; otherwise
    // build a private one, falling back to general factorization when the
    // limit exceeds the sieve budget.
    let covered = shared.is_some_and(|t| t.limit() >= limit);
    let owned: Option<SpfTable> = if covered {
        None
    } else {
        match build_spf(limit) {
            Ok(t) => Some(t),
            Err(Error::ResourceLimit(_)) => None,
            Err(e) => return Err(e),
        }
    };
    let table: Option<&SpfTable> = if covered { shared } else { owned.as_ref() };

    let fam: Vec<(u64, Vec<u64>)> = (0..family_size)
        .map(|k| {
            let a = checked_coefficient(k, d)?;
            Ok((a, distinct_primes(a, table)))
        })
        .collect::<Result<_, Error>>()?;

    let mut best: Option<(u128, u64, u64)> = None;
    for k1 in 1..family_size {
        let (a1, primes1) = &fam[k1 as usize];
        for k2 in 0..k1 {
            let (a2, primes2) = &fam[k2 as usize];
            let g = gcd(*a1, *a2);
            let k_diff = (k1 - k2) / g;
            let value = (d as u128 * k_diff as u128)
                .checked_mul(union_product(primes1, primes2))
                .ok_or(Error::Overflow("pair value"))?;
            // Strict comparison keeps the lexicographically smallest
            // (k1, k2) on ties.
            if best.is_none_or(|(v, _, _)| value > v) {
                best = Some((value, k1, k2));
            }
        }
    }
    let (value_wide, k1, k2) = best.expect("family_size >= 2 yields at least one pair");
    let kappa = u64::try_from(value_wide).map_err(|_| Error::Overflow("kappa value"))?;

    let argmax = pair_candidate_with(d, k1, k2, table)?;
    debug_assert_eq!(argmax.pair_value, kappa);
    let trivial_bound = trivial_bound_general(d, family_size)?;
    if kappa > trivial_bound {
        return Err(Error::Verification(format!(
            "kappa({d}) = {kappa} exceeds its closed-form bound {trivial_bound}"
        )));
    }
    Ok(KappaRow {
        d,
        kappa,
        argmax,
        trivial_bound,
        family_size,
    })
}

/// One row per `d` in `d_from..=d_to`, ascending. Work is distributed
/// across the current rayon pool; the result is independent of the worker
/// count.
pub fn kappa_table(d_from: u64, d_to: u64, family_size: u64) -> Result<Vec<KappaRow>, Error> {
    if d_from == 0 {
        return Err(Error::invalid("d_from must be >= 1"));
    }
    if d_from > d_to {
        return Err(Error::invalid(format!("empty range: {d_from}..{d_to}")));
    }
    use rayon::prelude::*;
    let shared = checked_coefficient(family_size.saturating_sub(1), d_to)
        .ok()
        .and_then(|limit| build_spf(limit).ok());
    (d_from..=d_to)
        .into_par_iter()
        .map(|d| kappa_with_table(d, family_size, shared.as_ref()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, is_prime};

    #[test]
    fn pair_candidate_known_values() {
        let p = pair_candidate(2, 48, 23).unwrap();
        assert_eq!((p.a1, p.a2, p.g), (97, 47, 1));
        assert_eq!((p.a1p, p.a2p), (97, 47));
        assert_eq!(p.s, 4559);
        assert_eq!(p.pair_value, 227_950);
        assert_eq!(p.pair_h, 227_950);

        let p = pair_candidate(3, 48, 24).unwrap();
        assert_eq!((p.a1, p.a2, p.g), (145, 73, 1));
        assert_eq!(p.pair_value, 762_120);

        let p = pair_candidate(1, 1, 0).unwrap();
        assert_eq!((p.a1, p.a2, p.g), (2, 1, 1));
        assert_eq!(p.pair_value, 2);
        // s = rad(a1p * a2p) = rad(2) = 2, so h = s * (a1p - a2p) = 2;
        // consistent with the hand-checkable witness m1 = 26, m2 = 28.
        assert_eq!(p.s, 2);
        assert_eq!(p.pair_h, 2);
    }

    #[test]
    fn pair_candidate_rejects_bad_order() {
        assert!(matches!(
            pair_candidate(2, 3, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            pair_candidate(2, 3, 5),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            pair_candidate(0, 3, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn kappa_known_values() {
        assert_eq!(kappa(2, 50).unwrap().kappa, 227_950);
        assert_eq!(kappa(3, 50).unwrap().kappa, 762_120);
        assert_eq!(kappa(25, 50).unwrap().kappa, 460_516_250);
        assert_eq!(kappa(51, 50).unwrap().kappa, 3_665_785_650);
    }

    #[test]
    fn kappa_small_family() {
        let row = kappa(1, 2).unwrap();
        assert_eq!(row.kappa, 2);
        assert_eq!((row.argmax.k1, row.argmax.k2), (1, 0));
    }

    #[test]
    fn out_of_range_values_are_rejected_not_wrapped() {
        assert!(matches!(
            pair_candidate(u64::MAX / 2, 49, 0),
            Err(Error::Overflow(_))
        ));
        assert!(matches!(trivial_bound(1 << 40), Err(Error::Overflow(_))));
        assert!(matches!(kappa(1 << 40, 50), Err(Error::Overflow(_))));
    }

    #[test]
    fn kappa_rejects_bad_arguments() {
        assert!(kappa(0, 50).is_err());
        assert!(kappa(2, 1).is_err());
        assert!(kappa_table(3, 2, 50).is_err());
        assert!(kappa_table(0, 5, 50).is_err());
    }

    #[test]
    fn trivial_bound_values() {
        assert_eq!(trivial_bound(2).unwrap(), 941_094); // 98 * 97 * 99
        assert_eq!(trivial_bound(1).unwrap(), 120_050); // 49 * 49 * 50
        assert!(kappa(2, 50).unwrap().kappa < trivial_bound(2).unwrap());
    }

    #[test]
    fn non_monotone_witnesses() {
        let k = |d| kappa(d, 50).unwrap().kappa;
        assert!(k(35) < k(34));
        assert!(k(38) < k(37));
        assert!(k(51) < k(50));
    }

    #[test]
    fn table_is_ascending_and_matches_pointwise() {
        let rows = kappa_table(2, 12, 50).unwrap();
        assert_eq!(rows.len(), 11);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.d, 2 + i as u64);
            assert_eq!(row.kappa, kappa(row.d, 50).unwrap().kappa);
        }
    }

    #[test]
    fn pair_invariants_hold_for_small_d() {
        for d in 1..=60u64 {
            let bound = trivial_bound(d).unwrap();
            for k1 in 1..50u64 {
                for k2 in 0..k1 {
                    let p = pair_candidate(d, k1, k2).unwrap();
                    assert_eq!((k1 - k2) % p.g, 0);
                    assert_eq!(gcd(p.g, d), 1);
                    assert_eq!(p.pair_value % d, 0);
                    assert_eq!(p.pair_h % d, 0);
                    assert!(p.pair_h <= p.pair_value);
                    assert!(p.pair_value <= bound);
                    assert_eq!(p.a1p * p.g, p.a1);
                    assert_eq!(p.a2p * p.g, p.a2);
                }
            }
        }
    }

    /// Naive oracle: per-pair factorizations from scratch, no sieve, no
    /// cached prime sets. `a1 * a2p = a1 * a2 / g`.
    fn oracle_pair_value(d: u64, k1: u64, k2: u64) -> u64 {
        let a1 = k1 * d + 1;
        let a2 = k2 * d + 1;
        let g = gcd(a1, a2);
        let product = factorize(a1, None)
            .checked_mul(&factorize(a2 / g, None))
            .unwrap();
        d * ((k1 - k2) / g) * product.radical()
    }

    #[test]
    fn fast_path_matches_naive_factorization_oracle() {
        for d in 1..=200u64 {
            let row = kappa(d, 50).unwrap();
            let mut best = (0u64, 0u64, 0u64);
            for k1 in 1..50u64 {
                for k2 in 0..k1 {
                    let v = oracle_pair_value(d, k1, k2);
                    if v > best.0 {
                        best = (v, k1, k2);
                    }
                }
            }
            assert_eq!(
                (row.kappa, row.argmax.k1, row.argmax.k2),
                best,
                "fast path disagrees with naive oracle at d={d}"
            );
        }
    }

    #[test]
    fn radical_of_quotient_equals_radical_of_product() {
        // rad(a1*a2/g) = rad(a1*a2), via independent factorizations.
        for d in [1u64, 2, 3, 6, 17, 30, 97] {
            for k1 in 1..50u64 {
                for k2 in 0..k1 {
                    let a1 = k1 * d + 1;
                    let a2 = k2 * d + 1;
                    let g = gcd(a1, a2);
                    let lhs = factorize(a1, None)
                        .checked_mul(&factorize(a2 / g, None))
                        .unwrap()
                        .radical();
                    let rhs = factorize(a1, None)
                        .checked_mul(&factorize(a2, None))
                        .unwrap()
                        .radical();
                    assert_eq!(lhs, rhs, "d={d} k1={k1} k2={k2}");
                }
            }
        }
    }

    #[test]
    fn argmax_pair_fields_are_certified() {
        let row = kappa(7, 50).unwrap();
        let p = row.argmax;
        assert_eq!(p.a1, p.k1 * 7 + 1);
        assert_eq!(p.a2, p.k2 * 7 + 1);
        // s is squarefree and its primes are exactly those of a1p * a2p.
        let f = factorize(p.s, None);
        assert!(f.factors().iter().all(|&(q, e)| e == 1 && is_prime(q)));
        assert_eq!(
            f.radical(),
            factorize(p.a1p, None)
                .checked_mul(&factorize(p.a2p, None))
                .unwrap()
                .radical()
        );
    }
}
