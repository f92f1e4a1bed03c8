//! Construction and exact verification of witnesses to the totient
//! coincidence `phi(d)phi(n) = phi(dn) = phi(d(n+lh))`.
//!
//! For an ordered pair with reduced coefficients `a1p > a2p` and an `r`
//! making `p1 = a1p*r + 1` and `p2 = a2p*r + 1` simultaneously prime,
//!
//! ```text
//! m1 = a2p * l * s * p1,    m2 = a1p * l * s * p2,    s = rad(a1p * a2p)
//! ```
//!
//! differ by exactly `l * s * (a1p - a2p) = l * h` and share the totient
//! value `phi(d) * a1p * a2p * r * phi(l*s)`. Expanding the definitions
//! gives `m1 < m2`, so the witness takes `n = m1` and `n + l*h = m2`.
//! Every emitted witness is re-verified along two independent routes:
//! totients of the assembled integers via full factorization, and the
//! structural product formula above.

use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factorize, gcd, is_prime};
use crate::error::Error;
use crate::kappa::{kappa, pair_candidate, PairCandidate};

/// How the coefficient pair for a witness search is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairStrategy {
    /// The pair attaining the shift bound for this `d` (default).
    Argmax,
    /// An explicit `(k1, k2)` within the family.
    Fixed { k1: u64, k2: u64 },
    /// The pair with the highest prime-pair density over a fixed trial
    /// window; deterministic, ties broken by smallest `(k1, k2)`.
    ScanBest,
}

impl std::fmt::Display for PairStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairStrategy::Argmax => write!(f, "argmax"),
            PairStrategy::Fixed { k1, k2 } => write!(f, "fixed({k1},{k2})"),
            PairStrategy::ScanBest => write!(f, "scan-best"),
        }
    }
}

/// A fully verified instance of the totient coincidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub d: u64,
    pub l: u64,
    pub pair: PairCandidate,
    pub r: u64,
    /// `a1p * r + 1`, prime.
    pub p1: u64,
    /// `a2p * r + 1`, prime.
    pub p2: u64,
    pub m1: u64,
    pub m2: u64,
    /// The shift `s * (a1p - a2p)`; divisible by `d`.
    pub h: u64,
    /// `min(m1, m2) = m1`.
    pub n: u64,
    /// `phi(d * m1) = phi(d * m2)`.
    pub phi_common: u64,
}

/// Geometric window schedule for the `r` search.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub initial_window: u64,
    pub growth: u64,
    pub max_candidates: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            initial_window: 4096,
            growth: 4,
            max_candidates: 100_000_000,
        }
    }
}

/// Trial window used by the scan-best strategy.
const SCAN_BEST_WINDOW: u64 = 2048;

/// Small primes for the candidate wheel. An `r` is skipped when one of
/// them divides `p1` or `p2`; the filter only fires for `r` large enough
/// that the divisible value exceeds the prime itself, so no valid `r` is
/// ever lost, and every survivor is still certified by `is_prime`.
const WHEEL_PRIMES: [u64; 18] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
];

fn wheel_bad_residues(a1p: u64, a2p: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::with_capacity(WHEEL_PRIMES.len());
    for q in WHEEL_PRIMES {
        // a*r + 1 == 0 (mod q) iff r == -a^{-1} (mod q), if q does not
        // divide a. u64::MAX marks "no bad residue".
        let bad = |a: u64| {
            if a.is_multiple_of(q) {
                u64::MAX
            } else {
                (q - crate::arith::pow_mod(a % q, q - 2, q)) % q
            }
        };
        out.push((q, bad(a1p), bad(a2p)));
    }
    out
}

/// All `r` in `(max(r_start, max(a1, l)), r_limit]` for which `a1p*r + 1`
/// and `a2p*r + 1` are both prime, ascending. An empty window yields an
/// empty list, not an error.
pub fn find_r(pair: &PairCandidate, l: u64, r_start: u64, r_limit: u64) -> Result<Vec<u64>, Error> {
    if l == 0 {
        return Err(Error::invalid("l must be >= 1"));
    }
    if gcd(pair.d, l) != 1 {
        return Err(Error::invalid(format!(
            "d and l must be coprime, got d={}, l={l}",
            pair.d
        )));
    }
    let lo = r_start.max(pair.a1.max(l));
    if r_limit <= lo {
        return Ok(Vec::new());
    }
    // Reject up front if p1 would leave the 64-bit range.
    if (pair.a1p as u128) * (r_limit as u128) + 1 > u64::MAX as u128 {
        return Err(Error::Overflow("prime candidate a1p * r + 1"));
    }

    let wheel = wheel_bad_residues(pair.a1p, pair.a2p);
    let accepts = |r: u64| {
        if r > *WHEEL_PRIMES.last().unwrap() {
            for &(q, bad1, bad2) in &wheel {
                let rem = r % q;
                if rem == bad1 || rem == bad2 {
                    return false;
                }
            }
        }
        is_prime(pair.a1p * r + 1) && is_prime(pair.a2p * r + 1)
    };

    use rayon::prelude::*;
    const BLOCK: u64 = 1 << 14;
    let total = r_limit - lo;
    let blocks = total.div_ceil(BLOCK);
    let hits: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let from = lo + 1 + b * BLOCK;
            let to = (from + BLOCK - 1).min(r_limit);
            (from..=to).filter(|&r| accepts(r)).collect()
        })
        .collect();
    Ok(hits.into_iter().flatten().collect())
}

fn checked_u64(wide: u128, what: &'static str) -> Result<u64, Error> {
    u64::try_from(wide).map_err(|_| Error::Overflow(what))
}

fn verify(cond: bool, msg: impl FnOnce() -> String) -> Result<(), Error> {
    if cond {
        Ok(())
    } else {
        Err(Error::Verification(msg()))
    }
}

/// Assembles `m1`, `m2` for a certified `r` and verifies every invariant
/// by explicit computation. A verification failure signals a construction
/// bug, never an expected path.
pub fn build_witness(pair: &PairCandidate, l: u64, r: u64) -> Result<Witness, Error> {
    if l == 0 {
        return Err(Error::invalid("l must be >= 1"));
    }
    let d = pair.d;
    if gcd(d, l) != 1 {
        return Err(Error::invalid(format!(
            "d and l must be coprime, got d={d}, l={l}"
        )));
    }
    if r <= pair.a1.max(l) {
        return Err(Error::invalid(format!(
            "r must exceed max(a1, l) = {}, got r={r}",
            pair.a1.max(l)
        )));
    }
    let p1 = checked_u64(pair.a1p as u128 * r as u128 + 1, "p1 = a1p*r + 1")?;
    let p2 = checked_u64(pair.a2p as u128 * r as u128 + 1, "p2 = a2p*r + 1")?;
    if !is_prime(p1) || !is_prime(p2) {
        return Err(Error::invalid(format!(
            "r={r} is not in the acceptance set: a1p*r+1={p1} or a2p*r+1={p2} is composite"
        )));
    }

    let (a1p, a2p, s) = (pair.a1p as u128, pair.a2p as u128, pair.s as u128);
    let m1 = checked_u64(a2p * l as u128 * s * p1 as u128, "m1")?;
    let m2 = checked_u64(a1p * l as u128 * s * p2 as u128, "m2")?;
    let h = pair.pair_h;
    let n = m1.min(m2);

    // Structural identities forced by the construction.
    verify(p1 != p2, || format!("p1 = p2 = {p1}"))?;
    verify(m1 < m2, || format!("expected m1 < m2, got {m1} >= {m2}"))?;
    let l_times_h = l as u128 * h as u128;
    verify((m2 - m1) as u128 == l_times_h, || {
        format!("m2 - m1 = {} differs from l*h = {l_times_h}", m2 - m1)
    })?;
    verify(h.is_multiple_of(d), || {
        format!("d = {d} does not divide h = {h}")
    })?;
    verify((m2 - m1) % d == 0, || {
        "d does not divide m2 - m1".to_string()
    })?;
    verify(h <= pair.pair_value, || {
        format!("h = {h} exceeds the pair value {}", pair.pair_value)
    })?;

    // Coprimality ledger.
    for (name, v) in [
        ("a1p", pair.a1p),
        ("a2p", pair.a2p),
        ("s", pair.s),
        ("l", l),
    ] {
        verify(gcd(d, v) == 1, || {
            format!("{name} = {v} shares a factor with d = {d}")
        })?;
    }
    verify(p1 > d && p2 > d, || {
        format!("primes {p1}, {p2} must exceed d = {d}")
    })?;
    verify(gcd(d, m1) == 1 && gcd(d, m2) == 1, || {
        format!("m1 or m2 shares a factor with d = {d}")
    })?;

    // Route 1: totients of the assembled integers via full factorization.
    let dm1 = checked_u64(d as u128 * m1 as u128, "d * m1")?;
    let dm2 = checked_u64(d as u128 * m2 as u128, "d * m2")?;
    let phi_dm1 = euler_phi(&factorize(dm1, None));
    let phi_dm2 = euler_phi(&factorize(dm2, None));
    verify(phi_dm1 == phi_dm2, || {
        format!("phi({dm1}) = {phi_dm1} differs from phi({dm2}) = {phi_dm2}")
    })?;

    // phi(d)phi(n) = phi(dn), with both sides factored independently.
    let phi_d = euler_phi(&factorize(d, None));
    let phi_m1 = euler_phi(&factorize(m1, None));
    let phi_m2 = euler_phi(&factorize(m2, None));
    verify(phi_d as u128 * phi_m1 as u128 == phi_dm1 as u128, || {
        format!(
            "phi(d)*phi(m1) = {} differs from phi(d*m1) = {phi_dm1}",
            phi_d * phi_m1
        )
    })?;
    verify(phi_d as u128 * phi_m2 as u128 == phi_dm2 as u128, || {
        "phi(d)*phi(m2) differs from phi(d*m2)".to_string()
    })?;

    // Route 2: the structural chain
    // phi(d*m1) = phi(d) * a2p * phi(l*s) * phi(p1)
    //           = phi(d) * a1p * a2p * r * phi(l*s).
    let ls = checked_u64(l as u128 * s, "l * s")?;
    let phi_ls = euler_phi(&factorize(ls, None)) as u128;
    let chain_mid = phi_d as u128 * a2p * phi_ls * (p1 as u128 - 1);
    let chain_full = phi_d as u128 * a1p * a2p * r as u128 * phi_ls;
    verify(chain_mid == phi_dm1 as u128, || {
        format!("structural chain phi(d)*a2p*phi(ls)*phi(p1) = {chain_mid} != {phi_dm1}")
    })?;
    verify(chain_full == phi_dm1 as u128, || {
        format!("structural chain phi(d)*a1p*a2p*r*phi(ls) = {chain_full} != {phi_dm1}")
    })?;

    Ok(Witness {
        d,
        l,
        pair: *pair,
        r,
        p1,
        p2,
        m1,
        m2,
        h,
        n,
        phi_common: phi_dm1,
    })
}

fn select_pair(
    d: u64,
    l: u64,
    strategy: PairStrategy,
    family_size: u64,
) -> Result<PairCandidate, Error> {
    match strategy {
        PairStrategy::Argmax => Ok(kappa(d, family_size)?.argmax),
        PairStrategy::Fixed { k1, k2 } => {
            if k1 >= family_size {
                return Err(Error::invalid(format!(
                    "k1 = {k1} outside family of size {family_size}"
                )));
            }
            pair_candidate(d, k1, k2)
        }
        PairStrategy::ScanBest => {
            use rayon::prelude::*;
            let pairs: Vec<(u64, u64)> = (1..family_size)
                .flat_map(|k1| (0..k1).map(move |k2| (k1, k2)))
                .collect();
            let scored: Vec<(usize, u64, u64)> = pairs
                .par_iter()
                .map(|&(k1, k2)| {
                    let pair = pair_candidate(d, k1, k2)?;
                    let lo = pair.a1.max(l);
                    let hi = lo
                        .checked_add(SCAN_BEST_WINDOW)
                        .ok_or(Error::Overflow("scan-best trial window"))?;
                    let hits = find_r(&pair, l, lo, hi)?;
                    Ok((hits.len(), k1, k2))
                })
                .collect::<Result<_, Error>>()?;
            let best = scored
                .into_iter()
                .max_by(|a, b| {
                    // Highest density wins; ties fall to the smallest (k1, k2).
                    a.0.cmp(&b.0)
                        .then_with(|| b.1.cmp(&a.1))
                        .then_with(|| b.2.cmp(&a.2))
                })
                .expect("family_size >= 2 yields at least one pair");
            pair_candidate(d, best.1, best.2)
        }
    }
}

/// Produces `count` verified witnesses with strictly increasing `r`, all
/// sharing the pair chosen by `strategy`.
pub fn stream_witnesses(
    d: u64,
    l: u64,
    count: usize,
    strategy: PairStrategy,
    family_size: u64,
) -> Result<Vec<Witness>, Error> {
    stream_witnesses_with(
        d,
        l,
        count,
        strategy,
        family_size,
        0,
        &SearchBudget::default(),
    )
}

/// [`stream_witnesses`] with an explicit starting point for the `r` search
/// and a custom window/budget schedule.
pub fn stream_witnesses_with(
    d: u64,
    l: u64,
    count: usize,
    strategy: PairStrategy,
    family_size: u64,
    r_start: u64,
    budget: &SearchBudget,
) -> Result<Vec<Witness>, Error> {
    if d == 0 || l == 0 {
        return Err(Error::invalid("d and l must be >= 1"));
    }
    if gcd(d, l) != 1 {
        return Err(Error::invalid(format!(
            "d and l must be coprime, got d={d}, l={l}"
        )));
    }
    if count == 0 {
        return Err(Error::invalid("count must be >= 1"));
    }
    let pair = select_pair(d, l, strategy, family_size)?;

    let mut out = Vec::with_capacity(count);
    let mut cursor = r_start.max(pair.a1.max(l));
    let mut window = budget.initial_window.max(1);
    let mut scanned: u64 = 0;
    while out.len() < count {
        if scanned >= budget.max_candidates {
            return Err(Error::ResourceLimit(format!(
                "r search exhausted {scanned} candidates with {} of {count} witnesses found",
                out.len()
            )));
        }
        let step = window.min(budget.max_candidates - scanned);
        let hi = cursor
            .checked_add(step)
            .ok_or(Error::Overflow("r search window"))?;
        for r in find_r(&pair, l, cursor, hi)? {
            out.push(build_witness(&pair, l, r)?);
            if out.len() == count {
                break;
            }
        }
        scanned += step;
        cursor = hi;
        window = window.saturating_mul(budget.growth.max(2));
    }
    Ok(out)
}

/// The on-disk/JSON form of a witness: every [`Witness`] field plus the
/// family size and strategy that produced it. The `verify` CLI subcommand
/// consumes exactly this schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub d: u64,
    pub l: u64,
    pub family_size: u64,
    pub pair_strategy: String,
    pub pair: PairCandidate,
    pub r: u64,
    pub p1: u64,
    pub p2: u64,
    pub m1: u64,
    pub m2: u64,
    pub h: u64,
    pub n: u64,
    pub phi_common: u64,
}

impl WitnessRecord {
    pub fn new(w: &Witness, family_size: u64, strategy: PairStrategy) -> Self {
        WitnessRecord {
            d: w.d,
            l: w.l,
            family_size,
            pair_strategy: strategy.to_string(),
            pair: w.pair,
            r: w.r,
            p1: w.p1,
            p2: w.p2,
            m1: w.m1,
            m2: w.m2,
            h: w.h,
            n: w.n,
            phi_common: w.phi_common,
        }
    }

    /// Recomputes every invariant from scratch: the pair from `(d, k1, k2)`,
    /// the witness from `(pair, l, r)`, and the shift bound for the stored
    /// family size. Any deviation from the stored fields fails.
    pub fn verify(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::Verification(msg));
        let pair = pair_candidate(self.d, self.pair.k1, self.pair.k2)
            .map_err(|e| Error::Verification(format!("stored pair does not rebuild: {e}")))?;
        if pair != self.pair {
            return fail(format!(
                "stored pair differs from recomputation: {:?} vs {:?}",
                self.pair, pair
            ));
        }
        let w = build_witness(&pair, self.l, self.r)
            .map_err(|e| Error::Verification(format!("witness does not rebuild: {e}")))?;
        let checks = [
            ("p1", self.p1, w.p1),
            ("p2", self.p2, w.p2),
            ("m1", self.m1, w.m1),
            ("m2", self.m2, w.m2),
            ("h", self.h, w.h),
            ("n", self.n, w.n),
            ("phi_common", self.phi_common, w.phi_common),
        ];
        for (name, stored, computed) in checks {
            if stored != computed {
                return fail(format!("{name}: stored {stored} != recomputed {computed}"));
            }
        }
        if self.family_size < 2 || self.pair.k1 >= self.family_size {
            return fail(format!(
                "pair (k1={}, k2={}) outside family of size {}",
                self.pair.k1, self.pair.k2, self.family_size
            ));
        }
        let row = kappa(self.d, self.family_size)
            .map_err(|e| Error::Verification(format!("shift bound not computable: {e}")))?;
        if self.h > row.kappa {
            return fail(format!(
                "h = {} exceeds kappa({}) = {}",
                self.h, self.d, row.kappa
            ));
        }
        if !self.h.is_multiple_of(self.d) {
            return fail(format!("d = {} does not divide h = {}", self.d, self.h));
        }
        Ok(())
    }
}
