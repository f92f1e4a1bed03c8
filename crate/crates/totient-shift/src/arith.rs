//! Exact integer arithmetic: gcd, deterministic primality, factorization,
//! Euler's totient and the squarefree kernel (radical).
//!
//! Everything here is a pure function of its inputs. Primality is
//! deterministic over the full `u64` range (fixed Miller-Rabin witness set,
//! no error probability), so results can feed exact equality assertions.

use crate::error::Error;

/// Greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Witness set covering all of `u64` (Sinclair's seven-base set).
const MILLER_RABIN_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// Deterministic primality test for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    // n is odd and > 37 here.
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for base in MILLER_RABIN_BASES {
        let a = base % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Prime decomposition of a positive integer, primes strictly increasing.
/// The empty list represents 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization {
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// The represented integer. Construction guarantees it fits in `u64`.
    pub fn value(&self) -> u64 {
        let mut v: u64 = 1;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                v *= p;
            }
        }
        v
    }

    /// Product of the distinct primes; 1 for the empty factorization.
    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    /// Euler's totient of the represented value.
    pub fn euler_phi(&self) -> u64 {
        let mut phi: u64 = 1;
        for &(p, e) in &self.factors {
            phi *= p - 1;
            for _ in 1..e {
                phi *= p;
            }
        }
        phi
    }

    /// Factorization of the product of the two represented values.
    /// Fails if the product leaves the 64-bit range.
    pub fn checked_mul(&self, other: &Factorization) -> Result<Factorization, Error> {
        (self.value() as u128)
            .checked_mul(other.value() as u128)
            .filter(|&v| v <= u64::MAX as u128)
            .ok_or(Error::Overflow("factorization product"))?;
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (p, e) = self.factors[i];
            let (q, f) = other.factors[j];
            if p < q {
                factors.push((p, e));
                i += 1;
            } else if q < p {
                factors.push((q, f));
                j += 1;
            } else {
                factors.push((p, e + f));
                i += 1;
                j += 1;
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        Ok(Factorization { factors })
    }
}

/// Product of the distinct primes of `f` (squarefree kernel).
pub fn radical(f: &Factorization) -> u64 {
    f.radical()
}

/// Euler's totient evaluated from a factorization.
pub fn euler_phi(f: &Factorization) -> u64 {
    f.euler_phi()
}

/// Memory budget for [`SpfTable`]: four bytes per entry, 256 MiB cap.
pub const SPF_LIMIT_MAX: u64 = 1 << 26;

/// Smallest-prime-factor table for `2..=limit`, built by a linear sieve.
/// Immutable after construction and freely shareable across workers.
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`; requires `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> u64 {
        assert!(n >= 2 && n <= self.limit, "spf query out of range: {n}");
        self.spf[n as usize] as u64
    }

    fn factorize(&self, mut n: u64) -> Factorization {
        let mut factors = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0u32;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Factorization { factors }
    }
}

/// Builds the smallest-prime-factor sieve up to `limit`.
pub fn build_spf(limit: u64) -> Result<SpfTable, Error> {
    if limit < 2 {
        return Err(Error::invalid(format!(
            "spf limit must be >= 2, got {limit}"
        )));
    }
    if limit > SPF_LIMIT_MAX {
        return Err(Error::ResourceLimit(format!(
            "spf limit {limit} exceeds budget {SPF_LIMIT_MAX}"
        )));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            if p > spf[i] || (i as u64) * (p as u64) > limit {
                break;
            }
            spf[i * p as usize] = p;
        }
    }
    Ok(SpfTable { limit, spf })
}

/// Pollard's rho (Floyd cycle finding) for an odd composite `n` with no
/// prime factor below 41. Always returns a nontrivial factor.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 == 1);
    for c in 1.. {
        let step = |v: u64| {
            let r = mul_mod(v, v, n) + c;
            if r >= n {
                r - n
            } else {
                r
            }
        };
        let mut x: u64 = 2;
        let mut y: u64 = 2;
        loop {
            x = step(x);
            y = step(step(y));
            if x == y {
                break; // cycle hit without a factor; retry with the next c
            }
            let g = gcd(x.abs_diff(y), n);
            if g > 1 {
                if g < n {
                    return g;
                }
                break;
            }
        }
    }
    unreachable!()
}

/// Collects the prime divisors of `n` with multiplicity (unsorted).
fn factor_into(n: u64, primes: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        primes.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, primes);
    factor_into(n / d, primes);
}

/// Complete prime factorization of `n >= 1`. Uses the sieve when `n` is
/// within `hint`'s range, otherwise trial division plus Pollard rho, with
/// every reported prime certified by [`is_prime`].
pub fn factorize(n: u64, hint: Option<&SpfTable>) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    if let Some(table) = hint {
        if n <= table.limit() {
            return table.factorize(n);
        }
    }
    let mut primes = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while m.is_multiple_of(p) {
            m /= p;
            primes.push(p);
        }
    }
    if m > 1 {
        if m < 41 * 41 {
            primes.push(m); // no factor <= 37, so below 41^2 it must be prime
        } else {
            factor_into(m, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    debug_assert!(factors.iter().all(|&(p, _)| is_prime(p)));
    Factorization { factors }
}
