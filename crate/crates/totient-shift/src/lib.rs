//! Exact machinery around the totient coincidence
//! `phi(d)phi(n) = phi(dn) = phi(d(n+lh))`:
//!
//! * [`arith`] — gcd, deterministic 64-bit primality, factorization with a
//!   smallest-prime-factor sieve, Euler's totient and the radical;
//! * [`admissibility`] — the linear family `{(kd+1)x + 1}`, the complete
//!   residue-coverage admissibility test and the exact-integer coprimality
//!   certificate `gcd(P(1), P(P(1)))`;
//! * [`kappa`] — the shift bound for each `d`, its maximizing coefficient
//!   pair and the closed-form cubic bound;
//! * [`witness`] — search for `r` making `a1p*r + 1` and `a2p*r + 1`
//!   simultaneously prime, witness assembly and exact re-verification;
//! * [`report`] — the deterministic JSON/CSV output surface of the CLI.
//!
//! ```
//! use totient_shift::arith::{euler_phi, factorize};
//! use totient_shift::kappa::kappa;
//! use totient_shift::witness::{stream_witnesses, PairStrategy};
//!
//! let row = kappa(2, 50)?;
//! assert_eq!(row.kappa, 227_950);
//!
//! let w = &stream_witnesses(2, 1, 1, PairStrategy::Argmax, 50)?[0];
//! let phi = |x| euler_phi(&factorize(x, None));
//! assert_eq!(phi(2) * phi(w.n), phi(2 * w.n));
//! assert_eq!(phi(2 * w.n), phi(2 * (w.n + w.l * w.h)));
//! assert!(w.h % 2 == 0 && w.h <= row.kappa);
//! # Ok::<(), totient_shift::Error>(())
//! ```

pub mod admissibility;
pub mod arith;
mod error;
pub mod kappa;
pub mod report;
pub mod witness;

pub use error::Error;
