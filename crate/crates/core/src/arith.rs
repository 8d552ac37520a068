//! Exact integer primitives shared by every other module.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The universal scalar.
pub type Integer = BigInt;

/// An odd prime exponent together with `k = (p - 1) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct OddPrime(u32);

impl OddPrime {
    pub fn new(p: u32) -> Result<Self> {
        if p < 3 || p % 2 == 0 || !is_prime(u64::from(p)) {
            return Err(Error::Domain(format!("{p} is not an odd prime")));
        }
        Ok(OddPrime(p))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn k(self) -> u32 {
        (self.0 - 1) / 2
    }

    pub fn to_integer(self) -> Integer {
        Integer::from(self.0)
    }
}

impl TryFrom<u32> for OddPrime {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        OddPrime::new(p)
    }
}

impl From<OddPrime> for u32 {
    fn from(p: OddPrime) -> u32 {
        p.0
    }
}

impl fmt::Display for OddPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

const TRIAL_LIMIT: u64 = 1 << 16;
// Deterministic for every n < 3.3 * 10^24, so certainly for u64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality: trial division below 2^16, Miller-Rabin above.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < TRIAL_LIMIT {
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for &w in &MR_WITNESSES {
        let mut x = pow(w % n, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `(floor(n^(1/k)), root^k == n)` for `n >= 0`, `k >= 1`.
pub fn integer_root(n: &Integer, k: u32) -> Result<(Integer, bool)> {
    if k == 0 {
        return Err(Error::Domain("root index must be positive".into()));
    }
    if n.is_negative() {
        return Err(Error::Domain(format!("root of negative {n}")));
    }
    let mut root = n.nth_root(k);
    // Exact correction around the Newton estimate.
    while pow(&root, k) > *n {
        root -= 1;
    }
    while pow(&(&root + 1), k) <= *n {
        root += 1;
    }
    let exact = pow(&root, k) == *n;
    Ok((root, exact))
}

/// Exact `k`-th root of a signed integer, if one exists. Even `k` only
/// admits non-negative `n`.
pub fn exact_root(n: &Integer, k: u32) -> Option<Integer> {
    if k == 0 {
        return None;
    }
    if n.is_negative() {
        if k % 2 == 0 {
            return None;
        }
        let (r, exact) = integer_root(&-n, k).ok()?;
        return exact.then(|| -r);
    }
    let (r, exact) = integer_root(n, k).ok()?;
    exact.then_some(r)
}

pub fn is_perfect_power(n: &Integer, k: u32) -> bool {
    exact_root(n, k).is_some()
}

/// Largest `v` with `q^v | n`.
pub fn p_adic_valuation(n: &Integer, q: u64) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::Domain("valuation of zero is infinite".into()));
    }
    if !is_prime(q) {
        return Err(Error::Domain(format!("{q} is not prime")));
    }
    Ok(valuation_unchecked(n, q))
}

/// Valuation without the primality check; `n` must be nonzero.
pub(crate) fn valuation_unchecked(n: &Integer, q: u64) -> u32 {
    debug_assert!(!n.is_zero());
    if q == 2 {
        return n.trailing_zeros().unwrap_or(0) as u32;
    }
    let q = Integer::from(q);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (quot, rem) = m.div_rem(&q);
        if !rem.is_zero() {
            return v;
        }
        m = quot;
        v += 1;
    }
}

/// `n` with every factor of `q` removed, together with the count removed.
pub(crate) fn strip_factor(n: &Integer, q: u64) -> (Integer, u32) {
    if n.is_zero() {
        return (Integer::zero(), 0);
    }
    let v = valuation_unchecked(n, q);
    (n / Integer::from(q).pow(v), v)
}

pub fn binomial(n: u64, i: u64) -> Result<Integer> {
    if i > n {
        return Err(Error::Domain(format!("binomial({n}, {i}) with i > n")));
    }
    Ok(binom(n, i))
}

/// Unchecked binomial; zero when `i > n`.
pub(crate) fn binom(n: u64, i: u64) -> Integer {
    if i > n {
        return Integer::zero();
    }
    let i = i.min(n - i);
    let mut acc = BigUint::one();
    for j in 0..i {
        acc *= n - j;
        acc /= j + 1;
    }
    Integer::from_biguint(Sign::Plus, acc)
}

pub(crate) fn pow(base: &Integer, e: u32) -> Integer {
    num_traits::Pow::pow(base, e)
}

/// `(-1)^i` as an integer.
pub(crate) fn sign_pow(i: u32) -> Integer {
    if i % 2 == 0 {
        Integer::one()
    } else {
        -Integer::one()
    }
}

pub fn gcd(a: &Integer, b: &Integer) -> Integer {
    a.gcd(b)
}

pub(crate) fn gcd3(a: &Integer, b: &Integer, c: &Integer) -> Integer {
    a.gcd(b).gcd(c)
}

/// Non-negative residue of `n` modulo `m > 0`.
pub(crate) fn residue(n: &Integer, m: u64) -> u64 {
    n.mod_floor(&Integer::from(m)).to_u64().expect("residue fits in u64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(n: i64) -> Integer {
        Integer::from(n)
    }

    #[test]
    fn integer_root_examples() {
        assert_eq!(integer_root(&int(27), 3).unwrap(), (int(3), true));
        assert_eq!(integer_root(&int(26), 3).unwrap(), (int(2), false));
        assert_eq!(integer_root(&int(1), 5).unwrap(), (int(1), true));
        assert_eq!(integer_root(&int(0), 4).unwrap(), (int(0), true));
        assert!(matches!(integer_root(&int(8), 0), Err(Error::Domain(_))));
        assert!(integer_root(&int(-8), 3).is_err());
    }

    #[test]
    fn signed_roots() {
        assert_eq!(exact_root(&int(-125), 3), Some(int(-5)));
        assert_eq!(exact_root(&int(-4), 2), None);
        assert!(is_perfect_power(&int(1 << 20), 5));
        assert!(!is_perfect_power(&int(126), 3));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(p_adic_valuation(&int(21), 3).unwrap(), 1);
        assert_eq!(p_adic_valuation(&int(18), 3).unwrap(), 2);
        assert_eq!(p_adic_valuation(&int(7), 3).unwrap(), 0);
        assert_eq!(p_adic_valuation(&int(-40), 2).unwrap(), 3);
        assert!(matches!(p_adic_valuation(&int(0), 3), Err(Error::Domain(_))));
        assert!(p_adic_valuation(&int(12), 4).is_err());
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(4, 2).unwrap(), int(6));
        assert_eq!(binomial(5, 0).unwrap(), int(1));
        assert_eq!(binomial(7, 3).unwrap(), int(35));
        assert!(binomial(3, 4).is_err());
    }

    #[test]
    fn primality_against_sieve() {
        let limit = 5000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (n, &prime) in sieve.iter().enumerate() {
            assert_eq!(is_prime(n as u64), prime, "n = {n}");
        }
        // Above the trial-division threshold.
        assert!(is_prime(65_537));
        assert!(is_prime(4_294_967_291));
        assert!(!is_prime(4_294_967_297)); // 641 * 6700417
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2, 3, 5, 7
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn odd_prime_rejects() {
        assert!(OddPrime::new(2).is_err());
        assert!(OddPrime::new(9).is_err());
        let p = OddPrime::new(13).unwrap();
        assert_eq!(p.k(), 6);
    }

    proptest! {
        #[test]
        fn root_brackets(n in 0u64..u64::MAX, k in 1u32..9) {
            let n = Integer::from(n);
            let (r, exact) = integer_root(&n, k).unwrap();
            prop_assert!(pow(&r, k) <= n);
            prop_assert!(pow(&(&r + 1), k) > n);
            prop_assert_eq!(exact, pow(&r, k) == n);
        }

        #[test]
        fn valuation_is_additive(m in 1i64..1_000_000, n in 1i64..1_000_000, q in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
            let (m, n) = (int(m), int(n));
            prop_assert_eq!(
                p_adic_valuation(&(&m * &n), q).unwrap(),
                p_adic_valuation(&m, q).unwrap() + p_adic_valuation(&n, q).unwrap()
            );
        }
    }

    #[test]
    fn prime_divides_inner_binomials() {
        for p in [2u64, 3, 5, 7, 11, 13, 31, 97] {
            for i in 1..p {
                assert!((binom(p, i) % Integer::from(p)).is_zero());
            }
        }
    }
}
