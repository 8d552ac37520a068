//! The `phi_p` form and its `A_p` / `D_p` rewritings, evaluated on concrete
//! integers, plus the gcd/valuation classification of `(z - y, phi_p(z, y))`.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{self, pow, sign_pow, Integer, OddPrime};
use crate::{Error, Result};

/// `sum_{i=0}^{p-1} u^(p-1-i) v^i`; equals `(u^p - v^p) / (u - v)` when
/// `u != v` and is total otherwise.
pub fn phi(p: OddPrime, u: &Integer, v: &Integer) -> Integer {
    phi_n(p.get(), u, v)
}

/// The same sum for an arbitrary exponent `n >= 1`.
pub fn phi_n(n: u32, u: &Integer, v: &Integer) -> Integer {
    let mut acc = Integer::zero();
    let mut v_pow = Integer::one();
    let mut terms = Vec::with_capacity(n as usize);
    for _ in 0..n {
        terms.push(v_pow.clone());
        v_pow *= v;
    }
    // Horner in u: the coefficient of u^(n-1-i) is v^i.
    for t in terms {
        acc = acc * u + t;
    }
    acc
}

/// `A`, `D` and `phi` for one `(p, u, v)`.
///
/// Plain forms read `(u, v) = (z, y)` and satisfy
/// `phi = A + (uv)^k = D + p (uv)^k`. Alternating forms read
/// `(u, v) = (x, y)`, evaluate `phi(x, -y)` and satisfy
/// `phi = A + (-1)^k (xy)^k = D + (xy)^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormPair {
    #[serde(serialize_with = "crate::serde_big::int")]
    pub a: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub d: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub phi: Integer,
    /// `(uv)^k`.
    #[serde(serialize_with = "crate::serde_big::int")]
    pub uv_k: Integer,
    pub k: u32,
    pub p: u32,
    pub alternating: bool,
}

impl FormPair {
    /// Right-hand sides of the two decomposition equalities.
    pub fn via_a(&self) -> Integer {
        if self.alternating {
            &self.a + sign_pow(self.k) * &self.uv_k
        } else {
            &self.a + &self.uv_k
        }
    }

    pub fn via_d(&self) -> Integer {
        if self.alternating {
            &self.d + &self.uv_k
        } else {
            &self.d + Integer::from(self.p) * &self.uv_k
        }
    }

    pub fn holds(&self) -> bool {
        self.via_a() == self.phi && self.via_d() == self.phi
    }
}

pub fn ad_forms(p: OddPrime, u: &Integer, v: &Integer, alternating: bool) -> FormPair {
    let k = p.k();
    let uv = u * v;
    let mut a = Integer::zero();
    let mut d = Integer::zero();
    let mut uv_i = Integer::one();
    for i in 0..k {
        let sign = if alternating { sign_pow(i) } else { Integer::one() };
        let m = k - i;
        let weight = &sign * &uv_i;
        a += &weight * (pow(u, 2 * m) + pow(v, 2 * m));
        let diff = pow(u, m) - pow(v, m);
        d += &weight * &diff * &diff;
        uv_i *= &uv;
    }
    let phi = if alternating { phi(p, u, &-v) } else { phi(p, u, v) };
    FormPair { a, d, phi, uv_k: uv_i, k, p: p.get(), alternating }
}

/// gcd structure of `(z - y, phi_p(z, y))` for coprime `0 < y < z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdClass {
    #[serde(serialize_with = "crate::serde_big::int")]
    pub g: Integer,
    pub phi_valuation: u32,
    /// `p | z - y`.
    pub divides: bool,
}

pub fn classify_gcd(p: OddPrime, y: &Integer, z: &Integer) -> Result<GcdClass> {
    if !y.is_positive() || y >= z {
        return Err(Error::Precondition(format!("need 0 < y < z, got y={y}, z={z}")));
    }
    if !y.gcd(z).is_one() {
        return Err(Error::Precondition(format!("gcd({y}, {z}) != 1")));
    }
    let diff = z - y;
    let phi = phi(p, z, y);
    let g = diff.gcd(&phi);
    let pp = u64::from(p.get());
    Ok(GcdClass {
        g,
        phi_valuation: arith::valuation_unchecked(&phi, pp),
        divides: arith::residue(&diff, pp) == 0,
    })
}

/// `(z - y)(z^(n-1) + y^(n-1)) + zy(z^(n-2) - y^(n-2))` for `n >= 2`.
pub fn splitting_rhs(n: u32, z: &Integer, y: &Integer) -> Integer {
    assert!(n >= 2);
    (z - y) * (pow(z, n - 1) + pow(y, n - 1)) + z * y * (pow(z, n - 2) - pow(y, n - 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(n: i64) -> Integer {
        Integer::from(n)
    }

    fn p(n: u32) -> OddPrime {
        OddPrime::new(n).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(p(3), &int(2), &int(1)), int(7));
        assert_eq!(phi(p(3), &int(1), &int(1)), int(3));
        assert_eq!(phi(p(3), &int(2), &int(-1)), int(3));
    }

    #[test]
    fn ad_forms_examples() {
        let f = ad_forms(p(3), &int(2), &int(1), false);
        assert_eq!((f.a.clone(), f.d.clone(), f.phi.clone()), (int(5), int(1), int(7)));
        assert_eq!(&f.a + int(2), int(7));
        assert_eq!(&f.d + int(3 * 2), int(7));
        assert!(f.holds());

        let f = ad_forms(p(3), &int(1), &int(1), false);
        assert_eq!((f.a.clone(), f.d.clone(), f.phi.clone()), (int(2), int(0), int(3)));

        let f = ad_forms(p(3), &int(2), &int(1), true);
        assert_eq!((f.a.clone(), f.d.clone(), f.phi.clone()), (int(5), int(1), int(3)));
        assert_eq!(f.via_a(), int(5 - 2));
        assert_eq!(f.via_d(), int(1 + 2));
    }

    #[test]
    fn classify_gcd_examples() {
        let c = classify_gcd(p(3), &int(1), &int(4)).unwrap();
        assert_eq!(c, GcdClass { g: int(3), phi_valuation: 1, divides: true });
        let c = classify_gcd(p(3), &int(2), &int(3)).unwrap();
        assert_eq!(c, GcdClass { g: int(1), phi_valuation: 0, divides: false });
        let c = classify_gcd(p(5), &int(1), &int(6)).unwrap();
        assert_eq!(c, GcdClass { g: int(5), phi_valuation: 1, divides: true });
    }

    #[test]
    fn classify_gcd_rejects_non_coprime() {
        assert!(matches!(classify_gcd(p(3), &int(2), &int(4)), Err(Error::Precondition(_))));
        assert!(matches!(classify_gcd(p(3), &int(4), &int(4)), Err(Error::Precondition(_))));
        assert!(matches!(classify_gcd(p(3), &int(0), &int(4)), Err(Error::Precondition(_))));
    }

    proptest! {
        #[test]
        fn phi_times_difference(u in -10_000i64..10_000, v in -10_000i64..10_000,
                                pp in prop::sample::select(vec![3u32, 5, 7, 11, 13])) {
            let (u, v) = (int(u), int(v));
            let lhs = (&u - &v) * phi(p(pp), &u, &v);
            prop_assert_eq!(lhs, pow(&u, pp) - pow(&v, pp));
        }

        #[test]
        fn form_pairs_hold_everywhere(u in -5_000i64..5_000, v in -5_000i64..5_000,
                                      pp in prop::sample::select(vec![3u32, 5, 7, 11, 13]),
                                      alt in any::<bool>()) {
            prop_assert!(ad_forms(p(pp), &int(u), &int(v), alt).holds());
        }

        #[test]
        fn splitting_identity(z in -1_000i64..1_000, y in -1_000i64..1_000, n in 2u32..12) {
            let (z, y) = (int(z), int(y));
            prop_assert_eq!(pow(&z, n) - pow(&y, n), splitting_rhs(n, &z, &y));
        }

        #[test]
        fn gcd_is_one_or_p(y in 1i64..2_000, d in 1i64..2_000, pp in prop::sample::select(vec![3u32, 5, 7])) {
            let (y, z) = (int(y), int(y + d));
            prop_assume!(y.gcd(&z).is_one());
            let c = classify_gcd(p(pp), &y, &z).unwrap();
            let pi = int(pp.into());
            prop_assert!(c.g.is_one() || c.g == pi);
            prop_assert_eq!(c.g == pi, c.divides);
            if c.divides {
                prop_assert_eq!(c.phi_valuation, 1);
            }
        }
    }
}
