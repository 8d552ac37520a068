//! Decomposition of a candidate triple into `a = z - y`, `b = z - x`,
//! `c = x + y` and the three `phi_p` values, with classification against the
//! Barlow-Abel relation shapes.
//!
//! The shape tables (all roots positive integers):
//!
//! ```text
//! FLT1:          z-y = r^p                  phi(z,y)  = r1^p     p ∤ r r1
//!                z-x = s^p                  phi(z,x)  = s1^p     p ∤ s s1
//!                x+y = t^p                  phi(x,-y) = t1^p     p ∤ t t1
//! FLT2 Case I:   z-y = 2^(pd) p^(pe-1) r'^p phi(z,y)  = p r1^p
//!                z-x = s^p                  phi(z,x)  = s1^p
//!                x+y = t^p                  phi(x,-y) = t1^p
//! FLT2 Case II:  z-y = 2^(pd) r0^p          phi(z,y)  = r1^p
//!                z-x = p^(pe-1) s'^p        phi(z,x)  = p s1^p
//!                x+y = t^p                  phi(x,-y) = t1^p
//! ```
//!
//! with `d, e >= 1` and `r'`, `r0`, `s'` free of the factor `2p`.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{self, exact_root, gcd3, pow, strip_factor, Integer, OddPrime};
use crate::forms::phi;
use crate::poly::{self, point, Var};
use crate::{Error, Result};

/// `0 < x < y < z` with `gcd(x, y, z) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateTriple {
    #[serde(serialize_with = "crate::serde_big::int")]
    x: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    y: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    z: Integer,
}

impl CandidateTriple {
    pub fn new(x: impl Into<Integer>, y: impl Into<Integer>, z: impl Into<Integer>) -> Result<Self> {
        let (x, y, z) = (x.into(), y.into(), z.into());
        if !x.is_positive() || x >= y || y >= z {
            return Err(Error::Precondition(format!("need 0 < x < y < z, got ({x}, {y}, {z})")));
        }
        if !gcd3(&x, &y, &z).is_one() {
            return Err(Error::Precondition(format!("gcd({x}, {y}, {z}) != 1")));
        }
        Ok(CandidateTriple { x, y, z })
    }

    pub fn x(&self) -> &Integer {
        &self.x
    }
    pub fn y(&self) -> &Integer {
        &self.y
    }
    pub fn z(&self) -> &Integer {
        &self.z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Shape {
    None,
    Flt1,
    Flt2CaseI,
    Flt2CaseII,
}

/// 2-adic and p-adic valuations; `None` for a zero value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Valuation {
    pub two: Option<u32>,
    pub p: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Valuations {
    pub a: Valuation,
    pub b: Valuation,
    pub c: Valuation,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PowerFlags {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub phi_zy: bool,
    pub phi_zx: bool,
    pub phi_xy: bool,
}

/// Whatever relation components could be extracted exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Components {
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub r: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub r1: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub s: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub s1: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub t: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub t1: Option<Integer>,
    pub d: Option<u32>,
    pub e: Option<u32>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub r_prime: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub r0: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub s_prime: Option<Integer>,
    /// `z - y` fits the Case I form under the reading `2 ∤ r'` and `p ∤ r'`.
    pub case_one_a_coprime_reading: bool,
    /// `z - y` fits the Case I form under the reading `2p ∤ r'`.
    pub case_one_a_2p_reading: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub p: OddPrime,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub x: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub y: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub z: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub a: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub b: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub c: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub phi_zy: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub phi_zx: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub phi_xy: Integer,
    pub valuations: Valuations,
    pub pth_powers: PowerFlags,
    /// Which of `x`, `y`, `z` is even.
    pub even_variable: Option<Var>,
    /// Which of `x`, `y`, `z` are divisible by `p`.
    pub p_divisible: Vec<Var>,
    pub shape: Shape,
    pub components: Components,
}

fn valuation(n: &Integer, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation { two: None, p: None };
    }
    Valuation {
        two: Some(arith::valuation_unchecked(n, 2)),
        p: Some(arith::valuation_unchecked(n, p)),
    }
}

fn positive_root(n: &Integer, p: u32) -> Option<Integer> {
    exact_root(n, p).filter(|r| r.is_positive())
}

fn not_divisible(n: &Integer, m: u64) -> bool {
    arith::residue(n, m) != 0
}

/// `n = 2^(pd) p^(pe-1) w^p` with `d, e >= 1` and `w` free of 2 and `p`,
/// read off the stripped valuations.
fn case_one_form(n: &Integer, p: u32) -> Option<(u32, u32, Integer)> {
    let pp = u64::from(p);
    let (odd, v2) = strip_factor(n, 2);
    let (rest, vp) = strip_factor(&odd, pp);
    if v2 == 0 || v2 % p != 0 || (vp + 1) % p != 0 {
        return None;
    }
    let w = positive_root(&rest, p)?;
    Some((v2 / p, (vp + 1) / p, w))
}

/// The same form searched over every admissible `(d, e)` and accepting any
/// `r'` with `2p ∤ r'`.
fn case_one_form_2p_reading(n: &Integer, p: u32) -> bool {
    let pp = u64::from(p);
    if !n.is_positive() {
        return false;
    }
    let v2 = arith::valuation_unchecked(n, 2);
    let vp = arith::valuation_unchecked(n, pp);
    for d in 1..=v2 / p {
        for e in 1..=(vp + 1) / p {
            let den = pow(&Integer::from(2), p * d) * pow(&Integer::from(p), p * e - 1);
            let (q, r) = n.div_rem(&den);
            if !r.is_zero() {
                continue;
            }
            if let Some(w) = positive_root(&q, p) {
                if not_divisible(&w, 2 * pp) {
                    return true;
                }
            }
        }
    }
    false
}

/// `n = 2^(pd) w^p`, `d >= 1`, `w` odd and free of `p`.
fn case_two_a_form(n: &Integer, p: u32) -> Option<(u32, Integer)> {
    let (odd, v2) = strip_factor(n, 2);
    if v2 == 0 || v2 % p != 0 {
        return None;
    }
    let w = positive_root(&odd, p)?;
    not_divisible(&w, u64::from(p)).then_some((v2 / p, w))
}

/// `n = p^(pe-1) w^p`, `e >= 1`, `w` free of `2p`.
fn case_two_b_form(n: &Integer, p: u32) -> Option<(u32, Integer)> {
    let pp = u64::from(p);
    let (rest, vp) = strip_factor(n, pp);
    if (vp + 1) % p != 0 {
        return None;
    }
    let w = positive_root(&rest, p)?;
    not_divisible(&w, 2).then_some(((vp + 1) / p, w))
}

/// `n = p * w^p` with `w` a positive integer.
fn p_times_power(n: &Integer, p: u32) -> Option<Integer> {
    let (q, r) = n.div_rem(&Integer::from(p));
    if !r.is_zero() {
        return None;
    }
    positive_root(&q, p)
}

pub fn decompose(p: OddPrime, t: &CandidateTriple) -> Decomposition {
    let pu = p.get();
    let pp = u64::from(pu);
    let (x, y, z) = (t.x.clone(), t.y.clone(), t.z.clone());
    let a = &z - &y;
    let b = &z - &x;
    let c = &x + &y;
    let phi_zy = phi(p, &z, &y);
    let phi_zx = phi(p, &z, &x);
    let phi_xy = phi(p, &x, &-&y);

    let roots = [&a, &b, &c, &phi_zy, &phi_zx, &phi_xy].map(|n| positive_root(n, pu));
    let [r, s, t_root, r1, s1, t1] = [&roots[0], &roots[1], &roots[2], &roots[3], &roots[4], &roots[5]];
    let flags = PowerFlags {
        a: r.is_some(),
        b: s.is_some(),
        c: t_root.is_some(),
        phi_zy: r1.is_some(),
        phi_zx: s1.is_some(),
        phi_xy: t1.is_some(),
    };

    let mut comp = Components {
        r: r.clone(),
        r1: r1.clone(),
        s: s.clone(),
        s1: s1.clone(),
        t: t_root.clone(),
        t1: t1.clone(),
        ..Components::default()
    };

    let free_of_p = |v: &Option<Integer>| v.as_ref().is_some_and(|n| not_divisible(n, pp));
    let flt1 = [r, r1, s, s1, t_root, t1].iter().all(|v| free_of_p(v));

    let case_one_a = case_one_form(&a, pu);
    comp.case_one_a_coprime_reading = case_one_a.is_some();
    comp.case_one_a_2p_reading = case_one_form_2p_reading(&a, pu);
    let case_one_phi = p_times_power(&phi_zy, pu);
    let rest_one = flags.b && flags.phi_zx && flags.c && flags.phi_xy;
    let case_one = case_one_a.is_some() && case_one_phi.is_some() && rest_one;
    if let Some((d, e, w)) = &case_one_a {
        comp.d = Some(*d);
        comp.e = Some(*e);
        comp.r_prime = Some(w.clone());
    }
    if case_one_phi.is_some() && comp.r1.is_none() {
        comp.r1 = case_one_phi;
    }

    let case_two_a = case_two_a_form(&a, pu);
    let case_two_b = case_two_b_form(&b, pu);
    let case_two_phi = p_times_power(&phi_zx, pu);
    let case_two = case_two_a.is_some()
        && flags.phi_zy
        && case_two_b.is_some()
        && case_two_phi.is_some()
        && flags.c
        && flags.phi_xy;
    if let Some((d, w)) = &case_two_a {
        comp.d.get_or_insert(*d);
        comp.r0 = Some(w.clone());
    }
    if let Some((e, w)) = &case_two_b {
        comp.e.get_or_insert(*e);
        comp.s_prime = Some(w.clone());
    }
    if case_two_phi.is_some() && comp.s1.is_none() {
        comp.s1 = case_two_phi;
    }

    let shape = if flt1 {
        Shape::Flt1
    } else if case_one {
        Shape::Flt2CaseI
    } else if case_two {
        Shape::Flt2CaseII
    } else {
        Shape::None
    };

    let named = [(Var::X, &x), (Var::Y, &y), (Var::Z, &z)];
    let even_variable = named.iter().find(|(_, n)| !not_divisible(n, 2)).map(|(v, _)| *v);
    let p_divisible = named.iter().filter(|(_, n)| !not_divisible(n, pp)).map(|(v, _)| *v).collect();

    Decomposition {
        p,
        valuations: Valuations { a: valuation(&a, pp), b: valuation(&b, pp), c: valuation(&c, pp) },
        x,
        y,
        z,
        a,
        b,
        c,
        phi_zy,
        phi_zx,
        phi_xy,
        pth_powers: flags,
        even_variable,
        p_divisible,
        shape,
        components: comp,
    }
}

impl Decomposition {
    /// `2x = c - b + a`, `2y = c + b - a`, `2z = c + b + a`.
    pub fn linear_identities_hold(&self) -> bool {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        2 * &self.x == c - b + a && 2 * &self.y == c + b - a && 2 * &self.z == c + b + a
    }

    /// `x - a = y - b = z - (a + b) = x + y - z`.
    pub fn shifted_equalities_hold(&self) -> bool {
        let base = &self.x - &self.a;
        base == &self.y - &self.b
            && base == &self.z - (&self.a + &self.b)
            && base == &self.x + &self.y - &self.z
    }
}

/// `p a b K_p(x, a, b)`, whether it is a perfect `p`-th power, and the
/// Fermat residual `x^p + y^p - z^p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapRoot {
    pub exponent: u32,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub k: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub radicand: Integer,
    pub exact: bool,
    #[serde(serialize_with = "crate::serde_big::opt_int")]
    pub root: Option<Integer>,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub residual: Integer,
}

impl GapRoot {
    /// `(x - a)^n - radicand`, which must equal the residual.
    pub fn master_identity_holds(&self, x: &Integer, a: &Integer) -> bool {
        pow(&(x - a), self.exponent) - &self.radicand == self.residual
    }
}

pub fn gap_root(d: &Decomposition) -> Result<GapRoot> {
    gap_root_n(d.p.get(), &d.x, &d.y, &d.z)
}

/// The same computation for any exponent `n >= 2`; `n = 2` is the Dickson
/// case where `K_2 = 1`.
pub fn gap_root_n(n: u32, x: &Integer, y: &Integer, z: &Integer) -> Result<GapRoot> {
    let a = z - y;
    let b = z - x;
    let k_poly = poly::k_poly_cached(n)?;
    let k = k_poly.evaluate_int(&point([(Var::X, x.clone()), (Var::A, a.clone()), (Var::B, b.clone())]))?;
    let radicand = Integer::from(n) * &a * &b * &k;
    let root = exact_root(&radicand, n);
    let residual = pow(x, n) + pow(y, n) - pow(z, n);
    Ok(GapRoot { exponent: n, k, exact: root.is_some(), radicand, root, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Integer {
        Integer::from(n)
    }

    fn p(n: u32) -> OddPrime {
        OddPrime::new(n).unwrap()
    }

    #[test]
    fn candidate_validation() {
        assert!(CandidateTriple::new(1, 1, 1).is_err());
        assert!(CandidateTriple::new(1, 2, 2).is_err());
        assert!(CandidateTriple::new(2, 4, 6).is_err());
        assert!(CandidateTriple::new(0, 4, 6).is_err());
        // Only the joint gcd is required.
        assert!(CandidateTriple::new(6, 8, 9).is_ok());
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(p(3), &CandidateTriple::new(6, 8, 9).unwrap());
        assert_eq!((d.a.clone(), d.b.clone(), d.c.clone()), (int(1), int(3), int(14)));
        assert!(d.pth_powers.a && !d.pth_powers.b && !d.pth_powers.c);
        assert_eq!(d.shape, Shape::None);
        assert_eq!(d.valuations.b, Valuation { two: Some(0), p: Some(1) });
        assert_eq!(d.even_variable, Some(Var::X));
        assert_eq!(d.p_divisible, vec![Var::X, Var::Z]);

        let d = decompose(p(3), &CandidateTriple::new(3, 5, 6).unwrap());
        assert!(d.pth_powers.a && d.pth_powers.c && !d.pth_powers.b);
        assert_eq!(d.components.t, Some(int(2)));
        assert_eq!(d.shape, Shape::None);

        let d = decompose(p(3), &CandidateTriple::new(1, 2, 3).unwrap());
        assert_eq!((d.a.clone(), d.b.clone(), d.c.clone()), (int(1), int(2), int(3)));
        assert_eq!(d.shape, Shape::None);
        assert!(d.linear_identities_hold() && d.shifted_equalities_hold());
    }

    #[test]
    fn case_one_form_readings() {
        // 2^3 * 3^2 * 5^3 = 9000 fits d = 1, e = 1, r' = 5 for p = 3.
        let n = int(9000);
        assert_eq!(case_one_form(&n, 3), Some((1, 1, int(5))));
        assert!(case_one_form_2p_reading(&n, 3));
        // Wrong p-adic exponent.
        assert_eq!(case_one_form(&int(8 * 27 * 125), 3), None);
        assert!(!case_one_form_2p_reading(&int(8 * 27 * 125), 3));
        // Two factors of 2^p also fit: d = 2.
        assert_eq!(case_one_form(&int(64 * 9), 3), Some((2, 1, int(1))));
        assert!(case_one_form_2p_reading(&int(64 * 9), 3));
    }

    #[test]
    fn case_two_forms() {
        assert_eq!(case_two_a_form(&int(8 * 125), 3), Some((1, int(5))));
        assert_eq!(case_two_a_form(&int(8 * 27), 3), None); // r0 divisible by p
        assert_eq!(case_two_b_form(&int(9 * 125), 3), Some((1, int(5))));
        assert_eq!(case_two_b_form(&int(9 * 8), 3), None); // s' even
    }

    #[test]
    fn gap_root_examples() {
        let d = decompose(p(3), &CandidateTriple::new(6, 8, 9).unwrap());
        let g = gap_root(&d).unwrap();
        assert_eq!(g.k, int(14));
        assert_eq!(g.radicand, int(126));
        assert!(!g.exact);
        assert_eq!(g.residual, int(-1));
        assert!(g.master_identity_holds(&d.x, &d.a));

        let g = gap_root_n(2, &int(4), &int(3), &int(5)).unwrap();
        assert_eq!(g.k, int(1));
        assert_eq!(g.radicand, int(4));
        assert!(g.exact);
        assert_eq!(g.root, Some(int(2)));
        assert_eq!(g.residual, int(0));
    }

    #[test]
    fn master_identity_small_window() {
        for pp in [3, 5, 7] {
            for z in 3..30i64 {
                for y in 2..z {
                    for x in 1..y {
                        let Ok(t) = CandidateTriple::new(x, y, z) else { continue };
                        let d = decompose(p(pp), &t);
                        assert!(d.linear_identities_hold() && d.shifted_equalities_hold());
                        let g = gap_root(&d).unwrap();
                        assert!(g.master_identity_holds(&d.x, &d.a), "{x} {y} {z} p={pp}");
                        // The valuation lemma needs gcd(y, z) = 1, which a
                        // jointly coprime candidate does not guarantee.
                        if !not_divisible(&d.a, pp.into()) && d.y.gcd(&d.z).is_one() {
                            assert_eq!(arith::valuation_unchecked(&d.phi_zy, pp.into()), 1);
                        }
                        assert_ne!(d.shape, Shape::Flt1);
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_json_field_order() {
        let d = decompose(p(3), &CandidateTriple::new(1, 2, 3).unwrap());
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with(r#"{"p":3,"x":"1","y":"2","z":"3","a":"1","b":"2","c":"3","phi_zy":"#));
        assert!(json.contains(r#""shape":"NONE""#));
    }
}
