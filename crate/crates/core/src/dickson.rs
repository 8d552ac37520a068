//! Dickson's construction of Pythagorean triples from a pair `(a, b)` with
//! `2ab` a perfect square, and the `p = 2` shape of the gap formula.

use std::io::Write;

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, gcd3, integer_root, pow, Integer};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DicksonPair {
    pub a: Integer,
    pub b: Integer,
}

impl DicksonPair {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        if !a.is_positive() || !b.is_positive() {
            return Err(Error::Precondition(format!("Dickson pair needs a, b >= 1, got ({a}, {b})")));
        }
        Ok(DicksonPair { a, b })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PythTriple {
    #[serde(serialize_with = "crate::serde_big::int")]
    pub x: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub y: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub z: Integer,
    pub primitive: bool,
}

impl PythTriple {
    /// `(a, b, m) = (z - y, z - x, x - a)`.
    pub fn dickson_parts(&self) -> (Integer, Integer, Integer) {
        let a = &self.z - &self.y;
        let b = &self.z - &self.x;
        let m = &self.x - &a;
        (a, b, m)
    }
}

/// `(a + m, b + m, a + b + m)` with `m = sqrt(2ab)`, when `2ab` is square.
pub fn triple_from_pair(pair: &DicksonPair) -> Option<PythTriple> {
    let (m, exact) = integer_root(&(2 * &pair.a * &pair.b), 2).ok()?;
    if !exact {
        return None;
    }
    let x = &pair.a + &m;
    let y = &pair.b + &m;
    let z = &pair.a + &pair.b + &m;
    let primitive = gcd3(&x, &y, &z).is_one();
    Some(PythTriple { x, y, z, primitive })
}

/// All primitive triples with `z <= z_max`, `x < y`, sorted by `(z, x)`.
///
/// Pairs `a < b` are scanned by increasing `a + b`, then `a`; each sum is an
/// independent unit of work so the scan runs in parallel and is merged in
/// order.
pub fn enumerate_primitive(z_max: u64) -> Result<Vec<PythTriple>> {
    if z_max < 5 {
        return Err(Error::Precondition(format!("z_max must be >= 5, got {z_max}")));
    }
    let per_sum: Vec<Vec<PythTriple>> = (3..z_max)
        .into_par_iter()
        .map(|s| {
            let mut found = Vec::new();
            for a in 1..=(s - 1) / 2 {
                let b = s - a;
                if a == b {
                    continue;
                }
                let two_ab = 2 * u128::from(a) * u128::from(b);
                let m = two_ab.isqrt();
                if m * m != two_ab || u128::from(s) + m > u128::from(z_max) {
                    continue;
                }
                let t = triple_from_pair(&DicksonPair { a: a.into(), b: b.into() })
                    .expect("square checked above");
                if t.primitive {
                    found.push(t);
                }
            }
            found
        })
        .collect();
    let mut out: Vec<PythTriple> = per_sum.into_iter().flatten().collect();
    out.sort_by(|l, r| (&l.z, &l.x).cmp(&(&r.z, &r.x)));
    Ok(out)
}

/// The `p = 2` Barlow-Abel shape of a primitive triple with even leg
/// `x_even`: `a = 2^(2e-1) r'^2`, `b = s^2`, `x_even - a = 2^e r' s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct P2Shape {
    pub e: u32,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub r_prime: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub s: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub a: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub b: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub x_minus_a: Integer,
}

pub fn p2_decompose(x_even: &Integer, y: &Integer, z: &Integer) -> Result<P2Shape> {
    let positive = x_even.is_positive() && y.is_positive() && z.is_positive();
    if !positive || pow(x_even, 2) + pow(y, 2) != pow(z, 2) || !gcd3(x_even, y, z).is_one() {
        return Err(Error::Precondition(format!(
            "({x_even}, {y}, {z}) is not a primitive Pythagorean triple"
        )));
    }
    if arith::residue(x_even, 2) != 0 {
        return Err(Error::Precondition(format!("leg {x_even} is odd")));
    }
    let a = z - y;
    let b = z - x_even;
    let (odd_a, v2) = arith::strip_factor(&a, 2);
    if v2 % 2 == 0 {
        return Err(Error::Integrity(format!("a = {a} has even 2-adic valuation {v2}")));
    }
    let e = (v2 + 1) / 2;
    let r_prime = arith::exact_root(&odd_a, 2)
        .ok_or_else(|| Error::Integrity(format!("odd part of a = {a} is not a square")))?;
    let s = arith::exact_root(&b, 2)
        .ok_or_else(|| Error::Integrity(format!("b = {b} is not a square")))?;
    let x_minus_a = x_even - &a;
    if x_minus_a != Integer::from(2).pow(e) * &r_prime * &s {
        return Err(Error::Integrity(format!("x - a = {x_minus_a} != 2^{e} r' s")));
    }
    Ok(P2Shape { e, r_prime, s, a, b, x_minus_a })
}

/// CSV with columns `x,y,z,a,b,m,primitive`.
pub fn write_csv<W: Write>(triples: &[PythTriple], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "z", "a", "b", "m", "primitive"])?;
    for t in triples {
        let (a, b, m) = t.dickson_parts();
        w.write_record([
            t.x.to_string(),
            t.y.to_string(),
            t.z.to_string(),
            a.to_string(),
            b.to_string(),
            m.to_string(),
            t.primitive.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Integer {
        Integer::from(n)
    }

    fn triple(x: i64, y: i64, z: i64) -> PythTriple {
        PythTriple { x: int(x), y: int(y), z: int(z), primitive: true }
    }

    #[test]
    fn pair_examples() {
        let t = triple_from_pair(&DicksonPair::new(1, 2).unwrap()).unwrap();
        assert_eq!(t, triple(3, 4, 5));
        let t = triple_from_pair(&DicksonPair::new(2, 1).unwrap()).unwrap();
        assert_eq!(t, triple(4, 3, 5));
        assert!(triple_from_pair(&DicksonPair::new(1, 1).unwrap()).is_none());
        assert!(DicksonPair::new(0, 3).is_err());
        // (2, 4): 2ab = 16, triple (6, 8, 10) is not primitive.
        let t = triple_from_pair(&DicksonPair::new(2, 4).unwrap()).unwrap();
        assert!(!t.primitive);
    }

    #[test]
    fn enumerate_small() {
        assert_eq!(enumerate_primitive(5).unwrap(), vec![triple(3, 4, 5)]);
        assert_eq!(enumerate_primitive(13).unwrap(), vec![triple(3, 4, 5), triple(5, 12, 13)]);
        assert!(enumerate_primitive(4).is_err());
    }

    #[test]
    fn p2_examples() {
        let d = p2_decompose(&int(4), &int(3), &int(5)).unwrap();
        assert_eq!((d.e, d.r_prime.clone(), d.s.clone()), (1, int(1), int(1)));
        assert_eq!((d.a, d.b, d.x_minus_a), (int(2), int(1), int(2)));

        let d = p2_decompose(&int(12), &int(5), &int(13)).unwrap();
        assert_eq!((d.e, d.r_prime.clone(), d.s.clone()), (2, int(1), int(1)));
        assert_eq!((d.a, d.b, d.x_minus_a), (int(8), int(1), int(4)));

        let d = p2_decompose(&int(8), &int(15), &int(17)).unwrap();
        assert_eq!((d.e, d.r_prime.clone(), d.s.clone()), (1, int(1), int(3)));
        assert_eq!((d.a, d.b, d.x_minus_a), (int(2), int(9), int(6)));
    }

    #[test]
    fn p2_rejects() {
        assert!(matches!(p2_decompose(&int(3), &int(4), &int(5)), Err(Error::Precondition(_))));
        assert!(matches!(p2_decompose(&int(6), &int(8), &int(10)), Err(Error::Precondition(_))));
        assert!(matches!(p2_decompose(&int(4), &int(3), &int(6)), Err(Error::Precondition(_))));
    }

    #[test]
    fn csv_columns() {
        let mut buf = Vec::new();
        write_csv(&[triple(3, 4, 5)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,z,a,b,m,primitive\n3,4,5,1,2,2,true\n");
    }
}
