//! Sparse multivariate polynomials with exact rational coefficients over the
//! fixed variable universe `{x, y, z, a, b, c, R}`.
//!
//! Terms are kept in graded-lexicographic order with `x > y > z > a > b > c > R`,
//! highest term first. The textual form is the canonical term sequence, e.g.
//! `2*x - a + b`, and parses back losslessly.
//!
//! The second half of the module builds the Fermat-gap family: `f_p`, `g_p`,
//! the gap polynomial `(x-a)^p - (x^p + y^p - z^p)` written in `{x, a, b}`,
//! its quotient `K_p` by `p*a*b`, and the reduction of `K_p` modulo `p`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{binom, sign_pow, Integer, OddPrime};
use crate::{Error, Result};

pub type Rational = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "c")]
    C,
    R,
}

/// All variables in ranking order.
pub const VARS: [Var; 7] = [Var::X, Var::Y, Var::Z, Var::A, Var::B, Var::C, Var::R];

impl Var {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z", "a", "b", "c", "R"][self.index()]
    }

    pub fn from_name(s: &str) -> Option<Var> {
        VARS.iter().copied().find(|v| v.name() == s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector indexed by [`Var::index`]. Ordered graded-lex, so the
/// largest exponent vector is the leading term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Exponents([u32; 7]);

impl Exponents {
    pub fn one() -> Self {
        Exponents([0; 7])
    }

    pub fn of(var: Var, e: u32) -> Self {
        let mut out = [0; 7];
        out[var.index()] = e;
        Exponents(out)
    }

    pub fn from_pairs(pairs: &[(Var, u32)]) -> Self {
        let mut out = Exponents::one();
        for &(v, e) in pairs {
            out.0[v.index()] += e;
        }
        out
    }

    pub fn get(&self, var: Var) -> u32 {
        self.0[var.index()]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Exponents) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Exponents) -> Exponents {
        let mut out = self.0;
        for (o, e) in out.iter_mut().zip(other.0) {
            *o += e;
        }
        Exponents(out)
    }

    /// `self / other`; caller guarantees `other.divides(self)`.
    fn div(&self, other: &Exponents) -> Exponents {
        let mut out = self.0;
        for (o, e) in out.iter_mut().zip(other.0) {
            *o -= e;
        }
        Exponents(out)
    }

    fn gcd(&self, other: &Exponents) -> Exponents {
        let mut out = self.0;
        for (o, e) in out.iter_mut().zip(other.0) {
            *o = (*o).min(e);
        }
        Exponents(out)
    }

    /// Non-zero `(var, exponent)` pairs in ranking order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        VARS.iter().map(|&v| (v, self.get(v))).filter(|&(_, e)| e > 0)
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (v, e) in self.iter() {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// One stored term; the coefficient is never zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: Rational,
    pub exponents: Exponents,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Exponents, Rational>,
}

fn int_to_rat(n: Integer) -> Rational {
    Rational::from_integer(n)
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::term(c, Exponents::one())
    }

    pub fn integer(n: impl Into<Integer>) -> Self {
        Polynomial::constant(int_to_rat(n.into()))
    }

    pub fn var(v: Var) -> Self {
        Polynomial::term(Rational::one(), Exponents::of(v, 1))
    }

    pub fn term(c: Rational, exps: Exponents) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial { terms }
    }

    /// `c * prod(v^e)`.
    pub fn monomial(c: impl Into<Integer>, pairs: &[(Var, u32)]) -> Self {
        Polynomial::term(int_to_rat(c.into()), Exponents::from_pairs(pairs))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms, leading term first.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms()
            .map(|(e, c)| Monomial { coefficient: c.clone(), exponents: *e })
            .collect()
    }

    pub fn coefficient(&self, exps: &Exponents) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<(&Exponents, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Every coefficient has denominator 1.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponents::degree).max()
    }

    /// The common degree of all terms, if the polynomial is homogeneous and
    /// nonzero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Exponents::degree);
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    pub fn variables(&self) -> Vec<Var> {
        VARS.iter()
            .copied()
            .filter(|&v| self.terms.keys().any(|e| e.get(v) > 0))
            .collect()
    }

    fn add_term(&mut self, exps: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect() }
    }

    fn mul_term(&self, exps: &Exponents, c: &Rational) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(e, k)| (e.mul(exps), k * c)).collect() }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replace every occurrence of `v` by `r`.
    pub fn substitute(&self, v: Var, r: &Polynomial) -> Polynomial {
        let mut powers: Vec<Polynomial> = vec![Polynomial::one()];
        let mut out = Polynomial::zero();
        for (exps, c) in &self.terms {
            let e = exps.get(v) as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * r;
                powers.push(next);
            }
            let mut rest = *exps;
            rest.0[v.index()] = 0;
            for (pe, pc) in &powers[e].terms {
                out.add_term(rest.mul(pe), c * pc);
            }
        }
        out
    }

    /// Exact value at a point binding every variable that occurs.
    pub fn evaluate(&self, point: &Point) -> Result<Rational> {
        let table = PowerTable::new(self, point)?;
        let mut acc = Rational::zero();
        for (exps, c) in &self.terms {
            acc += c * int_to_rat(table.monomial(exps));
        }
        Ok(acc)
    }

    /// Integer value at a point; the polynomial must be integral.
    pub fn evaluate_int(&self, point: &Point) -> Result<Integer> {
        if !self.is_integral() {
            return Err(Error::Integrity("integer evaluation of a non-integral polynomial".into()));
        }
        let table = PowerTable::new(self, point)?;
        let mut acc = Integer::zero();
        for (exps, c) in &self.terms {
            acc += c.numer() * table.monomial(exps);
        }
        Ok(acc)
    }

    /// `(coefficient gcd, monomial gcd)`. The coefficient gcd of rationals
    /// is `gcd(numerators) / lcm(denominators)`, always non-negative.
    pub fn content(&self) -> (Rational, Exponents) {
        let mut it = self.terms.iter();
        let Some((e0, c0)) = it.next() else {
            return (Rational::zero(), Exponents::one());
        };
        let mut num = c0.numer().abs();
        let mut den = c0.denom().clone();
        let mut mono = *e0;
        for (e, c) in it {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
            mono = mono.gcd(e);
        }
        (Rational::new(num, den), mono)
    }

    /// Coefficients reduced to residues in `[0, m)`. Rational coefficients
    /// are allowed when their denominators are invertible modulo `m`.
    pub fn reduce_mod(&self, m: u64) -> Result<Polynomial> {
        if m < 2 {
            return Err(Error::Domain(format!("modulus {m} < 2")));
        }
        let modulus = Integer::from(m);
        let mut out = Polynomial::zero();
        for (exps, c) in &self.terms {
            let den = c.denom().mod_floor(&modulus);
            let inv = mod_inverse(&den, &modulus).ok_or_else(|| {
                Error::Domain(format!("denominator {} not invertible mod {m}", c.denom()))
            })?;
            let r = (c.numer() * inv).mod_floor(&modulus);
            out.add_term(*exps, int_to_rat(r));
        }
        Ok(out)
    }

    /// Reduction as a function on `Z/pZ`: exponents `e >= p` are lowered with
    /// `t^p = t`, then coefficients are reduced mod `p`. Two polynomials
    /// agree at every integer point mod `p` iff these reductions are equal.
    pub fn reduce_function_mod(&self, p: u32) -> Result<Polynomial> {
        if !crate::arith::is_prime(u64::from(p)) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        let mut lowered = Polynomial::zero();
        for (exps, c) in &self.terms {
            let mut e = *exps;
            for slot in e.0.iter_mut() {
                if *slot >= p {
                    *slot = (*slot - 1) % (p - 1) + 1;
                }
            }
            lowered.add_term(e, c.clone());
        }
        lowered.reduce_mod(u64::from(p))
    }

    /// Multivariate division by a single divisor. Exact iff the final
    /// remainder is zero.
    pub fn div_rem(&self, den: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let (lead_e, lead_c) = den
            .leading()
            .map(|(e, c)| (*e, c.clone()))
            .ok_or_else(|| Error::Domain("division by the zero polynomial".into()))?;
        let mut work = self.clone();
        let mut quot = Polynomial::zero();
        let mut rem = Polynomial::zero();
        while let Some((e, c)) = work.terms.iter().next_back().map(|(e, c)| (*e, c.clone())) {
            if lead_e.divides(&e) {
                let te = e.div(&lead_e);
                let tc = &c / &lead_c;
                quot.add_term(te, tc.clone());
                let sub = den.mul_term(&te, &tc);
                work = &work - &sub;
            } else {
                work.terms.remove(&e);
                rem.add_term(e, c);
            }
        }
        Ok((quot, rem))
    }
}

/// A binding of variables to integers.
pub type Point = BTreeMap<Var, Integer>;

/// Build a point from `(var, value)` pairs.
pub fn point<I: Into<Integer>>(pairs: impl IntoIterator<Item = (Var, I)>) -> Point {
    pairs.into_iter().map(|(v, n)| (v, n.into())).collect()
}

struct PowerTable {
    powers: [Vec<Integer>; 7],
}

impl PowerTable {
    fn new(poly: &Polynomial, point: &Point) -> Result<Self> {
        let mut powers: [Vec<Integer>; 7] = Default::default();
        for v in VARS {
            let max = poly.terms.keys().map(|e| e.get(v)).max().unwrap_or(0);
            if max == 0 {
                continue;
            }
            let base = point
                .get(&v)
                .ok_or_else(|| Error::Domain(format!("variable {v} is unbound")))?;
            let table = &mut powers[v.index()];
            table.push(Integer::one());
            for _ in 0..max {
                let next = table.last().unwrap() * base;
                table.push(next);
            }
        }
        Ok(PowerTable { powers })
    }

    fn monomial(&self, exps: &Exponents) -> Integer {
        let mut acc = Integer::one();
        for (v, e) in exps.iter() {
            acc *= &self.powers[v.index()][e as usize];
        }
        acc
    }
}

fn mod_inverse(a: &Integer, m: &Integer) -> Option<Integer> {
    let g = a.extended_gcd(m);
    g.gcd.is_one().then(|| g.x.mod_floor(m))
}

/// Exact quotient `num / den`, or [`Error::NotDivisible`] with the remainder.
pub fn exact_divide(num: &Polynomial, den: &Polynomial) -> Result<Polynomial> {
    let (q, r) = num.div_rem(den)?;
    if r.is_zero() {
        Ok(q)
    } else {
        Err(Error::NotDivisible { remainder: r })
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1.mul(e2), c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { (&self).$m(&rhs) }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial { (&self).$m(rhs) }
        }
        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { self.$m(&rhs) }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (exps, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            if exps.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{exps}")?;
            } else {
                write!(f, "{mag}*{exps}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parser { chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 }.parse()
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {}", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Polynomial> {
        if self.chars.is_empty() {
            return Err(self.err("empty input"));
        }
        let mut out = Polynomial::zero();
        let mut sign = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -1
            }
            Some('+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let (c, e) = self.term()?;
            out.add_term(e, if sign < 0 { -c } else { c });
            match self.peek() {
                None => return Ok(out),
                Some('+') => sign = 1,
                Some('-') => sign = -1,
                Some(_) => return Err(self.err("expected `+` or `-`")),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<(Rational, Exponents)> {
        let mut coeff = Rational::one();
        let mut exps = Exponents::one();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let n = self.number()?;
                    let mut value = int_to_rat(n);
                    if self.peek() == Some('/') {
                        self.pos += 1;
                        let d = self.number()?;
                        if d.is_zero() {
                            return Err(self.err("zero denominator"));
                        }
                        value /= int_to_rat(d);
                    }
                    coeff *= value;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let v = Var::from_name(&c.to_string())
                        .ok_or_else(|| self.err(&format!("unknown variable `{c}`")))?;
                    self.pos += 1;
                    let mut e = 1;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        e = self.number()?.to_u32().ok_or_else(|| self.err("exponent too large"))?;
                    }
                    exps = exps.mul(&Exponents::of(v, e));
                }
                _ => return Err(self.err("expected a number or variable")),
            }
            match self.peek() {
                Some('*') | Some('·') => self.pos += 1,
                _ => return Ok((coeff, exps)),
            }
        }
    }

    fn number(&mut self) -> Result<Integer> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<BigInt>().map_err(|e| Error::Parse(e.to_string()))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// The Fermat-gap family.

fn x() -> Polynomial {
    Polynomial::var(Var::X)
}
fn a() -> Polynomial {
    Polynomial::var(Var::A)
}
fn b() -> Polynomial {
    Polynomial::var(Var::B)
}

/// `f_p`, the literal `g_p` sum display, and the closed form of `g_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FgForms {
    pub f: Polynomial,
    pub g_sum: Polynomial,
    pub g_closed: Polynomial,
}

/// `f_n = -sum_{i=1}^{n-1} C(n,i) b^i ((x-a)^(n-i) - (x^(n-i) + (-a)^(n-i)))`,
/// `g_sum = -sum_{i=1}^{n-1} C(n,i) b^(n-i) a^i`,
/// `g_closed = -(b-a)^n + b^n + (-a)^n`.
pub fn build_fg_n(n: u32) -> FgForms {
    let (x, a, b) = (x(), a(), b());
    let x_minus_a = &x - &a;
    let neg_a = -&a;
    let mut f = Polynomial::zero();
    let mut g_sum = Polynomial::zero();
    for i in 1..n {
        let c = Polynomial::integer(binom(n.into(), i.into()));
        let m = n - i;
        let inner = x_minus_a.pow(m) - (x.pow(m) + neg_a.pow(m));
        f = f - &c * b.pow(i) * inner;
        g_sum = g_sum - c * b.pow(m) * a.pow(i);
    }
    let g_closed = -(&b - &a).pow(n) + b.pow(n) + neg_a.pow(n);
    FgForms { f, g_sum, g_closed }
}

pub fn build_fg(p: OddPrime) -> FgForms {
    build_fg_n(p.get())
}

/// `(x-a)^n - (x^n + (x+b-a)^n - (x+b)^n)`, i.e. `(x+y-z)^n - (x^n+y^n-z^n)`
/// under `y = x + b - a`, `z = x + b`.
pub fn fermat_gap(n: u32) -> Result<Polynomial> {
    if n < 2 {
        return Err(Error::Domain(format!("gap exponent {n} < 2")));
    }
    let (x, a, b) = (x(), a(), b());
    let y = &x + &b - &a;
    let z = &x + &b;
    Ok((&x - &a).pow(n) - (x.pow(n) + y.pow(n) - z.pow(n)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMethod {
    /// Exact division of the gap polynomial by `p*a*b`.
    Division,
    /// The closed double-sum formula with `1/i` coefficients.
    Explicit,
}

impl FromStr for KMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "division" => Ok(KMethod::Division),
            "explicit" => Ok(KMethod::Explicit),
            other => Err(Error::Parse(format!("unknown K_p method `{other}`"))),
        }
    }
}

/// `p * a * b`.
pub fn pab(n: u32) -> Polynomial {
    Polynomial::monomial(n, &[(Var::A, 1), (Var::B, 1)])
}

/// The gap quotient for an arbitrary exponent `n >= 2` by exact division.
pub fn k_poly_n(n: u32) -> Result<Polynomial> {
    exact_divide(&fermat_gap(n)?, &pab(n))
}

/// Shared, lazily built `K_n` (division route) for hot evaluation loops.
pub fn k_poly_cached(n: u32) -> Result<Arc<Polynomial>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Polynomial>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(k) = cache.lock().expect("K cache poisoned").get(&n) {
        return Ok(Arc::clone(k));
    }
    let k = Arc::new(k_poly_n(n)?);
    cache.lock().expect("K cache poisoned").insert(n, Arc::clone(&k));
    Ok(k)
}

pub fn k_poly(p: OddPrime, method: KMethod) -> Result<Polynomial> {
    match method {
        KMethod::Division => k_poly_n(p.get()),
        KMethod::Explicit => {
            let k = k_explicit(p.get());
            if !k.is_integral() {
                return Err(Error::Integrity(format!(
                    "explicit K_{p} has a non-integral coefficient: {k}"
                )));
            }
            Ok(k)
        }
    }
}

/// The explicit double sum for `K_p`, returned without the integrality
/// check. Empty inner sums contribute zero.
pub fn k_explicit(p: u32) -> Polynomial {
    let (x, a, b) = (x(), a(), b());
    let pp = u64::from(p);
    let mut k = Polynomial::zero();
    for i in 1..p {
        let weight = Rational::new(binom(pp - 1, u64::from(i) - 1), Integer::from(i));
        let mut inner = Polynomial::zero();
        for j in 1..p.saturating_sub(i) {
            let c = sign_pow(j) * binom(u64::from(p - i), u64::from(j));
            inner = inner + Polynomial::integer(c) * x.pow(p - i - j) * a.pow(j - 1);
        }
        k = k - (b.pow(i - 1) * inner).scale(&weight);
        let second = (b.pow(p - i - 1) * a.pow(i - 1)).scale(&(&weight * int_to_rat(sign_pow(i))));
        k = k - second;
    }
    k
}

/// `K_p` with `x -> a`, coefficients in `[0, p)`, and the residual
/// `h = reduced - a^(p-2) - b^(p-2)` (mod p).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KModP {
    pub reduced: Polynomial,
    pub h: Polynomial,
}

pub fn k_mod_p(p: OddPrime) -> Result<KModP> {
    let k = k_poly(p, KMethod::Division)?;
    let pp = u64::from(p.get());
    let reduced = k.substitute(Var::X, &a()).reduce_mod(pp)?;
    let h = (&reduced - a().pow(p.get() - 2) - b().pow(p.get() - 2)).reduce_mod(pp)?;
    Ok(KModP { reduced, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn p(n: u32) -> OddPrime {
        OddPrime::new(n).unwrap()
    }

    #[test]
    fn canonical_order_and_text() {
        let q = parse("b - a + 2*x");
        assert_eq!(q.to_string(), "2*x - a + b");
        let q = parse("a^2*b + x^3 - 3/2*y*z + 7");
        assert_eq!(q.to_string(), "x^3 + a^2*b - 3/2*y*z + 7");
        assert_eq!(parse("x - x").to_string(), "0");
        assert_eq!(parse("-R^2 + c").to_string(), "-R^2 + c");
        assert_eq!(parse("2·x·a"), parse("2*a*x"));
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<Polynomial>().is_err());
        assert!("x + q".parse::<Polynomial>().is_err());
        assert!("x +".parse::<Polynomial>().is_err());
        assert!("1/0".parse::<Polynomial>().is_err());
        assert!("x y".parse::<Polynomial>().is_err());
        assert!("x)".parse::<Polynomial>().is_err());
    }

    #[test]
    fn substitute_example() {
        let q = parse("y - b").substitute(Var::Y, &parse("x + b - a"));
        assert_eq!(q, parse("x - a"));
    }

    #[test]
    fn evaluate_examples() {
        let q = parse("x - a").pow(3);
        let v = q.evaluate(&point([(Var::X, 2), (Var::A, 1)])).unwrap();
        assert_eq!(v, Rational::one());
        assert!(matches!(q.evaluate(&point([(Var::X, 2)])), Err(Error::Domain(_))));
        let half = parse("1/2*x");
        assert_eq!(
            half.evaluate(&point([(Var::X, 3)])).unwrap(),
            Rational::new(3.into(), 2.into())
        );
        assert!(half.evaluate_int(&point([(Var::X, 3)])).is_err());
    }

    #[test]
    fn content_example() {
        let (c, m) = parse("6*a*b*x + 3*a*b^2 - 3*a^2*b").content();
        assert_eq!(c, int_to_rat(3.into()));
        assert_eq!(m, Exponents::from_pairs(&[(Var::A, 1), (Var::B, 1)]));
        let (c, _) = parse("1/2*x + 1/3*a").content();
        assert_eq!(c, Rational::new(1.into(), 6.into()));
    }

    #[test]
    fn exact_divide_examples() {
        assert_eq!(exact_divide(&parse("x^2 - a^2"), &parse("x - a")).unwrap(), parse("x + a"));
        let num = parse("6*a*b*x + 3*a*b^2 - 3*a^2*b");
        assert_eq!(exact_divide(&num, &parse("3*a*b")).unwrap(), parse("2*x + b - a"));
        match exact_divide(&parse("x"), &parse("a")) {
            Err(Error::NotDivisible { remainder }) => assert_eq!(remainder, parse("x")),
            other => panic!("expected NotDivisible, got {other:?}"),
        }
        assert!(exact_divide(&parse("x"), &Polynomial::zero()).is_err());
    }

    #[test]
    fn fg_examples() {
        let fg = build_fg(p(3));
        assert_eq!(fg.f, parse("6*a*b*x"));
        assert_eq!(fg.g_closed, parse("3*a*b^2 - 3*a^2*b"));
        assert_eq!(fg.g_sum, parse("-3*a*b^2 - 3*a^2*b"));
        let fg = build_fg(p(5));
        let inner = parse("4*x^3 - 6*a*x^2 + 4*a^2*x + 6*b*x^2 + 4*b^2*x - 6*a*b*x");
        assert_eq!(fg.f, pab(5) * inner);
        // p = 2 has f_2 = 0.
        assert!(build_fg_n(2).f.is_zero());
    }

    #[test]
    fn gap_examples() {
        assert_eq!(fermat_gap(2).unwrap(), parse("2*a*b"));
        assert_eq!(fermat_gap(3).unwrap(), parse("6*a*b*x + 3*a*b^2 - 3*a^2*b"));
        let v = fermat_gap(5)
            .unwrap()
            .evaluate_int(&point([(Var::X, 1), (Var::A, 1), (Var::B, 1)]))
            .unwrap();
        assert_eq!(v, 30.into());
        assert!(fermat_gap(1).is_err());
    }

    #[test]
    fn k_examples() {
        let k3 = parse("2*x + b - a");
        assert_eq!(k_poly(p(3), KMethod::Division).unwrap(), k3);
        assert_eq!(k_poly(p(3), KMethod::Explicit).unwrap(), k3);
        let k5 = k_poly(p(5), KMethod::Division).unwrap();
        let at = |x: i64, a: i64, b: i64| {
            k5.evaluate_int(&point([(Var::X, x), (Var::A, a), (Var::B, b)])).unwrap()
        };
        assert_eq!(at(1, 1, 1), 6.into());
        assert_eq!(at(5, 5, 2), 273.into());
    }

    #[test]
    fn k_mod_p_examples() {
        let m3 = k_mod_p(p(3)).unwrap();
        assert_eq!(m3.reduced, parse("a + b"));
        assert!(m3.h.is_zero());
        let m5 = k_mod_p(p(5)).unwrap();
        assert_eq!(m5.reduced, parse("a^3 + 2*a^2*b + 2*a*b^2 + b^3"));
        assert_eq!(m5.h, parse("2*a*b^2 + 2*a^2*b"));
        let v = m5.reduced.evaluate_int(&point([(Var::A, 5), (Var::B, 2)])).unwrap();
        assert_eq!(v.mod_floor(&5.into()), 3.into());
    }

    #[test]
    fn gap_identities_across_primes() {
        for pp in [3, 5, 7, 11, 13] {
            let gap = fermat_gap(pp).unwrap();
            let fg = build_fg(p(pp));
            assert_eq!(gap, &fg.f + &fg.g_closed, "p = {pp}");
            let k = k_poly_n(pp).unwrap();
            assert_eq!(k.homogeneous_degree(), Some(pp - 2));
            let (c, m) = k.content();
            assert!(c.is_one() && m.is_one(), "p = {pp}");
            assert_eq!(k, k_poly(p(pp), KMethod::Explicit).unwrap());
        }
    }

    #[test]
    fn k5_parity_as_function() {
        let k5 = k_poly(p(5), KMethod::Division).unwrap();
        // Coefficient-wise the residue is a^3 + b^3; as a function on Z/2 it is a + b.
        assert_eq!(k5.reduce_mod(2).unwrap(), parse("a^3 + b^3"));
        assert_eq!(k5.reduce_function_mod(2).unwrap(), parse("a + b"));
    }

    #[test]
    fn reduce_mod_rejects_bad_denominator() {
        assert!(parse("1/3*x").reduce_mod(3).is_err());
        assert_eq!(parse("1/2*x").reduce_mod(3).unwrap(), parse("2*x"));
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        let term = (-20i64..20, prop::array::uniform7(0u32..3)).prop_map(|(c, e)| {
            Polynomial::term(int_to_rat(c.into()), Exponents(e))
        });
        prop::collection::vec(term, 0..6)
            .prop_map(|ts| ts.into_iter().fold(Polynomial::zero(), |acc, t| acc + t))
    }

    proptest! {
        #[test]
        fn ring_laws(q1 in small_poly(), q2 in small_poly()) {
            prop_assert_eq!(&(&q1 + &q2) - &q2, q1.clone());
            prop_assert_eq!(&q1 * &q2, &q2 * &q1);
        }

        #[test]
        fn text_round_trip(q in small_poly(), num in -9i64..9, den in 1i64..9) {
            let q = q.scale(&Rational::new(num.into(), den.into()));
            let back: Polynomial = q.to_string().parse().unwrap();
            prop_assert_eq!(back, q);
        }

        #[test]
        fn division_recovers_factor(q1 in small_poly(), q2 in small_poly()) {
            prop_assume!(!q2.is_zero());
            let prod = &q1 * &q2;
            prop_assert_eq!(exact_divide(&prod, &q2).unwrap(), q1);
        }
    }
}
