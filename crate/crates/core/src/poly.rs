//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Every polynomial lives over an [`Alphabet`] split into three blocks: the
//! Feynman parameters `a1..aN`, the invariants `s1..sr` and the squared
//! masses `z1..zN`. Terms are kept in a `BTreeMap` keyed by [`Monomial`],
//! whose ordering is graded-lexicographic with the alphabet order, so
//! iteration (and therefore every matrix built from it) is deterministic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `"p/q"`, or `"p"` when integral.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Which part of the alphabet a degree or homogeneity question refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// The Feynman parameters.
    Alpha,
    /// The invariants and squared masses together.
    Kinematic,
}

/// Ordered variable names, partitioned into alpha, s and z blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
    n_alpha: usize,
    n_s: usize,
    n_z: usize,
}

impl Alphabet {
    /// `a1..aN, s1..sr, z1..zN`.
    pub fn feynman(n_lines: usize, n_invariants: usize) -> Arc<Self> {
        Self::with_blocks(n_lines, n_invariants, n_lines)
    }

    /// An alphabet of Feynman parameters only.
    pub fn alpha_only(n: usize) -> Arc<Self> {
        Self::with_blocks(n, 0, 0)
    }

    pub fn with_blocks(n_alpha: usize, n_s: usize, n_z: usize) -> Arc<Self> {
        let names = (1..=n_alpha)
            .map(|i| format!("a{i}"))
            .chain((1..=n_s).map(|i| format!("s{i}")))
            .chain((1..=n_z).map(|i| format!("z{i}")))
            .collect();
        Arc::new(Alphabet {
            names,
            n_alpha,
            n_s,
            n_z,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    /// Variable index of `a{i+1}`.
    pub fn alpha(&self, i: usize) -> usize {
        debug_assert!(i < self.n_alpha);
        i
    }

    /// Variable index of `s{i+1}`.
    pub fn s(&self, i: usize) -> usize {
        debug_assert!(i < self.n_s);
        self.n_alpha + i
    }

    /// Variable index of `z{i+1}`.
    pub fn z(&self, i: usize) -> usize {
        debug_assert!(i < self.n_z);
        self.n_alpha + self.n_s + i
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn block_of(&self, var: usize) -> Block {
        if var < self.n_alpha {
            Block::Alpha
        } else {
            Block::Kinematic
        }
    }

    pub fn block_range(&self, block: Block) -> std::ops::Range<usize> {
        match block {
            Block::Alpha => 0..self.n_alpha,
            Block::Kinematic => self.n_alpha..self.len(),
        }
    }
}

/// An exponent vector. Ordered graded-lexicographically: total degree first,
/// then the larger exponent in the earliest variable wins.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u16>,
    // cached total degree, compared first
    deg: u32,
}

impl Monomial {
    fn new(exps: Vec<u16>) -> Self {
        let deg = exps.iter().map(|&e| e as u32).sum();
        Monomial { exps, deg }
    }

    pub fn one(nvars: usize) -> Self {
        Monomial::new(vec![0; nvars])
    }

    pub fn from_exponents(exps: Vec<u16>) -> Self {
        Monomial::new(exps)
    }

    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Monomial::new(e)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.exps[range].iter().map(|&e| e as u32).sum()
    }

    pub fn checked_mul(&self, other: &Monomial) -> Result<Monomial> {
        let mut out = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            out.push(a.checked_add(*b).ok_or(Error::ExponentOverflow)?);
        }
        Ok(Monomial::new(out))
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        self.exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial::new)
    }

    /// Restriction to a block; the other positions are zeroed.
    pub fn project(&self, range: std::ops::Range<usize>) -> Monomial {
        let mut e = vec![0; self.exps.len()];
        e[range.clone()].copy_from_slice(&self.exps[range]);
        Monomial::new(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.deg
            .cmp(&other.deg)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of total degree `d` in `nvars` variables, in
/// descending graded-lex order (`a1^2, a1*a2, a2^2` for two variables).
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Vec<u16>> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u16;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e as u16;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if nvars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, d, &mut vec![0; nvars], &mut out);
    out
}

/// All exponent vectors of total degree at most `d`, lowest degree first.
pub fn monomials_up_to_degree(nvars: usize, d: u32) -> Vec<Vec<u16>> {
    (0..=d)
        .flat_map(|k| monomials_of_degree(nvars, k))
        .collect()
}

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    alphabet: Arc<Alphabet>,
    terms: BTreeMap<Monomial, Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Poly {
    pub fn zero(alphabet: &Arc<Alphabet>) -> Self {
        Poly {
            alphabet: alphabet.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(alphabet: &Arc<Alphabet>, c: Rational) -> Self {
        let mut p = Poly::zero(alphabet);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(alphabet.len()), c);
        }
        p
    }

    pub fn one(alphabet: &Arc<Alphabet>) -> Self {
        Poly::constant(alphabet, Rational::one())
    }

    pub fn var(alphabet: &Arc<Alphabet>, var: usize) -> Self {
        Poly::term(
            alphabet,
            Monomial::var(alphabet.len(), var),
            Rational::one(),
        )
    }

    pub fn term(alphabet: &Arc<Alphabet>, mono: Monomial, c: Rational) -> Self {
        assert_eq!(mono.exps.len(), alphabet.len(), "exponent vector length");
        let mut p = Poly::zero(alphabet);
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms<I>(alphabet: &Arc<Alphabet>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Poly::zero(alphabet);
        for (m, c) in terms {
            assert_eq!(m.exps.len(), alphabet.len(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
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

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn same_alphabet(&self, other: &Poly) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        if !self.same_alphabet(other) {
            return Err(Error::AlphabetMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        if !self.same_alphabet(other) {
            return Err(Error::AlphabetMismatch);
        }
        // clear denominators, multiply integers, divide once at the end
        let (a, da) = self.integer_form();
        let (b, db) = other.integer_form();
        let den = Rational::from_integer(da * db);
        let finish = |terms: BTreeMap<Monomial, Rational>| Poly {
            alphabet: self.alphabet.clone(),
            terms,
        };
        if let (Some(a64), Some(b64)) = (small_coeffs(&a), small_coeffs(&b)) {
            if let Some(acc) = mul_small(&a64, &b64)? {
                return Ok(finish(
                    acc.into_iter()
                        .filter(|(_, c)| *c != 0)
                        .map(|(m, c)| (m, Rational::from_integer(c.into()) / &den))
                        .collect(),
                ));
            }
        }
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(a.len() * b.len());
        for (m1, c1) in &a {
            for (m2, c2) in &b {
                *acc.entry(m1.checked_mul(m2)?).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        Ok(finish(
            acc.into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m, Rational::from_integer(c) / &den))
                .collect(),
        ))
    }

    /// Terms scaled to integers by the lcm of the denominators.
    fn integer_form(&self) -> (Vec<(&Monomial, BigInt)>, BigInt) {
        let den = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m, c.numer() * (&den / c.denom())))
            .collect();
        (terms, den)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.alphabet);
        }
        Poly {
            alphabet: self.alphabet.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by a single monomial.
    pub fn mul_monomial(&self, mono: &Monomial) -> Poly {
        Poly {
            alphabet: self.alphabet.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.checked_mul(mono).expect("exponent overflow"), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one(&self.alphabet);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn partial_derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(&self.alphabet);
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.exps[var] -= 1;
            nm.deg -= 1;
            out.add_term(nm, c * rat(e as i64));
        }
        out
    }

    pub fn partial_derivative_by_name(&self, name: &str) -> Result<Poly> {
        Ok(self.partial_derivative(self.alphabet.index_of(name)?))
    }

    pub fn degree_in(&self, block: Block) -> Option<u32> {
        let range = self.alphabet.block_range(block);
        self.terms.keys().map(|m| m.degree_in(range.clone())).max()
    }

    /// The common degree in `block` if every term shares it. The zero
    /// polynomial reports `None`.
    pub fn is_homogeneous(&self, block: Block) -> Option<u32> {
        let range = self.alphabet.block_range(block);
        let mut degs = self.terms.keys().map(|m| m.degree_in(range.clone()));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn divisible_by_var(&self, var: usize) -> bool {
        self.terms.keys().all(|m| m.exps[var] > 0)
    }

    pub fn divide_by_var(&self, var: usize) -> Result<Poly> {
        if !self.divisible_by_var(var) {
            return Err(Error::NotDivisible(self.alphabet.name(var).to_string()));
        }
        Ok(Poly {
            alphabet: self.alphabet.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut nm = m.clone();
                    nm.exps[var] -= 1;
                    nm.deg -= 1;
                    (nm, c.clone())
                })
                .collect(),
        })
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder. Leading-term division by a single divisor terminates with a
    /// zero remainder exactly when the divisor divides `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        assert!(self.same_alphabet(divisor), "alphabet mismatch");
        let (lm, lc) = divisor.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.alphabet);
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.checked_div(&lm)?;
            let qc = c / &lc;
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.checked_mul(&qm).ok()?, -(dc * &qc));
            }
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Replaces each assigned variable by a polynomial. Variables occurring in
    /// `self` without an assignment are an error.
    pub fn substitute(&self, assignment: &BTreeMap<usize, Poly>) -> Result<Poly> {
        let target = match assignment.values().next() {
            Some(p) => p.alphabet.clone(),
            None => self.alphabet.clone(),
        };
        let mut out = Poly::zero(&target);
        let mut powers: HashMap<(usize, u16), Poly> = HashMap::new();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(&target, c.clone());
            for (var, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let image = assignment
                    .get(&var)
                    .ok_or_else(|| Error::MissingAssignment(self.alphabet.name(var).into()))?;
                let pw = powers
                    .entry((var, e))
                    .or_insert_with(|| image.pow(e as u32));
                t = t.try_mul(pw)?;
            }
            out = out.try_add(&t)?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &BTreeMap<usize, Rational>) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (var, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = point
                    .get(&var)
                    .ok_or_else(|| Error::MissingAssignment(self.alphabet.name(var).into()))?;
                t *= num_traits::pow(v.clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation at a full point (one value per variable).
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (var, &e) in m.exps.iter().enumerate() {
                    if e != 0 {
                        t *= point[var].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Groups terms by their kinematic (s,z) monomial; each value is the
    /// alpha-polynomial coefficient of that monomial.
    pub fn split_kinematic(&self) -> BTreeMap<Monomial, Poly> {
        let kin = self.alphabet.block_range(Block::Kinematic);
        let alpha = self.alphabet.block_range(Block::Alpha);
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.project(kin.clone()))
                .or_insert_with(|| Poly::zero(&self.alphabet))
                .add_term(m.project(alpha.clone()), c.clone());
        }
        out
    }

    /// The part of `self` whose kinematic degree equals `d`.
    pub fn kinematic_component(&self, d: u32) -> Poly {
        let kin = self.alphabet.block_range(Block::Kinematic);
        Poly {
            alphabet: self.alphabet.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree_in(kin.clone()) == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-expresses `self` over another alphabet with the same variable order
    /// prefix structure, mapping variable `i` to `map[i]`.
    pub fn relabel(&self, target: &Arc<Alphabet>, map: &[usize]) -> Poly {
        Poly::from_terms(
            target,
            self.terms.iter().map(|(m, c)| {
                let mut e = vec![0u16; target.len()];
                for (i, &x) in m.exps.iter().enumerate() {
                    if x != 0 {
                        e[map[i]] += x;
                    }
                }
                (Monomial::new(e), c.clone())
            }),
        )
    }

    /// Splits into `(content, primitive part)`: the primitive part has
    /// coprime integer coefficients and a positive leading coefficient.
    pub fn primitive(&self) -> (Rational, Poly) {
        if self.is_zero() {
            return (Rational::zero(), self.clone());
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut gcd = BigInt::zero();
        for c in self.terms.values() {
            gcd = gcd.gcd(&(c.numer() * (&lcm / c.denom())));
        }
        let (_, lc) = self.leading_term().unwrap();
        if lc.is_negative() {
            gcd = -gcd;
        }
        let content = Rational::new(gcd, lcm);
        let inv = content.recip();
        (content, self.scale(&inv))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("alphabet mismatch")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_add(&-rhs).expect("alphabet mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

fn small_coeffs<'a>(terms: &[(&'a Monomial, BigInt)]) -> Option<Vec<(&'a Monomial, i64)>> {
    terms
        .iter()
        .map(|(m, c)| c.to_i64().map(|c| (*m, c)))
        .collect()
}

/// Integer product in `i128`; `None` when an accumulator would overflow.
fn mul_small(
    a: &[(&Monomial, i64)],
    b: &[(&Monomial, i64)],
) -> Result<Option<HashMap<Monomial, i128>>> {
    let mut acc: HashMap<Monomial, i128> = HashMap::with_capacity(a.len() * b.len());
    for (m1, c1) in a {
        for (m2, c2) in b {
            let slot = acc.entry(m1.checked_mul(m2)?).or_insert(0);
            match slot.checked_add(*c1 as i128 * *c2 as i128) {
                Some(v) => *slot = v,
                None => return Ok(None),
            }
        }
    }
    Ok(Some(acc))
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert!(
            self.same_alphabet(rhs),
            "polynomial addition: alphabet mismatch"
        );
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert!(
            self.same_alphabet(rhs),
            "polynomial subtraction: alphabet mismatch"
        );
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            alphabet: self.alphabet.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = m
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        self.alphabet.name(v).to_string()
                    } else {
                        format!("{}^{}", self.alphabet.name(v), e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&abs), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> Arc<Alphabet> {
        Alphabet::feynman(2, 1)
    }

    #[test]
    fn difference_of_squares() {
        let al = ab();
        let a1 = Poly::var(&al, 0);
        let a2 = Poly::var(&al, 1);
        let p = &(&a1 + &a2) * &(&a1 - &a2);
        assert_eq!(p, &a1.pow(2) - &a2.pow(2));
        assert_eq!(p.to_string(), "a1^2 - a2^2");
    }

    #[test]
    fn zero_is_additive_identity() {
        let al = ab();
        let p = &Poly::var(&al, 0) + &Poly::var(&al, 3);
        assert_eq!(&p + &Poly::zero(&al), p);
    }

    #[test]
    fn rational_scaling() {
        let al = ab();
        let p = Poly::var(&al, 0).scale(&ratio(1, 2));
        let q = Poly::var(&al, 1).scale(&ratio(2, 3));
        assert_eq!((&p * &q).to_string(), "1/3*a1*a2");
    }

    #[test]
    fn derivatives() {
        let al = ab();
        let a1 = Poly::var(&al, 0);
        let a2 = Poly::var(&al, 1);
        let p = &a1.pow(2) * &a2;
        assert_eq!(p.partial_derivative(0), (&a1 * &a2).scale(&rat(2)));
        let s1a2 = &Poly::var(&al, al.s(0)) * &a2;
        assert!(s1a2.partial_derivative(0).is_zero());
        assert!(matches!(
            p.partial_derivative_by_name("x9"),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn homogeneity() {
        let al = ab();
        let a1 = Poly::var(&al, 0);
        let a2 = Poly::var(&al, 1);
        assert_eq!((&a1 + &a2).is_homogeneous(Block::Alpha), Some(1));
        assert_eq!((&a1 + &(&a1 * &a2)).is_homogeneous(Block::Alpha), None);
    }

    #[test]
    fn divisibility() {
        let al = Alphabet::alpha_only(4);
        let p = &Poly::var(&al, 1) * &Poly::var(&al, 3);
        assert!(p.divisible_by_var(1));
        assert_eq!(p.divide_by_var(1).unwrap(), Poly::var(&al, 3));
        let q = &Poly::var(&al, 0) + &Poly::var(&al, 1);
        assert!(!q.divisible_by_var(0));
        assert!(q.divide_by_var(0).is_err());
    }

    #[test]
    fn substitution_and_evaluation() {
        let al = Alphabet::alpha_only(1);
        let a1 = Poly::var(&al, 0);
        let mut asg = BTreeMap::new();
        asg.insert(0, &a1 + &Poly::one(&al));
        let out = a1.pow(2).substitute(&asg).unwrap();
        assert_eq!(out.to_string(), "a1^2 + 2*a1 + 1");
        let missing = a1.substitute(&BTreeMap::from([(5usize, Poly::one(&al))]));
        assert!(matches!(missing, Err(Error::MissingAssignment(_))));

        let al = ab();
        let u = &Poly::var(&al, 0) + &Poly::var(&al, 1);
        let pt = BTreeMap::from([(0, rat(1)), (1, rat(1))]);
        assert_eq!(u.evaluate(&pt).unwrap(), rat(2));
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials_of_degree(2, 1), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(
            monomials_of_degree(2, 2),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(monomials_of_degree(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(monomials_of_degree(4, 3).len(), 20);
    }

    #[test]
    fn exact_division() {
        let al = Alphabet::alpha_only(3);
        let u = &(&Poly::var(&al, 0) + &Poly::var(&al, 1)) + &Poly::var(&al, 2);
        let g = &(&Poly::var(&al, 0) * &Poly::var(&al, 2)) - &Poly::one(&al);
        let p = &u * &g;
        assert_eq!(p.div_exact(&u).unwrap(), g);
        assert!((&p + &Poly::var(&al, 1)).div_exact(&u).is_none());
    }

    #[test]
    fn primitive_part() {
        let al = Alphabet::alpha_only(2);
        let p = &Poly::var(&al, 0).scale(&ratio(-2, 3)) + &Poly::var(&al, 1).scale(&ratio(4, 9));
        let (c, pp) = p.primitive();
        assert_eq!(pp.to_string(), "3*a1 - 2*a2");
        assert_eq!(pp.scale(&c), p);
    }

    #[test]
    fn rational_text() {
        assert_eq!(parse_rational("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(format_rational(&ratio(4, 2)), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn arb_poly(al: Arc<Alphabet>) -> impl Strategy<Value = Poly> {
        let n = al.len();
        prop::collection::vec((prop::collection::vec(0u16..3, n), -5i64..6, 1i64..4), 0..5)
            .prop_map(move |ts| {
                Poly::from_terms(
                    &al,
                    ts.into_iter()
                        .map(|(e, a, b)| (Monomial::from_exponents(e), ratio(a, b))),
                )
            })
    }

    proptest! {
        #[test]
        fn ring_axioms(
            p in arb_poly(Alphabet::alpha_only(3)),
            q in arb_poly(Alphabet::alpha_only(3)),
            r in arb_poly(Alphabet::alpha_only(3)),
        ) {
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&p + &q, &q + &p);
        }

        #[test]
        fn leibniz_and_linearity(
            p in arb_poly(Alphabet::alpha_only(3)),
            q in arb_poly(Alphabet::alpha_only(3)),
            v in 0usize..3,
        ) {
            let lhs = (&p * &q).partial_derivative(v);
            let rhs = &(&p.partial_derivative(v) * &q) + &(&p * &q.partial_derivative(v));
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(
                (&p + &q).partial_derivative(v),
                &p.partial_derivative(v) + &q.partial_derivative(v)
            );
        }

        #[test]
        fn divide_by_var_inverts_multiplication(p in arb_poly(Alphabet::alpha_only(3)), v in 0usize..3) {
            let al = p.alphabet().clone();
            if p.divisible_by_var(v) {
                let quot = p.divide_by_var(v).unwrap();
                prop_assert_eq!(&Poly::var(&al, v) * &quot, p.clone());
            }
            let shifted = &Poly::var(&al, v) * &p;
            prop_assert!(shifted.divisible_by_var(v));
            prop_assert_eq!(shifted.divide_by_var(v).unwrap(), p);
        }
    }
}
