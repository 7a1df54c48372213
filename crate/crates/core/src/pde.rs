//! Differential operators in the invariants `s` and squared masses `z`, and
//! the construction of operator pairs that annihilate the parametric integral
//! `F = int U^a / Q^k omega` with `a = N - (D/2)(h+1)` and `k = N - (D/2)h`.
//!
//! Operators are normal ordered: coefficients stand to the left of all
//! derivatives, which act on `F` only. Under this convention a homogeneous
//! operator of order `p` can be pulled under the integral sign:
//!
//! ```text
//! P(d/ds, d/dz) F = (-1)^p c_p int P(W~, -alpha U) U^a / Q^(k+p) omega,
//! c_p = (k+p-1)! / (k-1)!
//! ```
//!
//! where `W~_i = dQ/ds_i`. A pair `(P, T)` with `T` of order `p-1`
//! annihilates `F` when the substituted numerators `R` of `P` and `R~` of `T`
//! admit `lambda_nu`, divisible by `alpha_nu`, with `R = sum lambda_nu
//! Q_{alpha_nu}` and `sum d lambda_nu / d alpha_nu = R~`; the prefactors
//! cancel because `c_p / (k+p-1) = c_{p-1}`.
//!
//! Closed-form families:
//!
//! * Line `i`: `Q_{alpha_i}(d/dz) d/dz_i - U(d/dz) - (a+q) d/dz_i U_{alpha_i}(d/dz)`,
//!   with witness `lambda_i = (-1)^q alpha_i U^(a+q)`. Here `U_{alpha_i}(d/dz)`
//!   substitutes the whole vector `d/dz`. The pure-`z` substitution already
//!   carries the sign `(-1)^q` inside `R`; no extra sign appears in the pair.
//! * Invariant `i` and line `j` with `alpha_j | W~_i`:
//!   `Q_{alpha_j}(d/dz) d/ds_i - (a+q-1) U_{alpha_j}(d/dz) d/ds_i + W~_{i,alpha_j}(d/dz)`,
//!   with witness `lambda_j = (-1)^(q-1) W~_i U^(a+q-1)`. The tail signs are
//!   the ones forced by the witness; the opposite signs fail certification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Diagram;
use crate::linalg::{nullspace_with, rref_with, RationalMatrix};
use crate::poly::{monomials_of_degree, rat, Alphabet, Block, Monomial, Poly, Rational};
use crate::reduction::{assemble, combine, divergence, kinematic_monomials, GriffithsCertificate};
use crate::symanzik::{check_property_p, InvariantBasis, Symanzik};

/// Exponent data of the parametric integral for one diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regime {
    pub lines: u32,
    pub loops: u32,
    pub dimension: u32,
    /// Exponent of `U` in the integrand.
    pub u_exponent: u32,
    /// Exponent of `Q` in the integrand.
    pub pole_order: u32,
    /// Alpha-degree of `Q`, equal to `loops + 1`.
    pub q_degree: u32,
}

impl Regime {
    pub fn of(d: &Diagram) -> Result<Self> {
        let n = d.n_lines() as i64;
        let h = d.loop_number() as i64;
        let half_d = d.dimension() as i64 / 2;
        if h < 1 {
            return Err(Error::Regime(format!(
                "diagram has {h} loops; at least one is required"
            )));
        }
        if n < 2 {
            return Err(Error::Regime(format!(
                "diagram has {n} lines; at least two are required"
            )));
        }
        let a = n - half_d * (h + 1);
        let k = n - half_d * h;
        if k < 1 {
            return Err(Error::Regime(format!(
                "pole order N - (D/2)h = {k} is not positive"
            )));
        }
        if a < 0 {
            return Err(Error::Regime(format!(
                "U exponent N - (D/2)(h+1) = {a} is negative"
            )));
        }
        Ok(Regime {
            lines: n as u32,
            loops: h as u32,
            dimension: d.dimension(),
            u_exponent: a as u32,
            pole_order: k as u32,
            q_degree: h as u32 + 1,
        })
    }

    /// `c_p = (k+p-1)! / (k-1)!`.
    pub fn prefactor(&self, p: u32) -> Rational {
        (0..p).fold(Rational::one(), |acc, t| {
            acc * rat((self.pole_order + t) as i64)
        })
    }
}

/// A normal-ordered operator `sum coeff(s,z) d_s^I d_z^J`.
///
/// Derivative multi-indices are stored as monomials over the full alphabet
/// with zero alpha exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOperator {
    alphabet: Arc<Alphabet>,
    terms: BTreeMap<Monomial, Poly>,
}

impl DiffOperator {
    pub fn zero(alphabet: &Arc<Alphabet>) -> Self {
        DiffOperator {
            alphabet: alphabet.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Single derivative `d/d var`.
    pub fn derivative(alphabet: &Arc<Alphabet>, var: usize) -> Self {
        let mut op = Self::zero(alphabet);
        op.add_term(Monomial::var(alphabet.len(), var), Poly::one(alphabet));
        op
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Adds `coeff * d^derivs`. Coefficients must be free of alpha and
    /// derivatives may only involve kinematic variables.
    pub fn add_term(&mut self, derivs: Monomial, coeff: Poly) {
        debug_assert_eq!(derivs.degree_in(self.alphabet.block_range(Block::Alpha)), 0);
        debug_assert!(coeff.degree_in(Block::Alpha).unwrap_or(0) == 0);
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(derivs.clone())
            .or_insert_with(|| Poly::zero(&self.alphabet));
        *entry = &*entry + &coeff;
        if entry.is_zero() {
            self.terms.remove(&derivs);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Poly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total derivative order; `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// The common order of all terms, if there is one.
    pub fn homogeneous_order(&self) -> Option<u32> {
        let mut orders = self.terms.keys().map(Monomial::degree);
        let first = orders.next()?;
        orders.all(|o| o == first).then_some(first)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(&self.alphabet);
        for (m, p) in &self.terms {
            out.add_term(m.clone(), p.scale(c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, p) in &other.terms {
            out.add_term(m.clone(), p.clone());
        }
        out
    }

    /// Composes with `d^derivs` on the right; derivatives commute and act on
    /// `F` only, so this just raises every multi-index.
    pub fn then(&self, derivs: &Monomial) -> Self {
        let mut out = Self::zero(&self.alphabet);
        for (m, p) in &self.terms {
            out.add_term(m.checked_mul(derivs).expect("exponent overflow"), p.clone());
        }
        out
    }

    /// Replaces every `alpha_k` in `p` by `d/dz_k`, keeping the `(s,z)`
    /// coefficients to the left.
    pub fn from_alpha_poly(p: &Poly) -> Self {
        let al = p.alphabet().clone();
        let n = al.n_alpha();
        let mut op = Self::zero(&al);
        for (m, c) in p.terms() {
            let e = m.exponents();
            let mut d = vec![0u16; al.len()];
            for k in 0..n {
                d[al.z(k)] = e[k];
            }
            let mut coeff = e.to_vec();
            coeff[..n].iter_mut().for_each(|x| *x = 0);
            op.add_term(
                Monomial::from_exponents(d),
                Poly::term(&al, Monomial::from_exponents(coeff), c.clone()),
            );
        }
        op
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if c.len() > 1 {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
            for (v, &e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*d[{}]", self.alphabet.name(v))?,
                    e => write!(f, "*d[{}]^{e}", self.alphabet.name(v))?,
                }
            }
        }
        Ok(())
    }
}

/// A principal operator of order `p` with a tail of order `p-1`, claimed to
/// satisfy `(principal + tail) F = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorPair {
    pub label: String,
    pub order: u32,
    pub principal: DiffOperator,
    pub tail: DiffOperator,
    /// `c_p` and `c_{p-1}` of the pull-through identity.
    pub prefactors: (Rational, Rational),
    pub certificate: Option<GriffithsCertificate>,
}

/// Numerator produced by pulling an operator under the integral sign.
#[derive(Clone, Debug)]
pub struct Substituted {
    pub numerator: Poly,
    pub order: u32,
    /// `(-1)^p c_p`.
    pub prefactor: Rational,
    pub pole_order: u32,
}

/// Caches the substitutions `s_i -> W~_i`, `z_j -> -alpha_j U`.
struct Substitution<'a> {
    sy: &'a Symanzik,
    images: Vec<Poly>,
    u_power: Poly,
}

impl<'a> Substitution<'a> {
    fn new(sy: &'a Symanzik, regime: &Regime) -> Self {
        let al = &sy.alphabet;
        let mut images = vec![Poly::zero(al); al.len()];
        for (i, w) in sy.w_tilde.iter().enumerate() {
            images[al.s(i)] = w.clone();
        }
        for j in 0..al.n_alpha() {
            images[al.z(j)] = -&(&Poly::var(al, j) * &sy.u);
        }
        Substitution {
            sy,
            images,
            u_power: sy.u.pow(regime.u_exponent),
        }
    }

    /// `U^a * prod images^derivs`.
    fn derivative_image(&self, derivs: &Monomial) -> Poly {
        let mut out = self.u_power.clone();
        for (v, &e) in derivs.exponents().iter().enumerate() {
            if e > 0 {
                out = &out * &self.images[v].pow(e as u32);
            }
        }
        out
    }

    fn apply(&self, op: &DiffOperator) -> Poly {
        op.terms()
            .fold(Poly::zero(&self.sy.alphabet), |acc, (m, c)| {
                &acc + &(c * &self.derivative_image(m))
            })
    }
}

/// Pulls a homogeneous operator under the integral sign.
pub fn substitute_operator(
    op: &DiffOperator,
    sy: &Symanzik,
    regime: &Regime,
) -> Result<Substituted> {
    let order = if op.is_zero() {
        0
    } else {
        op.homogeneous_order().ok_or_else(|| {
            Error::MalformedOperator(format!("operator mixes derivative orders: {op}"))
        })?
    };
    let numerator = Substitution::new(sy, regime).apply(op);
    let sign = if order % 2 == 0 { rat(1) } else { rat(-1) };
    Ok(Substituted {
        numerator,
        order,
        prefactor: sign * regime.prefactor(order),
        pole_order: regime.pole_order + order,
    })
}

/// Numerators `(R, R~)` of a pair: the certification targets.
pub fn pair_numerators(
    pair: &OperatorPair,
    sy: &Symanzik,
    regime: &Regime,
) -> Result<(Poly, Poly)> {
    let p = pair.order;
    if p == 0 {
        return Err(Error::MalformedOperator(format!(
            "{}: order must be positive",
            pair.label
        )));
    }
    if pair.principal.homogeneous_order() != Some(p) {
        return Err(Error::MalformedOperator(format!(
            "{}: principal part is not homogeneous of order {p}",
            pair.label
        )));
    }
    if !pair.tail.is_zero() && pair.tail.homogeneous_order() != Some(p - 1) {
        return Err(Error::MalformedOperator(format!(
            "{}: tail is not homogeneous of order {}",
            pair.label,
            p - 1
        )));
    }
    let r = substitute_operator(&pair.principal, sy, regime)?.numerator;
    let rt = substitute_operator(&pair.tail, sy, regime)?.numerator;
    Ok((r, rt))
}

fn make_pair(
    label: String,
    principal: DiffOperator,
    tail: DiffOperator,
    regime: &Regime,
    sy: &Symanzik,
    lambdas: Vec<Poly>,
) -> Result<OperatorPair> {
    let order = principal.homogeneous_order().unwrap_or(0);
    let mut pair = OperatorPair {
        label,
        order,
        principal,
        tail,
        prefactors: (
            regime.prefactor(order),
            regime.prefactor(order.saturating_sub(1)),
        ),
        certificate: None,
    };
    let (r, rt) = pair_numerators(&pair, sy, regime)?;
    let cert = GriffithsCertificate {
        target: r,
        lambdas,
        reduced: rt,
    };
    let bad = cert.violations(&sy.q_derivatives(), true);
    if !bad.is_empty() {
        return Err(Error::Certification(format!(
            "{}: {}",
            pair.label,
            bad.join("; ")
        )));
    }
    pair.certificate = Some(cert);
    Ok(pair)
}

fn signed(e: u32) -> Rational {
    if e.is_multiple_of(2) {
        rat(1)
    } else {
        rat(-1)
    }
}

/// One pair per line, from the closed-form family built on `Q_{alpha_i}`.
pub fn theorem1_system(d: &Diagram, basis: &InvariantBasis) -> Result<Vec<OperatorPair>> {
    let regime = Regime::of(d)?;
    let sy = Symanzik::new(d, basis)?;
    let al = sy.alphabet.clone();
    let (a, q) = (regime.u_exponent, regime.q_degree);
    let u_op = DiffOperator::from_alpha_poly(&sy.u);
    let dq = sy.q_derivatives();
    let mut out = Vec::with_capacity(al.n_alpha());
    for i in 0..al.n_alpha() {
        let dz_i = Monomial::var(al.len(), al.z(i));
        let principal = DiffOperator::from_alpha_poly(&dq[i]).then(&dz_i);
        let u_i = DiffOperator::from_alpha_poly(&sy.u.partial_derivative(i)).then(&dz_i);
        let tail = u_op
            .scale(&rat(-1))
            .add(&u_i.scale(&rat(-((a + q) as i64))));
        let mut lambdas = vec![Poly::zero(&al); al.n_alpha()];
        lambdas[i] = (&Poly::var(&al, i) * &sy.u.pow(a + q)).scale(&signed(q));
        out.push(make_pair(
            format!("line {}", i + 1),
            principal,
            tail,
            &regime,
            &sy,
            lambdas,
        )?);
    }
    Ok(out)
}

/// All `(i, j)`, 0-based, with `W~_i` nonzero and divisible by `alpha_j`.
pub fn eligible_pairs(d: &Diagram, basis: &InvariantBasis) -> Result<Vec<(usize, usize)>> {
    require_property_p(d, basis)?;
    let sy = Symanzik::new(d, basis)?;
    Ok(eligible_from(&sy))
}

fn eligible_from(sy: &Symanzik) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, w) in sy.w_tilde.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for j in 0..sy.alphabet.n_alpha() {
            if w.divisible_by_var(j) {
                out.push((i, j));
            }
        }
    }
    out
}

fn require_property_p(d: &Diagram, basis: &InvariantBasis) -> Result<()> {
    let (ok, offending) = check_property_p(d, basis)?;
    if ok {
        Ok(())
    } else {
        let names: Vec<String> = offending.iter().map(|c| d.format_vertex_set(*c)).collect();
        Err(Error::PropertyP(names.join(", ")))
    }
}

/// One pair per eligible `(i, j)`, from the closed-form family built on
/// `Q_{alpha_j} d/ds_i`.
pub fn theorem2_system(d: &Diagram, basis: &InvariantBasis) -> Result<Vec<OperatorPair>> {
    require_property_p(d, basis)?;
    let regime = Regime::of(d)?;
    let sy = Symanzik::new(d, basis)?;
    let al = sy.alphabet.clone();
    let (a, q) = (regime.u_exponent, regime.q_degree);
    let dq = sy.q_derivatives();
    let mut out = Vec::new();
    for (i, j) in eligible_from(&sy) {
        let ds_i = Monomial::var(al.len(), al.s(i));
        let principal = DiffOperator::from_alpha_poly(&dq[j]).then(&ds_i);
        let u_j = DiffOperator::from_alpha_poly(&sy.u.partial_derivative(j)).then(&ds_i);
        let w_ij = DiffOperator::from_alpha_poly(&sy.w_tilde[i].partial_derivative(j));
        let tail = u_j.scale(&rat(-((a + q - 1) as i64))).add(&w_ij);
        let mut lambdas = vec![Poly::zero(&al); al.n_alpha()];
        lambdas[j] = (&sy.w_tilde[i] * &sy.u.pow(a + q - 1)).scale(&signed(q - 1));
        out.push(make_pair(
            format!("invariant {} line {}", i + 1, j + 1),
            principal,
            tail,
            &regime,
            &sy,
            lambdas,
        )?);
    }
    Ok(out)
}

/// Kinematic degrees admitted for each block of unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzDegrees {
    pub principal: Vec<u32>,
    pub tail: Vec<u32>,
    pub lambda: Vec<u32>,
}

impl AnsatzDegrees {
    /// Principal coefficients of degree at most `dg`, tail and witness
    /// coefficients of degree at most `max(dg-1, 0)`.
    pub fn up_to(dg: u32) -> Self {
        let low: Vec<u32> = (0..=dg.saturating_sub(1)).collect();
        AnsatzDegrees {
            principal: (0..=dg).collect(),
            tail: low.clone(),
            lambda: low,
        }
    }

    /// The kinematically homogeneous stratum whose principal coefficients
    /// have degree exactly `e`.
    pub fn stratum(e: u32) -> Self {
        let low = if e == 0 { vec![] } else { vec![e - 1] };
        AnsatzDegrees {
            principal: vec![e],
            tail: low.clone(),
            lambda: low,
        }
    }
}

/// Output of the general derivation.
#[derive(Clone, Debug)]
pub struct DerivedSystem {
    /// Dimension of the full kernel, witness directions included.
    pub kernel_dimension: usize,
    /// Canonical pairs with a nonzero principal part.
    pub pairs: Vec<OperatorPair>,
    /// Kernel directions with zero principal part but a nonzero tail.
    pub tail_only: Vec<OperatorPair>,
    pub unknowns: usize,
    pub equations: usize,
}

#[derive(Clone, Debug)]
enum Unknown {
    Principal { derivs: Monomial, coeff: Monomial },
    Tail { derivs: Monomial, coeff: Monomial },
    Lambda { nu: usize, mono: Monomial },
}

/// Ansatz derivation of order-`p` operator pairs with coefficient degree at
/// most `dg`; see [`derive_system`].
pub fn derive_general(
    d: &Diagram,
    basis: &InvariantBasis,
    p: u32,
    dg: u32,
    exec: Exec,
) -> Result<Vec<OperatorPair>> {
    Ok(derive_system(d, basis, p, &AnsatzDegrees::up_to(dg), exec)?.pairs)
}

/// Solves for every `(principal, tail, lambda)` such that the principal
/// numerator equals `sum lambda_nu Q_nu` and the tail numerator equals
/// `sum d lambda_nu / d alpha_nu`, with `lambda_nu` divisible by `alpha_nu`.
///
/// The kernel basis is brought to reduced row echelon form with principal
/// coordinates first, so the rows with a principal pivot form a canonical
/// basis of the achievable principal parts (modulo tail-only directions).
/// Each row is scaled to primitive integer operator coefficients.
pub fn derive_system(
    d: &Diagram,
    basis: &InvariantBasis,
    p: u32,
    degrees: &AnsatzDegrees,
    exec: Exec,
) -> Result<DerivedSystem> {
    if p == 0 {
        return Err(Error::Regime("derivation order must be at least 1".into()));
    }
    require_property_p(d, basis)?;
    let regime = Regime::of(d)?;
    let sy = Symanzik::new(d, basis)?;
    let al = sy.alphabet.clone();
    let n = al.n_alpha();
    let nk = al.len() - n;
    let subst = Substitution::new(&sy, &regime);
    let dq = sy.q_derivatives();

    let derivative_monos = |order: u32| -> Vec<Monomial> {
        monomials_of_degree(nk, order)
            .into_iter()
            .map(|e| {
                let mut full = vec![0u16; al.len()];
                full[n..].copy_from_slice(&e);
                Monomial::from_exponents(full)
            })
            .collect()
    };
    let coeff_monos = |degs: &[u32]| -> Vec<Monomial> {
        let set: BTreeSet<u32> = degs.iter().copied().collect();
        let max = set.iter().copied().max();
        match max {
            None => vec![],
            Some(max) => kinematic_monomials(&al, max)
                .into_iter()
                .filter(|m| set.contains(&m.degree()))
                .collect(),
        }
    };

    let mut unknowns = Vec::new();
    for derivs in derivative_monos(p) {
        for coeff in coeff_monos(&degrees.principal) {
            unknowns.push(Unknown::Principal {
                derivs: derivs.clone(),
                coeff,
            });
        }
    }
    let n_principal = unknowns.len();
    for derivs in derivative_monos(p - 1) {
        for coeff in coeff_monos(&degrees.tail) {
            unknowns.push(Unknown::Tail {
                derivs: derivs.clone(),
                coeff,
            });
        }
    }
    let n_pair = unknowns.len();
    // lambda_nu = alpha_nu * alpha^K * sigma with |K| = deg R - q
    let k_degree = regime.u_exponent * regime.loops + (p - 1) * regime.q_degree;
    let alpha_monos = monomials_of_degree(n, k_degree);
    let sigmas = coeff_monos(&degrees.lambda);
    for nu in 0..n {
        for am in &alpha_monos {
            let mut e = vec![0u16; al.len()];
            e[..n].copy_from_slice(am);
            e[nu] += 1;
            let base = Monomial::from_exponents(e);
            for s in &sigmas {
                unknowns.push(Unknown::Lambda {
                    nu,
                    mono: base.checked_mul(s)?,
                });
            }
        }
    }

    let images: BTreeMap<Monomial, Poly> = derivative_monos(p)
        .into_iter()
        .chain(if p > 1 {
            derivative_monos(p - 1)
        } else {
            vec![Monomial::one(al.len())]
        })
        .map(|m| {
            let img = subst.derivative_image(&m);
            (m, img)
        })
        .collect();
    let columns: Vec<Vec<Poly>> = exec.map(&unknowns, |u| match u {
        Unknown::Principal { derivs, coeff } => {
            vec![images[derivs].mul_monomial(coeff), Poly::zero(&al)]
        }
        Unknown::Tail { derivs, coeff } => {
            vec![Poly::zero(&al), -&images[derivs].mul_monomial(coeff)]
        }
        Unknown::Lambda { nu, mono } => {
            let lam = Poly::term(&al, mono.clone(), Rational::one());
            vec![-&(&lam * &dq[*nu]), lam.partial_derivative(*nu)]
        }
    });
    let zero = Poly::zero(&al);
    let (matrix, _, keys) = assemble(&columns, &[zero.clone(), zero])?;
    let kernel = nullspace_with(&matrix, exec);
    let kernel_dimension = kernel.len();

    let mut pairs = Vec::new();
    let mut tail_only = Vec::new();
    if !kernel.is_empty() {
        let canonical = rref_with(&RationalMatrix::from_rows(kernel), exec);
        for (row, &pivot) in canonical.pivots.iter().enumerate() {
            if pivot >= n_pair {
                continue;
            }
            let v: Vec<Rational> = canonical.matrix.row(row).to_vec();
            let scale = primitive_scale(&v[..n_pair]);
            let v: Vec<Rational> = v.iter().map(|x| x * &scale).collect();
            let mut principal = DiffOperator::zero(&al);
            let mut tail = DiffOperator::zero(&al);
            let mut lambdas = vec![Poly::zero(&al); n];
            for (u, x) in unknowns.iter().zip(&v) {
                if x.is_zero() {
                    continue;
                }
                match u {
                    Unknown::Principal { derivs, coeff } => principal
                        .add_term(derivs.clone(), Poly::term(&al, coeff.clone(), x.clone())),
                    Unknown::Tail { derivs, coeff } => {
                        tail.add_term(derivs.clone(), Poly::term(&al, coeff.clone(), x.clone()))
                    }
                    Unknown::Lambda { nu, mono } => {
                        lambdas[*nu] = &lambdas[*nu] + &Poly::term(&al, mono.clone(), x.clone());
                    }
                }
            }
            let cert = GriffithsCertificate {
                target: combine(&lambdas, &dq, &al),
                reduced: divergence(&lambdas, &al),
                lambdas,
            };
            let pair = OperatorPair {
                label: String::new(),
                order: p,
                principal,
                tail,
                prefactors: (regime.prefactor(p), regime.prefactor(p - 1)),
                certificate: Some(cert),
            };
            if pivot < n_principal {
                pairs.push(pair);
            } else {
                tail_only.push(pair);
            }
        }
    }
    for (idx, pair) in pairs.iter_mut().enumerate() {
        pair.label = format!("derived {}", idx + 1);
    }
    for (idx, pair) in tail_only.iter_mut().enumerate() {
        pair.label = format!("tail-only {}", idx + 1);
    }
    for pair in pairs.iter().chain(&tail_only) {
        let (r, rt) = pair_numerators(pair, &sy, &regime).or_else(|e| match e {
            // a tail-only direction has an empty principal part
            Error::MalformedOperator(_) if pair.principal.is_zero() => Ok((
                Poly::zero(&al),
                substitute_operator(&pair.tail, &sy, &regime)?.numerator,
            )),
            e => Err(e),
        })?;
        let cert = pair
            .certificate
            .as_ref()
            .expect("derived pairs carry witnesses");
        if cert.target != r || cert.reduced != rt || !cert.violations(&dq, true).is_empty() {
            return Err(Error::Certification(format!(
                "{}: kernel vector does not reproduce its numerators",
                pair.label
            )));
        }
    }
    Ok(DerivedSystem {
        kernel_dimension,
        pairs,
        tail_only,
        unknowns: unknowns.len(),
        equations: keys.len(),
    })
}

/// Factor turning a rational vector into primitive integers with a positive
/// first nonzero entry.
fn primitive_scale(v: &[Rational]) -> Rational {
    use num_integer::Integer;
    let mut lcm = num_bigint::BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut gcd = num_bigint::BigInt::zero();
    for x in v {
        gcd = gcd.gcd(&(x.numer() * (&lcm / x.denom())));
    }
    if gcd.is_zero() {
        return Rational::one();
    }
    let first = v.iter().find(|x| !x.is_zero()).expect("nonzero vector");
    let s = Rational::new(lcm, gcd);
    if first.is_negative() {
        -s
    } else {
        s
    }
}

/// Coefficient vectors of operator pairs over a shared coordinate system:
/// one coordinate per `(part, derivative, coefficient monomial)` occurring
/// in any of the pairs.
pub fn pair_coordinates(pairs: &[&OperatorPair]) -> Vec<Vec<Rational>> {
    let mut keys: BTreeSet<(u8, Monomial, Monomial)> = BTreeSet::new();
    let entries: Vec<BTreeMap<(u8, Monomial, Monomial), Rational>> = pairs
        .iter()
        .map(|pair| {
            let mut map = BTreeMap::new();
            for (part, op) in [(0u8, &pair.principal), (1u8, &pair.tail)] {
                for (dm, c) in op.terms() {
                    for (cm, x) in c.terms() {
                        map.insert((part, dm.clone(), cm.clone()), x.clone());
                    }
                }
            }
            keys.extend(map.keys().cloned());
            map
        })
        .collect();
    entries
        .iter()
        .map(|map| {
            keys.iter()
                .map(|k| map.get(k).cloned().unwrap_or_else(Rational::zero))
                .collect()
        })
        .collect()
}
