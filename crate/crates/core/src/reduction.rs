//! Griffiths pole reduction and Jacobian ideal membership.
//!
//! A numerator `R` over `Q^K` reduces one pole order when
//! `R = sum_nu lambda_nu Q_{alpha_nu}`: the integrand then equals
//! `(sum_nu d lambda_nu / d alpha_nu) / ((K-1) Q^(K-1))` up to an exact form.
//! When every `lambda_nu` vanishes on `alpha_nu = 0`, the exact form
//! integrates to zero over any chain whose boundary lies on the coordinate
//! hyperplanes.
//!
//! Witnesses are found by exact linear algebra. The unknowns are the
//! coefficients of `lambda_nu`, themselves polynomials in the kinematic
//! variables; collecting every `(alpha, s, z)` monomial flattens the problem
//! into one rational linear system. Because `Q` is kinematically homogeneous
//! of degree one, that system splits by kinematic degree, and the degree-0
//! piece has a closed-form elimination through the `z` strata (see
//! [`FeynmanJacobian::structured_piece`]).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{solve_with, RationalMatrix};
use crate::poly::{
    monomials_of_degree, monomials_up_to_degree, rat, Alphabet, Block, Monomial, Poly, Rational,
};
use crate::symanzik::Symanzik;

/// Largest dense system (rows x columns) the solvers will assemble.
pub const DENSE_CELL_BUDGET: usize = 6_000_000;

/// Witness polynomials for one pole-reduction step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GriffithsCertificate {
    pub target: Poly,
    pub lambdas: Vec<Poly>,
    pub reduced: Poly,
}

impl GriffithsCertificate {
    /// Builds a certificate from witnesses, computing target and divergence.
    pub fn from_lambdas(lambdas: Vec<Poly>, q_derivs: &[Poly]) -> Self {
        let alphabet = q_derivs[0].alphabet().clone();
        let target = combine(&lambdas, q_derivs, &alphabet);
        let reduced = divergence(&lambdas, &alphabet);
        GriffithsCertificate {
            target,
            lambdas,
            reduced,
        }
    }

    /// Lists every violated invariant; empty means the certificate holds.
    pub fn violations(&self, q_derivs: &[Poly], require_divisible: bool) -> Vec<String> {
        let mut out = Vec::new();
        let alphabet = self.target.alphabet();
        if self.lambdas.len() != q_derivs.len() {
            out.push(format!(
                "expected {} lambdas, found {}",
                q_derivs.len(),
                self.lambdas.len()
            ));
            return out;
        }
        let residual = &self.target - &combine(&self.lambdas, q_derivs, alphabet);
        if !residual.is_zero() {
            out.push(format!("R - sum lambda_nu Q_nu = {residual}"));
        }
        let div = divergence(&self.lambdas, alphabet);
        if div != self.reduced {
            out.push(format!(
                "reduced numerator differs from divergence by {}",
                &div - &self.reduced
            ));
        }
        if require_divisible {
            for (nu, l) in self.lambdas.iter().enumerate() {
                if !l.divisible_by_var(alphabet.alpha(nu)) {
                    out.push(format!("lambda_{} is not divisible by a{}", nu + 1, nu + 1));
                }
            }
        }
        out
    }
}

/// `sum_nu lambda_nu * q_derivs[nu]`.
pub fn combine(lambdas: &[Poly], q_derivs: &[Poly], alphabet: &Arc<Alphabet>) -> Poly {
    lambdas
        .iter()
        .zip(q_derivs)
        .filter(|(l, _)| !l.is_zero())
        .fold(Poly::zero(alphabet), |acc, (l, d)| &acc + &(l * d))
}

/// `sum_nu d lambda_nu / d alpha_nu`.
pub fn divergence(lambdas: &[Poly], alphabet: &Arc<Alphabet>) -> Poly {
    lambdas
        .iter()
        .enumerate()
        .fold(Poly::zero(alphabet), |acc, (nu, l)| {
            &acc + &l.partial_derivative(alphabet.alpha(nu))
        })
}

/// A rational form `numerator / Q^pole_order * omega` on projective space.
#[derive(Clone, Debug)]
pub struct PoleForm {
    pub numerator: Poly,
    pub pole_order: u32,
    pub q_degree: u32,
}

impl PoleForm {
    /// Checks the balance `k q = deg numerator + N`.
    pub fn new(numerator: Poly, pole_order: u32, q_degree: u32) -> Result<Self> {
        let n = numerator.alphabet().n_alpha() as u32;
        let deg = numerator.is_homogeneous(Block::Alpha).unwrap_or(0);
        if pole_order == 0 || pole_order * q_degree != deg + n {
            return Err(Error::Regime(format!(
                "pole order {pole_order} with deg Q = {q_degree} does not balance numerator degree {deg} in {n} variables"
            )));
        }
        Ok(PoleForm {
            numerator,
            pole_order,
            q_degree,
        })
    }
}

/// Result of one reduction step. The integral of the original form equals
/// `scale` times the integral of `numerator / Q^pole_order * omega`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub numerator: Poly,
    pub pole_order: u32,
    pub scale: Rational,
}

pub fn griffiths_reduce(
    cert: &GriffithsCertificate,
    q_derivs: &[Poly],
    k: u32,
) -> Result<Reduction> {
    if k < 2 {
        return Err(Error::Regime(format!("cannot reduce a pole of order {k}")));
    }
    let bad = cert.violations(q_derivs, false);
    if !bad.is_empty() {
        return Err(Error::Certification(bad.join("; ")));
    }
    Ok(Reduction {
        numerator: divergence(&cert.lambdas, cert.target.alphabet()),
        pole_order: k - 1,
        scale: Rational::new(1.into(), (k - 1).into()),
    })
}

/// Both sides of the `d phi` expansion, scaled by `(k-1) Q^k`, per
/// coefficient of `d alpha_0 ^ .. (omit l) .. ^ d alpha_n`.
#[derive(Clone, Debug)]
pub struct DphiReport {
    /// `(k-1) Q^k` times the coefficient computed by differentiating phi.
    pub from_phi: Vec<Poly>,
    /// `(-1)^l alpha_l (k-1) R` with `R` the certificate's target.
    pub membership_part: Vec<Poly>,
    /// `(-1)^l alpha_l Q R~` with `R~` the certificate's reduced numerator.
    pub divergence_part: Vec<Poly>,
    pub residuals: Vec<Poly>,
}

impl DphiReport {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(Poly::is_zero)
    }
}

/// Differentiates `phi = 1/((k-1) Q^(k-1)) sum_{i<j} (-1)^(i+j)
/// (alpha_i lambda_j - alpha_j lambda_i) d alpha_{^i ^j}` term by term and
/// compares with `[R/Q^k - R~ / ((k-1) Q^(k-1))] omega`, where `R` and `R~`
/// are the numerators the certificate claims and
/// `omega = sum_i (-1)^i alpha_i d alpha_{^i}` with indices from 0.
///
/// Requires the projective balance `(k-1) q = deg lambda + N - 1`.
pub fn expand_dphi(cert: &GriffithsCertificate, q: &Poly, k: u32) -> Result<DphiReport> {
    let lambdas = &cert.lambdas;
    let alphabet = q.alphabet().clone();
    let n = alphabet.n_alpha();
    if k < 2 || lambdas.len() != n {
        return Err(Error::Regime(
            "expand_dphi needs k >= 2 and one lambda per alpha".into(),
        ));
    }
    let qdeg = q
        .is_homogeneous(Block::Alpha)
        .ok_or_else(|| Error::Regime("Q is not alpha-homogeneous".into()))?;
    for l in lambdas.iter().filter(|l| !l.is_zero()) {
        let ldeg = l
            .is_homogeneous(Block::Alpha)
            .ok_or_else(|| Error::Regime("lambda is not alpha-homogeneous".into()))?;
        if (k - 1) * qdeg != ldeg + n as u32 - 1 {
            return Err(Error::Regime(format!(
                "unbalanced form: (k-1) q = {} but deg lambda + N - 1 = {}",
                (k - 1) * qdeg,
                ldeg + n as u32 - 1
            )));
        }
    }
    let km1 = rat(k as i64 - 1);
    let alpha = |i: usize| Poly::var(&alphabet, alphabet.alpha(i));
    let q_derivs: Vec<Poly> = (0..n).map(|i| q.partial_derivative(i)).collect();
    let sign = |e: usize| if e.is_multiple_of(2) { rat(1) } else { rat(-1) };
    let r_scaled = cert.target.scale(&km1);
    let q_rt = q * &cert.reduced;
    // (k-1) Q^k times the d alpha_{^l} component of d phi is Q A_l - (k-1) B_l,
    // summing d/d alpha_m of a_ij = alpha_i lambda_j - alpha_j lambda_i into A
    // and a_ij Q_m into B. d alpha_i ^ d alpha_{^i ^l} = (-1)^i d alpha_{^l}
    // for i < l, and d alpha_j ^ d alpha_{^l ^j} = (-1)^(j-1) d alpha_{^l} for j > l.
    let rows = Exec::default().map_range(n, |l| {
        let mut a = Poly::zero(&alphabet);
        let mut b = Poly::zero(&alphabet);
        for m in (0..n).filter(|&m| m != l) {
            let (i, j) = (m.min(l), m.max(l));
            let s = if m < l {
                sign(i + j + m)
            } else {
                sign(i + j + m - 1)
            };
            let aij = &(&alpha(i) * &lambdas[j]) - &(&alpha(j) * &lambdas[i]);
            a += &aij.partial_derivative(m).scale(&s);
            b += &(&aij * &q_derivs[m]).scale(&s);
        }
        let lhs = &(&a * q) - &b.scale(&km1);
        let pref = alpha(l).scale(&sign(l));
        let membership = &pref * &r_scaled;
        let div_part = &pref * &q_rt;
        let mut residual = lhs.clone();
        residual -= &membership;
        residual += &div_part;
        (lhs, membership, div_part, residual)
    });
    let mut report = DphiReport {
        from_phi: Vec::with_capacity(n),
        membership_part: Vec::with_capacity(n),
        divergence_part: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
    };
    for (lhs, membership, div_part, residual) in rows {
        report.from_phi.push(lhs);
        report.membership_part.push(membership);
        report.divergence_part.push(div_part);
        report.residuals.push(residual);
    }
    Ok(report)
}

/// Degree from which every form lies in an ideal generated by forms of the
/// given degrees without common projective zeros: `sum p_i - n`.
pub fn macaulay_threshold(degrees: &[u32], n: u32) -> i64 {
    degrees.iter().map(|&d| d as i64).sum::<i64>() - n as i64
}

/// Assembles the dense system `sum_c x_c columns[c][kind] = rhs[kind]` for
/// every equation kind, one row per `(kind, monomial)` in sorted order.
pub(crate) fn assemble(
    columns: &[Vec<Poly>],
    rhs: &[Poly],
) -> Result<(RationalMatrix, Vec<Rational>, Vec<(usize, Monomial)>)> {
    let mut keys: BTreeSet<(usize, Monomial)> = BTreeSet::new();
    for col in columns {
        for (kind, p) in col.iter().enumerate() {
            keys.extend(p.terms().map(|(m, _)| (kind, m.clone())));
        }
    }
    for (kind, p) in rhs.iter().enumerate() {
        keys.extend(p.terms().map(|(m, _)| (kind, m.clone())));
    }
    let keys: Vec<(usize, Monomial)> = keys.into_iter().collect();
    let rows = keys.len();
    let cols = columns.len();
    if rows.saturating_mul(cols) > DENSE_CELL_BUDGET {
        return Err(Error::SystemTooLarge { rows, cols });
    }
    let index: BTreeMap<&(usize, Monomial), usize> =
        keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut a = RationalMatrix::zeros(rows, cols);
    for (c, col) in columns.iter().enumerate() {
        for (kind, p) in col.iter().enumerate() {
            for (m, v) in p.terms() {
                let r = index[&(kind, m.clone())];
                let cur = a.get(r, c) + v;
                a.set(r, c, cur);
            }
        }
    }
    let mut b = vec![Rational::zero(); rows];
    for (kind, p) in rhs.iter().enumerate() {
        for (m, v) in p.terms() {
            b[index[&(kind, m.clone())]] += v;
        }
    }
    Ok((a, b, keys))
}

/// Places an alpha-block exponent vector into the full alphabet.
fn alpha_monomial(alphabet: &Alphabet, exps: &[u16]) -> Monomial {
    let mut e = vec![0u16; alphabet.len()];
    e[..exps.len()].copy_from_slice(exps);
    Monomial::from_exponents(e)
}

/// Places a kinematic-block exponent vector into the full alphabet.
fn kinematic_monomial(alphabet: &Alphabet, exps: &[u16]) -> Monomial {
    let mut e = vec![0u16; alphabet.len()];
    e[alphabet.n_alpha()..].copy_from_slice(exps);
    Monomial::from_exponents(e)
}

/// One unknown coefficient of `lambda_nu`: `kin * alpha^K`, with an extra
/// factor `alpha_nu` when divisibility is imposed.
#[derive(Clone, Debug)]
struct LambdaUnknown {
    nu: usize,
    mono: Monomial,
}

fn lambda_unknowns(
    alphabet: &Arc<Alphabet>,
    lambda_degree: u32,
    kinematic_degrees: &[u32],
    require_divisible: bool,
) -> Vec<LambdaUnknown> {
    let n = alphabet.n_alpha();
    let nk = alphabet.len() - n;
    let mut out = Vec::new();
    if require_divisible && lambda_degree == 0 {
        return out;
    }
    let free_degree = if require_divisible {
        lambda_degree - 1
    } else {
        lambda_degree
    };
    let alpha_monos = monomials_of_degree(n, free_degree);
    let kin_monos: Vec<Vec<u16>> = kinematic_degrees
        .iter()
        .flat_map(|&d| monomials_of_degree(nk, d))
        .collect();
    for nu in 0..n {
        for am in &alpha_monos {
            let mut base = alpha_monomial(alphabet, am);
            if require_divisible {
                base = base
                    .checked_mul(&Monomial::var(alphabet.len(), alphabet.alpha(nu)))
                    .expect("exponent overflow");
            }
            for km in &kin_monos {
                let mono = base
                    .checked_mul(&kinematic_monomial(alphabet, km))
                    .expect("exponent overflow");
                out.push(LambdaUnknown { nu, mono });
            }
        }
    }
    out
}

fn lambdas_from_solution(
    alphabet: &Arc<Alphabet>,
    unknowns: &[LambdaUnknown],
    x: &[Rational],
) -> Vec<Poly> {
    let mut lambdas = vec![Poly::zero(alphabet); alphabet.n_alpha()];
    for (u, v) in unknowns.iter().zip(x) {
        if !v.is_zero() {
            lambdas[u.nu] = &lambdas[u.nu] + &Poly::term(alphabet, u.mono.clone(), v.clone());
        }
    }
    lambdas
}

/// Searches `lambda_nu`, alpha-homogeneous of degree `deg R - q + 1` with
/// kinematic coefficients of total degree at most `coeff_degree`, such that
/// `R = sum lambda_nu Q_{alpha_nu}`. With `require_divisible` each
/// `lambda_nu` is built as `alpha_nu` times unknowns.
pub fn ideal_membership(
    r: &Poly,
    q: &Poly,
    require_divisible: bool,
    coeff_degree: u32,
) -> Result<Option<GriffithsCertificate>> {
    let alphabet = q.alphabet().clone();
    let n = alphabet.n_alpha();
    let q_derivs: Vec<Poly> = (0..n).map(|v| q.partial_derivative(v)).collect();
    if r.is_zero() {
        return Ok(Some(GriffithsCertificate::from_lambdas(
            vec![Poly::zero(&alphabet); n],
            &q_derivs,
        )));
    }
    let qdeg = q
        .is_homogeneous(Block::Alpha)
        .ok_or_else(|| Error::Regime("Q is not alpha-homogeneous".into()))?;
    let rdeg = r
        .is_homogeneous(Block::Alpha)
        .ok_or_else(|| Error::Regime("R is not alpha-homogeneous".into()))?;
    if rdeg + 1 < qdeg {
        return Err(Error::Regime(format!(
            "deg R = {rdeg} is below deg Q - 1 = {}",
            qdeg - 1
        )));
    }
    let lambda_degree = rdeg + 1 - qdeg;
    let kin_degrees: Vec<u32> = (0..=coeff_degree).collect();
    let unknowns = lambda_unknowns(&alphabet, lambda_degree, &kin_degrees, require_divisible);
    let columns: Vec<Vec<Poly>> = unknowns
        .iter()
        .map(|u| vec![q_derivs[u.nu].mul_monomial(&u.mono)])
        .collect();
    let (a, b, _) = assemble(&columns, std::slice::from_ref(r))?;
    Ok(solve_with(&a, &b, Exec::default()).map(|x| {
        GriffithsCertificate::from_lambdas(
            lambdas_from_solution(&alphabet, &unknowns, &x),
            &q_derivs,
        )
    }))
}

/// How the joint search should treat the kinematic-degree-0 piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchRoute {
    /// Structured elimination for degree 0, dense systems above.
    #[default]
    Auto,
    /// Dense linear systems for every piece.
    Dense,
}

/// Which condition could not be met.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureStage {
    /// `R` has a kinematic-degree-0 part, which no combination of `Q_nu` reaches.
    ConstantPart,
    Membership,
    Divisibility,
    Divergence,
}

#[derive(Clone, Debug)]
pub enum WitnessOutcome {
    Found(GriffithsCertificate),
    NotFound {
        stage: FailureStage,
        kinematic_degree: u32,
        residual: Poly,
    },
}

/// The Jacobian data of a Feynman denominator
/// `Q = sum_i s_i W~_i - U sum_j alpha_j z_j`.
#[derive(Clone, Debug)]
pub struct FeynmanJacobian {
    alphabet: Arc<Alphabet>,
    q_degree: u32,
    q_derivs: Vec<Poly>,
    u: Poly,
    u_derivs: Vec<Poly>,
}

impl FeynmanJacobian {
    pub fn new(sy: &Symanzik) -> Self {
        let alphabet = sy.alphabet.clone();
        let n = alphabet.n_alpha();
        FeynmanJacobian {
            q_degree: sy.q.degree,
            q_derivs: sy.q_derivatives(),
            u_derivs: (0..n).map(|v| sy.u.partial_derivative(v)).collect(),
            u: sy.u.clone(),
            alphabet,
        }
    }

    pub fn q_derivs(&self) -> &[Poly] {
        &self.q_derivs
    }

    /// Finds `lambda` with `R = sum lambda_nu Q_nu` and
    /// `sum d lambda_nu / d alpha_nu = R~` simultaneously.
    pub fn search(
        &self,
        r: &Poly,
        r_tilde: &Poly,
        require_divisible: bool,
        route: SearchRoute,
        exec: Exec,
    ) -> Result<WitnessOutcome> {
        let constant = r.kinematic_component(0);
        if !constant.is_zero() {
            return Ok(WitnessOutcome::NotFound {
                stage: FailureStage::ConstantPart,
                kinematic_degree: 0,
                residual: constant,
            });
        }
        let top = r
            .degree_in(Block::Kinematic)
            .map(|d| d.saturating_sub(1))
            .into_iter()
            .chain(r_tilde.degree_in(Block::Kinematic))
            .max()
            .unwrap_or(0);
        let mut lambdas = vec![Poly::zero(&self.alphabet); self.alphabet.n_alpha()];
        for e in 0..=top {
            let piece_r = r.kinematic_component(e + 1);
            let piece_rt = r_tilde.kinematic_component(e);
            if piece_r.is_zero() && piece_rt.is_zero() {
                continue;
            }
            let outcome = if e == 0 && route == SearchRoute::Auto {
                self.structured_piece(&piece_r, &piece_rt, require_divisible)
            } else {
                self.dense_piece(&piece_r, &piece_rt, e, require_divisible, exec)?
            };
            match outcome {
                Ok(ls) => {
                    for (acc, l) in lambdas.iter_mut().zip(ls) {
                        *acc = &*acc + &l;
                    }
                }
                Err((stage, residual)) => {
                    return Ok(WitnessOutcome::NotFound {
                        stage,
                        kinematic_degree: e,
                        residual,
                    })
                }
            }
        }
        let cert = GriffithsCertificate::from_lambdas(lambdas, &self.q_derivs);
        debug_assert!(cert
            .violations(&self.q_derivs, require_divisible)
            .is_empty());
        if cert.target != *r || cert.reduced != *r_tilde {
            return Err(Error::Certification(
                "internal: assembled witness does not reproduce the numerators".into(),
            ));
        }
        Ok(WitnessOutcome::Found(cert))
    }

    /// Kinematic-degree-0 witnesses are unique when they exist. Reading off
    /// the coefficient of `z_j` in `R = sum lambda_nu Q_nu` gives
    /// `R_{z_j} = -alpha_j E - lambda_j U` with `E = sum lambda_nu U_nu`;
    /// contracting with `U_j` and using Euler's relation for `U` yields
    /// `E = -(sum_j U_j R_{z_j}) / ((h+1) U)`, which fixes every `lambda_j`.
    /// The candidate is then checked against all remaining conditions.
    pub fn structured_piece(
        &self,
        r1: &Poly,
        rt0: &Poly,
        require_divisible: bool,
    ) -> std::result::Result<Vec<Poly>, (FailureStage, Poly)> {
        let al = &self.alphabet;
        let n = al.n_alpha();
        let strata = r1.split_kinematic();
        let stratum = |j: usize| {
            strata
                .get(&Monomial::var(al.len(), al.z(j)))
                .cloned()
                .unwrap_or_else(|| Poly::zero(al))
        };
        let r_z: Vec<Poly> = (0..n).map(stratum).collect();
        let contracted = r_z
            .iter()
            .zip(&self.u_derivs)
            .fold(Poly::zero(al), |acc, (rz, ud)| &acc + &(rz * ud));
        let h_plus_one = rat(self.u.is_homogeneous(Block::Alpha).unwrap_or(0) as i64 + 1);
        let Some(e) = contracted.div_exact(&self.u) else {
            return Err((FailureStage::Membership, r1.clone()));
        };
        let e = e.scale(&(-h_plus_one.recip()));
        let mut lambdas = Vec::with_capacity(n);
        for (j, rz) in r_z.iter().enumerate() {
            let num = rz + &(&Poly::var(al, al.alpha(j)) * &e);
            match num.div_exact(&self.u) {
                Some(l) => lambdas.push(-l),
                None => return Err((FailureStage::Membership, r1.clone())),
            }
        }
        let residual = r1 - &combine(&lambdas, &self.q_derivs, al);
        if !residual.is_zero() {
            return Err((FailureStage::Membership, residual));
        }
        if require_divisible {
            if let Some(nu) = (0..n).find(|&nu| !lambdas[nu].divisible_by_var(al.alpha(nu))) {
                return Err((FailureStage::Divisibility, lambdas[nu].clone()));
            }
        }
        let div = divergence(&lambdas, al);
        if div != *rt0 {
            return Err((FailureStage::Divergence, &div - rt0));
        }
        Ok(lambdas)
    }

    /// Dense joint system for the witness piece of kinematic degree `e`.
    pub fn dense_piece(
        &self,
        r: &Poly,
        rt: &Poly,
        e: u32,
        require_divisible: bool,
        exec: Exec,
    ) -> Result<std::result::Result<Vec<Poly>, (FailureStage, Poly)>> {
        let al = &self.alphabet;
        let lambda_degree = match (
            r.is_homogeneous(Block::Alpha),
            rt.is_homogeneous(Block::Alpha),
        ) {
            (Some(dr), Some(dt)) if dr == dt + self.q_degree => dt + 1,
            (Some(dr), None) if rt.is_zero() && dr + 1 >= self.q_degree => dr + 1 - self.q_degree,
            (None, Some(dt)) if r.is_zero() => dt + 1,
            _ => return Ok(Err((FailureStage::Membership, r.clone()))),
        };
        let unknowns = lambda_unknowns(al, lambda_degree, &[e], require_divisible);
        let columns: Vec<Vec<Poly>> = exec.map(&unknowns, |u| {
            let lam = Poly::term(al, u.mono.clone(), Rational::one());
            vec![
                &lam * &self.q_derivs[u.nu],
                lam.partial_derivative(al.alpha(u.nu)),
            ]
        });
        let (a, b, _) = assemble(&columns, &[r.clone(), rt.clone()])?;
        if let Some(x) = solve_with(&a, &b, exec) {
            return Ok(Ok(lambdas_from_solution(al, &unknowns, &x)));
        }
        // Diagnose: membership alone, then the divergence residual of a
        // particular membership witness.
        let member_cols: Vec<Vec<Poly>> = columns.iter().map(|c| vec![c[0].clone()]).collect();
        let (a, b, _) = assemble(&member_cols, std::slice::from_ref(r))?;
        Ok(Err(match solve_with(&a, &b, exec) {
            None => (FailureStage::Membership, r.clone()),
            Some(x) => {
                let ls = lambdas_from_solution(al, &unknowns, &x);
                (FailureStage::Divergence, &divergence(&ls, al) - rt)
            }
        }))
    }
}

/// Kinematic monomials up to a degree, placed in the full alphabet.
pub fn kinematic_monomials(alphabet: &Alphabet, max_degree: u32) -> Vec<Monomial> {
    let nk = alphabet.len() - alphabet.n_alpha();
    monomials_up_to_degree(nk, max_degree)
        .iter()
        .map(|e| kinematic_monomial(alphabet, e))
        .collect()
}
