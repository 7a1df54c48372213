//! Independent checks of operator pairs.
//!
//! Symbolic certification recomputes both numerators from the operators and
//! searches for a witness from scratch; it never looks at how the pair was
//! produced. A witness stored with the pair can be checked directly with
//! [`Certifier::check_certificate`].
//!
//! The numeric layer works in `f64` and never feeds back into symbolic
//! results. The integration chain is the standard simplex
//! `{alpha_i >= 0, sum alpha_i = 1}`, whose boundary lies on the coordinate
//! hyperplanes. On it `omega` restricts to `d alpha_1 ... d alpha_{N-1}`
//! (after eliminating `alpha_N`), which is parametrized from the unit cube by
//! collapsed coordinates
//!
//! ```text
//! alpha_1 = u_1, alpha_2 = (1-u_1) u_2, ..., alpha_N = (1-u_1)...(1-u_{N-1})
//! ```
//!
//! with Jacobian `prod_{i=1}^{N-2} (1-u_i)^(N-1-i)`, and integrated with a
//! tensor Gauss-Legendre rule. Because `Q` is linear in the kinematic
//! variables, `Q = sum_v x_v P_v(alpha)`, the node values of every `P_v` are
//! computed once and each evaluation of `F` at a new kinematic point is a
//! weighted sum over nodes.

use std::cell::RefCell;
use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::graph::Diagram;
use crate::pde::{pair_numerators, substitute_operator, DiffOperator, OperatorPair, Regime};
use crate::poly::{Block, Poly, Rational};
use crate::reduction::{
    FailureStage, FeynmanJacobian, GriffithsCertificate, SearchRoute, WitnessOutcome,
};
use crate::symanzik::{InvariantBasis, Symanzik};

/// Why a pair failed certification.
#[derive(Clone, Debug)]
pub struct FailureReport {
    pub label: String,
    pub stage: FailureStage,
    pub kinematic_degree: u32,
    /// The part of the numerators no witness could account for.
    pub residual: Poly,
}

#[derive(Clone, Debug)]
pub enum Certification {
    Certified(GriffithsCertificate),
    Failed(FailureReport),
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }
}

/// Caches the polynomial data of one diagram for repeated certification.
pub struct Certifier {
    sy: Symanzik,
    regime: Regime,
    jacobian: FeynmanJacobian,
    route: SearchRoute,
    exec: Exec,
}

impl Certifier {
    pub fn new(d: &Diagram, basis: &InvariantBasis) -> Result<Self> {
        let regime = Regime::of(d)?;
        let sy = Symanzik::new(d, basis)?;
        let jacobian = FeynmanJacobian::new(&sy);
        Ok(Certifier {
            sy,
            regime,
            jacobian,
            route: SearchRoute::Auto,
            exec: Exec::default(),
        })
    }

    pub fn with_route(mut self, route: SearchRoute) -> Self {
        self.route = route;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn symanzik(&self) -> &Symanzik {
        &self.sy
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    /// Searches a witness `lambda` (each `lambda_nu` divisible by
    /// `alpha_nu`) with `R = sum lambda_nu Q_nu` and `div lambda = R~`.
    pub fn certify(&self, pair: &OperatorPair) -> Result<Certification> {
        let (r, rt) = pair_numerators(pair, &self.sy, &self.regime)?;
        Ok(
            match self.jacobian.search(&r, &rt, true, self.route, self.exec)? {
                WitnessOutcome::Found(cert) => Certification::Certified(cert),
                WitnessOutcome::NotFound {
                    stage,
                    kinematic_degree,
                    residual,
                } => Certification::Failed(FailureReport {
                    label: pair.label.clone(),
                    stage,
                    kinematic_degree,
                    residual,
                }),
            },
        )
    }

    /// Checks a supplied witness against numerators recomputed from the
    /// operators; returns the list of violations.
    pub fn check_certificate(
        &self,
        pair: &OperatorPair,
        cert: &GriffithsCertificate,
    ) -> Result<Vec<String>> {
        let (r, rt) = pair_numerators(pair, &self.sy, &self.regime)?;
        let mut bad = Vec::new();
        if cert.target != r {
            bad.push("stored target differs from the principal numerator".to_string());
        }
        if cert.reduced != rt {
            bad.push("stored reduced numerator differs from the tail numerator".to_string());
        }
        bad.extend(cert.violations(self.jacobian.q_derivs(), true));
        Ok(bad)
    }
}

/// One-shot certification.
pub fn certify(d: &Diagram, basis: &InvariantBasis, pair: &OperatorPair) -> Result<Certification> {
    Certifier::new(d, basis)?.certify(pair)
}

/// A point in the `(s, z)` parameter space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KinematicPoint {
    pub s: Vec<Rational>,
    pub z: Vec<Rational>,
}

impl KinematicPoint {
    /// Values in alphabet order of the kinematic block (`s` then `z`).
    pub fn to_f64(&self) -> Vec<f64> {
        self.s
            .iter()
            .chain(&self.z)
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// The point with `z_j = 0` on every massless line. Derivations keep a
    /// symbolic `z_j` for every line; the massless value is fixed only here.
    pub fn massless_specialized(&self, d: &Diagram) -> KinematicPoint {
        let mut out = self.clone();
        for (z, line) in out.z.iter_mut().zip(d.lines()) {
            if !line.massive {
                *z = Rational::from_integer(0.into());
            }
        }
        out
    }

    fn check_shape(&self, sy: &Symanzik) -> Result<()> {
        let al = &sy.alphabet;
        if self.s.len() != al.n_s() || self.z.len() != al.n_z() {
            return Err(Error::Numeric(format!(
                "point has {} invariants and {} masses; the diagram needs {} and {}",
                self.s.len(),
                self.z.len(),
                al.n_s(),
                al.n_z()
            )));
        }
        Ok(())
    }
}

/// Relative margin `min |Q| / max |Q|` a point must keep on the simplex.
pub const POLE_FREE_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PoleCheck {
    pub pole_free: bool,
    pub min_abs: f64,
    pub max_abs: f64,
    pub samples: usize,
}

/// `Q` split by kinematic variable: `Q = sum_v x_v P_v(alpha)`.
fn linear_parts(sy: &Symanzik) -> Result<Vec<Poly>> {
    let al = &sy.alphabet;
    let nk = al.len() - al.n_alpha();
    let mut parts = vec![Poly::zero(al); nk];
    for (m, p) in sy.q.poly.split_kinematic() {
        let kin = al.block_range(Block::Kinematic);
        match kin.clone().find(|&v| m.exponents()[v] == 1) {
            Some(v) if m.degree() == 1 => parts[v - al.n_alpha()] = p,
            _ => {
                return Err(Error::Numeric(
                    "Q is not linear in the kinematic variables".into(),
                ))
            }
        }
    }
    Ok(parts)
}

/// Samples `Q` on the lattice `{m / samples}` of the simplex (which contains
/// all vertices, and all edge midpoints when `samples` is even) plus the
/// edge midpoints, and reports whether one strict sign holds throughout
/// with `min |Q| >= POLE_FREE_MARGIN * max |Q|`.
pub fn pole_free_check(sy: &Symanzik, point: &KinematicPoint, samples: u32) -> Result<PoleCheck> {
    point.check_shape(sy)?;
    let n = sy.alphabet.n_alpha();
    let x = point.to_f64();
    let parts = linear_parts(sy)?;
    let samples = samples.max(1);
    let mut alphas: Vec<Vec<f64>> = Vec::new();
    let mut comp = vec![0u32; n];
    compositions(samples, 0, &mut comp, &mut |c| {
        alphas.push(c.iter().map(|&m| m as f64 / samples as f64).collect());
    });
    for i in 0..n {
        for j in i + 1..n {
            let mut a = vec![0.0; n];
            a[i] = 0.5;
            a[j] = 0.5;
            alphas.push(a);
        }
    }
    let mut full = vec![0.0; sy.alphabet.len()];
    let (mut min_abs, mut max_abs) = (f64::INFINITY, 0.0f64);
    let (mut pos, mut neg) = (false, false);
    for a in &alphas {
        full[..n].copy_from_slice(a);
        let q: f64 = parts
            .iter()
            .zip(&x)
            .map(|(p, xv)| xv * p.eval_f64(&full))
            .sum();
        min_abs = min_abs.min(q.abs());
        max_abs = max_abs.max(q.abs());
        pos |= q > 0.0;
        neg |= q < 0.0;
    }
    let pole_free = max_abs > 0.0 && !(pos && neg) && min_abs >= POLE_FREE_MARGIN * max_abs;
    Ok(PoleCheck {
        pole_free,
        min_abs,
        max_abs,
        samples: alphas.len(),
    })
}

fn compositions(total: u32, idx: usize, comp: &mut [u32], f: &mut impl FnMut(&[u32])) {
    if idx + 1 == comp.len() {
        comp[idx] = total;
        f(comp);
        return;
    }
    for m in 0..=total {
        comp[idx] = m;
        compositions(total - m, idx + 1, comp, f);
    }
}

/// Settings of the numeric layer.
#[derive(Clone, Debug)]
pub struct NumericConfig {
    pub point: KinematicPoint,
    /// Gauss-Legendre nodes per simplex axis.
    pub nodes: usize,
    /// Finite-difference step relative to `max(1, |x|)` for invariants.
    pub s_step: f64,
    /// Same for squared masses.
    pub z_step: f64,
    /// Lattice resolution of the pole-free check.
    pub pole_samples: u32,
    pub exec: Exec,
}

impl NumericConfig {
    pub fn new(point: KinematicPoint) -> Self {
        NumericConfig {
            point,
            nodes: 64,
            s_step: 1e-3,
            z_step: 1e-3,
            pole_samples: 12,
            exec: Exec::default(),
        }
    }
}

/// Largest tensor grid the quadrature will build.
pub const MAX_QUADRATURE_NODES: usize = 4_000_000;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = t;
                p0 = 1.0;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            t = 0.0;
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = 0.5 * (1.0 - t);
        x[n - 1 - i] = 0.5 * (1.0 + t);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

/// Precomputed node data of `int U^a R / Q^K` over the simplex.
pub struct SimplexRule {
    /// Weight times Jacobian times `U^a` (times `R` when a numerator is set).
    weights: Vec<f64>,
    /// `P_v(alpha)` at each node, row-major by node.
    parts: Vec<f64>,
    n_kin: usize,
    pole_order: i32,
    exec: Exec,
}

impl SimplexRule {
    /// Rule for `int numerator * U^a / Q^pole_order`; `numerator` may depend
    /// on the kinematic variables, in which case it is frozen at `point`.
    pub fn new(
        sy: &Symanzik,
        numerator: &Poly,
        u_exponent: u32,
        pole_order: u32,
        nodes: usize,
        point: &[f64],
        exec: Exec,
    ) -> Result<Self> {
        let n = sy.alphabet.n_alpha();
        let dim = n - 1;
        let total = nodes
            .checked_pow(dim as u32)
            .filter(|&t| t <= MAX_QUADRATURE_NODES)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "{nodes}^{dim} quadrature nodes exceed the limit of {MAX_QUADRATURE_NODES}"
                ))
            })?;
        if nodes < 2 {
            return Err(Error::Numeric(
                "at least two nodes per axis are required".into(),
            ));
        }
        let (gx, gw) = gauss_legendre(nodes);
        let parts = linear_parts(sy)?;
        let n_kin = parts.len();
        let len = sy.alphabet.len();
        let data: Vec<(f64, Vec<f64>)> = exec.map_range(total, |flat| {
            let mut idx = flat;
            let mut full = vec![0.0; len];
            full[n..].copy_from_slice(point);
            let mut rest = 1.0;
            let mut weight = 1.0;
            for axis in 0..dim {
                let k = idx % nodes;
                idx /= nodes;
                let u = gx[k];
                full[axis] = rest * u;
                weight *= gw[k] * rest;
                rest *= 1.0 - u;
            }
            full[dim] = rest;
            let u = sy.u.eval_f64(&full).powi(u_exponent as i32);
            let r = numerator.eval_f64(&full);
            let p: Vec<f64> = parts.iter().map(|p| p.eval_f64(&full)).collect();
            (weight * u * r, p)
        });
        let mut weights = Vec::with_capacity(total);
        let mut flat = Vec::with_capacity(total * n_kin);
        for (w, p) in data {
            weights.push(w);
            flat.extend(p);
        }
        Ok(SimplexRule {
            weights,
            parts: flat,
            n_kin,
            pole_order: pole_order as i32,
            exec,
        })
    }

    /// The integral at kinematic values `x`.
    pub fn integrate(&self, x: &[f64]) -> f64 {
        let terms = self.exec.map_range(self.weights.len(), |i| {
            let row = &self.parts[i * self.n_kin..(i + 1) * self.n_kin];
            let q: f64 = row.iter().zip(x).map(|(p, v)| p * v).sum();
            self.weights[i] / q.powi(self.pole_order)
        });
        pairwise_sum(&terms)
    }
}

/// Value and error estimate of a quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn require_pole_free(sy: &Symanzik, cfg: &NumericConfig) -> Result<()> {
    let check = pole_free_check(sy, &cfg.point, cfg.pole_samples)?;
    if !check.pole_free {
        return Err(Error::Numeric(format!(
            "Q vanishes or changes sign on the simplex at this point (min |Q| = {:e}, max |Q| = {:e})",
            check.min_abs, check.max_abs
        )));
    }
    Ok(())
}

/// `F` at the configured point. The value uses `nodes` per axis; the error
/// estimate is its distance to the rule with half as many nodes.
pub fn evaluate_integral(
    d: &Diagram,
    basis: &InvariantBasis,
    cfg: &NumericConfig,
) -> Result<Estimate> {
    let regime = Regime::of(d)?;
    let sy = Symanzik::new(d, basis)?;
    evaluate_with(&sy, &regime, &specialized(d, cfg))
}

fn specialized(d: &Diagram, cfg: &NumericConfig) -> NumericConfig {
    let mut cfg = cfg.clone();
    cfg.point = cfg.point.massless_specialized(d);
    cfg
}

fn evaluate_with(sy: &Symanzik, regime: &Regime, cfg: &NumericConfig) -> Result<Estimate> {
    cfg.point.check_shape(sy)?;
    require_pole_free(sy, cfg)?;
    let x = cfg.point.to_f64();
    let one = Poly::one(&sy.alphabet);
    let rule = |nodes| {
        SimplexRule::new(
            sy,
            &one,
            regime.u_exponent,
            regime.pole_order,
            nodes,
            &x,
            cfg.exec,
        )
    };
    let value = rule(cfg.nodes)?.integrate(&x);
    let coarse = rule(cfg.nodes.div_ceil(2).max(2))?.integrate(&x);
    Ok(Estimate {
        value,
        error: (value - coarse).abs(),
    })
}

/// Central stencil for the `m`-th derivative: `(offset, weight)` with unit step.
fn stencil(m: u32) -> Result<&'static [(i64, f64)]> {
    Ok(match m {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => {
            return Err(Error::Numeric(format!(
                "finite differences support derivative order at most 4 per variable, got {m}"
            )))
        }
    })
}

/// Mixed partial derivatives of `F` by tensor central differences with
/// three-level Richardson extrapolation (steps `h`, `h/2`, `h/4`). Function
/// values are cached on the finest lattice.
pub struct FiniteDifferences<'a> {
    rule: &'a SimplexRule,
    x: Vec<f64>,
    /// Finest step per kinematic variable.
    fine: Vec<f64>,
    cache: RefCell<HashMap<Vec<i64>, f64>>,
}

impl<'a> FiniteDifferences<'a> {
    pub fn new(rule: &'a SimplexRule, x: Vec<f64>, steps: Vec<f64>) -> Self {
        let fine = steps
            .iter()
            .zip(&x)
            .map(|(h, v)| h * v.abs().max(1.0) / 4.0)
            .collect();
        FiniteDifferences {
            rule,
            x,
            fine,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn value(&self, offsets: &[i64]) -> f64 {
        if let Some(v) = self.cache.borrow().get(offsets) {
            return *v;
        }
        let y: Vec<f64> = self
            .x
            .iter()
            .zip(offsets)
            .zip(&self.fine)
            .map(|((x, &o), h)| x + o as f64 * h)
            .collect();
        let v = self.rule.integrate(&y);
        self.cache.borrow_mut().insert(offsets.to_vec(), v);
        v
    }

    /// Plain central difference with step `scale` times the finest step.
    fn difference(&self, orders: &[u32], scale: i64) -> Result<f64> {
        let stencils: Vec<&[(i64, f64)]> =
            orders.iter().map(|&m| stencil(m)).collect::<Result<_>>()?;
        let mut acc = 0.0;
        let mut idx = vec![0usize; orders.len()];
        loop {
            let mut offsets = vec![0i64; orders.len()];
            let mut w = 1.0;
            for (v, s) in stencils.iter().enumerate() {
                let (o, c) = s[idx[v]];
                offsets[v] = o * scale;
                w *= c;
            }
            acc += w * self.value(&offsets);
            let mut v = 0;
            loop {
                if v == orders.len() {
                    let denom: f64 = orders
                        .iter()
                        .zip(&self.fine)
                        .map(|(&m, h)| (h * scale as f64).powi(m as i32))
                        .product();
                    return Ok(acc / denom);
                }
                idx[v] += 1;
                if idx[v] < stencils[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
        }
    }

    /// The derivative `d^orders F` at the base point.
    pub fn derivative(&self, orders: &[u32]) -> Result<f64> {
        let d1 = self.difference(orders, 4)?;
        let d2 = self.difference(orders, 2)?;
        let d4 = self.difference(orders, 1)?;
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d4 - d2) / 3.0;
        Ok((16.0 * r2 - r1) / 15.0)
    }
}

/// Per-term magnitudes and the relative residual of `(P + T) F`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericResidual {
    pub total: f64,
    pub largest_term: f64,
    pub relative: f64,
}

/// Applies a pair to `F` by finite differences at the configured point and
/// returns `|(P + T) F|` relative to its largest single term.
pub fn numeric_residual(
    d: &Diagram,
    basis: &InvariantBasis,
    pair: &OperatorPair,
    cfg: &NumericConfig,
) -> Result<NumericResidual> {
    let regime = Regime::of(d)?;
    let sy = Symanzik::new(d, basis)?;
    NumericContext::new(&sy, &regime, &specialized(d, cfg))?.residual(pair)
}

/// Quadrature rule and difference cache for repeated residuals at one point.
pub struct NumericContext<'a> {
    sy: &'a Symanzik,
    regime: &'a Regime,
    rule: SimplexRule,
    cfg: NumericConfig,
}

impl<'a> NumericContext<'a> {
    pub fn new(sy: &'a Symanzik, regime: &'a Regime, cfg: &NumericConfig) -> Result<Self> {
        cfg.point.check_shape(sy)?;
        require_pole_free(sy, cfg)?;
        let x = cfg.point.to_f64();
        let rule = SimplexRule::new(
            sy,
            &Poly::one(&sy.alphabet),
            regime.u_exponent,
            regime.pole_order,
            cfg.nodes,
            &x,
            cfg.exec,
        )?;
        Ok(NumericContext {
            sy,
            regime,
            rule,
            cfg: cfg.clone(),
        })
    }

    fn differences(&self) -> FiniteDifferences<'_> {
        let al = &self.sy.alphabet;
        let steps = (0..al.n_s())
            .map(|_| self.cfg.s_step)
            .chain((0..al.n_z()).map(|_| self.cfg.z_step))
            .collect();
        FiniteDifferences::new(&self.rule, self.cfg.point.to_f64(), steps)
    }

    fn term_values(&self, op: &DiffOperator, fd: &FiniteDifferences<'_>) -> Result<Vec<f64>> {
        let al = &self.sy.alphabet;
        let x = self.cfg.point.to_f64();
        let mut full = vec![0.0; al.len()];
        full[al.n_alpha()..].copy_from_slice(&x);
        op.terms()
            .map(|(m, c)| {
                let orders: Vec<u32> = m.exponents()[al.n_alpha()..]
                    .iter()
                    .map(|&e| e as u32)
                    .collect();
                Ok(c.eval_f64(&full) * fd.derivative(&orders)?)
            })
            .collect()
    }

    pub fn residual(&self, pair: &OperatorPair) -> Result<NumericResidual> {
        let fd = self.differences();
        let mut terms = self.term_values(&pair.principal, &fd)?;
        terms.extend(self.term_values(&pair.tail, &fd)?);
        let total: f64 = terms.iter().sum();
        let largest = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        Ok(NumericResidual {
            total,
            largest_term: largest,
            relative: if largest > 0.0 {
                total.abs() / largest
            } else {
                0.0
            },
        })
    }

    /// `dF/dx_var` by finite differences and by direct quadrature of the
    /// pulled-through integrand `-k R / Q^(k+1)`; returns both.
    pub fn first_derivative(&self, var: usize) -> Result<(f64, f64)> {
        let al = &self.sy.alphabet;
        let kin = var
            .checked_sub(al.n_alpha())
            .filter(|&v| v < al.len() - al.n_alpha())
            .ok_or_else(|| {
                Error::Numeric(format!("{} is not a kinematic variable", al.name(var)))
            })?;
        let mut orders = vec![0u32; al.len() - al.n_alpha()];
        orders[kin] = 1;
        let fd = self.differences().derivative(&orders)?;
        let op = DiffOperator::derivative(al, var);
        let sub = substitute_operator(&op, self.sy, self.regime)?;
        let x = self.cfg.point.to_f64();
        // the substituted numerator already contains U^a
        let rule = SimplexRule::new(
            self.sy,
            &sub.numerator,
            0,
            sub.pole_order,
            self.cfg.nodes,
            &x,
            self.cfg.exec,
        )?;
        let prefactor = sub.prefactor.to_f64().unwrap_or(f64::NAN);
        Ok((fd, prefactor * rule.integrate(&x)))
    }

    pub fn value(&self) -> Result<Estimate> {
        evaluate_with(self.sy, self.regime, &self.cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bubble;
    use crate::pde::theorem1_system;
    use crate::poly::rat;
    use crate::symanzik::default_basis;

    fn point(s: &[i64], z: &[i64]) -> KinematicPoint {
        KinematicPoint {
            s: s.iter().map(|&x| rat(x)).collect(),
            z: z.iter().map(|&x| rat(x)).collect(),
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [2usize, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n as i32) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
                assert!(
                    (approx - 1.0 / (deg + 1) as f64).abs() < 1e-13,
                    "n={n} deg={deg}"
                );
            }
        }
    }

    #[test]
    fn pole_free_points() {
        let d = bubble(2).unwrap();
        let sy = Symanzik::new(&d, &default_basis(&d).unwrap()).unwrap();
        assert!(
            pole_free_check(&sy, &point(&[-1], &[1, 1]), 12)
                .unwrap()
                .pole_free
        );
        assert!(
            !pole_free_check(&sy, &point(&[4], &[1, 1]), 12)
                .unwrap()
                .pole_free
        );
        assert!(
            !pole_free_check(&sy, &point(&[0], &[0, 0]), 12)
                .unwrap()
                .pole_free
        );
    }

    #[test]
    fn bubble_certifies_and_rejects() {
        let d = bubble(2).unwrap();
        let b = default_basis(&d).unwrap();
        let c = Certifier::new(&d, &b).unwrap();
        for pair in theorem1_system(&d, &b).unwrap() {
            assert!(c.certify(&pair).unwrap().is_certified());
            assert!(c
                .check_certificate(&pair, pair.certificate.as_ref().unwrap())
                .unwrap()
                .is_empty());
        }
        let al = &c.symanzik().alphabet;
        let ds1 = OperatorPair {
            label: "d s1".into(),
            order: 1,
            principal: DiffOperator::derivative(al, al.s(0)),
            tail: DiffOperator::zero(al),
            prefactors: (rat(1), rat(1)),
            certificate: None,
        };
        assert!(!c.certify(&ds1).unwrap().is_certified());
    }
}
