//! Symanzik polynomials `U`, `W_chi`, the invariant basis and the
//! denominator polynomial `Q` of the parametric integrand.
//!
//! Invariants `s(chi)` are handled in Gram coordinates: with a reference
//! external vertex `i0` eliminated by momentum conservation, every
//! `s(chi) = (sum_{i in chi} p_i)^2` is a linear form in `g_jk = p_j . p_k`.
//! Expressing a basis and an arbitrary invariant in these coordinates turns
//! reduction to the basis into one exact linear solve.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{build_ladder, Diagram, EdgeSubset, VertexSet};
use crate::linalg::{determinant, solve, RationalMatrix};
use crate::poly::{rat, Alphabet, Block, Monomial, Poly, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantBasis {
    subsets: Vec<VertexSet>,
    externals: VertexSet,
    reference: usize,
    momenta: Vec<usize>,
    gram: RationalMatrix,
}

impl InvariantBasis {
    /// Validates an explicit family of external subsets.
    pub fn new(d: &Diagram, subsets: Vec<VertexSet>) -> Result<Self> {
        let ext = d.externals();
        if ext.len() < 2 {
            return Err(Error::DegenerateBasis(
                "need at least two external vertices".into(),
            ));
        }
        let externals = d.external_set();
        let reference = *ext.last().unwrap();
        let momenta: Vec<usize> = ext[..ext.len() - 1].to_vec();
        let r = ext.len() * (ext.len() - 1) / 2;
        if subsets.len() != r {
            return Err(Error::DegenerateBasis(format!(
                "expected {r} subsets for {} external vertices, got {}",
                ext.len(),
                subsets.len()
            )));
        }
        for &chi in &subsets {
            d.validate_chi(chi)?;
        }
        for (i, a) in subsets.iter().enumerate() {
            for b in &subsets[i + 1..] {
                if a == b || a.0 ^ b.0 == externals.0 {
                    return Err(Error::DegenerateBasis(format!(
                        "{} and {} give the same invariant",
                        d.format_vertex_set(*a),
                        d.format_vertex_set(*b)
                    )));
                }
            }
        }
        let mut basis = InvariantBasis {
            subsets,
            externals,
            reference,
            momenta,
            gram: RationalMatrix::zeros(0, 0),
        };
        basis.gram = RationalMatrix::from_rows(
            basis
                .subsets
                .iter()
                .map(|&chi| basis.gram_vector(chi))
                .collect(),
        );
        if determinant(&basis.gram).is_zero() {
            return Err(Error::DegenerateBasis(
                "invariants are linearly dependent".into(),
            ));
        }
        Ok(basis)
    }

    pub fn subsets(&self) -> &[VertexSet] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn reference_vertex(&self) -> usize {
        self.reference
    }

    pub fn gram_matrix(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn complement(&self, chi: VertexSet) -> VertexSet {
        VertexSet(self.externals.0 & !chi.0)
    }

    fn gram_index(&self, j: usize, k: usize) -> usize {
        let m = self.momenta.len();
        let (j, k) = (j.min(k), j.max(k));
        j * m - j * j.saturating_sub(1) / 2 + (k - j)
    }

    /// Coefficients of `s(chi)` in Gram coordinates `g_jk`, `j <= k`.
    pub fn gram_vector(&self, chi: VertexSet) -> Vec<Rational> {
        let m = self.momenta.len();
        let side = if chi.contains(self.reference) {
            self.complement(chi)
        } else {
            chi
        };
        let idx: Vec<usize> = (0..m).filter(|&i| side.contains(self.momenta[i])).collect();
        let mut v = vec![Rational::zero(); m * (m + 1) / 2];
        for (a, &j) in idx.iter().enumerate() {
            v[self.gram_index(j, j)] += rat(1);
            for &k in &idx[a + 1..] {
                v[self.gram_index(j, k)] += rat(2);
            }
        }
        v
    }

    /// Coefficients `c` with `s(chi) = sum_i c_i s_i`.
    pub fn reduce_invariant(&self, d: &Diagram, chi: VertexSet) -> Result<Vec<Rational>> {
        d.validate_chi(chi)?;
        let target = self.gram_vector(chi);
        solve(&self.gram.transpose(), &target)
            .ok_or_else(|| Error::DegenerateBasis("invariant outside the basis span".into()))
    }

    /// Index of `chi` (or its complement) in the basis.
    pub fn position(&self, chi: VertexSet) -> Option<usize> {
        let comp = self.complement(chi);
        self.subsets.iter().position(|&s| s == chi || s == comp)
    }
}

/// The family `{{i}, {j,k} | i, j, k != i0}` with `i0` the last external vertex.
pub fn default_basis(d: &Diagram) -> Result<InvariantBasis> {
    let ext = d.externals();
    if ext.len() < 2 {
        return Err(Error::DegenerateBasis(
            "need at least two external vertices".into(),
        ));
    }
    let rest = &ext[..ext.len() - 1];
    let mut subsets: Vec<VertexSet> = rest.iter().map(|&i| VertexSet::from_indices([i])).collect();
    for (a, &j) in rest.iter().enumerate() {
        for &k in &rest[a + 1..] {
            subsets.push(VertexSet::from_indices([j, k]));
        }
    }
    InvariantBasis::new(d, subsets)
}

/// `{1}, {2}, {3}, {4}, {1,2}, {2,3}` on a diagram built as a ladder.
pub fn ladder_basis(d: &Diagram) -> Result<InvariantBasis> {
    let h = d.loop_number();
    let is_ladder = h >= 1
        && d.is_connected()
        && build_ladder(h, d.dimension() as i64)
            .map(|l| l.vertices() == d.vertices() && l.lines() == d.lines())
            .unwrap_or(false);
    if !is_ladder {
        return Err(Error::DegenerateBasis(format!(
            "`{}` is not a ladder diagram",
            d.name()
        )));
    }
    let s = |xs: &[usize]| VertexSet::from_indices(xs.iter().copied());
    InvariantBasis::new(
        d,
        vec![s(&[0]), s(&[1]), s(&[2]), s(&[3]), s(&[0, 1]), s(&[1, 2])],
    )
}

/// `alpha(eta) = prod_{j in eta} alpha_j` for `eta` the complement of `subset`.
fn complement_monomial(alphabet: &Arc<Alphabet>, n_lines: usize, subset: EdgeSubset) -> Poly {
    let mut e = vec![0u16; alphabet.len()];
    for (j, x) in e.iter_mut().enumerate().take(n_lines) {
        if !subset.contains(j) {
            *x = 1;
        }
    }
    Poly::term(alphabet, Monomial::from_exponents(e), Rational::one())
}

/// First Symanzik polynomial: sum over spanning trees of the complement monomials.
pub fn u_polynomial(d: &Diagram, alphabet: &Arc<Alphabet>) -> Result<Poly> {
    let n = d.n_lines();
    let terms = d
        .spanning_trees()?
        .into_iter()
        .map(|t| complement_monomial(alphabet, n, t));
    Ok(terms.fold(Poly::zero(alphabet), |acc, t| &acc + &t))
}

/// Second Symanzik polynomial for the partition `{chi, externals - chi}`.
pub fn w_polynomial(d: &Diagram, chi: VertexSet, alphabet: &Arc<Alphabet>) -> Result<Poly> {
    let n = d.n_lines();
    let terms = d
        .spanning_2trees(chi)?
        .into_iter()
        .map(|t| complement_monomial(alphabet, n, t));
    Ok(terms.fold(Poly::zero(alphabet), |acc, t| &acc + &t))
}

/// All non-empty proper subsets of the externals, as bitmasks, ascending.
pub fn proper_subsets(d: &Diagram) -> Vec<VertexSet> {
    let ext = d.externals();
    let n = ext.len();
    (1..(1u64 << n) - 1)
        .map(|mask| VertexSet::from_indices((0..n).filter(|i| mask >> i & 1 == 1).map(|i| ext[i])))
        .collect()
}

/// The denominator polynomial and its alpha-degree `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPolynomial {
    pub poly: Poly,
    pub degree: u32,
}

/// One unordered partition `{chi, externals - chi}` and its contribution.
#[derive(Clone, Debug)]
pub struct Partition {
    pub chi: VertexSet,
    pub w: Poly,
    pub coefficients: Vec<Rational>,
}

/// Everything the integrand needs for one diagram and basis.
#[derive(Clone, Debug)]
pub struct Symanzik {
    pub alphabet: Arc<Alphabet>,
    pub u: Poly,
    pub partitions: Vec<Partition>,
    /// `dQ/ds_i`; equals `W_{chi_i}` when property (P) holds.
    pub w_tilde: Vec<Poly>,
    pub q: QPolynomial,
}

impl Symanzik {
    pub fn new(d: &Diagram, basis: &InvariantBasis) -> Result<Self> {
        let n = d.n_lines();
        let alphabet = Alphabet::feynman(n, basis.len());
        let u = u_polynomial(d, &alphabet)?;
        let reference = basis.reference_vertex();
        let mut partitions = Vec::new();
        let mut w_tilde = vec![Poly::zero(&alphabet); basis.len()];
        for chi in proper_subsets(d) {
            if chi.contains(reference) {
                continue;
            }
            let w = w_polynomial(d, chi, &alphabet)?;
            let coefficients = basis.reduce_invariant(d, chi)?;
            for (wt, c) in w_tilde.iter_mut().zip(&coefficients) {
                if !c.is_zero() {
                    *wt = &*wt + &w.scale(c);
                }
            }
            partitions.push(Partition {
                chi,
                w,
                coefficients,
            });
        }
        let mut q = Poly::zero(&alphabet);
        for (i, wt) in w_tilde.iter().enumerate() {
            q = &q + &(&Poly::var(&alphabet, alphabet.s(i)) * wt);
        }
        let mass_term = (0..n).fold(Poly::zero(&alphabet), |acc, j| {
            &acc + &(&Poly::var(&alphabet, j) * &Poly::var(&alphabet, alphabet.z(j)))
        });
        q = &q - &(&u * &mass_term);
        let degree = q
            .is_homogeneous(Block::Alpha)
            .ok_or_else(|| Error::InvalidDiagram("Q is not alpha-homogeneous".into()))?;
        Ok(Symanzik {
            alphabet,
            u,
            partitions,
            w_tilde,
            q: QPolynomial { poly: q, degree },
        })
    }

    /// `W_chi` for any non-empty proper subset, from the stored partitions.
    pub fn w(&self, basis: &InvariantBasis, chi: VertexSet) -> Poly {
        let key = if chi.contains(basis.reference_vertex()) {
            basis.complement(chi)
        } else {
            chi
        };
        self.partitions
            .iter()
            .find(|p| p.chi == key)
            .map(|p| p.w.clone())
            .unwrap_or_else(|| Poly::zero(&self.alphabet))
    }

    /// `Q_{alpha_nu}` for every line.
    pub fn q_derivatives(&self) -> Vec<Poly> {
        (0..self.alphabet.n_alpha())
            .map(|v| self.q.poly.partial_derivative(v))
            .collect()
    }
}

/// Whether every `W_chi` outside the basis and its complements vanishes;
/// returns the offending subsets otherwise.
pub fn check_property_p(d: &Diagram, basis: &InvariantBasis) -> Result<(bool, Vec<VertexSet>)> {
    check_property_p_subsets(d, basis.subsets())
}

/// Property (P) for an arbitrary family of external subsets, which need not
/// form a full basis.
pub fn check_property_p_subsets(
    d: &Diagram,
    family: &[VertexSet],
) -> Result<(bool, Vec<VertexSet>)> {
    let ext = d.external_set();
    let mut offending = Vec::new();
    for chi in proper_subsets(d) {
        let comp = VertexSet(ext.0 & !chi.0);
        if family.iter().any(|&s| s == chi || s == comp) {
            continue;
        }
        if !d.spanning_2trees(chi)?.is_empty() {
            offending.push(chi);
        }
    }
    Ok((offending.is_empty(), offending))
}
