//! JSON file formats: diagrams, operator files, kinematic points and
//! verification reports. Rationals are strings `"p/q"` (or `"p"`) so no
//! value passes through floating point.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{build_diagram, Diagram, DiagramSpec, VertexSet};
use crate::pde::{DiffOperator, OperatorPair, Regime};
use crate::poly::{format_rational, parse_rational, Alphabet, Block, Monomial, Poly};
use crate::reduction::GriffithsCertificate;
use crate::symanzik::{default_basis, InvariantBasis, Symanzik};
use crate::verify::KinematicPoint;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub external: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEntry {
    pub id: String,
    pub from: String,
    pub to: String,
    pub massive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramFile {
    pub name: String,
    #[serde(rename = "D")]
    pub dimension: i64,
    pub vertices: Vec<VertexEntry>,
    pub lines: Vec<LineEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
}

impl DiagramFile {
    pub fn from_diagram(d: &Diagram, basis: Option<&InvariantBasis>) -> Self {
        let spec = d.to_spec();
        DiagramFile {
            name: spec.name,
            dimension: spec.dimension,
            vertices: spec
                .vertices
                .into_iter()
                .map(|(id, external)| VertexEntry { id, external })
                .collect(),
            lines: spec
                .lines
                .into_iter()
                .map(|(id, from, to, massive)| LineEntry {
                    id,
                    from,
                    to,
                    massive,
                })
                .collect(),
            basis: basis.map(|b| {
                b.subsets()
                    .iter()
                    .map(|chi| {
                        chi.indices()
                            .map(|i| d.vertices()[i].name.clone())
                            .collect()
                    })
                    .collect()
            }),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("diagram file: {e}")))
    }

    /// Builds the diagram and its basis (the default family when absent).
    pub fn load(&self) -> Result<(Diagram, InvariantBasis)> {
        let spec = DiagramSpec {
            name: self.name.clone(),
            dimension: self.dimension,
            vertices: self
                .vertices
                .iter()
                .map(|v| (v.id.clone(), v.external))
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| (l.id.clone(), l.from.clone(), l.to.clone(), l.massive))
                .collect(),
        };
        let d = build_diagram(&spec)?;
        let basis = match &self.basis {
            None => default_basis(&d)?,
            Some(sets) => {
                let mut subsets = Vec::with_capacity(sets.len());
                for set in sets {
                    let mut idx = Vec::with_capacity(set.len());
                    for id in set {
                        idx.push(d.vertex_index(id).ok_or_else(|| {
                            Error::Parse(format!("basis: unknown vertex id `{id}`"))
                        })?);
                    }
                    subsets.push(VertexSet::from_indices(idx));
                }
                InvariantBasis::new(&d, subsets)?
            }
        };
        Ok((d, basis))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram files serialize") + "\n"
    }
}

/// SHA-256 of the canonical (compact, basis-resolved) serialization.
pub fn diagram_hash(d: &Diagram, basis: &InvariantBasis) -> String {
    let canonical = serde_json::to_string(&DiagramFile::from_diagram(d, Some(basis)))
        .expect("diagram files serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: String,
    pub exponents: Vec<u16>,
}

pub type PolyJson = Vec<TermJson>;

pub fn poly_to_json(p: &Poly) -> PolyJson {
    p.terms()
        .map(|(m, c)| TermJson {
            coeff: format_rational(c),
            exponents: m.exponents().to_vec(),
        })
        .collect()
}

pub fn poly_from_json(alphabet: &Arc<Alphabet>, terms: &[TermJson]) -> Result<Poly> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        if t.exponents.len() != alphabet.len() {
            return Err(Error::Parse(format!(
                "exponent vector of length {} for an alphabet of {} variables",
                t.exponents.len(),
                alphabet.len()
            )));
        }
        out.push((
            Monomial::from_exponents(t.exponents.clone()),
            parse_rational(&t.coeff)?,
        ));
    }
    Ok(Poly::from_terms(alphabet, out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorTermJson {
    /// Derivative orders in `s_1..s_r`.
    pub s: Vec<u16>,
    /// Derivative orders in `z_1..z_N`.
    pub z: Vec<u16>,
    pub coeff: PolyJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub lambdas: Vec<PolyJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub label: String,
    pub order: u32,
    /// `c_p` and `c_{p-1}`.
    pub prefactors: [String; 2],
    pub principal: Vec<OperatorTermJson>,
    pub tail: Vec<OperatorTermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeJson {
    pub lines: u32,
    pub loops: u32,
    #[serde(rename = "D")]
    pub dimension: u32,
    pub u_exponent: u32,
    pub pole_order: u32,
    pub q_degree: u32,
}

impl From<&Regime> for RegimeJson {
    fn from(r: &Regime) -> Self {
        RegimeJson {
            lines: r.lines,
            loops: r.loops,
            dimension: r.dimension,
            u_exponent: r.u_exponent,
            pole_order: r.pole_order,
            q_degree: r.q_degree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub diagram_hash: String,
    pub alphabet: Vec<String>,
    pub regime: RegimeJson,
    pub pairs: Vec<PairJson>,
}

fn operator_to_json(op: &DiffOperator) -> Vec<OperatorTermJson> {
    let al = op.alphabet();
    op.terms()
        .map(|(m, c)| {
            let e = m.exponents();
            OperatorTermJson {
                s: e[al.block_range(Block::Kinematic).start..][..al.n_s()].to_vec(),
                z: e[al.len() - al.n_z()..].to_vec(),
                coeff: poly_to_json(c),
            }
        })
        .collect()
}

fn operator_from_json(al: &Arc<Alphabet>, terms: &[OperatorTermJson]) -> Result<DiffOperator> {
    let mut op = DiffOperator::zero(al);
    for t in terms {
        if t.s.len() != al.n_s() || t.z.len() != al.n_z() {
            return Err(Error::Parse(format!(
                "operator term with {} s-orders and {} z-orders; expected {} and {}",
                t.s.len(),
                t.z.len(),
                al.n_s(),
                al.n_z()
            )));
        }
        let mut e = vec![0u16; al.n_alpha()];
        e.extend(&t.s);
        e.extend(&t.z);
        let coeff = poly_from_json(al, &t.coeff)?;
        if coeff.degree_in(Block::Alpha).unwrap_or(0) > 0 {
            return Err(Error::MalformedOperator(
                "coefficient depends on alpha".into(),
            ));
        }
        op.add_term(Monomial::from_exponents(e), coeff);
    }
    Ok(op)
}

pub fn pair_to_json(pair: &OperatorPair) -> PairJson {
    PairJson {
        label: pair.label.clone(),
        order: pair.order,
        prefactors: [
            format_rational(&pair.prefactors.0),
            format_rational(&pair.prefactors.1),
        ],
        principal: operator_to_json(&pair.principal),
        tail: operator_to_json(&pair.tail),
        certificate: pair.certificate.as_ref().map(|c| CertificateJson {
            lambdas: c.lambdas.iter().map(poly_to_json).collect(),
        }),
    }
}

/// Rebuilds a pair. A stored certificate only carries the witnesses; its
/// target and reduced numerators are recomputed from them.
pub fn pair_from_json(sy: &Symanzik, p: &PairJson) -> Result<OperatorPair> {
    let al = &sy.alphabet;
    let certificate = match &p.certificate {
        None => None,
        Some(c) => {
            if c.lambdas.len() != al.n_alpha() {
                return Err(Error::Parse(format!(
                    "{}: certificate has {} lambdas for {} lines",
                    p.label,
                    c.lambdas.len(),
                    al.n_alpha()
                )));
            }
            let lambdas = c
                .lambdas
                .iter()
                .map(|l| poly_from_json(al, l))
                .collect::<Result<Vec<_>>>()?;
            Some(GriffithsCertificate::from_lambdas(
                lambdas,
                &sy.q_derivatives(),
            ))
        }
    };
    Ok(OperatorPair {
        label: p.label.clone(),
        order: p.order,
        principal: operator_from_json(al, &p.principal)?,
        tail: operator_from_json(al, &p.tail)?,
        prefactors: (
            parse_rational(&p.prefactors[0])?,
            parse_rational(&p.prefactors[1])?,
        ),
        certificate,
    })
}

impl OperatorFile {
    pub fn new(
        d: &Diagram,
        basis: &InvariantBasis,
        sy: &Symanzik,
        regime: &Regime,
        pairs: &[OperatorPair],
    ) -> Self {
        OperatorFile {
            diagram_hash: diagram_hash(d, basis),
            alphabet: sy.alphabet.names().to_vec(),
            regime: regime.into(),
            pairs: pairs.iter().map(pair_to_json).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("operator file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator files serialize") + "\n"
    }

    pub fn pairs(&self, sy: &Symanzik) -> Result<Vec<OperatorPair>> {
        if self.alphabet != sy.alphabet.names() {
            return Err(Error::Parse(
                "operator file alphabet does not match the diagram".into(),
            ));
        }
        self.pairs.iter().map(|p| pair_from_json(sy, p)).collect()
    }
}

/// SHA-256 of a certificate's witnesses in file form.
pub fn certificate_hash(cert: &GriffithsCertificate) -> String {
    let json = CertificateJson {
        lambdas: cert.lambdas.iter().map(poly_to_json).collect(),
    };
    hex::encode(Sha256::digest(
        serde_json::to_string(&json)
            .expect("certificates serialize")
            .as_bytes(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub s: Vec<String>,
    pub z: Vec<String>,
}

impl PointFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("point file: {e}")))
    }

    pub fn point(&self) -> Result<KinematicPoint> {
        Ok(KinematicPoint {
            s: self
                .s
                .iter()
                .map(|x| parse_rational(x))
                .collect::<Result<_>>()?,
            z: self
                .z
                .iter()
                .map(|x| parse_rational(x))
                .collect::<Result<_>>()?,
        })
    }

    pub fn from_point(p: &KinematicPoint) -> Self {
        PointFile {
            s: p.s.iter().map(format_rational).collect(),
            z: p.z.iter().map(format_rational).collect(),
        }
    }
}

/// Rendering of `U`, the nonzero `W_chi` and `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolysReport {
    pub diagram: String,
    pub u: String,
    pub w: BTreeMap<String, String>,
    pub basis: Vec<String>,
    pub q: String,
    pub property_p: bool,
    pub property_p_offending: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericJson {
    pub total: f64,
    pub largest_term: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub label: String,
    /// `"certified"` or `"failed"`.
    pub status: String,
    /// `"stored"` when a witness in the file was checked, `"search"` otherwise.
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_hash: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub diagram_hash: String,
    pub pairs: Vec<PairReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<PointFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<f64>,
    pub ok: bool,
}
