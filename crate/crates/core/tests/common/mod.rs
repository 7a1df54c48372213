//! Reference implementations used as oracles by the integration tests. They
//! share no code with the library's tree enumeration or elimination.

#![allow(dead_code)]

use std::sync::Arc;

use feynpde::graph::{bubble, build_ladder, triangle, Diagram, VertexSet};
use feynpde::poly::{Alphabet, Monomial, Poly, Rational};
use feynpde::symanzik::{default_basis, ladder_basis, InvariantBasis};
use feynpde::verify::KinematicPoint;
use num_traits::One;

pub struct CorpusEntry {
    pub name: &'static str,
    pub diagram: Diagram,
    pub basis: InvariantBasis,
}

/// Bubble and triangle in D = 2, ladders h = 1, 2, 3 in D = 4.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for (name, d) in [
        ("bubble", bubble(2).unwrap()),
        ("triangle", triangle(2).unwrap()),
    ] {
        let basis = default_basis(&d).unwrap();
        out.push(CorpusEntry {
            name,
            diagram: d,
            basis,
        });
    }
    for (name, h) in [("box", 1), ("double box", 2), ("ladder h=3", 3)] {
        let d = build_ladder(h, 4).unwrap();
        let basis = ladder_basis(&d).unwrap();
        out.push(CorpusEntry {
            name,
            diagram: d,
            basis,
        });
    }
    out
}

/// Connected-component label of every vertex using only the lines in `mask`.
pub fn component_labels(d: &Diagram, mask: u64) -> Vec<usize> {
    let n = d.n_vertices();
    let mut label: Vec<usize> = (0..n).collect();
    // relabel until stable: simple and obviously correct
    loop {
        let mut changed = false;
        for (j, line) in d.lines().iter().enumerate() {
            if mask >> j & 1 == 0 {
                continue;
            }
            let (a, b) = line.ends;
            let m = label[a].min(label[b]);
            for v in [a, b] {
                if label[v] != m {
                    label[v] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            return label;
        }
    }
}

fn component_count(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn complement_monomial(al: &Arc<Alphabet>, n_lines: usize, mask: u64) -> Poly {
    let mut e = vec![0u16; al.len()];
    for (j, x) in e.iter_mut().enumerate().take(n_lines) {
        *x = (mask >> j & 1 == 0) as u16;
    }
    Poly::term(al, Monomial::from_exponents(e), Rational::one())
}

/// `U` by filtering all `2^N` line subsets: spanning trees have `n - 1`
/// lines and one component.
pub fn brute_u(d: &Diagram, al: &Arc<Alphabet>) -> (Poly, usize) {
    let n = d.n_lines();
    let mut u = Poly::zero(al);
    let mut count = 0;
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize != d.n_vertices() - 1 {
            continue;
        }
        if component_count(&component_labels(d, mask)) == 1 {
            u = &u + &complement_monomial(al, n, mask);
            count += 1;
        }
    }
    (u, count)
}

/// `W_chi` by filtering all `2^N` line subsets: spanning 2-forests with all
/// of `chi` in one tree and the other external vertices in the other.
pub fn brute_w(d: &Diagram, chi: VertexSet, al: &Arc<Alphabet>) -> Poly {
    let n = d.n_lines();
    let ext = d.externals();
    let mut w = Poly::zero(al);
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize + 2 != d.n_vertices() {
            continue;
        }
        let labels = component_labels(d, mask);
        if component_count(&labels) != 2 {
            continue;
        }
        let inside: Vec<usize> = ext
            .iter()
            .filter(|&&v| chi.contains(v))
            .map(|&v| labels[v])
            .collect();
        let outside: Vec<usize> = ext
            .iter()
            .filter(|&&v| !chi.contains(v))
            .map(|&v| labels[v])
            .collect();
        let same = |xs: &[usize]| xs.windows(2).all(|p| p[0] == p[1]);
        if same(&inside) && same(&outside) && inside[0] != outside[0] {
            w = &w + &complement_monomial(al, n, mask);
        }
    }
    w
}

/// Spanning-tree count from the reduced Laplacian by integer Bareiss
/// elimination.
pub fn matrix_tree(d: &Diagram) -> i128 {
    let n = d.n_vertices();
    let mut lap = vec![vec![0i128; n]; n];
    for line in d.lines() {
        let (a, b) = line.ends;
        if a == b {
            continue;
        }
        lap[a][a] += 1;
        lap[b][b] += 1;
        lap[a][b] -= 1;
        lap[b][a] -= 1;
    }
    let mut m: Vec<Vec<i128>> = lap[1..].iter().map(|r| r[1..].to_vec()).collect();
    let k = n - 1;
    let mut prev = 1i128;
    let mut sign = 1i128;
    for c in 0..k {
        let Some(p) = (c..k).find(|&r| m[r][c] != 0) else {
            return 0;
        };
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        for r in c + 1..k {
            for j in c + 1..k {
                m[r][j] = (m[r][j] * m[c][c] - m[r][c] * m[c][j]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[c][c];
    }
    sign * m[k - 1][k - 1]
}

/// All non-empty proper subsets of the external vertices.
pub fn all_proper_subsets(d: &Diagram) -> Vec<VertexSet> {
    let ext = d.externals();
    (1u64..(1 << ext.len()) - 1)
        .map(|bits| {
            VertexSet::from_indices(
                (0..ext.len())
                    .filter(|i| bits >> i & 1 == 1)
                    .map(|i| ext[i]),
            )
        })
        .collect()
}

pub fn point(s: &[i64], z: &[i64]) -> KinematicPoint {
    KinematicPoint {
        s: s.iter()
            .map(|&x| Rational::from_integer(x.into()))
            .collect(),
        z: z.iter()
            .map(|&x| Rational::from_integer(x.into()))
            .collect(),
    }
}

/// `int_0^1 dx / (x^2 - x - 1) = -(4/sqrt 5) artanh(1/sqrt 5)`: the bubble in
/// D = 2 at s = -1, z = (1, 1).
pub fn bubble_closed_form() -> f64 {
    let r5 = 5f64.sqrt();
    -(4.0 / r5) * (1.0 / r5).atanh()
}

/// Euclidean point used for the triangle: negative invariants, unit masses.
pub fn triangle_point() -> KinematicPoint {
    point(&[-1, -2, -3], &[1, 2, 3])
}

/// The pair with its tail negated.
pub fn flip_tail(pair: &feynpde::pde::OperatorPair) -> feynpde::pde::OperatorPair {
    let mut p = pair.clone();
    p.tail = p.tail.scale(&-Rational::one());
    p.certificate = None;
    p.label = format!("{} (tail negated)", pair.label);
    p
}
