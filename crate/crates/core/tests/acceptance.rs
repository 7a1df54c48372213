//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use feynpde::cli::verify_file;
use feynpde::exec::Exec;
use feynpde::format::{OperatorFile, PointFile};
use feynpde::graph::{build_ladder, Diagram};
use feynpde::linalg::in_span;
use feynpde::pde::{
    derive_system, eligible_pairs, pair_coordinates, theorem1_system, theorem2_system,
    AnsatzDegrees, OperatorPair, Regime,
};
use feynpde::poly::{monomials_of_degree, ratio, Alphabet, Block, Monomial, Poly, Rational};
use feynpde::reduction::{expand_dphi, ideal_membership, macaulay_threshold, GriffithsCertificate};
use feynpde::symanzik::{
    check_property_p, ladder_basis, u_polynomial, w_polynomial, InvariantBasis, Symanzik,
};
use feynpde::verify::{Certification, Certifier, NumericConfig, NumericContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// Pairs returned by the derivation on the bubble (D = 2, p = 2, dg = 1).
const BUBBLE_DERIVED_PAIRS: usize = 10;
const BUBBLE_DERIVED_KERNEL: usize = 10;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for e in corpus() {
        let d = &e.diagram;
        let al = Alphabet::feynman(d.n_lines(), e.basis.len());
        let (u_brute, trees) = brute_u(d, &al);
        let u = u_polynomial(d, &al).map_err(|e| e.to_string())?;
        ensure(u == u_brute, || {
            format!("{}: U differs from the subset filter", e.name)
        })?;
        let enumerated = d.spanning_trees().map_err(|e| e.to_string())?.len();
        let mt = matrix_tree(d);
        ensure(enumerated == trees && mt == trees as i128, || {
            format!(
                "{}: tree counts {enumerated}, {trees}, matrix-tree {mt}",
                e.name
            )
        })?;
        for chi in all_proper_subsets(d) {
            let w = w_polynomial(d, chi, &al).map_err(|e| e.to_string())?;
            ensure(w == brute_w(d, chi, &al), || {
                format!(
                    "{}: W{} differs from the subset filter",
                    e.name,
                    d.format_vertex_set(chi)
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "U and {checked} W polynomials match the 2^N filter; tree counts match"
    ))
}

fn criterion_2() -> Outcome {
    for e in corpus() {
        let d = &e.diagram;
        let h = d.loop_number() as u32;
        let sy = Symanzik::new(d, &e.basis).map_err(|e| e.to_string())?;
        let al = &sy.alphabet;
        ensure(sy.u.is_homogeneous(Block::Alpha) == Some(h), || {
            format!("{}: deg U", e.name)
        })?;
        let mut full = Poly::zero(al);
        for chi in all_proper_subsets(d) {
            let w = w_polynomial(d, chi, al).map_err(|e| e.to_string())?;
            if w.is_zero() {
                continue;
            }
            ensure(w.is_homogeneous(Block::Alpha) == Some(h + 1), || {
                format!("{}: deg W{}", e.name, d.format_vertex_set(chi))
            })?;
            let coeffs = e
                .basis
                .reduce_invariant(d, chi)
                .map_err(|e| e.to_string())?;
            for (i, c) in coeffs.iter().enumerate() {
                full = &full + &(&Poly::var(al, al.s(i)) * &w).scale(&(c * ratio(1, 2)));
            }
        }
        let mass = (0..d.n_lines()).fold(Poly::zero(al), |acc, j| {
            &acc + &(&Poly::var(al, j) * &Poly::var(al, al.z(j)))
        });
        full = &full - &(&sy.u * &mass);
        ensure(full == sy.q.poly, || {
            format!(
                "{}: unordered-partition Q differs from the half-weighted sum",
                e.name
            )
        })?;
        ensure(
            sy.q.poly.is_homogeneous(Block::Alpha) == Some(h + 1),
            || format!("{}: deg_alpha Q", e.name),
        )?;
        ensure(
            sy.q.poly.is_homogeneous(Block::Kinematic) == Some(1),
            || format!("{}: deg_(s,z) Q", e.name),
        )?;
    }
    // relations between invariants with four external vertices
    let d = build_ladder(1, 4).map_err(|e| e.to_string())?;
    let basis = ladder_basis(&d).map_err(|e| e.to_string())?;
    let subsets = all_proper_subsets(&d);
    let red = |chi| basis.reduce_invariant(&d, chi).unwrap();
    let mut relations = 0;
    for &chi in &subsets {
        ensure(red(chi) == red(basis.complement(chi)), || {
            "s(chi) != s(complement)".into()
        })?;
        relations += 1;
    }
    for &a in &subsets {
        for &b in &subsets {
            for &c in &subsets {
                let disjoint = a.0 & b.0 == 0 && a.0 & c.0 == 0 && b.0 & c.0 == 0;
                let union = feynpde::graph::VertexSet(a.0 | b.0 | c.0);
                if !disjoint || !subsets.contains(&union) {
                    continue;
                }
                let pair = |x: u64, y: u64| red(feynpde::graph::VertexSet(x | y));
                let rhs: Vec<Rational> = (0..basis.len())
                    .map(|i| {
                        pair(a.0, b.0)[i].clone() + &pair(a.0, c.0)[i] + &pair(b.0, c.0)[i]
                            - &red(a)[i]
                            - &red(b)[i]
                            - &red(c)[i]
                    })
                    .collect();
                ensure(red(union) == rhs, || "three-subset relation fails".into())?;
                relations += 1;
            }
        }
    }
    Ok(format!(
        "degrees, half-weighted Q and {relations} invariant relations hold"
    ))
}

fn random_lambdas(rng: &mut ChaCha8Rng, al: &std::sync::Arc<Alphabet>, degree: u32) -> Vec<Poly> {
    let n = al.n_alpha();
    let monos = monomials_of_degree(n, degree);
    (0..n)
        .map(|_| {
            let mut p = Poly::zero(al);
            for _ in 0..rng.gen_range(0..4) {
                let mut e = vec![0u16; al.len()];
                e[..n].copy_from_slice(&monos[rng.gen_range(0..monos.len())]);
                if rng.gen_bool(0.3) {
                    e[n + rng.gen_range(0..al.len() - n)] += 1;
                }
                let c = Rational::new(
                    rng.gen_range(-9i64..10).into(),
                    rng.gen_range(1i64..4).into(),
                );
                p = &p + &Poly::term(al, Monomial::from_exponents(e), c);
            }
            p
        })
        .collect()
}

fn criterion_3() -> Outcome {
    // Euler witness lambda_nu = alpha_nu / q
    for e in corpus() {
        let sy = Symanzik::new(&e.diagram, &e.basis).map_err(|e| e.to_string())?;
        let al = &sy.alphabet;
        let q = sy.q.degree as i64;
        let lambdas: Vec<Poly> = (0..al.n_alpha())
            .map(|v| Poly::var(al, v).scale(&ratio(1, q)))
            .collect();
        let cert = GriffithsCertificate::from_lambdas(lambdas, &sy.q_derivatives());
        ensure(cert.target == sy.q.poly, || {
            format!("{}: Euler witness", e.name)
        })?;
        ensure(
            cert.reduced == Poly::constant(al, ratio(al.n_alpha() as i64, q)),
            || format!("{}: Euler divergence", e.name),
        )?;
    }
    // Fermat control: J = (alpha_i^(q-1)) contains a monomial iff some
    // exponent reaches q-1; above the Macaulay threshold everything is in.
    let mut fermat = 0;
    for n_vars in 2..=3usize {
        for q in 2..=3u32 {
            let al = Alphabet::alpha_only(n_vars);
            let fq = (0..n_vars).fold(Poly::zero(&al), |acc, v| &acc + &Poly::var(&al, v).pow(q));
            let threshold = macaulay_threshold(&vec![q - 1; n_vars], n_vars as u32 - 1);
            for deg in (q - 1)..=(threshold.max(0) as u32 + 1) {
                for e in monomials_of_degree(n_vars, deg) {
                    let m = Poly::term(
                        &al,
                        Monomial::from_exponents(e.clone()),
                        Rational::from_integer(1.into()),
                    );
                    let member = ideal_membership(&m, &fq, false, 0)
                        .map_err(|e| e.to_string())?
                        .is_some();
                    let expected = e.iter().any(|&x| x as u32 >= q - 1);
                    ensure(member == expected, || {
                        format!("Fermat N={n_vars} q={q}: {e:?}")
                    })?;
                    if deg as i64 >= threshold {
                        ensure(member, || {
                            format!("Fermat N={n_vars} q={q}: {e:?} above threshold")
                        })?;
                    }
                    fermat += 1;
                }
            }
        }
    }
    // d phi expansion on random certificates
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut certs = 0;
    for e in corpus() {
        let sy = Symanzik::new(&e.diagram, &e.basis).map_err(|e| e.to_string())?;
        let al = &sy.alphabet;
        let (q, n) = (sy.q.degree, al.n_alpha() as u32);
        let k = (2..).find(|k| (k - 1) * q > n - 1).unwrap();
        let degree = (k - 1) * q - (n - 1);
        let dq = sy.q_derivatives();
        for _ in 0..20 {
            let lambdas = random_lambdas(&mut rng, al, degree);
            let cert = GriffithsCertificate::from_lambdas(lambdas, &dq);
            let report = expand_dphi(&cert, &sy.q.poly, k).map_err(|e| e.to_string())?;
            ensure(report.holds(), || {
                format!("{}: d phi residual nonzero", e.name)
            })?;
            let mut bad = cert.clone();
            let nu = rng.gen_range(0..al.n_alpha());
            let mut ex = vec![0u16; al.len()];
            ex[nu] = degree as u16;
            bad.lambdas[nu] =
                &bad.lambdas[nu] + &Poly::term(al, Monomial::from_exponents(ex), ratio(1, 1));
            let report = expand_dphi(&bad, &sy.q.poly, k).map_err(|e| e.to_string())?;
            ensure(!report.holds(), || {
                format!("{}: corrupted witness went unnoticed", e.name)
            })?;
            certs += 1;
        }
    }
    Ok(format!(
        "Euler witnesses, {fermat} Fermat monomials, {certs} random d phi expansions"
    ))
}

fn certify_all(
    d: &Diagram,
    basis: &InvariantBasis,
    pairs: &[OperatorPair],
    what: &str,
) -> Result<(), String> {
    let c = Certifier::new(d, basis).map_err(|e| e.to_string())?;
    for pair in pairs {
        match c.certify(pair).map_err(|e| e.to_string())? {
            Certification::Certified(cert) => {
                ensure(
                    cert.violations(c.symanzik().q_derivatives().as_slice(), true)
                        .is_empty(),
                    || {
                        format!(
                            "{what} {}: certificate re-expansion has a residual",
                            pair.label
                        )
                    },
                )?;
            }
            Certification::Failed(f) => {
                return Err(format!(
                    "{what} {}: {:?} residual {}",
                    pair.label, f.stage, f.residual
                ))
            }
        }
        let stored = pair
            .certificate
            .as_ref()
            .ok_or("pair without certificate")?;
        let problems = c
            .check_certificate(pair, stored)
            .map_err(|e| e.to_string())?;
        ensure(problems.is_empty(), || {
            format!("{what} {}: {}", pair.label, problems.join("; "))
        })?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut summary = Vec::new();
    for e in corpus().into_iter().filter(|e| e.name != "ladder h=3") {
        let pairs = theorem1_system(&e.diagram, &e.basis).map_err(|e| e.to_string())?;
        ensure(pairs.len() == e.diagram.n_lines(), || {
            format!("{}: pair count", e.name)
        })?;
        certify_all(&e.diagram, &e.basis, &pairs, e.name)?;
        summary.push(format!("{} {}", e.name, pairs.len()));
    }
    Ok(format!("line pairs certified: {}", summary.join(", ")))
}

fn criterion_5() -> Outcome {
    for h in 1..=3 {
        let d = build_ladder(h, 4).map_err(|e| e.to_string())?;
        let b = ladder_basis(&d).map_err(|e| e.to_string())?;
        let (ok, bad) = check_property_p(&d, &b).map_err(|e| e.to_string())?;
        ensure(ok, || format!("property P fails on ladder h={h}: {bad:?}"))?;
    }
    let mut summary = Vec::new();
    for e in corpus()
        .into_iter()
        .filter(|e| e.name == "box" || e.name == "double box")
    {
        let eligible = eligible_pairs(&e.diagram, &e.basis).map_err(|e| e.to_string())?;
        let pairs = theorem2_system(&e.diagram, &e.basis).map_err(|e| e.to_string())?;
        ensure(pairs.len() == eligible.len() && !pairs.is_empty(), || {
            format!("{}: pair count", e.name)
        })?;
        certify_all(&e.diagram, &e.basis, &pairs, e.name)?;
        summary.push(format!("{} {}", e.name, pairs.len()));
    }
    Ok(format!(
        "property P on ladders h=1..3; invariant pairs certified: {}",
        summary.join(", ")
    ))
}

fn criterion_6() -> Outcome {
    let e = corpus().into_iter().next().unwrap();
    let sys = derive_system(
        &e.diagram,
        &e.basis,
        2,
        &AnsatzDegrees::up_to(1),
        Exec::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(!sys.pairs.is_empty(), || "empty derivation".into())?;
    certify_all(&e.diagram, &e.basis, &sys.pairs, "derived")?;
    ensure(
        sys.pairs.len() == BUBBLE_DERIVED_PAIRS && sys.kernel_dimension == BUBBLE_DERIVED_KERNEL,
        || {
            format!(
            "pinned values changed: {} pairs (expected {BUBBLE_DERIVED_PAIRS}), kernel {} (expected {BUBBLE_DERIVED_KERNEL})",
            sys.pairs.len(),
            sys.kernel_dimension
        )
        },
    )?;
    let thm1 = theorem1_system(&e.diagram, &e.basis).map_err(|e| e.to_string())?;
    let mut all: Vec<&OperatorPair> = sys.pairs.iter().chain(&sys.tail_only).collect();
    all.extend(&thm1);
    let coords = pair_coordinates(&all);
    let (span, targets) = coords.split_at(coords.len() - thm1.len());
    for (t, pair) in targets.iter().zip(&thm1) {
        ensure(in_span(span, t), || {
            format!("{} is outside the derived span", pair.label)
        })?;
    }
    Ok(format!(
        "{} certified pairs from a kernel of dimension {} ({} unknowns); line pairs lie in their span",
        sys.pairs.len(),
        sys.kernel_dimension,
        sys.unknowns
    ))
}

fn criterion_7() -> Outcome {
    let mut e_iter = corpus().into_iter();
    let bubble_e = e_iter.next().unwrap();
    let triangle_e = e_iter.next().unwrap();

    let d = &bubble_e.diagram;
    let sy = Symanzik::new(d, &bubble_e.basis).map_err(|e| e.to_string())?;
    let regime = Regime::of(d).map_err(|e| e.to_string())?;
    let cfg = NumericConfig::new(point(&[-1], &[1, 1]));
    let ctx = NumericContext::new(&sy, &regime, &cfg).map_err(|e| e.to_string())?;
    let value = ctx.value().map_err(|e| e.to_string())?.value;
    let exact = bubble_closed_form();
    let rel = ((value - exact) / exact).abs();
    ensure(rel <= 1e-8, || format!("bubble quadrature off by {rel:e}"))?;

    let mut pairs = theorem1_system(d, &bubble_e.basis).map_err(|e| e.to_string())?;
    pairs.extend(theorem2_system(d, &bubble_e.basis).map_err(|e| e.to_string())?);
    // a derived row may have a tail that annihilates F by itself, so the
    // negated-tail control only applies to the closed-form pairs
    let closed_form = pairs.len();
    pairs.extend(
        derive_system(
            d,
            &bubble_e.basis,
            2,
            &AnsatzDegrees::up_to(1),
            Exec::default(),
        )
        .map_err(|e| e.to_string())?
        .pairs,
    );
    let mut worst: f64 = 0.0;
    let mut weakest_negative = f64::INFINITY;
    for (idx, pair) in pairs.iter().enumerate() {
        let r = ctx.residual(pair).map_err(|e| e.to_string())?.relative;
        ensure(r <= 1e-4, || {
            format!("bubble {}: residual {r:e}", pair.label)
        })?;
        worst = worst.max(r);
        if idx < closed_form && !pair.tail.is_zero() {
            let neg = ctx
                .residual(&flip_tail(pair))
                .map_err(|e| e.to_string())?
                .relative;
            ensure(neg >= 1e-1, || {
                format!("bubble {}: negated tail residual only {neg:e}", pair.label)
            })?;
            weakest_negative = weakest_negative.min(neg);
        }
    }
    let (fd, direct) = ctx
        .first_derivative(sy.alphabet.s(0))
        .map_err(|e| e.to_string())?;
    let drel = ((fd - direct) / direct).abs();
    ensure(drel <= 1e-6, || {
        format!("dF/ds1: difference {fd} vs quadrature {direct}")
    })?;

    let d = &triangle_e.diagram;
    let sy = Symanzik::new(d, &triangle_e.basis).map_err(|e| e.to_string())?;
    let regime = Regime::of(d).map_err(|e| e.to_string())?;
    let cfg = NumericConfig::new(triangle_point());
    let ctx = NumericContext::new(&sy, &regime, &cfg).map_err(|e| e.to_string())?;
    let mut tri_pairs = theorem1_system(d, &triangle_e.basis).map_err(|e| e.to_string())?;
    tri_pairs.extend(theorem2_system(d, &triangle_e.basis).map_err(|e| e.to_string())?);
    let mut tri_worst: f64 = 0.0;
    for pair in &tri_pairs {
        let r = ctx.residual(pair).map_err(|e| e.to_string())?.relative;
        ensure(r <= 1e-3, || {
            format!("triangle {}: residual {r:e}", pair.label)
        })?;
        tri_worst = tri_worst.max(r);
    }
    Ok(format!(
        "bubble F rel. error {rel:.1e}; {} bubble pairs max residual {worst:.1e}, negated tails >= {weakest_negative:.1e}; dF/ds1 paths agree to {drel:.1e}; {} triangle pairs max residual {tri_worst:.1e}",
        pairs.len(),
        tri_pairs.len()
    ))
}

/// Every artifact the suite writes, serialized.
fn artifacts(exec: Exec) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for e in corpus().into_iter().take(3) {
        let d = &e.diagram;
        let sy = Symanzik::new(d, &e.basis).map_err(|e| e.to_string())?;
        let regime = Regime::of(d).map_err(|e| e.to_string())?;
        let mut sets = vec![
            theorem1_system(d, &e.basis).map_err(|e| e.to_string())?,
            theorem2_system(d, &e.basis).map_err(|e| e.to_string())?,
        ];
        if e.name == "bubble" {
            sets.push(
                derive_system(d, &e.basis, 2, &AnsatzDegrees::up_to(1), exec)
                    .map_err(|e| e.to_string())?
                    .pairs,
            );
        }
        for pairs in sets {
            let file = OperatorFile::new(d, &e.basis, &sy, &regime, &pairs);
            let numeric = match e.name {
                "bubble" => Some(PointFile::from_point(&point(&[-1], &[1, 1]))),
                "triangle" => Some(PointFile::from_point(&triangle_point())),
                _ => None,
            };
            let report = verify_file(
                d,
                &e.basis,
                &file,
                false,
                numeric.as_ref().map(|p| (p, 1e-3, 32)),
            )
            .map_err(|f| f.message)?;
            out.push(file.to_json());
            out.push(serde_json::to_string_pretty(&report).unwrap());
        }
    }
    Ok(out)
}

fn criterion_8() -> Outcome {
    let first = artifacts(Exec::default())?;
    let second = artifacts(Exec::default())?;
    let sequential = artifacts(Exec::Sequential)?;
    ensure(first == second, || "two runs differ".into())?;
    ensure(first == sequential, || {
        "sequential and parallel runs differ".into()
    })?;
    let bytes: usize = first.iter().map(String::len).sum();
    Ok(format!(
        "{} artifacts ({bytes} bytes) byte-identical across runs and execution strategies",
        first.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        (
            "1 Symanzik oracle equivalence",
            criterion_1,
            Duration::from_secs(10),
        ),
        (
            "2 structural identities",
            criterion_2,
            Duration::from_secs(5),
        ),
        ("3 Griffiths layer", criterion_3, Duration::from_secs(30)),
        (
            "4 line-operator systems",
            criterion_4,
            Duration::from_secs(120),
        ),
        (
            "5 invariant-operator systems",
            criterion_5,
            Duration::from_secs(300),
        ),
        ("6 general derivation", criterion_6, Duration::from_secs(60)),
        (
            "7 numeric cross-check",
            criterion_7,
            Duration::from_secs(120),
        ),
        ("8 determinism", criterion_8, Duration::from_secs(300)),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(format!(
                "panicked: {:?}",
                p.downcast_ref::<String>()
                    .map(String::as_str)
                    .or(p.downcast_ref::<&str>().copied())
            ))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > limit => {
                Err(format!("{msg}; took {elapsed:.1?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
