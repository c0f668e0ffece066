//! Acceptance suite: one test per criterion, each printing a single
//! PASS line (visible with --nocapture) and failing loudly otherwise.
//! Runtime limits are asserted where the criterion states one.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;

use centw_core::brst::{self, Dressed};
use centw_core::miura;
use centw_core::pyramid::{GenIndex, Kind, Pyramid};
use centw_core::scalar::{alpha, form, Scalar};
use centw_core::statespace::{Algebra, Mode, Realization, State};
use centw_core::walgebra;

fn shape(lambdas: &[u32]) -> Pyramid {
    Pyramid::new(lambdas.to_vec()).unwrap()
}

/// The desk-scale suite of criterion 4; criteria 5, 7 and 10 reuse it.
fn suite() -> Vec<Pyramid> {
    [
        vec![1],
        vec![1, 1],
        vec![1, 2],
        vec![2, 2],
        vec![1, 1, 1],
        vec![1, 1, 2],
    ]
    .iter()
    .map(|l| shape(l))
    .collect()
}

fn fixture(name: &str) -> Value {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    serde_json::from_str(&text).unwrap()
}

/// Supercommutator of a mode against an already-bracketed sum of modes.
fn bracket_sum(
    alg: &Algebra,
    x: Mode,
    terms: &[(Mode, i64)],
) -> (BTreeMap<Mode, i64>, Scalar) {
    let mut modes = BTreeMap::new();
    let mut central = Scalar::zero();
    for &(t, c) in terms {
        let (inner, z) = alg.bracket(x, t);
        for (md, ic) in inner {
            let e = modes.entry(md).or_insert(0);
            *e += c * ic;
            if *e == 0 {
                modes.remove(&md);
            }
        }
        central = &central + &z.scale(&BigRational::from_integer(c.into()));
    }
    (modes, central)
}

#[test]
fn acceptance_01_structure_soundness() {
    let start = Instant::now();
    for p in [shape(&[1, 1]), shape(&[1, 2]), shape(&[2, 2]), shape(&[1, 1, 1])] {
        // Lie level: Jacobi and form invariance over every basis triple.
        let basis = p.basis_e();
        for x in &basis {
            for y in &basis {
                let xy = p.bracket_e(x, y);
                for z in &basis {
                    let yz = p.bracket_e(y, z);
                    let mut acc: BTreeMap<GenIndex, i64> = BTreeMap::new();
                    let mut push = |table: Vec<(GenIndex, i64)>, outer: i64| {
                        for (g, c) in table {
                            let e = acc.entry(g).or_insert(0);
                            *e += outer * c;
                            if *e == 0 {
                                acc.remove(&g);
                            }
                        }
                    };
                    for &(g, c) in &yz {
                        push(p.bracket_e(x, &g), c);
                    }
                    for &(g, c) in &xy {
                        push(p.bracket_e(&g, z), -c);
                    }
                    for (g, c) in p.bracket_e(x, z) {
                        push(p.bracket_e(y, &g), -c);
                    }
                    assert!(acc.is_empty(), "Jacobi fails at {x:?} {y:?} {z:?}");

                    let mut lhs = BigRational::zero();
                    for &(g, c) in &xy {
                        lhs += form(&p, &g, z) * BigRational::from_integer(c.into());
                    }
                    let mut rhs = BigRational::zero();
                    for &(g, c) in &yz {
                        rhs += form(&p, x, &g) * BigRational::from_integer(c.into());
                    }
                    assert_eq!(lhs, rhs, "form invariance fails at {x:?} {y:?} {z:?}");
                }
            }
        }

        // Mode level: super-Jacobi including fermions and central terms.
        for realization in [Realization::Full, Realization::Reduced] {
            let alg = Algebra::new(p.clone(), realization);
            let mut modes = vec![];
            let gens: Vec<GenIndex> = match realization {
                Realization::Full => p
                    .basis_e()
                    .into_iter()
                    .chain(p.basis_psi().into_iter().flat_map(|g| {
                        [g, GenIndex::new(Kind::PsiStar, g.i, g.j, g.r)]
                    }))
                    .collect(),
                Realization::Reduced => p
                    .basis_e_low()
                    .into_iter()
                    .chain(p.basis_psi().into_iter().map(|g| {
                        GenIndex::new(Kind::PsiStar, g.i, g.j, g.r)
                    }))
                    .collect(),
            };
            for g in gens {
                for m in [-1, 1] {
                    modes.push(Mode::new(g, m));
                }
            }
            for &x in &modes {
                for &y in &modes {
                    let (xy, _) = alg.bracket(x, y);
                    let sxy = if x.g.kind.is_odd() && y.g.kind.is_odd() { -1 } else { 1 };
                    for &z in &modes {
                        let (yz, _) = alg.bracket(y, z);
                        let (mut lhs_m, mut lhs_c) = bracket_sum(&alg, x, &yz);
                        let (rm, rc) = bracket_sum(&alg, z, &xy);
                        // subtracting [[x,y], z] adds (-1)^{|xy||z|} [z, [x,y]]
                        let sz = if z.g.kind.is_odd()
                            && (x.g.kind.is_odd() ^ y.g.kind.is_odd())
                        {
                            -1
                        } else {
                            1
                        };
                        for (md, c) in rm {
                            let e = lhs_m.entry(md).or_insert(0);
                            *e += sz * c;
                            if *e == 0 {
                                lhs_m.remove(&md);
                            }
                        }
                        lhs_c = &lhs_c + &rc.scale(&BigRational::from_integer(sz.into()));
                        let (ym, yc) = bracket_sum(&alg, y, &alg.bracket(x, z).0);
                        for (md, c) in ym {
                            let e = lhs_m.entry(md).or_insert(0);
                            *e -= sxy * c;
                            if *e == 0 {
                                lhs_m.remove(&md);
                            }
                        }
                        lhs_c = &lhs_c + &yc.scale(&BigRational::from_integer((-sxy).into()));
                        assert!(
                            lhs_m.is_empty() && lhs_c.is_zero(),
                            "super-Jacobi fails at {x} {y} {z} ({realization:?})"
                        );
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "criterion 1 overran: {elapsed:?}");
    println!("criterion 01 PASS: super-Jacobi and form invariance, exact, in {elapsed:.2?}");
}

#[test]
fn acceptance_02_differential_squares() {
    let start = Instant::now();
    for lambdas in [vec![1, 1], vec![1, 2]] {
        let rep = brst::verify_lemma("2.1", &shape(&lambdas), 3);
        assert_eq!(rep["status"], "pass", "{rep}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "criterion 2 overran: {elapsed:?}");
    println!("criterion 02 PASS: d_st^2 = chi^2 = d_st chi + chi d_st = 0 in {elapsed:.2?}");
}

#[test]
fn acceptance_03_operator_identity_sweeps() {
    let start = Instant::now();
    for which in ["3.2i", "3.2ii", "3.3", "3.4"] {
        for lambdas in [vec![1, 1], vec![1, 2]] {
            let rep = brst::verify_lemma(which, &shape(&lambdas), 3);
            assert_eq!(rep["status"], "pass", "{which} on {lambdas:?}: {rep}");
        }
    }

    // The shifted level k + N must appear verbatim as the factor of the
    // central term in the dressed commutator.
    for lambdas in [vec![1u32, 1], vec![1, 2]] {
        let p = shape(&lambdas);
        let alg = Algebra::new(p.clone(), Realization::Full);
        let n = p.rows() as u32;
        let dl = Dressed { i: n, j: n, r: 0 };
        let commutator = brst::dressed_apply(
            &alg,
            dl,
            1,
            &brst::dressed_apply(&alg, dl, -1, &State::vacuum()),
        );
        let diag = GenIndex::new(Kind::E, n, n, 0);
        let shifted = &Scalar::k() + &Scalar::from_int(p.size() as i64);
        let mut expected = State::vacuum();
        expected.scale_scalar(&shifted.scale(&form(&p, &diag, &diag)));
        assert_eq!(commutator, expected, "central factor for {lambdas:?}");
    }
    let elapsed = start.elapsed();
    println!("criterion 03 PASS: dressed-field identity sweeps with the k+N central factor in {elapsed:.2?}");
}

#[test]
fn acceptance_04_generators_close() {
    for p in suite() {
        let start = Instant::now();
        let rep = walgebra::certify_generators(&p);
        assert_eq!(rep["status"], "pass", "{:?}: {rep}", p.lambdas());
        assert_eq!(
            rep["generators"].as_u64().unwrap(),
            p.size() as u64,
            "{:?}: generator count",
            p.lambdas()
        );
        let elapsed = start.elapsed();
        assert!(elapsed < Duration::from_secs(300), "criterion 4 overran on {:?}: {elapsed:?}", p.lambdas());
    }
    println!("criterion 04 PASS: d(w) = 0 symbolically with N generators per shape");
}

#[test]
fn acceptance_05_leading_terms() {
    for p in suite() {
        let alg = Algebra::new(p.clone(), Realization::Full);
        let table = walgebra::generator_table(&alg);
        for (&(l, r), w) in &table {
            let lo = *walgebra::admissible_window(&p, l).start();
            let lead = walgebra::lowest_skew_component(w);
            let field = brst::p_field(&p, l, r - lo, -1).unwrap();
            let expected = field.apply(&alg, &State::vacuum());
            assert_eq!(lead, expected, "{:?} w[{l},{r}]", p.lambdas());
        }
    }
    println!("criterion 05 PASS: lowest skew components equal the staircase fields");
}

#[test]
fn acceptance_06_character_series() {
    let mut shapes = suite();
    shapes.push(shape(&[2, 3, 4]));
    for p in shapes {
        assert_eq!(
            walgebra::hilbert_series(&p, 6),
            walgebra::generator_monomial_counts(&p, 6),
            "{:?}",
            p.lambdas()
        );
    }
    println!("criterion 06 PASS: product character equals the monomial tally to q^6");
}

#[test]
fn acceptance_07_miura_and_rank() {
    let start = Instant::now();
    for p in suite() {
        let rep = miura::verify_miura(&p);
        assert_eq!(rep["status"], "pass", "{:?}: {rep}", p.lambdas());
    }
    for (lambdas, cap) in [(vec![1], 4), (vec![1, 1], 4), (vec![1, 2], 3)] {
        let p = shape(&lambdas);
        let rep = miura::injectivity_rank(&p, cap);
        assert_eq!(rep["status"], "pass", "{lambdas:?}: {rep}");
        let expected: u64 = walgebra::generator_monomial_counts(&p, cap as usize).iter().sum();
        assert_eq!(rep["rank"].as_u64().unwrap(), expected, "{lambdas:?}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "criterion 7 overran: {elapsed:?}");
    println!("criterion 07 PASS: Miura images match and have full rank in {elapsed:.2?}");
}

#[test]
fn acceptance_08_critical_commutativity() {
    let start = Instant::now();
    for lambdas in [vec![1, 1], vec![1, 2]] {
        let rep = miura::critical_commutativity(&shape(&lambdas));
        assert_eq!(rep["status"], "pass", "{lambdas:?}: {rep}");
        assert!(rep["witness"].is_string(), "no generic-level witness: {rep}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "criterion 8 overran: {elapsed:?}");
    println!("criterion 08 PASS: critical-level products vanish, generic level does not, in {elapsed:.2?}");
}

#[test]
fn acceptance_09_ones_shape_regression() {
    // Symbolic: every alpha_i equals k + n - 1 on the single-column shapes.
    for n in 2..=5u32 {
        let p = shape(&vec![1; n as usize]);
        let expected = &Scalar::k() + &Scalar::from_int(n as i64 - 1);
        for i in 1..=p.rows() {
            assert_eq!(alpha(&p, i), expected, "alpha_{i} for n={n}");
        }
    }

    // Frozen alpha table across shapes.
    let table = fixture("alpha_values.json");
    for case in table["cases"].as_array().unwrap() {
        let lambdas: Vec<u32> = case["pyramid"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as u32)
            .collect();
        let p = shape(&lambdas);
        for (i, want) in case["alpha"].as_array().unwrap().iter().enumerate() {
            let want = Scalar::from_json(want).unwrap();
            assert_eq!(alpha(&p, i + 1), want, "alpha_{} of {lambdas:?}", i + 1);
        }
    }

    // Hand-expanded determinants, frozen before the engine existed.
    for name in ["e0_n2_generators.json", "e0_n3_generators.json"] {
        let fix = fixture(name);
        let lambdas: Vec<u32> = fix["pyramid"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as u32)
            .collect();
        let p = shape(&lambdas);
        for (i, want) in fix["alpha"].as_array().unwrap().iter().enumerate() {
            assert_eq!(alpha(&p, i + 1), Scalar::from_json(want).unwrap());
        }
        let alg = Algebra::new(p.clone(), Realization::Reduced);
        let table = walgebra::cdet_expand(&alg);
        let entries = fix["generators"].as_array().unwrap();
        for entry in entries {
            let l = entry["l"].as_u64().unwrap() as usize;
            let r = entry["r"].as_u64().unwrap() as u32;
            let want = State::from_json(&entry["state"]).unwrap();
            assert_eq!(table[&(l, r)], want, "{name} w[{l},{r}]");
        }
        assert_eq!(table.len(), entries.len(), "{name} coefficient count");
    }
    println!("criterion 09 PASS: single-column alphas and frozen determinant fixtures match");
}

#[test]
fn acceptance_10_determinant_readings_agree() {
    for p in suite() {
        let alg = Algebra::new(p.clone(), Realization::Reduced);
        assert_eq!(
            walgebra::cdet_expand(&alg),
            walgebra::rdet_expand(&alg),
            "{:?} reduced",
            p.lambdas()
        );
    }
    for lambdas in [vec![1, 1], vec![1, 2]] {
        let alg = Algebra::new(shape(&lambdas), Realization::Full);
        assert_eq!(walgebra::cdet_expand(&alg), walgebra::rdet_expand(&alg), "{lambdas:?} full");
    }
    println!("criterion 10 PASS: column and row determinant expansions agree on the vacuum");
}
