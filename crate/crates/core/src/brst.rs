//! The differential of the complex, the dressed fields it straightens, the
//! composite staircase fields built from them, and the identity sweeps that
//! certify the whole relation table by operator action at desk scale.
//!
//! The differential and the sweeps work in the full realization. Dressed
//! modes also apply in the reduced realization, where a dressed label is a
//! plain generator; this is what lets the determinant machinery run over
//! either backend unchanged.
//!
//! Every infinite mode sum below is truncated to a finite window before it
//! is applied. The windows are exact: a factor with mode index above the
//! annihilation bound of its argument acts as zero, and whenever a window
//! needs the bound of the *other* factor the two factors either commute or
//! anticommute exactly (their labels differ), so the hop is legitimate.

use crate::pyramid::{GenIndex, Kind, Pyramid};
use crate::scalar::{alpha, form, Scalar};
use crate::statespace::{Algebra, Mode, Monomial, Realization, State};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

/// Index triple rejected by a composite-field constructor.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("inadmissible index: {0}")]
pub struct InadmissibleIndex(pub String);

/// Mode window for operator-identity sweeps: each operator index runs over
/// this symmetric range, wide enough to hit every central term at m = -p.
const OP_MODE_MIN: i32 = -2;
const OP_MODE_MAX: i32 = 2;

/// Identity-set tags the verifier knows; stable tokens used in reports and
/// on the command line. "2.1" covers the differential squaring to zero in
/// both parts, "3.2i" and "3.2ii" the commutation table of dressed modes
/// against the free fields and each other, "3.3" the straightening
/// relations of both parts of the differential against every dressed and
/// free label, and "3.4" the staircase fields against the constant part of
/// the differential.
pub const LEMMA_IDS: [&str; 5] = ["2.1", "3.2i", "3.2ii", "3.3", "3.4"];

/// The quadratic-plus-cubic part of the differential, as a direct mode sum
/// truncated to the window that can act nonzero on `v`.
///
/// Quadratic part: sum over i < j, admissible a, and modes m of
/// E^(a)_ij[-m] psi*^(a)_ij[m]. Cubic part: minus the sum over i < j < h,
/// admissible a, b, and mode pairs (m, q) of
/// psi*^(a)_ij[m] psi*^(b)_jh[q] psi^(a+b)_ih[-m-q]. The three fermion
/// labels of a cubic summand are pairwise distinct, so the product needs no
/// normal-ordering correction; the triple loop asserts this.
pub fn d_st(alg: &Algebra, v: &State) -> State {
    if v.is_zero() {
        return State::zero();
    }
    let p = alg.pyramid();
    let n = p.rows();
    let b = v.annihilation_bound();
    let mut out = State::zero();
    for i in 1..=n {
        for j in (i + 1)..=n {
            let (lo, hi) = p.psi_window(i, j);
            for a in lo..=hi {
                let ge = GenIndex::new(Kind::E, i as u32, j as u32, a);
                let gs = GenIndex::new(Kind::PsiStar, i as u32, j as u32, a);
                for m in -b..=b {
                    let w = alg.apply_gen(gs, m, v);
                    if !w.is_zero() {
                        out += alg.apply_gen(ge, -m, &w);
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            for h in (j + 1)..=n {
                debug_assert!((i, j) != (j, h) && (j, h) != (i, h) && (i, j) != (i, h));
                let (alo, ahi) = p.psi_window(i, j);
                let (blo, bhi) = p.psi_window(j, h);
                for a in alo..=ahi {
                    for bb in blo..=bhi {
                        let Some(gm) =
                            p.gen_or_zero(Kind::Psi, i as i64, h as i64, (a + bb) as i64)
                        else {
                            continue;
                        };
                        let g1 = GenIndex::new(Kind::PsiStar, i as u32, j as u32, a);
                        let g2 = GenIndex::new(Kind::PsiStar, j as u32, h as u32, bb);
                        for m in (-2 * b)..=b {
                            for q in (-b - m)..=b {
                                let w1 = alg.apply_gen(gm, -m - q, v);
                                if w1.is_zero() {
                                    continue;
                                }
                                let w2 = alg.apply_gen(g2, q, &w1);
                                if w2.is_zero() {
                                    continue;
                                }
                                out -= &alg.apply_gen(g1, m, &w2);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// The odd constant part of the differential: the sum over consecutive rows
/// of psi*^(lambda_{i+1}-1)_{i,i+1}[1].
pub fn chi_op(alg: &Algebra, v: &State) -> State {
    let p = alg.pyramid();
    let mut out = State::zero();
    for i in 1..p.rows() {
        let g = GenIndex::new(Kind::PsiStar, i as u32, (i + 1) as u32, p.lambda(i + 1) - 1);
        out += alg.apply_gen(g, 1, v);
    }
    out
}

/// The full differential: raises charge by exactly one and preserves the
/// conformal degree.
pub fn d(alg: &Algebra, v: &State) -> State {
    let mut out = d_st(alg, v);
    out += chi_op(alg, v);
    out
}

/// A dressed generator label e^(r)_ij: the full shift window 0 <= r <
/// lambda_j for i >= j, the fermionic window for the raised labels i < j.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Dressed {
    pub i: u32,
    pub j: u32,
    pub r: u32,
}

impl Dressed {
    /// The label, or None when the indices fall outside the window; callers
    /// treat None as the zero field.
    pub fn checked(p: &Pyramid, i: i64, j: i64, r: i64) -> Option<Dressed> {
        let kind = if i >= j { Kind::ELow } else { Kind::Psi };
        p.gen_or_zero(kind, i, j, r)
            .map(|g| Dressed { i: g.i, j: g.j, r: g.r })
    }
}

impl std::fmt::Display for Dressed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e[{},{},{}]", self.i, self.j, self.r)
    }
}

/// Apply the m-th mode of the dressed field e^(r)_ij to `v`.
///
/// In the reduced realization the dressed label is a generator. In the full
/// realization it expands to
///   E^(r)_ij[m] + sum_{h > max(i,j)} sum_a :psi^(a)_ih psi*^(a-r)_jh:[m]
///               - sum_{h < min(i,j)} sum_a :psi^(a)_hj psi*^(a-r)_hi:[m],
/// with the normal ordering split on the creation part of psi. Only the
/// diagonal labels at r = 0 actually contain a self-paired bilinear; for
/// all other labels the colons are the plain product.
pub fn dressed_apply(alg: &Algebra, dl: Dressed, m: i32, v: &State) -> State {
    debug_assert!(
        Dressed::checked(alg.pyramid(), dl.i as i64, dl.j as i64, dl.r as i64).is_some(),
        "inadmissible dressed label {dl}"
    );
    if v.is_zero() {
        return State::zero();
    }
    if alg.realization() == Realization::Reduced {
        debug_assert!(dl.i >= dl.j, "raised labels have no reduced counterpart");
        return alg.apply_gen(GenIndex::new(Kind::ELow, dl.i, dl.j, dl.r), m, v);
    }
    let p = alg.pyramid();
    let (i, j, r) = (dl.i as i64, dl.j as i64, dl.r as i64);
    let mut out = match p.gen_or_zero(Kind::E, i, j, r) {
        Some(g) => alg.apply_gen(g, m, v),
        None => State::zero(),
    };
    let n = p.rows() as i64;
    for h in (i.max(j) + 1)..=n {
        let (lo, hi) = p.psi_window(i as usize, h as usize);
        for a in (lo as i64)..=(hi as i64) {
            let (Some(gp), Some(gs)) = (
                p.gen_or_zero(Kind::Psi, i, h, a),
                p.gen_or_zero(Kind::PsiStar, j, h, a - r),
            ) else {
                continue;
            };
            out += no_psi_psistar(alg, gp, gs, m, v);
        }
    }
    for h in 1..i.min(j) {
        let (lo, hi) = p.psi_window(h as usize, j as usize);
        for a in (lo as i64)..=(hi as i64) {
            let (Some(gp), Some(gs)) = (
                p.gen_or_zero(Kind::Psi, h, j, a),
                p.gen_or_zero(Kind::PsiStar, h, i, a - r),
            ) else {
                continue;
            };
            out -= &no_psi_psistar(alg, gp, gs, m, v);
        }
    }
    out
}

/// :psi(z) psi*(z):[m] v, the product read in the z^{-m-1} convention and
/// split on the creation part of psi:
/// sum_{t <= -1} psi[t] psi*[m-t] v - sum_{t >= 0} psi*[m-t] psi[t] v.
fn no_psi_psistar(alg: &Algebra, gp: GenIndex, gs: GenIndex, m: i32, v: &State) -> State {
    debug_assert!(!v.is_zero());
    let b = v.annihilation_bound();
    let mut out = State::zero();
    for t in (m - b)..=-1 {
        let w = alg.apply_gen(gs, m - t, v);
        if !w.is_zero() {
            out += alg.apply_gen(gp, t, &w);
        }
    }
    for t in 0..=b {
        let w = alg.apply_gen(gp, t, v);
        if !w.is_zero() {
            out -= &alg.apply_gen(gs, m - t, &w);
        }
    }
    out
}

/// :A(z) psi*(z):[m] v with A a dressed field; split on A's creation modes:
/// sum_{t <= -1} A[t] psi*[m-t] v + sum_{t >= 0} psi*[m-t] A[t] v
/// (A is even, so no sign on the swapped half).
fn no_dressed_psistar(alg: &Algebra, dl: Dressed, gs: GenIndex, m: i32, v: &State) -> State {
    if v.is_zero() {
        return State::zero();
    }
    let b = v.annihilation_bound();
    let mut out = State::zero();
    for t in (m - b)..=-1 {
        let w = alg.apply_gen(gs, m - t, v);
        if !w.is_zero() {
            out += dressed_apply(alg, dl, t, &w);
        }
    }
    for t in 0..=b {
        let w = dressed_apply(alg, dl, t, v);
        if !w.is_zero() {
            out += alg.apply_gen(gs, m - t, &w);
        }
    }
    out
}

/// :psi*(z) A(z):[m] v with A a dressed field; split on psi*'s creation
/// modes: sum_{t <= 0} psi*[t] A[m-t] v + sum_{t >= 1} A[m-t] psi*[t] v.
fn no_psistar_dressed(alg: &Algebra, gs: GenIndex, dl: Dressed, m: i32, v: &State) -> State {
    if v.is_zero() {
        return State::zero();
    }
    let b = v.annihilation_bound();
    let mut out = State::zero();
    for t in (m - b)..=0 {
        let w = dressed_apply(alg, dl, m - t, v);
        if !w.is_zero() {
            out += alg.apply_gen(gs, t, &w);
        }
    }
    for t in 1..=b {
        let w = alg.apply_gen(gs, t, v);
        if !w.is_zero() {
            out += dressed_apply(alg, dl, m - t, &w);
        }
    }
    out
}

/// A finite sum of dressed modes: the realized form of every composite
/// field in this module. Pure and immutable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndoOp {
    terms: Vec<(Dressed, i32)>,
}

impl EndoOp {
    pub fn terms(&self) -> &[(Dressed, i32)] {
        &self.terms
    }

    pub fn apply(&self, alg: &Algebra, v: &State) -> State {
        let mut out = State::zero();
        for &(dl, m) in &self.terms {
            out += dressed_apply(alg, dl, m, v);
        }
        out
    }
}

/// The single dressed mode e^(r)_ij[m] as an operator. The label kind
/// encodes the window: ELow for i >= j, Psi for the raised labels i < j.
pub fn dressed_mode(p: &Pyramid, g: GenIndex, m: i32) -> Result<EndoOp, InadmissibleIndex> {
    if !matches!(g.kind, Kind::ELow | Kind::Psi) || !p.admissible(&g) {
        return Err(InadmissibleIndex(format!(
            "dressed label {}[{},{},{}]",
            g.kind.text(),
            g.i,
            g.j,
            g.r
        )));
    }
    Ok(EndoOp { terms: vec![(Dressed { i: g.i, j: g.j, r: g.r }, m)] })
}

/// P^(r)_l[m], the staircase sum along an antidiagonal:
/// sum_{t=0}^{n-l} e^(rho_t)_{n-t, n-l+1-t}[m] with
/// rho_t = r + sum_{s=1}^{t} (lambda_{n-s+1} - lambda_{n-l+2-s}).
/// Summands whose shift leaves the window are zero and are dropped.
pub fn p_field(p: &Pyramid, l: usize, r: u32, m: i32) -> Result<EndoOp, InadmissibleIndex> {
    let n = p.rows();
    if l < 1 || l > n || r >= p.lambda(n - l + 1) {
        return Err(InadmissibleIndex(format!("staircase field P l={l} r={r}")));
    }
    let mut terms = Vec::new();
    let mut rho = r as i64;
    for t in 0..=(n - l) {
        if t > 0 {
            rho += p.lambda(n - t + 1) as i64 - p.lambda(n - l + 2 - t) as i64;
        }
        if let Some(dl) = Dressed::checked(p, (n - t) as i64, (n - l + 1 - t) as i64, rho) {
            terms.push((dl, m));
        }
    }
    Ok(EndoOp { terms })
}

/// I^(r)_ij[m] for i < j, the companion staircase through the raised part:
/// sum_{h=1}^{i} e^(rho_h)_{j-h, i-h+1}[m] with
/// rho_h = r + sum_{s=1}^{h-1} (lambda_{j-s} - lambda_{i-s+1}).
/// Summands whose shift leaves the window are zero and are dropped.
pub fn i_field(p: &Pyramid, i: u32, j: u32, r: u32, m: i32) -> Result<EndoOp, InadmissibleIndex> {
    let n = p.rows() as u32;
    if i < 1 || i >= j || j > n || r >= p.lambda(i as usize) {
        return Err(InadmissibleIndex(format!("staircase field I i={i} j={j} r={r}")));
    }
    let mut terms = Vec::new();
    let mut rho = r as i64;
    for h in 1..=(i as i64) {
        if h > 1 {
            let s = h - 1;
            rho += p.lambda((j as i64 - s) as usize) as i64
                - p.lambda((i as i64 - s + 1) as usize) as i64;
        }
        if let Some(dl) = Dressed::checked(p, j as i64 - h, i as i64 - h + 1, rho) {
            terms.push((dl, m));
        }
    }
    Ok(EndoOp { terms })
}

/// Every PBW basis state of the realization with conformal degree at most
/// `degree_cap`, depth (minus the mode sum) at most `depth_cap`, and
/// absolute charge at most `charge_cap`.
///
/// The enumeration is finite: every mode costs depth except psi* at mode 0,
/// which is odd and cannot repeat. Conformal degree is not monotone under
/// adding modes (lowering labels can have negative degree), so the degree
/// and charge caps are filters on the complete depth-bounded enumeration
/// rather than pruning rules.
pub fn sweep_states(alg: &Algebra, degree_cap: i32, depth_cap: i32, charge_cap: i32) -> Vec<State> {
    let p = alg.pyramid();
    let mut gens: Vec<GenIndex> = Vec::new();
    match alg.realization() {
        Realization::Full => {
            gens.extend(p.basis_e());
            gens.extend(p.basis_psi());
            gens.extend(
                p.basis_psi().into_iter().map(|g| GenIndex { kind: Kind::PsiStar, ..g }),
            );
        }
        Realization::Reduced => {
            gens.extend(p.basis_e_low());
            gens.extend(
                p.basis_psi().into_iter().map(|g| GenIndex { kind: Kind::PsiStar, ..g }),
            );
        }
    }
    let mut pool: Vec<Mode> = Vec::new();
    for g in gens {
        for m in -depth_cap..=0 {
            let md = Mode::new(g, m);
            if md.is_creator() {
                pool.push(md);
            }
        }
    }
    pool.sort();
    let mut monos = Vec::new();
    let mut current = Vec::new();
    enumerate_monomials(&pool, 0, depth_cap, &mut current, &mut monos);
    monos
        .into_iter()
        .filter(|mono: &Monomial| {
            mono.deg_conformal() <= degree_cap && mono.charge().abs() <= charge_cap
        })
        .map(|mono| State::single(mono, Scalar::one()))
        .collect()
}

fn enumerate_monomials(
    pool: &[Mode],
    idx: usize,
    depth_left: i32,
    current: &mut Vec<Mode>,
    out: &mut Vec<Monomial>,
) {
    let Some(&md) = pool.get(idx) else {
        out.push(Monomial::new(current.clone()));
        return;
    };
    enumerate_monomials(pool, idx + 1, depth_left, current, out);
    let cost = -md.m;
    // Even kinds create strictly below mode 0, so only odd modes can be
    // free; that is what keeps the enumeration finite.
    debug_assert!(cost >= 1 || md.g.kind.is_odd());
    let by_depth = if cost == 0 { i32::MAX } else { depth_left / cost };
    let max_copies = if md.g.kind.is_odd() { by_depth.min(1) } else { by_depth };
    let base = current.len();
    for copies in 1..=max_copies {
        current.push(md);
        enumerate_monomials(pool, idx + 1, depth_left - copies * cost, current, out);
    }
    current.truncate(base);
}

/// One failed identity instance: which identity, on which state, and the
/// exact difference of the two sides.
struct Failure {
    identity: String,
    state: String,
    difference: String,
}

fn first_mismatch(
    states: &[State],
    name: impl Fn() -> String,
    lhs: impl Fn(&State) -> State,
    rhs: impl Fn(&State) -> State,
) -> Option<Failure> {
    for v in states {
        let l = lhs(v);
        let r = rhs(v);
        if l != r {
            let mut diff = l;
            diff -= &r;
            return Some(Failure {
                identity: name(),
                state: v.to_string(),
                difference: diff.to_string(),
            });
        }
    }
    None
}

macro_rules! check {
    ($states:expr, $name:expr, $lhs:expr, $rhs:expr) => {
        if let Some(f) = first_mismatch($states, $name, $lhs, $rhs) {
            return Some(f);
        }
    };
}

/// Verify one identity set by operator action on every sweep state of the
/// pyramid, with the sweep capped at `degree_cap` in conformal degree and
/// depth and at charge 2 in absolute charge. Returns a JSON report
/// {lemma, pyramid, cap, status, counterexample?}; a failed identity is
/// reported, never raised.
///
/// Panics on an unknown tag; the valid tags are `LEMMA_IDS`.
pub fn verify_lemma(which: &str, p: &Pyramid, degree_cap: i32) -> Value {
    let alg = Algebra::new(p.clone(), Realization::Full);
    let states = sweep_states(&alg, degree_cap, degree_cap, 2);
    let failure = match which {
        "2.1" => verify_differential_squares(&alg, &states),
        "3.2i" => verify_dressed_table_lower(&alg, &states),
        "3.2ii" => verify_dressed_table_raised(&alg, &states),
        "3.3" => verify_straightening(&alg, &states),
        "3.4" => verify_staircase(&alg, &states),
        other => panic!("unknown identity set {other:?}; valid: {LEMMA_IDS:?}"),
    };
    match failure {
        None => json!({
            "lemma": which,
            "pyramid": p.to_json(),
            "cap": degree_cap,
            "status": "pass",
        }),
        Some(f) => json!({
            "lemma": which,
            "pyramid": p.to_json(),
            "cap": degree_cap,
            "status": "fail",
            "counterexample": {
                "identity": f.identity,
                "state": f.state,
                "difference": f.difference,
            },
        }),
    }
}

/// d_st^2 = 0, chi^2 = 0, and d_st chi + chi d_st = 0 on every sweep state.
fn verify_differential_squares(alg: &Algebra, states: &[State]) -> Option<Failure> {
    check!(states, || "d_st d_st".into(), |v| d_st(alg, &d_st(alg, v)), |_| State::zero());
    check!(states, || "chi chi".into(), |v| chi_op(alg, &chi_op(alg, v)), |_| State::zero());
    check!(
        states,
        || "d_st chi + chi d_st".into(),
        |v| {
            let mut out = d_st(alg, &chi_op(alg, v));
            out += chi_op(alg, &d_st(alg, v));
            out
        },
        |_| State::zero()
    );
    None
}

/// Commutators of lower dressed modes against psi* modes and against each
/// other, including the shifted-level central term.
fn verify_dressed_table_lower(alg: &Algebra, states: &[State]) -> Option<Failure> {
    let p = alg.pyramid();
    let n = p.rows();
    let shift = &Scalar::k() + &Scalar::from_int(p.size() as i64);
    for i in 1..=n {
        for j in 1..=i {
            for r in 0..p.lambda(j) {
                let el = Dressed { i: i as u32, j: j as u32, r };
                for h in 1..=n {
                    for l in (h + 1)..=n {
                        let (slo, shi) = p.psi_window(h, l);
                        for s in slo..=shi {
                            let gs = GenIndex::new(Kind::PsiStar, h as u32, l as u32, s);
                            for m in OP_MODE_MIN..=OP_MODE_MAX {
                                for q in OP_MODE_MIN..=OP_MODE_MAX {
                                    check!(
                                        states,
                                        || format!("[{el}[{m}], psi*[{h},{l},{s};{q}]]"),
                                        |v| {
                                            let mut out = dressed_apply(
                                                alg,
                                                el,
                                                m,
                                                &alg.apply_gen(gs, q, v),
                                            );
                                            out -= &alg.apply_gen(
                                                gs,
                                                q,
                                                &dressed_apply(alg, el, m, v),
                                            );
                                            out
                                        },
                                        |v| {
                                            let mut out = State::zero();
                                            if l == j {
                                                if let Some(g) = p.gen_or_zero(
                                                    Kind::PsiStar,
                                                    h as i64,
                                                    i as i64,
                                                    s as i64 - r as i64,
                                                ) {
                                                    out += alg.apply_gen(g, m + q, v);
                                                }
                                            }
                                            if h == i {
                                                if let Some(g) = p.gen_or_zero(
                                                    Kind::PsiStar,
                                                    j as i64,
                                                    l as i64,
                                                    s as i64 - r as i64,
                                                ) {
                                                    out -= &alg.apply_gen(g, m + q, v);
                                                }
                                            }
                                            out
                                        }
                                    );
                                }
                            }
                        }
                    }
                }
                for h in 1..=n {
                    for l in 1..=h {
                        for s in 0..p.lambda(l) {
                            let e2 = Dressed { i: h as u32, j: l as u32, r: s };
                            for m in OP_MODE_MIN..=OP_MODE_MAX {
                                for q in OP_MODE_MIN..=OP_MODE_MAX {
                                    check!(
                                        states,
                                        || format!("[{el}[{m}], {e2}[{q}]]"),
                                        |v| {
                                            let mut out = dressed_apply(
                                                alg,
                                                el,
                                                m,
                                                &dressed_apply(alg, e2, q, v),
                                            );
                                            out -= &dressed_apply(
                                                alg,
                                                e2,
                                                q,
                                                &dressed_apply(alg, el, m, v),
                                            );
                                            out
                                        },
                                        |v| {
                                            let mut out = State::zero();
                                            if h == j {
                                                if let Some(dl) = Dressed::checked(
                                                    p,
                                                    i as i64,
                                                    l as i64,
                                                    r as i64 + s as i64,
                                                ) {
                                                    out += dressed_apply(alg, dl, m + q, v);
                                                }
                                            }
                                            if i == l {
                                                if let Some(dl) = Dressed::checked(
                                                    p,
                                                    h as i64,
                                                    j as i64,
                                                    r as i64 + s as i64,
                                                ) {
                                                    out -= &dressed_apply(alg, dl, m + q, v);
                                                }
                                            }
                                            if m == -q && m != 0 {
                                                let f = form(
                                                    p,
                                                    &GenIndex::new(
                                                        Kind::E, i as u32, j as u32, r,
                                                    ),
                                                    &GenIndex::new(
                                                        Kind::E, h as u32, l as u32, s,
                                                    ),
                                                );
                                                if !f.is_zero() {
                                                    let c = shift.scale(
                                                        &(f * BigRational::from(BigInt::from(m))),
                                                    );
                                                    let mut cv = v.clone();
                                                    cv.scale_scalar(&c);
                                                    out += cv;
                                                }
                                            }
                                            out
                                        }
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Commutators of raised dressed modes against psi modes and against each
/// other; no central terms arise.
fn verify_dressed_table_raised(alg: &Algebra, states: &[State]) -> Option<Failure> {
    let p = alg.pyramid();
    let n = p.rows();
    for i in 1..=n {
        for j in (i + 1)..=n {
            let (rlo, rhi) = p.psi_window(i, j);
            for r in rlo..=rhi {
                let el = Dressed { i: i as u32, j: j as u32, r };
                for h in 1..=n {
                    for l in (h + 1)..=n {
                        let (slo, shi) = p.psi_window(h, l);
                        for s in slo..=shi {
                            let gp = GenIndex::new(Kind::Psi, h as u32, l as u32, s);
                            let e2 = Dressed { i: h as u32, j: l as u32, r: s };
                            for m in OP_MODE_MIN..=OP_MODE_MAX {
                                for q in OP_MODE_MIN..=OP_MODE_MAX {
                                    check!(
                                        states,
                                        || format!("[{el}[{m}], psi[{h},{l},{s};{q}]]"),
                                        |v| {
                                            let mut out = dressed_apply(
                                                alg,
                                                el,
                                                m,
                                                &alg.apply_gen(gp, q, v),
                                            );
                                            out -= &alg.apply_gen(
                                                gp,
                                                q,
                                                &dressed_apply(alg, el, m, v),
                                            );
                                            out
                                        },
                                        |v| {
                                            let mut out = State::zero();
                                            if h == j {
                                                if let Some(g) = p.gen_or_zero(
                                                    Kind::Psi,
                                                    i as i64,
                                                    l as i64,
                                                    r as i64 + s as i64,
                                                ) {
                                                    out += alg.apply_gen(g, m + q, v);
                                                }
                                            }
                                            if i == l {
                                                if let Some(g) = p.gen_or_zero(
                                                    Kind::Psi,
                                                    h as i64,
                                                    j as i64,
                                                    r as i64 + s as i64,
                                                ) {
                                                    out -= &alg.apply_gen(g, m + q, v);
                                                }
                                            }
                                            out
                                        }
                                    );
                                    check!(
                                        states,
                                        || format!("[{el}[{m}], {e2}[{q}]]"),
                                        |v| {
                                            let mut out = dressed_apply(
                                                alg,
                                                el,
                                                m,
                                                &dressed_apply(alg, e2, q, v),
                                            );
                                            out -= &dressed_apply(
                                                alg,
                                                e2,
                                                q,
                                                &dressed_apply(alg, el, m, v),
                                            );
                                            out
                                        },
                                        |v| {
                                            let mut out = State::zero();
                                            if h == j {
                                                if let Some(dl) = Dressed::checked(
                                                    p,
                                                    i as i64,
                                                    l as i64,
                                                    r as i64 + s as i64,
                                                ) {
                                                    out += dressed_apply(alg, dl, m + q, v);
                                                }
                                            }
                                            if i == l {
                                                if let Some(dl) = Dressed::checked(
                                                    p,
                                                    h as i64,
                                                    j as i64,
                                                    r as i64 + s as i64,
                                                ) {
                                                    out -= &dressed_apply(alg, dl, m + q, v);
                                                }
                                            }
                                            out
                                        }
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// RHS of the straightening relation for [d_st, e^(r)_ij[m]] with i >= j:
/// + sum_{h=j}^{i-1} sum_a :e^(a+r)_hj psi*^(a)_hi:[m]
/// - sum_{h=j+1}^{i} sum_a :psi*^(a)_jh e^(a+r)_ih:[m]
/// + alpha_j (-m) psi*^(0)_ji[m] when r = 0.
/// The last term is automatically zero unless j < i and the two rows have
/// equal length, because psi*_ji has an empty window otherwise.
fn dst_dressed_rhs(alg: &Algebra, i: i64, j: i64, r: i64, m: i32, v: &State) -> State {
    let p = alg.pyramid();
    let mut out = State::zero();
    for h in j..i {
        let (lo, hi) = p.psi_window(h as usize, i as usize);
        for a in (lo as i64)..=(hi as i64) {
            let Some(gs) = p.gen_or_zero(Kind::PsiStar, h, i, a) else { continue };
            let Some(dl) = Dressed::checked(p, h, j, a + r) else { continue };
            out += no_dressed_psistar(alg, dl, gs, m, v);
        }
    }
    for h in (j + 1)..=i {
        let (lo, hi) = p.psi_window(j as usize, h as usize);
        for a in (lo as i64)..=(hi as i64) {
            let Some(gs) = p.gen_or_zero(Kind::PsiStar, j, h, a) else { continue };
            let Some(dl) = Dressed::checked(p, i, h, a + r) else { continue };
            out -= &no_psistar_dressed(alg, gs, dl, m, v);
        }
    }
    if r == 0 && m != 0 {
        if let Some(gs) = p.gen_or_zero(Kind::PsiStar, j, i, 0) {
            let mut t = alg.apply_gen(gs, m, v);
            t.scale_scalar(&alpha(p, j as usize));
            t.scale_int(-(m as i64));
            out += t;
        }
    }
    out
}

/// RHS of [chi, e^(r)_ij[m]] for i >= j:
/// psi*^(lambda_{i+1}-r-1)_{j,i+1}[m+1] - psi*^(lambda_j-r-1)_{j-1,i}[m+1],
/// with out-of-range labels zero.
fn chi_dressed_rhs(alg: &Algebra, i: i64, j: i64, r: i64, m: i32, v: &State) -> State {
    let p = alg.pyramid();
    let n = p.rows() as i64;
    let mut out = State::zero();
    if i + 1 <= n {
        let rr = p.lambda((i + 1) as usize) as i64 - r - 1;
        if let Some(g) = p.gen_or_zero(Kind::PsiStar, j, i + 1, rr) {
            out += alg.apply_gen(g, m + 1, v);
        }
    }
    if j >= 2 {
        let rr = p.lambda(j as usize) as i64 - r - 1;
        if let Some(g) = p.gen_or_zero(Kind::PsiStar, j - 1, i, rr) {
            out -= &alg.apply_gen(g, m + 1, v);
        }
    }
    out
}

/// RHS of the anticommutator [d_st, psi*^(r)_ij[m]]:
/// - sum_{i<h<j} sum_a sum_{m1} psi*^(a)_ih[m1] psi*^(r-a)_hj[m-m1] v,
/// truncated to the window where both annihilation bounds can be met.
fn dst_psistar_rhs(alg: &Algebra, i: i64, j: i64, r: i64, m: i32, v: &State) -> State {
    if v.is_zero() {
        return State::zero();
    }
    let p = alg.pyramid();
    let b = v.annihilation_bound();
    let mut out = State::zero();
    for h in (i + 1)..j {
        let (lo, hi) = p.psi_window(i as usize, h as usize);
        for a in (lo as i64)..=(hi as i64) {
            let (Some(g1), Some(g2)) = (
                p.gen_or_zero(Kind::PsiStar, i, h, a),
                p.gen_or_zero(Kind::PsiStar, h, j, r - a),
            ) else {
                continue;
            };
            for m1 in (m - b)..=b {
                let w = alg.apply_gen(g2, m - m1, v);
                if !w.is_zero() {
                    out -= &alg.apply_gen(g1, m1, &w);
                }
            }
        }
    }
    out
}

/// Straightening of both parts of the differential against every dressed
/// and free label, mode by mode.
fn verify_straightening(alg: &Algebra, states: &[State]) -> Option<Failure> {
    let p = alg.pyramid();
    let n = p.rows();
    // Lower dressed labels: nontrivial straightening plus the boundary term.
    for i in 1..=n {
        for j in 1..=i {
            for r in 0..p.lambda(j) {
                let el = Dressed { i: i as u32, j: j as u32, r };
                for m in OP_MODE_MIN..=OP_MODE_MAX {
                    check!(
                        states,
                        || format!("[d_st, {el}[{m}]]"),
                        |v| {
                            let mut out = d_st(alg, &dressed_apply(alg, el, m, v));
                            out -= &dressed_apply(alg, el, m, &d_st(alg, v));
                            out
                        },
                        |v| dst_dressed_rhs(alg, i as i64, j as i64, r as i64, m, v)
                    );
                    check!(
                        states,
                        || format!("[chi, {el}[{m}]]"),
                        |v| {
                            let mut out = chi_op(alg, &dressed_apply(alg, el, m, v));
                            out -= &dressed_apply(alg, el, m, &chi_op(alg, v));
                            out
                        },
                        |v| chi_dressed_rhs(alg, i as i64, j as i64, r as i64, m, v)
                    );
                }
            }
        }
    }
    // Raised dressed labels: both parts of the differential commute past.
    for i in 1..=n {
        for j in (i + 1)..=n {
            let (rlo, rhi) = p.psi_window(i, j);
            for r in rlo..=rhi {
                let el = Dressed { i: i as u32, j: j as u32, r };
                for m in OP_MODE_MIN..=OP_MODE_MAX {
                    check!(
                        states,
                        || format!("[d_st, {el}[{m}]]"),
                        |v| {
                            let mut out = d_st(alg, &dressed_apply(alg, el, m, v));
                            out -= &dressed_apply(alg, el, m, &d_st(alg, v));
                            out
                        },
                        |_| State::zero()
                    );
                    check!(
                        states,
                        || format!("[chi, {el}[{m}]]"),
                        |v| {
                            let mut out = chi_op(alg, &dressed_apply(alg, el, m, v));
                            out -= &dressed_apply(alg, el, m, &chi_op(alg, v));
                            out
                        },
                        |_| State::zero()
                    );
                }
            }
        }
    }
    // Free fermion labels: anticommutators.
    for i in 1..=n {
        for j in (i + 1)..=n {
            let (rlo, rhi) = p.psi_window(i, j);
            for r in rlo..=rhi {
                let gp = GenIndex::new(Kind::Psi, i as u32, j as u32, r);
                let gs = GenIndex::new(Kind::PsiStar, i as u32, j as u32, r);
                let el = Dressed { i: i as u32, j: j as u32, r };
                for m in OP_MODE_MIN..=OP_MODE_MAX {
                    check!(
                        states,
                        || format!("[d_st, psi[{i},{j},{r};{m}]]"),
                        |v| {
                            let mut out = d_st(alg, &alg.apply_gen(gp, m, v));
                            out += alg.apply_gen(gp, m, &d_st(alg, v));
                            out
                        },
                        |v| dressed_apply(alg, el, m, v)
                    );
                    check!(
                        states,
                        || format!("[chi, psi[{i},{j},{r};{m}]]"),
                        |v| {
                            let mut out = chi_op(alg, &alg.apply_gen(gp, m, v));
                            out += alg.apply_gen(gp, m, &chi_op(alg, v));
                            out
                        },
                        |v| {
                            if j == i + 1 && r == p.lambda(j) - 1 && m == -1 {
                                v.clone()
                            } else {
                                State::zero()
                            }
                        }
                    );
                    check!(
                        states,
                        || format!("[d_st, psi*[{i},{j},{r};{m}]]"),
                        |v| {
                            let mut out = d_st(alg, &alg.apply_gen(gs, m, v));
                            out += alg.apply_gen(gs, m, &d_st(alg, v));
                            out
                        },
                        |v| dst_psistar_rhs(alg, i as i64, j as i64, r as i64, m, v)
                    );
                    check!(
                        states,
                        || format!("[chi, psi*[{i},{j},{r};{m}]]"),
                        |v| {
                            let mut out = chi_op(alg, &alg.apply_gen(gs, m, v));
                            out += alg.apply_gen(gs, m, &chi_op(alg, v));
                            out
                        },
                        |_| State::zero()
                    );
                }
            }
        }
    }
    None
}

/// The staircase fields against the constant part of the differential:
/// P-modes commute with chi, I-modes straighten to a single psi* mode.
fn verify_staircase(alg: &Algebra, states: &[State]) -> Option<Failure> {
    let p = alg.pyramid();
    let n = p.rows();
    for l in 1..=n {
        for r in 0..p.lambda(n - l + 1) {
            for m in OP_MODE_MIN..=OP_MODE_MAX {
                let op = p_field(p, l, r, m).expect("in-range staircase index");
                check!(
                    states,
                    || format!("[chi, P[{l},{r};{m}]]"),
                    |v| {
                        let mut out = chi_op(alg, &op.apply(alg, v));
                        out -= &op.apply(alg, &chi_op(alg, v));
                        out
                    },
                    |_| State::zero()
                );
            }
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            for r in 0..p.lambda(i) {
                for m in OP_MODE_MIN..=OP_MODE_MAX {
                    let op = i_field(p, i as u32, j as u32, r, m)
                        .expect("in-range staircase index");
                    let gs = GenIndex::new(
                        Kind::PsiStar,
                        i as u32,
                        j as u32,
                        p.lambda(j) - r - 1,
                    );
                    check!(
                        states,
                        || format!("[chi, I[{i},{j},{r};{m}]]"),
                        |v| {
                            let mut out = chi_op(alg, &op.apply(alg, v));
                            out -= &op.apply(alg, &chi_op(alg, v));
                            out
                        },
                        |v| alg.apply_gen(gs, m + 1, v)
                    );
                }
            }
        }
    }
    None
}
