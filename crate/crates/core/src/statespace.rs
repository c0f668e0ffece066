//! The graded super vector space of the complex: exact linear combinations of
//! PBW-ordered creation monomials on the vacuum, the mode-application
//! rewriting engine, the translation operator, and the gradings.
//!
//! Monomials are kept sorted by the canonical order (mode index ascending,
//! then kind, then row indices, then shift), so annihilators drift right and
//! normal form coincides with vacuum annihilation. The rewriting engine is a
//! representation: applying modes in either order differs exactly by the
//! structure-constant bracket, which the unit tests check exhaustively at
//! small size.

use crate::pyramid::{GenIndex, Kind, Pyramid};
use crate::scalar::{form, Scalar};
use crate::CodecError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{AddAssign, SubAssign};

/// A generator placed at a mode index. The derived order is the canonical
/// monomial order: mode first, then (kind, i, j, r).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mode {
    pub m: i32,
    pub g: GenIndex,
}

impl Mode {
    pub fn new(g: GenIndex, m: i32) -> Self {
        Mode { m, g }
    }

    /// Creation classification: E, e and psi create strictly below mode 0;
    /// psi* also creates at mode 0.
    pub fn is_creator(&self) -> bool {
        match self.g.kind {
            Kind::E | Kind::ELow | Kind::Psi => self.m <= -1,
            Kind::PsiStar => self.m <= 0,
        }
    }

    pub fn deg_conformal(&self) -> i32 {
        self.g.deg_conformal(self.m)
    }

    pub fn charge(&self) -> i32 {
        self.g.charge()
    }

    pub fn to_json(&self) -> Value {
        json!([self.g.kind.text(), self.g.i, self.g.j, self.g.r, self.m])
    }

    pub fn from_json(v: &Value) -> Result<Self, CodecError> {
        let row = v
            .as_array()
            .filter(|t| t.len() == 5)
            .ok_or(CodecError::Shape("mode: expected [kind,i,j,r,m]"))?;
        let kind = row[0]
            .as_str()
            .and_then(Kind::from_text)
            .ok_or(CodecError::Shape("mode: unknown kind"))?;
        let idx = |v: &Value| v.as_u64().ok_or(CodecError::Shape("mode: bad index"));
        let m = row[4]
            .as_i64()
            .ok_or(CodecError::Shape("mode: bad mode index"))? as i32;
        Ok(Mode::new(
            GenIndex::new(kind, idx(&row[1])? as u32, idx(&row[2])? as u32, idx(&row[3])? as u32),
            m,
        ))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{},{};{}]", self.g.kind.text(), self.g.i, self.g.j, self.g.r, self.m)
    }
}

/// A PBW basis monomial: creation modes sorted by the canonical order, with
/// repeated odd modes forbidden.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<Mode>);

impl Monomial {
    pub fn vacuum() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(modes: Vec<Mode>) -> Self {
        let mono = Monomial(modes);
        debug_assert!(mono.well_formed(), "not a PBW monomial: {mono}");
        mono
    }

    pub fn well_formed(&self) -> bool {
        self.0.iter().all(Mode::is_creator)
            && self.0.windows(2).all(|w| {
                w[0] < w[1] || (w[0] == w[1] && !w[0].g.kind.is_odd())
            })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    /// Total fermion count parity: true if odd.
    pub fn parity(&self) -> bool {
        self.0.iter().filter(|m| m.g.kind.is_odd()).count() % 2 == 1
    }

    pub fn charge(&self) -> i32 {
        self.0.iter().map(Mode::charge).sum()
    }

    pub fn deg_conformal(&self) -> i32 {
        self.0.iter().map(Mode::deg_conformal).sum()
    }

    /// Sum of mode indices; always <= 0 on well-formed monomials.
    pub fn mode_sum(&self) -> i32 {
        self.0.iter().map(|m| m.m).sum()
    }

    /// Filtration degree whose lowest component is the leading term of a
    /// determinant generator: (j - i) per mode, except (i - j) for psi*, so
    /// that a bilinear psi_ih psi*_jh grades like the label (i, j) it
    /// dresses.
    pub fn skew_degree(&self) -> i32 {
        self.0
            .iter()
            .map(|m| {
                let d = m.g.j as i32 - m.g.i as i32;
                if m.g.kind == Kind::PsiStar {
                    -d
                } else {
                    d
                }
            })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(Mode::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self, CodecError> {
        let rows = v
            .as_array()
            .ok_or(CodecError::Shape("monomial: expected array of modes"))?;
        let modes = rows.iter().map(Mode::from_json).collect::<Result<Vec<_>, _>>()?;
        let mono = Monomial(modes);
        if !mono.well_formed() {
            return Err(CodecError::Shape("monomial: modes not in canonical creation order"));
        }
        Ok(mono)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for md in &self.0 {
            write!(f, "{md} ")?;
        }
        write!(f, "|0>")
    }
}

/// Exact linear combination of monomials with Q[k] coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct State(BTreeMap<Monomial, Scalar>);

impl State {
    pub fn zero() -> Self {
        State::default()
    }

    pub fn vacuum() -> Self {
        State::single(Monomial::vacuum(), Scalar::one())
    }

    pub fn single(mono: Monomial, coeff: Scalar) -> Self {
        let mut map = BTreeMap::new();
        if !coeff.is_zero() {
            map.insert(mono, coeff);
        }
        State(map)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.0.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Scalar {
        self.0.get(mono).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.0.entry(mono) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += &coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn scale_scalar(&mut self, s: &Scalar) {
        if s.is_zero() {
            self.0.clear();
            return;
        }
        for c in self.0.values_mut() {
            *c *= s;
        }
    }

    pub fn scale_int(&mut self, v: i64) {
        match v {
            0 => self.0.clear(),
            1 => {}
            _ => self.scale_scalar(&Scalar::from_int(v)),
        }
    }

    pub fn scale_rat(&mut self, c: &BigRational) {
        if c.is_zero() {
            self.0.clear();
            return;
        }
        for s in self.0.values_mut() {
            *s = s.scale(c);
        }
    }

    pub fn neg(mut self) -> Self {
        for c in self.0.values_mut() {
            *c = -c.clone();
        }
        self
    }

    /// Evaluate every coefficient at a numeric level; the result has
    /// constant coefficients.
    pub fn evaluate_level(&self, at: &BigRational) -> State {
        let mut out = State::zero();
        for (mono, c) in &self.0 {
            out.add_term(mono.clone(), Scalar::constant(c.evaluate(at)));
        }
        out
    }

    /// Decompose into (conformal degree, charge) bihomogeneous parts.
    pub fn grade(&self) -> BTreeMap<(i32, i32), State> {
        let mut out: BTreeMap<(i32, i32), State> = BTreeMap::new();
        for (mono, c) in &self.0 {
            let key = (mono.deg_conformal(), mono.charge());
            out.entry(key).or_default().add_term(mono.clone(), c.clone());
        }
        out
    }

    /// Largest M such that any generator mode above M annihilates this state:
    /// M = max over monomials of -(mode sum). Correct because every relation
    /// preserves the total mode sum and well-formed monomials have mode sum
    /// <= 0.
    pub fn annihilation_bound(&self) -> i32 {
        self.0
            .keys()
            .map(|mono| -mono.mode_sum())
            .max()
            .unwrap_or(i32::MIN)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.0
                .iter()
                .map(|(mono, c)| json!({"coeff": c.to_json(), "monomial": mono.to_json()}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self, CodecError> {
        let rows = v
            .as_array()
            .ok_or(CodecError::Shape("state: expected array of terms"))?;
        let mut out = State::zero();
        for row in rows {
            let coeff = row
                .get("coeff")
                .ok_or(CodecError::Shape("state term: missing coeff"))?;
            let mono = row
                .get("monomial")
                .ok_or(CodecError::Shape("state term: missing monomial"))?;
            out.add_term(Monomial::from_json(mono)?, Scalar::from_json(coeff)?);
        }
        Ok(out)
    }
}

impl AddAssign<State> for State {
    fn add_assign(&mut self, rhs: State) {
        for (mono, c) in rhs.0 {
            self.add_term(mono, c);
        }
    }
}

impl AddAssign<&State> for State {
    fn add_assign(&mut self, rhs: &State) {
        for (mono, c) in &rhs.0 {
            self.add_term(mono.clone(), c.clone());
        }
    }
}

impl SubAssign<&State> for State {
    fn sub_assign(&mut self, rhs: &State) {
        for (mono, c) in &rhs.0 {
            self.add_term(mono.clone(), -c.clone());
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in &self.0 {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}) {mono}")?;
        }
        Ok(())
    }
}

/// Which presentation of the complex the engine runs in.
///
/// Full: centralizer currents E plus both fermion families, level constant k.
/// Reduced: abstract dressed generators e (i >= j) plus odd supercommutative
/// psi*, level constant k + N.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Realization {
    Full,
    Reduced,
}

/// The rewriting engine: a pyramid, a realization, and the structure
/// relations between modes. Immutable and freely shareable.
#[derive(Clone, Debug)]
pub struct Algebra {
    pyramid: Pyramid,
    realization: Realization,
}

impl Algebra {
    pub fn new(pyramid: Pyramid, realization: Realization) -> Self {
        Algebra { pyramid, realization }
    }

    pub fn pyramid(&self) -> &Pyramid {
        &self.pyramid
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    pub fn kind_allowed(&self, kind: Kind) -> bool {
        match self.realization {
            Realization::Full => matches!(kind, Kind::E | Kind::Psi | Kind::PsiStar),
            Realization::Reduced => matches!(kind, Kind::ELow | Kind::PsiStar),
        }
    }

    /// The scalar the central element acts by: k in the full complex,
    /// k + N in the reduced realization.
    pub fn level_constant(&self) -> Scalar {
        match self.realization {
            Realization::Full => Scalar::k(),
            Realization::Reduced => {
                &Scalar::k() + &Scalar::from_int(self.pyramid.size() as i64)
            }
        }
    }

    /// Supercommutator [x, y] (anticommutator when both modes are odd),
    /// returned as generator terms with integer coefficients plus a central
    /// scalar.
    pub fn bracket(&self, x: Mode, y: Mode) -> (Vec<(Mode, i64)>, Scalar) {
        debug_assert!(self.kind_allowed(x.g.kind) && self.kind_allowed(y.g.kind));
        let p = &self.pyramid;
        let mp = x.m + y.m;
        match (x.g.kind, y.g.kind) {
            (Kind::E, Kind::E) | (Kind::ELow, Kind::ELow) => {
                let terms = p
                    .bracket_e(&x.g, &y.g)
                    .into_iter()
                    .map(|(g, c)| (Mode::new(g, mp), c))
                    .collect();
                let mut central = Scalar::zero();
                if mp == 0 && x.m != 0 {
                    let f = form(p, &x.g, &y.g);
                    if !f.is_zero() {
                        central = self
                            .level_constant()
                            .scale(&(f * BigRational::from(BigInt::from(x.m))));
                    }
                }
                (terms, central)
            }
            (Kind::Psi, Kind::PsiStar) | (Kind::PsiStar, Kind::Psi) => {
                let matched = x.g.i == y.g.i && x.g.j == y.g.j && x.g.r == y.g.r && mp == 0;
                (Vec::new(), if matched { Scalar::one() } else { Scalar::zero() })
            }
            (Kind::ELow, Kind::PsiStar) => self.bracket_elow_psistar(x, y, 1),
            (Kind::PsiStar, Kind::ELow) => self.bracket_elow_psistar(y, x, -1),
            (Kind::Psi, Kind::Psi) | (Kind::PsiStar, Kind::PsiStar) => {
                (Vec::new(), Scalar::zero())
            }
            (Kind::E, _) | (_, Kind::E) => (Vec::new(), Scalar::zero()),
            pair => unreachable!("kinds cannot meet in one realization: {pair:?}"),
        }
    }

    /// [e^(r)_ij[m], psi*^(s)_hl[p]] = delta_lj psi*^(s-r)_hi[m+p]
    ///                               - delta_hi psi*^(s-r)_jl[m+p].
    fn bracket_elow_psistar(&self, e: Mode, ps: Mode, sign: i64) -> (Vec<(Mode, i64)>, Scalar) {
        let p = &self.pyramid;
        let (i, j, r) = (e.g.i as i64, e.g.j as i64, e.g.r as i64);
        let (h, l, s) = (ps.g.i as i64, ps.g.j as i64, ps.g.r as i64);
        let mp = e.m + ps.m;
        let mut terms = Vec::new();
        if l == j {
            if let Some(g) = p.gen_or_zero(Kind::PsiStar, h, i, s - r) {
                terms.push((Mode::new(g, mp), sign));
            }
        }
        if h == i {
            if let Some(g) = p.gen_or_zero(Kind::PsiStar, j, l, s - r) {
                terms.push((Mode::new(g, mp), -sign));
            }
        }
        (terms, Scalar::zero())
    }

    /// PBW-normal form of md . v.
    pub fn apply_mode(&self, md: Mode, v: &State) -> State {
        debug_assert!(self.kind_allowed(md.g.kind), "{md} in {:?}", self.realization);
        debug_assert!(self.pyramid.admissible(&md.g), "inadmissible {md}");
        let mut out = State::zero();
        for (mono, c) in v.terms() {
            let mut part = self.insert(md, mono.modes());
            part.scale_scalar(c);
            out += part;
        }
        out
    }

    pub fn apply_gen(&self, g: GenIndex, m: i32, v: &State) -> State {
        self.apply_mode(Mode::new(g, m), v)
    }

    /// Normal form of a word of modes applied to the vacuum right to left.
    pub fn normalize_word(&self, word: &[Mode]) -> State {
        let mut v = State::vacuum();
        for &md in word.iter().rev() {
            if v.is_zero() {
                return v;
            }
            v = self.apply_mode(md, &v);
        }
        v
    }

    /// x applied from the left to a well-formed monomial.
    fn insert(&self, x: Mode, mono: &[Mode]) -> State {
        let Some((&y, rest)) = mono.split_first() else {
            return if x.is_creator() {
                State::single(Monomial(vec![x]), Scalar::one())
            } else {
                State::zero()
            };
        };
        if x.is_creator() && x <= y {
            if x == y && x.g.kind.is_odd() {
                return State::zero();
            }
            let mut modes = Vec::with_capacity(mono.len() + 1);
            modes.push(x);
            modes.extend_from_slice(mono);
            return State::single(Monomial(modes), Scalar::one());
        }
        // x y = sign y x + [x, y]; push x one slot right, then restore y.
        let odd_pair = x.g.kind.is_odd() && y.g.kind.is_odd();
        let mut out = State::zero();
        let inner = self.insert(x, rest);
        for (mono2, c) in inner.terms() {
            let mut moved = self.insert(y, mono2.modes());
            if odd_pair {
                moved.scale_int(-1);
            }
            moved.scale_scalar(c);
            out += moved;
        }
        let (terms, central) = self.bracket(x, y);
        for (z, c) in terms {
            let mut t = self.insert(z, rest);
            t.scale_int(c);
            out += t;
        }
        if !central.is_zero() {
            out.add_term(Monomial(rest.to_vec()), central);
        }
        out
    }

    /// The translation operator: kills the vacuum, [T, X[m]] = -m X[m-1] for
    /// E, e and psi, [T, psi*[m]] = -(m-1) psi*[m-1].
    pub fn translate(&self, v: &State) -> State {
        let mut out = State::zero();
        for (mono, c) in v.terms() {
            for (pos, md) in mono.modes().iter().enumerate() {
                let coef = match md.g.kind {
                    Kind::PsiStar => -(md.m - 1),
                    _ => -md.m,
                };
                if coef == 0 {
                    continue;
                }
                let mut word = mono.modes().to_vec();
                word[pos] = Mode::new(md.g, md.m - 1);
                let mut t = self.normalize_word(&word);
                t.scale_int(coef as i64);
                t.scale_scalar(c);
                out += t;
            }
        }
        out
    }
}
