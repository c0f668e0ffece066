//! Pyramid combinatorics: shapes, row/column maps, admissible generator
//! index ranges, dimension counts, and gradings.
//!
//! A pyramid is a left-justified array of box rows of lengths
//! lambda_1 <= ... <= lambda_n; it encodes the Jordan type of a nilpotent
//! N x N matrix whose centralizer the rest of the crate works with. The
//! matrix-unit expansion of the basis elements doubles as an independent
//! oracle for structure constants and for the invariant form.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PyramidError {
    #[error("pyramid shape must be non-empty")]
    EmptyShape,
    #[error("pyramid rows must be listed in non-decreasing order")]
    NonMonotoneShape,
    #[error("pyramid rows must have positive length")]
    ZeroPart,
    #[error("box index {0} out of range 1..={1}")]
    OutOfRange(u32, u32),
    #[error("cannot parse pyramid from {0:?}")]
    Parse(String),
}

/// Generator kinds. The declaration order fixes the kind rank used by the
/// canonical monomial order: E < e < psi < psi*.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kind {
    /// Centralizer current in the full complex.
    E,
    /// Dressed (or abstract reduced-realization) generator, i >= j.
    ELow,
    /// Fermion psi, i < j.
    Psi,
    /// Fermion psi*, i < j.
    PsiStar,
}

impl Kind {
    pub fn is_odd(self) -> bool {
        matches!(self, Kind::Psi | Kind::PsiStar)
    }

    pub fn text(self) -> &'static str {
        match self {
            Kind::E => "E",
            Kind::ELow => "e",
            Kind::Psi => "psi",
            Kind::PsiStar => "psi*",
        }
    }

    pub fn from_text(s: &str) -> Option<Kind> {
        match s {
            "E" => Some(Kind::E),
            "e" => Some(Kind::ELow),
            "psi" => Some(Kind::Psi),
            "psi*" => Some(Kind::PsiStar),
            _ => None,
        }
    }
}

/// Index of a generator: kind, row pair (1-based), column shift r.
///
/// The derived order (kind, i, j, r) is the tiebreak inside the canonical
/// monomial order after the mode index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GenIndex {
    pub kind: Kind,
    pub i: u32,
    pub j: u32,
    pub r: u32,
}

impl GenIndex {
    pub fn new(kind: Kind, i: u32, j: u32, r: u32) -> Self {
        GenIndex { kind, i, j, r }
    }

    /// Conformal degree contribution of this generator placed at mode m:
    /// -m + i - j for E, e and psi; -m + j - i for psi*.
    pub fn deg_conformal(&self, m: i32) -> i32 {
        let skew = self.i as i32 - self.j as i32;
        match self.kind {
            Kind::E | Kind::ELow | Kind::Psi => -m + skew,
            Kind::PsiStar => -m - skew,
        }
    }

    /// Fermionic charge: -1 for psi, +1 for psi*, 0 otherwise.
    pub fn charge(&self) -> i32 {
        match self.kind {
            Kind::Psi => -1,
            Kind::PsiStar => 1,
            Kind::E | Kind::ELow => 0,
        }
    }
}

impl fmt::Display for GenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{},{})", self.kind.text(), self.i, self.j, self.r)
    }
}

/// Left-justified pyramid with non-decreasing row lengths.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pyramid {
    lambdas: Vec<u32>,
}

impl Pyramid {
    pub fn new(lambdas: Vec<u32>) -> Result<Self, PyramidError> {
        if lambdas.is_empty() {
            return Err(PyramidError::EmptyShape);
        }
        if lambdas.iter().any(|&l| l == 0) {
            return Err(PyramidError::ZeroPart);
        }
        if lambdas.windows(2).any(|w| w[0] > w[1]) {
            return Err(PyramidError::NonMonotoneShape);
        }
        Ok(Pyramid { lambdas })
    }

    /// Parse a comma-separated shape such as "2,3,4".
    pub fn parse(s: &str) -> Result<Self, PyramidError> {
        let lambdas = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PyramidError::Parse(s.to_string()))?;
        Pyramid::new(lambdas)
    }

    /// Number of rows n.
    pub fn rows(&self) -> usize {
        self.lambdas.len()
    }

    /// Total box count N.
    pub fn size(&self) -> u32 {
        self.lambdas.iter().sum()
    }

    /// Row length lambda_i, 1-based.
    pub fn lambda(&self, i: usize) -> u32 {
        self.lambdas[i - 1]
    }

    pub fn lambdas(&self) -> &[u32] {
        &self.lambdas
    }

    /// Column lengths q_c = #{i : lambda_i >= c}, c = 1..lambda_n.
    pub fn column_lengths(&self) -> Vec<u32> {
        let top = *self.lambdas.last().expect("non-empty shape") as usize;
        (1..=top)
            .map(|c| self.lambdas.iter().filter(|&&l| l as usize >= c).count() as u32)
            .collect()
    }

    /// Row and column of the box holding entry a in the row-tableau, which
    /// fills rows left to right, top row first.
    pub fn row_col(&self, a: u32) -> Result<(usize, u32), PyramidError> {
        if a == 0 || a > self.size() {
            return Err(PyramidError::OutOfRange(a, self.size()));
        }
        let mut rest = a;
        for (idx, &l) in self.lambdas.iter().enumerate() {
            if rest <= l {
                return Ok((idx + 1, rest));
            }
            rest -= l;
        }
        unreachable!("a <= N is covered by the row scan");
    }

    /// S_i = lambda_1 + ... + lambda_{i-1} + (n - i + 1) lambda_i; equals the
    /// partial column sum q_1 + ... + q_{lambda_i}.
    pub fn s_weight(&self, i: usize) -> u32 {
        let before: u32 = self.lambdas[..i - 1].iter().sum();
        before + (self.rows() as u32 - i as u32 + 1) * self.lambda(i)
    }

    /// Admissible shift window for E_ij, inclusive: max(0, lambda_j -
    /// lambda_i) <= r <= lambda_j - 1. The window has min(lambda_i,
    /// lambda_j) values.
    pub fn e_window(&self, i: usize, j: usize) -> (u32, u32) {
        let (li, lj) = (self.lambda(i), self.lambda(j));
        (lj.saturating_sub(li), lj - 1)
    }

    /// Admissible shift window for psi_ij / psi*_ij (requires i < j):
    /// lambda_j - lambda_i <= r <= lambda_j - 1.
    pub fn psi_window(&self, i: usize, j: usize) -> (u32, u32) {
        let (li, lj) = (self.lambda(i), self.lambda(j));
        (lj - li, lj - 1)
    }

    /// Whether the index denotes an actual generator; out-of-range indices
    /// are treated as zero by every consumer.
    pub fn admissible(&self, g: &GenIndex) -> bool {
        let n = self.rows() as u32;
        if g.i == 0 || g.j == 0 || g.i > n || g.j > n {
            return false;
        }
        match g.kind {
            Kind::E => {
                let (lo, hi) = self.e_window(g.i as usize, g.j as usize);
                lo <= g.r && g.r <= hi
            }
            Kind::ELow => g.i >= g.j && g.r < self.lambda(g.j as usize),
            Kind::Psi | Kind::PsiStar => {
                if g.i >= g.j {
                    return false;
                }
                let (lo, hi) = self.psi_window(g.i as usize, g.j as usize);
                lo <= g.r && g.r <= hi
            }
        }
    }

    /// The admissible index or None, encoding the convention that
    /// out-of-range generators are zero.
    pub fn gen_or_zero(&self, kind: Kind, i: i64, j: i64, r: i64) -> Option<GenIndex> {
        if i < 1 || j < 1 || r < 0 {
            return None;
        }
        let g = GenIndex::new(kind, i as u32, j as u32, r as u32);
        self.admissible(&g).then_some(g)
    }

    /// All admissible E indices; the count is sum over (i,j) of
    /// min(lambda_i, lambda_j).
    pub fn basis_e(&self) -> Vec<GenIndex> {
        let n = self.rows();
        let mut out = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                let (lo, hi) = self.e_window(i, j);
                for r in lo..=hi {
                    out.push(GenIndex::new(Kind::E, i as u32, j as u32, r));
                }
            }
        }
        out
    }

    /// All admissible psi (equivalently psi*) indices, i < j.
    pub fn basis_psi(&self) -> Vec<GenIndex> {
        let n = self.rows();
        let mut out = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                let (lo, hi) = self.psi_window(i, j);
                for r in lo..=hi {
                    out.push(GenIndex::new(Kind::Psi, i as u32, j as u32, r));
                }
            }
        }
        out
    }

    /// All reduced-realization generators e_ij^(r), i >= j, 0 <= r < lambda_j.
    pub fn basis_e_low(&self) -> Vec<GenIndex> {
        let n = self.rows();
        let mut out = Vec::new();
        for i in 1..=n {
            for j in 1..=i {
                for r in 0..self.lambda(j) {
                    out.push(GenIndex::new(Kind::ELow, i as u32, j as u32, r));
                }
            }
        }
        out
    }

    /// Matrix-unit expansion of E_ij^(r): the list of (a, b) box pairs with
    /// row(a) = i, row(b) = j, col(b) - col(a) = r. Oracle use only; the
    /// runtime representation is the index triple.
    pub fn matrix_units(&self, g: &GenIndex) -> Vec<(u32, u32)> {
        debug_assert!(self.admissible(g));
        let mut out = Vec::new();
        for a in 1..=self.size() {
            let (ra, ca) = self.row_col(a).expect("in range");
            if ra != g.i as usize {
                continue;
            }
            for b in 1..=self.size() {
                let (rb, cb) = self.row_col(b).expect("in range");
                if rb == g.j as usize && cb as i64 - ca as i64 == g.r as i64 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// The nilpotent matrix of the pyramid's Jordan type, as matrix units:
    /// each row's boxes map rightward neighbor to left.
    pub fn nilpotent_units(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let mut start = 1u32;
        for &l in &self.lambdas {
            for c in 0..l.saturating_sub(1) {
                out.push((start + c, start + c + 1));
            }
            start += l;
        }
        out
    }

    /// Structure constants of the centralizer: [E^(r)_ij, E^(s)_hl] =
    /// delta_hj E^(r+s)_il - delta_il E^(r+s)_hj, with out-of-range results
    /// dropped. Also valid for the reduced kind on lower-triangular pairs.
    pub fn bracket_e(&self, g1: &GenIndex, g2: &GenIndex) -> Vec<(GenIndex, i64)> {
        debug_assert_eq!(g1.kind, g2.kind);
        let kind = g1.kind;
        let rs = (g1.r + g2.r) as i64;
        let mut out = Vec::new();
        if g2.i == g1.j {
            if let Some(g) = self.gen_or_zero(kind, g1.i as i64, g2.j as i64, rs) {
                out.push((g, 1));
            }
        }
        if g1.i == g2.j {
            if let Some(g) = self.gen_or_zero(kind, g2.i as i64, g1.j as i64, rs) {
                out.push((g, -1));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambdas": self.lambdas,
            "q": self.column_lengths(),
            "N": self.size(),
        })
    }
}

impl fmt::Display for Pyramid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lambdas.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Sparse integer N x N matrix keyed by 1-based (row, column); the shared
/// currency of the matrix-unit oracles.
pub type UnitMatrix = BTreeMap<(u32, u32), i64>;

pub fn unit_matrix(units: &[(u32, u32)]) -> UnitMatrix {
    let mut m = UnitMatrix::new();
    for &(a, b) in units {
        *m.entry((a, b)).or_insert(0) += 1;
    }
    m
}

pub fn matrix_commutator(x: &UnitMatrix, y: &UnitMatrix) -> UnitMatrix {
    let mut out = UnitMatrix::new();
    let acc = |m: &mut UnitMatrix, key: (u32, u32), v: i64| {
        let e = m.entry(key).or_insert(0);
        *e += v;
        if *e == 0 {
            m.remove(&key);
        }
    };
    for (&(a, b), &xv) in x {
        for (&(c, d), &yv) in y {
            if b == c {
                acc(&mut out, (a, d), xv * yv);
            }
            if d == a {
                acc(&mut out, (c, b), -(xv * yv));
            }
        }
    }
    out
}

/// Normalized Killing form oracle: (1/2N) tr(ad X ad Y) where ad acts on the
/// degree-zero subalgebra of gl_N (matrix units joining boxes in equal
/// columns). Defined for shift-0 arguments; the form vanishes on all other
/// homogeneous pairs.
pub fn killing_form_oracle(p: &Pyramid, g1: &GenIndex, g2: &GenIndex) -> BigRational {
    if g1.r != 0 || g2.r != 0 {
        return BigRational::from(BigInt::from(0));
    }
    let x = unit_matrix(&p.matrix_units(g1));
    let y = unit_matrix(&p.matrix_units(g2));
    let mut trace = 0i64;
    for a in 1..=p.size() {
        let (_, ca) = p.row_col(a).expect("in range");
        for b in 1..=p.size() {
            let (_, cb) = p.row_col(b).expect("in range");
            if ca != cb {
                continue;
            }
            let basis = unit_matrix(&[(a, b)]);
            let z = matrix_commutator(&x, &matrix_commutator(&y, &basis));
            trace += z.get(&(a, b)).copied().unwrap_or(0);
        }
    }
    BigRational::new(BigInt::from(trace), BigInt::from(2 * p.size()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{form, rat};

    #[test]
    fn build_and_reject() {
        let p = Pyramid::parse("2,3,4").unwrap();
        assert_eq!(p.column_lengths(), vec![3, 3, 2, 1]);
        assert_eq!(p.size(), 9);
        assert_eq!(Pyramid::parse("3,2"), Err(PyramidError::NonMonotoneShape));
        assert_eq!(Pyramid::new(vec![]), Err(PyramidError::EmptyShape));
        assert_eq!(Pyramid::new(vec![0, 1]), Err(PyramidError::ZeroPart));
        assert!(matches!(Pyramid::parse("a,b"), Err(PyramidError::Parse(_))));
    }

    #[test]
    fn row_tableau_coordinates() {
        let p = Pyramid::parse("2,3,4").unwrap();
        assert_eq!(p.row_col(1).unwrap(), (1, 1));
        assert_eq!(p.row_col(5).unwrap(), (2, 3));
        assert_eq!(p.row_col(9).unwrap(), (3, 4));
        assert_eq!(p.row_col(10), Err(PyramidError::OutOfRange(10, 9)));
        assert_eq!(p.row_col(0), Err(PyramidError::OutOfRange(0, 9)));
    }

    #[test]
    fn conjugate_partition_identities() {
        for shape in ["1", "1,1,1", "2,3,4", "1,2", "2,2,5"] {
            let p = Pyramid::parse(shape).unwrap();
            let q = p.column_lengths();
            assert_eq!(q.iter().sum::<u32>(), p.size());
            assert!(q.windows(2).all(|w| w[0] >= w[1]));
            for (c, &qc) in q.iter().enumerate() {
                let count = p.lambdas().iter().filter(|&&l| l as usize >= c + 1).count();
                assert_eq!(qc as usize, count);
            }
        }
    }

    #[test]
    fn basis_counts_match_min_sum() {
        for shape in ["1", "1,1", "1,2", "2,2", "1,1,1", "2,3,4"] {
            let p = Pyramid::parse(shape).unwrap();
            let expected: u32 = (1..=p.rows())
                .flat_map(|i| (1..=p.rows()).map(move |j| (i, j)))
                .map(|(i, j)| p.lambda(i).min(p.lambda(j)))
                .sum();
            assert_eq!(p.basis_e().len() as u32, expected);
        }
        assert_eq!(Pyramid::parse("2,3,4").unwrap().basis_e().len(), 23);
        let one = Pyramid::parse("1").unwrap();
        assert_eq!(one.basis_e(), vec![GenIndex::new(Kind::E, 1, 1, 0)]);
        let two = Pyramid::parse("1,1").unwrap();
        assert_eq!(two.basis_e().len(), 4);
        assert!(two.basis_e().iter().all(|g| g.r == 0));
    }

    #[test]
    fn gradings() {
        let e12 = GenIndex::new(Kind::E, 1, 2, 0);
        assert_eq!(e12.deg_conformal(-1), 0);
        let ps12 = GenIndex::new(Kind::PsiStar, 1, 2, 0);
        assert_eq!(ps12.deg_conformal(0), 1);
        let e11 = GenIndex::new(Kind::E, 1, 1, 0);
        assert_eq!(e11.deg_conformal(-3), 3);
        assert_eq!(ps12.charge(), 1);
        assert_eq!(GenIndex::new(Kind::Psi, 1, 2, 0).charge(), -1);
        assert_eq!(e12.charge(), 0);
    }

    #[test]
    fn matrix_units_commute_with_nilpotent() {
        for shape in ["1,2", "2,2", "2,3,4"] {
            let p = Pyramid::parse(shape).unwrap();
            let e = unit_matrix(&p.nilpotent_units());
            for g in p.basis_e() {
                let x = unit_matrix(&p.matrix_units(&g));
                assert!(matrix_commutator(&x, &e).is_empty(), "{shape} {g}");
            }
        }
    }

    /// Every admissible E index expands to a nonzero matrix; distinct indices
    /// have disjoint supports, so the expansion really is a basis.
    #[test]
    fn matrix_units_disjoint_supports() {
        let p = Pyramid::parse("2,3,4").unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for g in p.basis_e() {
            let units = p.matrix_units(&g);
            assert!(!units.is_empty(), "{g}");
            for ab in units {
                assert!(seen.insert(ab), "{g} overlaps at {ab:?}");
            }
        }
    }

    /// The closed-form bracket agrees with raw gl_N commutators expanded in
    /// the (disjoint-support) basis.
    #[test]
    fn bracket_matches_matrix_oracle() {
        for shape in ["1,1", "1,2", "2,2", "1,1,1", "2,3"] {
            let p = Pyramid::parse(shape).unwrap();
            let basis = p.basis_e();
            for g1 in &basis {
                for g2 in &basis {
                    let lhs = matrix_commutator(
                        &unit_matrix(&p.matrix_units(g1)),
                        &unit_matrix(&p.matrix_units(g2)),
                    );
                    let mut rhs = UnitMatrix::new();
                    for (g, c) in p.bracket_e(g1, g2) {
                        for ab in p.matrix_units(&g) {
                            let e = rhs.entry(ab).or_insert(0);
                            *e += c;
                            if *e == 0 {
                                rhs.remove(&ab);
                            }
                        }
                    }
                    assert_eq!(lhs, rhs, "{shape}: [{g1}, {g2}]");
                }
            }
        }
    }

    #[test]
    fn jacobi_identity_small_shapes() {
        for shape in ["1,1", "1,2", "2,2"] {
            let p = Pyramid::parse(shape).unwrap();
            let basis = p.basis_e();
            let bracket_into = |g1: &GenIndex, g2: &GenIndex| p.bracket_e(g1, g2);
            for a in &basis {
                for b in &basis {
                    for c in &basis {
                        // [[a,b],c] + [[b,c],a] + [[c,a],b] = 0.
                        let mut total: BTreeMap<GenIndex, i64> = BTreeMap::new();
                        let mut push = |g: GenIndex, v: i64| {
                            let e = total.entry(g).or_insert(0);
                            *e += v;
                            if *e == 0 {
                                total.remove(&g);
                            }
                        };
                        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                            for (g, v) in bracket_into(x, y) {
                                for (h, w) in p.bracket_e(&g, z) {
                                    push(h, v * w);
                                }
                            }
                        }
                        assert!(total.is_empty(), "{shape}: ({a},{b},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn killing_oracle_matches_closed_form() {
        for shape in ["1,1", "1,2", "2,2", "1,1,1", "2,3,4"] {
            let p = Pyramid::parse(shape).unwrap();
            let zero_shift: Vec<GenIndex> =
                p.basis_e().into_iter().filter(|g| g.r == 0).collect();
            for g1 in &zero_shift {
                for g2 in &zero_shift {
                    assert_eq!(
                        killing_form_oracle(&p, g1, g2),
                        form(&p, g1, g2),
                        "{shape}: <{g1},{g2}>"
                    );
                }
            }
        }
    }

    #[test]
    fn killing_oracle_examples() {
        let p = Pyramid::parse("2,3,4").unwrap();
        let e = |i, j, r| GenIndex::new(Kind::E, i, j, r);
        assert_eq!(killing_form_oracle(&p, &e(1, 1, 0), &e(1, 1, 0)), rat(4, 9));
        assert_eq!(killing_form_oracle(&p, &e(1, 1, 0), &e(2, 2, 0)), rat(-2, 9));
    }

    #[test]
    fn json_shape() {
        let p = Pyramid::parse("2,3,4").unwrap();
        assert_eq!(
            p.to_json().to_string(),
            r#"{"N":9,"lambdas":[2,3,4],"q":[3,3,2,1]}"#
        );
    }
}
