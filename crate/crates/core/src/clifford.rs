//! Skew-symmetric representations of the Clifford algebra `Cl_{m-1}`.
//!
//! A [`CliffordSystem`] holds `m - 1` integer matrices `A_1, ..., A_{m-1}` on
//! `R^{k δ(m)}` with `A_p^T = -A_p` and `A_p A_q + A_q A_p = -2 δ_pq I`.
//! Irreducible representations are assembled from the quarter-turn matrix,
//! quaternion and octonion left multiplications, and the period-8 recursion
//! `δ(m + 8) = 16 δ(m)`. Every entry stays in `{-1, 0, 1}` so the relations can
//! be checked in exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `δ(1..=8)`.
const DELTA_BASE: [usize; 8] = [1, 2, 4, 4, 8, 8, 8, 8];

/// Dimension of an irreducible module of `Cl_{m-1}`.
pub fn delta(m: usize) -> Result<usize> {
    if m < 1 {
        return Err(invalid("delta(m) requires m >= 1"));
    }
    let period = (m - 1) / 8;
    let base = DELTA_BASE[(m - 1) % 8];
    16usize
        .checked_pow(period as u32)
        .and_then(|p| p.checked_mul(base))
        .ok_or_else(|| invalid(format!("delta({m}) overflows")))
}

/// Dense square matrix with small signed integer entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<i8>,
}

impl IntMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row_major(&self) -> &[i8] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &IntMatrix) -> Self {
        let (da, db) = (self.dim, other.dim);
        let mut out = Self::zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out.set(i * db + k, j * db + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal sum of `copies` copies of `self`.
    pub fn block_diag(&self, copies: usize) -> Self {
        IntMatrix::identity(copies).kron(self)
    }

    fn sparse_rows(&self) -> Vec<Vec<(usize, i32)>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .filter_map(|j| {
                        let v = self.get(i, j);
                        (v != 0).then_some((j, v as i32))
                    })
                    .collect()
            })
            .collect()
    }

    /// Exact product with wide accumulators. Products of entries in
    /// `{-1, 0, 1}` need not stay in that range, hence the `i32` result.
    pub fn mul_wide(&self, other: &IntMatrix) -> WideMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let rows_b = other.sparse_rows();
        let mut out = vec![0i32; n * n];
        for i in 0..n {
            let row_out = &mut out[i * n..(i + 1) * n];
            for l in 0..n {
                let a = self.get(i, l) as i32;
                if a == 0 {
                    continue;
                }
                for &(j, b) in &rows_b[l] {
                    row_out[j] += a * b;
                }
            }
        }
        WideMatrix { dim: n, data: out }
    }

    /// Product that must land back in `{-1, 0, 1}`; used by the constructions,
    /// where every factor is a signed permutation.
    fn mul_signed_perm(&self, other: &IntMatrix) -> IntMatrix {
        let w = self.mul_wide(other);
        IntMatrix {
            dim: w.dim,
            data: w
                .data
                .iter()
                .map(|&v| i8::try_from(v).expect("signed permutation product"))
                .collect(),
        }
    }
}

/// Exact integer matrix with `i32` entries, the result of [`IntMatrix::mul_wide`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideMatrix {
    dim: usize,
    data: Vec<i32>,
}

impl WideMatrix {
    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.data[i * self.dim + j]
    }
}

/// Sparse row storage of a generator and its transpose, for fast products
/// with floating-point vectors.
#[derive(Clone, Debug)]
struct SparseGen {
    rows: Vec<Vec<(u32, f64)>>,
    rows_t: Vec<Vec<(u32, f64)>>,
}

impl SparseGen {
    fn new(g: &IntMatrix) -> Self {
        let to_f = |m: &IntMatrix| {
            m.sparse_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|(j, v)| (j as u32, v as f64)).collect())
                .collect()
        };
        Self {
            rows: to_f(g),
            rows_t: to_f(&g.transpose()),
        }
    }

    fn apply(rows: &[Vec<(u32, f64)>], x: &[f64]) -> Vec<f64> {
        rows.iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j as usize]).sum())
            .collect()
    }
}

/// A family of generator matrices together with its `(m, k)` parameters.
#[derive(Clone, Debug)]
pub struct CliffordSystem {
    m: usize,
    k: usize,
    dim: usize,
    generators: Vec<IntMatrix>,
    sparse: Vec<SparseGen>,
}

impl PartialEq for CliffordSystem {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
            && self.k == other.k
            && self.dim == other.dim
            && self.generators == other.generators
    }
}

impl CliffordSystem {
    /// Assembles a system from explicit generators. Checks shapes and entry
    /// range only; the algebra relations are checked by [`verify_relations`].
    pub fn from_parts(m: usize, k: usize, generators: Vec<IntMatrix>) -> Result<Self> {
        if m < 1 || k < 1 {
            return Err(invalid(format!("need m >= 1 and k >= 1, got m={m}, k={k}")));
        }
        let dim = k * delta(m)?;
        if generators.len() != m - 1 {
            return Err(invalid(format!(
                "m={m} needs {} generators, got {}",
                m - 1,
                generators.len()
            )));
        }
        for (q, g) in generators.iter().enumerate() {
            if g.dim() != dim {
                return Err(invalid(format!(
                    "generator {} has size {}, expected {dim} = k*delta(m)",
                    q + 1,
                    g.dim()
                )));
            }
            if g.row_major().iter().any(|v| !(-1..=1).contains(v)) {
                return Err(invalid(format!(
                    "generator {} has entries outside {{-1, 0, 1}}",
                    q + 1
                )));
            }
        }
        let sparse = generators.iter().map(SparseGen::new).collect();
        Ok(Self {
            m,
            k,
            dim,
            generators,
            sparse,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Ambient dimension `n + 1 = k δ(m)`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n = k δ(m) - 1`.
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// `A_q x` for the zero-based generator index `q`.
    pub fn apply(&self, q: usize, x: &[f64]) -> Vec<f64> {
        SparseGen::apply(&self.sparse[q].rows, x)
    }

    /// `A_q^T y`.
    pub fn apply_transpose(&self, q: usize, y: &[f64]) -> Vec<f64> {
        SparseGen::apply(&self.sparse[q].rows_t, y)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SystemJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SystemJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    m: usize,
    k: usize,
    dim: usize,
    generators: Vec<Vec<i8>>,
}

impl From<&CliffordSystem> for SystemJson {
    fn from(s: &CliffordSystem) -> Self {
        Self {
            m: s.m,
            k: s.k,
            dim: s.dim,
            generators: s
                .generators
                .iter()
                .map(|g| g.row_major().to_vec())
                .collect(),
        }
    }
}

impl TryFrom<SystemJson> for CliffordSystem {
    type Error = Error;

    fn try_from(raw: SystemJson) -> Result<Self> {
        let generators = raw
            .generators
            .into_iter()
            .map(|g| IntMatrix::from_row_major(raw.dim, g))
            .collect::<Result<Vec<_>>>()?;
        let sys = CliffordSystem::from_parts(raw.m, raw.k, generators)?;
        if sys.dim != raw.dim {
            return Err(invalid(format!(
                "dim {} does not match k*delta(m) = {}",
                raw.dim, sys.dim
            )));
        }
        Ok(sys)
    }
}

/// Left multiplications `L_1, ..., L_{d-1}` by the imaginary units of a
/// composition algebra of dimension `d` given by its oriented unit triples
/// `(a, b, c)` meaning `e_a e_b = e_c` (and cyclic shifts).
fn left_multiplications(d: usize, triples: &[[usize; 3]]) -> Vec<IntMatrix> {
    // unit product e_a e_b = sign * e_c
    let product = |a: usize, b: usize| -> (i8, usize) {
        if a == 0 {
            return (1, b);
        }
        if b == 0 {
            return (1, a);
        }
        if a == b {
            return (-1, 0);
        }
        for t in triples {
            for r in 0..3 {
                let (x, y, z) = (t[r], t[(r + 1) % 3], t[(r + 2) % 3]);
                if (x, y) == (a, b) {
                    return (1, z);
                }
                if (y, x) == (a, b) {
                    return (-1, z);
                }
            }
        }
        unreachable!("incomplete multiplication table for e{a} e{b}")
    };
    (1..d)
        .map(|a| {
            let mut l = IntMatrix::zeros(d);
            for b in 0..d {
                let (sign, c) = product(a, b);
                l.set(c, b, sign);
            }
            l
        })
        .collect()
}

const QUATERNION_TRIPLES: [[usize; 3]; 1] = [[1, 2, 3]];

/// Fano-plane table `e_i e_{i+1} = e_{i+3}` (indices mod 7 in 1..=7).
const OCTONION_TRIPLES: [[usize; 3]; 7] = [
    [1, 2, 4],
    [2, 3, 5],
    [3, 4, 6],
    [4, 5, 7],
    [5, 6, 1],
    [6, 7, 2],
    [7, 1, 3],
];

fn quarter_turn() -> IntMatrix {
    IntMatrix::from_row_major(2, vec![0, -1, 1, 0]).unwrap()
}

pub(crate) fn octonion_left_multiplications() -> Vec<IntMatrix> {
    left_multiplications(8, &OCTONION_TRIPLES)
}

/// Generators for `m <= 8`: prefixes of the largest family of each size.
fn base_generators(m: usize) -> Vec<IntMatrix> {
    match m {
        1 => Vec::new(),
        2 => vec![quarter_turn()],
        3 | 4 => left_multiplications(4, &QUATERNION_TRIPLES)
            .into_iter()
            .take(m - 1)
            .collect(),
        5..=8 => octonion_left_multiplications()
            .into_iter()
            .take(m - 1)
            .collect(),
        _ => unreachable!(),
    }
}

/// The eight anticommuting generators `C_1, ..., C_8` on `R^16`:
/// `C_1 = J ⊗ I_8`, `C_{1+i} = diag(1, -1) ⊗ L_{e_i}`.
fn sixteen_generators() -> Vec<IntMatrix> {
    let sigma = IntMatrix::from_row_major(2, vec![1, 0, 0, -1]).unwrap();
    let mut c = vec![quarter_turn().kron(&IntMatrix::identity(8))];
    c.extend(
        octonion_left_multiplications()
            .iter()
            .map(|l| sigma.kron(l)),
    );
    c
}

fn irreducible_generators(m: usize) -> Vec<IntMatrix> {
    if m <= 8 {
        return base_generators(m);
    }
    let inner = irreducible_generators(m - 8);
    let d = delta(m - 8).expect("m - 8 >= 1");
    let c = sixteen_generators();
    // omega = C_1 ... C_8 is symmetric, squares to I and anticommutes with each C_i.
    let omega = c[1..]
        .iter()
        .fold(c[0].clone(), |acc, ci| acc.mul_signed_perm(ci));
    let id = IntMatrix::identity(d);
    let mut out: Vec<IntMatrix> = c.iter().map(|ci| ci.kron(&id)).collect();
    out.extend(inner.iter().map(|a| omega.kron(a)));
    out
}

/// Irreducible system (`k = 1`) on `R^{δ(m)}`.
pub fn build_irreducible(m: usize) -> Result<CliffordSystem> {
    if m < 2 {
        return Err(invalid(format!(
            "build_irreducible requires m >= 2, got {m}"
        )));
    }
    CliffordSystem::from_parts(m, 1, irreducible_generators(m))
}

/// `k` diagonal copies of the irreducible system, subject to `k δ(m) >= m + 2`
/// (i.e. `n - m >= 1`).
pub fn build_system(m: usize, k: usize) -> Result<CliffordSystem> {
    if m < 2 || k < 1 {
        return Err(invalid(format!("need m >= 2 and k >= 1, got m={m}, k={k}")));
    }
    let dim = k * delta(m)?;
    if dim < m + 2 {
        return Err(invalid(format!(
            "multiplicity constraint violated: n - m = {} - {m} < 1 (k*delta(m) = {dim} < m + 2 = {})",
            dim as i64 - 1,
            m + 2
        )));
    }
    let gens = irreducible_generators(m)
        .iter()
        .map(|g| g.block_diag(k))
        .collect();
    CliffordSystem::from_parts(m, k, gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RelationKind {
    /// `A_p^T != -A_p`
    Skew,
    /// `A_p A_q + A_q A_p != -2 δ_pq I`
    Anticommute,
}

/// A violated relation; generator indices are one-based, `p <= q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RelationFailure {
    pub p: usize,
    pub q: usize,
    pub kind: RelationKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub ok: bool,
    pub checked: usize,
    pub first_failure: Option<RelationFailure>,
}

/// Checks skew-symmetry of every generator, then the anticommutation
/// relations, exactly.
pub fn verify_relations(sys: &CliffordSystem) -> RelationReport {
    let gens = sys.generators();
    let n = sys.dim();
    let mut checked = 0;
    let fail = |p, q, kind, checked| RelationReport {
        ok: false,
        checked,
        first_failure: Some(RelationFailure { p, q, kind }),
    };
    for (p, a) in gens.iter().enumerate() {
        checked += 1;
        let skew = (0..n).all(|i| (0..n).all(|j| a.get(j, i) == -a.get(i, j)));
        if !skew {
            return fail(p + 1, p + 1, RelationKind::Skew, checked);
        }
    }
    for (p, a) in gens.iter().enumerate() {
        for (q, b) in gens.iter().enumerate().skip(p) {
            checked += 1;
            let ab = a.mul_wide(b);
            let ba = b.mul_wide(a);
            let target = if p == q { -2 } else { 0 };
            let holds = (0..n).all(|i| {
                (0..n).all(|j| {
                    let expect = if i == j { target } else { 0 };
                    ab.get(i, j) + ba.get(i, j) == expect
                })
            });
            if !holds {
                return fail(p + 1, q + 1, RelationKind::Anticommute, checked);
            }
        }
    }
    RelationReport {
        ok: true,
        checked,
        first_failure: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_table() {
        let expect = [1, 2, 4, 4, 8, 8, 8, 8, 16, 32, 64, 64, 128, 128, 128, 128];
        for (i, &d) in expect.iter().enumerate() {
            assert_eq!(delta(i + 1).unwrap(), d, "delta({})", i + 1);
        }
        assert!(matches!(delta(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn delta_period_eight() {
        for m in 1..=8 {
            assert_eq!(delta(m + 8).unwrap(), 16 * delta(m).unwrap());
        }
    }

    #[test]
    fn m2_is_quarter_turn() {
        let s = build_irreducible(2).unwrap();
        assert_eq!(s.dim(), 2);
        let g = &s.generators()[0];
        let j = quarter_turn();
        assert!(g == &j || g == &j.neg());
        assert!(verify_relations(&s).ok);
    }

    #[test]
    fn only_2x2_integer_solutions_are_quarter_turns() {
        // brute force over {-1,0,1}^4
        let mut found = Vec::new();
        for code in 0..81 {
            let mut c = code;
            let data: Vec<i8> = (0..4)
                .map(|_| {
                    let v = (c % 3) as i8 - 1;
                    c /= 3;
                    v
                })
                .collect();
            let g = IntMatrix::from_row_major(2, data).unwrap();
            let s = CliffordSystem::from_parts(2, 1, vec![g.clone()]).unwrap();
            if verify_relations(&s).ok {
                found.push(g);
            }
        }
        assert_eq!(found.len(), 2);
        assert!(found.contains(&quarter_turn()));
        assert!(found.contains(&quarter_turn().neg()));
    }

    #[test]
    fn octonion_system_m5() {
        let s = build_irreducible(5).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.num_generators(), 4);
        assert!(verify_relations(&s).ok);
        let full = CliffordSystem::from_parts(8, 1, octonion_left_multiplications()).unwrap();
        assert!(verify_relations(&full).ok);
    }

    #[test]
    fn recursion_m10() {
        let s = build_irreducible(10).unwrap();
        assert_eq!(s.num_generators(), 9);
        assert_eq!(s.dim(), 32);
        assert!(verify_relations(&s).ok);
    }

    #[test]
    fn truncation_is_prefix() {
        let g7 = build_irreducible(7).unwrap();
        let g8 = build_irreducible(8).unwrap();
        assert_eq!(g7.generators(), &g8.generators()[..6]);
        let g11 = build_irreducible(11).unwrap();
        let g12 = build_irreducible(12).unwrap();
        assert_eq!(g11.generators(), &g12.generators()[..10]);
    }

    #[test]
    fn build_system_examples() {
        let s = build_system(2, 2).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.generators()[0], quarter_turn().block_diag(2));
        let s = build_system(3, 3).unwrap();
        assert_eq!((s.num_generators(), s.dim()), (2, 12));
        match build_system(2, 1) {
            Err(Error::InvalidParameter(msg)) => {
                assert!(msg.contains("2") && msg.contains("4"), "{msg}");
            }
            other => panic!("expected invalid parameter, got {other:?}"),
        }
    }

    #[test]
    fn negated_generator_still_passes() {
        let s = build_irreducible(4).unwrap();
        let mut gens = s.generators().to_vec();
        gens[1] = gens[1].neg();
        let t = CliffordSystem::from_parts(4, 1, gens).unwrap();
        assert!(verify_relations(&t).ok);
    }

    #[test]
    fn zeroed_entry_reports_pair() {
        let s = build_irreducible(4).unwrap();
        // zero a skew pair of entries so skew-symmetry survives but A^2 = -I fails
        let mut gens = s.generators().to_vec();
        let g = &mut gens[1];
        let (i, j) = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .find(|&(i, j)| g.get(i, j) != 0)
            .unwrap();
        g.set(i, j, 0);
        g.set(j, i, 0);
        let t = CliffordSystem::from_parts(4, 1, gens).unwrap();
        let r = verify_relations(&t);
        assert!(!r.ok);
        let f = r.first_failure.unwrap();
        assert_eq!(f.kind, RelationKind::Anticommute);
        assert_eq!((f.p, f.q), (1, 2));

        // a single zeroed entry breaks skew-symmetry of that generator
        let mut gens = s.generators().to_vec();
        let g = &mut gens[2];
        let (i, j) = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .find(|&(i, j)| g.get(i, j) != 0)
            .unwrap();
        g.set(i, j, 0);
        let t = CliffordSystem::from_parts(4, 1, gens).unwrap();
        let f = verify_relations(&t).first_failure.unwrap();
        assert_eq!((f.p, f.q, f.kind), (3, 3, RelationKind::Skew));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = build_system(5, 2).unwrap();
        let j = s.to_json().unwrap();
        let back = CliffordSystem::from_json(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), j);
        assert!(j.starts_with("{\"m\":5,\"k\":2,\"dim\":16,\"generators\":[["));
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(
            CliffordSystem::from_json(r#"{"m":2,"k":1,"dim":2,"generators":[[0,-1,1]]}"#).is_err()
        );
        assert!(CliffordSystem::from_json(
            r#"{"m":2,"k":1,"dim":3,"generators":[[0,0,0,0,0,0,0,0,0]]}"#
        )
        .is_err());
        assert!(
            CliffordSystem::from_json(r#"{"m":2,"k":1,"dim":2,"generators":[[0,-2,2,0]]}"#)
                .is_err()
        );
    }
}
