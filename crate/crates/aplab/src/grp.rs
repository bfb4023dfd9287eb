//! Finite abelian group abstraction: 𝔽_q^n and ℤ/N with canonical element
//! indexing, dual-group characters, and subspace linear algebra over 𝔽_q.
//!
//! Elements are indices in [0, |G|). For ℤ/N the index is the residue; for
//! 𝔽_q^n the index encodes base-q digits, little-endian (coordinate i is
//! digit i). Dual elements share the same encoding (self-dual indexing); the
//! pairing is fixed by the character convention
//!
//!   γ_r(x) = e^{2πi·rx/N}   (cyclic),
//!   γ_v(x) = e^{2πi·⟨v,x⟩/q} (vector space),
//!
//! and every downstream Fourier formula uses the matching conjugation.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Hard cap on group order for dense storage.
pub const MAX_ORDER: u64 = 1 << 20;

/// Cap below which brute-force oracles are allowed to run.
pub const BRUTE_FORCE_CAP: u64 = 1 << 12;

/// Element of a group, by canonical index.
pub type Elem = u32;

/// Element of the dual group. Shares the element encoding.
pub type DualElem = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// 𝔽_q^n, q prime (odd for the 3AP driver; q = 2 allowed for experiments).
    VectorSpace { q: u32, n: u32 },
    /// ℤ/N.
    Cyclic { n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Group {
    kind: GroupKind,
    order: u64,
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    if m.is_multiple_of(2) {
        return m == 2;
    }
    let mut d = 3u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Group {
    /// Constructs 𝔽_q^n. Errors on non-prime q or order beyond the cap.
    pub fn vector_space(q: u32, n: u32) -> Result<Self> {
        if !is_prime(q as u64) {
            return Err(Error::NonPrime(q as u64));
        }
        if n == 0 {
            return Err(Error::Domain("need n >= 1".into()));
        }
        let mut order: u64 = 1;
        for _ in 0..n {
            order = order
                .checked_mul(q as u64)
                .filter(|&o| o <= MAX_ORDER)
                .ok_or(Error::SizeLimit(u64::MAX))?;
        }
        Ok(Group {
            kind: GroupKind::VectorSpace { q, n },
            order,
        })
    }

    /// Constructs ℤ/N.
    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("need N >= 1".into()));
        }
        if n > MAX_ORDER {
            return Err(Error::SizeLimit(n));
        }
        Ok(Group {
            kind: GroupKind::Cyclic { n },
            order: n,
        })
    }

    /// Parses the descriptor grammar `v:q:n` or `z:N`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let parts: Vec<&str> = descriptor.trim().split(':').collect();
        match parts.as_slice() {
            ["v", q, n] => {
                let q: u32 = q
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad q in `{descriptor}`")))?;
                let n: u32 = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad n in `{descriptor}`")))?;
                Group::vector_space(q, n)
            }
            ["z", n] => {
                let n: u64 = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad N in `{descriptor}`")))?;
                Group::cyclic(n)
            }
            _ => Err(Error::Parse(format!("bad group descriptor `{descriptor}`"))),
        }
    }

    /// Formats the descriptor, inverse of [`Group::parse`].
    pub fn descriptor(&self) -> String {
        match self.kind {
            GroupKind::VectorSpace { q, n } => format!("v:{q}:{n}"),
            GroupKind::Cyclic { n } => format!("z:{n}"),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_vector_space(&self) -> bool {
        matches!(self.kind, GroupKind::VectorSpace { .. })
    }

    pub fn is_cyclic(&self) -> bool {
        matches!(self.kind, GroupKind::Cyclic { .. })
    }

    /// (q, n) of a vector-space group.
    pub fn qn(&self) -> Option<(u32, u32)> {
        match self.kind {
            GroupKind::VectorSpace { q, n } => Some((q, n)),
            GroupKind::Cyclic { .. } => None,
        }
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    /// Base-q digits of an element, little-endian. Cyclic groups yield the
    /// single residue.
    pub fn decode(&self, x: Elem) -> Vec<u32> {
        match self.kind {
            GroupKind::VectorSpace { q, n } => {
                let mut v = Vec::with_capacity(n as usize);
                let mut r = x;
                for _ in 0..n {
                    v.push(r % q);
                    r /= q;
                }
                v
            }
            GroupKind::Cyclic { .. } => vec![x],
        }
    }

    pub fn encode(&self, digits: &[u32]) -> Elem {
        match self.kind {
            GroupKind::VectorSpace { q, n } => {
                debug_assert_eq!(digits.len(), n as usize);
                let mut x: u64 = 0;
                for &d in digits.iter().rev() {
                    x = x * q as u64 + (d % q) as u64;
                }
                x as Elem
            }
            GroupKind::Cyclic { n } => (digits[0] as u64 % n) as Elem,
        }
    }

    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        match self.kind {
            GroupKind::VectorSpace { q, n } => {
                let (mut out, mut pow, mut a, mut b) = (0u64, 1u64, x, y);
                for _ in 0..n {
                    let s = (a % q + b % q) % q;
                    out += s as u64 * pow;
                    pow *= q as u64;
                    a /= q;
                    b /= q;
                }
                out as Elem
            }
            GroupKind::Cyclic { n } => ((x as u64 + y as u64) % n) as Elem,
        }
    }

    pub fn neg(&self, x: Elem) -> Elem {
        match self.kind {
            GroupKind::VectorSpace { q, n } => {
                let (mut out, mut pow, mut a) = (0u64, 1u64, x);
                for _ in 0..n {
                    let d = a % q;
                    let s = if d == 0 { 0 } else { q - d };
                    out += s as u64 * pow;
                    pow *= q as u64;
                    a /= q;
                }
                out as Elem
            }
            GroupKind::Cyclic { n } => ((n - x as u64) % n) as Elem,
        }
    }

    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    /// Scalar multiple k·x (k taken mod the exponent of the group).
    pub fn scale(&self, k: u64, x: Elem) -> Elem {
        match self.kind {
            GroupKind::VectorSpace { q, n } => {
                let k = (k % q as u64) as u32;
                let (mut out, mut pow, mut a) = (0u64, 1u64, x);
                for _ in 0..n {
                    let d = (a % q) as u64 * k as u64 % q as u64;
                    out += d * pow;
                    pow *= q as u64;
                    a /= q;
                }
                out as Elem
            }
            GroupKind::Cyclic { n } => ((k % n) * (x as u64) % n) as Elem,
        }
    }

    /// ⟨v, x⟩ mod q for a vector-space group; r·x mod N for a cyclic one.
    /// This is the exponent of the character pairing.
    pub fn pairing(&self, gamma: DualElem, x: Elem) -> u64 {
        match self.kind {
            GroupKind::VectorSpace { q, n } => {
                let (mut acc, mut a, mut b) = (0u64, gamma, x);
                for _ in 0..n {
                    acc = (acc + (a % q) as u64 * (b % q) as u64) % q as u64;
                    a /= q;
                    b /= q;
                }
                acc
            }
            GroupKind::Cyclic { n } => (gamma as u64) * (x as u64) % n,
        }
    }

    /// Character value γ(x); a unit complex number, multiplicative in x.
    pub fn char_eval(&self, gamma: DualElem, x: Elem) -> Complex64 {
        let (num, den) = match self.kind {
            GroupKind::VectorSpace { q, .. } => (self.pairing(gamma, x), q as u64),
            GroupKind::Cyclic { n } => (self.pairing(gamma, x), n),
        };
        Complex64::from_polar(1.0, TAU * num as f64 / den as f64)
    }

    /// |γ(x) − 1| = 2|sin(π·θ)| with θ the pairing fraction; the chord metric
    /// used by Bohr-set widths.
    pub fn chord(&self, gamma: DualElem, x: Elem) -> f64 {
        let (num, den) = match self.kind {
            GroupKind::VectorSpace { q, .. } => (self.pairing(gamma, x), q as u64),
            GroupKind::Cyclic { n } => (self.pairing(gamma, x), n),
        };
        2.0 * (std::f64::consts::PI * num as f64 / den as f64).sin().abs()
    }
}

// ---------------------------------------------------------------------------
// Linear algebra over 𝔽_q
// ---------------------------------------------------------------------------

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u32, q: u32) -> u32 {
    mod_pow(a as u64, q as u64 - 2, q as u64) as u32
}

/// In-place reduced row echelon form over 𝔽_q; returns the nonzero rows.
#[allow(clippy::needless_range_loop)]
fn rref(mut rows: Vec<Vec<u32>>, q: u32) -> Vec<Vec<u32>> {
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows[0].len();
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        let Some(src) = (pivot_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = inv_mod(rows[pivot_row][col], q);
        for v in rows[pivot_row].iter_mut() {
            *v = (*v as u64 * inv as u64 % q as u64) as u32;
        }
        for r in 0..rows.len() {
            if r != pivot_row && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in 0..ncols {
                    let sub = (f as u64 * rows[pivot_row][c] as u64) % q as u64;
                    rows[r][c] = ((rows[r][c] as u64 + q as u64 - sub) % q as u64) as u32;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    rows
}

/// Rank over 𝔽_q of a set of dual elements viewed as coordinate vectors.
/// Equals the codimension of [`annihilator_subspace`] on the same set.
pub fn span_dim(group: &Group, dual: &[DualElem]) -> Result<usize> {
    let (q, _n) = group
        .qn()
        .ok_or(Error::UnsupportedKind("span_dim needs a vector-space group"))?;
    let rows: Vec<Vec<u32>> = dual.iter().map(|&g| group.decode(g)).collect();
    Ok(rref(rows, q).len())
}

/// Subspace of 𝔽_q^n, stored as an RREF basis together with the RREF
/// constraint rows it annihilates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    q: u32,
    n: usize,
    basis: Vec<Vec<u32>>,
    constraints: Vec<Vec<u32>>,
}

impl Subspace {
    pub fn codim(&self) -> usize {
        self.constraints.len()
    }

    pub fn dim(&self) -> usize {
        self.n - self.codim()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn size(&self) -> u64 {
        (self.q as u64).pow(self.dim() as u32)
    }

    pub fn contains(&self, group: &Group, x: Elem) -> bool {
        let digits = group.decode(x);
        self.constraints.iter().all(|row| {
            let mut acc = 0u64;
            for (a, b) in row.iter().zip(digits.iter()) {
                acc += *a as u64 * *b as u64;
            }
            acc.is_multiple_of(self.q as u64)
        })
    }

    /// All element indices of the subspace, sorted ascending.
    pub fn elements(&self, group: &Group) -> Vec<Elem> {
        let mut elems: Vec<Elem> = vec![0];
        for b in &self.basis {
            let bi = group.encode(b);
            let mut grown = Vec::with_capacity(elems.len() * self.q as usize);
            for &e in &elems {
                let mut cur = e;
                grown.push(cur);
                for _ in 1..self.q {
                    cur = group.add(cur, bi);
                    grown.push(cur);
                }
            }
            elems = grown;
        }
        elems.sort_unstable();
        elems
    }
}

/// The subspace {x : ⟨v, x⟩ = 0 for all v ∈ Δ}. Its codimension is the
/// 𝔽_q-rank of Δ.
pub fn annihilator_subspace(group: &Group, dual: &[DualElem]) -> Result<Subspace> {
    let (q, n) = group.qn().ok_or(Error::UnsupportedKind(
        "annihilator subspaces need a vector-space group; Bohr sets serve the cyclic case",
    ))?;
    let n = n as usize;
    let rows: Vec<Vec<u32>> = dual.iter().map(|&g| group.decode(g)).collect();
    let constraints = rref(rows, q);
    // Nullspace basis: one vector per free column.
    let pivots: Vec<usize> = constraints
        .iter()
        .map(|row| row.iter().position(|&v| v != 0).expect("nonzero RREF row"))
        .collect();
    let mut basis = Vec::with_capacity(n - constraints.len());
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; n];
        v[free] = 1;
        for (row, &p) in constraints.iter().zip(pivots.iter()) {
            // pivot coefficient is 1 after RREF
            v[p] = (q - row[free] % q) % q;
        }
        basis.push(v);
    }
    let basis = rref(basis, q);
    Ok(Subspace {
        q,
        n,
        basis,
        constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_group_basics() {
        let g = Group::vector_space(3, 4).unwrap();
        assert_eq!(g.order(), 81);
        let g = Group::cyclic(97).unwrap();
        assert_eq!(g.order(), 97);
        assert!(matches!(
            Group::vector_space(4, 2),
            Err(Error::NonPrime(4))
        ));
        assert!(matches!(Group::cyclic(1 << 21), Err(Error::SizeLimit(_))));
        assert!(matches!(
            Group::vector_space(2, 21),
            Err(Error::SizeLimit(_))
        ));
        // q = 2 is allowed at the group layer.
        assert!(Group::vector_space(2, 4).is_ok());
    }

    #[test]
    fn descriptor_round_trip() {
        for d in ["v:3:4", "z:97", "v:2:10"] {
            assert_eq!(Group::parse(d).unwrap().descriptor(), d);
        }
        assert!(Group::parse("w:3").is_err());
        assert!(Group::parse("v:3").is_err());
    }

    #[test]
    fn encode_decode_inverse() {
        let g = Group::vector_space(5, 3).unwrap();
        for x in g.elems() {
            assert_eq!(g.encode(&g.decode(x)), x);
        }
    }

    #[test]
    fn char_trivial_and_small_cases() {
        let g = Group::cyclic(4).unwrap();
        for x in g.elems() {
            assert!((g.char_eval(0, x) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // γ=1, x=2 on ℤ/4 → e^{iπ} = −1
        assert!((g.char_eval(1, 2) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);

        // 𝔽₃²: γ=(1,0), x=(1,1) → ⟨v,x⟩ = 1 → e^{2πi/3}
        let g = Group::vector_space(3, 2).unwrap();
        let gamma = g.encode(&[1, 0]);
        let x = g.encode(&[1, 1]);
        let expect = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((g.char_eval(gamma, x) - expect).norm() < 1e-12);
    }

    #[test]
    fn char_multiplicative_exhaustive_small() {
        for g in [
            Group::cyclic(12).unwrap(),
            Group::cyclic(13).unwrap(),
            Group::vector_space(3, 2).unwrap(),
            Group::vector_space(2, 4).unwrap(),
            Group::vector_space(5, 2).unwrap(),
        ] {
            assert!(g.order() <= 256);
            for gamma in g.elems() {
                for x in g.elems() {
                    for y in g.elems() {
                        let lhs = g.char_eval(gamma, g.add(x, y));
                        let rhs = g.char_eval(gamma, x) * g.char_eval(gamma, y);
                        assert!((lhs - rhs).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn char_unit_modulus() {
        let g = Group::cyclic(101).unwrap();
        for gamma in [0, 1, 7, 50, 100] {
            for x in [0, 1, 13, 100] {
                assert!((g.char_eval(gamma, x).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn annihilator_examples() {
        let g = Group::vector_space(3, 4).unwrap();
        // Δ = {} → V = G
        let v = annihilator_subspace(&g, &[]).unwrap();
        assert_eq!(v.codim(), 0);
        assert_eq!(v.size(), 81);
        assert_eq!(v.elements(&g).len(), 81);

        // Δ = {e1, e2} → codim 2, |V| = 9
        let e1 = g.encode(&[1, 0, 0, 0]);
        let e2 = g.encode(&[0, 1, 0, 0]);
        let v = annihilator_subspace(&g, &[e1, e2]).unwrap();
        assert_eq!(v.codim(), 2);
        assert_eq!(v.size(), 9);
        let elems = v.elements(&g);
        assert_eq!(elems.len(), 9);
        for &x in &elems {
            assert!(v.contains(&g, x));
            assert_eq!(g.pairing(e1, x), 0);
            assert_eq!(g.pairing(e2, x), 0);
        }

        // Parallel vectors span rank 1.
        let two_e1 = g.encode(&[2, 0, 0, 0]);
        let v = annihilator_subspace(&g, &[e1, two_e1]).unwrap();
        assert_eq!(v.codim(), 1);
    }

    #[test]
    fn annihilator_rejects_cyclic() {
        let g = Group::cyclic(7).unwrap();
        assert!(matches!(
            annihilator_subspace(&g, &[1]),
            Err(Error::UnsupportedKind(_))
        ));
    }

    /// Independent Gaussian-elimination oracle: rank via forward elimination
    /// with partial pivoting, written separately from `rref`.
    #[allow(clippy::needless_range_loop)]
    fn rank_oracle(mut m: Vec<Vec<u32>>, q: u32) -> usize {
        let ncols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..ncols {
            if let Some(r) = (rank..m.len()).find(|&r| m[r][col] != 0) {
                m.swap(rank, r);
                for r2 in rank + 1..m.len() {
                    if m[r2][col] != 0 {
                        let f = (m[r2][col] as u64 * inv_mod(m[rank][col], q) as u64
                            % q as u64) as u32;
                        for c in 0..ncols {
                            let sub = f as u64 * m[rank][c] as u64 % q as u64;
                            m[r2][c] = ((m[r2][c] as u64 + q as u64 - sub) % q as u64) as u32;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn span_dim_matches_elimination_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for (q, n) in [(5u32, 3u32), (3, 4), (7, 3)] {
            let g = Group::vector_space(q, n).unwrap();
            for _ in 0..100 {
                let k = rng.gen_range(0..=5usize);
                let dual: Vec<DualElem> =
                    (0..k).map(|_| rng.gen_range(0..g.order()) as u32).collect();
                let rows: Vec<Vec<u32>> = dual.iter().map(|&d| g.decode(d)).collect();
                let want = rank_oracle(rows, q);
                assert_eq!(span_dim(&g, &dual).unwrap(), want);
                assert_eq!(
                    annihilator_subspace(&g, &dual).unwrap().codim(),
                    want,
                    "codim must equal span rank"
                );
            }
        }
    }

    #[test]
    fn subspace_size_and_membership_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = Group::vector_space(3, 5).unwrap();
        for _ in 0..20 {
            let k = rng.gen_range(0..=3usize);
            let dual: Vec<DualElem> =
                (0..k).map(|_| rng.gen_range(0..g.order()) as u32).collect();
            let v = annihilator_subspace(&g, &dual).unwrap();
            let elems = v.elements(&g);
            assert_eq!(elems.len() as u64, v.size());
            let count = g.elems().filter(|&x| v.contains(&g, x)).count();
            assert_eq!(count as u64, v.size());
        }
    }
}
