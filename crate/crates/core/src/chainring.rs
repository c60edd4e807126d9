//! Linear algebra over the finite chain ring `Z/p^N`.
//!
//! Row spans are put into Howell form, the canonical echelon form over a
//! chain ring: two matrices have the same row span iff their Howell forms
//! are identical. This makes membership, span equality, kernels,
//! intersections and preimages decidable by exact arithmetic.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// The ring `Z/p^N`. Cheap to copy; every matrix carries one and
/// operations insist that the contexts agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainContext {
    p: u64,
    precision: u32,
    modulus: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainError {
    /// `p` not prime, or `p^N` does not fit in a machine word.
    BadContext,
    ContextMismatch,
    DimensionMismatch,
    /// An action matrix does not map the relation span into itself.
    NotAnEndomorphism,
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::BadContext => write!(f, "p must be prime and p^N must fit in 63 bits"),
            ChainError::ContextMismatch => write!(f, "chain ring contexts differ"),
            ChainError::DimensionMismatch => write!(f, "matrix dimensions are incompatible"),
            ChainError::NotAnEndomorphism => {
                write!(f, "action does not preserve the relation span")
            }
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ChainContext {
    pub fn new(p: u64, precision: u32) -> Result<Self, ChainError> {
        if !is_prime(p) || precision == 0 {
            return Err(ChainError::BadContext);
        }
        let mut modulus: u64 = 1;
        for _ in 0..precision {
            modulus = modulus.checked_mul(p).ok_or(ChainError::BadContext)?;
            if modulus >= 1u64 << 63 {
                return Err(ChainError::BadContext);
            }
        }
        Ok(ChainContext { p, precision, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime, lower precision. Used when an operation loses `i`
    /// digits of p-adic accuracy.
    pub fn lower(&self, drop: u32) -> Result<Self, ChainError> {
        if drop >= self.precision {
            return Err(ChainError::BadContext);
        }
        ChainContext::new(self.p, self.precision - drop)
    }

    pub fn reduce_i64(&self, x: i64) -> u64 {
        let m = self.modulus as i64;
        (((x % m) + m) % m) as u64
    }

    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + (self.modulus - b % self.modulus) as u128;
        (s % self.modulus as u128) as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a % self.modulus == 0 {
            0
        } else {
            self.modulus - a % self.modulus
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// p-adic valuation of a residue, with `v(0) = N`.
    pub fn valuation(&self, x: u64) -> u32 {
        let mut x = x % self.modulus;
        if x == 0 {
            return self.precision;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: u64) -> bool {
        x % self.p != 0 && x % self.modulus != 0
    }

    /// Inverse of a unit, by lifting the mod-p inverse.
    pub fn inv(&self, x: u64) -> Option<u64> {
        let x = x % self.modulus;
        if x % self.p == 0 {
            return None;
        }
        // inverse mod p by Fermat
        let mut inv = 1u64;
        let mut base = x % self.p;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                inv = inv * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        // Hensel lift: y <- y (2 - x y)
        let mut y = inv % self.modulus;
        let mut prec = 1;
        while prec < self.precision {
            let t = self.sub(2 % self.modulus, self.mul(x, y));
            y = self.mul(y, t);
            prec *= 2;
        }
        debug_assert_eq!(self.mul(x, y), 1 % self.modulus);
        Some(y)
    }

    pub fn pow_p(&self, e: u32) -> u64 {
        if e >= self.precision {
            return 0;
        }
        let mut r = 1u64;
        for _ in 0..e {
            r *= self.p;
        }
        r % self.modulus
    }
}

/// Dense matrix over `Z/p^N`, row-major. Vectors act on the left:
/// the map represented by `m` is `x -> x * m` on row vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMatrix {
    ctx: ChainContext,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl ChainMatrix {
    pub fn new(ctx: ChainContext, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self, ChainError> {
        if entries.len() != rows * cols {
            return Err(ChainError::DimensionMismatch);
        }
        let entries = entries.into_iter().map(|x| ctx.reduce(x)).collect();
        Ok(ChainMatrix { ctx, rows, cols, entries })
    }

    pub fn from_i64(ctx: ChainContext, rows: usize, cols: usize, entries: &[i64]) -> Result<Self, ChainError> {
        if entries.len() != rows * cols {
            return Err(ChainError::DimensionMismatch);
        }
        Ok(ChainMatrix {
            ctx,
            rows,
            cols,
            entries: entries.iter().map(|&x| ctx.reduce_i64(x)).collect(),
        })
    }

    pub fn zero(ctx: ChainContext, rows: usize, cols: usize) -> Self {
        ChainMatrix { ctx, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(ctx: ChainContext, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            m.entries[i * n + i] = ctx.reduce(1);
        }
        m
    }

    pub fn from_rows(ctx: ChainContext, cols: usize, rows: &[Vec<u64>]) -> Result<Self, ChainError> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(ChainError::DimensionMismatch);
            }
            entries.extend(r.iter().map(|&x| ctx.reduce(x)));
        }
        Ok(ChainMatrix { ctx, rows: rows.len(), cols, entries })
    }

    pub fn ctx(&self) -> ChainContext {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: u64) {
        self.entries[r * self.cols + c] = self.ctx.reduce(x);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &ChainMatrix) -> Result<ChainMatrix, ChainError> {
        if self.ctx != other.ctx {
            return Err(ChainError::ContextMismatch);
        }
        if self.cols != other.rows {
            return Err(ChainError::DimensionMismatch);
        }
        let ctx = self.ctx;
        let mut out = ChainMatrix::zero(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let t = ctx.add(out.get(i, j), ctx.mul(a, other.get(k, j)));
                    out.entries[i * out.cols + j] = t;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: u64) -> ChainMatrix {
        let ctx = self.ctx;
        ChainMatrix {
            ctx,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| ctx.mul(x, c)).collect(),
        }
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &ChainMatrix) -> Result<ChainMatrix, ChainError> {
        if self.ctx != other.ctx || self.cols != other.cols {
            return Err(ChainError::DimensionMismatch);
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(ChainMatrix { ctx: self.ctx, rows: self.rows + other.rows, cols: self.cols, entries })
    }

    /// Reduce all entries into a lower-precision context.
    pub fn reduce_to(&self, ctx: ChainContext) -> ChainMatrix {
        ChainMatrix {
            ctx,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| ctx.reduce(x)).collect(),
        }
    }
}

/// Pivot of a Howell form: row index, column, and the p-valuation `v`
/// of the pivot entry `p^v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pivot {
    pub row: usize,
    pub col: usize,
    pub valuation: u32,
}

/// Canonical echelon representative of a row span over `Z/p^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    matrix: ChainMatrix,
    pivots: Vec<Pivot>,
}

impl HowellForm {
    pub fn matrix(&self) -> &ChainMatrix {
        &self.matrix
    }

    pub fn pivots(&self) -> &[Pivot] {
        &self.pivots
    }

    pub fn ambient(&self) -> usize {
        self.matrix.cols
    }

    pub fn ctx(&self) -> ChainContext {
        self.matrix.ctx
    }

    pub fn rank_rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn is_zero_span(&self) -> bool {
        self.pivots.is_empty()
    }

    /// log_p of the number of elements in the span.
    pub fn cardinality_log_p(&self) -> u64 {
        let n = self.matrix.ctx.precision as u64;
        self.pivots.iter().map(|p| n - p.valuation as u64).sum()
    }

    /// Span of the full ambient space?
    pub fn is_full(&self) -> bool {
        self.pivots.len() == self.ambient() && self.pivots.iter().all(|p| p.valuation == 0)
    }

    pub fn zero(ctx: ChainContext, ambient: usize) -> Self {
        HowellForm { matrix: ChainMatrix::zero(ctx, 0, ambient), pivots: Vec::new() }
    }

    pub fn full(ctx: ChainContext, ambient: usize) -> Self {
        howell(&ChainMatrix::identity(ctx, ambient)).expect("identity is well formed")
    }
}

fn row_sub_scaled(ctx: ChainContext, dst: &mut [u64], src: &[u64], c: u64) {
    for (d, &s) in dst.iter_mut().zip(src.iter()) {
        *d = ctx.sub(*d, ctx.mul(c, s));
    }
}

fn row_scale(ctx: ChainContext, row: &mut [u64], c: u64) {
    for x in row.iter_mut() {
        *x = ctx.mul(*x, c);
    }
}

/// Howell form of the row span of `m`.
///
/// Echelonization with deterministic pivot choice (minimal p-valuation,
/// then lowest row index), followed by insertion of the annihilator
/// multiples `p^(N-v) * row` so that the Howell property holds, and
/// reduction of entries above each pivot modulo the pivot.
pub fn howell(m: &ChainMatrix) -> Result<HowellForm, ChainError> {
    let ctx = m.ctx;
    let n = ctx.precision;
    let mut work: Vec<Vec<u64>> = m.row_vecs();
    let mut placed: Vec<(usize, u32, Vec<u64>)> = Vec::new(); // (col, val, row)

    for col in 0..m.cols {
        loop {
            // pick the row with minimal valuation at this column
            let mut best: Option<(usize, u32)> = None;
            for (i, r) in work.iter().enumerate() {
                if r[col] != 0 {
                    let v = ctx.valuation(r[col]);
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((i, v));
                    }
                }
            }
            let (idx, v) = match best {
                Some(b) => b,
                None => break,
            };
            let mut pivot_row = work.swap_remove(idx);
            // normalize pivot entry to p^v
            let unit = pivot_row[col] / ctx.pow_p(v);
            let inv = ctx.inv(unit).expect("unit part is invertible");
            row_scale(ctx, &mut pivot_row, inv);
            debug_assert_eq!(pivot_row[col], ctx.pow_p(v));
            // eliminate the column from every remaining work row
            let pv = ctx.pow_p(v);
            for r in work.iter_mut() {
                if r[col] != 0 {
                    let c = r[col] / pv;
                    row_sub_scaled(ctx, r, &pivot_row, c);
                    debug_assert_eq!(r[col], 0);
                }
            }
            // the annihilator multiple stays in the span and may carry
            // information in later columns
            if v > 0 {
                let ann = ctx.pow_p(n - v);
                let mut extra: Vec<u64> = pivot_row.iter().map(|&x| ctx.mul(x, ann)).collect();
                extra[col] = 0;
                if extra.iter().any(|&x| x != 0) {
                    work.push(extra);
                }
            }
            placed.push((col, v, pivot_row));
            break;
        }
    }

    // reduce entries above each pivot modulo the pivot value
    for i in 0..placed.len() {
        let (col, v, _) = placed[i];
        let pv = ctx.pow_p(v);
        for j in 0..i {
            let q = placed[j].2[col] / pv;
            if q != 0 {
                let src = placed[i].2.clone();
                row_sub_scaled(ctx, &mut placed[j].2, &src, q);
            }
        }
    }

    let pivots: Vec<Pivot> = placed
        .iter()
        .enumerate()
        .map(|(i, &(col, v, _))| Pivot { row: i, col, valuation: v })
        .collect();
    let rows: Vec<Vec<u64>> = placed.into_iter().map(|(_, _, r)| r).collect();
    let matrix = ChainMatrix::from_rows(ctx, m.cols, &rows)?;
    Ok(HowellForm { matrix, pivots })
}

/// Does the row vector `v` lie in the span?
pub fn membership(v: &[u64], span: &HowellForm) -> Result<bool, ChainError> {
    match reduce_against(v, span)? {
        Some((_, residual)) => Ok(residual.iter().all(|&x| x == 0)),
        None => Ok(false),
    }
}

/// Reduce `v` against the pivots of `span`; returns the combination
/// coefficients (one per Howell row) and the residual. `None` if a pivot
/// column cannot be cleared (the coefficient would not be integral).
pub fn reduce_against(v: &[u64], span: &HowellForm) -> Result<Option<(Vec<u64>, Vec<u64>)>, ChainError> {
    if v.len() != span.ambient() {
        return Err(ChainError::DimensionMismatch);
    }
    let ctx = span.ctx();
    let mut w: Vec<u64> = v.iter().map(|&x| ctx.reduce(x)).collect();
    let mut coeffs = vec![0u64; span.rank_rows()];
    for p in span.pivots() {
        let e = w[p.col];
        if e == 0 {
            continue;
        }
        if ctx.valuation(e) < p.valuation {
            return Ok(None);
        }
        let c = e / ctx.pow_p(p.valuation);
        coeffs[p.row] = c;
        row_sub_scaled(ctx, &mut w, span.matrix().row(p.row), c);
    }
    Ok(Some((coeffs, w)))
}

/// Is every row of `m` contained in `span`?
pub fn span_contains(span: &HowellForm, m: &ChainMatrix) -> Result<bool, ChainError> {
    for r in 0..m.rows() {
        if !membership(m.row(r), span)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn spans_equal(a: &HowellForm, b: &HowellForm) -> bool {
    a.matrix() == b.matrix()
}

/// Left kernel `{x : x * m = 0}` of the map given by `m` on row vectors.
///
/// Runs Howell elimination on `[m | I]` with the `m`-columns first; the
/// Howell property guarantees that the rows with vanishing left block
/// generate the whole kernel.
pub fn kernel(m: &ChainMatrix) -> Result<HowellForm, ChainError> {
    let ctx = m.ctx;
    let aug_cols = m.cols + m.rows;
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(m.rows);
    for i in 0..m.rows {
        let mut r = vec![0u64; aug_cols];
        r[..m.cols].copy_from_slice(m.row(i));
        r[m.cols + i] = ctx.reduce(1);
        rows.push(r);
    }
    let aug = ChainMatrix::from_rows(ctx, aug_cols, &rows)?;
    let h = howell(&aug)?;
    let mut ker_rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..h.rank_rows() {
        let r = h.matrix().row(i);
        if r[..m.cols].iter().all(|&x| x == 0) {
            ker_rows.push(r[m.cols..].to_vec());
        }
    }
    let ker = ChainMatrix::from_rows(ctx, m.rows, &ker_rows)?;
    howell(&ker)
}

/// Intersection of two row spans in the same ambient space.
pub fn intersect(a: &HowellForm, b: &HowellForm) -> Result<HowellForm, ChainError> {
    if a.ambient() != b.ambient() {
        return Err(ChainError::DimensionMismatch);
    }
    if a.ctx() != b.ctx() {
        return Err(ChainError::ContextMismatch);
    }
    let stacked = a.matrix().vstack(b.matrix())?;
    let ker = kernel(&stacked)?;
    // x-part of each kernel row, multiplied into A, spans the intersection
    let ra = a.rank_rows();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..ker.rank_rows() {
        let x = &ker.matrix().row(i)[..ra];
        let xm = ChainMatrix::from_rows(a.ctx(), ra, &[x.to_vec()])?.mul(a.matrix())?;
        rows.push(xm.row(0).to_vec());
    }
    let m = ChainMatrix::from_rows(a.ctx(), a.ambient(), &rows)?;
    howell(&m)
}

/// Largest span `P` with `P * m` contained in `target`.
pub fn preimage(m: &ChainMatrix, target: &HowellForm) -> Result<HowellForm, ChainError> {
    if m.cols != target.ambient() {
        return Err(ChainError::DimensionMismatch);
    }
    if m.ctx != target.ctx() {
        return Err(ChainError::ContextMismatch);
    }
    let stacked = m.vstack(target.matrix())?;
    let ker = kernel(&stacked)?;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..ker.rank_rows() {
        rows.push(ker.matrix().row(i)[..m.rows].to_vec());
    }
    let x = ChainMatrix::from_rows(m.ctx, m.rows, &rows)?;
    howell(&x)
}

/// Image span (row span) of `m`.
pub fn image(m: &ChainMatrix) -> Result<HowellForm, ChainError> {
    howell(m)
}

/// Finitely presented `Z/p^N`-module: ambient free module modulo the row
/// span of `relations`.
#[derive(Clone, Debug)]
pub struct FpModule {
    ambient_rank: usize,
    relations: HowellForm,
}

impl FpModule {
    pub fn new(ambient_rank: usize, relations: HowellForm) -> Result<Self, ChainError> {
        if relations.ambient() != ambient_rank {
            return Err(ChainError::DimensionMismatch);
        }
        Ok(FpModule { ambient_rank, relations })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn relations(&self) -> &HowellForm {
        &self.relations
    }

    /// log_p of the module cardinality: `N * rank` minus log_p of the
    /// relation span size.
    pub fn cardinality_log_p(&self) -> u64 {
        let n = self.relations.ctx().precision as u64;
        n * self.ambient_rank as u64 - self.relations.cardinality_log_p()
    }

    pub fn cardinality(&self) -> Option<u128> {
        let e = self.cardinality_log_p();
        let mut r: u128 = 1;
        for _ in 0..e {
            r = r.checked_mul(self.relations.ctx().p as u128)?;
        }
        Some(r)
    }

    pub fn is_trivial(&self) -> bool {
        self.cardinality_log_p() == 0
    }

    pub fn is_zero_class(&self, v: &[u64]) -> Result<bool, ChainError> {
        membership(v, &self.relations)
    }
}

/// Quotient of the ambient free module by `sub`.
pub fn quotient_presentation(sub: &HowellForm, ambient_rank: usize) -> Result<FpModule, ChainError> {
    FpModule::new(ambient_rank, sub.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nilpotency {
    Nilpotent(u32),
    NotNilpotent,
}

/// Least `k >= 1` with `action^k = 0` on the presented module, searched up
/// to `N * ambient_rank`; the action must preserve the relation span.
pub fn nilpotency_degree(action: &ChainMatrix, module: &FpModule) -> Result<Nilpotency, ChainError> {
    if action.rows != module.ambient_rank || action.cols != module.ambient_rank {
        return Err(ChainError::DimensionMismatch);
    }
    if action.ctx != module.relations.ctx() {
        return Err(ChainError::ContextMismatch);
    }
    let rel = &module.relations;
    let moved = rel.matrix().mul(action)?;
    if !span_contains(rel, &moved)? {
        return Err(ChainError::NotAnEndomorphism);
    }
    let bound = module.relations.ctx().precision as u64 * module.ambient_rank as u64;
    let mut power = action.clone();
    for k in 1..=bound {
        if span_contains(rel, &power)? {
            return Ok(Nilpotency::Nilpotent(k as u32));
        }
        power = power.mul(action)?;
    }
    Ok(Nilpotency::NotNilpotent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z9() -> ChainContext {
        ChainContext::new(3, 2).unwrap()
    }

    #[test]
    fn context_rejects_bad_inputs() {
        assert!(ChainContext::new(4, 2).is_err());
        assert!(ChainContext::new(3, 0).is_err());
        assert!(ChainContext::new(3, 45).is_err());
    }

    #[test]
    fn scalar_arithmetic() {
        let ctx = z9();
        assert_eq!(ctx.add(5, 7), 3);
        assert_eq!(ctx.mul(4, 4), 7);
        assert_eq!(ctx.valuation(6), 1);
        assert_eq!(ctx.valuation(0), 2);
        assert_eq!(ctx.inv(2), Some(5));
        assert_eq!(ctx.inv(3), None);
    }

    #[test]
    fn howell_identity_is_fixed() {
        let ctx = z9();
        let id = ChainMatrix::identity(ctx, 2);
        let h = howell(&id).unwrap();
        assert_eq!(h.matrix(), &id);
        assert_eq!(h.pivots().len(), 2);
    }

    #[test]
    fn howell_is_idempotent_and_order_independent() {
        let ctx = z9();
        let a = ChainMatrix::from_i64(ctx, 2, 2, &[3, 0, 0, 1]).unwrap();
        let b = ChainMatrix::from_i64(ctx, 2, 2, &[0, 1, 3, 0]).unwrap();
        let ha = howell(&a).unwrap();
        let hb = howell(&b).unwrap();
        assert_eq!(ha, hb);
        assert_eq!(howell(ha.matrix()).unwrap(), ha);
        let vals: Vec<u32> = ha.pivots().iter().map(|p| p.valuation).collect();
        assert_eq!(vals, vec![1, 0]);
    }

    #[test]
    fn howell_finds_span_elements() {
        // (3,0) = (3,3) - (0,3) lies in the span
        let ctx = z9();
        let m = ChainMatrix::from_i64(ctx, 2, 2, &[3, 3, 0, 3]).unwrap();
        let h = howell(&m).unwrap();
        assert!(membership(&[3, 0], &h).unwrap());
        let has_30 = (0..h.rank_rows()).any(|i| h.matrix().row(i) == [3, 0]);
        assert!(has_30);
    }

    #[test]
    fn membership_examples() {
        let ctx = z9();
        let m = ChainMatrix::from_i64(ctx, 2, 2, &[3, 0, 0, 1]).unwrap();
        let h = howell(&m).unwrap();
        assert!(membership(&[0, 0], &h).unwrap());
        assert!(!membership(&[1, 0], &h).unwrap());
        assert!(membership(&[3, 1], &h).unwrap());
    }

    #[test]
    fn kernel_examples() {
        let ctx = z9();
        let zero = ChainMatrix::zero(ctx, 1, 1);
        assert!(kernel(&zero).unwrap().is_full());
        let id = ChainMatrix::identity(ctx, 2);
        assert!(kernel(&id).unwrap().is_zero_span());
        let three = ChainMatrix::from_i64(ctx, 1, 1, &[3]).unwrap();
        let k = kernel(&three).unwrap();
        assert_eq!(k.matrix().row_vecs(), vec![vec![3]]);
    }

    #[test]
    fn duality_count_holds() {
        // |ker| * |im| = p^(N * rows)
        let ctx = z9();
        let m = ChainMatrix::from_i64(ctx, 2, 2, &[3, 1, 6, 2]).unwrap();
        let k = kernel(&m).unwrap();
        let im = image(&m).unwrap();
        assert_eq!(k.cardinality_log_p() + im.cardinality_log_p(), 2 * 2);
    }

    #[test]
    fn intersect_examples() {
        let ctx = z9();
        let full = HowellForm::full(ctx, 2);
        let x = howell(&ChainMatrix::from_i64(ctx, 1, 2, &[1, 0]).unwrap()).unwrap();
        let y = howell(&ChainMatrix::from_i64(ctx, 1, 2, &[0, 1]).unwrap()).unwrap();
        assert_eq!(intersect(&x, &full).unwrap(), x);
        assert!(intersect(&x, &y).unwrap().is_zero_span());
        let s3 = howell(&ChainMatrix::from_i64(ctx, 1, 1, &[3]).unwrap()).unwrap();
        let s1 = howell(&ChainMatrix::from_i64(ctx, 1, 1, &[1]).unwrap()).unwrap();
        assert_eq!(intersect(&s3, &s1).unwrap(), s3);
    }

    #[test]
    fn preimage_examples() {
        let ctx = z9();
        let id = ChainMatrix::identity(ctx, 2);
        let full = HowellForm::full(ctx, 2);
        assert!(preimage(&id, &full).unwrap().is_full());
        let t = howell(&ChainMatrix::from_i64(ctx, 1, 2, &[3, 0]).unwrap()).unwrap();
        assert_eq!(preimage(&id, &t).unwrap(), t);
        // mult-by-3 sends everything into (3)
        let three = ChainMatrix::from_i64(ctx, 1, 1, &[3]).unwrap();
        let t3 = howell(&ChainMatrix::from_i64(ctx, 1, 1, &[3]).unwrap()).unwrap();
        assert!(preimage(&three, &t3).unwrap().is_full());
    }

    #[test]
    fn quotient_cardinalities() {
        let ctx = z9();
        let full = HowellForm::full(ctx, 1);
        assert_eq!(quotient_presentation(&full, 1).unwrap().cardinality(), Some(1));
        let zero = HowellForm::zero(ctx, 1);
        assert_eq!(quotient_presentation(&zero, 1).unwrap().cardinality(), Some(9));
        let s3 = howell(&ChainMatrix::from_i64(ctx, 1, 1, &[3]).unwrap()).unwrap();
        assert_eq!(quotient_presentation(&s3, 1).unwrap().cardinality(), Some(3));
    }

    #[test]
    fn nilpotency_examples() {
        let ctx = z9();
        let zero_sub = HowellForm::zero(ctx, 1);
        let m = quotient_presentation(&zero_sub, 1).unwrap();
        let zero_action = ChainMatrix::zero(ctx, 1, 1);
        assert_eq!(nilpotency_degree(&zero_action, &m).unwrap(), Nilpotency::Nilpotent(1));
        let id = ChainMatrix::identity(ctx, 1);
        assert_eq!(nilpotency_degree(&id, &m).unwrap(), Nilpotency::NotNilpotent);
        let three = ChainMatrix::from_i64(ctx, 1, 1, &[3]).unwrap();
        assert_eq!(nilpotency_degree(&three, &m).unwrap(), Nilpotency::Nilpotent(2));
    }
}
