//! Free modules over truncated `W[[u]]` with a Frobenius-semilinear
//! structure map, given by the matrix whose columns are the images of the
//! basis vectors. A module may carry an E-denominator exponent `s`: the
//! actual operator is `E^{-s}` times the stored matrix, and `s = 0` means
//! the module is effective.
//!
//! Everything module-theoretic (height, kernels, images, exactness) is
//! decided by flattening to `Z/p^N`-spans and using Howell forms.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::chainring::{
    howell, image, kernel, membership, spans_equal, ChainError, ChainMatrix,
    FpModule, HowellForm,
};
use crate::rng::Rng;
use crate::series::{RingContext, SeriesError, SigmaElem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KisinError {
    DimensionMismatch,
    /// Determinant of the Frobenius matrix vanishes, or does not factor as
    /// a unit times a power of E, at the working precision.
    DegenerateFrobenius,
    /// Operation requires an effective module (denominator exponent 0).
    NotEffective,
    NotComposable,
    InsufficientPrecision,
    Series(SeriesError),
    Chain(ChainError),
}

impl From<SeriesError> for KisinError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::InsufficientPrecision => KisinError::InsufficientPrecision,
            other => KisinError::Series(other),
        }
    }
}

impl From<ChainError> for KisinError {
    fn from(e: ChainError) -> Self {
        KisinError::Chain(e)
    }
}

impl fmt::Display for KisinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KisinError::DimensionMismatch => write!(f, "matrix dimensions are incompatible"),
            KisinError::DegenerateFrobenius => write!(f, "frobenius determinant is not unit * E^h"),
            KisinError::NotEffective => write!(f, "module carries an E-denominator"),
            KisinError::NotComposable => write!(f, "morphisms do not compose"),
            KisinError::InsufficientPrecision => write!(f, "insufficient precision"),
            KisinError::Series(e) => write!(f, "{}", e),
            KisinError::Chain(e) => write!(f, "{}", e),
        }
    }
}

/// Dense matrix over truncated Sigma, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<SigmaElem>,
}

impl SigmaMat {
    pub fn new(rows: usize, cols: usize, entries: Vec<SigmaElem>) -> Result<Self, KisinError> {
        if entries.len() != rows * cols {
            return Err(KisinError::DimensionMismatch);
        }
        Ok(SigmaMat { rows, cols, entries })
    }

    pub fn zero(ctx: &RingContext, rows: usize, cols: usize) -> Self {
        SigmaMat { rows, cols, entries: vec![ctx.sigma_zero(); rows * cols] }
    }

    pub fn identity(ctx: &RingContext, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            m.entries[i * n + i] = ctx.sigma_one();
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &SigmaElem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: SigmaElem) {
        self.entries[r * self.cols + c] = x;
    }

    pub fn min_prec(&self) -> u32 {
        self.entries.iter().map(|e| e.prec).min().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn column(&self, c: usize) -> Vec<SigmaElem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> SigmaMat {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        SigmaMat { rows: self.cols, cols: self.rows, entries }
    }

    pub fn mul(&self, ctx: &RingContext, other: &SigmaMat) -> Result<SigmaMat, KisinError> {
        if self.cols != other.rows {
            return Err(KisinError::DimensionMismatch);
        }
        let mut out = SigmaMat::zero(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ctx.sigma_zero();
                for k in 0..self.cols {
                    let t = ctx.sigma_mul(self.get(i, k), other.get(k, j))?;
                    acc = ctx.sigma_add(&acc, &t)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, ctx: &RingContext, other: &SigmaMat) -> Result<SigmaMat, KisinError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(KisinError::DimensionMismatch);
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| ctx.sigma_sub(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SigmaMat { rows: self.rows, cols: self.cols, entries })
    }

    pub fn scale_elem(&self, ctx: &RingContext, f: &SigmaElem) -> Result<SigmaMat, KisinError> {
        let entries = self
            .entries
            .iter()
            .map(|a| ctx.sigma_mul(a, f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SigmaMat { rows: self.rows, cols: self.cols, entries })
    }

    pub fn frobenius(&self, ctx: &RingContext) -> Result<SigmaMat, KisinError> {
        let entries = self
            .entries
            .iter()
            .map(|a| ctx.frobenius_sigma(a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SigmaMat { rows: self.rows, cols: self.cols, entries })
    }

    pub fn kron(&self, ctx: &RingContext, other: &SigmaMat) -> Result<SigmaMat, KisinError> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = SigmaMat::zero(ctx, rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        let prod = ctx.sigma_mul(self.get(i1, j1), other.get(i2, j2))?;
                        out.set(i1 * other.rows + i2, j1 * other.cols + j2, prod);
                    }
                }
            }
        }
        Ok(out)
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SigmaMat {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        SigmaMat { rows: rows.len(), cols: cols.len(), entries }
    }

    /// Laplace expansion; ranks here stay small.
    pub fn det(&self, ctx: &RingContext) -> Result<SigmaElem, KisinError> {
        if self.rows != self.cols {
            return Err(KisinError::DimensionMismatch);
        }
        let n = self.rows;
        if n == 0 {
            return Ok(ctx.sigma_one());
        }
        if n == 1 {
            return Ok(self.get(0, 0).clone());
        }
        let mut acc = ctx.sigma_zero();
        let rest: Vec<usize> = (1..n).collect();
        for j in 0..n {
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = self.submatrix(&rest, &cols).det(ctx)?;
            let term = ctx.sigma_mul(self.get(0, j), &minor)?;
            acc = if j % 2 == 0 { ctx.sigma_add(&acc, &term)? } else { ctx.sigma_sub(&acc, &term)? };
        }
        Ok(acc)
    }

    /// adj(A) with A * adj(A) = det(A) * I.
    pub fn adjugate(&self, ctx: &RingContext) -> Result<SigmaMat, KisinError> {
        if self.rows != self.cols {
            return Err(KisinError::DimensionMismatch);
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        if n == 1 {
            let mut m = SigmaMat::identity(ctx, 1);
            m.set(0, 0, ctx.sigma_one());
            return Ok(m);
        }
        let mut out = SigmaMat::zero(ctx, n, n);
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let minor = self.submatrix(&rows, &cols).det(ctx)?;
                let val = if (i + j) % 2 == 0 { minor } else { ctx.sigma_neg(&minor) };
                out.set(i, j, val);
            }
        }
        Ok(out)
    }
}

/// Inverse of a unit of truncated Sigma by Newton iteration; the defect
/// `1 - w*v` lies in `(p, u)` and squares away.
pub fn sigma_inv(ctx: &RingContext, w: &SigmaElem) -> Result<SigmaElem, KisinError> {
    let c = ctx.chain_at(w.prec);
    let c0inv = c.inv(w.coeffs[0]).ok_or(KisinError::DegenerateFrobenius)?;
    let mut v = ctx.sigma_reduce(&ctx.sigma_const(c0inv), w.prec);
    let one = ctx.sigma_reduce(&ctx.sigma_one(), w.prec);
    let two = ctx.sigma_add(&one, &one)?;
    for _ in 0..64 {
        let wv = ctx.sigma_mul(w, &v)?;
        if wv == one {
            return Ok(v);
        }
        let t = ctx.sigma_sub(&two, &wv)?;
        v = ctx.sigma_mul(&v, &t)?;
    }
    Err(KisinError::DegenerateFrobenius)
}

/// E-adic valuation of a truncated element, treating it as a polynomial:
/// repeated exact division by E. None when the element is zero.
pub fn e_valuation(ctx: &RingContext, f: &SigmaElem) -> Result<Option<u32>, KisinError> {
    if f.is_zero() {
        return Ok(None);
    }
    let mut cur = f.clone();
    let mut v = 0u32;
    loop {
        let (q, r) = ctx.divrem_by_eis(&cur)?;
        if !r.is_zero() {
            return Ok(Some(v));
        }
        if q.is_zero() {
            // divisible forever at this precision
            return Ok(None);
        }
        cur = q;
        v += 1;
        if v as usize > ctx.trunc() {
            return Err(KisinError::InsufficientPrecision);
        }
    }
}

#[derive(Clone, Debug)]
pub struct KisinModule {
    pub rank: usize,
    /// Column j holds the coordinates of the image of basis vector j.
    pub frobenius: SigmaMat,
    /// The structure map is E^{-denom_exp} times `frobenius`.
    pub denom_exp: u32,
}

pub fn make_kisin(ctx: &RingContext, frobenius: SigmaMat, denom_exp: u32) -> Result<KisinModule, KisinError> {
    if frobenius.rows != frobenius.cols {
        return Err(KisinError::DimensionMismatch);
    }
    let d = frobenius.det(ctx)?;
    if d.is_zero() {
        return Err(KisinError::DegenerateFrobenius);
    }
    Ok(KisinModule { rank: frobenius.rows, frobenius, denom_exp })
}

/// The unit module: rank 1, structure map the identity.
pub fn unit_module(ctx: &RingContext) -> KisinModule {
    KisinModule { rank: 1, frobenius: SigmaMat::identity(ctx, 1), denom_exp: 0 }
}

/// Rank-1 twist with structure map multiplication by (c0^{-1} E)^r.
pub fn twist_module(ctx: &RingContext, r: u32) -> Result<KisinModule, KisinError> {
    let c = ctx.chain();
    let c0inv = c.inv(ctx.c0()).expect("c0 is a unit");
    let mut f = ctx.sigma_one();
    let factor = ctx.sigma_scale(&ctx.eis_sigma(), c0inv);
    for _ in 0..r {
        f = ctx.sigma_mul(&f, &factor)?;
    }
    make_kisin(ctx, SigmaMat { rows: 1, cols: 1, entries: vec![f] }, 0)
}

/// det(frobenius) = w * E^h with w a unit; errors otherwise.
pub fn det_factor(ctx: &RingContext, m: &KisinModule) -> Result<(u32, SigmaElem), KisinError> {
    let mut d = m.frobenius.det(ctx)?;
    if d.is_zero() {
        return Err(KisinError::DegenerateFrobenius);
    }
    let mut h = 0u32;
    loop {
        let (q, r) = ctx.divrem_by_eis(&d)?;
        if r.is_zero() && !q.is_zero() {
            d = q;
            h += 1;
            if h as usize > ctx.trunc() {
                return Err(KisinError::InsufficientPrecision);
            }
        } else {
            break;
        }
    }
    let c = ctx.chain_at(d.prec);
    if !c.is_unit(d.coeffs[0]) {
        return Err(KisinError::DegenerateFrobenius);
    }
    Ok((h, d))
}

// ---- flattening -------------------------------------------------------

/// Flatten a vector of Sigma^d into d*M chain-ring coordinates.
pub fn flatten_vec(ctx: &RingContext, v: &[SigmaElem], prec: u32) -> Vec<u64> {
    let c = ctx.chain_at(prec);
    let mut out = Vec::with_capacity(v.len() * ctx.trunc());
    for x in v {
        out.extend(x.coeffs.iter().map(|&a| c.reduce(a)));
    }
    out
}

/// Howell span of the Sigma-submodule generated by `vecs` in Sigma^d:
/// the chain-ring span of all shifts u^t * v.
pub fn module_span(ctx: &RingContext, d: usize, vecs: &[Vec<SigmaElem>], prec: u32) -> Result<HowellForm, KisinError> {
    let c = ctx.chain_at(prec);
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for v in vecs {
        if v.len() != d {
            return Err(KisinError::DimensionMismatch);
        }
        for t in 0..ctx.trunc() {
            let ut = ctx.sigma_u_pow(t);
            let shifted: Vec<SigmaElem> = v
                .iter()
                .map(|x| ctx.sigma_mul(x, &ut))
                .collect::<Result<Vec<_>, _>>()?;
            let row = flatten_vec(ctx, &shifted, prec);
            if row.iter().any(|&x| x != 0) {
                rows.push(row);
            }
        }
    }
    let mat = ChainMatrix::from_rows(c, d * ctx.trunc(), &rows)?;
    Ok(howell(&mat)?)
}

/// Flattened matrix of the Sigma-linear map with matrix F (columns are
/// images of source basis vectors), acting on flattened row vectors.
pub fn flatten_map(ctx: &RingContext, f: &SigmaMat) -> Result<ChainMatrix, KisinError> {
    let m = ctx.trunc();
    let prec = f.min_prec();
    let c = ctx.chain_at(prec);
    let src = f.cols;
    let tgt = f.rows;
    let mut out = ChainMatrix::zero(c, src * m, tgt * m);
    for j in 0..src {
        for i in 0..tgt {
            let entry = ctx.sigma_reduce(f.get(i, j), prec);
            let block = ctx.mult_matrix_sigma(&entry)?;
            for a in 0..m {
                for b in 0..m {
                    let x = block.get(a, b);
                    if x != 0 {
                        out.set(j * m + a, i * m + b, x);
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---- height and weights ----------------------------------------------

/// Height <= r: E^r e_k lies in the Sigma-span of the frobenius columns
/// for every k.
pub fn check_height(ctx: &RingContext, m: &KisinModule, r: u32) -> Result<bool, KisinError> {
    if m.denom_exp != 0 {
        return Err(KisinError::NotEffective);
    }
    let prec = m.frobenius.min_prec();
    let cols: Vec<Vec<SigmaElem>> = (0..m.rank).map(|j| m.frobenius.column(j)).collect();
    let span = module_span(ctx, m.rank, &cols, prec)?;
    let mut er = ctx.sigma_one();
    for _ in 0..r {
        er = ctx.sigma_mul(&er, &ctx.eis_sigma())?;
    }
    for k in 0..m.rank {
        let mut v = vec![ctx.sigma_zero(); m.rank];
        v[k] = er.clone();
        if !membership(&flatten_vec(ctx, &v, prec), &span)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Hodge-Tate weights from determinantal divisors: d_k is the minimal
/// E-adic valuation over all k x k minors; the weights are the successive
/// differences.
pub fn hodge_tate_weights(ctx: &RingContext, m: &KisinModule) -> Result<Vec<u32>, KisinError> {
    if m.denom_exp != 0 {
        return Err(KisinError::NotEffective);
    }
    let d = m.rank;
    let mut divisors = vec![0u32; d + 1];
    for k in 1..=d {
        let mut best: Option<u32> = None;
        for rmask in 0u32..(1 << d) {
            if rmask.count_ones() as usize != k {
                continue;
            }
            for cmask in 0u32..(1 << d) {
                if cmask.count_ones() as usize != k {
                    continue;
                }
                let rows: Vec<usize> = (0..d).filter(|&i| rmask & (1 << i) != 0).collect();
                let cols: Vec<usize> = (0..d).filter(|&i| cmask & (1 << i) != 0).collect();
                let minor = m.frobenius.submatrix(&rows, &cols).det(ctx)?;
                if let Some(v) = e_valuation(ctx, &minor)? {
                    best = Some(best.map_or(v, |b| b.min(v)));
                    if best == Some(0) && k == 1 {
                        break;
                    }
                }
            }
        }
        divisors[k] = best.ok_or(KisinError::InsufficientPrecision)?;
    }
    Ok((1..=d).map(|k| divisors[k] - divisors[k - 1]).collect())
}

// ---- tensor, dual, twist ----------------------------------------------

pub fn tensor(ctx: &RingContext, m1: &KisinModule, m2: &KisinModule) -> Result<KisinModule, KisinError> {
    let f = m1.frobenius.kron(ctx, &m2.frobenius)?;
    make_kisin(ctx, f, m1.denom_exp + m2.denom_exp)
}

pub fn dual(ctx: &RingContext, m: &KisinModule) -> Result<KisinModule, KisinError> {
    let (h, w) = det_factor(ctx, m)?;
    if h < m.denom_exp {
        return Err(KisinError::DegenerateFrobenius);
    }
    let winv = sigma_inv(ctx, &w)?;
    let f = m.frobenius.adjugate(ctx)?.transpose().scale_elem(ctx, &winv)?;
    make_kisin(ctx, f, h - m.denom_exp)
}

pub fn internal_hom(ctx: &RingContext, m1: &KisinModule, m2: &KisinModule) -> Result<KisinModule, KisinError> {
    let d = dual(ctx, m1)?;
    tensor(ctx, &d, m2)
}

/// Tensor by the rank-1 twist: s <= 0 multiplies the frobenius by
/// (c0^{-1}E)^{-s}; s > 0 multiplies by c0^s and raises the denominator.
pub fn twist(ctx: &RingContext, m: &KisinModule, s: i32) -> Result<KisinModule, KisinError> {
    if s == 0 {
        return Ok(m.clone());
    }
    let c = ctx.chain();
    if s < 0 {
        let c0inv = c.inv(ctx.c0()).expect("c0 is a unit");
        let mut factor = ctx.sigma_one();
        let step = ctx.sigma_scale(&ctx.eis_sigma(), c0inv);
        for _ in 0..(-s) {
            factor = ctx.sigma_mul(&factor, &step)?;
        }
        let f = m.frobenius.scale_elem(ctx, &factor)?;
        make_kisin(ctx, f, m.denom_exp)
    } else {
        let mut c0p = 1u64;
        for _ in 0..s {
            c0p = c.mul(c0p, ctx.c0());
        }
        let f = m.frobenius.scale_elem(ctx, &ctx.sigma_const(c0p))?;
        make_kisin(ctx, f, m.denom_exp + s as u32)
    }
}

/// Divide out E from the frobenius as long as every entry divides exactly,
/// lowering the denominator exponent; normalizes twist round trips.
pub fn reduce_denominator(ctx: &RingContext, m: &KisinModule) -> Result<KisinModule, KisinError> {
    let mut cur = m.clone();
    'outer: while cur.denom_exp > 0 {
        let mut quots = Vec::with_capacity(cur.frobenius.entries.len());
        for e in &cur.frobenius.entries {
            let (q, r) = ctx.divrem_by_eis(e)?;
            if !r.is_zero() {
                break 'outer;
            }
            quots.push(q);
        }
        cur = KisinModule {
            rank: cur.rank,
            frobenius: SigmaMat { rows: cur.frobenius.rows, cols: cur.frobenius.cols, entries: quots },
            denom_exp: cur.denom_exp - 1,
        };
    }
    Ok(cur)
}

// ---- morphisms ---------------------------------------------------------

#[derive(Clone, Debug)]
pub struct KisinMorphism {
    pub source: KisinModule,
    pub target: KisinModule,
    /// d_tgt x d_src; column j holds the image of source basis vector j.
    pub matrix: SigmaMat,
}

impl KisinMorphism {
    pub fn new(source: KisinModule, target: KisinModule, matrix: SigmaMat) -> Result<Self, KisinError> {
        if matrix.rows != target.rank || matrix.cols != source.rank {
            return Err(KisinError::DimensionMismatch);
        }
        Ok(KisinMorphism { source, target, matrix })
    }
}

/// First entry where semilinear compatibility fails, or None if the map is
/// a morphism: E^{s_tgt} F Phi_src = E^{s_src} Phi_tgt phi(F).
pub fn morphism_defect(ctx: &RingContext, f: &KisinMorphism) -> Result<Option<(usize, usize)>, KisinError> {
    let mut es_tgt = ctx.sigma_one();
    for _ in 0..f.target.denom_exp {
        es_tgt = ctx.sigma_mul(&es_tgt, &ctx.eis_sigma())?;
    }
    let mut es_src = ctx.sigma_one();
    for _ in 0..f.source.denom_exp {
        es_src = ctx.sigma_mul(&es_src, &ctx.eis_sigma())?;
    }
    let lhs = f.matrix.mul(ctx, &f.source.frobenius)?.scale_elem(ctx, &es_tgt)?;
    let rhs = f.target.frobenius.mul(ctx, &f.matrix.frobenius(ctx)?)?.scale_elem(ctx, &es_src)?;
    let diff = lhs.sub(ctx, &rhs)?;
    for i in 0..diff.rows {
        for j in 0..diff.cols {
            if !diff.get(i, j).is_zero() {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

pub fn check_morphism(ctx: &RingContext, f: &KisinMorphism) -> Result<bool, KisinError> {
    Ok(morphism_defect(ctx, f)?.is_none())
}

pub fn compose(ctx: &RingContext, first: &KisinMorphism, second: &KisinMorphism) -> Result<KisinMorphism, KisinError> {
    if first.target.rank != second.source.rank {
        return Err(KisinError::NotComposable);
    }
    let matrix = second.matrix.mul(ctx, &first.matrix)?;
    KisinMorphism::new(first.source.clone(), second.target.clone(), matrix)
}

/// Kernel of the flattened underlying map, as a chain-ring span.
pub fn kernel_span(ctx: &RingContext, f: &KisinMorphism) -> Result<HowellForm, KisinError> {
    Ok(kernel(&flatten_map(ctx, &f.matrix)?)?)
}

/// Image of the flattened underlying map; equals the Sigma-span of the
/// images of the basis vectors.
pub fn image_span(ctx: &RingContext, f: &KisinMorphism) -> Result<HowellForm, KisinError> {
    Ok(image(&flatten_map(ctx, &f.matrix)?)?)
}

/// Cokernel as a finitely presented chain-ring module, together with the
/// flattened multiplication-by-u action for annihilator questions.
pub fn cokernel_presentation(ctx: &RingContext, f: &KisinMorphism) -> Result<(FpModule, ChainMatrix), KisinError> {
    let im = image_span(ctx, f)?;
    let ambient = f.target.rank * ctx.trunc();
    let module = FpModule::new(ambient, im)?;
    let u_mat = {
        let mut mat = SigmaMat::zero(ctx, f.target.rank, f.target.rank);
        for i in 0..f.target.rank {
            mat.set(i, i, ctx.sigma_u_pow(1));
        }
        flatten_map(ctx, &mat)?
    };
    Ok((module, u_mat))
}

// ---- the ideal lemma ---------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealVerdict {
    /// The ideal equals (p^n) at the working precision.
    PrincipalPPower(u32),
    /// The hypothesis I contained in Sigma*phi(I) fails.
    FailsHypothesis,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct IdealWitness {
    pub generators: Vec<SigmaElem>,
    pub verdict: IdealVerdict,
    /// For FailsHypothesis: an element of I outside Sigma*phi(I).
    pub witness: Option<SigmaElem>,
}

/// Check the hypothesis I contained in Sigma*phi(I) and classify I as a
/// power of p. Frobenius guard failures and boundary effects yield
/// Indeterminate, never a silent wrong answer.
pub fn key_lemma_check(ctx: &RingContext, gens: &[SigmaElem]) -> Result<IdealWitness, KisinError> {
    let out = |verdict: IdealVerdict, witness: Option<SigmaElem>| IdealWitness {
        generators: gens.to_vec(),
        verdict,
        witness,
    };
    let prec = ctx.precision();
    let vecs: Vec<Vec<SigmaElem>> = gens.iter().map(|g| vec![g.clone()]).collect();
    let ideal = module_span(ctx, 1, &vecs, prec)?;
    if ideal.is_zero_span() {
        return Ok(out(IdealVerdict::Indeterminate, None));
    }
    let mut phi_gens: Vec<Vec<SigmaElem>> = Vec::new();
    for g in gens {
        match ctx.frobenius_sigma(g) {
            Ok(fg) => phi_gens.push(vec![fg]),
            Err(SeriesError::InsufficientPrecision) => {
                return Ok(out(IdealVerdict::Indeterminate, None));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let phi_span = module_span(ctx, 1, &phi_gens, prec)?;
    for i in 0..ideal.rank_rows() {
        let row = ideal.matrix().row(i);
        if !membership(row, &phi_span)? {
            let w = SigmaElem { coeffs: row.to_vec(), prec };
            return Ok(out(IdealVerdict::FailsHypothesis, Some(w)));
        }
    }
    // find the least n with p^n in I
    let c = ctx.chain();
    let mut level: Option<u32> = None;
    for n in 0..prec {
        let mut v = vec![0u64; ctx.trunc()];
        v[0] = c.pow_p(n);
        if membership(&v, &ideal)? {
            level = Some(n);
            break;
        }
    }
    let n = match level {
        Some(n) => n,
        None => return Ok(out(IdealVerdict::Indeterminate, None)),
    };
    // and confirm I is contained in (p^n)
    let contained = (0..ideal.rank_rows()).all(|i| {
        ideal.matrix().row(i).iter().all(|&x| c.valuation(x) >= n)
    });
    if contained {
        Ok(out(IdealVerdict::PrincipalPPower(n), None))
    } else {
        Ok(out(IdealVerdict::Indeterminate, None))
    }
}

// ---- exact sequences ---------------------------------------------------

/// Truncation-boundary tolerance for kernel questions. A map that is
/// injective over the untruncated ring can have flattened kernel elements
/// concentrated at the u-truncation edge or at maximal p-valuation; the
/// guards bound where such junk can live, from the entries of the matrix.
fn junk_guards(ctx: &RingContext, f: &SigmaMat) -> (usize, u32) {
    let mut g_u = 0usize;
    let mut g_p = 0u32;
    for e in &f.entries {
        if let Some(d) = e.top_degree() {
            g_u = g_u.max(d);
        }
        if !e.is_zero() {
            let c = ctx.chain_at(e.prec);
            let min_v = e
                .coeffs
                .iter()
                .filter(|&&x| x != 0)
                .map(|&x| c.valuation(x))
                .min()
                .unwrap_or(0);
            g_p = g_p.max(min_v);
        }
    }
    (g_u, g_p)
}

/// Span of allowed boundary junk in Sigma^d at the given precision:
/// vectors supported at u-degrees >= M - g_u, plus p^(prec - g_p) times
/// everything when g_p > 0.
pub fn junk_span(ctx: &RingContext, d: usize, g_u: usize, g_p: u32, prec: u32) -> Result<HowellForm, KisinError> {
    let c = ctx.chain_at(prec);
    let m = ctx.trunc();
    let ambient = d * m;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..d {
        for t in m.saturating_sub(g_u)..m {
            let mut row = vec![0u64; ambient];
            row[i * m + t] = c.reduce(1);
            rows.push(row);
        }
    }
    if g_p > 0 && g_p < prec {
        let pv = c.pow_p(prec - g_p);
        for i in 0..ambient {
            let mut row = vec![0u64; ambient];
            row[i] = pv;
            rows.push(row);
        }
    }
    let mat = ChainMatrix::from_rows(c, ambient, &rows)?;
    Ok(howell(&mat)?)
}

#[derive(Clone, Debug)]
pub struct SequenceReport {
    pub morphisms_valid: Vec<bool>,
    pub head_injective: bool,
    pub composites_zero: Vec<bool>,
    /// ker = im up to truncation-boundary junk.
    pub junctions_exact: Vec<bool>,
    /// ker = im as Howell spans on the nose.
    pub junctions_strict: Vec<bool>,
    pub tail_surjective: bool,
    /// For a non-surjective tail into a rank-1 module: the image ideal.
    pub image_ideal: Option<IdealWitness>,
}

impl SequenceReport {
    pub fn short_exact(&self) -> bool {
        self.morphisms_valid.iter().all(|&b| b)
            && self.head_injective
            && self.composites_zero.iter().all(|&b| b)
            && self.junctions_exact.iter().all(|&b| b)
            && self.tail_surjective
    }

    pub fn left_exact(&self) -> bool {
        self.morphisms_valid.iter().all(|&b| b)
            && self.head_injective
            && self.composites_zero.iter().all(|&b| b)
            && self.junctions_exact.iter().all(|&b| b)
    }
}

/// Verdicts for the augmented sequence 0 -> M_1 -> ... -> M_k: head
/// injectivity, ker = im at every junction, tail surjectivity.
pub fn check_exact_sequence(ctx: &RingContext, seq: &[KisinMorphism]) -> Result<SequenceReport, KisinError> {
    if seq.is_empty() {
        return Err(KisinError::NotComposable);
    }
    for pair in seq.windows(2) {
        if pair[0].target.rank != pair[1].source.rank {
            return Err(KisinError::NotComposable);
        }
    }
    let morphisms_valid = seq
        .iter()
        .map(|f| check_morphism(ctx, f))
        .collect::<Result<Vec<_>, _>>()?;
    let head_injective = {
        let ker = kernel_span(ctx, &seq[0])?;
        if ker.is_zero_span() {
            true
        } else {
            let (g_u, g_p) = junk_guards(ctx, &seq[0].matrix);
            let prec = seq[0].matrix.min_prec();
            let junk = junk_span(ctx, seq[0].source.rank, g_u, g_p, prec)?;
            let ker_r = if ker.ctx() == junk.ctx() {
                ker
            } else {
                howell(&ker.matrix().reduce_to(junk.ctx()))?
            };
            (0..ker_r.rank_rows()).try_fold(true, |acc, i| {
                Ok::<_, KisinError>(acc && membership(ker_r.matrix().row(i), &junk)?)
            })?
        }
    };
    let mut composites_zero = Vec::new();
    let mut junctions_exact = Vec::new();
    let mut junctions_strict = Vec::new();
    for pair in seq.windows(2) {
        let comp = pair[1].matrix.mul(ctx, &pair[0].matrix)?;
        composites_zero.push(comp.is_zero());
        let im = image_span(ctx, &pair[0])?;
        let ker = kernel_span(ctx, &pair[1])?;
        junctions_strict.push(spans_equal(&im, &ker));
        // guarded: im contained in ker, and ker contained in im + junk
        let prec = core::cmp::min(pair[0].matrix.min_prec(), pair[1].matrix.min_prec());
        let c = ctx.chain_at(prec);
        let im_r = howell(&im.matrix().reduce_to(c))?;
        let ker_r = howell(&ker.matrix().reduce_to(c))?;
        let mut ok = crate::chainring::span_contains(&ker_r, im_r.matrix())?;
        if ok {
            let (g_u, g_p) = junk_guards(ctx, &pair[1].matrix);
            let junk = junk_span(ctx, pair[1].source.rank, g_u, g_p, prec)?;
            let widened = howell(&im_r.matrix().vstack(junk.matrix())?)?;
            ok = crate::chainring::span_contains(&widened, ker_r.matrix())?;
        }
        junctions_exact.push(ok);
    }
    let last = seq.last().expect("nonempty");
    let im_last = image_span(ctx, last)?;
    let tail_surjective = im_last.is_full();
    let image_ideal = if !tail_surjective && last.target.rank == 1 {
        let gens: Vec<SigmaElem> = (0..last.source.rank)
            .map(|j| last.matrix.get(0, j).clone())
            .collect();
        Some(key_lemma_check(ctx, &gens)?)
    } else {
        None
    };
    Ok(SequenceReport {
        morphisms_valid,
        head_injective,
        composites_zero,
        junctions_exact,
        junctions_strict,
        tail_surjective,
        image_ideal,
    })
}

// ---- random constructions ----------------------------------------------

fn random_poly(ctx: &RingContext, rng: &mut Rng, deg: usize) -> SigmaElem {
    let mut coeffs = vec![0i64; deg + 1];
    for x in coeffs.iter_mut() {
        *x = rng.below(ctx.chain().modulus()) as i64;
    }
    ctx.sigma_poly(&coeffs)
}

/// Product of random elementary row operations: determinant is a unit.
pub fn random_unimodular(ctx: &RingContext, d: usize, rng: &mut Rng) -> Result<SigmaMat, KisinError> {
    let mut m = SigmaMat::identity(ctx, d);
    if d == 1 {
        // a random unit: unit constant plus a multiple of u
        let c = ctx.chain();
        let unit = loop {
            let x = rng.below(c.modulus());
            if c.is_unit(x) {
                break x;
            }
        };
        let mut f = random_poly(ctx, rng, 2);
        f.coeffs[0] = unit;
        m.set(0, 0, f);
        return Ok(m);
    }
    for _ in 0..(2 * d) {
        let i = rng.below_usize(d);
        let mut j = rng.below_usize(d);
        while j == i {
            j = rng.below_usize(d);
        }
        let f = random_poly(ctx, rng, ctx.e().min(2));
        // row_j += f * row_i
        for col in 0..d {
            let t = ctx.sigma_mul(&f, m.get(i, col))?;
            let s = ctx.sigma_add(m.get(j, col), &t)?;
            m.set(j, col, s);
        }
    }
    Ok(m)
}

/// Random effective module of height <= r: U * diag(E^{t_i}) * V with
/// unimodular U, V and exponents t_i <= r.
pub fn random_height_module(ctx: &RingContext, d: usize, r: u32, rng: &mut Rng) -> Result<KisinModule, KisinError> {
    let u = random_unimodular(ctx, d, rng)?;
    let v = random_unimodular(ctx, d, rng)?;
    let mut diag = SigmaMat::zero(ctx, d, d);
    for i in 0..d {
        let t = rng.below(r as u64 + 1) as u32;
        let mut f = ctx.sigma_one();
        for _ in 0..t {
            f = ctx.sigma_mul(&f, &ctx.eis_sigma())?;
        }
        diag.set(i, i, f);
    }
    let phi = u.mul(ctx, &diag)?.mul(ctx, &v)?;
    make_kisin(ctx, phi, 0)
}

/// Block-triangular extension of m3 by m1: frobenius [[Phi1, B], [0, Phi3]]
/// with the evident inclusion and projection, which are semilinear for any
/// off-block B. The off-block is sampled as Phi1 * C with C random, which
/// keeps the extension at the same height bound as the factors: an
/// arbitrary B can raise the height ([[E, 1], [0, E]] has E-invariants
/// {1, E^2}, not {E, E}).
pub fn random_extension(
    ctx: &RingContext,
    m1: &KisinModule,
    m3: &KisinModule,
    rng: &mut Rng,
) -> Result<(KisinMorphism, KisinMorphism), KisinError> {
    if m1.denom_exp != 0 || m3.denom_exp != 0 {
        return Err(KisinError::NotEffective);
    }
    let d1 = m1.rank;
    let d3 = m3.rank;
    let d2 = d1 + d3;
    let mut phi = SigmaMat::zero(ctx, d2, d2);
    for i in 0..d1 {
        for j in 0..d1 {
            phi.set(i, j, m1.frobenius.get(i, j).clone());
        }
    }
    for i in 0..d3 {
        for j in 0..d3 {
            phi.set(d1 + i, d1 + j, m3.frobenius.get(i, j).clone());
        }
    }
    let mut cmat = SigmaMat::zero(ctx, d1, d3);
    for i in 0..d1 {
        for j in 0..d3 {
            cmat.set(i, j, random_poly(ctx, rng, ctx.e()));
        }
    }
    let b = m1.frobenius.mul(ctx, &cmat)?;
    for i in 0..d1 {
        for j in 0..d3 {
            phi.set(i, d1 + j, b.get(i, j).clone());
        }
    }
    let m2 = make_kisin(ctx, phi, 0)?;
    let mut alpha = SigmaMat::zero(ctx, d2, d1);
    for i in 0..d1 {
        alpha.set(i, i, ctx.sigma_one());
    }
    let mut beta = SigmaMat::zero(ctx, d3, d2);
    for i in 0..d3 {
        beta.set(i, d1 + i, ctx.sigma_one());
    }
    let a = KisinMorphism::new(m1.clone(), m2.clone(), alpha)?;
    let b = KisinMorphism::new(m2, m3.clone(), beta)?;
    Ok((a, b))
}

// ---- the standard rank-2 example ---------------------------------------

/// The rank-2 module with phi(e1) = e1, phi(e2) = -u e1 + E e2. It has
/// height <= 1 and Hodge-Tate weights {0, 1}, and sits in a left exact
/// sequence (example_alpha, example_beta) whose tail is not surjective.
pub fn example_module(ctx: &RingContext) -> Result<KisinModule, KisinError> {
    let mut phi = SigmaMat::zero(ctx, 2, 2);
    phi.set(0, 0, ctx.sigma_one());
    phi.set(0, 1, ctx.sigma_neg(&ctx.sigma_u_pow(1)));
    phi.set(1, 1, ctx.eis_sigma());
    make_kisin(ctx, phi, 0)
}

/// The inclusion of the twist into the example module: t -> -u e1 + p e2.
pub fn example_alpha(ctx: &RingContext) -> Result<KisinMorphism, KisinError> {
    let m = example_module(ctx)?;
    let t = twist_module(ctx, 1)?;
    let p = ctx.p() as i64;
    let mat = SigmaMat::new(
        2,
        1,
        vec![ctx.sigma_neg(&ctx.sigma_u_pow(1)), ctx.sigma_poly(&[p])],
    )?;
    KisinMorphism::new(t, m, mat)
}

/// The map out of the example module: e1 -> p, e2 -> u. Its image is the
/// ideal (p, u), so it is not surjective.
pub fn example_beta(ctx: &RingContext) -> Result<KisinMorphism, KisinError> {
    let m = example_module(ctx)?;
    let p = ctx.p() as i64;
    let mat = SigmaMat::new(1, 2, vec![ctx.sigma_poly(&[p]), ctx.sigma_u_pow(1)])?;
    KisinMorphism::new(m, unit_module(ctx), mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::EisensteinPoly;

    fn ctx3() -> RingContext {
        RingContext::new(3, 4, 30, EisensteinPoly::new(vec![3, 0, 1], 3).unwrap()).unwrap()
    }

    fn counterexample_module(ctx: &RingContext) -> KisinModule {
        example_module(ctx).unwrap()
    }

    fn counterexample_alpha(ctx: &RingContext) -> KisinMorphism {
        example_alpha(ctx).unwrap()
    }

    fn counterexample_beta(ctx: &RingContext) -> KisinMorphism {
        example_beta(ctx).unwrap()
    }

    #[test]
    fn heights() {
        let c = ctx3();
        assert!(check_height(&c, &unit_module(&c), 0).unwrap());
        let t1 = twist_module(&c, 1).unwrap();
        assert!(check_height(&c, &t1, 1).unwrap());
        assert!(!check_height(&c, &t1, 0).unwrap());
        let m = counterexample_module(&c);
        assert!(check_height(&c, &m, 1).unwrap());
        assert!(!check_height(&c, &m, 0).unwrap());
    }

    #[test]
    fn sigma_inv_works() {
        let c = ctx3();
        let w = c.sigma_poly(&[2, 3, 0, 1]);
        let v = sigma_inv(&c, &w).unwrap();
        assert_eq!(c.sigma_mul(&w, &v).unwrap(), c.sigma_one());
        assert!(sigma_inv(&c, &c.sigma_poly(&[3, 1])).is_err());
    }

    #[test]
    fn det_factorization() {
        let c = ctx3();
        let t2 = twist_module(&c, 2).unwrap();
        let (h, w) = det_factor(&c, &t2).unwrap();
        assert_eq!(h, 2);
        // unit part is c0^{-2} = 1 here since c0 = 1
        assert_eq!(w, c.sigma_one());
        let m = counterexample_module(&c);
        let (h2, _) = det_factor(&c, &m).unwrap();
        assert_eq!(h2, 1);
    }

    #[test]
    fn duals() {
        let c = ctx3();
        let u = unit_module(&c);
        let du = dual(&c, &u).unwrap();
        assert_eq!(du.denom_exp, 0);
        assert_eq!(du.frobenius, SigmaMat::identity(&c, 1));
        let t1 = twist_module(&c, 1).unwrap();
        let d1 = dual(&c, &t1).unwrap();
        assert_eq!(d1.denom_exp, 1);
        assert_eq!(d1.frobenius.get(0, 0), &c.sigma_const(c.c0()));
        // double dual is the identity on random rank-2 modules
        let mut rng = Rng::new(5);
        for _ in 0..5 {
            let m = random_height_module(&c, 2, 1, &mut rng).unwrap();
            let dd = dual(&c, &dual(&c, &m).unwrap()).unwrap();
            assert_eq!(dd.denom_exp, m.denom_exp);
            assert_eq!(dd.frobenius, m.frobenius);
        }
    }

    #[test]
    fn tensors_and_twists() {
        let c = ctx3();
        let t1 = twist_module(&c, 1).unwrap();
        let t2 = twist_module(&c, 2).unwrap();
        let tt = tensor(&c, &t1, &t1).unwrap();
        assert_eq!(tt.frobenius, t2.frobenius);
        let m = counterexample_module(&c);
        let mu = tensor(&c, &m, &unit_module(&c)).unwrap();
        assert_eq!(mu.frobenius, m.frobenius);
        // twist round trip clears to the original
        let tw = twist(&c, &twist(&c, &m, -1).unwrap(), 1).unwrap();
        let back = reduce_denominator(&c, &tw).unwrap();
        assert_eq!(back.denom_exp, 0);
        assert_eq!(back.frobenius, m.frobenius);
        assert_eq!(twist(&c, &unit_module(&c), -2).unwrap().frobenius, t2.frobenius);
    }

    #[test]
    fn weights() {
        let c = ctx3();
        assert_eq!(hodge_tate_weights(&c, &unit_module(&c)).unwrap(), vec![0]);
        assert_eq!(hodge_tate_weights(&c, &twist_module(&c, 2).unwrap()).unwrap(), vec![2]);
        let m = counterexample_module(&c);
        assert_eq!(hodge_tate_weights(&c, &m).unwrap(), vec![0, 1]);
    }

    #[test]
    fn weight_properties() {
        let c = ctx3();
        let mut rng = Rng::new(11);
        for _ in 0..5 {
            let a = random_height_module(&c, 2, 1, &mut rng).unwrap();
            let wa = hodge_tate_weights(&c, &a).unwrap();
            // det-weight consistency
            let (h, _) = det_factor(&c, &a).unwrap();
            assert_eq!(wa.iter().sum::<u32>(), h);
            // additivity under tensor with a rank-1 twist
            let t = twist_module(&c, 1).unwrap();
            let at = tensor(&c, &a, &t).unwrap();
            let wat = hodge_tate_weights(&c, &at).unwrap();
            let expect: Vec<u32> = wa.iter().map(|&x| x + 1).collect();
            assert_eq!(wat, expect);
        }
    }

    #[test]
    fn counterexample_morphisms() {
        let c = ctx3();
        assert!(check_morphism(&c, &counterexample_alpha(&c)).unwrap());
        assert!(check_morphism(&c, &counterexample_beta(&c)).unwrap());
        // identity morphism
        let m = counterexample_module(&c);
        let idm = KisinMorphism::new(m.clone(), m.clone(), SigmaMat::identity(&c, 2)).unwrap();
        assert!(check_morphism(&c, &idm).unwrap());
        // a broken map is rejected
        let bad = KisinMorphism::new(
            m.clone(),
            unit_module(&c),
            SigmaMat::new(1, 2, vec![c.sigma_one(), c.sigma_one()]).unwrap(),
        )
        .unwrap();
        assert!(!check_morphism(&c, &bad).unwrap());
    }

    #[test]
    fn counterexample_sequence() {
        let c = ctx3();
        let rep = check_exact_sequence(&c, &[counterexample_alpha(&c), counterexample_beta(&c)]).unwrap();
        assert!(rep.morphisms_valid.iter().all(|&b| b));
        assert!(rep.head_injective);
        assert_eq!(rep.composites_zero, vec![true]);
        assert_eq!(rep.junctions_exact, vec![true]);
        assert!(!rep.tail_surjective);
        let ideal = rep.image_ideal.unwrap();
        assert_eq!(ideal.verdict, IdealVerdict::FailsHypothesis);
        // cokernel of beta has cardinality p
        let (coker, u_act) = cokernel_presentation(&c, &counterexample_beta(&c)).unwrap();
        assert_eq!(coker.cardinality(), Some(3));
        // u acts nilpotently on it
        let rel = coker.relations();
        let moved = rel.matrix().mul(&u_act).unwrap();
        assert!(crate::chainring::span_contains(rel, &moved).unwrap());
    }

    #[test]
    fn trivial_sequences() {
        let c = ctx3();
        let m = counterexample_module(&c);
        let idm = KisinMorphism::new(m.clone(), m.clone(), SigmaMat::identity(&c, 2)).unwrap();
        let rep = check_exact_sequence(&c, &[idm]).unwrap();
        assert!(rep.head_injective);
        assert!(rep.tail_surjective);
        assert!(rep.short_exact());
    }

    #[test]
    fn random_extensions_are_short_exact() {
        let c = ctx3();
        let mut rng = Rng::new(17);
        for _ in 0..3 {
            let m1 = random_height_module(&c, 1, 1, &mut rng).unwrap();
            let m3 = random_height_module(&c, 1, 1, &mut rng).unwrap();
            let (a, b) = random_extension(&c, &m1, &m3, &mut rng).unwrap();
            let rep = check_exact_sequence(&c, &[a, b]).unwrap();
            assert!(rep.short_exact());
            // extension closure of height <= 1
            let m2 = rep_middle(&c, &mut rng);
            let _ = m2;
        }
    }

    fn rep_middle(_c: &RingContext, _rng: &mut Rng) {}

    #[test]
    fn extension_closure_of_height() {
        let c = ctx3();
        let mut rng = Rng::new(23);
        for _ in 0..3 {
            let m1 = random_height_module(&c, 1, 1, &mut rng).unwrap();
            let m3 = random_height_module(&c, 1, 1, &mut rng).unwrap();
            let (a, _) = random_extension(&c, &m1, &m3, &mut rng).unwrap();
            assert!(check_height(&c, &a.target, 1).unwrap());
        }
    }

    #[test]
    fn key_lemma_examples() {
        let c = ctx3();
        let one = key_lemma_check(&c, &[c.sigma_one()]).unwrap();
        assert_eq!(one.verdict, IdealVerdict::PrincipalPPower(0));
        let p2 = key_lemma_check(&c, &[c.sigma_poly(&[9])]).unwrap();
        assert_eq!(p2.verdict, IdealVerdict::PrincipalPPower(2));
        let u = key_lemma_check(&c, &[c.sigma_u_pow(1)]).unwrap();
        assert_eq!(u.verdict, IdealVerdict::FailsHypothesis);
        let pu = key_lemma_check(&c, &[c.sigma_poly(&[3]), c.sigma_u_pow(1)]).unwrap();
        assert_eq!(pu.verdict, IdealVerdict::FailsHypothesis);
        let e = key_lemma_check(&c, &[c.eis_sigma()]).unwrap();
        assert_eq!(e.verdict, IdealVerdict::FailsHypothesis);
    }
}
