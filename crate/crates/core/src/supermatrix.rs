//! Matrices over a [`SuperRing`] and even supermatrices `(A C; D B)`.
//!
//! Layout follows the row-vector convention `(x,θ) = (y,ω)M`: rows are
//! source variables (even first), columns are target components.

use crate::algebra::Parity;
use crate::error::{Error, Result};
use crate::ring::SuperRing;
use crate::scalar::Scalar;

/// Dense matrix with ring entries. `proto` fixes the shape of the zero
/// element, so empty matrices still know their ring.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
    proto: R,
}

impl<R: SuperRing> Mat<R> {
    pub fn zeros(rows: usize, cols: usize, proto: &R) -> Self {
        let z = proto.zero_like();
        Mat {
            rows,
            cols,
            data: vec![z.clone(); rows * cols],
            proto: z,
        }
    }

    pub fn identity(n: usize, proto: &R) -> Self {
        let mut m = Self::zeros(n, n, proto);
        for i in 0..n {
            m.set(i, i, proto.one_like());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>, proto: &R) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.into_iter().flatten().collect();
        Ok(Mat {
            rows: r,
            cols: c,
            data,
            proto: proto.zero_like(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn proto(&self) -> &R {
        &self.proto
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &R)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / self.cols.max(1), k % self.cols.max(1), v))
    }

    pub fn map(&self, f: impl Fn(&R) -> R) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
            proto: self.proto.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, &self.proto);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data,
            proto: self.proto.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub(b))
            .collect();
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data,
            proto: self.proto.clone(),
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|v| v.neg())
    }

    fn same_dims(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Matrix product; entry order is preserved, so odd entries are safe.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols, &self.proto);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.proto.zero_like();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.max_abs()).fold(0.0, f64::max)
    }

    /// `Some(p)` when all entries share parity `p` (zero entries fit any).
    pub fn parity(&self) -> Option<Parity> {
        let mut acc: Option<Parity> = None;
        for v in &self.data {
            if v.is_zero() {
                continue;
            }
            acc = Parity::join(acc, v.parity());
        }
        match acc {
            Some(Parity::Mixed) => None,
            Some(p) => Some(p),
            None => Some(Parity::Even),
        }
    }

    fn require_even_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not square",
                self.rows, self.cols
            )));
        }
        for (i, j, v) in self.entries() {
            if !v.is_zero() && v.parity() != Parity::Even {
                return Err(Error::ParityViolation(format!(
                    "entry ({i},{j}) is not even"
                )));
            }
        }
        Ok(())
    }

    /// Determinant of a square matrix with even (hence commuting) entries.
    pub fn even_det(&self) -> Result<R> {
        self.require_even_square()?;
        if self.rows <= 5 {
            Ok(self.leibniz_det())
        } else {
            self.elimination_det()
        }
    }

    fn leibniz_det(&self) -> R {
        let n = self.rows;
        if n == 0 {
            return self.proto.one_like();
        }
        let mut acc = self.proto.zero_like();
        for (perm, sign) in permutations(n) {
            let mut prod = self.proto.one_like();
            for (i, &p) in perm.iter().enumerate() {
                let e = self.get(i, p);
                if e.is_zero() {
                    prod = self.proto.zero_like();
                    break;
                }
                prod = prod.mul(e);
            }
            if prod.is_zero() {
                continue;
            }
            acc = if sign > 0 {
                acc.add(&prod)
            } else {
                acc.sub(&prod)
            };
        }
        acc
    }

    fn elimination_det(&self) -> Result<R> {
        let n = self.rows;
        let mut m = self.clone();
        let mut det = self.proto.one_like();
        for col in 0..n {
            let pivot = (col..n)
                .filter_map(|r| m.get(r, col).pivot_weight().map(|w| (r, w)))
                .fold(None, |best: Option<(usize, f64)>, (r, w)| match best {
                    Some((_, bw)) if bw >= w => best,
                    _ => Some((r, w)),
                });
            let Some((p, _)) = pivot else {
                // No invertible pivot: the body of the column is zero, so the
                // body determinant vanishes; fall back to the exact expansion.
                return Ok(self.leibniz_det());
            };
            if p != col {
                m.swap_rows(p, col);
                det = det.neg();
            }
            let piv = m.get(col, col).clone();
            det = det.mul(&piv);
            let inv = piv.try_inverse()?;
            for r in col + 1..n {
                let f = m.get(r, col).mul(&inv);
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c).sub(&f.mul(m.get(col, c)));
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> Self {
        let mut out = Self::zeros(self.rows - 1, self.cols - 1, &self.proto);
        let mut ri = 0;
        for r in 0..self.rows {
            if r == skip_r {
                continue;
            }
            let mut ci = 0;
            for c in 0..self.cols {
                if c == skip_c {
                    continue;
                }
                out.set(ri, ci, self.get(r, c).clone());
                ci += 1;
            }
            ri += 1;
        }
        out
    }

    /// Inverse of an even square matrix with invertible body determinant.
    pub fn even_inverse(&self) -> Result<Self> {
        self.require_even_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        if n <= 5 {
            let det = self.leibniz_det();
            let inv_det = det.try_inverse().map_err(|e| match e {
                crate::algebra::AlgebraError::ZeroBody => {
                    Error::SingularBody("determinant has zero body".into())
                }
                other => Error::Algebra(other),
            })?;
            let mut out = Self::zeros(n, n, &self.proto);
            for i in 0..n {
                for j in 0..n {
                    let cof = self.minor(j, i).leibniz_det();
                    let cof = if (i + j) % 2 == 0 { cof } else { cof.neg() };
                    out.set(i, j, cof.mul(&inv_det));
                }
            }
            Ok(out)
        } else {
            self.gauss_jordan_inverse()
        }
    }

    fn gauss_jordan_inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n, &self.proto);
        for col in 0..n {
            let pivot = (col..n)
                .filter_map(|r| m.get(r, col).pivot_weight().map(|w| (r, w)))
                .fold(None, |best: Option<(usize, f64)>, (r, w)| match best {
                    Some((_, bw)) if bw >= w => best,
                    _ => Some((r, w)),
                });
            let Some((p, _)) = pivot else {
                return Err(Error::SingularBody(format!(
                    "no invertible pivot in column {col}"
                )));
            };
            m.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pinv = m.get(col, col).try_inverse()?;
            for c in 0..n {
                m.set(col, c, m.get(col, c).mul(&pinv));
                inv.set(col, c, inv.get(col, c).mul(&pinv));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    m.set(r, c, m.get(r, c).sub(&f.mul(m.get(col, c))));
                    inv.set(r, c, inv.get(r, c).sub(&f.mul(inv.get(col, c))));
                }
            }
        }
        Ok(inv)
    }
}

/// Permutations of `0..n` with their signs (Heap's algorithm).
fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![(perm.clone(), 1)];
    let mut c = vec![0usize; n];
    let mut sign = 1;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Even supermatrix `(A C; D B)`: `A` is m×m even, `B` n×n even, `C` m×n odd,
/// `D` n×m odd.
#[derive(Clone, PartialEq, Debug)]
pub struct EvenSuperMatrix<R> {
    pub a: Mat<R>,
    pub c: Mat<R>,
    pub d: Mat<R>,
    pub b: Mat<R>,
}

impl<R: SuperRing> EvenSuperMatrix<R> {
    pub fn new(a: Mat<R>, c: Mat<R>, d: Mat<R>, b: Mat<R>) -> Result<Self> {
        let (m, n) = (a.rows(), b.rows());
        if a.cols() != m
            || b.cols() != n
            || c.rows() != m
            || c.cols() != n
            || d.rows() != n
            || d.cols() != m
        {
            return Err(Error::DimensionMismatch(
                "block shapes do not form an m|n supermatrix".into(),
            ));
        }
        for (name, blk, want) in [
            ("A", &a, Parity::Even),
            ("B", &b, Parity::Even),
            ("C", &c, Parity::Odd),
            ("D", &d, Parity::Odd),
        ] {
            for (i, j, v) in blk.entries() {
                if !v.is_zero() && v.parity() != want {
                    return Err(Error::ParityViolation(format!(
                        "block {name} entry ({i},{j}) must be {want:?}"
                    )));
                }
            }
        }
        Ok(EvenSuperMatrix { a, c, d, b })
    }

    pub fn identity(m: usize, n: usize, proto: &R) -> Self {
        EvenSuperMatrix {
            a: Mat::identity(m, proto),
            c: Mat::zeros(m, n, proto),
            d: Mat::zeros(n, m, proto),
            b: Mat::identity(n, proto),
        }
    }

    /// Splits a full (m+n)×(m+n) matrix into blocks.
    pub fn from_full(full: &Mat<R>, m: usize, n: usize) -> Result<Self> {
        if full.rows() != m + n || full.cols() != m + n {
            return Err(Error::DimensionMismatch(
                "full matrix does not match m|n".into(),
            ));
        }
        let proto = full.proto().clone();
        let block = |r0: usize, c0: usize, r: usize, c: usize| {
            let mut out = Mat::zeros(r, c, &proto);
            for i in 0..r {
                for j in 0..c {
                    out.set(i, j, full.get(r0 + i, c0 + j).clone());
                }
            }
            out
        };
        Self::new(
            block(0, 0, m, m),
            block(0, m, m, n),
            block(m, 0, n, m),
            block(m, m, n, n),
        )
    }

    pub fn to_full(&self) -> Mat<R> {
        let (m, n) = self.dims();
        let mut out = Mat::zeros(m + n, m + n, self.a.proto());
        for i in 0..m {
            for j in 0..m {
                out.set(i, j, self.a.get(i, j).clone());
            }
            for j in 0..n {
                out.set(i, m + j, self.c.get(i, j).clone());
            }
        }
        for i in 0..n {
            for j in 0..m {
                out.set(m + i, j, self.d.get(i, j).clone());
            }
            for j in 0..n {
                out.set(m + i, m + j, self.b.get(i, j).clone());
            }
        }
        out
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.rows(), self.b.rows())
    }

    pub fn map(&self, f: impl Fn(&R) -> R + Copy) -> Self {
        EvenSuperMatrix {
            a: self.a.map(f),
            c: self.c.map(f),
            d: self.d.map(f),
            b: self.b.map(f),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_full().max_abs()
    }
}

/// Block product `P·Q`.
pub fn sm_mul<R: SuperRing>(
    p: &EvenSuperMatrix<R>,
    q: &EvenSuperMatrix<R>,
) -> Result<EvenSuperMatrix<R>> {
    if p.dims() != q.dims() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            p.dims(),
            q.dims()
        )));
    }
    let a = p.a.mul(&q.a)?.add(&p.c.mul(&q.d)?)?;
    let c = p.a.mul(&q.c)?.add(&p.c.mul(&q.b)?)?;
    let d = p.d.mul(&q.a)?.add(&p.b.mul(&q.d)?)?;
    let b = p.d.mul(&q.c)?.add(&p.b.mul(&q.b)?)?;
    Ok(EvenSuperMatrix { a, c, d, b })
}

/// Determinant of an even square matrix.
pub fn even_det<R: SuperRing>(e: &Mat<R>) -> Result<R> {
    e.even_det()
}

fn invertible<R: SuperRing>(x: &R) -> bool {
    x.pivot_weight().is_some()
}

/// `det A · det(B − D A⁻¹ C)⁻¹`.
pub fn sdet_formula_a<R: SuperRing>(m: &EvenSuperMatrix<R>) -> Result<R> {
    let det_a = m.a.even_det()?;
    if !invertible(&det_a) {
        return Err(Error::SingularBody("det A is not invertible".into()));
    }
    let a_inv = m.a.even_inverse()?;
    let schur = m.b.sub(&m.d.mul(&a_inv)?.mul(&m.c)?)?;
    let det_s = schur.even_det()?;
    let inv = det_s
        .try_inverse()
        .map_err(|_| Error::SingularBody("det(B - D A^-1 C) is not invertible".into()))?;
    Ok(det_a.mul(&inv))
}

/// `det(A − C B⁻¹ D) · det B⁻¹`.
pub fn sdet_formula_b<R: SuperRing>(m: &EvenSuperMatrix<R>) -> Result<R> {
    let det_b = m.b.even_det()?;
    if !invertible(&det_b) {
        return Err(Error::SingularBody("det B is not invertible".into()));
    }
    let b_inv = m.b.even_inverse()?;
    let schur = m.a.sub(&m.c.mul(&b_inv)?.mul(&m.d)?)?;
    let det_s = schur.even_det()?;
    Ok(det_s.mul(&det_b.try_inverse()?))
}

/// Tolerance used when comparing the two formulas in floating point.
fn agreement_tolerance<R: SuperRing>(x: &R) -> f64 {
    if <R::Scalar as Scalar>::EXACT {
        0.0
    } else {
        1e-9 * (1.0 + x.max_abs())
    }
}

/// Superdeterminant (Berezinian). When both block formulas apply they are
/// both evaluated and must agree.
pub fn sdet<R: SuperRing>(m: &EvenSuperMatrix<R>) -> Result<R> {
    let fa = block_invertible(&m.a).then(|| sdet_formula_a(m));
    let fb = block_invertible(&m.b).then(|| sdet_formula_b(m));
    match (fa, fb) {
        (Some(a), Some(b)) => {
            let (a, b) = (a?, b?);
            let diff = a.sub(&b);
            let residual = diff.max_abs();
            if residual > agreement_tolerance(&a) {
                return Err(Error::FormulaDisagreement { residual });
            }
            Ok(a)
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            for blk in [&m.a, &m.b] {
                if let Ok(d) = blk.even_det() {
                    if let Err(crate::algebra::AlgebraError::NonConstantBody) = d.try_inverse() {
                        return Err(Error::Algebra(
                            crate::algebra::AlgebraError::NonConstantBody,
                        ));
                    }
                }
            }
            Err(Error::BothBodiesSingular)
        }
    }
}

fn block_invertible<R: SuperRing>(blk: &Mat<R>) -> bool {
    match blk.even_det() {
        Ok(d) => invertible(&d),
        Err(_) => false,
    }
}

/// Block inverse via both Schur complements.
pub fn sm_inverse<R: SuperRing>(m: &EvenSuperMatrix<R>) -> Result<EvenSuperMatrix<R>> {
    if !block_invertible(&m.a) || !block_invertible(&m.b) {
        return Err(Error::SingularBody(
            "sm_inverse needs invertible diagonal blocks".into(),
        ));
    }
    let a_inv = m.a.even_inverse()?;
    let b_inv = m.b.even_inverse()?;
    let s_a = m.b.sub(&m.d.mul(&a_inv)?.mul(&m.c)?)?;
    let s_b = m.a.sub(&m.c.mul(&b_inv)?.mul(&m.d)?)?;
    let s_a_inv = s_a.even_inverse()?;
    let s_b_inv = s_b.even_inverse()?;
    let c = a_inv.mul(&m.c)?.mul(&s_a_inv)?.neg();
    let d = b_inv.mul(&m.d)?.mul(&s_b_inv)?.neg();
    Ok(EvenSuperMatrix {
        a: s_b_inv,
        c,
        d,
        b: s_a_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Grassmann;
    use crate::Q;

    fn g(t: &str) -> Grassmann<Q> {
        Grassmann::parse(t, 4).unwrap()
    }

    fn mat(rows: Vec<Vec<&str>>) -> Mat<Grassmann<Q>> {
        let proto = g("0");
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(g).collect())
                .collect(),
            &proto,
        )
        .unwrap()
    }

    #[test]
    fn permutation_signs() {
        let perms = permutations(3);
        assert_eq!(perms.len(), 6);
        let total: i32 = perms.iter().map(|p| p.1).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn diagonal_sdet() {
        let m = EvenSuperMatrix::new(
            mat(vec![vec!["2"]]),
            mat(vec![vec!["0"]]),
            mat(vec![vec!["0"]]),
            mat(vec![vec!["3"]]),
        )
        .unwrap();
        assert_eq!(sdet(&m).unwrap(), g("2/3"));
    }

    #[test]
    fn sdet_with_odd_blocks() {
        let m = EvenSuperMatrix::new(
            mat(vec![vec!["1 + s[1,2]"]]),
            mat(vec![vec!["s[3]"]]),
            mat(vec![vec!["s[4]"]]),
            mat(vec![vec!["2"]]),
        )
        .unwrap();
        let a = sdet_formula_a(&m).unwrap();
        let b = sdet_formula_b(&m).unwrap();
        assert_eq!(a, b);
        let inv = sm_inverse(&m).unwrap();
        let id = EvenSuperMatrix::identity(1, 1, &g("0"));
        assert_eq!(sm_mul(&m, &inv).unwrap(), id);
        assert_eq!(sm_mul(&inv, &m).unwrap(), id);
    }

    #[test]
    fn both_singular() {
        let m = EvenSuperMatrix::new(
            mat(vec![vec!["s[1,2]"]]),
            mat(vec![vec!["0"]]),
            mat(vec![vec!["0"]]),
            mat(vec![vec!["0"]]),
        )
        .unwrap();
        assert_eq!(sdet(&m), Err(Error::BothBodiesSingular));
    }

    #[test]
    fn elimination_matches_leibniz() {
        let proto = g("0");
        let mut m = Mat::zeros(6, 6, &proto);
        for i in 0..6 {
            for j in 0..6 {
                let v = ((i * 7 + j * 3) % 5) as i64 - 2 + if i == j { 6 } else { 0 };
                m.set(
                    i,
                    j,
                    Grassmann::from_i64(v, 4) + if i == j { g("s[1,2]") } else { g("0") },
                );
            }
        }
        assert_eq!(m.elimination_det().unwrap(), m.leibniz_det());
        let inv = m.even_inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Mat::identity(6, &proto));
    }
}
