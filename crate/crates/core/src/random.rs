//! Seeded generators of random test data. The stream is ChaCha8, so a seed
//! reproduces the same data on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Grassmann, IndexSet, Parity};
use crate::berezin::OddPoly;
use crate::error::Result;
use crate::poly::SuperPoly;
use crate::scalar::Scalar;
use crate::supermatrix::{EvenSuperMatrix, Mat};
use crate::supersmooth::{SuperMap, SupersmoothFn};

pub struct Gen {
    rng: ChaCha8Rng,
}

/// All exponent vectors in `nvars` variables of total degree `≤ deg`.
pub fn exponents(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for e in 0..=deg {
        for mut rest in exponents(nvars - 1, deg - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

fn subsets(level: u32) -> impl Iterator<Item = IndexSet> {
    (0..1u64 << level).map(IndexSet::from_bits)
}

fn wanted(set: IndexSet, parity: Option<Parity>) -> bool {
    match parity {
        Some(Parity::Even) => set.len().is_multiple_of(2),
        Some(Parity::Odd) => set.len() % 2 == 1,
        _ => true,
    }
}

impl Gen {
    /// Independent stream `stream` of the generator seeded with `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Gen { rng }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    /// A small rational `p/q` with `|p| ≤ 4`, `1 ≤ q ≤ 3`.
    pub fn scalar<S: Scalar>(&mut self) -> S {
        let p = self.int(-4, 4);
        let q = self.int(1, 3);
        S::from_ratio(p, q)
    }

    pub fn nonzero_scalar<S: Scalar>(&mut self) -> S {
        let mut p = 0;
        while p == 0 {
            p = self.int(-4, 4);
        }
        S::from_ratio(p, self.int(1, 3))
    }

    /// Sparse random element at `level`; the body is present only when `body` is set.
    pub fn grassmann<S: Scalar>(
        &mut self,
        level: u32,
        parity: Option<Parity>,
        body: bool,
    ) -> Grassmann<S> {
        let mut g = Grassmann::zero(level);
        for set in subsets(level) {
            if !wanted(set, parity) || (set.is_empty() && !body) {
                continue;
            }
            if self.coin() {
                g.add_term(set, self.scalar());
            }
        }
        g
    }

    pub fn even<S: Scalar>(&mut self, level: u32) -> Grassmann<S> {
        self.grassmann(level, Some(Parity::Even), true)
    }

    pub fn odd<S: Scalar>(&mut self, level: u32) -> Grassmann<S> {
        self.grassmann(level, Some(Parity::Odd), false)
    }

    pub fn nilpotent_even<S: Scalar>(&mut self, level: u32) -> Grassmann<S> {
        self.grassmann(level, Some(Parity::Even), false)
    }

    /// Even element with a nonzero body.
    pub fn invertible_even<S: Scalar>(&mut self, level: u32) -> Grassmann<S> {
        let mut g = self.nilpotent_even(level);
        g.add_term(IndexSet::EMPTY, self.nonzero_scalar());
        g
    }

    /// Homogeneous element of the given parity.
    pub fn homogeneous<S: Scalar>(&mut self, level: u32, parity: Parity) -> Grassmann<S> {
        match parity {
            Parity::Odd => self.odd(level),
            _ => self.even(level),
        }
    }

    /// Polynomial with random Grassmann coefficients of the given parity.
    pub fn poly<S: Scalar>(
        &mut self,
        nvars: usize,
        deg: u32,
        level: u32,
        parity: Option<Parity>,
    ) -> SuperPoly<S> {
        let mut p = SuperPoly::zero(nvars, level);
        for e in exponents(nvars, deg) {
            if self.coin() {
                p.add_term(e, self.grassmann(level, parity, true));
            }
        }
        p
    }

    /// Polynomial with random rational coefficients.
    pub fn real_poly<S: Scalar>(&mut self, nvars: usize, deg: u32) -> SuperPoly<S> {
        let mut p = SuperPoly::zero(nvars, 0);
        for e in exponents(nvars, deg) {
            if self.coin() {
                p.add_term(e, Grassmann::scalar(self.scalar(), 0));
            }
        }
        p
    }

    /// Dense real polynomial of exact degree `deg` in one variable.
    pub fn real_univariate<S: Scalar>(&mut self, deg: usize) -> SuperPoly<S> {
        let mut c: Vec<S> = (0..deg).map(|_| self.scalar()).collect();
        c.push(self.nonzero_scalar());
        SuperPoly::univariate(&c, 0)
    }

    /// `Σ_a θ^a v_a`; homogeneous of `parity` when given.
    pub fn odd_poly<S: Scalar>(
        &mut self,
        n: usize,
        level: u32,
        parity: Option<Parity>,
    ) -> OddPoly<S> {
        let mut coeffs = Vec::new();
        for a in subsets(n as u32) {
            let cp = parity.map(|p| p.product(Parity::of_degree(a.len())));
            coeffs.push((a, self.grassmann(level, cp, true)));
        }
        OddPoly::from_coeffs(n, level, coeffs).expect("valid random odd polynomial")
    }

    /// Random polynomial supersmooth function of `m|n` variables.
    pub fn superfn<S: Scalar>(
        &mut self,
        m: usize,
        n: usize,
        deg: u32,
        level: u32,
        parity: Option<Parity>,
    ) -> SupersmoothFn<S> {
        let mut polys = Vec::new();
        for a in subsets(n as u32) {
            let cp = parity.map(|p| p.product(Parity::of_degree(a.len())));
            polys.push((a, self.poly(m, deg, level, cp)));
        }
        SupersmoothFn::from_polys(m, n, level, polys).expect("valid random function")
    }

    /// Even square matrix whose body has nonzero determinant.
    pub fn invertible_even_matrix<S: Scalar>(&mut self, k: usize, level: u32) -> Mat<Grassmann<S>> {
        let proto = Grassmann::zero(level);
        loop {
            let mut mat = Mat::zeros(k, k, &proto);
            for i in 0..k {
                for j in 0..k {
                    let mut g = self.nilpotent_even(level);
                    g.add_term(IndexSet::EMPTY, S::from_i64(self.int(-3, 3)));
                    mat.set(i, j, g);
                }
            }
            let body = Mat::from_rows(
                (0..k)
                    .map(|i| {
                        (0..k)
                            .map(|j| Grassmann::scalar(mat.get(i, j).body(), 0))
                            .collect()
                    })
                    .collect(),
                &Grassmann::zero(0),
            )
            .expect("square");
            if !body.even_det().expect("even").body().is_zero() {
                return mat;
            }
        }
    }

    pub fn odd_matrix<S: Scalar>(
        &mut self,
        rows: usize,
        cols: usize,
        level: u32,
    ) -> Mat<Grassmann<S>> {
        let proto = Grassmann::zero(level);
        let mut mat = Mat::zeros(rows, cols, &proto);
        for i in 0..rows {
            for j in 0..cols {
                mat.set(i, j, self.odd(level));
            }
        }
        mat
    }

    /// Even supermatrix with both diagonal blocks invertible.
    pub fn supermatrix<S: Scalar>(
        &mut self,
        m: usize,
        n: usize,
        level: u32,
    ) -> EvenSuperMatrix<Grassmann<S>> {
        let a = self.invertible_even_matrix(m, level);
        let c = self.odd_matrix(m, n, level);
        let d = self.odd_matrix(n, m, level);
        let b = self.invertible_even_matrix(n, level);
        EvenSuperMatrix::new(a, c, d, b).expect("parity-consistent blocks")
    }
}

impl Gen {
    /// A superdiffeomorphism `x = y + β(ω)p(y)`, `θ = ωB` of `1|2` variables,
    /// with `β = cω1ω2 + ω1s1 + ω2s2` (`c` even, `s_k` odd constants), a cubic `p`
    /// and an invertible even `B`; returned with its inverse.
    pub fn superdiffeo<S: Scalar>(&mut self, level: u32) -> Result<(SuperMap<S>, SuperMap<S>)> {
        let konst = |g: Grassmann<S>| SuperPoly::constant(g, 1);
        let beta = SupersmoothFn::from_polys(
            1,
            2,
            level,
            [
                (IndexSet::range(0, 2), konst(self.even(level))),
                (IndexSet::singleton(1), konst(self.odd(level))),
                (IndexSet::singleton(2), konst(self.odd(level))),
            ],
        )?;
        let p = self.real_univariate::<S>(3).lift(level);
        let dp = p.derivative(0);
        let pf = SupersmoothFn::from_poly(2, p.clone());
        let y = SupersmoothFn::even_var(1, 1, 2, level)?;
        let b = self.invertible_even_matrix(2, level);
        let diag = |blk: Mat<Grassmann<S>>| -> Result<SuperMap<S>> {
            let proto = Grassmann::zero(level);
            SuperMap::linear(&EvenSuperMatrix::new(
                Mat::identity(1, &proto),
                Mat::zeros(1, 2, &proto),
                Mat::zeros(2, 1, &proto),
                blk,
            )?)
        };
        let forward = diag(b.clone())?;
        let shift = beta.mul(&pf)?;
        let phi = SuperMap::new(1, 2, vec![y.add(&shift)?], forward.odd().to_vec())?;
        // y = x − βp(x) + β²p(x)p'(x), exact because β³ = 0
        let second = beta
            .mul(&beta)?
            .mul(&SupersmoothFn::from_poly(2, p.mul(&dp)))?;
        let psi_x = y.sub(&shift)?.add(&second)?;
        let ws = (1..=2)
            .map(|k| SupersmoothFn::odd_var(k, 1, 2, level))
            .collect::<Result<Vec<_>>>()?;
        let psi = SuperMap::new(1, 2, vec![psi_x], ws)?;
        let inv = psi.compose(&diag(b.even_inverse()?)?)?;
        Ok((phi, inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<i64> = {
            let mut g = Gen::new(7, 1);
            (0..20).map(|_| g.int(0, 1000)).collect()
        };
        let b: Vec<i64> = {
            let mut g = Gen::new(7, 1);
            (0..20).map(|_| g.int(0, 1000)).collect()
        };
        let c: Vec<i64> = {
            let mut g = Gen::new(7, 2);
            (0..20).map(|_| g.int(0, 1000)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn parity_is_respected() {
        let mut g = Gen::new(1, 0);
        for _ in 0..20 {
            let o: Grassmann<Q> = g.odd(4);
            assert!(o.is_zero() || o.parity() == Parity::Odd);
            let v: OddPoly<Q> = g.odd_poly(3, 2, Some(Parity::Odd));
            assert!(v.is_zero() || v.parity() == Parity::Odd);
        }
        assert_eq!(exponents(2, 2).len(), 6);
    }
}
